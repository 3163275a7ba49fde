//! Product quadrature on the unit sphere.
//!
//! Gauss–Legendre in `u = cos θ` times the uniform rule in `φ`, so
//! `∬ f sin θ dθ dφ ≈ Σ_k w_k f(θ_k, φ_k)`. The `u` rule is exact for
//! polynomials of degree `2N_θ − 1`; the `φ` rule is exact for trigonometric
//! polynomials of degree below `N_φ`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::{pairwise_sum, pairwise_sum_by};

pub const DEFAULT_N_THETA: usize = 64;
pub const DEFAULT_N_PHI: usize = 8;

/// Grids with at least this many nodes are tabulated on the thread pool.
const PARALLEL_NODES: usize = 1 << 14;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One quadrature node on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNode {
    pub theta: f64,
    pub phi: f64,
    /// `cos θ`.
    pub u: f64,
    /// Solid-angle weight.
    pub weight: f64,
}

/// Quadrature grid over the sphere. Nodes are indexed `i_θ · N_φ + i_φ` and
/// every reduction runs in that order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalGrid {
    n_theta: usize,
    n_phi: usize,
    #[serde(skip)]
    u_nodes: Vec<f64>,
    #[serde(skip)]
    u_weights: Vec<f64>,
    #[serde(skip)]
    phi_nodes: Vec<f64>,
}

impl SphericalGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 1 {
            return Err(Error::InvalidGrid { n_theta, n_phi });
        }
        let (u_nodes, u_weights) = gauss_legendre(n_theta);
        let phi_nodes = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();
        Ok(Self {
            n_theta,
            n_phi,
            u_nodes,
            u_weights,
            phi_nodes,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phi_weight(&self) -> f64 {
        TAU / self.n_phi as f64
    }

    pub fn u_nodes(&self) -> &[f64] {
        &self.u_nodes
    }

    pub fn u_weights(&self) -> &[f64] {
        &self.u_weights
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi_nodes
    }

    pub fn node(&self, k: usize) -> GridNode {
        let i = k / self.n_phi;
        let j = k % self.n_phi;
        let u = self.u_nodes[i];
        GridNode {
            theta: u.clamp(-1.0, 1.0).acos(),
            phi: self.phi_nodes[j],
            u,
            weight: self.u_weights[i] * self.phi_weight(),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = GridNode> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes().map(|n| n.weight).collect()
    }

    /// Evaluates `f` at every node, in node order.
    pub fn tabulate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(GridNode) -> f64 + Sync + Send,
    {
        if self.len() >= PARALLEL_NODES {
            (0..self.len())
                .into_par_iter()
                .map(|k| f(self.node(k)))
                .collect()
        } else {
            self.nodes().map(f).collect()
        }
    }

    /// `∬ f sin θ dθ dφ` over the grid.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(GridNode) -> f64 + Sync + Send,
    {
        pairwise_sum(&self.tabulate(|n| n.weight * f(n)))
    }

    /// `Σ_k w_k · values[k]`.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let w = self.phi_weight();
        pairwise_sum_by(self.len(), &|k| {
            self.u_weights[k / self.n_phi] * w * values[k]
        })
    }

    /// Same node layout (hence same nodes and weights).
    pub fn same_as(&self, other: &SphericalGrid) -> bool {
        self.n_theta == other.n_theta && self.n_phi == other.n_phi
    }
}
