//! Maximum-relative-entropy estimation of a qubit state from `⟨σ_z⟩`.
//!
//! Configurations are labelled `(θ, φ, r)`: a preparation direction on the
//! Bloch sphere and a `σ_z` outcome `r = ±1`. Joint densities are restricted
//! to the form `p̃(θ,φ,r) = q(r|θ,φ)·p(θ,φ)` where `q` is the Born
//! conditional, so only the marginal `p` is varied. Under the single linear
//! constraint `∬ cos θ · p dΩ = σ̄_z` the entropy relative to a prior `m` is
//! maximized by the exponential family `p ∝ m·e^{−λ cos θ}`; `λ` is found by
//! bracketed root finding on the grid-evaluated constraint.
//!
//! Relative entropy is `H(p‖m) = −∬ p ln(p/m) dΩ` (nats), which is `≤ 0`
//! and vanishes iff `p = m`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bloch::{
    born_conditional, projector, state_from_direction, BlochDirection, DensityMatrix, Sign, C64,
};
use crate::error::{Error, Result};
use crate::grid::{GridNode, SphericalGrid, DEFAULT_N_PHI, DEFAULT_N_THETA};
use crate::roots::bisect_secant_polished;

/// Largest `|σ̄_z|` accepted by the solver; `λ` diverges at `±1`.
pub const MAX_ABS_SIGMA_Z: f64 = 1.0 - 1e-9;
/// Residual tolerance on the constraint used when none is given.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Half-width of the first bracket for `λ`.
pub const INITIAL_BRACKET: f64 = 75.0;
/// The bracket is doubled until it reaches this half-width.
const MAX_BRACKET: f64 = 1e10;
/// Relative change of `λ` under `N_θ → 2N_θ` below which a grid is deemed
/// to resolve the solution.
const GRID_AGREEMENT: f64 = 1e-10;
const MAX_N_THETA: usize = 1 << 14;
/// Normalization tolerance for stored densities.
const NORMALIZATION_TOL: f64 = 1e-8;
/// Tolerance of the `p̃(+)/(p̃(+)+p̃(−)) = cos²(θ/2)` check.
const BORN_TOL: f64 = 1e-10;
const BORN_DENOMINATOR_FLOOR: f64 = 1e-14;

const FOUR_PI: f64 = 4.0 * PI;

/// Density `p(θ,φ)` per steradian, tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDensity {
    grid: SphericalGrid,
    values: Vec<f64>,
}

impl MarginalDensity {
    /// Checks length, nonnegativity and unit normalization (within 1e−8).
    pub fn new(grid: SphericalGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidDensity(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDensity(format!(
                "value {} at node {k} is negative or non-finite",
                values[k]
            )));
        }
        let total = grid.integrate_values(&values);
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!(
                "integrates to {total}, not 1"
            )));
        }
        Ok(Self { grid, values })
    }

    /// `m = 1/(4π)`.
    pub fn uniform(grid: SphericalGrid) -> Self {
        let values = vec![1.0 / FOUR_PI; grid.len()];
        Self { grid, values }
    }

    /// Tabulates `f` and rescales it to unit mass on the grid.
    pub fn from_fn<F>(grid: SphericalGrid, f: F) -> Result<Self>
    where
        F: Fn(GridNode) -> f64 + Sync + Send,
    {
        let raw = grid.tabulate(f);
        let total = grid.integrate_values(&raw);
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "cannot normalize mass {total}"
            )));
        }
        let values = raw.into_iter().map(|v| v / total).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }
}

/// Joint density `p̃(θ,φ,r)`, one table per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDensity {
    grid: SphericalGrid,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl JointDensity {
    /// Checks shape, nonnegativity and that the two tables together carry
    /// unit mass. Compatibility with the Born conditional is not required
    /// here; see [`JointDensity::check_born_conditional`].
    pub fn new(grid: SphericalGrid, plus: Vec<f64>, minus: Vec<f64>) -> Result<Self> {
        if plus.len() != grid.len() || minus.len() != grid.len() {
            return Err(Error::InvalidDensity(format!(
                "expected {} values per outcome",
                grid.len()
            )));
        }
        if plus
            .iter()
            .chain(&minus)
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InvalidDensity("negative or non-finite value".into()));
        }
        let total = grid.integrate_values(&plus) + grid.integrate_values(&minus);
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!(
                "integrates to {total}, not 1"
            )));
        }
        Ok(Self { grid, plus, minus })
    }

    /// `p̃(θ,φ,r) = q(r|θ,φ)·p(θ,φ)`.
    pub fn from_marginal(p: &MarginalDensity) -> Self {
        let grid = p.grid.clone();
        let mut plus = Vec::with_capacity(grid.len());
        let mut minus = Vec::with_capacity(grid.len());
        for (node, v) in grid.nodes().zip(&p.values) {
            plus.push(born_conditional(Sign::Plus, node.theta, node.phi) * v);
            minus.push(born_conditional(Sign::Minus, node.theta, node.phi) * v);
        }
        Self { grid, plus, minus }
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn values(&self, r: Sign) -> &[f64] {
        match r {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// `p(θ,φ) = Σ_r p̃(θ,φ,r)`.
    pub fn marginal(&self) -> MarginalDensity {
        let values = self
            .plus
            .iter()
            .zip(&self.minus)
            .map(|(a, b)| a + b)
            .collect();
        MarginalDensity {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Verifies `p̃(+)/(p̃(+)+p̃(−)) = cos²(θ/2)` wherever the denominator
    /// exceeds 1e−14.
    pub fn check_born_conditional(&self) -> Result<()> {
        for (k, node) in self.grid.nodes().enumerate() {
            let total = self.plus[k] + self.minus[k];
            if total > BORN_DENOMINATOR_FLOOR {
                let ratio = self.plus[k] / total;
                let deviation = (ratio - born_conditional(Sign::Plus, node.theta, node.phi)).abs();
                if deviation > BORN_TOL {
                    return Err(Error::IncompatibleJoint { node: k, deviation });
                }
            }
        }
        Ok(())
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate_values(&self.plus) + self.grid.integrate_values(&self.minus)
    }
}

/// `⟨σ_z⟩ = ∬ cos θ · p(θ,φ) dΩ` with `p` the marginal of `p̃`.
pub fn expectation_sigma_z(p: &JointDensity) -> f64 {
    let values: Vec<f64> = p
        .grid
        .nodes()
        .zip(p.plus.iter().zip(&p.minus))
        .map(|(node, (a, b))| node.u * (a + b))
        .collect();
    p.grid.integrate_values(&values)
}

/// `⟨σ_z⟩ = Σ_r ∬ r · p̃(θ,φ,r) dΩ`, the outcome-weighted form. Agrees with
/// [`expectation_sigma_z`] whenever `p̃` follows the Born conditional.
pub fn expectation_sigma_z_outcomes(p: &JointDensity) -> f64 {
    p.grid.integrate_values(&p.plus) - p.grid.integrate_values(&p.minus)
}

fn check_same_grid(a: &SphericalGrid, b: &SphericalGrid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "grid mismatch: {}x{} vs {}x{}",
            a.n_theta(),
            a.n_phi(),
            b.n_theta(),
            b.n_phi()
        )))
    }
}

fn check_prior(m: &[f64]) -> Result<()> {
    match m.iter().position(|v| !(*v > 0.0)) {
        Some(node) => Err(Error::NonPositivePrior {
            node,
            value: m[node],
        }),
        None => Ok(()),
    }
}

/// `x ln(x/y)` with `0 ln 0 = 0`.
fn xlogx_over(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// `H(p‖m) = −∬ p ln(p/m) dΩ` over marginal densities.
pub fn relative_entropy_marginal(p: &MarginalDensity, m: &MarginalDensity) -> Result<f64> {
    check_same_grid(&p.grid, &m.grid)?;
    check_prior(&m.values)?;
    let terms: Vec<f64> = p
        .values
        .iter()
        .zip(&m.values)
        .map(|(&pv, &mv)| xlogx_over(pv, mv))
        .collect();
    Ok(-p.grid.integrate_values(&terms))
}

/// `H(p̃‖m̃) = −Σ_r ∬ p̃ ln(p̃/m̃) dΩ`. Both densities must follow the Born
/// conditional and the prior marginal must be positive.
pub fn relative_entropy_joint(p: &JointDensity, m: &JointDensity) -> Result<f64> {
    check_same_grid(&p.grid, &m.grid)?;
    check_prior(&m.marginal().values)?;
    m.check_born_conditional()?;
    p.check_born_conditional()?;
    let mut terms = Vec::with_capacity(2 * p.grid.len());
    for r in Sign::BOTH {
        let pv = p.values(r);
        let mv = m.values(r);
        for (k, (&a, &b)) in pv.iter().zip(mv).enumerate() {
            if a > 0.0 && !(b > 0.0) {
                return Err(Error::NonPositivePrior { node: k, value: b });
            }
            terms.push(xlogx_over(a, b));
        }
    }
    let (plus, minus) = terms.split_at(p.grid.len());
    Ok(-(p.grid.integrate_values(plus) + p.grid.integrate_values(minus)))
}

/// Multiplier `λ` and partition value `Z` of the maximum-entropy solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangeSolution {
    pub lambda: f64,
    /// `Z = ∬ m e^{−λ cos θ} dΩ`. Overflows to infinity for `|λ| ≳ 700`;
    /// `log_partition` stays finite.
    #[serde(rename = "Z")]
    pub partition: f64,
    #[serde(rename = "log_Z")]
    pub log_partition: f64,
    pub sigma_z: f64,
    /// `|⟨σ_z⟩ − σ̄_z|` on the grid the solution was found on.
    pub residual: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl LagrangeSolution {
    pub fn grid(&self) -> Result<SphericalGrid> {
        SphericalGrid::new(self.n_theta, self.n_phi)
    }
}

/// `(⟨cos θ⟩, ln Z)` under `p ∝ m·e^{−λ cos θ}` on the prior's grid.
pub fn partition_function(prior: &MarginalDensity, lambda: f64) -> (f64, f64) {
    tilted_moments(&prior.grid, &prior.values, lambda)
}

// exponents are shifted by their maximum so large |λ| cannot overflow
fn tilted_moments(grid: &SphericalGrid, prior: &[f64], lambda: f64) -> (f64, f64) {
    let exponents: Vec<f64> = grid.nodes().map(|n| -lambda * n.u).collect();
    let shift = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mass: Vec<f64> = exponents
        .iter()
        .zip(prior)
        .map(|(e, m)| m * (e - shift).exp())
        .collect();
    let first: Vec<f64> = grid.nodes().zip(&mass).map(|(n, w)| n.u * w).collect();
    let z0 = grid.integrate_values(&mass);
    let z1 = grid.integrate_values(&first);
    (z1 / z0, shift + z0.ln())
}

fn check_sigma_z(sigma_z: f64) -> Result<()> {
    if !sigma_z.is_finite() || sigma_z.abs() > MAX_ABS_SIGMA_Z {
        Err(Error::OutOfRange(sigma_z))
    } else {
        Ok(())
    }
}

/// Solves for `λ` on a fixed grid and prior: the grid expectation of
/// `cos θ` under `p ∝ m·e^{−λ cos θ}` must equal `sigma_z` within `tol`.
///
/// The bracket starts at `[−75, 75]` and doubles outwards while the root
/// lies beyond it.
pub fn solve_lambda_on(
    prior: &MarginalDensity,
    sigma_z: f64,
    tol: f64,
) -> Result<LagrangeSolution> {
    check_sigma_z(sigma_z)?;
    check_prior(&prior.values)?;
    let grid = &prior.grid;
    // decreasing in λ: the variance of cos θ is its derivative (negated)
    let constraint = |lambda: f64| tilted_moments(grid, &prior.values, lambda).0 - sigma_z;

    let (mut lo, mut hi) = (-INITIAL_BRACKET, INITIAL_BRACKET);
    while constraint(lo) < 0.0 {
        if lo <= -MAX_BRACKET {
            return Err(Error::NoConvergence(format!(
                "sigma_z = {sigma_z} not reached by lambda >= {lo} on a {}x{} grid",
                grid.n_theta(),
                grid.n_phi()
            )));
        }
        hi = lo;
        lo *= 2.0;
    }
    while constraint(hi) > 0.0 {
        if hi >= MAX_BRACKET {
            return Err(Error::NoConvergence(format!(
                "sigma_z = {sigma_z} not reached by lambda <= {hi} on a {}x{} grid",
                grid.n_theta(),
                grid.n_phi()
            )));
        }
        lo = hi;
        hi *= 2.0;
    }

    // polish well past `tol` so λ itself is stable to near machine precision
    let root = bisect_secant_polished(constraint, lo, hi, 1e-3 * tol, tol, 400)?;
    let (mean, log_partition) = tilted_moments(grid, &prior.values, root.x);
    Ok(LagrangeSolution {
        lambda: root.x,
        partition: log_partition.exp(),
        log_partition,
        sigma_z,
        residual: (mean - sigma_z).abs(),
        n_theta: grid.n_theta(),
        n_phi: grid.n_phi(),
    })
}

/// [`solve_lambda_from`] on the default `64 × 8` grid with the uniform prior.
pub fn solve_lambda(sigma_z: f64, tol: f64) -> Result<LagrangeSolution> {
    solve_lambda_from(DEFAULT_N_THETA, DEFAULT_N_PHI, sigma_z, tol)
}

/// Solves with the uniform prior, starting on an `n_theta × n_phi` grid and
/// doubling `n_theta` until the next doubling moves `λ` by less than 1e−10
/// relative. For `|λ|` up to a few hundred the starting grid already
/// resolves the solution and is the one reported.
pub fn solve_lambda_from(
    n_theta: usize,
    n_phi: usize,
    sigma_z: f64,
    tol: f64,
) -> Result<LagrangeSolution> {
    check_sigma_z(sigma_z)?;
    let solve = |n: usize| -> Result<LagrangeSolution> {
        let prior = MarginalDensity::uniform(SphericalGrid::new(n, n_phi)?);
        solve_lambda_on(&prior, sigma_z, tol)
    };
    let mut n = n_theta;
    let mut current = solve(n);
    if let Err(e) = &current {
        if !e.is_numerical() {
            return current;
        }
    }
    while 2 * n <= MAX_N_THETA {
        let finer = solve(2 * n);
        if let (Ok(c), Ok(f)) = (&current, &finer) {
            if (c.lambda - f.lambda).abs() <= GRID_AGREEMENT * f.lambda.abs().max(1.0) {
                return current;
            }
        }
        current = finer;
        n *= 2;
    }
    match current {
        Ok(s) => Err(Error::NoConvergence(format!(
            "lambda = {} not resolved with n_theta <= {MAX_N_THETA}",
            s.lambda
        ))),
        Err(e) => Err(e),
    }
}

/// `p̃′ = q(r|θ,φ) · m · e^{−λ cos θ} / Z` with the uniform prior, normalized on
/// `grid`.
pub fn maxent_density(sol: &LagrangeSolution, grid: &SphericalGrid) -> JointDensity {
    maxent_density_with_prior(sol, &MarginalDensity::uniform(grid.clone()))
}

/// As [`maxent_density`] for an arbitrary prior (on the prior's grid).
pub fn maxent_density_with_prior(sol: &LagrangeSolution, prior: &MarginalDensity) -> JointDensity {
    let grid = &prior.grid;
    let (_, log_partition) = tilted_moments(grid, &prior.values, sol.lambda);
    let values = grid
        .nodes()
        .zip(&prior.values)
        .map(|(n, m)| m * (-sol.lambda * n.u - log_partition).exp())
        .collect();
    JointDensity::from_marginal(&MarginalDensity {
        grid: grid.clone(),
        values,
    })
}

/// `ρ = Σ_r ∬ p̃(θ,φ,r) |θ,φ⟩⟨θ,φ| dΩ`.
pub fn reconstruct_density_matrix(p: &JointDensity) -> Result<DensityMatrix> {
    let grid = &p.grid;
    let n = grid.len();
    // one column per real component of the four entries
    let mut columns: Vec<Vec<f64>> = (0..8).map(|_| Vec::with_capacity(n)).collect();
    for (k, node) in grid.nodes().enumerate() {
        let direction = BlochDirection::new(node.theta, node.phi)?;
        let kernel = projector(&state_from_direction(direction));
        let mass = p.plus[k] + p.minus[k];
        for (c, z) in kernel.entries().iter().flatten().enumerate() {
            columns[2 * c].push(z.re * mass);
            columns[2 * c + 1].push(z.im * mass);
        }
    }
    let part: Vec<f64> = columns
        .iter()
        .map(|col| grid.integrate_values(col))
        .collect();
    let entry = |c: usize| C64::new(part[2 * c], part[2 * c + 1]);
    DensityMatrix::new([[entry(0), entry(1)], [entry(2), entry(3)]])
}

/// Closed form `½(I + σ̄_z σ_z)`, the maximum von Neumann entropy state with
/// the same constraint.
pub fn von_neumann_check(sigma_z: f64) -> Result<DensityMatrix> {
    if !sigma_z.is_finite() || sigma_z.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma_z = {sigma_z} outside [-1, 1]"
        )));
    }
    DensityMatrix::from_bloch_vector([0.0, 0.0, sigma_z])
}

/// Output of the full estimation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimation {
    pub solution: LagrangeSolution,
    pub density: JointDensity,
    /// `H(p′‖m)` in nats.
    pub entropy: f64,
    pub rho: DensityMatrix,
}

/// Serialized estimation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub sigma_z: f64,
    pub lambda: f64,
    #[serde(rename = "Z")]
    pub partition: f64,
    #[serde(rename = "log_Z")]
    pub log_partition: f64,
    pub residual: f64,
    pub entropy: f64,
    /// Row-major `[re, im]` pairs.
    pub rho: [[f64; 2]; 4],
    pub grid: GridSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSize {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Estimation {
    pub fn report(&self) -> EstimationReport {
        EstimationReport {
            sigma_z: self.solution.sigma_z,
            lambda: self.solution.lambda,
            partition: self.solution.partition,
            log_partition: self.solution.log_partition,
            residual: self.solution.residual,
            entropy: self.entropy,
            rho: self.rho.to_re_im(),
            grid: GridSize {
                n_theta: self.solution.n_theta,
                n_phi: self.solution.n_phi,
            },
        }
    }
}

/// Solve, build `p̃′`, and reconstruct `ρ` on the grid the solve settled on.
pub fn estimate(sigma_z: f64, n_theta: usize, n_phi: usize) -> Result<Estimation> {
    estimate_with_tol(sigma_z, n_theta, n_phi, DEFAULT_TOL)
}

pub fn estimate_with_tol(
    sigma_z: f64,
    n_theta: usize,
    n_phi: usize,
    tol: f64,
) -> Result<Estimation> {
    // validate the requested grid before any solve
    SphericalGrid::new(n_theta, n_phi)?;
    let solution = solve_lambda_from(n_theta, n_phi, sigma_z, tol)?;
    let grid = solution.grid()?;
    let density = maxent_density(&solution, &grid);
    let prior = MarginalDensity::uniform(grid);
    let entropy = relative_entropy_marginal(&density.marginal(), &prior)?;
    let rho = reconstruct_density_matrix(&density)?;
    Ok(Estimation {
        solution,
        density,
        entropy,
        rho,
    })
}
