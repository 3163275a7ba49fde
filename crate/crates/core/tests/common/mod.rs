//! Independent reference computations for integration tests. Nothing here
//! calls into the solver, the quadrature grid or the state types.

#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

/// Langevin function `coth x − 1/x`, Taylor series near the origin.
pub fn langevin(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x / 3.0 - x.powi(3) / 45.0 + 2.0 * x.powi(5) / 945.0
    } else {
        1.0 / x.tanh() - 1.0 / x
    }
}

/// `λ` with `−L(λ) = σ` by plain bisection on `[−1e4, 1e4]`.
pub fn lambda_oracle(sigma: f64) -> f64 {
    let (mut lo, mut hi) = (-1e4f64, 1e4f64);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        // −L is decreasing in λ
        if -langevin(mid) > sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `sinh λ / λ`, the partition value for the uniform prior.
pub fn partition_closed_form(lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else {
        lambda.sinh() / lambda
    }
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Relative entropy `−∬ p ln(4π p) dΩ` of `p ∝ e^{−λu}` against the uniform
/// prior, integrated by Simpson's rule in `u` (the integrand has no φ).
pub fn entropy_oracle(lambda: f64) -> f64 {
    let n = 20_000;
    let z = simpson(|u| 0.5 * (-lambda * u).exp(), -1.0, 1.0, n);
    let p = |u: f64| (-lambda * u).exp() / (4.0 * PI * z);
    -2.0 * PI * simpson(|u| p(u) * (4.0 * PI * p(u)).ln(), -1.0, 1.0, n)
}

/// `cos(θ/2)|z+⟩ + e^{iφ} sin(θ/2)|z−⟩` as a raw pair.
pub fn raw_state(theta: f64, phi: f64) -> [C64; 2] {
    [
        C64::new((0.5 * theta).cos(), 0.0),
        C64::from_polar((0.5 * theta).sin(), phi),
    ]
}

/// Raw eigenstate of `n·σ` with eigenvalue `sign` (`±1`): the `−` state is
/// the orthogonal complement `(−e^{−iφ} sin(θ/2), cos(θ/2))`.
pub fn raw_eigenstate(theta: f64, phi: f64, sign: i32) -> [C64; 2] {
    if sign > 0 {
        raw_state(theta, phi)
    } else {
        [
            -C64::from_polar((0.5 * theta).sin(), -phi),
            C64::new((0.5 * theta).cos(), 0.0),
        ]
    }
}

/// `|(⟨a±| ⊗ ⟨b±|) (|++⟩ + |−−⟩)/√2|²` via an explicit Kronecker product.
pub fn bell_oracle(a: (f64, f64), b: (f64, f64), ra: i32, rb: i32) -> f64 {
    let u = raw_eigenstate(a.0, a.1, ra);
    let v = raw_eigenstate(b.0, b.1, rb);
    let kron = [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]];
    let psi = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
    kron.iter()
        .zip(psi)
        .fold(C64::new(0.0, 0.0), |acc, (k, p)| acc + k.conj() * p)
        .norm_sqr()
}

/// Three standard deviations of a binomial count.
pub fn three_sigma(n: u64, p: f64) -> f64 {
    3.0 * (n as f64 * p * (1.0 - p)).sqrt()
}
