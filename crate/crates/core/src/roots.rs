//! Bracketed scalar root finding: bisection to shrink the bracket, then
//! secant steps that fall back to bisection whenever they leave it.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Bracket width (relative to `1 + |x|`) below which secant steps start.
const SECANT_SWITCH: f64 = 1e-3;

/// Finds `x` in `[lo, hi]` with `|f(x)| <= tol`. `f(lo)` and `f(hi)` must
/// differ in sign (or one of them already satisfies the tolerance).
pub fn bisect_secant<F>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    bisect_secant_polished(f, lo, hi, tol, tol, max_iter)
}

/// Iterates until `|f(x)| <= target` (or the bracket collapses), then
/// accepts the best point found if `|f(x)| <= accept`.
pub fn bisect_secant_polished<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    target: f64,
    accept: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let tol = target;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::NoConvergence(
            "function is NaN at the bracket ends".into(),
        ));
    }
    if fa.abs() <= tol {
        return Ok(Root {
            x: a,
            fx: fa,
            iterations: 0,
        });
    }
    if fb.abs() <= tol {
        return Ok(Root {
            x: b,
            fx: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change on [{a}, {b}] (f = {fa:e}, {fb:e})"
        )));
    }

    // the two most recent evaluations drive the secant step
    let mut prev = (a, fa);
    let mut last = (b, fb);
    let mut best = if fa.abs() < fb.abs() { prev } else { last };
    for iter in 1..=max_iter {
        let mid = a + 0.5 * (b - a);
        let candidate = if b - a > SECANT_SWITCH * (1.0 + mid.abs()) {
            mid
        } else {
            let (x0, f0) = prev;
            let (x1, f1) = last;
            let x = x1 - f1 * (x1 - x0) / (f1 - f0);
            if x.is_finite() && x > a && x < b {
                x
            } else {
                mid
            }
        };
        if candidate <= a || candidate >= b {
            // bracket collapsed to adjacent floats
            return finish(best, accept, iter);
        }
        let fc = f(candidate);
        if fc.is_nan() {
            return Err(Error::NoConvergence(format!(
                "function is NaN at {candidate}"
            )));
        }
        prev = last;
        last = (candidate, fc);
        if fc.abs() < best.1.abs() {
            best = last;
        }
        if fc.abs() <= tol {
            return Ok(Root {
                x: candidate,
                fx: fc,
                iterations: iter,
            });
        }
        if fc.signum() == fa.signum() {
            a = candidate;
            fa = fc;
        } else {
            b = candidate;
        }
    }
    finish(best, accept, max_iter)
}

fn finish(best: (f64, f64), tol: f64, iterations: usize) -> Result<Root> {
    if best.1.abs() <= tol {
        Ok(Root {
            x: best.0,
            fx: best.1,
            iterations,
        })
    } else {
        Err(Error::NoConvergence(format!(
            "best residual {:e} at x = {} exceeds tolerance {tol:e}",
            best.1, best.0
        )))
    }
}
