//! Fixed-order summation.
//!
//! Every grid reduction in the crate goes through [`pairwise_sum`] so the
//! result depends only on the values and their order, never on how the
//! values were produced (serially or on a thread pool).

const BLOCK: usize = 8;

/// Pairwise (cascade) summation with a fixed split point at `len / 2`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n`, evaluated without allocating.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: &F) -> f64 {
    fn go<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= BLOCK {
            return (lo..hi).fold(0.0, |acc, i| acc + f(i));
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_closure_form() {
        let v: Vec<f64> = (0..1000)
            .map(|i| (i as f64).sin() / (1.0 + i as f64))
            .collect();
        assert_eq!(
            pairwise_sum(&v).to_bits(),
            pairwise_sum_by(v.len(), &|i| v[i]).to_bits()
        );
    }

    #[test]
    fn small_and_empty() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn better_than_naive_on_long_runs() {
        let v = vec![0.1; 1 << 20];
        let exact = 0.1 * (1u64 << 20) as f64;
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - exact).abs() <= (naive - exact).abs());
    }
}
