//! Poisson photon-number statistics for weak coherent sources.

use crate::{CoreError, Real};
use rand::Rng;

/// Poisson probability mass `P(n) = meanⁿ·e^(−mean)/n!`.
///
/// Computed iteratively (`P(0) = e^(−mean)`, `P(n) = P(n−1)·mean/n`) to avoid
/// overflowing factorials.
///
/// # Errors
/// Returns [`CoreError::Domain`] for a negative or non-finite mean.
pub fn poisson_pmf<T: Real>(mean: T, n: usize) -> Result<T, CoreError> {
    if !(mean >= T::zero()) || !mean.is_finite() {
        return Err(CoreError::domain(format!(
            "poisson_pmf mean {mean} must be finite and nonnegative"
        )));
    }
    let mut p = (-mean).exp();
    for k in 1..=n {
        p = p * mean / T::real(k as f64);
    }
    Ok(p)
}

/// Tail mass `P(N ≥ n)`, evaluated as `1 − Σ_{k<n} P(k)`.
///
/// For `n = 2` this is the source multi-photon emission fraction.
pub fn poisson_tail_ge<T: Real>(mean: T, n: usize) -> Result<T, CoreError> {
    let mut head = T::zero();
    let mut p = poisson_pmf(mean, 0)?;
    for k in 0..n {
        head += p;
        p = p * mean / T::real((k + 1) as f64);
    }
    Ok((T::one() - head).max(T::zero()))
}

/// Draws a Poisson-distributed photon number by inversion sampling.
///
/// Walks the CDF from `n = 0`; for the source intensities used here
/// (`mean ≤ 0.4`) this takes ~1.4 pmf steps per draw on average, which keeps
/// the Monte-Carlo pulse loop free of heavier samplers.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    debug_assert!(mean >= 0.0);
    let u: f64 = rng.random::<f64>();
    let mut n = 0u32;
    let mut p = (-mean).exp();
    let mut cdf = p;
    // The loop terminates: cdf → 1 and u < 1. The cap guards degenerate
    // round-off for extreme means, falling back to the current n.
    while u > cdf && n < 200 {
        n += 1;
        p *= mean / f64::from(n);
        cdf += p;
    }
    n
}
