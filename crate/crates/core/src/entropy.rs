//! Binary Shannon entropy.

use crate::{CoreError, Real};

/// Binary Shannon entropy `h(e) = −e·log₂(e) − (1−e)·log₂(1−e)` in bits per
/// symbol, with the convention `0·log 0 = 0` so that `h(0) = h(1) = 0`.
///
/// This is the Shannon limit on reconciliation disclosure per sifted bit at
/// error rate `e`; every leakage quantity in this crate is measured in bits.
///
/// # Errors
/// Returns [`CoreError::Domain`] when `e` is outside `[0, 1]` or non-finite.
pub fn binary_entropy<T: Real>(e: T) -> Result<T, CoreError> {
    if !(e >= T::zero() && e <= T::one()) {
        return Err(CoreError::domain(format!(
            "binary_entropy argument {e} outside [0,1]"
        )));
    }
    if e == T::zero() || e == T::one() {
        return Ok(T::zero());
    }
    let one = T::one();
    Ok(-e * e.log2r() - (one - e) * (one - e).log2r())
}
