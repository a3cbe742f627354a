//! Independent reference computations used to cross-check the fast paths.
//!
//! Nothing here shares code with the routines it validates.

use crate::coboson::SchmidtSpectrum;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest mode count accepted by [`brute_force_chi`].
pub const BRUTE_FORCE_MAX_MODES: usize = 24;

/// `n! Σ_{j1<…<jn} λ_{j1}⋯λ_{jn}` by explicit subset enumeration.
pub fn brute_force_chi<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> Result<T> {
    let lambda = spectrum.coefficients();
    let j = lambda.len();
    if j > BRUTE_FORCE_MAX_MODES {
        return Err(Error::domain(format!(
            "brute-force enumeration limited to J <= {BRUTE_FORCE_MAX_MODES} (got {j})"
        )));
    }
    if n == 0 {
        return Ok(T::one());
    }
    if n > j {
        return Ok(T::zero());
    }
    let mut total = T::zero();
    // Gosper's hack walks every n-bit subset of a j-bit mask.
    let limit: u32 = 1 << j;
    let mut mask: u32 = (1 << n) - 1;
    while mask < limit {
        let mut prod = T::one();
        let mut bits = mask;
        while bits != 0 {
            let idx = bits.trailing_zeros() as usize;
            prod = prod * lambda[idx];
            bits &= bits - 1;
        }
        total = total + prod;
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    let factorial = (1..=n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k));
    Ok(factorial * total)
}
