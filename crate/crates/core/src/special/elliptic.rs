//! Complete elliptic integral of the first kind.
//!
//! `K(k) = ∫₀¹ dx / √((1 − x²)(1 − k²x²))` is evaluated through the
//! arithmetic–geometric mean, `K(k) = π / (2·AGM(1, k'))` with `k' = √(1 − k²)`.
//! The AGM only ever sees the complementary modulus, so callers that know `k'`
//! to full relative precision (the model module does, from closed forms)
//! should use [`elliptic_k_from_complement`] and never round-trip through `k`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 64;

/// Arithmetic–geometric mean of two nonnegative numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// `K(k)` for a modulus `0 ≤ k < 1`.
///
/// Near `k = 1` the complementary modulus is formed as `√((1 − k)(1 + k))`,
/// which keeps `1 − k²` free of cancellation.
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!(
            "complete elliptic integral needs 0 <= k < 1, got k = {k}"
        )));
    }
    let k_prime = if k * k > 0.999 { ((1.0 - k) * (1.0 + k)).sqrt() } else { (1.0 - k * k).sqrt() };
    elliptic_k_from_complement(k_prime)
}

/// `K(k)` given the complementary modulus `k' = √(1 − k²)`, `0 < k' ≤ 1`.
pub fn elliptic_k_from_complement(k_prime: f64) -> Result<f64> {
    if !(k_prime > 0.0 && k_prime <= 1.0) {
        return Err(Error::Domain(format!(
            "complementary modulus must lie in (0, 1], got k' = {k_prime}"
        )));
    }
    Ok(FRAC_PI_2 / agm(1.0, k_prime))
}
