//! Block entanglement entropy of the infinite XY spin chain.
//!
//! A block of `L` neighbouring spins of the ground state of
//! `H = −Σ (1+γ)σˣσˣ + (1−γ)σʸσʸ + hσᶻ` has von Neumann entropy `S_L`.
//! The crate computes it
//!
//! * exactly at finite `L`, from the Majorana correlation matrix
//!   ([`correlation`]);
//! * in the limit `L → ∞`, by a series over `λ_m = tanh((m + (1−σ)/2)πτ₀)`,
//!   by a Jacobi-theta integral and by elliptic closed forms
//!   ([`asymptotics`]);
//!
//! and cross-checks the determinant identities behind the limit
//! ([`verify`]).
//!
//! ```
//! use xyent::{entropy_closed, entropy_finite, entropy_series, ModelParams};
//!
//! let p = ModelParams::new(1.0, 1.0)?;
//! let series = entropy_series(&p, 1e-12)?.value;
//! let closed = entropy_closed(&p)?.value;
//! assert!((series - closed).abs() < 1e-12);
//! assert!((entropy_finite(24, &p)?.value - series).abs() < 1e-8);
//! # Ok::<(), xyent::Error>(())
//! ```

pub mod asymptotics;
pub mod correlation;
pub mod error;
pub mod model;
pub mod quad;
pub mod special;
pub mod verify;

pub use asymptotics::{
    critical_estimate, critical_fit, entropy_closed, entropy_integral, entropy_series,
    lambda_sequence, s_lambda, small_tau_estimate, AsymptoticSpectrum, CriticalFit,
    EntropyEstimate, Method,
};
pub use correlation::{
    build_correlation, contour_entropy, entropy_finite, entropy_kernel, majorana_spectrum,
    mode_entropy, CorrelationMatrix, MajoranaSpectrum,
};
pub use error::{Error, Result};
pub use model::{
    classify, elliptic_data, modulus, symbol_roots, EllipticData, ModelParams, RegimeLabel,
    SymbolRoots,
};
pub use verify::{
    char_determinant, dlog_asymptotic, doubling_check, phi_vs_g, residual_scan, DeterminantSample,
    DoublingRow, PhiReport, ResidualReport,
};
