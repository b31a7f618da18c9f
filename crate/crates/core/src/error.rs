use thiserror::Error;

use crate::model::RegimeLabel;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters are not finite numbers.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A series would need more terms than the configured cap.
    #[error("theta series for tau0 = {tau0:e} needs {needed} terms (cap {cap})")]
    Convergence { tau0: f64, needed: u64, cap: u64 },

    /// A logarithmic derivative was requested on top of a zero of theta_3.
    #[error("theta_3 vanishes at s = {re} + {im}i (pole of the logarithmic derivative)")]
    Pole { re: f64, im: f64 },

    /// The operation is not defined in the given regime.
    #[error("{op} is not available in regime {regime} ({})", regime.describe())]
    Regime { op: &'static str, regime: RegimeLabel },

    /// The symbol numerator vanishes on the unit circle.
    #[error("symbol g(theta) is singular at theta = {theta}")]
    SingularSymbol { theta: f64 },

    /// Fourier coefficients did not settle under grid refinement.
    #[error("Fourier coefficients unresolved at n_grid = {n_grid} (change {change:e})")]
    Resolution { n_grid: usize, change: f64 },

    /// Linear algebra failure or a violated numerical sanity check.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The spectrum of iB is not symmetric under sign flip.
    #[error("spectrum of iB is not +/- paired (residual {residual:e})")]
    Asymmetry { residual: f64 },

    /// The spectral parameter sits on top of an eigenvalue.
    #[error("lambda is within {distance:e} of the eigenvalue nu = {nu}")]
    Proximity { nu: f64, distance: f64 },

    /// The spectral parameter lies outside the region where the asymptotic
    /// formula is uniform.
    #[error("lambda = {re} + {im}i lies outside the asymptotic domain: {reason}")]
    OutsideOmega { re: f64, im: f64, reason: String },

    /// A critical-scaling formula was requested outside its window.
    #[error("critical estimate not applicable: {0}")]
    Applicability(String),

    /// Square-root branch tracking around the unit circle failed.
    #[error("branch tracking failed: {0}")]
    Branch(String),
}

impl Error {
    /// True for errors that signal a convergence or resolution failure
    /// rather than bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Resolution { .. } | Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
