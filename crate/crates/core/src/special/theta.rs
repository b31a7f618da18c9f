//! The third Jacobi theta function on a purely imaginary modulus.
//!
//! `θ₃(s) = Σₙ exp(πiτn² + 2πisn)` with `τ = iτ₀`, nome `q = e^{−πτ₀}`.
//!
//! Arguments are first reduced to the lattice cell
//! `|Re s| ≤ 1/2, |Im s| ≤ τ₀/2` using `θ₃(s + 1) = θ₃(s)` and
//! `θ₃(s + mτ) = q^{−m²} e^{−2πims} θ₃(s)`. The quasi-periodic factor is
//! carried as a logarithm, so `ln θ₃` stays finite even when `θ₃` itself
//! overflows (large `|Im s|` is routine: `β(λ)` is unbounded near `λ = ±1`).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the number of series terms `N` (terms with `|n| ≤ N`).
pub const DEFAULT_MAX_TERMS: u64 = 1_000_000;

/// Terms are dropped once their bound falls below this fraction of the
/// largest term (the `n = 0` term has magnitude one after reduction).
const TAIL_TOLERANCE: f64 = 1e-17;

/// Lattice zeros closer than this make the logarithmic derivative a pole.
pub const POLE_TOLERANCE: f64 = 1e-10;

/// Modulus data `τ = iτ₀` with the cached nome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaParams {
    tau0: f64,
    nome: f64,
    max_terms: u64,
}

impl ThetaParams {
    pub fn new(tau0: f64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::Domain(format!("theta modulus needs finite tau0 > 0, got {tau0}")));
        }
        Ok(Self { tau0, nome: (-PI * tau0).exp(), max_terms: DEFAULT_MAX_TERMS })
    }

    /// Override the hard cap on series terms.
    pub fn with_max_terms(mut self, max_terms: u64) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn nome(&self) -> f64 {
        self.nome
    }

    pub fn max_terms(&self) -> u64 {
        self.max_terms
    }

    /// `τ = iτ₀` as a complex number.
    pub fn tau(&self) -> Complex64 {
        Complex64::new(0.0, self.tau0)
    }
}

/// A theta argument together with its lattice reduction
/// `s = reduced_s + shift_n + shift_m·iτ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaArgument {
    pub s: Complex64,
    pub reduced_s: Complex64,
    pub shift_m: i64,
    pub shift_n: i64,
}

impl ThetaArgument {
    /// Reduce `s` into the cell `|Re| ≤ 1/2`, `|Im| ≤ τ₀/2`.
    pub fn new(s: Complex64, params: &ThetaParams) -> Self {
        let tau0 = params.tau0;
        let shift_m = (s.im / tau0).round();
        let shift_n = s.re.round();
        let reduced_s = Complex64::new(s.re - shift_n, s.im - shift_m * tau0);
        Self { s, reduced_s, shift_m: shift_m as i64, shift_n: shift_n as i64 }
    }

    /// True if the stored reduction is consistent with `params`.
    fn is_reduced_for(&self, params: &ThetaParams) -> bool {
        self.reduced_s.re.abs() <= 0.5 + 1e-12
            && self.reduced_s.im.abs() <= 0.5 * params.tau0 * (1.0 + 1e-12)
            && {
                let back = self.reduced_s
                    + Complex64::new(self.shift_n as f64, self.shift_m as f64 * params.tau0);
                (back - self.s).norm() <= 1e-12 * (1.0 + self.s.norm())
            }
    }

    fn normalized(&self, params: &ThetaParams) -> Self {
        if self.is_reduced_for(params) {
            *self
        } else {
            Self::new(self.s, params)
        }
    }
}

/// Value and derivative sums of the series at a reduced argument.
struct Partial {
    value: Complex64,
    derivative: Complex64,
}

/// Number of terms needed so that every dropped term is below the tail
/// tolerance: `exp(−πτ₀n² + 2π|y|n) < TAIL_TOLERANCE`.
fn terms_needed(tau0: f64, abs_im: f64) -> f64 {
    let c = -TAIL_TOLERANCE.ln() / PI;
    let shift = abs_im / tau0;
    (shift + (shift * shift + c / tau0).sqrt()).ceil() + 1.0
}

fn sum_reduced(s: Complex64, params: &ThetaParams, want_derivative: bool) -> Result<Partial> {
    let tau0 = params.tau0;
    let needed = terms_needed(tau0, s.im.abs());
    if needed > params.max_terms as f64 {
        return Err(Error::Convergence {
            tau0,
            needed: needed.min(u64::MAX as f64) as u64,
            cap: params.max_terms,
        });
    }
    let n_max = needed as i64;
    let two_pi_i_s = Complex64::new(0.0, 2.0 * PI) * s;
    let mut value = Complex64::new(1.0, 0.0);
    let mut derivative = Complex64::new(0.0, 0.0);
    for n in 1..=n_max {
        let nf = n as f64;
        let gauss = -PI * tau0 * nf * nf;
        let plus = (gauss + two_pi_i_s * nf).exp();
        let minus = (gauss - two_pi_i_s * nf).exp();
        value += plus + minus;
        if want_derivative {
            derivative += Complex64::new(0.0, 2.0 * PI * nf) * (plus - minus);
        }
        let bound = (gauss + 2.0 * PI * s.im.abs() * nf).exp();
        if bound < TAIL_TOLERANCE * value.norm().max(1.0) {
            break;
        }
    }
    Ok(Partial { value, derivative })
}

/// `ln θ₃(s)` (principal logarithm of the reduced value plus the exact
/// quasi-periodic exponent; the imaginary part is defined modulo `2π`).
pub fn ln_theta3(arg: &ThetaArgument, params: &ThetaParams) -> Result<Complex64> {
    let arg = arg.normalized(params);
    let partial = sum_reduced(arg.reduced_s, params, false)?;
    let m = arg.shift_m as f64;
    let quasi = Complex64::new(PI * params.tau0 * m * m, 0.0)
        - Complex64::new(0.0, 2.0 * PI * m) * arg.reduced_s;
    Ok(partial.value.ln() + quasi)
}

/// `θ₃(s)`.
pub fn theta3(arg: &ThetaArgument, params: &ThetaParams) -> Result<Complex64> {
    let arg = arg.normalized(params);
    let partial = sum_reduced(arg.reduced_s, params, false)?;
    if arg.shift_m == 0 {
        return Ok(partial.value);
    }
    let m = arg.shift_m as f64;
    let quasi = Complex64::new(PI * params.tau0 * m * m, 0.0)
        - Complex64::new(0.0, 2.0 * PI * m) * arg.reduced_s;
    Ok(partial.value * quasi.exp())
}

/// Distance from a reduced argument to the nearest zero `1/2 + τ/2 + n + mτ`.
fn distance_to_zero_lattice(reduced: Complex64, tau0: f64) -> f64 {
    let mut best = f64::INFINITY;
    for dn in [-0.5, 0.5] {
        for dm in [-0.5, 0.5] {
            let zero = Complex64::new(dn, dm * tau0);
            best = best.min((reduced - zero).norm());
        }
    }
    best
}

/// `θ₃'(s) / θ₃(s)`, derivative with respect to `s`.
pub fn theta3_logderiv(arg: &ThetaArgument, params: &ThetaParams) -> Result<Complex64> {
    let arg = arg.normalized(params);
    if distance_to_zero_lattice(arg.reduced_s, params.tau0) < POLE_TOLERANCE {
        return Err(Error::Pole { re: arg.s.re, im: arg.s.im });
    }
    let partial = sum_reduced(arg.reduced_s, params, true)?;
    Ok(partial.derivative / partial.value - Complex64::new(0.0, 2.0 * PI * arg.shift_m as f64))
}
