//! The `L → ∞` block entropy by three independent routes, plus the
//! leading-order estimates near the critical lines.
//!
//! * series: `S = Σ_{m∈ℤ} H(λ_m)` with `λ_m = tanh((m + (1−σ)/2)πτ₀)`;
//! * integral: `S = ½∫₁^∞ ln[θ₃(β+στ/2)θ₃(β−στ/2)/θ₃²(στ/2)] dλ`,
//!   `β(λ) = (1/2πi) ln((λ+1)/(λ−1))`;
//! * closed form in complete elliptic integrals of the modulus `k`.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify, elliptic_data, EllipticData, ModelParams, RegimeLabel};
use crate::quad::{adaptive, Rule};
use crate::special::{ln_theta3, theta3_logderiv, ThetaArgument, ThetaParams};

/// Hard cap on the number of emitted `λ_m`.
pub const MAX_LADDER: usize = 50_000_000;

/// How an entropy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Finite,
    Series,
    Integral,
    ClosedForm,
    CriticalEstimate,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Finite => "finite",
            Method::Series => "series",
            Method::Integral => "integral",
            Method::ClosedForm => "closed_form",
            Method::CriticalEstimate => "critical_estimate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "finite" => Method::Finite,
            "series" => Method::Series,
            "integral" => Method::Integral,
            "closed_form" => Method::ClosedForm,
            "critical_estimate" => Method::CriticalEstimate,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An entropy value in nats with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: Method,
    pub error_bound: f64,
    pub regime: RegimeLabel,
}

/// The ladder `λ_0 < λ_1 < … < λ_M` of the limiting spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSpectrum {
    pub sigma: u8,
    pub tau0: f64,
    pub lambdas: Vec<f64>,
    /// Arguments `x_m = (m + (1−σ)/2)πτ₀`, so `λ_m = tanh x_m`.
    pub args: Vec<f64>,
}

impl AsymptoticSpectrum {
    /// Truncation index `M` (`None` when the ladder is empty).
    pub fn truncation(&self) -> Option<usize> {
        self.lambdas.len().checked_sub(1)
    }
}

/// `H(tanh x)` without forming `1 − tanh x` by subtraction.
pub fn mode_entropy_tanh(x: f64) -> f64 {
    let x = x.abs();
    let e = (-2.0 * x).exp();
    let l = e.ln_1p();
    let p = 1.0 / (1.0 + e);
    let q = e / (1.0 + e);
    p * l + q * (2.0 * x + l)
}

/// `(1+λ) ln(2/(1+λ)) + (1−λ) ln(2/(1−λ))`, one pair of terms of the
/// doubly infinite form of the series; equals `2H(λ)`.
pub fn term_pair(lambda: f64) -> f64 {
    let part = |y: f64| if y == 0.0 { 0.0 } else { y * (2.0 / y).ln() };
    part(1.0 + lambda) + part(1.0 - lambda)
}

/// Emits `λ_m` until `H(λ_M) < tol·(1 − e^{−2πτ₀})/2`.
pub fn lambda_sequence(data: &EllipticData, tol: f64) -> Result<AsymptoticSpectrum> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::Domain(format!(
            "truncation tolerance must lie in (0, 1e-2], got {tol}"
        )));
    }
    if data.is_degenerate() {
        let (lambdas, args) =
            if data.sigma == 1 { (vec![0.0], vec![0.0]) } else { (vec![], vec![]) };
        return Ok(AsymptoticSpectrum { sigma: data.sigma, tau0: data.tau0, lambdas, args });
    }
    let tau0 = data.tau0;
    if !(tau0 > 0.0 && tau0.is_finite()) {
        return Err(Error::Domain(format!("tau0 must be finite and positive, got {tau0}")));
    }
    let threshold = 0.5 * tol * -(-2.0 * PI * tau0).exp_m1();
    let offset = 0.5 * (1 - data.sigma) as f64;
    let mut lambdas = Vec::new();
    let mut args = Vec::new();
    for m in 0..MAX_LADDER {
        let x = (m as f64 + offset) * PI * tau0;
        lambdas.push(x.tanh());
        args.push(x);
        if x > 0.0 && mode_entropy_tanh(x) < threshold {
            return Ok(AsymptoticSpectrum { sigma: data.sigma, tau0, lambdas, args });
        }
    }
    Err(Error::Convergence { tau0, needed: MAX_LADDER as u64 + 1, cap: MAX_LADDER as u64 })
}

fn boundary_estimate(method: Method) -> EntropyEstimate {
    EntropyEstimate { value: LN_2, method, error_bound: 0.0, regime: RegimeLabel::Boundary1a1b }
}

fn require_noncritical(params: &ModelParams, op: &'static str) -> Result<RegimeLabel> {
    let regime = classify(params);
    if regime.is_critical() {
        return Err(Error::Regime { op, regime });
    }
    Ok(regime)
}

/// Series route. Evenness of `H` folds the sum over `ℤ` onto
/// `H(0) + 2Σ_{m≥1} H(λ_m)` (σ = 1) or `2Σ_{m≥0} H(λ_m)` (σ = 0).
pub fn entropy_series(params: &ModelParams, tol: f64) -> Result<EntropyEstimate> {
    let regime = require_noncritical(params, "entropy_series")?;
    if regime == RegimeLabel::Boundary1a1b {
        return Ok(boundary_estimate(Method::Series));
    }
    let (value, error_bound) = series_from_data(&elliptic_data(params)?, tol)?;
    Ok(EntropyEstimate { value, method: Method::Series, error_bound, regime })
}

/// The series as a function of `(τ₀, σ)` alone, with its tail bound.
pub fn series_from_data(data: &EllipticData, tol: f64) -> Result<(f64, f64)> {
    let ladder = lambda_sequence(data, tol)?;
    let mut value = 0.0;
    for (m, &x) in ladder.args.iter().enumerate() {
        let weight = if data.sigma == 1 && m == 0 { 1.0 } else { 2.0 };
        value += weight * mode_entropy_tanh(x);
    }
    let error_bound = match ladder.args.last() {
        Some(&x_last) if !data.is_degenerate() => {
            let step = PI * data.tau0;
            let x_next = x_last + step;
            // successive terms shrink at least by this ratio beyond x_next
            let ratio = (-2.0 * step).exp() * (1.0 + 2.0 * step / (1.0 + 2.0 * x_next));
            if ratio < 1.0 {
                2.0 * mode_entropy_tanh(x_next) / (1.0 - ratio) + 4.0 * f64::EPSILON * value
            } else {
                f64::INFINITY
            }
        }
        _ => 0.0,
    };
    Ok((value, error_bound))
}

/// Integrand of the integral route after `λ = coth t`:
/// `T(t) = ln[θ₃(β+στ/2)θ₃(β−στ/2)/θ₃²(στ/2)]` with `β = −it/π`. All three
/// arguments lie on the imaginary axis, where `θ₃` is real and positive.
pub fn integral_log_ratio(t: f64, data: &EllipticData) -> Result<f64> {
    let theta = data.theta_params()?;
    let shift = 0.5 * data.sigma as f64 * data.tau0;
    let ln_at = |y: f64| -> Result<f64> {
        let a = ThetaArgument::new(Complex64::new(0.0, y), &theta);
        Ok(ln_theta3(&a, &theta)?.re)
    };
    let b = -t / PI;
    Ok(ln_at(b + shift)? + ln_at(b - shift)? - 2.0 * ln_at(shift)?)
}

/// Integral route: `S = ½∫₀^∞ T(t) csch²t dt`, Gauss–Legendre on panels of
/// width 1/2, error from comparing a 20- and a 30-node rule.
pub fn entropy_integral(params: &ModelParams, tol: f64) -> Result<EntropyEstimate> {
    let regime = require_noncritical(params, "entropy_integral")?;
    if regime == RegimeLabel::Boundary1a1b {
        return Err(Error::Regime { op: "entropy_integral", regime });
    }
    let data = elliptic_data(params)?;
    if data.is_degenerate() {
        return Ok(EntropyEstimate {
            value: 0.0,
            method: Method::Integral,
            error_bound: 0.0,
            regime,
        });
    }
    // T(t) ≤ t²/(πτ₀) + 2t + c; the tail beyond t_max is below ∫ T·4e^{−2t}.
    let tail = |t: f64| 4.0 * (t * t / (PI * data.tau0) + 2.0 * t + 2.0) * (-2.0 * t).exp();
    let mut t_max = 8.0;
    while tail(t_max) > 1e-3 * tol.max(1e-16) {
        t_max += 0.5;
    }
    let panels = (t_max / 0.5).round() as usize;
    let mut failure = None;
    let mut integrand = |t: f64| match integral_log_ratio(t, &data) {
        Ok(v) => v / t.sinh().powi(2),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let coarse: f64 = Rule::new(20).integrate_panels(0.0, t_max, panels, &mut integrand);
    let fine: f64 = Rule::new(30).integrate_panels(0.0, t_max, panels, &mut integrand);
    if let Some(e) = failure {
        return Err(e);
    }
    let value = 0.5 * fine;
    let error_bound =
        0.5 * (fine - coarse).abs() + 0.5 * tail(t_max) + 8.0 * f64::EPSILON * value.abs();
    Ok(EntropyEstimate { value: value.max(0.0), method: Method::Integral, error_bound, regime })
}

/// Closed forms in `K = K(k)`, `K' = K(k')`:
/// Cases 1a/1b `(1/6)[ln(k²/(16k')) + (1 − k²/2)·4KK'/π] + ln 2`,
/// Case 2 `(1/12)[ln(16/(k²k'²)) + (k² − k'²)·4KK'/π]`.
pub fn entropy_closed(params: &ModelParams) -> Result<EntropyEstimate> {
    let regime = require_noncritical(params, "entropy_closed")?;
    if regime == RegimeLabel::Boundary1a1b {
        return Ok(boundary_estimate(Method::ClosedForm));
    }
    let data = elliptic_data(params)?;
    let (k, kp) = (data.k, data.k_prime);
    let value = if data.is_degenerate() {
        if data.sigma == 1 {
            LN_2
        } else {
            0.0
        }
    } else {
        let kk = 4.0 * data.big_k * data.big_k_prime / PI;
        if data.sigma == 1 {
            ((k * k / (16.0 * kp)).ln() + (1.0 - 0.5 * k * k) * kk) / 6.0 + LN_2
        } else {
            ((16.0 / (k * k * kp * kp)).ln() + (k - kp) * (k + kp) * kk) / 12.0
        }
    };
    let scale = if data.is_degenerate() {
        0.0
    } else {
        1.0 + (4.0 * data.big_k * data.big_k_prime / PI) + (k * kp).ln().abs()
    };
    Ok(EntropyEstimate {
        value: value.max(0.0),
        method: Method::ClosedForm,
        error_bound: 16.0 * f64::EPSILON * scale,
        regime,
    })
}

/// `β(λ) = (1/2πi) Log((λ+1)/(λ−1))`, principal branch.
pub fn beta(lambda: Complex64) -> Complex64 {
    ((lambda + 1.0) / (lambda - 1.0)).ln() / Complex64::new(0.0, 2.0 * PI)
}

/// The theta part of the asymptotic logarithmic derivative,
/// `β'(λ)·[θ₃'/θ₃(β+στ/2) + θ₃'/θ₃(β−στ/2)]` with `β' = −(i/π)/(1−λ²)`.
///
/// A collapsed ladder (`τ₀ = ∞`) gives `2/λ − 2λ/(λ²−1)` for σ = 1
/// (one mode at 0, the rest at 1) and 0 for σ = 0.
pub fn theta_log_derivative(lambda: Complex64, data: &EllipticData) -> Result<Complex64> {
    if data.is_degenerate() {
        return Ok(if data.sigma == 1 {
            2.0 / lambda - 2.0 * lambda / (lambda * lambda - 1.0)
        } else {
            Complex64::default()
        });
    }
    let theta: ThetaParams = data.theta_params()?;
    let b = beta(lambda);
    let shift = Complex64::new(0.0, 0.5 * data.sigma as f64 * data.tau0);
    let psi = |s: Complex64| theta3_logderiv(&ThetaArgument::new(s, &theta), &theta);
    let bracket = psi(b + shift)? + psi(b - shift)?;
    let beta_prime = Complex64::new(0.0, -1.0 / PI) / (1.0 - lambda * lambda);
    Ok(beta_prime * bracket)
}

/// `s(λ)` for real `λ > 1`: the derivative of
/// `ln[θ₃(β+στ/2)θ₃(β−στ/2)]` along the real axis.
pub fn s_lambda(lambda: f64, data: &EllipticData) -> Result<f64> {
    if !(lambda > 1.0 + 1e-8) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "s(lambda) needs a finite lambda > 1 + 1e-8, got {lambda}"
        )));
    }
    let v = theta_log_derivative(Complex64::new(lambda, 0.0), data)?;
    if v.im.abs() > 1e-10 * (1.0 + v.re.abs()) {
        return Err(Error::Numeric(format!("s({lambda}) has imaginary residual {:e}", v.im)));
    }
    Ok(v.re)
}

/// Which leading-order formula a critical estimate used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalFormula {
    /// `−(1/6) ln|2−h| + (1/3) ln 4γ`
    FieldNearTwo,
    /// `−(1/3) ln γ + (1/6) ln(4−h²) + (1/3) ln 2`
    SmallAnisotropy,
}

/// Leading-order entropy near `h = 2` or near `γ = 0`.
pub fn critical_formula(params: &ModelParams) -> Result<(CriticalFormula, f64, f64)> {
    let (g, h) = (params.gamma(), params.h());
    let dh = (2.0 - h).abs();
    let regime = classify(params);
    if regime.is_critical() {
        return Err(Error::Applicability(format!(
            "({g}, {h}) lies on a critical line where the entropy diverges"
        )));
    }
    let field = |g: f64| {
        let value = -dh.ln() / 6.0 + (4.0 * g).ln() / 3.0;
        (CriticalFormula::FieldNearTwo, value, dh * dh.ln().powi(2))
    };
    let xx = || {
        let value = -g.ln() / 3.0 + (4.0 - h * h).ln() / 6.0 + LN_2 / 3.0;
        (CriticalFormula::SmallAnisotropy, value, g * g.ln().powi(2))
    };
    if dh < 0.5 && g >= 0.1 {
        Ok(field(g))
    } else if g < 0.1 && h < 2.0 {
        Ok(xx())
    } else if dh < 0.5 {
        Ok(field(g))
    } else {
        Err(Error::Applicability(format!(
            "({g}, {h}) is outside |2-h| < 0.5 and (gamma < 0.1, h < 2)"
        )))
    }
}

pub fn critical_estimate(params: &ModelParams) -> Result<EntropyEstimate> {
    let (_, value, error_bound) = critical_formula(params)?;
    Ok(EntropyEstimate {
        value,
        method: Method::CriticalEstimate,
        error_bound,
        regime: classify(params),
    })
}

/// `S ≈ π/(6τ₀)` for small `τ₀`, with error scale `e^{−π/τ₀}/τ₀²`.
pub fn small_tau_estimate(params: &ModelParams) -> Result<EntropyEstimate> {
    let regime = require_noncritical(params, "small_tau_estimate")?;
    let data = elliptic_data(params)?;
    if data.is_degenerate() {
        return Err(Error::Applicability("tau0 is infinite".into()));
    }
    let tau0 = data.tau0;
    Ok(EntropyEstimate {
        value: PI / (6.0 * tau0),
        method: Method::CriticalEstimate,
        error_bound: (-PI / tau0).exp() / (tau0 * tau0),
        regime,
    })
}

/// Least-squares fit of `S = a ln x + b + …` near a critical line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalFit {
    /// `a` with the `x ln x` and `x` correction regressors included.
    pub slope: f64,
    pub intercept: f64,
    /// `a`, `b` of the bare two-parameter fit.
    pub plain_slope: f64,
    pub plain_intercept: f64,
}

fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n < p || p == 0 {
        return Err(Error::Domain(format!("need at least {p} samples for the fit, got {n}")));
    }
    let a = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let sol =
        svd.solve(&b, 1e-14).map_err(|e| Error::Numeric(format!("least squares failed: {e}")))?;
    Ok(sol.iter().copied().collect())
}

/// Fits `(x, S)` samples with `x = |2−h|` or `x = γ`.
pub fn critical_fit(samples: &[(f64, f64)]) -> Result<CriticalFit> {
    if samples.iter().any(|&(x, s)| !(x > 0.0) || !s.is_finite()) {
        return Err(Error::Domain("critical fit needs x > 0 and finite S".into()));
    }
    let y: Vec<f64> = samples.iter().map(|&(_, s)| s).collect();
    let full: Vec<Vec<f64>> =
        samples.iter().map(|&(x, _)| vec![x.ln(), 1.0, x * x.ln(), x]).collect();
    let plain: Vec<Vec<f64>> = samples.iter().map(|&(x, _)| vec![x.ln(), 1.0]).collect();
    let f = least_squares(&full, &y)?;
    let p = least_squares(&plain, &y)?;
    Ok(CriticalFit { slope: f[0], intercept: f[1], plain_slope: p[0], plain_intercept: p[1] })
}

/// `½∫ (1−λ) s(λ) dλ` over `λ ∈ [1 + 2·10⁻⁸, 10⁹]`, the integral route
/// after integration by parts; the omitted ends contribute `O(10⁻⁷)`.
pub fn entropy_by_parts(params: &ModelParams, tol: f64) -> Result<f64> {
    let data = elliptic_data(params)?;
    let rule = Rule::new(20);
    let mut failure = None;
    let t_max = 0.5 * 1e8f64.ln();
    let r = adaptive(&rule, 1e-9, t_max, tol, |t| {
        let lambda = 1.0 / t.tanh();
        match s_lambda(lambda, &data) {
            Ok(s) => (1.0 - lambda) * s / t.sinh().powi(2),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(0.5 * r.value),
    }
}
