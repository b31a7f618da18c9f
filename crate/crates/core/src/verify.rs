//! Determinant-level checks: the characteristic identity
//! `D_L(λ) = det(iλ − B_L) = (−1)^L ∏(λ² − ν_m²)`, the asymptotic logarithmic
//! derivative of `D_L` with its geometric residual, eigenvalue doubling, and
//! the Wiener–Hopf symbol `φ` against `g`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::theta_log_derivative;
use crate::correlation::{build_correlation, majorana_spectrum, symbol_g, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::model::{classify, elliptic_data, symbol_roots, EllipticData, ModelParams};

/// Closest allowed approach of `λ` to an eigenvalue `±ν_m`.
pub const PROXIMITY_TOLERANCE: f64 = 1e-8;
/// Radius of the excluded neighbourhoods of `±1` and `±λ_m`.
pub const OMEGA_MARGIN: f64 = 0.05;
/// `|λ|` beyond which the point counts as a neighbourhood of infinity.
pub const OMEGA_RADIUS: f64 = 100.0;
/// Residuals below this are rounding noise.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

/// `D_L(λ)` by two routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantSample {
    pub lambda: Complex64,
    pub l: usize,
    /// `ln D_L` from a complex LU factorization (imaginary part mod 2π).
    pub log_det: Complex64,
    /// `ln D_L` from the eigenvalue product.
    pub product_log_det: Complex64,
    /// `d/dλ ln D_L = Σ 2λ/(λ² − ν_m²)`.
    pub dlog: Complex64,
    /// `|D_LU / D_product − 1|`.
    pub relative_gap: f64,
}

impl DeterminantSample {
    pub fn determinant(&self) -> Complex64 {
        self.log_det.exp()
    }
}

/// `ln det(iλ − B)` from LU pivots; never forms the raw product.
pub fn lu_log_det(b: &CorrelationMatrix, lambda: Complex64) -> Result<Complex64> {
    let e = b.entries();
    let n = e.nrows();
    let shift = Complex64::new(0.0, 1.0) * lambda;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { shift } else { Complex64::default() };
        d - e[(i, j)]
    });
    let lu = m.lu();
    let mut acc = Complex64::default();
    for i in 0..n {
        let u = lu.u()[(i, i)];
        if u == Complex64::default() {
            return Err(Error::Numeric(format!("iλ − B is singular at λ = {lambda}")));
        }
        acc += u.ln();
    }
    let sign: f64 = lu.p().determinant();
    if sign < 0.0 {
        acc += Complex64::new(0.0, PI);
    }
    Ok(acc)
}

fn wrap_phase(z: Complex64) -> Complex64 {
    Complex64::new(z.re, z.im.sin().atan2(z.im.cos()))
}

/// Both determinant routes at one `λ`.
pub fn char_determinant(
    lambda: Complex64,
    l: usize,
    params: &ModelParams,
) -> Result<DeterminantSample> {
    let b = build_correlation(l, params)?;
    let spectrum = majorana_spectrum(&b)?;
    for &nu in &spectrum.nu {
        let distance = (lambda - nu).norm().min((lambda + nu).norm());
        if distance < PROXIMITY_TOLERANCE {
            return Err(Error::Proximity { nu, distance });
        }
    }
    let log_det = wrap_phase(lu_log_det(&b, lambda)?);
    let mut product = Complex64::new(0.0, if l % 2 == 1 { PI } else { 0.0 });
    let mut dlog = Complex64::default();
    for &nu in &spectrum.nu {
        let f = lambda * lambda - nu * nu;
        product += f.ln();
        dlog += 2.0 * lambda / f;
    }
    let product_log_det = wrap_phase(product);
    let relative_gap = ((log_det - product_log_det).exp() - 1.0).norm();
    Ok(DeterminantSample { lambda, l, log_det, product_log_det, dlog, relative_gap })
}

/// `ν`-free route to `d/dλ ln D_L`, via `i·tr((iλ − B)⁻¹)`.
pub use crate::correlation::resolvent_dlog;

fn outside(lambda: Complex64, reason: String) -> Error {
    Error::OutsideOmega { re: lambda.re, im: lambda.im, reason }
}

/// Checks that `λ` lies in the uniformity domain of the asymptotic formula.
pub fn check_omega(lambda: Complex64, data: &EllipticData) -> Result<()> {
    if !(lambda.norm() <= OMEGA_RADIUS) {
        return Err(outside(lambda, format!("|lambda| > {OMEGA_RADIUS}")));
    }
    for pole in [1.0, -1.0] {
        if (lambda - pole).norm() < OMEGA_MARGIN {
            return Err(outside(lambda, format!("within {OMEGA_MARGIN} of {pole}")));
        }
    }
    let offset = 0.5 * (1 - data.sigma) as f64;
    let mut m = 0usize;
    loop {
        let lm = if data.is_degenerate() {
            if data.sigma == 1 && m == 0 {
                0.0
            } else {
                break;
            }
        } else {
            ((m as f64 + offset) * PI * data.tau0).tanh()
        };
        if (lambda - lm).norm().min((lambda + lm).norm()) < OMEGA_MARGIN {
            return Err(outside(lambda, format!("within {OMEGA_MARGIN} of lambda_{m} = {lm}")));
        }
        if 1.0 - lm < 1e-16 {
            break;
        }
        m += 1;
    }
    Ok(())
}

/// Large-`L` form `−2λL/(1−λ²) + β'(λ)[θ₃'/θ₃(β+στ/2) + θ₃'/θ₃(β−στ/2)]`.
pub fn dlog_asymptotic(lambda: Complex64, l: usize, data: &EllipticData) -> Result<Complex64> {
    check_omega(lambda, data)?;
    let linear = -2.0 * lambda * l as f64 / (1.0 - lambda * lambda);
    Ok(linear + theta_log_derivative(lambda, data)?)
}

/// One pair of eigen-magnitudes against its limit `λ_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoublingRow {
    pub m: usize,
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub lambda_m: f64,
    pub pair_gap: f64,
    pub midpoint_error: f64,
}

/// Pairs the finite spectrum against `λ_0..=λ_{m_max}`.
///
/// For σ = 0 the pairs are consecutive ascending magnitudes
/// `(ν_{2m}, ν_{2m+1})`. For σ = 1 a single magnitude tends to `λ_0 = 0`;
/// its partner is the mirrored eigenvalue `−ν`, and the pairs for `m ≥ 1`
/// shift by one.
pub fn doubling_check(l: usize, params: &ModelParams, m_max: usize) -> Result<Vec<DoublingRow>> {
    if l < 2 * m_max + 2 {
        return Err(Error::Domain(format!("doubling check needs L >= 2*m_max + 2, got L = {l}")));
    }
    let data = elliptic_data(params)?;
    let spectrum = majorana_spectrum(&build_correlation(l, params)?)?;
    let nu = spectrum.ascending();
    let offset = 0.5 * (1 - data.sigma) as f64;
    let lambda = |m: usize| {
        if data.is_degenerate() {
            if data.sigma == 1 && m == 0 {
                0.0
            } else {
                1.0
            }
        } else {
            ((m as f64 + offset) * PI * data.tau0).tanh()
        }
    };
    Ok((0..=m_max)
        .map(|m| {
            let (lo, hi) = match (data.sigma, m) {
                (1, 0) => (-nu[0], nu[0]),
                (1, _) => (nu[2 * m - 1], nu[2 * m]),
                _ => (nu[2 * m], nu[2 * m + 1]),
            };
            let lambda_m = lambda(m);
            DoublingRow {
                m,
                nu_lo: lo,
                nu_hi: hi,
                lambda_m,
                pair_gap: (hi - lo).abs(),
                midpoint_error: (0.5 * (lo + hi) - lambda_m).abs(),
            }
        })
        .collect())
}

/// Residuals `|dlog_exact − dlog_asymptotic|` over a range of `L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub l_values: Vec<usize>,
    pub residuals: Vec<f64>,
    /// True where the residual sits below [`RESIDUAL_FLOOR`].
    pub saturated: Vec<bool>,
    /// `exp(−slope)` of the least-squares line through `ln r` vs `L`;
    /// infinite when fewer than two residuals are above the floor.
    pub fitted_rho: f64,
}

/// `ρ` from a least-squares fit of `ln r` against `L`.
pub fn fit_rho(l_values: &[usize], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = l_values
        .iter()
        .zip(residuals)
        .filter(|(_, &r)| r >= RESIDUAL_FLOOR)
        .map(|(&l, &r)| (l as f64, r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (-sxy / sxx).exp()
}

pub fn residual_scan(
    lambda: Complex64,
    params: &ModelParams,
    l_values: &[usize],
) -> Result<ResidualReport> {
    let data = elliptic_data(params)?;
    check_omega(lambda, &data)?;
    let mut residuals = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let exact = char_determinant(lambda, l, params)?.dlog;
        let approx = dlog_asymptotic(lambda, l, &data)?;
        residuals.push((exact - approx).norm());
    }
    let saturated = residuals.iter().map(|&r| r < RESIDUAL_FLOOR).collect();
    Ok(ResidualReport {
        l_values: l_values.to_vec(),
        fitted_rho: fit_rho(l_values, &residuals),
        residuals,
        saturated,
    })
}

/// Outcome of comparing `φ(e^{iθ})` with `g(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiReport {
    /// `max_θ |φ − s·g|` for the matched global sign `s`.
    pub max_deviation: f64,
    /// The matched sign `s = ±1`.
    pub sign: i8,
    /// `max_θ ||φ| − 1|`.
    pub max_modulus_error: f64,
}

/// Tracks `φ(z) = [(λ₁*/λ₁)(1−λ₁z)(1−λ₂/z) / ((1−λ₁*/z)(1−λ₂*z))]^{1/2}`
/// continuously around `|z| = 1` from `θ = 0` and compares with `g`.
pub fn phi_vs_g(params: &ModelParams, n_samples: usize) -> Result<PhiReport> {
    let regime = classify(params);
    if regime.is_critical() {
        return Err(Error::Regime { op: "phi_vs_g", regime });
    }
    if n_samples < 8 {
        return Err(Error::Domain(format!("need at least 8 samples, got {n_samples}")));
    }
    let roots = symbol_roots(params)?;
    let (l1, l2) = (roots.lambda1, roots.lambda2);
    let phase = if l1.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { l1.conj() / l1 };
    let radicand = |z: Complex64| {
        phase * (1.0 - l1 * z) * (1.0 - l2 / z) / ((1.0 - l1.conj() / z) * (1.0 - l2.conj() * z))
    };
    let mut prev = radicand(Complex64::new(1.0, 0.0)).sqrt();
    let start = prev;
    let mut phis = Vec::with_capacity(n_samples);
    phis.push(prev);
    for j in 1..=n_samples {
        let theta = 2.0 * PI * j as f64 / n_samples as f64;
        let root = radicand(Complex64::from_polar(1.0, theta)).sqrt();
        let (d_plus, d_minus) = ((root - prev).norm(), (root + prev).norm());
        let next = if d_plus <= d_minus { root } else { -root };
        if d_plus.min(d_minus) > 0.5 || (d_plus - d_minus).abs() < 1e-3 {
            return Err(Error::Branch(format!("ambiguous square-root branch at theta = {theta}")));
        }
        if j < n_samples {
            phis.push(next);
        } else if (next - start).norm() > 1e-6 {
            return Err(Error::Branch(format!(
                "tracked branch does not close around the circle (gap {:e})",
                (next - start).norm()
            )));
        }
        prev = next;
    }
    let mut dev = [0.0f64; 2];
    let mut modulus_err: f64 = 0.0;
    for (j, phi) in phis.iter().enumerate() {
        let g = symbol_g(2.0 * PI * j as f64 / n_samples as f64, params)?;
        dev[0] = dev[0].max((phi - g).norm());
        dev[1] = dev[1].max((phi + g).norm());
        modulus_err = modulus_err.max((phi.norm() - 1.0).abs());
    }
    let (max_deviation, sign) = if dev[0] <= dev[1] { (dev[0], 1) } else { (dev[1], -1) };
    Ok(PhiReport { max_deviation, sign, max_modulus_error: modulus_err })
}
