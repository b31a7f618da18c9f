//! Couplings of the XY chain, regime classification, and the spectral
//! constants derived from them.
//!
//! The chain is `H = −Σ (1+γ)σˣσˣ + (1−γ)σʸσʸ + hσᶻ`. Everything downstream
//! depends on `(γ, h)` only through the regime, the two roots `λ₁, λ₂` of the
//! symbol and the elliptic modulus `k` (with `τ₀ = K(k')/K(k)`).

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{elliptic_k_from_complement, ThetaParams};

/// Distance from an excluded line (`h = 2`, `γ = 0`) or from the Case 1a/1b
/// boundary below which the point is treated as lying on it.
pub const LINE_TOLERANCE: f64 = 1e-9;

/// Physical couplings, normalized to `γ ≥ 0`, `h ≥ 0`.
///
/// Negative inputs are folded back: `h → −h` is the spin flip and `γ → −γ`
/// a π/2 rotation about the z axis, both symmetries of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    gamma: f64,
    h: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, h: f64) -> Result<Self> {
        if !gamma.is_finite() || !h.is_finite() {
            return Err(Error::InvalidParams(format!(
                "couplings must be finite, got gamma = {gamma}, h = {h}"
            )));
        }
        Ok(Self { gamma: gamma.abs(), h: h.abs() })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// True when the point is within [`LINE_TOLERANCE`] of `h = 2` or of the
    /// XX line `γ = 0` (for `h < 2`).
    pub fn near_excluded_line(&self) -> bool {
        (self.h - 2.0).abs() <= LINE_TOLERANCE || (self.gamma <= LINE_TOLERANCE && self.h < 2.0)
    }

    pub fn regime(&self) -> RegimeLabel {
        classify(self)
    }
}

/// Magnetic-field regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    /// Moderate field, `4(1 − γ²) < h² < 4`.
    Case1a,
    /// Weak field, `h² < 4(1 − γ²)`.
    Case1b,
    /// Strong field, `h > 2`.
    Case2,
    /// The line `(h/2)² + γ² = 1` separating 1a and 1b.
    Boundary1a1b,
    /// The critical field `h = 2`.
    CriticalFieldH2,
    /// The isotropic XX line `γ = 0`, `h < 2`.
    CriticalXX,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::Case1a => "Case1a",
            RegimeLabel::Case1b => "Case1b",
            RegimeLabel::Case2 => "Case2",
            RegimeLabel::Boundary1a1b => "Boundary1a1b",
            RegimeLabel::CriticalFieldH2 => "CriticalFieldH2",
            RegimeLabel::CriticalXX => "CriticalXX",
        }
    }

    /// Human-readable description of the region.
    pub fn describe(&self) -> &'static str {
        match self {
            RegimeLabel::Case1a => "moderate field, 4(1-gamma^2) < h^2 < 4",
            RegimeLabel::Case1b => "weak field, h^2 < 4(1-gamma^2)",
            RegimeLabel::Case2 => "strong field, h > 2",
            RegimeLabel::Boundary1a1b => "the line (h/2)^2 + gamma^2 = 1",
            RegimeLabel::CriticalFieldH2 => "the critical field line h = 2",
            RegimeLabel::CriticalXX => "the XX critical line gamma = 0, h < 2",
        }
    }

    pub fn is_critical(&self) -> bool {
        matches!(self, RegimeLabel::CriticalFieldH2 | RegimeLabel::CriticalXX)
    }

    /// `σ`: 1 for Cases 1a, 1b (and their common boundary), 0 for Case 2.
    pub fn sigma(&self) -> Option<u8> {
        match self {
            RegimeLabel::Case1a | RegimeLabel::Case1b | RegimeLabel::Boundary1a1b => Some(1),
            RegimeLabel::Case2 => Some(0),
            _ => None,
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime of a parameter point. Critical lines take precedence over the
/// 1a/1b boundary, which takes precedence over the open cases.
pub fn classify(params: &ModelParams) -> RegimeLabel {
    let (g, h) = (params.gamma, params.h);
    if (h - 2.0).abs() <= LINE_TOLERANCE {
        return RegimeLabel::CriticalFieldH2;
    }
    if h > 2.0 {
        return RegimeLabel::Case2;
    }
    if g <= LINE_TOLERANCE {
        return RegimeLabel::CriticalXX;
    }
    let gap = h.mul_add(h, -4.0 * (1.0 - g) * (1.0 + g));
    if gap.abs() <= LINE_TOLERANCE {
        RegimeLabel::Boundary1a1b
    } else if gap > 0.0 {
        RegimeLabel::Case1a
    } else {
        RegimeLabel::Case1b
    }
}

fn require_open_case(params: &ModelParams, op: &'static str) -> Result<RegimeLabel> {
    let regime = classify(params);
    match regime {
        RegimeLabel::Case1a | RegimeLabel::Case1b | RegimeLabel::Case2 => Ok(regime),
        _ => Err(Error::Regime { op, regime }),
    }
}

/// The roots `λ₁, λ₂` that parameterize the symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolRoots {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub regime: RegimeLabel,
}

/// End points of the two cuts, labelled as in the Wiener–Hopf geometry:
/// the factorization analysis uses `ρ < |λ_C|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPoints {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl SymbolRoots {
    /// Cut end points `λ_A … λ_D` for the regime of these roots.
    pub fn cut_points(&self) -> CutPoints {
        let (l1, l2) = (self.lambda1, self.lambda2);
        let one = Complex64::new(1.0, 0.0);
        match self.regime {
            RegimeLabel::Case1b => CutPoints { a: l1, b: one / l2, c: one / l1, d: l2 },
            RegimeLabel::Case2 => CutPoints { a: l1, b: l2, c: one / l2, d: one / l1 },
            _ => CutPoints { a: l1, b: one / l2, c: l2, d: one / l1 },
        }
    }

    /// `|λ_C|`, the upper limit for the geometric rate of log-derivative residuals.
    pub fn lambda_c_modulus(&self) -> f64 {
        self.cut_points().c.norm()
    }

    /// The four points `λ₁, λ₂, 1/λ₁, 1/λ₂` sorted by modulus (the inverse of
    /// a zero root is reported as infinity).
    pub fn by_modulus(&self) -> [Complex64; 4] {
        let inv = |z: Complex64| {
            if z.norm() == 0.0 {
                Complex64::new(f64::INFINITY, 0.0)
            } else {
                Complex64::new(1.0, 0.0) / z
            }
        };
        let mut pts = [self.lambda1, self.lambda2, inv(self.lambda1), inv(self.lambda2)];
        pts.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
        pts
    }
}

/// Roots of the symbol. In Cases 1a and 2 both are real; in Case 1b they are
/// complex with `λ₂ = 1/λ₁*`.
pub fn symbol_roots(params: &ModelParams) -> Result<SymbolRoots> {
    let regime = require_open_case(params, "symbol_roots")?;
    let (g, h) = (params.gamma, params.h);
    let disc = h.mul_add(h, -4.0 * (1.0 - g) * (1.0 + g));
    let (lambda1, lambda2) = match regime {
        RegimeLabel::Case1b => {
            let l1 = Complex64::new(h, -(-disc).sqrt()) / (2.0 * (1.0 + g));
            (l1, Complex64::new(1.0, 0.0) / l1.conj())
        }
        _ => {
            // Rationalized forms of (h ∓ √disc)/(2(1±γ)); both stay finite at γ = 1.
            let denom = h + disc.sqrt();
            (
                Complex64::new(2.0 * (1.0 - g) / denom, 0.0),
                Complex64::new(2.0 * (1.0 + g) / denom, 0.0),
            )
        }
    };
    Ok(SymbolRoots { lambda1, lambda2, regime })
}

/// `(k, k')`, each from its own cancellation-free expression.
fn modulus_pair(params: &ModelParams) -> Result<(f64, f64)> {
    let regime = classify(params);
    let (g, h) = (params.gamma, params.h);
    let half = 0.5 * h;
    // (h/2)² − 1 and 1 − γ² in factored form
    let field_excess = (half - 1.0) * (half + 1.0);
    let one_minus_g2 = (1.0 - g) * (1.0 + g);
    match regime {
        RegimeLabel::Boundary1a1b => Ok((0.0, 1.0)),
        RegimeLabel::Case1a => {
            let k2 = half.mul_add(half, -one_minus_g2) / (g * g);
            let kp2 = -field_excess / (g * g);
            Ok((k2.max(0.0).sqrt(), kp2.sqrt()))
        }
        RegimeLabel::Case1b => {
            let k2 = (one_minus_g2 - half * half) / (-field_excess);
            let kp2 = g * g / (-field_excess);
            Ok((k2.max(0.0).sqrt(), kp2.sqrt()))
        }
        RegimeLabel::Case2 => {
            let denom = field_excess + g * g;
            Ok(((g * g / denom).sqrt(), (field_excess / denom).sqrt()))
        }
        _ => Err(Error::Regime { op: "modulus", regime }),
    }
}

/// Elliptic modulus `k` (zero on the 1a/1b boundary).
pub fn modulus(params: &ModelParams) -> Result<f64> {
    modulus_pair(params).map(|(k, _)| k)
}

/// Derived elliptic constants.
///
/// A vanishing modulus (the 1a/1b boundary, or Case 2 at `γ = 0`) is kept
/// as `k = 0` with `K' = τ₀ = +∞`: the whole λ-ladder collapses onto 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticData {
    pub k: f64,
    pub k_prime: f64,
    /// `K(k)`
    pub big_k: f64,
    /// `K(k')`
    pub big_k_prime: f64,
    pub tau0: f64,
    pub sigma: u8,
}

impl EllipticData {
    pub fn is_degenerate(&self) -> bool {
        !self.tau0.is_finite()
    }

    pub fn theta_params(&self) -> Result<ThetaParams> {
        ThetaParams::new(self.tau0)
    }
}

pub fn elliptic_data(params: &ModelParams) -> Result<EllipticData> {
    let regime = classify(params);
    let sigma = regime.sigma().ok_or(Error::Regime { op: "elliptic_data", regime })?;
    let (k, k_prime) = modulus_pair(params)?;
    if k == 0.0 {
        return Ok(EllipticData {
            k,
            k_prime: 1.0,
            big_k: FRAC_PI_2,
            big_k_prime: f64::INFINITY,
            tau0: f64::INFINITY,
            sigma,
        });
    }
    // K(k) needs k' as its complement, K(k') needs k.
    let big_k = elliptic_k_from_complement(k_prime)?;
    let big_k_prime = elliptic_k_from_complement(k)?;
    Ok(EllipticData { k, k_prime, big_k, big_k_prime, tau0: big_k_prime / big_k, sigma })
}
