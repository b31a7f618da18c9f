//! Extended-precision (MPFR) evaluation of the finite-block entropy `S_L`
//! and of the limiting series, for checks whose differences sit below
//! double-precision resolution.
//!
//! The finite route mirrors the double-precision one with independent
//! numerics: a direct DFT of the symbol refined until aliasing is below the
//! working precision, `B_L` assembled from it, and the spectrum of the
//! symmetric matrix `BᵀB` (eigenvalues `ν_m²`, each twice) from Householder
//! tridiagonalization and implicit QL.

use rug::float::Constant;
use rug::Float;
use thiserror::Error;
use xyent::{classify, ModelParams, RegimeLabel};

/// Default working precision in bits.
pub const DEFAULT_BITS: u32 = 160;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreciseError {
    #[error("extended-precision routes need an off-critical regime, got {0}")]
    Regime(RegimeLabel),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no convergence: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, PreciseError>;

#[derive(Debug, Clone, Copy)]
struct Ctx {
    bits: u32,
}

impl Ctx {
    fn new(bits: u32) -> Result<Self> {
        if !(64..=4096).contains(&bits) {
            return Err(PreciseError::Input(format!(
                "precision must be 64..=4096 bits, got {bits}"
            )));
        }
        Ok(Self { bits })
    }

    fn f(&self, v: f64) -> Float {
        Float::with_val(self.bits, v)
    }

    fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    /// `2^{−bits+8}`, the convergence threshold for refinements.
    fn eps(&self) -> Float {
        Float::with_val(self.bits, 1) >> (self.bits as i32 - 8)
    }
}

fn regime(gamma: f64, h: f64) -> Result<RegimeLabel> {
    let params = ModelParams::new(gamma, h).map_err(|e| PreciseError::Input(e.to_string()))?;
    match classify(&params) {
        r if r.is_critical() => Err(PreciseError::Regime(r)),
        r => Ok(r),
    }
}

/// The open cases, where the modulus is nonzero.
fn open_regime(gamma: f64, h: f64) -> Result<RegimeLabel> {
    match regime(gamma, h)? {
        RegimeLabel::Boundary1a1b => Err(PreciseError::Regime(RegimeLabel::Boundary1a1b)),
        r => Ok(r),
    }
}

/// `H(ν) = −((1+ν)/2) ln((1+ν)/2) − ((1−ν)/2) ln((1−ν)/2)` for `0 ≤ ν ≤ 1`.
fn mode_entropy(nu: &Float) -> Float {
    let xlogx = |x: Float| if x.is_zero() { x } else { x.clone() * x.ln() };
    let p = (Float::with_val(nu.prec(), 1) + nu) / 2u32;
    let q = (Float::with_val(nu.prec(), 1) - nu) / 2u32;
    -(xlogx(p) + xlogx(q))
}

/// `H(tanh x)` via `e^{−2x}`, free of `1 − tanh x` cancellation.
fn mode_entropy_tanh(x: &Float) -> Float {
    let e = Float::with_val(x.prec(), -2 * x.clone()).exp();
    let l = e.clone().ln_1p();
    let one_plus = Float::with_val(x.prec(), 1) + &e;
    let p = Float::with_val(x.prec(), 1) / &one_plus;
    let q = e / one_plus;
    p * &l + q * (Float::with_val(x.prec(), 2) * x + l)
}

/// Real Fourier coefficients `g_l`, `l = −l_max..=l_max`, by a direct DFT
/// on `n` points.
fn dft_coefficients(ctx: Ctx, gamma: f64, h: f64, l_max: usize, n: usize) -> Vec<Float> {
    let two_pi = ctx.pi() * 2u32;
    let (mut cos, mut sin) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..n {
        let t = Float::with_val(ctx.bits, &two_pi * j as u32) / n as u32;
        let (s, c) = t.sin_cos(ctx.f(0.0));
        cos.push(c);
        sin.push(s);
    }
    let half_h = ctx.f(h) / 2u32;
    let gamma = ctx.f(gamma);
    let (mut re, mut im) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..n {
        let a = Float::with_val(ctx.bits, &cos[j] - &half_h);
        let b = -Float::with_val(ctx.bits, &gamma * &sin[j]);
        let norm = a.clone().hypot(&b);
        re.push(a / &norm);
        im.push(b / norm);
    }
    (-(l_max as i64)..=l_max as i64)
        .map(|l| {
            // Re[g_j e^{−ilθ_j}] = Re g cos(lθ) + Im g sin(lθ)
            let mut acc = ctx.f(0.0);
            for j in 0..n {
                let idx = ((l * j as i64).rem_euclid(n as i64)) as usize;
                acc += Float::with_val(ctx.bits, &re[j] * &cos[idx]);
                acc += Float::with_val(ctx.bits, &im[j] * &sin[idx]);
            }
            acc / n as u32
        })
        .collect()
}

/// Coefficients refined by grid doubling until they settle at the working
/// precision.
fn coefficients(ctx: Ctx, gamma: f64, h: f64, l_max: usize) -> Result<Vec<Float>> {
    let mut n = (4 * l_max + 4).max(64).next_power_of_two();
    let mut prev = dft_coefficients(ctx, gamma, h, l_max, n);
    let eps = ctx.eps();
    while n < 1 << 16 {
        n *= 2;
        let next = dft_coefficients(ctx, gamma, h, l_max, n);
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| Float::with_val(ctx.bits, a - b).abs())
            .fold(ctx.f(0.0), |m, d| if d > m { d } else { m });
        if change <= eps {
            return Ok(next);
        }
        prev = next;
    }
    Err(PreciseError::Convergence(format!("Fourier coefficients did not settle by n = {n}")))
}

/// Eigenvalues of a real symmetric matrix (row-major, modified in place):
/// Householder reduction to tridiagonal form, then implicit QL.
fn symmetric_eigenvalues(ctx: Ctx, mut a: Vec<Vec<Float>>) -> Result<Vec<Float>> {
    let n = a.len();
    let zero = ctx.f(0.0);
    let mut d = vec![zero.clone(); n];
    let mut e = vec![zero.clone(); n];
    for i in (1..n).rev() {
        let l = i - 1;
        if l > 0 {
            let mut hsum = zero.clone();
            let mut scale = zero.clone();
            for k in 0..=l {
                scale += a[i][k].clone().abs();
            }
            if scale.is_zero() {
                e[i] = a[i][l].clone();
            } else {
                for k in 0..=l {
                    a[i][k] /= &scale;
                    hsum += Float::with_val(ctx.bits, a[i][k].square_ref());
                }
                let f = a[i][l].clone();
                let root = hsum.clone().sqrt();
                let g = if f >= 0 { -root } else { root };
                e[i] = Float::with_val(ctx.bits, &scale * &g);
                hsum -= Float::with_val(ctx.bits, &f * &g);
                a[i][l] = f - &g;
                let mut f = zero.clone();
                for j in 0..=l {
                    let mut g = zero.clone();
                    for k in 0..=j {
                        g += Float::with_val(ctx.bits, &a[j][k] * &a[i][k]);
                    }
                    for k in (j + 1)..=l {
                        g += Float::with_val(ctx.bits, &a[k][j] * &a[i][k]);
                    }
                    e[j] = g / &hsum;
                    f += Float::with_val(ctx.bits, &e[j] * &a[i][j]);
                }
                let hh = f / Float::with_val(ctx.bits, &hsum * 2u32);
                for j in 0..=l {
                    let f = a[i][j].clone();
                    let g = Float::with_val(ctx.bits, &e[j] - &hh * &f);
                    e[j] = g.clone();
                    for k in 0..=j {
                        let upd = Float::with_val(ctx.bits, &f * &e[k])
                            + Float::with_val(ctx.bits, &g * &a[i][k]);
                        a[j][k] -= upd;
                    }
                }
            }
        } else {
            e[i] = a[i][l].clone();
        }
    }
    for i in 0..n {
        d[i] = a[i][i].clone();
    }
    for i in 1..n {
        e[i - 1] = e[i].clone();
    }
    if n > 0 {
        e[n - 1] = zero.clone();
    }
    let eps = Float::with_val(ctx.bits, 1) >> (ctx.bits as i32 - 2);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].clone().abs() + d[m + 1].clone().abs();
                if e[m].clone().abs() <= Float::with_val(ctx.bits, &eps * &dd) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(PreciseError::Convergence("implicit QL exceeded 200 sweeps".into()));
            }
            let mut g = Float::with_val(ctx.bits, &d[l + 1] - &d[l])
                / Float::with_val(ctx.bits, &e[l] * 2u32);
            let mut r = g.clone().hypot(&ctx.f(1.0));
            let shifted = if g >= 0 {
                Float::with_val(ctx.bits, &g + r.clone().abs())
            } else {
                Float::with_val(ctx.bits, &g - r.clone().abs())
            };
            g = Float::with_val(ctx.bits, &d[m] - &d[l])
                + Float::with_val(ctx.bits, &e[l] / &shifted);
            let (mut s, mut c, mut p) = (ctx.f(1.0), ctx.f(1.0), zero.clone());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = Float::with_val(ctx.bits, &s * &e[i]);
                let b = Float::with_val(ctx.bits, &c * &e[i]);
                r = f.clone().hypot(&g);
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] -= &p;
                    e[m] = zero.clone();
                    underflow = true;
                    break;
                }
                s = f / &r;
                c = Float::with_val(ctx.bits, &g / &r);
                g = Float::with_val(ctx.bits, &d[i + 1] - &p);
                r = Float::with_val(ctx.bits, &d[i] - &g) * &s
                    + Float::with_val(ctx.bits, &c * &b) * 2u32;
                p = Float::with_val(ctx.bits, &s * &r);
                d[i + 1] = Float::with_val(ctx.bits, &g + &p);
                g = Float::with_val(ctx.bits, &c * &r) - b;
            }
            if underflow {
                continue;
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = zero.clone();
        }
    }
    d.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(d)
}

/// Canonical magnitudes `ν_1 ≤ … ≤ ν_L` of `B_L` at `bits` precision.
pub fn majorana_magnitudes(gamma: f64, h: f64, l: usize, bits: u32) -> Result<Vec<Float>> {
    let ctx = Ctx::new(bits)?;
    regime(gamma, h)?;
    if l == 0 {
        return Err(PreciseError::Input("block length must be at least 1".into()));
    }
    let c = coefficients(ctx, gamma, h, l)?;
    let at = |k: i64| &c[(k + l as i64) as usize];
    let n = 2 * l;
    let mut b = vec![vec![ctx.f(0.0); n]; n];
    for j in 0..l {
        for k in 0..l {
            let d = j as i64 - k as i64;
            b[2 * j][2 * k + 1] = at(d).clone();
            b[2 * j + 1][2 * k] = -at(-d).clone();
        }
    }
    let mut btb = vec![vec![ctx.f(0.0); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = ctx.f(0.0);
            for k in 0..n {
                acc += Float::with_val(bits, &b[k][i] * &b[k][j]);
            }
            btb[i][j] = acc.clone();
            btb[j][i] = acc;
        }
    }
    let sq = symmetric_eigenvalues(ctx, btb)?;
    Ok(sq
        .chunks(2)
        .map(|pair| {
            let mean = Float::with_val(bits, &pair[0] + &pair[1]) / 2u32;
            let one = ctx.f(1.0);
            let clipped = if mean < 0 {
                ctx.f(0.0)
            } else if mean > one {
                one
            } else {
                mean
            };
            clipped.sqrt()
        })
        .collect())
}

/// `S_L = Σ H(ν_m)` at `bits` precision.
pub fn finite_entropy(gamma: f64, h: f64, l: usize, bits: u32) -> Result<Float> {
    let nu = majorana_magnitudes(gamma, h, l, bits)?;
    Ok(nu.iter().fold(Float::with_val(bits, 0), |acc, v| acc + mode_entropy(v)))
}

/// `(k, k', σ)` from cancellation-free closed forms.
fn modulus(ctx: Ctx, gamma: f64, h: f64) -> Result<(Float, Float, u8)> {
    let regime = open_regime(gamma, h)?;
    let g = ctx.f(gamma);
    let g2 = Float::with_val(ctx.bits, g.square_ref());
    let half = ctx.f(h) / 2u32;
    let half2 = Float::with_val(ctx.bits, half.square_ref());
    let field_excess = Float::with_val(ctx.bits, &half2 - 1u32);
    let one_minus_g2 = Float::with_val(ctx.bits, 1u32 - &g2);
    let (k2, kp2, sigma) = match regime {
        RegimeLabel::Case1a => (
            Float::with_val(ctx.bits, &half2 - &one_minus_g2) / &g2,
            Float::with_val(ctx.bits, -&field_excess) / &g2,
            1,
        ),
        RegimeLabel::Case1b => (
            Float::with_val(ctx.bits, &one_minus_g2 - &half2)
                / Float::with_val(ctx.bits, -&field_excess),
            Float::with_val(ctx.bits, &g2 / Float::with_val(ctx.bits, -&field_excess)),
            1,
        ),
        _ => {
            let denom = Float::with_val(ctx.bits, &field_excess + &g2);
            (Float::with_val(ctx.bits, &g2 / &denom), field_excess / denom, 0)
        }
    };
    Ok((k2.sqrt(), kp2.sqrt(), sigma))
}

/// `τ₀ = K(k')/K(k)` at `bits` precision.
pub fn tau0(gamma: f64, h: f64, bits: u32) -> Result<Float> {
    let ctx = Ctx::new(bits)?;
    let (k, kp, _) = modulus(ctx, gamma, h)?;
    // K(k) = π/(2 AGM(1, k')), so τ₀ = AGM(1, k')/AGM(1, k)
    let one = ctx.f(1.0);
    Ok(one.clone().agm(&kp) / one.agm(&k))
}

/// The limiting series `Σ_{m∈ℤ} H(λ_m)` at `bits` precision.
pub fn series_entropy(gamma: f64, h: f64, bits: u32) -> Result<Float> {
    let ctx = Ctx::new(bits)?;
    let (_, _, sigma) = modulus(ctx, gamma, h)?;
    let tau = tau0(gamma, h, bits)?;
    let step = ctx.pi() * &tau;
    let tiny = Float::with_val(bits, 1) >> (bits as i32 + 4);
    let mut acc = ctx.f(0.0);
    for m in 0u32.. {
        let x = if sigma == 1 {
            Float::with_val(bits, &step * m)
        } else {
            Float::with_val(bits, &step * m) + Float::with_val(bits, &step / 2u32)
        };
        let term = mode_entropy_tanh(&x);
        let weight = if sigma == 1 && m == 0 { 1u32 } else { 2u32 };
        let small = m > 0 && term < tiny;
        acc += term * weight;
        if small {
            break;
        }
        if m > 10_000_000 {
            return Err(PreciseError::Convergence("series needs more than 1e7 terms".into()));
        }
    }
    Ok(acc)
}
