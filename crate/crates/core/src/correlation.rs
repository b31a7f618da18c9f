//! Finite-block Majorana correlations and the exact block entropy `S_L`.
//!
//! The block-Toeplitz matrix `B_L` has 2×2 blocks
//! `Π_l = [[0, g_l], [−g_{−l}, 0]]`, where `g_l` are the Fourier coefficients
//! of the unimodular symbol
//! `g(θ) = (cos θ − iγ sin θ − h/2) / |cos θ − iγ sin θ − h/2|`.
//! `B_L` is real antisymmetric; its canonical form has `L` magnitudes
//! `0 ≤ ν_m ≤ 1` and `S_L = Σ H(ν_m)` with
//! `H(ν) = −((1+ν)/2) ln((1+ν)/2) − ((1−ν)/2) ln((1−ν)/2)`.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::asymptotics::{EntropyEstimate, Method};
use crate::error::{Error, Result};
use crate::model::{classify, ModelParams, RegimeLabel};
use crate::quad::{adaptive_complex, Rule};

/// Smallest numerator modulus accepted by [`symbol_g`].
pub const SYMBOL_SINGULAR_TOLERANCE: f64 = 1e-13;
/// Coefficients must move by less than this under one grid doubling.
pub const FOURIER_TOLERANCE: f64 = 1e-13;
/// Largest grid [`build_correlation`] escalates to.
pub const MAX_GRID: usize = 1 << 22;
/// Imaginary residue allowed on coefficients that are real by symmetry.
const REALITY_TOLERANCE: f64 = 1e-12;
/// Largest tolerated `ν − 1` before clipping.
const OVERSHOOT_TOLERANCE: f64 = 1e-8;
/// Largest tolerated `|e_i + e_{2L−1−i}|` for the ± pairing of `iB`.
const PAIRING_TOLERANCE: f64 = 1e-8;

/// The unimodular symbol `g(θ)`.
pub fn symbol_g(theta: f64, params: &ModelParams) -> Result<Complex64> {
    let (s, c) = theta.sin_cos();
    let num = Complex64::new(c - 0.5 * params.h(), -params.gamma() * s);
    let modulus = num.norm();
    if modulus < SYMBOL_SINGULAR_TOLERANCE {
        return Err(Error::SingularSymbol { theta });
    }
    Ok(num / modulus)
}

/// Fourier coefficients `g_l` and `g_{−l}` of the symbol for one `l ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierBlock {
    pub l: i64,
    pub g_plus: f64,
    pub g_minus: f64,
}

impl FourierBlock {
    /// `Π_l` as a row-major 2×2 array.
    pub fn pi_plus(&self) -> [[f64; 2]; 2] {
        [[0.0, self.g_plus], [-self.g_minus, 0.0]]
    }

    /// `Π_{−l}`.
    pub fn pi_minus(&self) -> [[f64; 2]; 2] {
        [[0.0, self.g_minus], [-self.g_plus, 0.0]]
    }
}

fn sample_dft(params: &ModelParams, n: usize) -> Result<Vec<Complex64>> {
    let mut buf = (0..n)
        .map(|j| symbol_g(2.0 * PI * j as f64 / n as f64, params))
        .collect::<Result<Vec<_>>>()?;
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    Ok(buf)
}

fn coefficient(dft: &[Complex64], l: i64) -> Complex64 {
    let n = dft.len() as i64;
    dft[l.rem_euclid(n) as usize]
}

fn to_blocks(l_max: usize, mut coeff: impl FnMut(i64) -> Complex64) -> Result<Vec<FourierBlock>> {
    (0..=l_max as i64)
        .map(|l| {
            let (plus, minus) = (coeff(l), coeff(-l));
            let worst = plus.im.abs().max(minus.im.abs());
            if worst > REALITY_TOLERANCE {
                return Err(Error::Numeric(format!(
                    "Fourier coefficient g_{l} has imaginary part {worst:e}"
                )));
            }
            Ok(FourierBlock { l, g_plus: plus.re, g_minus: minus.re })
        })
        .collect()
}

/// Fourier blocks `l = 0..=l_max` from a power-of-two DFT with `n_grid`
/// points, validated against the DFT on `2·n_grid` points.
///
/// Only valid off the critical lines, where `g` is analytic on the circle;
/// see [`build_correlation`] for the critical-line route.
pub fn fourier_blocks(
    l_max: usize,
    params: &ModelParams,
    n_grid: usize,
) -> Result<Vec<FourierBlock>> {
    if !n_grid.is_power_of_two() || n_grid < 4 * l_max.max(1) {
        return Err(Error::Domain(format!(
            "n_grid must be a power of two >= 4*l_max, got n_grid = {n_grid}, l_max = {l_max}"
        )));
    }
    let coarse = sample_dft(params, n_grid)?;
    let fine = sample_dft(params, 2 * n_grid)?;
    let change = (-(l_max as i64)..=l_max as i64)
        .map(|l| (coefficient(&coarse, l) - coefficient(&fine, l)).norm())
        .fold(0.0, f64::max);
    if change > FOURIER_TOLERANCE {
        return Err(Error::Resolution { n_grid, change });
    }
    to_blocks(l_max, |l| coefficient(&fine, l))
}

/// Exact coefficients on the XX line, where `g = sign(cos θ − h/2)`.
fn xx_blocks(l_max: usize, h: f64) -> Result<Vec<FourierBlock>> {
    let k_fermi = (0.5 * h).acos();
    to_blocks(l_max, |l| {
        let v = if l == 0 {
            2.0 * k_fermi / PI - 1.0
        } else {
            2.0 * (l as f64 * k_fermi).sin() / (PI * l as f64)
        };
        Complex64::new(v, 0.0)
    })
}

/// Coefficients at `h = 2`, where `g` jumps at `θ = 0` but is analytic on
/// `(0, 2π)`: `g = −(sin(θ/2) + iγ cos(θ/2)) / √(sin²(θ/2) + γ² cos²(θ/2))`.
fn critical_field_blocks(l_max: usize, gamma: f64) -> Result<Vec<FourierBlock>> {
    let rule = Rule::new(20);
    let g = |theta: f64| {
        let (s, c) = (0.5 * theta).sin_cos();
        -Complex64::new(s, gamma * c) / s.hypot(gamma * c)
    };
    let mut failure = None;
    let blocks = to_blocks(l_max, |l| {
        let r = adaptive_complex(&rule, 0.0, 2.0 * PI, 1e-14, |theta| {
            g(theta) * Complex64::from_polar(1.0, -(l as f64) * theta)
        });
        if !r.converged && r.error > FOURIER_TOLERANCE {
            failure = Some(r.error);
        }
        r.value / (2.0 * PI)
    })?;
    match failure {
        Some(change) => Err(Error::Resolution { n_grid: 0, change }),
        None => Ok(blocks),
    }
}

/// The real antisymmetric `2L × 2L` Majorana correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    l: usize,
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    /// Number of spins in the block.
    pub fn block_len(&self) -> usize {
        self.l
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The 2×2 block in block-row `j`, block-column `k` (equals `Π_{j−k}`).
    pub fn block(&self, j: usize, k: usize) -> [[f64; 2]; 2] {
        let e = &self.entries;
        [
            [e[(2 * j, 2 * k)], e[(2 * j, 2 * k + 1)]],
            [e[(2 * j + 1, 2 * k)], e[(2 * j + 1, 2 * k + 1)]],
        ]
    }

    /// `max |B + Bᵀ|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let e = &self.entries;
        (e + e.transpose()).amax()
    }

    /// Assemble from blocks `l = 0..L−1`.
    pub fn from_blocks(l: usize, blocks: &[FourierBlock]) -> Self {
        assert!(blocks.len() >= l, "need Fourier blocks up to l = L - 1");
        let mut entries = DMatrix::zeros(2 * l, 2 * l);
        for j in 0..l {
            for k in 0..l {
                let (coeff, flip) =
                    if j >= k { (blocks[j - k], false) } else { (blocks[k - j], true) };
                let pi = if flip { coeff.pi_minus() } else { coeff.pi_plus() };
                for (a, row) in pi.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        entries[(2 * j + a, 2 * k + b)] = *v;
                    }
                }
            }
        }
        Self { l, entries }
    }
}

/// Fourier blocks `0..=l_max` by whichever route the regime allows.
pub fn symbol_blocks(l_max: usize, params: &ModelParams) -> Result<Vec<FourierBlock>> {
    match classify(params) {
        RegimeLabel::CriticalXX => xx_blocks(l_max, params.h()),
        RegimeLabel::CriticalFieldH2 => critical_field_blocks(l_max, params.gamma()),
        _ => {
            let mut n_grid = (8 * l_max.max(1)).max(512).next_power_of_two();
            loop {
                match fourier_blocks(l_max, params, n_grid) {
                    Err(Error::Resolution { .. }) if 2 * n_grid <= MAX_GRID => n_grid *= 2,
                    other => return other,
                }
            }
        }
    }
}

/// `B_L` for a block of `l` spins.
///
/// On the critical lines the symbol has jumps, so the coefficients come from
/// the closed form (XX) or piecewise quadrature (`h = 2`) instead of a DFT.
pub fn build_correlation(l: usize, params: &ModelParams) -> Result<CorrelationMatrix> {
    if l == 0 {
        return Err(Error::Domain("block length L must be at least 1".into()));
    }
    let blocks = symbol_blocks(l - 1, params)?;
    Ok(CorrelationMatrix::from_blocks(l, &blocks))
}

/// Canonical magnitudes `ν_1 ≥ … ≥ ν_L` of `B_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaSpectrum {
    pub l: usize,
    pub nu: Vec<f64>,
    /// `max |e_i + e_{2L−1−i}|` over the sorted eigenvalues of `iB`.
    pub pairing_residual: f64,
}

impl MajoranaSpectrum {
    /// `ν` in ascending order.
    pub fn ascending(&self) -> Vec<f64> {
        self.nu.iter().rev().copied().collect()
    }
}

/// Eigen-magnitudes of `B` from the Hermitian eigenproblem of `iB`.
pub fn majorana_spectrum(b: &CorrelationMatrix) -> Result<MajoranaSpectrum> {
    let n = b.entries.nrows();
    let ib = b.entries.map(|v| Complex64::new(0.0, v));
    let eig = SymmetricEigen::try_new(ib, 1e-15, 10_000)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let mut e: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    let l = n / 2;
    let mut residual: f64 = 0.0;
    let mut nu = Vec::with_capacity(l);
    for i in 0..l {
        let (lo, hi) = (e[i], e[n - 1 - i]);
        residual = residual.max((lo + hi).abs());
        nu.push(0.5 * (hi - lo));
    }
    if residual > PAIRING_TOLERANCE {
        return Err(Error::Asymmetry { residual });
    }
    if let Some(&top) = nu.first() {
        if top > 1.0 + OVERSHOOT_TOLERANCE {
            return Err(Error::Numeric(format!("eigenvalue magnitude {top} exceeds 1")));
        }
    }
    nu.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(MajoranaSpectrum { l, nu, pairing_residual: residual })
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `e(x, ν) = −((x+ν)/2) ln((x+ν)/2) − ((x−ν)/2) ln((x−ν)/2)`, with
/// `0·ln 0 = 0`.
pub fn entropy_kernel(x: f64, nu: f64) -> Result<f64> {
    if !(x >= 1.0) || nu.abs() > x {
        return Err(Error::Domain(format!(
            "entropy kernel needs x >= 1 and |nu| <= x, got x = {x}, nu = {nu}"
        )));
    }
    Ok(-xlogx(0.5 * (x + nu)) - xlogx(0.5 * (x - nu)))
}

/// Binary mode entropy `H(ν) = e(1, ν)`; `ν` is clipped to `[−1, 1]`.
pub fn mode_entropy(nu: f64) -> f64 {
    let nu = nu.clamp(-1.0, 1.0);
    -xlogx(0.5 * (1.0 + nu)) - xlogx(0.5 * (1.0 - nu))
}

/// `e(x, λ)` for complex `λ` on the principal branch (cuts along
/// `|Re λ| ≥ x` on the real axis).
pub fn entropy_kernel_complex(x: f64, lambda: Complex64) -> Complex64 {
    let p = (x + lambda) * 0.5;
    let q = (x - lambda) * 0.5;
    -(p * p.ln()) - q * q.ln()
}

/// `S_L = Σ H(ν_m)` from a computed spectrum, with a perturbative error
/// bound from the eigensolver residual.
pub fn entropy_from_spectrum(spectrum: &MajoranaSpectrum, regime: RegimeLabel) -> EntropyEstimate {
    let delta = spectrum.pairing_residual.max(16.0 * spectrum.l as f64 * f64::EPSILON);
    let mut value = 0.0;
    let mut bound = 0.0;
    for &nu in &spectrum.nu {
        let h = mode_entropy(nu);
        value += h;
        let up = (mode_entropy((nu + delta).min(1.0)) - h).abs();
        let down = (mode_entropy((nu - delta).max(0.0)) - h).abs();
        bound += up.max(down);
    }
    EntropyEstimate { value, method: Method::Finite, error_bound: bound, regime }
}

/// Exact entropy of a block of `l` spins.
pub fn entropy_finite(l: usize, params: &ModelParams) -> Result<EntropyEstimate> {
    let b = build_correlation(l, params)?;
    let spectrum = majorana_spectrum(&b)?;
    Ok(entropy_from_spectrum(&spectrum, classify(params)))
}

/// `d/dλ ln det(iλ − B) = i·tr((iλ − B)⁻¹)`, straight from the resolvent.
pub fn resolvent_dlog(b: &CorrelationMatrix, lambda: Complex64) -> Result<Complex64> {
    let n = b.entries.nrows();
    let shift = Complex64::new(0.0, 1.0) * lambda;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { shift } else { Complex64::default() };
        d - b.entries[(i, j)]
    });
    let inv = m
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numeric(format!("iλ − B is singular at λ = {lambda}")))?;
    Ok(Complex64::new(0.0, 1.0) * inv.trace())
}

/// Block entropy from the contour representation
/// `(1/4πi) ∮ e(1+ε, λ) d/dλ ln D_L(λ) dλ`, on a rectangle enclosing
/// `[−1, 1]` at distance `ε/2`. By the residue theorem it equals
/// `Σ e(1+ε, ν_m)`.
pub fn contour_entropy(b: &CorrelationMatrix, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("contour offset needs 0 < eps < 1, got {eps}")));
    }
    let x0 = 1.0 + 0.5 * eps;
    let y0 = 0.5 * eps;
    let rule = Rule::new(16);
    let i = Complex64::new(0.0, 1.0);
    let mut failure: Option<Error> = None;
    let mut integrand = |lambda: Complex64| match resolvent_dlog(b, lambda) {
        Ok(d) => entropy_kernel_complex(1.0 + eps, lambda) * d,
        Err(e) => {
            failure.get_or_insert(e);
            Complex64::default()
        }
    };
    // Pole features are ~eps wide; start from panels narrower than that scale
    // so the adaptive pass sees them.
    let panels = ((4.0 * x0 / eps).ceil() as usize).max(64);
    let width = 2.0 * x0 / panels as f64;
    let tol = 1e-9;
    let mut total = Complex64::default();
    for p in 0..panels {
        let (lo, hi) = (-x0 + p as f64 * width, -x0 + (p + 1) as f64 * width);
        let bottom = adaptive_complex(&rule, lo, hi, tol / panels as f64, |x| {
            integrand(Complex64::new(x, -y0))
        });
        let top = adaptive_complex(&rule, lo, hi, tol / panels as f64, |x| {
            integrand(Complex64::new(x, y0))
        });
        total += bottom.value - top.value;
    }
    let right = adaptive_complex(&rule, -y0, y0, tol, |y| integrand(Complex64::new(x0, y)) * i);
    let left = adaptive_complex(&rule, -y0, y0, tol, |y| integrand(Complex64::new(-x0, y)) * i);
    total += right.value - left.value;
    if let Some(e) = failure {
        return Err(e);
    }
    let s = total / (Complex64::new(0.0, 4.0 * PI));
    if s.im.abs() > 1e-8 * (1.0 + s.re.abs()) {
        return Err(Error::Numeric(format!("contour entropy has imaginary part {:e}", s.im)));
    }
    Ok(s.re)
}

/// `ln 2`, the entropy of one maximally mixed Majorana pair.
pub const MAX_MODE_ENTROPY: f64 = LN_2;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(g: f64, h: f64) -> ModelParams {
        ModelParams::new(g, h).unwrap()
    }

    #[test]
    fn symbol_examples() {
        let one = symbol_g(0.0, &p(0.3, 0.0)).unwrap();
        assert!((one - 1.0).norm() < 1e-15);
        let minus = symbol_g(0.0, &p(0.3, 4.0)).unwrap();
        assert!((minus + 1.0).norm() < 1e-15);
        let mi = symbol_g(PI / 2.0, &p(1.0, 0.0)).unwrap();
        assert!((mi - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(matches!(symbol_g(0.0, &p(0.5, 2.0)), Err(Error::SingularSymbol { .. })));
    }

    #[test]
    fn single_mode_symbol() {
        let blocks = fourier_blocks(3, &p(1.0, 0.0), 64).unwrap();
        for b in &blocks {
            let expect_minus = if b.l == 1 { 1.0 } else { 0.0 };
            assert!(b.g_plus.abs() < 1e-15);
            assert!((b.g_minus - expect_minus).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_preconditions() {
        assert!(fourier_blocks(10, &p(0.5, 3.0), 24).is_err());
        assert!(fourier_blocks(10, &p(0.5, 3.0), 32).is_err());
        assert!(fourier_blocks(10, &p(0.5, 3.0), 64).is_ok());
    }

    #[test]
    fn slow_decay_triggers_resolution_error() {
        // h close to 2: coefficients decay like |λ_C|^{-l} with |λ_C| ≈ 1.0005
        let err = fourier_blocks(4, &p(1.0, 1.999), 64).unwrap_err();
        assert!(matches!(err, Error::Resolution { n_grid: 64, .. }));
        // build_correlation escalates the grid instead
        assert!(build_correlation(5, &p(1.0, 1.999)).is_ok());
    }

    #[test]
    fn small_blocks() {
        let b1 = build_correlation(1, &p(1.0, 0.0)).unwrap();
        assert!(b1.entries().amax() < 1e-15);

        let b2 = build_correlation(2, &p(1.0, 0.0)).unwrap();
        let pi0 = b2.block(0, 0);
        let pim1 = b2.block(0, 1);
        let pi1 = b2.block(1, 0);
        assert!(pi0.iter().flatten().all(|v| v.abs() < 1e-15));
        assert!((pim1[0][1] - 1.0).abs() < 1e-15 && pim1[1][0].abs() < 1e-15);
        assert!((pi1[1][0] + 1.0).abs() < 1e-15 && pi1[0][1].abs() < 1e-15);
    }

    #[test]
    fn spectrum_examples() {
        let s1 = majorana_spectrum(&build_correlation(1, &p(1.0, 0.0)).unwrap()).unwrap();
        assert_eq!(s1.nu.len(), 1);
        assert!(s1.nu[0].abs() < 1e-15);

        let s4 = majorana_spectrum(&build_correlation(4, &p(1.0, 0.0)).unwrap()).unwrap();
        let expect = [1.0, 1.0, 1.0, 0.0];
        for (a, b) in s4.nu.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{:?}", s4.nu);
        }

        let strong = majorana_spectrum(&build_correlation(2, &p(0.5, 50.0)).unwrap()).unwrap();
        assert!(strong.nu.iter().all(|v| (v - 1.0).abs() < 1e-3));
    }

    #[test]
    fn kernel_values() {
        assert_relative_eq!(entropy_kernel(1.0, 0.0).unwrap(), LN_2, max_relative = 1e-15);
        assert_eq!(entropy_kernel(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(entropy_kernel(1.0, -0.37).unwrap(), entropy_kernel(1.0, 0.37).unwrap());
        assert!(matches!(entropy_kernel(1.0, 1.2), Err(Error::Domain(_))));
        let z = entropy_kernel_complex(1.3, Complex64::new(0.4, 0.0));
        assert!((z.re - entropy_kernel(1.3, 0.4).unwrap()).abs() < 1e-15 && z.im.abs() < 1e-15);
    }

    #[test]
    fn finite_entropy_examples() {
        let s1 = entropy_finite(1, &p(1.0, 0.0)).unwrap();
        assert_relative_eq!(s1.value, LN_2, max_relative = 1e-14);
        let s6 = entropy_finite(6, &p(1.0, 0.0)).unwrap();
        assert_relative_eq!(s6.value, LN_2, max_relative = 1e-12);
        assert_eq!(s6.method, Method::Finite);
    }

    #[test]
    fn critical_line_blocks() {
        // XX line: 2 sin(l k_F)/(π l), g_0 = 2k_F/π − 1, cross-checked by quadrature
        let params = p(0.0, 1.0);
        let blocks = symbol_blocks(6, &params).unwrap();
        let rule = Rule::new(20);
        let kf = 0.5f64.acos();
        for b in &blocks {
            let l = b.l as f64;
            let inside: f64 = rule.integrate_panels(-kf, kf, 8, |t| (l * t).cos());
            let expect = (2.0 * inside - if b.l == 0 { 2.0 * PI } else { 0.0 }) / (2.0 * PI);
            assert!((b.g_plus - expect).abs() < 1e-13);
            assert!((b.g_minus - expect).abs() < 1e-13);
        }
        // h = 2: quadrature route stays real and bounded, spectrum inside [0, 1]
        let s = entropy_finite(12, &p(1.0, 2.0)).unwrap();
        assert!(s.value > 0.0 && s.value.is_finite());
        let xx = entropy_finite(12, &params).unwrap();
        assert!(xx.value > LN_2);
    }

    #[test]
    fn resolvent_matches_spectrum() {
        let b = build_correlation(4, &p(0.7, 0.9)).unwrap();
        let s = majorana_spectrum(&b).unwrap();
        let lam = Complex64::new(0.3, 0.2);
        let from_nu: Complex64 = s.nu.iter().map(|&v| 2.0 * lam / (lam * lam - v * v)).sum();
        let from_resolvent = resolvent_dlog(&b, lam).unwrap();
        assert!((from_nu - from_resolvent).norm() < 1e-10 * from_nu.norm());
    }
}
