//! Gauss–Legendre quadrature helpers: fixed panels and adaptive bisection,
//! for real- and complex-valued integrands.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// A fixed Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(degree: usize) -> Self {
        let degree = NonZeroUsize::new(degree).expect("quadrature degree must be positive");
        let gl = GaussLegendre::new(degree);
        Self { pairs: gl.as_node_weight_pairs().to_vec() }
    }

    pub fn degree(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        self.mapped(a, b).fold(T::default(), |acc, (x, w)| acc + f(x) * w)
    }

    /// Sum of the rule over `panels` equal panels of `[a, b]`.
    pub fn integrate_panels<T, F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let width = (b - a) / panels as f64;
        (0..panels).fold(T::default(), |acc, p| {
            let lo = a + p as f64 * width;
            let hi = if p + 1 == panels { b } else { lo + width };
            acc + self.integrate(lo, hi, &mut f)
        })
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive bisection: an interval is accepted when the rule on the whole
/// interval agrees with the rule on its two halves to `tol` (scaled by the
/// interval's share of the total length).
pub fn adaptive_complex<F>(rule: &Rule, a: f64, b: f64, tol: f64, mut f: F) -> Adaptive<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    const MAX_DEPTH: u32 = 48;
    let total = (b - a).abs().max(f64::MIN_POSITIVE);
    // Rule value and rule estimate of ∫|f|, the scale of its rounding error.
    let mut estimate = |lo: f64, hi: f64| {
        rule.mapped(lo, hi).fold((Complex64::default(), 0.0), |(v, m), (x, w)| {
            let y = f(x);
            (v + y * w, m + y.norm() * w.abs())
        })
    };
    let mut stack = vec![(a, b, estimate(a, b).0, 0u32)];
    let mut value = Complex64::default();
    let mut error = 0.0;
    let mut converged = true;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (left, left_abs) = estimate(lo, mid);
        let (right, right_abs) = estimate(mid, hi);
        let diff = (left + right - whole).norm();
        let share = tol * ((hi - lo).abs() / total);
        let noise = 64.0 * f64::EPSILON * (left_abs + right_abs);
        if diff <= share.max(1e-15 * (left + right).norm()).max(noise) || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && diff > share.max(noise) {
                converged = false;
            }
            value += left + right;
            error += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Adaptive { value, error, converged }
}

/// Real-valued wrapper over [`adaptive_complex`].
pub fn adaptive<F>(rule: &Rule, a: f64, b: f64, tol: f64, mut f: F) -> Adaptive<f64>
where
    F: FnMut(f64) -> f64,
{
    let r = adaptive_complex(rule, a, b, tol, |x| Complex64::new(f(x), 0.0));
    Adaptive { value: r.value.re, error: r.error, converged: r.converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let rule = Rule::new(5);
        let v: f64 = rule.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 102.4).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_near_pole() {
        // ∫₀¹ dx / (x² + ε²) = atan(1/ε)/ε
        let eps = 1e-3;
        let rule = Rule::new(15);
        let r = adaptive(&rule, 0.0, 1.0, 1e-10, |x| 1.0 / (x * x + eps * eps));
        let exact = (1.0 / eps).atan() / eps;
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn panels_match_single_rule_for_smooth_integrand() {
        let rule = Rule::new(20);
        let one: f64 = rule.integrate(0.0, 3.0, f64::exp);
        let many: f64 = rule.integrate_panels(0.0, 3.0, 7, f64::exp);
        assert!((one - many).abs() < 1e-13);
        assert!((one - (3f64.exp() - 1.0)).abs() < 1e-13);
    }
}
