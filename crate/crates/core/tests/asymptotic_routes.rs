use std::f64::consts::{LN_2, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xyent::asymptotics::{entropy_by_parts, series_from_data, term_pair};
use xyent::{
    critical_fit, elliptic_data, entropy_closed, entropy_integral, entropy_series, lambda_sequence,
    mode_entropy, small_tau_estimate, EllipticData, ModelParams, RegimeLabel,
};

fn p(g: f64, h: f64) -> ModelParams {
    ModelParams::new(g, h).unwrap()
}

/// A random point strictly inside `regime` with `τ₀ ∈ [0.2, 5]`.
fn sample(rng: &mut ChaCha8Rng, regime: RegimeLabel) -> ModelParams {
    loop {
        let q = match regime {
            RegimeLabel::Case1a => {
                let g: f64 = rng.gen_range(0.3..1.5);
                let lo = if g >= 1.0 { 0.0 } else { 2.0 * (1.0 - g * g).sqrt() };
                p(g, rng.gen_range(lo..2.0))
            }
            RegimeLabel::Case1b => {
                let g: f64 = rng.gen_range(0.05..1.0);
                p(g, rng.gen_range(0.0..2.0 * (1.0 - g * g).sqrt()))
            }
            _ => p(rng.gen_range(0.05..2.0), rng.gen_range(2.0..6.0)),
        };
        if q.regime() != regime {
            continue;
        }
        let tau0 = elliptic_data(&q).unwrap().tau0;
        if (0.2..=5.0).contains(&tau0) {
            return q;
        }
    }
}

#[test]
fn three_routes_agree_per_regime() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for regime in [RegimeLabel::Case1a, RegimeLabel::Case1b, RegimeLabel::Case2] {
        for _ in 0..20 {
            let q = sample(&mut rng, regime);
            let s = entropy_series(&q, 1e-14).unwrap().value;
            let i = entropy_integral(&q, 1e-12).unwrap().value;
            let c = entropy_closed(&q).unwrap().value;
            let worst = (s - i).abs().max((s - c).abs()).max((i - c).abs());
            assert!(worst <= 1e-8, "{q:?}: {s} {i} {c}");
        }
    }
}

#[test]
fn boundary_points_give_ln2() {
    for j in 0..10 {
        let g = 0.05 + 0.09 * j as f64;
        let h = 2.0 * (1.0 - g * g).sqrt();
        let q = p(g, h);
        assert_eq!(q.regime(), RegimeLabel::Boundary1a1b);
        assert!((entropy_series(&q, 1e-12).unwrap().value - LN_2).abs() <= 1e-10);
    }
}

#[test]
fn closed_form_limit_approaches_ln2_off_the_boundary() {
    // just off the line the closed form (not the shortcut) tends to ln 2
    let g: f64 = 0.6;
    let h = 2.0 * (1.0 - g * g).sqrt() + 1e-6;
    let v = entropy_closed(&p(g, h)).unwrap().value;
    assert!((v - LN_2).abs() < 1e-3, "{v}");
}

#[test]
fn entropy_decreases_with_strong_field() {
    let mut prev = f64::INFINITY;
    for j in 0..=79 {
        let h = 2.1 + 0.1 * j as f64;
        let s = entropy_series(&p(0.5, h), 1e-14).unwrap().value;
        assert!(s < prev, "h = {h}");
        prev = s;
    }
}

#[test]
fn small_tau_divergence() {
    // τ₀ = 0.05 sits at |2 − h| ~ 1e-26 on the γ = 1 line, beyond f64; the
    // series depends on (γ, h) only through (τ₀, σ), so evaluate it there.
    let base = elliptic_data(&p(1.0, 1.0)).unwrap();
    let at = |tau0: f64| {
        let data = EllipticData { tau0, ..base };
        series_from_data(&data, 1e-12).unwrap().0 * 6.0 * tau0 / PI
    };
    assert!((at(0.05) - 1.0).abs() <= 0.05, "{}", at(0.05));
    assert!((at(0.02) - 1.0).abs() < (at(0.05) - 1.0).abs());
    // along the physical line the ratio moves towards 1 as h → 2
    let along = |h: f64| {
        let q = p(1.0, h);
        let tau0 = elliptic_data(&q).unwrap().tau0;
        entropy_series(&q, 1e-12).unwrap().value * 6.0 * tau0 / PI
    };
    let (far, near) = (along(1.9), along(2.0 - 2e-9));
    assert!((near - 1.0).abs() < (far - 1.0).abs(), "{far} {near}");
    let q = p(1.0, 1.999);
    let tau0 = elliptic_data(&q).unwrap().tau0;
    let est = small_tau_estimate(&q).unwrap();
    assert!((est.value * 6.0 * tau0 / PI - 1.0).abs() < 1e-12);
}

#[test]
fn ladder_spacing_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let regime = [RegimeLabel::Case1a, RegimeLabel::Case1b, RegimeLabel::Case2][k % 3];
        let data = elliptic_data(&sample(&mut rng, regime)).unwrap();
        let ladder = lambda_sequence(&data, 1e-12).unwrap();
        for w in ladder.lambdas.windows(2) {
            assert!(w[1] > w[0] && w[1] - w[0] <= 4.0 * PI * data.tau0);
        }
        // λ_M may round to 1.0; its argument stays finite
        assert!(ladder.lambdas.iter().all(|&l| (0.0..=1.0).contains(&l)));
        assert!(ladder.args.iter().all(|x| x.is_finite()));
    }
}

#[test]
fn by_parts_matches_integral() {
    for q in [p(1.0, 1.0), p(0.5, 1.0), p(0.5, 3.0)] {
        let direct = entropy_integral(&q, 1e-12).unwrap().value;
        let parts = entropy_by_parts(&q, 1e-12).unwrap();
        assert!((direct - parts).abs() <= 1e-6, "{q:?}: {direct} {parts}");
    }
}

#[test]
fn critical_fit_recovers_exact_coefficients() {
    // synthetic data with the fitted structure recovers it exactly
    let data: Vec<(f64, f64)> = (0..40)
        .map(|j| {
            let x = 0.001 + 0.1 * j as f64 / 40.0;
            (x, -x.ln() / 6.0 + 0.4 + 0.3 * x * x.ln() - 0.2 * x)
        })
        .collect();
    let fit = critical_fit(&data).unwrap();
    assert!((fit.slope + 1.0 / 6.0).abs() < 1e-10);
    assert!((fit.intercept - 0.4).abs() < 1e-10);
}

proptest! {
    #[test]
    fn term_pair_is_twice_mode_entropy(l in 0.0f64..1.0) {
        prop_assert!((term_pair(l) - 2.0 * mode_entropy(l)).abs() <= 1e-14);
    }

    #[test]
    fn series_is_nonnegative_and_bounded(g in 0.05f64..2.0, h in 0.0f64..8.0) {
        let q = p(g, h);
        prop_assume!(!q.regime().is_critical() && (h - 2.0).abs() > 1e-3);
        let s = entropy_series(&q, 1e-12).unwrap();
        prop_assert!(s.value >= 0.0 && s.value.is_finite() && s.error_bound.is_finite());
    }

    #[test]
    fn closed_form_matches_series(g in 0.1f64..1.5, h in 0.0f64..6.0) {
        let q = p(g, h);
        prop_assume!(!q.regime().is_critical() && (h - 2.0).abs() > 1e-2);
        let s = entropy_series(&q, 1e-14).unwrap().value;
        let c = entropy_closed(&q).unwrap().value;
        prop_assert!((s - c).abs() <= 1e-9, "{s} vs {c}");
    }
}
