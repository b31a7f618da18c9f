use std::f64::consts::{LN_2, PI};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use xyent::verify::{PROXIMITY_TOLERANCE, RESIDUAL_FLOOR};
use xyent::{
    char_determinant, critical_estimate, critical_fit, doubling_check, elliptic_data,
    entropy_closed, entropy_finite, entropy_integral, entropy_series, lambda_sequence, phi_vs_g,
    residual_scan, symbol_roots, EntropyEstimate, Method, ModelParams, RegimeLabel,
};

use crate::args::{CriticalFitArgs, EntropyArgs, Level, ScanArgs, SpectrumArgs, VerifyArgs};
use crate::output::{sig17, to_json};
use crate::report::{FitReport, MethodResult, RunReport};
use crate::Failure;

pub const SCAN_HEADER: [&str; 9] =
    ["gamma", "h", "regime", "k", "tau0", "method", "value", "error_bound", "reason"];

const SCAN_METHODS: [Method; 4] =
    [Method::Finite, Method::Series, Method::Integral, Method::ClosedForm];

fn params(gamma: f64, h: f64) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(gamma, h)?)
}

fn parse_methods(list: &str, allowed: &[Method]) -> Result<Vec<Method>, Failure> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = Method::parse(name)
            .filter(|m| allowed.contains(m))
            .ok_or_else(|| Failure::Usage(format!("unknown or unsupported method {name:?}")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("no methods requested".into()));
    }
    Ok(out)
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol <= 1e-2 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol must lie in (0, 1e-2], got {tol}")))
    }
}

/// One method at one point.
pub fn evaluate(
    method: Method,
    p: &ModelParams,
    l: Option<usize>,
    tol: f64,
) -> Result<EntropyEstimate, Failure> {
    Ok(match method {
        Method::Finite => {
            let l = l.ok_or_else(|| Failure::Usage("method finite needs --L".into()))?;
            if l == 0 {
                return Err(Failure::Usage("--L must be positive".into()));
            }
            entropy_finite(l, p)?
        }
        Method::Series => entropy_series(p, tol)?,
        Method::Integral => entropy_integral(p, tol)?,
        Method::ClosedForm => entropy_closed(p)?,
        Method::CriticalEstimate => critical_estimate(p)?,
    })
}

pub fn entropy(args: &EntropyArgs) -> Result<String, (Option<String>, Failure)> {
    let run = || -> Result<(ModelParams, Vec<Method>), Failure> {
        check_tol(args.tol)?;
        Ok((params(args.gamma, args.h)?, parse_methods(&args.methods, &SCAN_METHODS_ALL)?))
    };
    let (p, methods) = run().map_err(|f| (None, f))?;
    let scale = if args.bits { 1.0 / LN_2 } else { 1.0 };
    let mut report = RunReport::header(&p, args.bits);
    let mut worst: Option<Failure> = None;
    for m in methods {
        let start = Instant::now();
        let mut row = match evaluate(m, &p, args.l, args.tol) {
            Ok(est) => MethodResult::ok(&est, scale),
            Err(f) => {
                let row = MethodResult::failed(m, f.message().to_string());
                worst = Some(Failure::worse(worst, f));
                row
            }
        };
        if args.timing {
            row.wall_time_s = Some(start.elapsed().as_secs_f64());
        }
        report.results.push(row);
    }
    let json = to_json(&report);
    match worst {
        None => Ok(json),
        Some(f) => Err((Some(json), f)),
    }
}

const SCAN_METHODS_ALL: [Method; 5] = [
    Method::Finite,
    Method::Series,
    Method::Integral,
    Method::ClosedForm,
    Method::CriticalEstimate,
];

/// Thread cap from `XYENT_THREADS`; unset or unparsable means no cap.
fn thread_cap() -> Option<usize> {
    std::env::var("XYENT_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

fn scan_rows(
    gamma: f64,
    h: f64,
    methods: &[Method],
    l: Option<usize>,
    tol: f64,
    scale: f64,
) -> Vec<[String; 9]> {
    let point = ModelParams::new(gamma, h);
    let (regime, k, tau0) = match &point {
        Ok(p) => {
            let data = elliptic_data(p).ok();
            (
                p.regime().as_str().to_string(),
                data.map_or(f64::NAN, |d| d.k),
                data.map_or(f64::NAN, |d| d.tau0),
            )
        }
        Err(_) => ("invalid".to_string(), f64::NAN, f64::NAN),
    };
    methods
        .iter()
        .map(|&m| {
            let result = match &point {
                Ok(p) => evaluate(m, p, l, tol),
                Err(e) => Err(Failure::Usage(e.to_string())),
            };
            let (value, bound, reason) = match result {
                Ok(est) => (est.value * scale, est.error_bound * scale, String::new()),
                Err(f) => (f64::NAN, f64::NAN, f.message().to_string()),
            };
            [
                sig17(gamma),
                sig17(h),
                regime.clone(),
                sig17(k),
                sig17(tau0),
                m.as_str().to_string(),
                sig17(value),
                sig17(bound),
                reason,
            ]
        })
        .collect()
}

pub fn scan(args: &ScanArgs) -> Result<String, Failure> {
    check_tol(args.tol)?;
    let methods = parse_methods(&args.methods, &SCAN_METHODS)?;
    if methods.contains(&Method::Finite) && args.l.map_or(true, |l| l == 0) {
        return Err(Failure::Usage("method finite needs a positive --L".into()));
    }
    let scale = if args.bits { 1.0 / LN_2 } else { 1.0 };
    let points: Vec<(f64, f64)> = args
        .gamma
        .values()
        .into_iter()
        .flat_map(|g| args.h.values().into_iter().map(move |h| (g, h)))
        .collect();
    let work = || -> Vec<Vec<[String; 9]>> {
        points
            .par_iter()
            .map(|&(g, h)| scan_rows(g, h, &methods, args.l, args.tol, scale))
            .collect()
    };
    let rows = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
        None => work(),
    };

    let unwritable = |e: &dyn std::fmt::Display| {
        Failure::Usage(format!("cannot write {}: {e}", args.out.display()))
    };
    let mut w = csv::Writer::from_path(&args.out).map_err(|e| unwritable(&e))?;
    w.write_record(SCAN_HEADER).map_err(|e| unwritable(&e))?;
    for row in rows.iter().flatten() {
        w.write_record(row).map_err(|e| unwritable(&e))?;
    }
    w.flush().map_err(|e| unwritable(&e))?;

    let script = plot_script_path(&args.out);
    fs::write(&script, plot_script(&args.out, args.bits)).map_err(|e| unwritable(&e))?;
    Ok(format!(
        "wrote {} rows to {} and plot script {}\n",
        rows.iter().map(Vec::len).sum::<usize>(),
        args.out.display(),
        script.display()
    ))
}

/// `scan.csv` pairs with `scan.plot.py`.
pub fn plot_script_path(out: &Path) -> std::path::PathBuf {
    out.with_extension("plot.py")
}

fn plot_script(csv_path: &Path, bits: bool) -> String {
    let name = csv_path.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let unit = if bits { "bits" } else { "nats" };
    format!(
        r#"#!/usr/bin/env python3
# Plots the entropy scan stored in {name}.
#
# Columns of {name}:
#   gamma        anisotropy
#   h            transverse field
#   regime       Case1a, Case1b, Case2, Boundary1a1b, CriticalFieldH2 or CriticalXX
#   k            elliptic modulus (NaN on critical lines)
#   tau0         theta-function period K(k')/K(k) (NaN on critical lines)
#   method       finite, series, integral or closed_form
#   value        entropy in {unit} (NaN when the method was rejected)
#   error_bound  bound on |value - exact| in {unit}
#   reason       why the value is NaN, empty otherwise
#
# One curve per (method, gamma) against h.

import csv
import os
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "{name}")
curves = {{}}
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        key = (row["method"], float(row["gamma"]))
        curves.setdefault(key, []).append((float(row["h"]), float(row["value"])))

for (method, gamma), pts in sorted(curves.items()):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=f"{{method}}, gamma={{gamma:g}}")
plt.xlabel("h")
plt.ylabel("S [{unit}]")
plt.legend()
plt.savefig(os.path.splitext(path)[0] + ".png", dpi=150)
"#
    )
}

pub fn spectrum(args: &SpectrumArgs) -> Result<String, Failure> {
    let p = params(args.gamma, args.h)?;
    let data = elliptic_data(&p)?;
    let mut rows = doubling_check(args.l, &p, args.m_max)?;
    if data.is_degenerate() {
        let ladder = lambda_sequence(&data, 1e-10)?.lambdas.len();
        rows.truncate(ladder);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(format!("cannot format spectrum: {e}"));
    w.write_record(["m", "nu_2m", "nu_2m_plus_1", "lambda_m", "pair_gap", "midpoint_error"])
        .map_err(io)?;
    for r in &rows {
        w.write_record([
            r.m.to_string(),
            sig17(r.nu_lo),
            sig17(r.nu_hi),
            sig17(r.lambda_m),
            sig17(r.pair_gap),
            sig17(r.midpoint_error),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {:<12} {}", self.name, self.detail)
    }
}

/// Test points `r e^{iθ}` on a golden-angle spiral, kept off the real axis.
fn spiral(n: usize) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|j| {
            let r = 0.4 + 2.6 * (j as f64 + 0.5) / n as f64;
            let mut z = Complex64::from_polar(r, 0.7 + golden * j as f64);
            if z.im.abs() < 0.1 {
                z.im = 0.1_f64.copysign(z.im);
            }
            z
        })
        .collect()
}

fn check_determinant(p: &ModelParams, level: Level) -> Result<Check, Failure> {
    let (ls, n): (Vec<usize>, usize) = match level {
        Level::Quick => (vec![2, 6, 10], 5),
        Level::Full => ((1..=10).collect(), 10),
    };
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &l in &ls {
        for lambda in spiral(n) {
            match char_determinant(lambda, l, p) {
                Ok(s) => {
                    worst = worst.max(s.relative_gap);
                    count += 1;
                }
                Err(xyent::Error::Proximity { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(Check {
        name: "determinant",
        passed: count > 0 && worst <= 1e-10,
        detail: format!(
            "LU vs eigenvalue product over {count} samples, L <= {}: max relative gap {:.3e} (bound 1e-10; proximity skip {PROXIMITY_TOLERANCE:e})",
            ls.last().unwrap(),
            worst
        ),
    })
}

fn check_residual(p: &ModelParams, level: Level) -> Result<Check, Failure> {
    let ls: Vec<usize> = match level {
        Level::Quick => vec![10, 15, 20, 25],
        Level::Full => vec![10, 15, 20, 25, 30],
    };
    let report = residual_scan(Complex64::new(2.0, 0.0), p, &ls)?;
    let last = *report.residuals.last().unwrap();
    let lambda_c = symbol_roots(p).map(|r| r.lambda_c_modulus()).ok();
    // The residual bound is one-sided: any rate above 1 is consistent with it.
    let passed = report.fitted_rho > 1.0;
    let rho = if report.fitted_rho.is_finite() {
        format!("{:.4}", report.fitted_rho)
    } else {
        format!("saturated (all residuals below {RESIDUAL_FLOOR:e})")
    };
    Ok(Check {
        name: "residual",
        passed,
        detail: format!(
            "lambda = 2, L = {:?}: fitted_rho = {rho}, |lambda_C| = {}, residual(L = {}) = {:.3e}",
            ls,
            lambda_c.map_or("n/a".into(), |c| format!("{c:.4}")),
            ls.last().unwrap(),
            last
        ),
    })
}

fn check_doubling(p: &ModelParams, level: Level) -> Result<Check, Failure> {
    let l = match level {
        Level::Quick => 40,
        Level::Full => 60,
    };
    let data = elliptic_data(p)?;
    let ladder = lambda_sequence(&data, 1e-10)?.lambdas.len();
    let m_max = ladder.min(4).saturating_sub(1);
    if ladder == 0 {
        return Ok(Check {
            name: "doubling",
            passed: true,
            detail: "empty limiting ladder; nothing to pair".into(),
        });
    }
    let full = doubling_check(l, p, m_max)?;
    let half = doubling_check(l / 2, p, m_max)?;
    // Sum over pairs of gap and midpoint error; higher pairs may still be
    // pre-asymptotic near a critical line, so only the total must shrink.
    let defect = |rows: &[xyent::DoublingRow]| {
        rows.iter().map(|r| r.pair_gap + r.midpoint_error).sum::<f64>()
    };
    let (d_full, d_half) = (defect(&full), defect(&half));
    let passed = d_full <= 1e-10 || d_full < d_half;
    let max_gap = full.iter().map(|r| r.pair_gap).fold(0.0, f64::max);
    let max_mid = full.iter().map(|r| r.midpoint_error).fold(0.0, f64::max);
    Ok(Check {
        name: "doubling",
        passed,
        detail: format!(
            "L = {l}, m <= {m_max}: max pair gap {max_gap:.3e}, max midpoint error {max_mid:.3e}, total defect {d_full:.3e} (L = {}: {d_half:.3e})",
            l / 2
        ),
    })
}

fn check_phi(p: &ModelParams) -> Result<Check, Failure> {
    if p.regime() == RegimeLabel::Boundary1a1b {
        return Ok(Check {
            name: "phi",
            passed: true,
            detail: "skipped on the boundary line (roots coalesce)".into(),
        });
    }
    let r = phi_vs_g(p, 1024)?;
    Ok(Check {
        name: "phi",
        passed: r.max_deviation <= 1e-10,
        detail: format!(
            "1024 samples: max |phi - ({:+})g| = {:.3e}, max ||phi| - 1| = {:.3e}",
            r.sign, r.max_deviation, r.max_modulus_error
        ),
    })
}

/// All checks in order; a numerical error in any of them aborts the run.
pub fn verify(args: &VerifyArgs) -> Result<Vec<Check>, Failure> {
    let p = params(args.gamma, args.h)?;
    elliptic_data(&p)?;
    Ok(vec![
        check_determinant(&p, args.level)?,
        check_residual(&p, args.level)?,
        check_doubling(&p, args.level)?,
        check_phi(&p)?,
    ])
}

pub fn critical_fit_report(args: &CriticalFitArgs) -> Result<FitReport, Failure> {
    if args.points < 4 {
        return Err(Failure::Usage(format!("--points must be at least 4, got {}", args.points)));
    }
    let (lo, hi) = (args.window.lo, args.window.hi);
    let n = args.points;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let (variable, expected_slope, expected_intercept, samples) = match (args.gamma, args.h) {
        (Some(gamma), None) => {
            if lo <= 2.0 && 2.0 <= hi {
                return Err(Failure::Usage(format!(
                    "window [{lo}, {hi}] touches the critical field line h = 2"
                )));
            }
            if !(gamma > 0.0) || lo < 0.0 {
                return Err(Failure::Usage(
                    "critical-fit over h needs gamma > 0 and h >= 0".into(),
                ));
            }
            let samples = grid
                .iter()
                .map(|&h| Ok(((2.0 - h).abs(), entropy_closed(&params(gamma, h)?)?.value)))
                .collect::<Result<Vec<_>, Failure>>()?;
            ("h", -1.0 / 6.0, (4.0 * gamma).ln() / 3.0, samples)
        }
        (None, Some(h)) => {
            if lo <= 0.0 {
                return Err(Failure::Usage(format!(
                    "window [{lo}, {hi}] touches the XX critical line gamma = 0"
                )));
            }
            if !(0.0..2.0).contains(&h) {
                return Err(Failure::Usage(format!(
                    "critical-fit over gamma needs 0 <= h < 2, got h = {h}"
                )));
            }
            let samples = grid
                .iter()
                .map(|&g| Ok((g, entropy_closed(&params(g, h)?)?.value)))
                .collect::<Result<Vec<_>, Failure>>()?;
            ("gamma", -1.0 / 3.0, (4.0 - h * h).ln() / 6.0 + LN_2 / 3.0, samples)
        }
        _ => return Err(Failure::Usage("critical-fit needs exactly one of --gamma, --h".into())),
    };
    let fit = critical_fit(&samples)?;
    let rel = |v: f64, e: f64| (v - e) / e.abs();
    Ok(FitReport {
        gamma: args.gamma,
        h: args.h,
        variable: variable.into(),
        window: [lo, hi],
        points: n,
        slope: fit.slope,
        intercept: fit.intercept,
        expected_slope,
        expected_intercept,
        slope_deviation: rel(fit.slope, expected_slope),
        intercept_deviation: rel(fit.intercept, expected_intercept),
        plain_slope: fit.plain_slope,
        plain_intercept: fit.plain_intercept,
        plain_slope_deviation: rel(fit.plain_slope, expected_slope),
        plain_intercept_deviation: rel(fit.plain_intercept, expected_intercept),
    })
}

pub fn write_stdout(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes());
    let _ = out.flush();
}
