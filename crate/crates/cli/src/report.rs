use serde::{Deserialize, Serialize};
use xyent::{elliptic_data, EntropyEstimate, Method, ModelParams};

/// One requested method: a value with its bound, or the reason it has none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    pub value: Option<f64>,
    pub error_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl MethodResult {
    pub fn ok(estimate: &EntropyEstimate, scale: f64) -> Self {
        Self {
            method: estimate.method.as_str().into(),
            value: finite(estimate.value * scale),
            error_bound: finite(estimate.error_bound * scale),
            error: None,
            wall_time_s: None,
        }
    }

    pub fn failed(method: Method, reason: String) -> Self {
        Self {
            method: method.as_str().into(),
            value: None,
            error_bound: None,
            error: Some(reason),
            wall_time_s: None,
        }
    }
}

/// Output of `xyent entropy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub gamma: f64,
    pub h: f64,
    pub regime: String,
    pub k: Option<f64>,
    pub k_prime: Option<f64>,
    pub tau0: Option<f64>,
    pub sigma: Option<u8>,
    pub units: String,
    pub results: Vec<MethodResult>,
}

impl RunReport {
    /// Parameter echo and elliptic data; `None` fields on critical lines.
    pub fn header(params: &ModelParams, bits: bool) -> Self {
        let data = elliptic_data(params).ok();
        Self {
            gamma: params.gamma(),
            h: params.h(),
            regime: params.regime().as_str().into(),
            k: data.and_then(|d| finite(d.k)),
            k_prime: data.and_then(|d| finite(d.k_prime)),
            tau0: data.and_then(|d| finite(d.tau0)),
            sigma: data.map(|d| d.sigma),
            units: if bits { "bits" } else { "nats" }.into(),
            results: Vec::new(),
        }
    }
}

/// Output of `xyent critical-fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub gamma: Option<f64>,
    pub h: Option<f64>,
    /// The coupling varied across the window, `"h"` or `"gamma"`.
    pub variable: String,
    pub window: [f64; 2],
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub expected_slope: f64,
    pub expected_intercept: f64,
    /// Relative deviations from the expected coefficients.
    pub slope_deviation: f64,
    pub intercept_deviation: f64,
    pub plain_slope: f64,
    pub plain_intercept: f64,
    pub plain_slope_deviation: f64,
    pub plain_intercept_deviation: f64,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}
