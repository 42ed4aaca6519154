//! Entropy of `X_A`: Mahler measure quadrature, Peters counting on
//! companion modules, and packing lower bounds from homoclinic points.

mod mahler;
mod packing;
mod peters;

use std::collections::BTreeMap;

use serde::Serialize;

pub use mahler::{additivity_check, duality_check, mahler_measure, AdditivityReport, DualityReport};
pub use packing::packing_lower_bound;
pub use peters::{peters_counts_direct, peters_counts_recurrence, peters_entropy, CompanionModule, CountRun, CountingRoute};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntropyMethod {
    MahlerQuadrature,
    PetersCounting,
    PackingLowerBound,
}

/// One row of a counting series: `n`, `|S_n|`, `log |S_n|` and the
/// successive difference `log |S_n| - log |S_{n-1}|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub n: usize,
    pub size: u64,
    pub log_size: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    /// Entropy in nats.
    pub value: f64,
    pub method: EntropyMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesPoint>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    /// Set when a cap stopped the computation early.
    pub partial: bool,
}

impl EntropyEstimate {
    fn new(method: EntropyMethod, value: f64) -> Self {
        Self { value, method, error_estimate: None, series: Vec::new(), parameters: BTreeMap::new(), flags: Vec::new(), partial: false }
    }

    fn param(&mut self, key: &str, v: impl Into<serde_json::Value>) {
        self.parameters.insert(key.to_string(), v.into());
    }
}
