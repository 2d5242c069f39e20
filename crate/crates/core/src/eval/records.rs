use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the trade-off CSV.
pub const RECORD_HEADER: [&str; 8] = [
    "method",
    "tau",
    "metric_name",
    "metric_value",
    "least_ratio",
    "entropy",
    "queries",
    "infeasible_count",
];

/// One (method, tau, metric) cell of a trade-off sweep. Fairness columns are
/// means of the per-list metrics over evaluated lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRecord {
    pub method: String,
    pub tau: usize,
    pub metric_name: String,
    pub metric_value: f64,
    pub least_ratio: f64,
    pub entropy: f64,
    /// Provider queries issued (mean over seeds for stochastic methods).
    pub queries: f64,
    pub infeasible_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRecord {
    pub hyperparameter: String,
    pub value: f64,
    pub method: String,
    pub metric_name: String,
    pub metric_value: f64,
    /// `metric_value` divided by the best value on the grid.
    pub normalized: f64,
    pub least_ratio: f64,
}

pub fn write_records_csv(path: &Path, records: &[TradeoffRecord]) -> Result<()> {
    write_csv(path, &RECORD_HEADER, records)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<TradeoffRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != RECORD_HEADER {
        return Err(Error::parse(path, 1, format!("unexpected header {header:?}")));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_sensitivity_csv(path: &Path, records: &[SensitivityRecord]) -> Result<()> {
    write_csv(path, &SENSITIVITY_HEADER, records)
}

pub fn read_sensitivity_csv(path: &Path) -> Result<Vec<SensitivityRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

const SENSITIVITY_HEADER: [&str; 7] = [
    "hyperparameter",
    "value",
    "method",
    "metric_name",
    "metric_value",
    "normalized",
    "least_ratio",
];

// The header is written by hand so an empty sweep still yields a valid file.
fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    crate::datasets::write_atomic(path, &bytes)
}

/// Everything needed to rerun a sweep bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub dataset: String,
    pub dataset_digest: String,
    pub provider: String,
    pub attribute: String,
    pub k: usize,
    pub taus: Vec<usize>,
    pub methods: Vec<String>,
    pub damping: f64,
    pub ppr_steps: usize,
    pub walk_max_len: usize,
    pub walk_seeds: Vec<u64>,
    pub random_seed: u64,
    pub split_seed: u64,
    pub bpr: Option<crate::providers::BprConfig>,
    pub exclude_history: bool,
    pub n_sources: usize,
    pub fairness_aggregation: String,
    /// Standard deviation over walk seeds of each PrivateWalk metric, keyed
    /// by `tau/metric_name`.
    pub walk_metric_std: BTreeMap<String, f64>,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        crate::datasets::write_atomic(path, &serde_json::to_vec_pretty(self)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}
