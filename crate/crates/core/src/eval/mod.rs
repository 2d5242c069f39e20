//! Evaluation: ranking metrics, the Random and Oracle baselines, and the
//! trade-off and sensitivity sweeps.

mod baselines;
mod metrics;
mod records;
mod sweep;

pub use baselines::{oracle_baseline, random_baseline};
pub use metrics::{ndcg_at_k, precision_same_label, recall_at_k};
pub use records::{
    read_records_csv, read_sensitivity_csv, write_records_csv, write_sensitivity_csv, RunManifest,
    SensitivityRecord, TradeoffRecord, RECORD_HEADER,
};
pub use sweep::{
    run_sweep, sample_sources, sensitivity_sweep, EvalTask, Hyperparameter, Method, SweepConfig,
    SweepContext, SweepOutput,
};
