//! Recall/success metrics, evaluation runs, and ablation sweeps.

mod ablation;
mod metrics;
mod report;
mod run;

pub use ablation::{ablation_sweep, build_all_fields, encode_queries, evaluate_composed, SweepInputs};
pub use metrics::{recall_at_k, success_at_k};
pub use report::{reports_to_tsv, MetricKind, MetricReport};
pub use run::{evaluate, MaxSimRetriever, Retriever, VectorRetriever};
