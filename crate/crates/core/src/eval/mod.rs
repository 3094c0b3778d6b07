//! Metrics, annotator agreement, split management and the ablation and
//! sweep harness.

mod experiment;
mod kappa;
mod metrics;
mod report;

pub use experiment::{
    ae_arch_groups, evaluate_model, labelled_edges, make_splits, Harness, RunReport, Split,
    SplitResult, SplitSpec, SweepAxis, SweepValue,
};
pub use kappa::{agreement_table, kappa, kappa_from_agreement, pairwise_kappas};
pub use metrics::{auc, metrics, Confusion, Metrics, MetricsSummary, UndefinedFlags, METRIC_NAMES};
pub use report::{format_table, records, write_records, write_report, MetricRecord};
