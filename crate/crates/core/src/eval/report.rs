use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::experiment::RunReport;
use super::metrics::METRIC_NAMES;
use crate::error::Result;

/// Fixed-width table with one row per run and `mean ± half-width` cells.
pub fn format_table(title: &str, runs: &[RunReport]) -> String {
    let label_w = runs
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(0)
        .max(title.len())
        .max(5);
    let mut out = String::new();
    let _ = write!(out, "{title:<label_w$}");
    for m in METRIC_NAMES {
        let _ = write!(out, "  {m:>17}");
    }
    out.push('\n');
    for r in runs {
        let _ = write!(out, "{:<label_w$}", r.label);
        for k in 0..METRIC_NAMES.len() {
            let cell = format!("{:.4} ± {:.4}", r.summary.mean[k], r.summary.half_width[k]);
            let _ = write!(out, "  {cell:>17}");
        }
        out.push('\n');
    }
    out
}

/// One structured record: a metric of a run, either for a single split
/// or aggregated (`split` absent, `half_width` present).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord<'a> {
    pub run: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<usize>,
    pub metric: &'static str,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub undefined: bool,
}

pub fn records(run: &RunReport) -> Vec<MetricRecord<'_>> {
    let mut out = Vec::new();
    for s in &run.splits {
        let flags = s.metrics.undefined;
        let undefined = [false, flags.precision, flags.recall, flags.f1, flags.auc];
        for (k, (name, value)) in METRIC_NAMES.iter().zip(s.metrics.values()).enumerate() {
            out.push(MetricRecord {
                run: &run.label,
                split: Some(s.split),
                metric: name,
                value,
                half_width: None,
                undefined: undefined[k],
            });
        }
    }
    for (k, name) in METRIC_NAMES.iter().enumerate() {
        out.push(MetricRecord {
            run: &run.label,
            split: None,
            metric: name,
            value: run.summary.mean[k],
            half_width: Some(run.summary.half_width[k]),
            undefined: false,
        });
    }
    out
}

pub fn write_records(w: &mut impl Write, runs: &[RunReport]) -> Result<()> {
    for run in runs {
        for rec in records(run) {
            serde_json::to_writer(&mut *w, &rec).map_err(std::io::Error::other)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Writes `<stem>.txt` (table) and `<stem>.jsonl` (records) into `dir`.
pub fn write_report(dir: &Path, stem: &str, title: &str, runs: &[RunReport]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.txt")), format_table(title, runs))?;
    let mut buf = Vec::new();
    write_records(&mut buf, runs)?;
    std::fs::write(dir.join(format!("{stem}.jsonl")), buf)?;
    Ok(())
}
