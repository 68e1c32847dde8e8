//! Report emission: one JSON document or per-trial CSV table, plus a
//! long-format CSV ready for plotting tools.  All outputs have fixed
//! field order, so identical reports serialize byte-identically.

use std::path::Path;

use serde::Serialize;

use super::TrialReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown report format '{other}' (expected json or csv)"
            ))),
        }
    }
}

/// The whole report as one JSON object with "config", "trials", and
/// "aggregates" keys.
pub fn report_json(report: &TrialReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// The per-trial rows as a headed CSV table.
pub fn report_csv(report: &TrialReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.trials {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct PlotRow<'a> {
    algorithm: &'a str,
    epsilon: f64,
    metric: &'static str,
    value: f64,
}

/// Aggregates unpivoted to (algorithm, epsilon, metric, value) rows.
pub fn plot_csv(report: &TrialReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for agg in &report.aggregates {
        for (metric, value) in [
            ("mean_normalized_cost", agg.mean_normalized_cost),
            ("convergence_degree", agg.convergence_degree),
            ("iteration_ratio", agg.iteration_ratio),
        ] {
            w.serialize(PlotRow {
                algorithm: &agg.algorithm,
                epsilon: agg.epsilon,
                metric,
                value,
            })?;
        }
    }
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn emit_report(report: &TrialReport, format: ReportFormat, path: &Path) -> Result<()> {
    let payload = match format {
        ReportFormat::Json => report_json(report)?,
        ReportFormat::Csv => report_csv(report)?,
    };
    std::fs::write(path, payload)?;
    Ok(())
}

pub fn emit_plot_csv(report: &TrialReport, path: &Path) -> Result<()> {
    std::fs::write(path, plot_csv(report)?)?;
    Ok(())
}
