//! Parameter sweeps: one run per axis value, shared seed, one CSV row per
//! point. Points run in parallel; each run is single-streamed internally.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::run::{run, RunConfig, RunReport, SimError, ThresholdSpec, TimeoutFnSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Trie memory budget in bytes.
    Memory,
    /// Detection threshold (absolute or percent).
    Threshold,
    /// Active timeout behavior (`fixed` or `f:<y>`).
    TimeoutFn,
    /// Spread filter size in bytes.
    FilterSize,
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "memory" => Ok(SweepAxis::Memory),
            "threshold" => Ok(SweepAxis::Threshold),
            "timeout_fn" | "timeout-fn" => Ok(SweepAxis::TimeoutFn),
            "filter_size" | "filter-size" => Ok(SweepAxis::FilterSize),
            other => Err(format!(
                "unknown axis {other:?} (memory|threshold|timeout_fn|filter_size)"
            )),
        }
    }
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Memory => "memory_bytes",
            SweepAxis::Threshold => "threshold",
            SweepAxis::TimeoutFn => "timeout_fn",
            SweepAxis::FilterSize => "filter_bytes",
        }
    }

    fn apply(&self, base: &RunConfig, value: &str) -> Result<RunConfig, SimError> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::Memory => {
                cfg.memory_bytes = value
                    .parse()
                    .map_err(|_| SimError::Config(format!("bad memory value {value:?}")))?;
            }
            SweepAxis::Threshold => {
                cfg.threshold = ThresholdSpec::from_str(value).map_err(SimError::Config)?;
            }
            SweepAxis::TimeoutFn => {
                cfg.timeout_fn = TimeoutFnSpec::from_str(value).map_err(SimError::Config)?;
            }
            SweepAxis::FilterSize => {
                cfg.filter_bytes = value
                    .parse()
                    .map_err(|_| SimError::Config(format!("bad filter size {value:?}")))?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub windows: usize,
    pub recall0: f64,
    pub precision0: f64,
    pub recall2: f64,
    pub precision2: f64,
    /// Window index of the first report of the deepest planted prefix;
    /// the learning-phase duration on synthetic traces.
    pub first_report_window: Option<u64>,
    pub peak_nodes: usize,
    pub events: u64,
}

#[derive(Debug)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub reports: Vec<RunReport>,
}

pub fn sweep(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[String],
) -> Result<SweepReport, SimError> {
    if values.is_empty() {
        return Err(SimError::Config(
            "sweep needs at least one axis value".into(),
        ));
    }
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|v| axis.apply(base, v))
        .collect::<Result<_, _>>()?;
    let reports: Vec<RunReport> = configs.par_iter().map(run).collect::<Result<Vec<_>, _>>()?;
    let rows = values
        .iter()
        .zip(&reports)
        .map(|(value, report)| SweepRow {
            value: value.clone(),
            windows: report.averages.windows,
            recall0: report.averages.recall0,
            precision0: report.averages.precision0,
            recall2: report.averages.recall2,
            precision2: report.averages.precision2,
            first_report_window: report.first_report.as_ref().map(|f| f.window),
            peak_nodes: report.stats.peak_nodes,
            events: report.stats.events_accepted,
        })
        .collect();
    Ok(SweepReport {
        axis,
        rows,
        reports,
    })
}

pub fn write_sweep_csv(report: &SweepReport, path: &Path) -> Result<(), SimError> {
    let mut out = format!(
        "{},windows,recall0,precision0,recall2,precision2,first_report_window,peak_nodes,events\n",
        report.axis.label()
    );
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.value,
            row.windows,
            row.recall0,
            row.precision0,
            row.recall2,
            row.precision2,
            row.first_report_window
                .map_or(String::new(), |w| w.to_string()),
            row.peak_nodes,
            row.events
        ));
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, out)?;
    Ok(())
}
