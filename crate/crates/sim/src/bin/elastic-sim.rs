//! Experiment driver: replay a trace (or synthesize one) through the
//! elastic trie, score it against the exact oracle and write plot-ready
//! data.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use elastic_trie_sim::{
    csvio, generate, run::run_with_events_file, sweep, write_report, write_sweep_csv,
    DetectionMode, RunConfig, SweepAxis, SyntheticSpec, ThresholdScaling, ThresholdSpec,
    TimeoutFnSpec, TraceSource,
};

#[derive(Parser)]
#[command(
    name = "elastic-sim",
    about = "Elastic trie detection experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One end-to-end run: trace -> trie -> events -> scores.
    Run(RunArgs),
    /// One run per axis value, aggregated into a single CSV.
    Sweep(SweepArgs),
    /// Materialize a synthetic spec into a CSV trace.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Declarative run config (TOML); flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detection mode: hhh | spread | ddos-victim.
    #[arg(long)]
    mode: Option<DetectionMode>,
    /// Trie memory budget in bytes.
    #[arg(long)]
    memory_bytes: Option<u64>,
    /// Spread filter size in bytes.
    #[arg(long)]
    filter_bytes: Option<u64>,
    /// Detection threshold: absolute volume or percentage like "5%".
    #[arg(long)]
    threshold: Option<ThresholdSpec>,
    /// Base active timeout in seconds.
    #[arg(long)]
    active_timeout: Option<f64>,
    /// Inactive timeout in seconds.
    #[arg(long)]
    inactive_timeout: Option<f64>,
    /// Timeout behavior: `fixed` or `f:<y>`.
    #[arg(long)]
    timeout_fn: Option<TimeoutFnSpec>,
    /// Threshold scaling across levels: fixed | proportional.
    #[arg(long)]
    threshold_scaling: Option<ThresholdScaling>,
    /// Relaxed prefix comparison bits (0 or 2).
    #[arg(long)]
    relax: Option<u8>,
    /// Maximum stored prefix length.
    #[arg(long)]
    depth: Option<u8>,
    /// Replay a capture or CSV trace file (by extension).
    #[arg(long, conflicts_with = "synthetic")]
    trace: Option<PathBuf>,
    /// Generate packets from a synthetic spec file.
    #[arg(long)]
    synthetic: Option<PathBuf>,
    /// RNG seed for synthetic generation.
    #[arg(long)]
    seed: Option<u64>,
    /// Change alarm threshold (0 disables change alarms).
    #[arg(long)]
    alarm_threshold: Option<u64>,
    /// Moving-average window in seconds (default: level-0 active timeout).
    #[arg(long)]
    change_window: Option<f64>,
    /// Moving-average tick in seconds (default: an eighth of the window).
    #[arg(long)]
    change_tick: Option<f64>,
    /// Nominal packet rate for percent thresholds on file traces.
    #[arg(long)]
    nominal_rate_pps: Option<u64>,
    /// Tolerate timestamp reordering up to this many records.
    #[arg(long)]
    allow_reorder: Option<usize>,
    /// Also report subprefixes as heavy hitters when they trigger an
    /// expansion.
    #[arg(long)]
    report_hh_on_expand: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Event log destination (defaults to `<report-dir>/events.jsonl`).
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Report directory for summary.json, scores.csv, series.csv.
    #[arg(long, default_value = "report")]
    report_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Axis to sweep: memory | threshold | timeout_fn | filter_size.
    #[arg(long)]
    axis: SweepAxis,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    /// Output CSV path.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Synthetic spec file (TOML).
    #[arg(long)]
    synthetic: PathBuf,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV trace path.
    #[arg(long)]
    out: PathBuf,
}

fn build_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(path) = &common.synthetic {
        cfg.trace = TraceSource::SyntheticFile { path: path.clone() };
    }
    if let Some(path) = &common.trace {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        cfg.trace = match ext {
            "csv" => TraceSource::Csv { path: path.clone() },
            "pcap" | "cap" => TraceSource::Pcap { path: path.clone() },
            other => {
                bail!("cannot infer trace format from extension {other:?} (use .csv or .pcap)")
            }
        };
    }
    if let Some(v) = common.mode {
        cfg.mode = v;
    }
    if let Some(v) = common.memory_bytes {
        cfg.memory_bytes = v;
    }
    if let Some(v) = common.filter_bytes {
        cfg.filter_bytes = v;
    }
    if let Some(v) = common.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = common.active_timeout {
        cfg.active_timeout_s = v;
    }
    if let Some(v) = common.inactive_timeout {
        cfg.inactive_timeout_s = v;
    }
    if let Some(v) = common.timeout_fn {
        cfg.timeout_fn = v;
    }
    if let Some(v) = common.threshold_scaling {
        cfg.threshold_scaling = v;
    }
    if let Some(v) = common.relax {
        cfg.relax = v;
    }
    if let Some(v) = common.depth {
        cfg.depth = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.alarm_threshold {
        cfg.alarm_threshold = v;
    }
    if let Some(v) = common.change_window {
        cfg.change_window_s = Some(v);
    }
    if let Some(v) = common.change_tick {
        cfg.change_tick_s = Some(v);
    }
    if let Some(v) = common.nominal_rate_pps {
        cfg.nominal_rate_pps = Some(v);
    }
    if let Some(v) = common.allow_reorder {
        cfg.allow_reorder = Some(v);
    }
    if common.report_hh_on_expand {
        cfg.report_hh_on_expand = true;
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = build_config(&args.common)?;
            fs::create_dir_all(&args.report_dir)?;
            let events_path = args
                .events_out
                .unwrap_or_else(|| args.report_dir.join("events.jsonl"));
            let report = run_with_events_file(&cfg, Some(&events_path))?;
            write_report(&report, &args.report_dir)?;
            println!(
                "{} packets, {} windows scored | relax{} r={:.3} p={:.3} (relax0 r={:.3} p={:.3}) | {} events ({} dropped), {} alarms",
                report.stats.packets,
                report.averages.windows,
                report.config.relax,
                report.averages.recall,
                report.averages.precision,
                report.averages.recall0,
                report.averages.precision0,
                report.stats.events_accepted,
                report.stats.events_dropped,
                report.stats.alarms,
            );
            println!("report written to {}", args.report_dir.display());
        }
        Command::Sweep(args) => {
            let cfg = build_config(&args.common)?;
            let report = sweep(&cfg, args.axis, &args.values)?;
            write_sweep_csv(&report, &args.out)?;
            for row in &report.rows {
                println!(
                    "{}={} | relax0 r={:.3} p={:.3} | relax2 r={:.3} p={:.3} | first_report={:?}",
                    report.axis.label(),
                    row.value,
                    row.recall0,
                    row.precision0,
                    row.recall2,
                    row.precision2,
                    row.first_report_window,
                );
            }
            println!("sweep written to {}", args.out.display());
        }
        Command::Gen(args) => {
            let text = fs::read_to_string(&args.synthetic)
                .with_context(|| format!("reading spec {}", args.synthetic.display()))?;
            let spec: SyntheticSpec = toml::from_str(&text)
                .with_context(|| format!("parsing spec {}", args.synthetic.display()))?;
            let records = generate(&spec, args.seed)?;
            csvio::write_csv(&args.out, &records)?;
            println!(
                "{} packets written to {}",
                records.len(),
                args.out.display()
            );
        }
    }
    Ok(())
}
