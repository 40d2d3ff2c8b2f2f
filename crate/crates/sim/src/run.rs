//! End-to-end experiment runs: trace in, trie, sink, truth windows,
//! scores and time series out. Everything is determined by the config and
//! seed.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use elastic_trie::{
    BloomFilter, BuildError, ChangeConfig, CountMode, Digest, ElasticTrie, EventKind, EventSink,
    MemoryBudget, Prefix, TrieError,
};

use crate::csvio;
use crate::oracle::{exact_hhh, exact_spreaders, WindowTruth};
use crate::pcap;
use crate::record::{sort_bounded, PacketRecord, TraceError};
use crate::score::score;
use crate::synth::{generate, SynthError, SyntheticSpec};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("packet {index}: {source}")]
    Clock { index: u64, source: TrieError },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMode {
    /// Counters carry packets or bytes; keep reports are hierarchical
    /// heavy hitters.
    Hhh,
    /// Counters carry distinct (source prefix, destination) flows.
    Spread,
    /// Spread detection keyed by destination: flood-victim detection.
    DdosVictim,
}

impl DetectionMode {
    pub fn primary_kind(&self) -> &'static str {
        match self {
            DetectionMode::Hhh => "hhh",
            _ => "superspreader",
        }
    }

    fn matches_event(&self, kind: &EventKind) -> bool {
        matches!(
            (self, kind),
            (DetectionMode::Hhh, EventKind::HierarchicalHeavyHitter)
                | (DetectionMode::Spread, EventKind::Superspreader)
                | (DetectionMode::DdosVictim, EventKind::Superspreader)
        )
    }
}

impl FromStr for DetectionMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hhh" => Ok(DetectionMode::Hhh),
            "spread" => Ok(DetectionMode::Spread),
            "ddos-victim" => Ok(DetectionMode::DdosVictim),
            other => Err(format!("unknown mode {other:?} (hhh|spread|ddos-victim)")),
        }
    }
}

/// Threshold given either as an absolute per-window volume or as a
/// percentage of the nominal per-window traffic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    Absolute(u64),
    Percent(f64),
}

impl ThresholdSpec {
    /// `rate * window * pct`: percentages resolve against the nominal
    /// packet rate over one base window.
    pub fn resolve(&self, nominal_rate_pps: Option<u64>, window_us: u64) -> Result<u64, SimError> {
        match *self {
            ThresholdSpec::Absolute(v) => Ok(v),
            ThresholdSpec::Percent(pct) => {
                let rate = nominal_rate_pps.ok_or_else(|| {
                    SimError::Config("percent threshold needs a nominal rate (synthetic trace or nominal_rate_pps)".into())
                })?;
                let per_window = rate as f64 * (window_us as f64 / 1e6);
                Ok((per_window * pct / 100.0).round().max(1.0) as u64)
            }
        }
    }
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdSpec::Absolute(v) => write!(f, "{v}"),
            ThresholdSpec::Percent(p) => write!(f, "{p}%"),
        }
    }
}

impl FromStr for ThresholdSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(pct) = s.strip_suffix('%') {
            let v: f64 = pct
                .trim()
                .parse()
                .map_err(|_| format!("bad percentage {s:?}"))?;
            if !(0.0..=100.0).contains(&v) {
                return Err(format!("percentage {v} out of range"));
            }
            Ok(ThresholdSpec::Percent(v))
        } else {
            s.trim()
                .parse::<u64>()
                .map(ThresholdSpec::Absolute)
                .map_err(|_| format!("bad threshold {s:?}"))
        }
    }
}

impl Serialize for ThresholdSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ThresholdSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(ThresholdSpec::Absolute(n)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeoutFnSpec {
    Fixed,
    Variable(u32),
}

impl fmt::Display for TimeoutFnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeoutFnSpec::Fixed => write!(f, "fixed"),
            TimeoutFnSpec::Variable(y) => write!(f, "f:{y}"),
        }
    }
}

impl FromStr for TimeoutFnSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "fixed" {
            return Ok(TimeoutFnSpec::Fixed);
        }
        if let Some(y) = s.strip_prefix("f:").or_else(|| s.strip_prefix("f_")) {
            let y: u32 = y.parse().map_err(|_| format!("bad timeout fn {s:?}"))?;
            if !(1..=32).contains(&y) {
                return Err(format!("timeout fn coefficient {y} out of 1..=32"));
            }
            return Ok(TimeoutFnSpec::Variable(y));
        }
        Err(format!("unknown timeout fn {s:?} (fixed|f:<y>)"))
    }
}

impl Serialize for TimeoutFnSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeoutFnSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdScaling {
    /// One global threshold at every level.
    Fixed,
    /// Per-level thresholds scaled with the per-level active timeout so
    /// the rate they express stays constant.
    Proportional,
}

impl FromStr for ThresholdScaling {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(ThresholdScaling::Fixed),
            "proportional" => Ok(ThresholdScaling::Proportional),
            other => Err(format!("unknown scaling {other:?} (fixed|proportional)")),
        }
    }
}

/// Where packets come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceSource {
    Synthetic {
        #[serde(flatten)]
        spec: Box<SyntheticSpec>,
    },
    SyntheticFile {
        path: PathBuf,
    },
    Csv {
        path: PathBuf,
    },
    Pcap {
        path: PathBuf,
    },
}

impl Default for TraceSource {
    fn default() -> Self {
        TraceSource::Synthetic {
            spec: Box::default(),
        }
    }
}

fn default_memory_bytes() -> u64 {
    64 * 1024
}
fn default_filter_bytes() -> u64 {
    8 * 1024
}
fn default_filter_hashes() -> u32 {
    4
}
fn default_threshold() -> ThresholdSpec {
    ThresholdSpec::Percent(5.0)
}
fn default_active_timeout() -> f64 {
    2.0
}
fn default_inactive_timeout() -> f64 {
    20.0
}
fn default_timeout_fn() -> TimeoutFnSpec {
    TimeoutFnSpec::Fixed
}
fn default_scaling() -> ThresholdScaling {
    ThresholdScaling::Fixed
}
fn default_relax() -> u8 {
    2
}
fn default_depth() -> u8 {
    32
}
fn default_count_mode() -> CountMode {
    CountMode::Packets
}
fn default_sink_capacity() -> usize {
    1 << 20
}

/// Full experiment description. Output locations are deliberately not part
/// of it: identical configs produce identical reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: DetectionMode,
    pub memory_bytes: u64,
    pub filter_bytes: u64,
    pub filter_hashes: u32,
    pub threshold: ThresholdSpec,
    pub active_timeout_s: f64,
    pub inactive_timeout_s: f64,
    pub timeout_fn: TimeoutFnSpec,
    pub threshold_scaling: ThresholdScaling,
    pub relax: u8,
    pub depth: u8,
    pub count_mode: CountMode,
    pub seed: u64,
    pub nominal_rate_pps: Option<u64>,
    pub report_hh_on_expand: bool,
    /// Change alarm threshold; 0 disables alarms.
    pub alarm_threshold: u64,
    /// Moving-average window in seconds; defaults to the level-0 active
    /// timeout.
    pub change_window_s: Option<f64>,
    /// Series / moving-average tick in seconds; defaults to an eighth of
    /// the moving-average window.
    pub change_tick_s: Option<f64>,
    pub sink_capacity: usize,
    /// Tolerate timestamp reordering up to this many records.
    pub allow_reorder: Option<usize>,
    pub trace: TraceSource,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: DetectionMode::Hhh,
            memory_bytes: default_memory_bytes(),
            filter_bytes: default_filter_bytes(),
            filter_hashes: default_filter_hashes(),
            threshold: default_threshold(),
            active_timeout_s: default_active_timeout(),
            inactive_timeout_s: default_inactive_timeout(),
            timeout_fn: default_timeout_fn(),
            threshold_scaling: default_scaling(),
            relax: default_relax(),
            depth: default_depth(),
            count_mode: default_count_mode(),
            seed: 0,
            nominal_rate_pps: None,
            report_hh_on_expand: false,
            alarm_threshold: 0,
            change_window_s: None,
            change_tick_s: None,
            sink_capacity: default_sink_capacity(),
            allow_reorder: None,
            trace: TraceSource::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedInfo {
    pub threshold_absolute: u64,
    pub threshold_conversion: String,
    pub window_us: u64,
    pub inactive_timeout_us: u64,
    pub budget_total_bits: u64,
    pub nominal_rate_pps: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesPoint {
    pub ts: u64,
    pub nodes: usize,
    pub max_level: u8,
    pub bits_in_use: u64,
    pub change_counter: i64,
    pub change_avg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowScore {
    pub window: u64,
    pub truth_len: usize,
    pub reported_len: usize,
    pub recall0: f64,
    pub precision0: f64,
    pub recall2: f64,
    pub precision2: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Averages {
    pub windows: usize,
    pub recall0: f64,
    pub precision0: f64,
    pub recall2: f64,
    pub precision2: f64,
    /// The pair selected by the configured relax setting.
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FirstReport {
    pub prefix: Prefix,
    pub window: u64,
    pub ts: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StatsEcho {
    pub packets: u64,
    pub updates: u64,
    pub keeps: u64,
    pub expansions: u64,
    pub collapses: u64,
    pub invalidations: u64,
    pub root_resets: u64,
    pub expand_table_full: u64,
    pub collapse_table_full: u64,
    pub discarded_weight: u64,
    pub peak_nodes: usize,
    pub peak_bits: u64,
    pub events_accepted: u64,
    pub events_dropped: u64,
    pub alarms: u64,
    /// Spread modes only: flows inserted into the filter during its final
    /// epoch and the matching false-positive estimate `(1-e^(-kn/m))^k`.
    pub filter_inserted: Option<u64>,
    pub filter_fp_rate: Option<f64>,
}

#[derive(Debug)]
pub struct RunReport {
    pub config: RunConfig,
    pub resolved: ResolvedInfo,
    pub events: Vec<Digest>,
    pub window_scores: Vec<WindowScore>,
    pub truths: Vec<WindowTruth>,
    pub series: Vec<SeriesPoint>,
    pub averages: Averages,
    pub first_report: Option<FirstReport>,
    pub stats: StatsEcho,
}

/// Loads the packets for a config; also reports the nominal packet rate
/// when the source defines one.
pub fn load_trace(cfg: &RunConfig) -> Result<(Vec<PacketRecord>, Option<u64>), SimError> {
    let (mut records, rate) = match &cfg.trace {
        TraceSource::Synthetic { spec } => {
            let recs = generate(spec, cfg.seed)?;
            (recs, Some(spec.rate_pps))
        }
        TraceSource::SyntheticFile { path } => {
            let text = fs::read_to_string(path)?;
            let spec: SyntheticSpec = toml::from_str(&text)
                .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
            let rate = spec.rate_pps;
            (generate(&spec, cfg.seed)?, Some(rate))
        }
        TraceSource::Csv { path } => (csvio::read_csv_with(path, cfg.allow_reorder)?, None),
        TraceSource::Pcap { path } => {
            let trace = pcap::read_pcap(path)?;
            if trace.truncated {
                eprintln!(
                    "warning: capture ends mid-record; kept {} packets",
                    trace.records.len()
                );
            }
            (trace.records, None)
        }
    };
    if let Some(window) = cfg.allow_reorder {
        if !records.windows(2).all(|w| w[0].ts <= w[1].ts) {
            records = sort_bounded(records, window)?;
        }
    }
    Ok((records, rate))
}

/// The deepest planted prefix for learning-phase bookkeeping, clamped to
/// the configured depth.
fn learning_target(cfg: &RunConfig) -> Option<Prefix> {
    let spec = match &cfg.trace {
        TraceSource::Synthetic { spec } => Some(spec.as_ref().clone()),
        TraceSource::SyntheticFile { path } => fs::read_to_string(path)
            .ok()
            .and_then(|t| toml::from_str::<SyntheticSpec>(&t).ok()),
        _ => None,
    };
    spec.and_then(|s| s.deepest_heavy())
        .map(|p| p.truncate(cfg.depth))
}

pub fn run(cfg: &RunConfig) -> Result<RunReport, SimError> {
    run_with_events_file(cfg, None)
}

/// Like [`run`] but streaming accepted events to a JSON-lines file as the
/// trace plays.
pub fn run_with_events_file(
    cfg: &RunConfig,
    events_path: Option<&Path>,
) -> Result<RunReport, SimError> {
    if cfg.depth > 32 {
        return Err(SimError::Config(format!("depth {} exceeds 32", cfg.depth)));
    }
    if cfg.relax != 0 && cfg.relax != 2 {
        return Err(SimError::Config(format!(
            "relax must be 0 or 2, got {}",
            cfg.relax
        )));
    }
    if cfg.active_timeout_s <= 0.0 || cfg.inactive_timeout_s < cfg.active_timeout_s {
        return Err(SimError::Config(
            "need 0 < active_timeout_s <= inactive_timeout_s".into(),
        ));
    }
    let (records, trace_rate) = load_trace(cfg)?;
    let nominal_rate = cfg.nominal_rate_pps.or(trace_rate);
    let window_us = (cfg.active_timeout_s * 1e6) as u64;
    let inactive_us = (cfg.inactive_timeout_s * 1e6) as u64;
    let threshold = cfg.threshold.resolve(nominal_rate, window_us)?;
    if threshold == 0 || threshold > u64::from(u32::MAX) {
        return Err(SimError::Config(format!(
            "threshold {threshold} out of counter range"
        )));
    }
    let conversion = match cfg.threshold {
        ThresholdSpec::Absolute(_) => "absolute".to_string(),
        ThresholdSpec::Percent(p) => format!(
            "{} = round({rate} pps * {win}s * {p}%)",
            threshold,
            rate = nominal_rate.unwrap_or(0),
            win = cfg.active_timeout_s
        ),
    };

    let mut trie_cfg = elastic_trie::TrieConfig::uniform(threshold as u32, window_us, inactive_us)
        .with_max_depth(cfg.depth)
        .with_count_mode(cfg.count_mode)
        .with_hh_reports(cfg.report_hh_on_expand);
    if let TimeoutFnSpec::Variable(y) = cfg.timeout_fn {
        trie_cfg = trie_cfg.with_variable_timeout(y);
    }
    if cfg.threshold_scaling == ThresholdScaling::Proportional {
        trie_cfg = trie_cfg.with_proportional_thresholds();
    }
    let change_window = cfg
        .change_window_s
        .map(|s| (s * 1e6) as u64)
        .unwrap_or_else(|| trie_cfg.active_timeout(0))
        .max(1);
    let tick_us = cfg
        .change_tick_s
        .map(|s| (s * 1e6) as u64)
        .unwrap_or((change_window / 8).max(1))
        .max(1);
    let change_cfg = ChangeConfig::new(cfg.alarm_threshold, change_window).with_tick(tick_us);

    let budget =
        MemoryBudget::split_for_depth(cfg.memory_bytes * 8, cfg.depth).map_err(BuildError::from)?;
    let budget_total_bits = budget.total_bits();
    let mut trie = ElasticTrie::new(trie_cfg, budget)?.with_change_config(change_cfg);
    if cfg.mode != DetectionMode::Hhh {
        trie =
            trie.with_spread_filter(BloomFilter::from_bytes(cfg.filter_bytes, cfg.filter_hashes));
    }
    let sink = match events_path {
        Some(path) => EventSink::to_file(cfg.sink_capacity, path)?,
        None => EventSink::in_memory(cfg.sink_capacity),
    };

    let mut truths: Vec<WindowTruth> = Vec::new();
    let mut hhh_buffer: Vec<(u32, u64)> = Vec::new();
    let mut flow_buffer: Vec<(u32, u32)> = Vec::new();
    let mut current_window = 0u64;
    let mut series = Vec::new();
    let mut next_tick = 0u64;
    let mut peak_nodes = 0usize;
    let mut peak_bits = 0u64;
    let mut alarms = 0u64;

    let finalize_window = |idx: u64,
                           hhh_buffer: &mut Vec<(u32, u64)>,
                           flow_buffer: &mut Vec<(u32, u32)>,
                           truths: &mut Vec<WindowTruth>| {
        let mut truth = WindowTruth {
            index: idx,
            ..WindowTruth::default()
        };
        match cfg.mode {
            DetectionMode::Hhh => {
                truth.hhh = exact_hhh(hhh_buffer, threshold, cfg.depth);
            }
            _ => {
                truth.spreaders = exact_spreaders(flow_buffer, threshold, cfg.depth);
            }
        }
        truths.push(truth);
        hhh_buffer.clear();
        flow_buffer.clear();
    };

    for (index, rec) in records.iter().enumerate() {
        let window = rec.ts / window_us;
        while current_window < window {
            finalize_window(
                current_window,
                &mut hhh_buffer,
                &mut flow_buffer,
                &mut truths,
            );
            current_window += 1;
        }
        while next_tick <= rec.ts {
            series.push(SeriesPoint {
                ts: next_tick,
                nodes: trie.node_count(),
                max_level: trie.max_level(),
                bits_in_use: trie.bits_in_use(),
                change_counter: trie.change_counter(),
                change_avg: trie.change_moving_average(next_tick),
            });
            next_tick += tick_us;
        }
        let step = match cfg.mode {
            DetectionMode::Hhh => {
                let weight = match cfg.count_mode {
                    CountMode::Packets => 1,
                    CountMode::Bytes => u64::from(rec.len),
                };
                hhh_buffer.push((rec.src, weight));
                trie.process_packet(rec.src, rec.ts, weight)
            }
            DetectionMode::Spread => {
                flow_buffer.push((rec.src, rec.dst));
                trie.process_spread(rec.src, rec.dst, rec.ts)
            }
            DetectionMode::DdosVictim => {
                flow_buffer.push((rec.dst, rec.src));
                trie.process_spread(rec.dst, rec.src, rec.ts)
            }
        };
        let events = step.map_err(|source| SimError::Clock {
            index: index as u64,
            source,
        })?;
        for event in events {
            if matches!(event.kind, EventKind::Change { .. }) {
                alarms += 1;
            }
            sink.emit(&event);
        }
        peak_nodes = peak_nodes.max(trie.node_count());
        peak_bits = peak_bits.max(trie.bits_in_use());
    }
    sink.flush()?;

    // Score only completed windows: the one in progress at EOF is dropped.
    let digests = sink.dump();
    let scored_windows = truths.len() as u64;
    let mut reported: Vec<BTreeSet<Prefix>> = vec![BTreeSet::new(); truths.len()];
    for digest in &digests {
        if !cfg.mode.matches_event(&digest.event.kind) {
            continue;
        }
        let w = digest.event.window_start / window_us;
        if w < scored_windows {
            reported[w as usize].insert(digest.event.prefix);
        }
    }
    let mut window_scores = Vec::with_capacity(truths.len());
    let mut sums = Averages::default();
    for truth in &truths {
        let truth_set = match cfg.mode {
            DetectionMode::Hhh => &truth.hhh,
            _ => &truth.spreaders,
        };
        let rep = &reported[truth.index as usize];
        let (recall0, precision0) = score(rep, truth_set, 0);
        let (recall2, precision2) = score(rep, truth_set, 2);
        window_scores.push(WindowScore {
            window: truth.index,
            truth_len: truth_set.len(),
            reported_len: rep.len(),
            recall0,
            precision0,
            recall2,
            precision2,
        });
        sums.recall0 += recall0;
        sums.precision0 += precision0;
        sums.recall2 += recall2;
        sums.precision2 += precision2;
    }
    let averages = if window_scores.is_empty() {
        Averages::default()
    } else {
        let n = window_scores.len() as f64;
        let (recall, precision) = if cfg.relax == 0 {
            (sums.recall0 / n, sums.precision0 / n)
        } else {
            (sums.recall2 / n, sums.precision2 / n)
        };
        Averages {
            windows: window_scores.len(),
            recall0: sums.recall0 / n,
            precision0: sums.precision0 / n,
            recall2: sums.recall2 / n,
            precision2: sums.precision2 / n,
            recall,
            precision,
        }
    };

    let first_report = learning_target(cfg).and_then(|target| {
        digests
            .iter()
            .filter(|d| cfg.mode.matches_event(&d.event.kind) && d.event.prefix == target)
            .map(|d| FirstReport {
                prefix: target,
                window: d.event.ts / window_us,
                ts: d.event.ts,
            })
            .next()
    });

    let t = trie.stats();
    let stats = StatsEcho {
        packets: t.packets,
        updates: t.updates,
        keeps: t.keeps,
        expansions: t.expansions,
        collapses: t.collapses,
        invalidations: t.invalidations,
        root_resets: t.root_resets,
        expand_table_full: t.expand_table_full,
        collapse_table_full: t.collapse_table_full,
        discarded_weight: t.discarded_weight,
        peak_nodes,
        peak_bits,
        events_accepted: sink.accepted(),
        events_dropped: sink.dropped(),
        alarms,
        filter_inserted: trie.spread_filter().map(|f| f.inserted()),
        filter_fp_rate: trie.spread_filter().map(|f| f.estimated_fp_rate()),
    };

    Ok(RunReport {
        config: cfg.clone(),
        resolved: ResolvedInfo {
            threshold_absolute: threshold,
            threshold_conversion: conversion,
            window_us,
            inactive_timeout_us: inactive_us,
            budget_total_bits,
            nominal_rate_pps: nominal_rate,
        },
        events: digests,
        window_scores,
        truths,
        series,
        averages,
        first_report,
        stats,
    })
}

/// Writes `summary.json`, `scores.csv`, `series.csv` and `events.jsonl`
/// under `dir`. File contents depend only on the run itself.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<(), SimError> {
    fs::create_dir_all(dir)?;

    let mut events = fs::File::create(dir.join("events.jsonl"))?;
    for digest in &report.events {
        writeln!(events, "{}", digest.to_json_line())?;
    }

    let mut scores = String::from("window,mode,relax,recall,precision\n");
    let mode = report.config.mode.primary_kind();
    for w in &report.window_scores {
        scores.push_str(&format!(
            "{},{},0,{},{}\n",
            w.window, mode, w.recall0, w.precision0
        ));
        scores.push_str(&format!(
            "{},{},2,{},{}\n",
            w.window, mode, w.recall2, w.precision2
        ));
    }
    fs::write(dir.join("scores.csv"), scores)?;

    let mut series = String::from("ts_us,nodes,max_level,bits_in_use,change_counter,change_avg\n");
    for p in &report.series {
        series.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.ts, p.nodes, p.max_level, p.bits_in_use, p.change_counter, p.change_avg
        ));
    }
    fs::write(dir.join("series.csv"), series)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        config: &'a RunConfig,
        resolved: &'a ResolvedInfo,
        averages: &'a Averages,
        stats: &'a StatsEcho,
        first_report: &'a Option<FirstReport>,
        files: [&'static str; 3],
    }
    let summary = serde_json::to_string_pretty(&Summary {
        config: &report.config,
        resolved: &report.resolved,
        averages: &report.averages,
        stats: &report.stats,
        first_report: &report.first_report,
        files: ["events.jsonl", "scores.csv", "series.csv"],
    })
    .expect("summary serialization is infallible");
    fs::write(dir.join("summary.json"), summary)?;
    Ok(())
}
