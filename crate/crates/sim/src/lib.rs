//! Trace-driven evaluation harness for the elastic trie: trace readers, a
//! deterministic synthetic workload generator with planted ground truth,
//! an exact oracle for heavy hitters / hierarchical heavy hitters /
//! superspreaders, recall-precision scoring with relaxed prefix matching,
//! and the experiment runner behind the `elastic-sim` CLI.

pub mod csvio;
pub mod oracle;
pub mod pcap;
pub mod record;
pub mod run;
pub mod score;
pub mod sweep;
pub mod synth;

pub use record::{PacketRecord, TraceError};
pub use run::{
    run, run_with_events_file, write_report, DetectionMode, RunConfig, RunReport, SimError,
    ThresholdScaling, ThresholdSpec, TimeoutFnSpec, TraceSource,
};
pub use sweep::{sweep, write_sweep_csv, SweepAxis, SweepReport};
pub use synth::{generate, Attack, AttackKind, PlantedHeavy, SyntheticSpec, ZipfSpec};
