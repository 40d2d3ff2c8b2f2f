//! Detection events pushed towards the collector.

use crate::prefix::Prefix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A subprefix crossed the threshold on its own and triggered an
    /// expansion; optional report.
    HeavyHitter,
    /// A node whose window expired with enough volume once the traffic of
    /// refined descendants is excluded.
    HierarchicalHeavyHitter,
    /// Same condition with counters tracking distinct flows.
    Superspreader,
    /// The expansion/collapse balance left the configured band; carries the
    /// signed counter at alarm time.
    Change { counter: i64 },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::HeavyHitter => "hh",
            EventKind::HierarchicalHeavyHitter => "hhh",
            EventKind::Superspreader => "superspreader",
            EventKind::Change { .. } => "change",
        }
    }
}

/// One push notification. `volume` is the sum of both node counters at
/// report time (the counter magnitude for change events) and
/// `window_start` is the start of the evaluation window being reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionEvent {
    pub kind: EventKind,
    pub prefix: Prefix,
    pub volume: u64,
    pub ts: u64,
    pub window_start: u64,
}
