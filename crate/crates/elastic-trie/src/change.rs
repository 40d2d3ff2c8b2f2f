//! Traffic-change detection from structural churn.
//!
//! A single signed counter goes up on every expansion and down on every
//! collapse. Steady traffic keeps it oscillating around zero; a regime
//! change drives it away until the alarm threshold fires. A trailing
//! window over the change history yields the moving average used for
//! reporting.

use std::collections::VecDeque;

use crate::event::{DetectionEvent, EventKind};
use crate::prefix::Prefix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureChange {
    Expand,
    Collapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChangeConfig {
    /// Alarm when |counter| reaches this magnitude; 0 disables alarms.
    pub alarm_threshold: u64,
    /// Trailing window for the moving average, microseconds.
    pub window_us: u64,
    /// Reporting tick; the moving average is a mean of per-tick deltas, so
    /// a window holds `window_us / tick_us` ticks.
    pub tick_us: u64,
}

impl ChangeConfig {
    pub fn new(alarm_threshold: u64, window_us: u64) -> Self {
        ChangeConfig {
            alarm_threshold,
            window_us: window_us.max(1),
            tick_us: (window_us / 8).max(1),
        }
    }

    pub fn with_tick(mut self, tick_us: u64) -> Self {
        self.tick_us = tick_us.max(1);
        self
    }

    pub fn ticks_per_window(&self) -> u64 {
        (self.window_us / self.tick_us).max(1)
    }
}

#[derive(Debug, Clone)]
pub struct ChangeDetector {
    cfg: ChangeConfig,
    counter: i64,
    last_reset_ts: u64,
    history: VecDeque<(u64, i8)>,
}

impl ChangeDetector {
    pub fn new(cfg: ChangeConfig) -> Self {
        ChangeDetector {
            cfg,
            counter: 0,
            last_reset_ts: 0,
            history: VecDeque::new(),
        }
    }

    pub fn config(&self) -> &ChangeConfig {
        &self.cfg
    }

    /// Expansions minus collapses since the last alarm reset.
    pub fn counter(&self) -> i64 {
        self.counter
    }

    /// Feeds one structural change; emits a change event (and resets the
    /// counter) when the alarm threshold is reached.
    pub fn on_structure_change(
        &mut self,
        change: StructureChange,
        ts: u64,
    ) -> Option<DetectionEvent> {
        let delta: i8 = match change {
            StructureChange::Expand => 1,
            StructureChange::Collapse => -1,
        };
        self.counter += i64::from(delta);
        self.history.push_back((ts, delta));
        self.prune(ts);
        if self.cfg.alarm_threshold > 0 && self.counter.unsigned_abs() >= self.cfg.alarm_threshold {
            let event = DetectionEvent {
                kind: EventKind::Change {
                    counter: self.counter,
                },
                prefix: Prefix::ROOT,
                volume: self.counter.unsigned_abs(),
                ts,
                window_start: self.last_reset_ts,
            };
            self.counter = 0;
            self.last_reset_ts = ts;
            return Some(event);
        }
        None
    }

    /// Mean per-tick change over the trailing window ending at `now`.
    pub fn moving_average(&self, now: u64) -> f64 {
        let floor = now.saturating_sub(self.cfg.window_us);
        let sum: i64 = self
            .history
            .iter()
            .rev()
            .take_while(|(ts, _)| *ts > floor)
            .filter(|(ts, _)| *ts <= now)
            .map(|&(_, d)| i64::from(d))
            .sum();
        sum as f64 / self.cfg.ticks_per_window() as f64
    }

    fn prune(&mut self, now: u64) {
        let floor = now.saturating_sub(self.cfg.window_us);
        while let Some(&(ts, _)) = self.history.front() {
            if ts <= floor {
                self.history.pop_front();
            } else {
                break;
            }
        }
    }
}
