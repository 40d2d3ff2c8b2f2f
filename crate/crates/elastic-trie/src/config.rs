//! Trie configuration: per-level thresholds and timeouts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_PREFIX_LEN: u8 = 32;
/// Prefix lengths 0..=32, root included.
pub const LEVEL_COUNT: usize = 33;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("active timeout {active}us at level {level} exceeds inactive timeout {inactive}us")]
    TimeoutOrder {
        level: u8,
        active: u64,
        inactive: u64,
    },
    #[error("threshold at level {0} is zero")]
    ZeroThreshold(u8),
    #[error("max depth {0} exceeds 32")]
    DepthOutOfRange(u8),
    #[error("zero active timeout at level {0}")]
    ZeroTimeout(u8),
}

/// What a node counter counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    Packets,
    Bytes,
}

/// Per-level timeout for the variable active timeout mechanism.
///
/// For level `x < 32` the timeout is `(y / (32 - x)) * base` whenever that
/// ratio is below one, and `base` otherwise; the coefficient `y` is the
/// number of deepest levels left unaffected. Level 32 always uses `base`.
pub fn active_timeout_fn(y: u32, level: u8, base_timeout: u64) -> u64 {
    assert!(y >= 1, "timeout coefficient must be at least 1");
    if level >= MAX_PREFIX_LEN {
        return base_timeout;
    }
    let denom = u64::from(MAX_PREFIX_LEN - level);
    if u64::from(y) < denom {
        base_timeout * u64::from(y) / denom
    } else {
        base_timeout
    }
}

/// Full per-level configuration of the trie.
///
/// All durations are microseconds on the trace clock. Thresholds are
/// volumes per evaluation window in the unit selected by `count_mode`
/// (packets, bytes, or distinct flows when a spread filter is attached).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieConfig {
    pub threshold_per_level: [u32; LEVEL_COUNT],
    pub active_timeout_per_level: [u64; LEVEL_COUNT],
    pub inactive_timeout: u64,
    pub count_mode: CountMode,
    pub report_hh_on_expand: bool,
    pub max_depth: u8,
}

impl TrieConfig {
    /// One global threshold and active timeout replicated across levels.
    pub fn uniform(threshold: u32, active_timeout_us: u64, inactive_timeout_us: u64) -> Self {
        TrieConfig {
            threshold_per_level: [threshold; LEVEL_COUNT],
            active_timeout_per_level: [active_timeout_us; LEVEL_COUNT],
            inactive_timeout: inactive_timeout_us,
            count_mode: CountMode::Packets,
            report_hh_on_expand: false,
            max_depth: MAX_PREFIX_LEN,
        }
    }

    /// Applies the variable active timeout with coefficient `y`, scaling
    /// each level's current timeout.
    pub fn with_variable_timeout(mut self, y: u32) -> Self {
        for level in 0..LEVEL_COUNT {
            let base = self.active_timeout_per_level[level];
            self.active_timeout_per_level[level] = active_timeout_fn(y, level as u8, base);
        }
        self
    }

    /// Rescales every level's threshold by the ratio of its active timeout
    /// to the longest one, keeping the per-time rate a threshold expresses
    /// constant across levels. A no-op for uniform timeouts.
    pub fn with_proportional_thresholds(mut self) -> Self {
        let base = *self
            .active_timeout_per_level
            .iter()
            .max()
            .expect("level array is non-empty");
        if base == 0 {
            return self;
        }
        for level in 0..LEVEL_COUNT {
            let scaled = u128::from(self.threshold_per_level[level])
                * u128::from(self.active_timeout_per_level[level])
                / u128::from(base);
            self.threshold_per_level[level] = (scaled as u32).max(1);
        }
        self
    }

    pub fn with_max_depth(mut self, depth: u8) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_count_mode(mut self, mode: CountMode) -> Self {
        self.count_mode = mode;
        self
    }

    pub fn with_hh_reports(mut self, enabled: bool) -> Self {
        self.report_hh_on_expand = enabled;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_depth > MAX_PREFIX_LEN {
            return Err(ConfigError::DepthOutOfRange(self.max_depth));
        }
        for level in 0..LEVEL_COUNT {
            if self.threshold_per_level[level] == 0 {
                return Err(ConfigError::ZeroThreshold(level as u8));
            }
            let active = self.active_timeout_per_level[level];
            if active == 0 {
                return Err(ConfigError::ZeroTimeout(level as u8));
            }
            if active > self.inactive_timeout {
                return Err(ConfigError::TimeoutOrder {
                    level: level as u8,
                    active,
                    inactive: self.inactive_timeout,
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn threshold(&self, level: u8) -> u64 {
        u64::from(self.threshold_per_level[level as usize])
    }

    #[inline]
    pub fn active_timeout(&self, level: u8) -> u64 {
        self.active_timeout_per_level[level as usize]
    }
}
