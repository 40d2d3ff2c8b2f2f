//! Elastic trie: a self-adjusting prefix trie that detects high-volume
//! traffic aggregates on a per-packet basis and pushes notifications as
//! soon as a condition is met.
//!
//! The trie grows towards prefixes that carry a large enough share of the
//! traffic and collapses away from prefixes that stop doing so. Every
//! stored node keeps one counter per child subprefix plus a timestamp, and
//! each incoming packet triggers exactly one of five actions on its
//! longest-prefix-match node: invalidate, expand, keep (report), collapse
//! or a plain counter update.
//!
//! Storage mimics a programmable-dataplane layout: one fixed-capacity hash
//! table per prefix length with single-slot addressing and no probing, so
//! the structure fits a configurable memory budget. Optional extras:
//!
//! * a Bloom filter that gates counter updates so counters track distinct
//!   flows instead of packets (superspreader mode),
//! * a global expansion/collapse counter whose excursions flag changes in
//!   traffic patterns,
//! * a bounded digest sink that records emitted events without ever
//!   blocking packet processing.

pub mod bloom;
pub mod change;
pub mod config;
pub mod event;
pub mod lpm;
pub mod node;
pub mod notify;
pub mod prefix;
pub mod trie;

pub use bloom::BloomFilter;
pub use change::{ChangeConfig, ChangeDetector, StructureChange};
pub use config::{
    active_timeout_fn, ConfigError, CountMode, TrieConfig, LEVEL_COUNT, MAX_PREFIX_LEN,
};
pub use event::{DetectionEvent, EventKind};
pub use lpm::{BudgetError, HashKind, LevelTable, LevelTables, MemoryBudget, TableFull, NODE_BITS};
pub use node::NodeRecord;
pub use notify::{Digest, EventSink};
pub use prefix::{Prefix, PrefixError};
pub use trie::{classify_action, Action, BuildError, ElasticTrie, StepTrace, TrieError, TrieStats};
