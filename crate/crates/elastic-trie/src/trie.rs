//! The elastic trie and its per-packet refinement algorithm.
//!
//! Every packet resolves to its longest stored prefix and triggers exactly
//! one action on that node, decided by disjoint ranges over the node age
//! `pkt_ts - node.ts` and the counters:
//!
//! * age >= inactive timeout: **invalidate** — the counters are stale; the
//!   node is removed (the root resets in place) and the packet discarded.
//! * active timeout <= age < inactive timeout: the window is evaluated.
//!   **Keep** reports the prefix when both counters together reach the
//!   threshold, then zeroes them for the next window; otherwise the node
//!   **collapses** into its one-bit-shorter parent, which is inserted or
//!   renewed with zeroed counters.
//! * age < active timeout: a child counter reaching the threshold with
//!   this packet **expands** the trie by a fresh child node (the trigger
//!   counter zeroes so the refined traffic is excluded from the parent);
//!   otherwise the counter is simply **updated**.
//!
//! The packet's weight lands on the node that survives the action: the new
//! child on expand, the parent on collapse, the node itself on keep and
//! update, and nowhere on invalidate.

use thiserror::Error;

use crate::bloom::BloomFilter;
use crate::change::{ChangeConfig, ChangeDetector, StructureChange};
use crate::config::{ConfigError, TrieConfig};
use crate::event::{DetectionEvent, EventKind};
use crate::lpm::{BudgetError, LevelTables, MemoryBudget};
use crate::node::NodeRecord;
use crate::prefix::Prefix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrieError {
    #[error("packet timestamp {pkt_ts} precedes node timestamp {node_ts}")]
    NonMonotonicClock { node_ts: u64, pkt_ts: u64 },
    #[error("spread processing requires an attached filter")]
    SpreadFilterMissing,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

/// The five possible outcomes of classifying a packet against its node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Invalidate,
    Expand(u8),
    Keep,
    Collapse,
    Update,
}

/// What one packet did, for observability and tests. `action` is the
/// classified action; an `Expand` at the depth limit is applied as a
/// plain counter update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepTrace {
    pub matched: Prefix,
    pub action: Action,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrieStats {
    pub packets: u64,
    pub updates: u64,
    pub keeps: u64,
    /// Expand actions applied below the depth limit, table-full included.
    pub expansions: u64,
    /// Collapse actions applied to non-root nodes.
    pub collapses: u64,
    /// Invalidations of non-root nodes.
    pub invalidations: u64,
    /// In-place resets of the permanent root node.
    pub root_resets: u64,
    pub expand_table_full: u64,
    pub collapse_table_full: u64,
    /// Weight thrown away by invalidations.
    pub discarded_weight: u64,
}

/// Picks the single action for a packet hitting `node` at `level`.
///
/// `subbit` is the key bit right after the node's prefix (0 for a
/// full-depth node) and `weight` the packet's contribution; an expansion
/// triggers as soon as the side counter reaches the level threshold with
/// this packet accounted, so a counter never exceeds the threshold before
/// the trie refines.
pub fn classify_action(
    node: &NodeRecord,
    level: u8,
    pkt_ts: u64,
    subbit: u8,
    weight: u64,
    cfg: &TrieConfig,
) -> Result<Action, TrieError> {
    if pkt_ts < node.ts {
        return Err(TrieError::NonMonotonicClock {
            node_ts: node.ts,
            pkt_ts,
        });
    }
    let age = pkt_ts - node.ts;
    if age >= cfg.inactive_timeout {
        return Ok(Action::Invalidate);
    }
    if age >= cfg.active_timeout(level) {
        if node.volume() >= cfg.threshold(level) {
            return Ok(Action::Keep);
        }
        return Ok(Action::Collapse);
    }
    if u64::from(node.counter(subbit)) + weight >= cfg.threshold(level) {
        return Ok(Action::Expand(subbit));
    }
    Ok(Action::Update)
}

/// A prefix trie over per-length hash tables that refines itself towards
/// heavy prefixes and reports them as their windows close.
pub struct ElasticTrie {
    tables: LevelTables,
    cfg: TrieConfig,
    change: ChangeDetector,
    spread: Option<SpreadGate>,
    stats: TrieStats,
}

struct SpreadGate {
    filter: BloomFilter,
    epoch_us: u64,
    epoch: u64,
}

impl ElasticTrie {
    pub fn new(cfg: TrieConfig, budget: MemoryBudget) -> Result<Self, BuildError> {
        cfg.validate()?;
        let tables = LevelTables::new(budget)?;
        let change_cfg = ChangeConfig::new(0, cfg.active_timeout(0));
        Ok(ElasticTrie {
            tables,
            cfg,
            change: ChangeDetector::new(change_cfg),
            spread: None,
            stats: TrieStats::default(),
        })
    }

    /// Attaches a Bloom filter so counters advance once per distinct
    /// (matched prefix, element) flow. The filter clears at every level-0
    /// active-timeout boundary, aligning its epoch with the coarsest
    /// evaluation window.
    pub fn with_spread_filter(mut self, filter: BloomFilter) -> Self {
        self.spread = Some(SpreadGate {
            filter,
            epoch_us: self.cfg.active_timeout(0).max(1),
            epoch: 0,
        });
        self
    }

    pub fn with_change_config(mut self, change_cfg: ChangeConfig) -> Self {
        self.change = ChangeDetector::new(change_cfg);
        self
    }

    /// Feeds one packet in volume mode; `weight` is 1 per packet or the
    /// byte length, per the configured count mode.
    pub fn process_packet(
        &mut self,
        key: u32,
        pkt_ts: u64,
        weight: u64,
    ) -> Result<Vec<DetectionEvent>, TrieError> {
        self.step(key, pkt_ts, weight).map(|(_, events)| events)
    }

    /// Same as [`process_packet`](Self::process_packet) but also reports
    /// which prefix matched and which action ran.
    pub fn process_packet_traced(
        &mut self,
        key: u32,
        pkt_ts: u64,
        weight: u64,
    ) -> Result<(StepTrace, Vec<DetectionEvent>), TrieError> {
        self.step(key, pkt_ts, weight)
    }

    /// Feeds one packet in spread mode: the counters move only when
    /// (matched prefix, element) is a flow not seen in the current filter
    /// epoch. For superspreader detection the key is the source and the
    /// element the destination; swapping them detects flood victims.
    pub fn process_spread(
        &mut self,
        key: u32,
        element: u32,
        pkt_ts: u64,
    ) -> Result<Vec<DetectionEvent>, TrieError> {
        let gate = self.spread.as_mut().ok_or(TrieError::SpreadFilterMissing)?;
        let epoch = pkt_ts / gate.epoch_us;
        if epoch != gate.epoch {
            gate.filter.clear();
            gate.epoch = epoch;
        }
        let (matched, _) = self.tables.lookup_lpm(key);
        let gate = self.spread.as_mut().expect("checked above");
        let weight = u64::from(gate.filter.test_and_set(matched, element));
        self.step(key, pkt_ts, weight).map(|(_, events)| events)
    }

    fn keep_kind(&self) -> EventKind {
        if self.spread.is_some() {
            EventKind::Superspreader
        } else {
            EventKind::HierarchicalHeavyHitter
        }
    }

    fn step(
        &mut self,
        key: u32,
        pkt_ts: u64,
        weight: u64,
    ) -> Result<(StepTrace, Vec<DetectionEvent>), TrieError> {
        let (prefix, node) = {
            let (p, n) = self.tables.lookup_lpm(key);
            (p, *n)
        };
        let level = prefix.len();
        let subbit = if level < 32 {
            prefix.key_bit_after(key)
        } else {
            0
        };
        let action = classify_action(&node, level, pkt_ts, subbit, weight, &self.cfg)?;
        self.stats.packets += 1;

        let mut events = Vec::new();
        match action {
            Action::Update => {
                self.apply_update(prefix, subbit, weight);
            }
            Action::Invalidate => {
                self.apply_invalidate(prefix, pkt_ts, weight);
            }
            Action::Keep => {
                events.push(self.apply_keep(prefix, &node, subbit, pkt_ts, weight));
            }
            Action::Expand(side) => {
                if level >= self.cfg.max_depth {
                    // A full-depth prefix cannot be refined further.
                    self.apply_update(prefix, subbit, weight);
                } else {
                    self.apply_expand(prefix, &node, side, key, pkt_ts, weight, &mut events);
                }
            }
            Action::Collapse => {
                self.apply_collapse(prefix, key, subbit, pkt_ts, weight, &mut events);
            }
        }
        Ok((
            StepTrace {
                matched: prefix,
                action,
            },
            events,
        ))
    }

    fn apply_update(&mut self, prefix: Prefix, subbit: u8, weight: u64) {
        self.stats.updates += 1;
        if let Some(rec) = self.tables.get_mut(prefix) {
            rec.add(subbit, weight);
        }
    }

    /// Removes a stale node without touching parents or descendants; the
    /// root only resets. The triggering packet is discarded: charging it
    /// anywhere else would need a second lookup.
    fn apply_invalidate(&mut self, prefix: Prefix, pkt_ts: u64, weight: u64) {
        self.stats.discarded_weight += weight;
        if prefix.is_root() {
            self.stats.root_resets += 1;
            if let Some(rec) = self.tables.get_mut(prefix) {
                rec.reset(pkt_ts);
            }
        } else {
            self.stats.invalidations += 1;
            self.tables.remove(prefix);
        }
    }

    /// Reports the node, zeroes its counters for the next window and
    /// charges the packet to the fresh window.
    fn apply_keep(
        &mut self,
        prefix: Prefix,
        node: &NodeRecord,
        subbit: u8,
        pkt_ts: u64,
        weight: u64,
    ) -> DetectionEvent {
        self.stats.keeps += 1;
        let event = DetectionEvent {
            kind: self.keep_kind(),
            prefix,
            volume: node.volume(),
            ts: pkt_ts,
            window_start: node.ts,
        };
        if let Some(rec) = self.tables.get_mut(prefix) {
            rec.reset(pkt_ts);
            rec.add(subbit, weight);
        }
        event
    }

    /// Inserts the child node the triggering counter describes, zeroes
    /// that counter on the parent and charges the packet to the child. If
    /// the child level's slot is taken the insert is skipped but the
    /// counter still zeroes, so the node backs off and retries after
    /// re-accumulating a threshold's worth of traffic.
    #[allow(clippy::too_many_arguments)]
    fn apply_expand(
        &mut self,
        prefix: Prefix,
        node: &NodeRecord,
        side: u8,
        key: u32,
        pkt_ts: u64,
        weight: u64,
        events: &mut Vec<DetectionEvent>,
    ) {
        self.stats.expansions += 1;
        let child = prefix.child(side).expect("expand below max depth");
        if self.cfg.report_hh_on_expand {
            events.push(DetectionEvent {
                kind: EventKind::HeavyHitter,
                prefix: child,
                volume: u64::from(node.counter(side)) + weight,
                ts: pkt_ts,
                window_start: node.ts,
            });
        }
        let inserted = self
            .tables
            .insert(child, NodeRecord::fresh(child.bits(), pkt_ts))
            .is_ok();
        if let Some(rec) = self.tables.get_mut(prefix) {
            rec.zero_side(side);
        }
        if inserted {
            let child_subbit = if child.len() < 32 {
                child.key_bit_after(key)
            } else {
                0
            };
            if let Some(rec) = self.tables.get_mut(child) {
                rec.add(child_subbit, weight);
            }
        } else {
            self.stats.expand_table_full += 1;
            if let Some(rec) = self.tables.get_mut(prefix) {
                rec.add(side, weight);
            }
        }
        if let Some(change) = self
            .change
            .on_structure_change(StructureChange::Expand, pkt_ts)
        {
            events.push(change);
        }
    }

    /// Removes the node and renews (or inserts) its one-bit-shorter
    /// parent with zeroed counters, then charges the packet to the parent.
    /// The root never collapses; it resets in place instead.
    fn apply_collapse(
        &mut self,
        prefix: Prefix,
        key: u32,
        subbit: u8,
        pkt_ts: u64,
        weight: u64,
        events: &mut Vec<DetectionEvent>,
    ) {
        if prefix.is_root() {
            self.stats.root_resets += 1;
            if let Some(rec) = self.tables.get_mut(prefix) {
                rec.reset(pkt_ts);
                rec.add(subbit, weight);
            }
            return;
        }
        self.stats.collapses += 1;
        self.tables.remove(prefix);
        let parent = prefix.parent().expect("non-root prefix has a parent");
        match self
            .tables
            .insert(parent, NodeRecord::fresh(parent.bits(), pkt_ts))
        {
            Ok(()) => {
                let parent_subbit = parent.key_bit_after(key);
                if let Some(rec) = self.tables.get_mut(parent) {
                    rec.add(parent_subbit, weight);
                }
            }
            Err(_) => {
                // Parent slot taken by a different key: the packet falls
                // back to the nearest stored ancestor.
                self.stats.collapse_table_full += 1;
                let (ancestor, _) = self.tables.lookup_lpm(key);
                let ancestor_subbit = if ancestor.len() < 32 {
                    ancestor.key_bit_after(key)
                } else {
                    0
                };
                if let Some(rec) = self.tables.get_mut(ancestor) {
                    rec.add(ancestor_subbit, weight);
                }
            }
        }
        if let Some(change) = self
            .change
            .on_structure_change(StructureChange::Collapse, pkt_ts)
        {
            events.push(change);
        }
    }

    pub fn config(&self) -> &TrieConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &TrieStats {
        &self.stats
    }

    pub fn lookup(&self, key: u32) -> (Prefix, &NodeRecord) {
        self.tables.lookup_lpm(key)
    }

    pub fn node(&self, prefix: Prefix) -> Option<&NodeRecord> {
        self.tables.get(prefix)
    }

    pub fn tables(&self) -> &LevelTables {
        &self.tables
    }

    pub fn node_count(&self) -> usize {
        self.tables.node_count()
    }

    pub fn max_level(&self) -> u8 {
        self.tables.max_level()
    }

    pub fn bits_in_use(&self) -> u64 {
        self.tables.bits_in_use()
    }

    pub fn stored_prefixes(&self) -> Vec<Prefix> {
        self.tables.prefixes()
    }

    pub fn change_counter(&self) -> i64 {
        self.change.counter()
    }

    pub fn change_moving_average(&self, now: u64) -> f64 {
        self.change.moving_average(now)
    }

    pub fn spread_filter(&self) -> Option<&BloomFilter> {
        self.spread.as_ref().map(|g| &g.filter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEC: u64 = 1_000_000;

    fn cfg() -> TrieConfig {
        TrieConfig::uniform(10, 20 * SEC, 300 * SEC)
    }

    fn trie() -> ElasticTrie {
        ElasticTrie::new(cfg().with_max_depth(8), MemoryBudget::exhaustive(8)).unwrap()
    }

    fn p(s: &str) -> Prefix {
        Prefix::from_bit_str(s).unwrap()
    }

    #[test]
    fn classify_condition_ranges() {
        let c = cfg();
        let node = NodeRecord {
            c0: 4,
            c1: 5,
            ts: 0,
            key: 0,
        };
        // Inactive timeout first, regardless of counters.
        assert_eq!(
            classify_action(&node, 0, 301 * SEC, 0, 1, &c).unwrap(),
            Action::Invalidate
        );
        // Expired window with a small sum collapses.
        assert_eq!(
            classify_action(&node, 0, 21 * SEC, 0, 1, &c).unwrap(),
            Action::Collapse
        );
        // Expired window with enough volume keeps.
        let heavy = NodeRecord {
            c0: 6,
            c1: 7,
            ts: 0,
            key: 0,
        };
        assert_eq!(
            classify_action(&heavy, 0, 21 * SEC, 0, 1, &c).unwrap(),
            Action::Keep
        );
        // Fresh node inside the window just updates.
        let fresh = NodeRecord::fresh(0, 0);
        assert_eq!(
            classify_action(&fresh, 0, 0, 0, 1, &c).unwrap(),
            Action::Update
        );
        // A side counter reaching the threshold with this packet expands.
        let hot = NodeRecord {
            c0: 9,
            c1: 0,
            ts: 0,
            key: 0,
        };
        assert_eq!(
            classify_action(&hot, 0, SEC, 0, 1, &c).unwrap(),
            Action::Expand(0)
        );
        assert_eq!(
            classify_action(&hot, 0, SEC, 1, 1, &c).unwrap(),
            Action::Update
        );
    }

    #[test]
    fn clock_must_be_monotonic() {
        let c = cfg();
        let node = NodeRecord {
            c0: 0,
            c1: 0,
            ts: 5 * SEC,
            key: 0,
        };
        assert_eq!(
            classify_action(&node, 0, SEC, 0, 1, &c),
            Err(TrieError::NonMonotonicClock {
                node_ts: 5 * SEC,
                pkt_ts: SEC
            })
        );
        let mut t = trie();
        // An expired empty window resets the root timestamp to 25s.
        t.process_packet(0, 25 * SEC, 1).unwrap();
        assert!(matches!(
            t.process_packet(0, SEC, 1),
            Err(TrieError::NonMonotonicClock { .. })
        ));
    }

    #[test]
    fn first_packet_updates_root_counter() {
        let mut t = trie();
        let events = t.process_packet(0x8000_0000, 0, 1).unwrap();
        assert!(events.is_empty());
        let root = t.node(Prefix::ROOT).unwrap();
        assert_eq!((root.c0, root.c1), (0, 1));
    }

    #[test]
    fn expansion_creates_zeroed_child_and_resets_trigger() {
        let mut t = trie();
        // Nine packets for keys under 10*, all inside the window.
        for i in 0..9 {
            t.process_packet(0b10u32 << 30, i, 1).unwrap();
        }
        let root = t.node(Prefix::ROOT).unwrap();
        assert_eq!(root.c1, 9);
        // The tenth reaches the threshold: child 1* appears.
        t.process_packet(0b10u32 << 30, 9, 1).unwrap();
        let root = t.node(Prefix::ROOT).unwrap();
        assert_eq!(root.c1, 0);
        let child = t.node(p("1")).unwrap();
        assert_eq!(child.ts, 9);
        // The triggering packet lands on the child's 0-side (key 10*).
        assert_eq!((child.c0, child.c1), (1, 0));
        assert_eq!(t.stats().expansions, 1);
        assert_eq!(t.change_counter(), 1);
    }

    #[test]
    fn keep_reports_and_resets() {
        let mut t = trie();
        // Split 6/7 across the root's sides, then evaluate after the window.
        for i in 0..6 {
            t.process_packet(0, i, 1).unwrap();
        }
        for i in 0..7 {
            t.process_packet(0x8000_0000, 6 + i, 1).unwrap();
        }
        let events = t.process_packet(0, 21 * SEC, 1).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::HierarchicalHeavyHitter);
        assert_eq!(events[0].prefix, Prefix::ROOT);
        assert_eq!(events[0].volume, 13);
        assert_eq!(events[0].window_start, 0);
        assert_eq!(events[0].ts, 21 * SEC);
        let root = t.node(Prefix::ROOT).unwrap();
        // New window holds only the evaluating packet.
        assert_eq!((root.c0, root.c1), (1, 0));
        assert_eq!(root.ts, 21 * SEC);
    }

    #[test]
    fn root_survives_inactivity_with_reset() {
        let mut t = trie();
        t.process_packet(0, 0, 1).unwrap();
        let events = t.process_packet(0, 400 * SEC, 1).unwrap();
        assert!(events.is_empty());
        let root = t.node(Prefix::ROOT).unwrap();
        // Reset in place, packet discarded.
        assert_eq!((root.c0, root.c1), (0, 0));
        assert_eq!(root.ts, 400 * SEC);
        assert_eq!(t.stats().root_resets, 1);
        assert_eq!(t.stats().invalidations, 0);
        assert_eq!(t.stats().discarded_weight, 1);
    }

    #[test]
    fn full_depth_node_never_expands() {
        // Max depth 32 with a small per-level budget.
        let mut bits = [crate::lpm::NODE_BITS * 4; crate::config::LEVEL_COUNT];
        bits[0] = crate::lpm::NODE_BITS;
        let deep_budget = MemoryBudget::from_per_level(bits).unwrap();
        let mut t = ElasticTrie::new(cfg(), deep_budget).unwrap();
        let key = 0xdead_beef;
        // Drive the single address well past the threshold repeatedly.
        for i in 0..2000u64 {
            t.process_packet(key, i, 1).unwrap();
        }
        assert!(t.max_level() <= 32);
        let (matched, node) = t.lookup(key);
        assert_eq!(matched.len(), 32);
        // Everything accumulates on c0 at full depth; no deeper structure.
        assert!(node.c0 >= 10);
    }

    #[test]
    fn length_one_node_collapses_into_root() {
        let mut t = trie();
        // Expand to 1* then starve it.
        for i in 0..10 {
            t.process_packet(0x8000_0000, i, 1).unwrap();
        }
        assert!(t.node(p("1")).is_some());
        // Window expires with a tiny sum: collapse into the root.
        let events = t.process_packet(0x8000_0000, 25 * SEC, 1).unwrap();
        assert!(events.is_empty());
        assert!(t.node(p("1")).is_none());
        let root = t.node(Prefix::ROOT).unwrap();
        assert_eq!(root.ts, 25 * SEC);
        // The collapsing packet lands on the root's 1-side.
        assert_eq!((root.c0, root.c1), (0, 1));
        assert_eq!(t.stats().collapses, 1);
        assert_eq!(t.change_counter(), 0);
    }

    #[test]
    fn collapse_renews_existing_parent() {
        let mut t = trie();
        // Build 1*, then refine 10* out of it.
        for i in 0..10 {
            t.process_packet(0b10u32 << 30, i, 1).unwrap();
        }
        for i in 10..19 {
            t.process_packet(0b10u32 << 30, i, 1).unwrap();
        }
        assert!(t.node(p("10")).is_some());
        // Traffic under 11* accumulates on the surviving parent 1*.
        t.process_packet(0b11u32 << 30, 20, 1).unwrap();
        t.process_packet(0b11u32 << 30, 21, 1).unwrap();
        let parent_before = *t.node(p("1")).unwrap();
        assert_eq!(parent_before.c1, 2);
        // Starve 10*: its window expires below the threshold.
        t.process_packet(0b10u32 << 30, 25 * SEC, 1).unwrap();
        assert!(t.node(p("10")).is_none());
        let parent = t.node(p("1")).unwrap();
        // Renewed: zeroed counters, fresh timestamp, plus this packet.
        assert_eq!(parent.ts, 25 * SEC);
        assert_eq!((parent.c0, parent.c1), (1, 0));
    }

    #[test]
    fn invalidation_keeps_descendants_reachable() {
        let mut t = trie();
        for i in 0..10 {
            t.process_packet(0b10u32 << 30, i, 1).unwrap();
        }
        for i in 10..20 {
            t.process_packet(0b10u32 << 30, i, 1).unwrap();
        }
        assert!(t.node(p("10")).is_some());
        // Hit 1* (via a key matching 1* but not 10*) after the inactive
        // timeout: the node disappears, nothing else moves.
        let before = *t.node(p("10")).unwrap();
        t.process_packet(0b11u32 << 30, 400 * SEC, 1).unwrap();
        assert!(t.node(p("1")).is_none());
        assert_eq!(*t.node(p("10")).unwrap(), before);
        assert_eq!(t.lookup(0b10u32 << 30).0, p("10"));
        assert_eq!(t.stats().invalidations, 1);
    }

    #[test]
    fn spread_mode_counts_distinct_flows() {
        let mut t = ElasticTrie::new(cfg().with_max_depth(8), MemoryBudget::exhaustive(8))
            .unwrap()
            .with_spread_filter(BloomFilter::new(1 << 14, 4));
        // Five packets of the same flow count once.
        for i in 0..5 {
            t.process_spread(0x8000_0000, 7, i).unwrap();
        }
        let root = t.node(Prefix::ROOT).unwrap();
        assert_eq!(root.c1, 1);
        // A second destination counts again.
        t.process_spread(0x8000_0000, 8, 10).unwrap();
        assert_eq!(t.node(Prefix::ROOT).unwrap().c1, 2);
        // Spread 10 distinct flows across both root sides, below the
        // per-side expand trigger, and let the window expire: the keep
        // report is a superspreader event.
        for dst in 9..=12 {
            t.process_spread(0x8000_0000, dst, 11).unwrap();
        }
        for dst in 0..4 {
            t.process_spread(0x0000_0001, dst, 12).unwrap();
        }
        assert_eq!(t.node(Prefix::ROOT).unwrap().volume(), 10);
        let events = t.process_spread(0x8000_0000, 99, 21 * SEC).unwrap();
        assert!(events.iter().any(|e| e.kind == EventKind::Superspreader));
    }

    #[test]
    fn oversized_filter_counts_exact_distinct_destinations() {
        // With a filter far larger than the flow count, node counters
        // equal exact distinct-destination counts for the matched prefix.
        let mut t = ElasticTrie::new(
            TrieConfig::uniform(1_000_000, 20 * SEC, 300 * SEC),
            MemoryBudget::exhaustive(8),
        )
        .unwrap()
        .with_spread_filter(BloomFilter::new(1 << 20, 4));
        let mut distinct = std::collections::HashSet::new();
        let mut ts = 0;
        for i in 0..400u32 {
            let src = i.wrapping_mul(2654435761) ^ 0x5a5a;
            let dst = i.wrapping_mul(40503) % 37; // plenty of repeats
            distinct.insert(dst);
            t.process_spread(src, dst, ts).unwrap();
            // Replays of the same flow never count twice.
            t.process_spread(src, dst, ts + 1).unwrap();
            ts += 2;
        }
        let root = t.node(Prefix::ROOT).unwrap();
        assert_eq!(root.volume(), distinct.len() as u64);
    }

    #[test]
    fn spread_requires_filter() {
        let mut t = trie();
        assert_eq!(
            t.process_spread(0, 0, 0).unwrap_err(),
            TrieError::SpreadFilterMissing
        );
    }

    #[test]
    fn hh_report_on_expand_is_optional() {
        let mut quiet = trie();
        let mut chatty = ElasticTrie::new(
            cfg().with_max_depth(8).with_hh_reports(true),
            MemoryBudget::exhaustive(8),
        )
        .unwrap();
        for i in 0..10u64 {
            let e = quiet.process_packet(0x8000_0000, i, 1).unwrap();
            assert!(e.is_empty());
        }
        let mut seen = Vec::new();
        for i in 0..10u64 {
            seen.extend(chatty.process_packet(0x8000_0000, i, 1).unwrap());
        }
        assert_eq!(seen.len(), 1);
        assert_eq!(seen[0].kind, EventKind::HeavyHitter);
        assert_eq!(seen[0].prefix, p("1"));
        assert_eq!(seen[0].volume, 10);
    }
}
