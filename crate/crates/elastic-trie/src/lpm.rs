//! Longest-prefix-match storage: one fixed-capacity hash table per prefix
//! length, single-slot addressing, no probing.
//!
//! Lookup reads all levels, builds a membership bit per level (slot
//! occupied and stored key equal to the key's prefix at that length) and
//! picks the deepest set level, the software analogue of a parallel
//! register read feeding a priority encoder. A colliding slot yields a
//! clear bit, so a key whose exact node could never be inserted falls back
//! to its nearest stored ancestor.

use thiserror::Error;

use crate::config::{LEVEL_COUNT, MAX_PREFIX_LEN};
use crate::node::NodeRecord;
use crate::prefix::Prefix;

/// Conceptual width of one stored node: 112 bits of node state plus the
/// 32-bit key.
pub const NODE_BITS: u64 = 144;

/// Identity tables are never allocated beyond this level by the default
/// budget split; a full table at level 9 would already cost 9 KB.
const IDENTITY_MAX_LEVEL: u8 = 8;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("slot occupied by a different key")]
pub struct TableFull;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BudgetError {
    #[error("budget of {total_bits} bits cannot hold the root node ({NODE_BITS} bits)")]
    TooSmall { total_bits: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashKind {
    /// Direct indexing by the prefix value; collision-free when the table
    /// holds all `2^level` entries.
    Identity,
    /// CRC-32 (IEEE polynomial 0xEDB88320 reflected, seed 0xFFFFFFFF)
    /// over the four big-endian bytes of the stored prefix value. The slot
    /// is the top bits of `crc * 0x9E3779B9`: CRC is linear over GF(2), so
    /// raw low-bit masking would park sibling prefixes (which differ in
    /// exactly one bit) in the same slot for several bit positions; the
    /// fixed multiplier restores a uniform spread while staying fully
    /// reproducible.
    Crc32,
}

/// Fibonacci multiplier used to spread CRC values over power-of-two
/// tables.
const SLOT_MIX: u32 = 0x9E37_79B9;

const fn build_crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u32;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0xEDB8_8320
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

static CRC_TABLE: [u32; 256] = build_crc_table();

pub(crate) fn crc32(value: u32) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for byte in value.to_be_bytes() {
        let idx = ((crc ^ u32::from(byte)) & 0xFF) as usize;
        crc = (crc >> 8) ^ CRC_TABLE[idx];
    }
    !crc
}

fn prev_power_of_two(n: u64) -> u64 {
    if n == 0 {
        0
    } else {
        1 << (63 - n.leading_zeros())
    }
}

/// How the total bit budget is spread over the 33 per-length tables.
///
/// The default split gives full identity-indexed tables to the shortest
/// prefix lengths for as long as they fit in half the budget (capped at
/// level 8) and divides the rest evenly across the deeper levels. Capacity
/// at each level is the largest power of two of whole nodes that fits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryBudget {
    total_bits: u64,
    per_level_bits: [u64; LEVEL_COUNT],
}

impl MemoryBudget {
    pub fn default_split(total_bits: u64) -> Result<Self, BudgetError> {
        Self::split_for_depth(total_bits, MAX_PREFIX_LEN)
    }

    /// Default split restricted to levels 0..=`depth`: full identity
    /// tables for the shortest lengths while they fit in half the budget
    /// (capped at level 8), the rest divided evenly over the remaining
    /// levels. Levels beyond `depth` get nothing, so shallow runs spend
    /// their whole budget where nodes can actually live.
    pub fn split_for_depth(total_bits: u64, depth: u8) -> Result<Self, BudgetError> {
        let depth = depth.min(MAX_PREFIX_LEN);
        if total_bits < NODE_BITS {
            return Err(BudgetError::TooSmall { total_bits });
        }
        let mut identity_top: u8 = 0;
        for k in 0..=IDENTITY_MAX_LEVEL.min(depth) {
            let cost = ((1u64 << (k + 1)) - 1) * NODE_BITS;
            if cost <= total_bits / 2 {
                identity_top = k;
            }
        }
        let mut per_level_bits = [0u64; LEVEL_COUNT];
        let mut identity_cost = 0u64;
        for level in 0..=identity_top {
            let bits = (1u64 << level) * NODE_BITS;
            per_level_bits[level as usize] = bits;
            identity_cost += bits;
        }
        // Tiny budgets may not even cover a full level-0..=k block; the
        // loop above guarantees identity_cost <= total/2 except when only
        // the root fits, which the TooSmall check already covers.
        if identity_top < depth {
            let deep_levels = u64::from(depth - identity_top);
            let share = (total_bits - identity_cost) / deep_levels;
            for level in (identity_top + 1)..=depth {
                per_level_bits[level as usize] = share;
            }
        }
        Ok(MemoryBudget {
            total_bits,
            per_level_bits,
        })
    }

    pub fn from_bytes(total_bytes: u64) -> Result<Self, BudgetError> {
        Self::default_split(total_bytes * 8)
    }

    /// Explicit per-level allocation; the total is the sum.
    pub fn from_per_level(per_level_bits: [u64; LEVEL_COUNT]) -> Result<Self, BudgetError> {
        let total_bits: u64 = per_level_bits.iter().sum();
        if per_level_bits[0] < NODE_BITS {
            return Err(BudgetError::TooSmall { total_bits });
        }
        Ok(MemoryBudget {
            total_bits,
            per_level_bits,
        })
    }

    /// Collision-free identity tables on every level up to `depth`
    /// (clamped to 20 to keep allocations sane). Used to study the
    /// algorithm without memory effects.
    pub fn exhaustive(depth: u8) -> Self {
        let top = depth.min(20);
        let mut per_level_bits = [0u64; LEVEL_COUNT];
        for level in 0..=top {
            per_level_bits[level as usize] = (1u64 << level) * NODE_BITS;
        }
        for level in (top + 1)..=depth.min(MAX_PREFIX_LEN) {
            per_level_bits[level as usize] = (1u64 << 20) * NODE_BITS;
        }
        MemoryBudget {
            total_bits: per_level_bits.iter().sum(),
            per_level_bits,
        }
    }

    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }

    pub fn level_bits(&self, level: u8) -> u64 {
        self.per_level_bits[level as usize]
    }

    /// Slot count at `level`: the largest power of two of whole nodes the
    /// level's bits can hold, capped at the full `2^level` table.
    pub fn capacity(&self, level: u8) -> u64 {
        let nodes = self.per_level_bits[level as usize] / NODE_BITS;
        let full = 1u64.checked_shl(u32::from(level)).unwrap_or(u64::MAX);
        prev_power_of_two(nodes).min(full)
    }

    pub fn hash_kind(&self, level: u8) -> HashKind {
        let full = 1u64.checked_shl(u32::from(level)).unwrap_or(u64::MAX);
        if self.capacity(level) >= full {
            HashKind::Identity
        } else {
            HashKind::Crc32
        }
    }
}

/// One fixed-capacity table holding nodes of a single prefix length.
#[derive(Debug, Clone)]
pub struct LevelTable {
    level: u8,
    hash: HashKind,
    slots: Vec<Option<NodeRecord>>,
    occupied: usize,
}

impl LevelTable {
    fn new(level: u8, capacity: u64, hash: HashKind) -> Self {
        debug_assert!(capacity == 0 || capacity.is_power_of_two());
        LevelTable {
            level,
            hash,
            slots: vec![None; capacity as usize],
            occupied: 0,
        }
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn occupied(&self) -> usize {
        self.occupied
    }

    pub fn hash_kind(&self) -> HashKind {
        self.hash
    }

    #[inline]
    fn slot_index(&self, prefix_bits: u32) -> usize {
        match self.hash {
            HashKind::Identity => {
                let value = if self.level == 0 {
                    0
                } else {
                    prefix_bits >> (32 - u32::from(self.level))
                };
                (value as usize) & (self.slots.len() - 1)
            }
            HashKind::Crc32 => {
                let k = self.slots.len().trailing_zeros();
                if k == 0 {
                    return 0;
                }
                (crc32(prefix_bits).wrapping_mul(SLOT_MIX) >> (32 - k)) as usize
            }
        }
    }

    pub fn find(&self, prefix_bits: u32) -> Option<&NodeRecord> {
        if self.slots.is_empty() {
            return None;
        }
        match &self.slots[self.slot_index(prefix_bits)] {
            Some(rec) if rec.key == prefix_bits => Some(rec),
            _ => None,
        }
    }

    pub fn find_mut(&mut self, prefix_bits: u32) -> Option<&mut NodeRecord> {
        if self.slots.is_empty() {
            return None;
        }
        let idx = self.slot_index(prefix_bits);
        match &mut self.slots[idx] {
            Some(rec) if rec.key == prefix_bits => Some(rec),
            _ => None,
        }
    }

    /// Writes `record` if the slot is empty or already holds the same key;
    /// a slot occupied by a different key is never overwritten.
    pub fn insert(&mut self, record: NodeRecord) -> Result<(), TableFull> {
        if self.slots.is_empty() {
            return Err(TableFull);
        }
        let idx = self.slot_index(record.key);
        match &self.slots[idx] {
            Some(existing) if existing.key != record.key => Err(TableFull),
            existing => {
                if existing.is_none() {
                    self.occupied += 1;
                }
                self.slots[idx] = Some(record);
                Ok(())
            }
        }
    }

    /// Clears the slot only when it holds exactly this key; returns whether
    /// anything was removed.
    pub fn remove(&mut self, prefix_bits: u32) -> bool {
        if self.slots.is_empty() {
            return false;
        }
        let idx = self.slot_index(prefix_bits);
        match &self.slots[idx] {
            Some(rec) if rec.key == prefix_bits => {
                self.slots[idx] = None;
                self.occupied -= 1;
                true
            }
            _ => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeRecord> {
        self.slots.iter().filter_map(|s| s.as_ref())
    }
}

/// The full per-length table array with the root permanently installed at
/// level zero.
#[derive(Debug, Clone)]
pub struct LevelTables {
    levels: Vec<LevelTable>,
    budget: MemoryBudget,
}

impl LevelTables {
    pub fn new(budget: MemoryBudget) -> Result<Self, BudgetError> {
        if budget.capacity(0) == 0 {
            return Err(BudgetError::TooSmall {
                total_bits: budget.total_bits(),
            });
        }
        let mut levels = Vec::with_capacity(LEVEL_COUNT);
        for level in 0..LEVEL_COUNT as u8 {
            levels.push(LevelTable::new(
                level,
                budget.capacity(level),
                budget.hash_kind(level),
            ));
        }
        let mut tables = LevelTables { levels, budget };
        tables.levels[0]
            .insert(NodeRecord::fresh(0, 0))
            .expect("level 0 capacity checked above");
        Ok(tables)
    }

    pub fn budget(&self) -> &MemoryBudget {
        &self.budget
    }

    pub fn level(&self, level: u8) -> &LevelTable {
        &self.levels[level as usize]
    }

    /// Per-level membership bits for `key`: bit `l` is set when the
    /// level-`l` table holds a node whose stored key equals the key's
    /// prefix of length `l`. Bit 0 is always set.
    pub fn membership_vector(&self, key: u32) -> u64 {
        let mut v = 0u64;
        for level in 0..LEVEL_COUNT as u8 {
            let bits = key & Prefix::mask(level);
            if self.levels[level as usize].find(bits).is_some() {
                v |= 1 << level;
            }
        }
        v
    }

    /// The deepest stored node matching `key`. The root always matches.
    pub fn lookup_lpm(&self, key: u32) -> (Prefix, &NodeRecord) {
        for level in (1..LEVEL_COUNT as u8).rev() {
            let bits = key & Prefix::mask(level);
            if let Some(rec) = self.levels[level as usize].find(bits) {
                return (Prefix::from_key(key, level), rec);
            }
        }
        let root = self.levels[0].find(0).expect("root node always present");
        (Prefix::ROOT, root)
    }

    pub fn get(&self, prefix: Prefix) -> Option<&NodeRecord> {
        self.levels[prefix.len() as usize].find(prefix.bits())
    }

    pub fn get_mut(&mut self, prefix: Prefix) -> Option<&mut NodeRecord> {
        self.levels[prefix.len() as usize].find_mut(prefix.bits())
    }

    pub fn insert(&mut self, prefix: Prefix, record: NodeRecord) -> Result<(), TableFull> {
        debug_assert_eq!(prefix.bits(), record.key);
        self.levels[prefix.len() as usize].insert(record)
    }

    pub fn remove(&mut self, prefix: Prefix) -> bool {
        debug_assert!(!prefix.is_root(), "the root node is never removed");
        self.levels[prefix.len() as usize].remove(prefix.bits())
    }

    /// Nodes currently stored, 144 bits each.
    pub fn bits_in_use(&self) -> u64 {
        self.node_count() as u64 * NODE_BITS
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|t| t.occupied()).sum()
    }

    /// Deepest level with at least one stored node.
    pub fn max_level(&self) -> u8 {
        (0..LEVEL_COUNT as u8)
            .rev()
            .find(|&l| self.levels[l as usize].occupied() > 0)
            .unwrap_or(0)
    }

    /// Sorted snapshot of every stored prefix.
    pub fn prefixes(&self) -> Vec<Prefix> {
        let mut out = Vec::with_capacity(self.node_count());
        for table in &self.levels {
            for rec in table.iter() {
                out.push(Prefix::from_key(rec.key, table.level()));
            }
        }
        out.sort_by_key(|p| (p.len(), p.bits()));
        out
    }
}
