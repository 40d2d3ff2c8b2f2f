//! Exact per-window ground truth over materialized packets.
//!
//! A prefix is a heavy hitter when its total volume reaches the threshold.
//! It is a hierarchical heavy hitter when its volume still reaches the
//! threshold after excluding the volume of all its hierarchical-heavy
//! descendant prefixes. Superspreaders apply the same hierarchy to counts
//! of distinct destinations per source prefix.

use std::collections::{BTreeSet, HashMap, HashSet};

use elastic_trie::Prefix;

/// Ground truth for one evaluation window.
#[derive(Debug, Clone, Default)]
pub struct WindowTruth {
    pub index: u64,
    pub hh: BTreeSet<Prefix>,
    pub hhh: BTreeSet<Prefix>,
    pub spreaders: BTreeSet<Prefix>,
}

/// Total volume per prefix, all lengths up to `depth`.
pub fn prefix_volumes(packets: &[(u32, u64)], depth: u8) -> HashMap<Prefix, u64> {
    let mut volumes = HashMap::new();
    for &(key, weight) in packets {
        for len in 0..=depth {
            *volumes.entry(Prefix::from_key(key, len)).or_insert(0) += weight;
        }
    }
    volumes
}

/// Every prefix whose volume reaches `threshold`.
pub fn exact_hh(packets: &[(u32, u64)], threshold: u64, depth: u8) -> BTreeSet<Prefix> {
    prefix_volumes(packets, depth)
        .into_iter()
        .filter(|&(_, v)| v >= threshold)
        .map(|(p, _)| p)
        .collect()
}

/// Bottom-up hierarchical pass over a volume map: walking from the deepest
/// level towards the root, a prefix qualifies when its volume minus
/// everything already claimed by qualifying descendants reaches the
/// threshold; a qualifying prefix claims its full volume from ancestors.
pub fn hierarchical_heavies(
    volumes: &HashMap<Prefix, u64>,
    threshold: u64,
    depth: u8,
) -> BTreeSet<Prefix> {
    let mut by_level: Vec<Vec<(Prefix, u64)>> = vec![Vec::new(); usize::from(depth) + 1];
    for (&p, &v) in volumes {
        if p.len() <= depth {
            by_level[usize::from(p.len())].push((p, v));
        }
    }
    let mut claimed: HashMap<Prefix, u64> = HashMap::new();
    let mut result = BTreeSet::new();
    for level in (0..=usize::from(depth)).rev() {
        for &(prefix, volume) in &by_level[level] {
            let claimed_below = if (level as u8) < depth {
                prefix
                    .child(0)
                    .and_then(|c| claimed.get(&c).copied())
                    .unwrap_or(0)
                    + prefix
                        .child(1)
                        .and_then(|c| claimed.get(&c).copied())
                        .unwrap_or(0)
            } else {
                0
            };
            let residual = volume.saturating_sub(claimed_below);
            if residual >= threshold {
                result.insert(prefix);
                claimed.insert(prefix, volume);
            } else if claimed_below > 0 {
                claimed.insert(prefix, claimed_below);
            }
        }
    }
    result
}

/// Hierarchical heavy hitters by the bottom-up residual pass.
pub fn exact_hhh(packets: &[(u32, u64)], threshold: u64, depth: u8) -> BTreeSet<Prefix> {
    hierarchical_heavies(&prefix_volumes(packets, depth), threshold, depth)
}

/// Independent route to the same set: enumerate every prefix top-down and
/// decide membership recursively, subtracting the volume of maximal
/// qualifying descendants found by DFS. Kept separate from the bottom-up
/// pass on purpose so the two can cross-check each other.
pub fn exact_hhh_enumerated(packets: &[(u32, u64)], threshold: u64, depth: u8) -> BTreeSet<Prefix> {
    hierarchical_heavies_enumerated(&prefix_volumes(packets, depth), threshold, depth)
}

/// Top-down route over an arbitrary volume map; see
/// [`exact_hhh_enumerated`].
pub fn hierarchical_heavies_enumerated(
    volumes: &HashMap<Prefix, u64>,
    threshold: u64,
    depth: u8,
) -> BTreeSet<Prefix> {
    fn is_hhh(
        prefix: Prefix,
        threshold: u64,
        depth: u8,
        volumes: &HashMap<Prefix, u64>,
        memo: &mut HashMap<Prefix, bool>,
    ) -> bool {
        if let Some(&known) = memo.get(&prefix) {
            return known;
        }
        let volume = volumes.get(&prefix).copied().unwrap_or(0);
        let claimed = claimed_below(prefix, threshold, depth, volumes, memo);
        let verdict = volume.saturating_sub(claimed) >= threshold;
        memo.insert(prefix, verdict);
        verdict
    }

    /// Volume of the maximal qualifying descendants of `prefix`: DFS that
    /// stops at the first qualifying prefix on each path.
    fn claimed_below(
        prefix: Prefix,
        threshold: u64,
        depth: u8,
        volumes: &HashMap<Prefix, u64>,
        memo: &mut HashMap<Prefix, bool>,
    ) -> u64 {
        if prefix.len() >= depth {
            return 0;
        }
        let mut sum = 0;
        for side in 0..2u8 {
            let child = prefix.child(side).expect("below max depth");
            if !volumes.contains_key(&child) {
                continue;
            }
            if is_hhh(child, threshold, depth, volumes, memo) {
                sum += volumes[&child];
            } else {
                sum += claimed_below(child, threshold, depth, volumes, memo);
            }
        }
        sum
    }

    let mut memo: HashMap<Prefix, bool> = HashMap::new();
    let mut result = BTreeSet::new();
    for &prefix in volumes.keys() {
        if is_hhh(prefix, threshold, depth, volumes, &mut memo) {
            result.insert(prefix);
        }
    }
    result
}

/// Distinct destinations per source prefix, hierarchically thresholded.
pub fn exact_spreaders(flows: &[(u32, u32)], min_distinct: u64, depth: u8) -> BTreeSet<Prefix> {
    let mut sets: HashMap<Prefix, HashSet<u32>> = HashMap::new();
    for &(src, dst) in flows {
        for len in 0..=depth {
            sets.entry(Prefix::from_key(src, len))
                .or_default()
                .insert(dst);
        }
    }
    let counts: HashMap<Prefix, u64> = sets
        .into_iter()
        .map(|(p, dsts)| (p, dsts.len() as u64))
        .collect();
    hierarchical_heavies(&counts, min_distinct, depth)
}
