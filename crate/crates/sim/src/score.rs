//! Recall and precision of a reported prefix set against ground truth,
//! with optional relaxed matching that accepts a reported prefix up to a
//! few bits coarser than the truth entry it covers.

use std::collections::BTreeSet;

use elastic_trie::Prefix;

/// Matches reported prefixes one-to-one against truth entries. A reported
/// prefix may claim a truth prefix it equals or is an ancestor of by at
/// most `relax_bits` bits. Matching is greedy: reported prefixes are taken
/// longest first and each claims the longest still-unmatched truth entry
/// it covers, so nothing is credited twice.
///
/// Returns `(recall, precision)`; either is 1.0 when its denominator is
/// empty.
pub fn score(reported: &BTreeSet<Prefix>, truth: &BTreeSet<Prefix>, relax_bits: u8) -> (f64, f64) {
    let mut reported_sorted: Vec<Prefix> = reported.iter().copied().collect();
    reported_sorted.sort_by_key(|p| (std::cmp::Reverse(p.len()), p.bits()));
    let truth_sorted: Vec<Prefix> = truth.iter().copied().collect();
    let mut claimed = vec![false; truth_sorted.len()];
    let mut matched = 0usize;
    for r in &reported_sorted {
        let candidate = truth_sorted
            .iter()
            .enumerate()
            .filter(|(i, t)| {
                !claimed[*i]
                    && t.len() >= r.len()
                    && t.len() - r.len() <= relax_bits
                    && r.contains(t)
            })
            .max_by_key(|(_, t)| t.len());
        if let Some((i, _)) = candidate {
            claimed[i] = true;
            matched += 1;
        }
    }
    let recall = if truth_sorted.is_empty() {
        1.0
    } else {
        matched as f64 / truth_sorted.len() as f64
    };
    let precision = if reported_sorted.is_empty() {
        1.0
    } else {
        matched as f64 / reported_sorted.len() as f64
    };
    (recall, precision)
}
