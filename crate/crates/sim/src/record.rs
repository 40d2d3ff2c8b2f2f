//! Normalized trace records and trace-level errors.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

/// One packet: timestamp in microseconds from trace start, source and
/// destination addresses, wire length in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketRecord {
    pub ts: u64,
    pub src: u32,
    pub dst: u32,
    pub len: u32,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("line {line}: cannot parse address {field:?}")]
    BadAddress { line: usize, field: String },
    #[error("line {line}: timestamp {ts} goes backwards (previous {prev})")]
    ReorderedTimestamp { line: usize, ts: u64, prev: u64 },
    #[error("reordering exceeds the {window}-record window")]
    ReorderWindowExceeded { window: usize },
    #[error("not a pcap capture (magic {0:#010x})")]
    NotPcap(u32),
    #[error("unsupported link type {0}")]
    UnsupportedLinkType(u32),
    #[error("malformed capture: {0}")]
    MalformedCapture(String),
}

/// Sorts records whose timestamps are out of order by at most `window`
/// positions; fails if the stream is more disordered than that.
pub fn sort_bounded(
    records: impl IntoIterator<Item = PacketRecord>,
    window: usize,
) -> Result<Vec<PacketRecord>, TraceError> {
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut held: Vec<PacketRecord> = Vec::new();
    let mut out = Vec::new();
    let mut last_ts = 0u64;
    for rec in records {
        held.push(rec);
        heap.push(Reverse((rec.ts, held.len() - 1)));
        if heap.len() > window {
            let Reverse((ts, idx)) = heap.pop().expect("heap non-empty");
            if ts < last_ts {
                return Err(TraceError::ReorderWindowExceeded { window });
            }
            last_ts = ts;
            out.push(held[idx]);
        }
    }
    while let Some(Reverse((ts, idx))) = heap.pop() {
        if ts < last_ts {
            return Err(TraceError::ReorderWindowExceeded { window });
        }
        last_ts = ts;
        out.push(held[idx]);
    }
    Ok(out)
}
