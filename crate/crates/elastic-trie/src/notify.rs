//! Push-notification channel: a bounded digest buffer with an optional
//! line-delimited JSON file sink.
//!
//! Emission never blocks the packet path: when the ring is full the event
//! is counted as dropped and forgotten. Accepted digests get contiguous
//! sequence numbers, so `accepted == dropped-free emits` holds exactly.
//!
//! File wire format, one JSON object per line, fields in this order:
//! `kind`, `prefix`, `volume`, `ts`, `window_start`, `seq`. For change
//! events `volume` is the signed expansion/collapse counter; for all other
//! kinds it is the unsigned node volume.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::Serialize;

use crate::event::{DetectionEvent, EventKind};

/// One accepted notification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Digest {
    pub seq: u64,
    pub emitted_at: u64,
    pub event: DetectionEvent,
}

impl Digest {
    /// The exact line the file sink writes for this digest.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&WireEvent::from_digest(self))
            .expect("event serialization is infallible")
    }
}

#[derive(Serialize)]
struct WireEvent<'a> {
    kind: &'a str,
    prefix: String,
    volume: serde_json::Number,
    ts: u64,
    window_start: u64,
    seq: u64,
}

impl WireEvent<'_> {
    fn from_digest(d: &Digest) -> WireEvent<'static> {
        let volume = match d.event.kind {
            EventKind::Change { counter } => serde_json::Number::from(counter),
            _ => serde_json::Number::from(d.event.volume),
        };
        WireEvent {
            kind: d.event.kind.label(),
            prefix: d.event.prefix.to_string(),
            volume,
            ts: d.event.ts,
            window_start: d.event.window_start,
            seq: d.seq,
        }
    }
}

struct SinkInner {
    ring: VecDeque<Digest>,
    capacity: usize,
    accepted: u64,
    dropped: u64,
    writer: Option<BufWriter<File>>,
    io_errors: u64,
}

/// Bounded single-producer/single-consumer event sink with drop-on-full
/// semantics. Emitter and drainer may live on different threads.
pub struct EventSink {
    inner: Mutex<SinkInner>,
}

impl EventSink {
    pub fn in_memory(capacity: usize) -> Self {
        EventSink {
            inner: Mutex::new(SinkInner {
                ring: VecDeque::with_capacity(capacity.min(4096)),
                capacity,
                accepted: 0,
                dropped: 0,
                writer: None,
                io_errors: 0,
            }),
        }
    }

    /// Additionally appends every accepted digest to a JSON-lines file.
    pub fn to_file<P: AsRef<Path>>(capacity: usize, path: P) -> io::Result<Self> {
        let file = File::create(path)?;
        let sink = Self::in_memory(capacity);
        sink.inner.lock().unwrap().writer = Some(BufWriter::new(file));
        Ok(sink)
    }

    pub fn emit(&self, event: &DetectionEvent) {
        let mut inner = self.inner.lock().unwrap();
        if inner.ring.len() >= inner.capacity {
            inner.dropped += 1;
            return;
        }
        let digest = Digest {
            seq: inner.accepted,
            emitted_at: event.ts,
            event: *event,
        };
        inner.accepted += 1;
        inner.ring.push_back(digest);
        if inner.writer.is_some() {
            let line = digest.to_json_line();
            let writer = inner.writer.as_mut().unwrap();
            if writeln!(writer, "{line}").is_err() {
                inner.io_errors += 1;
            }
        }
    }

    /// Non-destructive snapshot of the buffered digests in emission order.
    pub fn dump(&self) -> Vec<Digest> {
        self.inner.lock().unwrap().ring.iter().copied().collect()
    }

    /// Removes and returns the buffered digests; counters are unaffected.
    pub fn drain(&self) -> Vec<Digest> {
        self.inner.lock().unwrap().ring.drain(..).collect()
    }

    /// Total digests accepted since creation.
    pub fn accepted(&self) -> u64 {
        self.inner.lock().unwrap().accepted
    }

    /// Emits refused because the ring was full.
    pub fn dropped(&self) -> u64 {
        self.inner.lock().unwrap().dropped
    }

    pub fn io_errors(&self) -> u64 {
        self.inner.lock().unwrap().io_errors
    }

    pub fn flush(&self) -> io::Result<()> {
        if let Some(w) = self.inner.lock().unwrap().writer.as_mut() {
            w.flush()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefix::Prefix;

    fn event(ts: u64) -> DetectionEvent {
        DetectionEvent {
            kind: EventKind::HierarchicalHeavyHitter,
            prefix: Prefix::from_bit_str("11").unwrap(),
            volume: 13,
            ts,
            window_start: 0,
        }
    }

    #[test]
    fn sequence_numbers_are_contiguous() {
        let sink = EventSink::in_memory(16);
        for ts in 0..3 {
            sink.emit(&event(ts));
        }
        let seqs: Vec<u64> = sink.dump().iter().map(|d| d.seq).collect();
        assert_eq!(seqs, vec![0, 1, 2]);
    }

    #[test]
    fn full_ring_drops_and_accounts() {
        let sink = EventSink::in_memory(2);
        for ts in 0..3 {
            sink.emit(&event(ts));
        }
        assert_eq!(sink.accepted(), 2);
        assert_eq!(sink.dropped(), 1);
        assert_eq!(sink.accepted() + sink.dropped(), 3);
        assert_eq!(sink.dump().len(), 2);
    }

    #[test]
    fn dump_is_non_destructive_and_ordered() {
        let sink = EventSink::in_memory(16);
        sink.emit(&event(1));
        sink.emit(&DetectionEvent {
            kind: EventKind::Change { counter: -3 },
            prefix: Prefix::ROOT,
            volume: 3,
            ts: 2,
            window_start: 0,
        });
        sink.emit(&event(3));
        let first = sink.dump();
        let second = sink.dump();
        assert_eq!(first, second);
        assert_eq!(first[1].event.kind, EventKind::Change { counter: -3 });
        assert!(first.windows(2).all(|w| w[0].seq < w[1].seq));
    }

    #[test]
    fn file_sink_line_count_matches_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let sink = EventSink::to_file(2, &path).unwrap();
        for ts in 0..3 {
            sink.emit(&event(ts));
        }
        sink.flush().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["kind"], "hhh");
        assert_eq!(first["prefix"], "192.0.0.0/2");
        assert_eq!(first["seq"], 0);
        // Field order on the wire is fixed.
        assert!(text
            .lines()
            .next()
            .unwrap()
            .starts_with("{\"kind\":\"hhh\",\"prefix\":\"192.0.0.0/2\",\"volume\":13,\"ts\":0,"));
    }

    #[test]
    fn sink_is_drained_from_another_thread() {
        let sink = std::sync::Arc::new(EventSink::in_memory(64));
        let producer = {
            let sink = std::sync::Arc::clone(&sink);
            std::thread::spawn(move || {
                for ts in 0..500 {
                    sink.emit(&event(ts));
                }
            })
        };
        let mut consumed = Vec::new();
        while consumed.len() + sink.dropped() as usize != 500 {
            consumed.extend(sink.drain());
            std::thread::yield_now();
            if producer.is_finished() {
                consumed.extend(sink.drain());
                break;
            }
        }
        producer.join().unwrap();
        consumed.extend(sink.drain());
        // Loss accounting holds exactly across threads.
        assert_eq!(sink.accepted() + sink.dropped(), 500);
        assert_eq!(consumed.len() as u64, sink.accepted());
        assert!(consumed.windows(2).all(|w| w[0].seq < w[1].seq));
    }

    #[test]
    fn change_events_keep_their_sign_on_the_wire() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let sink = EventSink::to_file(8, &path).unwrap();
        sink.emit(&DetectionEvent {
            kind: EventKind::Change { counter: -42 },
            prefix: Prefix::ROOT,
            volume: 42,
            ts: 9,
            window_start: 1,
        });
        sink.flush().unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["volume"], -42);
        assert_eq!(v["kind"], "change");
    }
}
