//! CSV trace files with columns `ts_us,src,dst,len`.
//!
//! Addresses may be dotted quads or plain unsigned integers. Timestamps
//! must be non-decreasing unless the caller opts into bounded reordering.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::Ipv4Addr;
use std::path::Path;

use crate::record::{sort_bounded, PacketRecord, TraceError};

fn parse_addr(field: &str, line: usize) -> Result<u32, TraceError> {
    if field.contains('.') {
        field
            .parse::<Ipv4Addr>()
            .map(u32::from)
            .map_err(|_| TraceError::BadAddress {
                line,
                field: field.to_string(),
            })
    } else {
        field.parse::<u32>().map_err(|_| TraceError::BadAddress {
            line,
            field: field.to_string(),
        })
    }
}

pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Vec<PacketRecord>, TraceError> {
    read_csv_with(path, None)
}

/// `reorder_window` of `Some(n)` tolerates timestamps out of order by at
/// most `n` records instead of failing.
pub fn read_csv_with<P: AsRef<Path>>(
    path: P,
    reorder_window: Option<usize>,
) -> Result<Vec<PacketRecord>, TraceError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    let mut prev_ts = 0u64;
    let mut monotone = true;
    let mut first_violation = (0usize, 0u64, 0u64);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 && trimmed.starts_with("ts") {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(TraceError::Csv {
                line: line_no,
                msg: format!("expected 4 columns, found {}", fields.len()),
            });
        }
        let ts: u64 = fields[0].parse().map_err(|_| TraceError::Csv {
            line: line_no,
            msg: format!("bad timestamp {:?}", fields[0]),
        })?;
        let src = parse_addr(fields[1], line_no)?;
        let dst = parse_addr(fields[2], line_no)?;
        let len: u32 = fields[3].parse().map_err(|_| TraceError::Csv {
            line: line_no,
            msg: format!("bad length {:?}", fields[3]),
        })?;
        if ts < prev_ts && monotone {
            monotone = false;
            first_violation = (line_no, ts, prev_ts);
        }
        prev_ts = prev_ts.max(ts);
        records.push(PacketRecord { ts, src, dst, len });
    }
    if !monotone {
        match reorder_window {
            Some(window) => return sort_bounded(records, window),
            None => {
                let (line, ts, prev) = first_violation;
                return Err(TraceError::ReorderedTimestamp { line, ts, prev });
            }
        }
    }
    Ok(records)
}

pub fn write_csv<P: AsRef<Path>>(path: P, records: &[PacketRecord]) -> Result<(), TraceError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "ts_us,src,dst,len")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{}",
            r.ts,
            Ipv4Addr::from(r.src),
            Ipv4Addr::from(r.dst),
            r.len
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_write_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let records = vec![
            PacketRecord {
                ts: 0,
                src: 0x0a000001,
                dst: 0xc0000202,
                len: 100,
            },
            PacketRecord {
                ts: 17,
                src: 0x0a000002,
                dst: 0xc0000203,
                len: 1500,
            },
        ];
        write_csv(&path, &records).unwrap();
        assert_eq!(read_csv(&path).unwrap(), records);
    }

    #[test]
    fn bad_address_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(
            &path,
            "ts_us,src,dst,len\n0,10.0.0.1,1.2.3.4,64\n5,not-an-ip,1.2.3.4,64\n",
        )
        .unwrap();
        match read_csv(&path) {
            Err(TraceError::BadAddress { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected BadAddress, got {other:?}"),
        }
    }

    #[test]
    fn out_of_order_rejected_unless_allowed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "10,1,2,64\n5,1,2,64\n").unwrap();
        assert!(matches!(
            read_csv(&path),
            Err(TraceError::ReorderedTimestamp { line: 2, .. })
        ));
        let sorted = read_csv_with(&path, Some(8)).unwrap();
        assert_eq!(sorted[0].ts, 5);
        assert_eq!(sorted[1].ts, 10);
    }

    #[test]
    fn integer_addresses_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "0,167772161,3221226002,64\n").unwrap();
        let recs = read_csv(&path).unwrap();
        assert_eq!(recs[0].src, 0x0a000001);
    }
}
