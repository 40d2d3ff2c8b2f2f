//! Minimal classic-pcap reader: extracts IPv4 source/destination/length,
//! skips everything else, rebases timestamps to the first record.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::record::{PacketRecord, TraceError};

const MAGIC_US: u32 = 0xA1B2_C3D4;
const MAGIC_US_SWAP: u32 = 0xD4C3_B2A1;
const MAGIC_NS: u32 = 0xA1B2_3C4D;
const MAGIC_NS_SWAP: u32 = 0x4D3C_B2A1;

const LINKTYPE_ETHERNET: u32 = 1;
const LINKTYPE_RAW: u32 = 101;

/// A decoded capture plus what had to be left out of it.
#[derive(Debug)]
pub struct PcapTrace {
    pub records: Vec<PacketRecord>,
    /// Frames that were not IPv4.
    pub skipped: u64,
    /// True when the file ended in the middle of a record; parsing stops
    /// there and keeps everything before it.
    pub truncated: bool,
    pub link_type: u32,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    swap: bool,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    fn u32(&mut self) -> u32 {
        let raw = u32::from_le_bytes(self.data[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        if self.swap {
            raw.swap_bytes()
        } else {
            raw
        }
    }

    fn skip(&mut self, n: usize) {
        self.pos += n;
    }

    fn bytes(&mut self, n: usize) -> &'a [u8] {
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        out
    }
}

fn ipv4_fields(payload: &[u8]) -> Option<(u32, u32, u32)> {
    if payload.len() < 20 || payload[0] >> 4 != 4 {
        return None;
    }
    let total_len = u32::from(u16::from_be_bytes([payload[2], payload[3]]));
    let src = u32::from_be_bytes(payload[12..16].try_into().unwrap());
    let dst = u32::from_be_bytes(payload[16..20].try_into().unwrap());
    Some((src, dst, total_len))
}

/// Finds the IPv4 header inside one captured frame.
fn extract_ipv4(link_type: u32, frame: &[u8]) -> Option<(u32, u32, u32)> {
    match link_type {
        LINKTYPE_RAW => ipv4_fields(frame),
        LINKTYPE_ETHERNET => {
            if frame.len() < 14 {
                return None;
            }
            let mut offset = 12;
            let mut ethertype = u16::from_be_bytes([frame[offset], frame[offset + 1]]);
            offset += 2;
            // Peel up to two VLAN tags.
            for _ in 0..2 {
                if ethertype == 0x8100 || ethertype == 0x88A8 {
                    if frame.len() < offset + 4 {
                        return None;
                    }
                    ethertype = u16::from_be_bytes([frame[offset + 2], frame[offset + 3]]);
                    offset += 4;
                }
            }
            if ethertype != 0x0800 {
                return None;
            }
            ipv4_fields(&frame[offset..])
        }
        _ => None,
    }
}

pub fn read_pcap<P: AsRef<Path>>(path: P) -> Result<PcapTrace, TraceError> {
    let data = fs::read(path)?;
    if data.len() < 24 {
        return Err(TraceError::MalformedCapture(format!(
            "file holds {} bytes, global header needs 24",
            data.len()
        )));
    }
    let raw_magic = u32::from_le_bytes(data[..4].try_into().unwrap());
    let (swap, ns) = match raw_magic {
        MAGIC_US => (false, false),
        MAGIC_US_SWAP => (true, false),
        MAGIC_NS => (false, true),
        MAGIC_NS_SWAP => (true, true),
        other => return Err(TraceError::NotPcap(other)),
    };
    let mut cur = Cursor {
        data: &data,
        pos: 4,
        swap,
    };
    cur.skip(16); // version, thiszone, sigfigs, snaplen
    let link_type = cur.u32();
    if link_type != LINKTYPE_ETHERNET && link_type != LINKTYPE_RAW {
        return Err(TraceError::UnsupportedLinkType(link_type));
    }

    let mut records = Vec::new();
    let mut skipped = 0u64;
    let mut truncated = false;
    let mut epoch: Option<u64> = None;
    loop {
        if cur.remaining() == 0 {
            break;
        }
        if cur.remaining() < 16 {
            truncated = true;
            break;
        }
        let ts_sec = u64::from(cur.u32());
        let ts_frac = u64::from(cur.u32());
        let incl_len = cur.u32() as usize;
        let _orig_len = cur.u32();
        if cur.remaining() < incl_len {
            truncated = true;
            break;
        }
        let frame = cur.bytes(incl_len);
        let micros = if ns { ts_frac / 1_000 } else { ts_frac };
        let ts_abs = ts_sec * 1_000_000 + micros;
        let base = *epoch.get_or_insert(ts_abs);
        match extract_ipv4(link_type, frame) {
            Some((src, dst, len)) => records.push(PacketRecord {
                ts: ts_abs.saturating_sub(base),
                src,
                dst,
                len,
            }),
            None => skipped += 1,
        }
    }
    Ok(PcapTrace {
        records,
        skipped,
        truncated,
        link_type,
    })
}

/// Writes records as a classic microsecond pcap with minimal
/// Ethernet+IPv4 frames; enough for fixtures and interchange.
pub fn write_pcap<P: AsRef<Path>>(path: P, records: &[PacketRecord]) -> Result<(), TraceError> {
    let mut out = Vec::with_capacity(24 + records.len() * (16 + 34));
    out.extend_from_slice(&MAGIC_US.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&65_535u32.to_le_bytes());
    out.extend_from_slice(&LINKTYPE_ETHERNET.to_le_bytes());
    for r in records {
        let mut frame = Vec::with_capacity(34);
        frame.extend_from_slice(&[0u8; 12]); // MAC addresses
        frame.extend_from_slice(&0x0800u16.to_be_bytes());
        let total_len = (r.len.clamp(20, 65_535)) as u16;
        frame.push(0x45);
        frame.push(0);
        frame.extend_from_slice(&total_len.to_be_bytes());
        frame.extend_from_slice(&[0, 0, 0, 0]); // id, flags+fragment
        frame.push(64); // ttl
        frame.push(17); // protocol
        frame.extend_from_slice(&[0, 0]); // checksum, unused here
        frame.extend_from_slice(&r.src.to_be_bytes());
        frame.extend_from_slice(&r.dst.to_be_bytes());
        out.extend_from_slice(&((r.ts / 1_000_000) as u32).to_le_bytes());
        out.extend_from_slice(&((r.ts % 1_000_000) as u32).to_le_bytes());
        out.extend_from_slice(&(frame.len() as u32).to_le_bytes());
        out.extend_from_slice(&(frame.len() as u32).to_le_bytes());
        out.extend_from_slice(&frame);
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}
