//! Bloom filter gating counter updates in superspreader mode.
//!
//! The element is the pair (matched source prefix, destination address), so
//! node counters advance once per distinct flow instead of once per packet.
//! Bit positions come from the standard double-hashing construction
//! `h1 + i * h2` over two FNV-1a 64-bit hashes with distinct seeds; the
//! second hash is forced odd so the probe sequence never degenerates.

use crate::prefix::Prefix;

const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;
const FNV_SEED_A: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_SEED_B: u64 = 0x8422_2325_CBF2_9CE4;

fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

#[derive(Debug, Clone)]
pub struct BloomFilter {
    words: Vec<u64>,
    m_bits: u64,
    k: u32,
    inserted: u64,
}

impl BloomFilter {
    pub fn new(m_bits: u64, k: u32) -> Self {
        assert!(m_bits >= 1, "filter needs at least one bit");
        assert!(k >= 1, "filter needs at least one hash");
        let words = m_bits.div_ceil(64) as usize;
        BloomFilter {
            words: vec![0; words],
            m_bits,
            k,
            inserted: 0,
        }
    }

    pub fn from_bytes(bytes: u64, k: u32) -> Self {
        Self::new(bytes.max(1) * 8, k)
    }

    fn key_bytes(prefix: Prefix, element: u32) -> [u8; 9] {
        let mut key = [0u8; 9];
        key[..4].copy_from_slice(&prefix.bits().to_be_bytes());
        key[4] = prefix.len();
        key[5..].copy_from_slice(&element.to_be_bytes());
        key
    }

    fn bit_positions(&self, key: &[u8]) -> impl Iterator<Item = u64> + '_ {
        let h1 = fnv1a64(FNV_SEED_A, key);
        let h2 = fnv1a64(FNV_SEED_B, key) | 1;
        (0..u64::from(self.k)).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % self.m_bits)
    }

    /// Marks (prefix, element) as seen; returns true when it was new, i.e.
    /// at least one of its bits was still clear.
    pub fn test_and_set(&mut self, prefix: Prefix, element: u32) -> bool {
        let key = Self::key_bytes(prefix, element);
        let mut new = false;
        let positions: Vec<u64> = self.bit_positions(&key).collect();
        for pos in positions {
            let word = (pos / 64) as usize;
            let mask = 1u64 << (pos % 64);
            if self.words[word] & mask == 0 {
                new = true;
                self.words[word] |= mask;
            }
        }
        if new {
            self.inserted += 1;
        }
        new
    }

    pub fn contains(&self, prefix: Prefix, element: u32) -> bool {
        let key = Self::key_bytes(prefix, element);
        self.bit_positions(&key)
            .all(|pos| self.words[(pos / 64) as usize] & (1 << (pos % 64)) != 0)
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
        self.inserted = 0;
    }

    /// Elements inserted since the last clear.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn bit_size(&self) -> u64 {
        self.m_bits
    }

    pub fn hash_count(&self) -> u32 {
        self.k
    }

    /// `(1 - e^(-k*n/m))^k` for the current insert count.
    pub fn estimated_fp_rate(&self) -> f64 {
        let k = f64::from(self.k);
        let exponent = -k * self.inserted as f64 / self.m_bits as f64;
        (1.0 - exponent.exp()).powf(k)
    }

    pub fn ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }
}
