//! Synthetic workloads with planted ground truth: Zipf-ish background
//! sources, heavy prefixes taking fixed traffic shares, and optional
//! DoS/scan injection. Generation is fully determined by the spec and a
//! seed.

use std::net::Ipv4Addr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use elastic_trie::Prefix;

use crate::record::PacketRecord;

const DST_SALT: u64 = 0x5851_F42D_4C95_7F2D;
const POOL_SALT: u64 = 0x1405_7B7E_F767_814F;
const SRC_SALT: u64 = 0x2545_F491_4F6C_DD1D;
const ATTACK_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("planted shares sum to {0}, more than the whole trace")]
    SharesExceedOne(f64),
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
}

fn scramble(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

pub(crate) fn de_addr<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(u32),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(n) => Ok(n),
        Raw::Text(s) => s
            .parse::<Ipv4Addr>()
            .map(u32::from)
            .or_else(|_| s.parse::<u32>())
            .map_err(|_| serde::de::Error::custom(format!("cannot parse address {s:?}"))),
    }
}

pub(crate) fn ser_addr<S: Serializer>(addr: &u32, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&Ipv4Addr::from(*addr))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZipfSpec {
    pub population: u64,
    pub exponent: f64,
}

impl Default for ZipfSpec {
    fn default() -> Self {
        ZipfSpec {
            population: 5_000,
            exponent: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlantedHeavy {
    pub prefix: Prefix,
    pub share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackKind {
    /// One source floods one destination.
    Dos {
        #[serde(deserialize_with = "de_addr", serialize_with = "ser_addr")]
        dst: u32,
    },
    /// One source contacts many distinct destinations.
    Scan { dst_count: u32 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Attack {
    #[serde(flatten)]
    pub kind: AttackKind,
    pub start_s: f64,
    pub rate_pps: u64,
    #[serde(deserialize_with = "de_addr", serialize_with = "ser_addr")]
    pub source: u32,
}

fn default_duration() -> f64 {
    60.0
}
fn default_rate() -> u64 {
    10_000
}
fn default_dsts_per_source() -> u32 {
    3
}
fn default_len_range() -> (u32, u32) {
    (64, 1500)
}

/// Declarative description of a synthetic trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_rate")]
    pub rate_pps: u64,
    #[serde(default)]
    pub zipf: ZipfSpec,
    /// How many distinct destinations each non-attack source talks to.
    #[serde(default = "default_dsts_per_source")]
    pub dsts_per_source: u32,
    /// Optional shared destination pool size; confines all background
    /// destinations to this many addresses.
    #[serde(default)]
    pub dst_pool: Option<u64>,
    /// Inclusive packet length range in bytes.
    #[serde(default = "default_len_range")]
    pub packet_len: (u32, u32),
    #[serde(default)]
    pub heavies: Vec<PlantedHeavy>,
    #[serde(default)]
    pub attack: Option<Attack>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            duration_s: default_duration(),
            rate_pps: default_rate(),
            zipf: ZipfSpec::default(),
            dsts_per_source: default_dsts_per_source(),
            dst_pool: None,
            packet_len: default_len_range(),
            heavies: Vec::new(),
            attack: None,
        }
    }
}

impl SyntheticSpec {
    pub fn duration_us(&self) -> u64 {
        (self.duration_s * 1e6) as u64
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let total: f64 = self.heavies.iter().map(|h| h.share).sum();
        if total > 1.0 + 1e-9 {
            return Err(SynthError::SharesExceedOne(total));
        }
        if self.heavies.iter().any(|h| h.share < 0.0) {
            return Err(SynthError::Invalid("negative heavy share".into()));
        }
        if self.duration_s <= 0.0 || self.rate_pps == 0 {
            return Err(SynthError::Invalid(
                "duration and rate must be positive".into(),
            ));
        }
        if self.zipf.population == 0 || self.zipf.exponent <= 0.0 {
            return Err(SynthError::Invalid(
                "zipf population and exponent must be positive".into(),
            ));
        }
        if self.packet_len.0 > self.packet_len.1 || self.packet_len.0 == 0 {
            return Err(SynthError::Invalid("bad packet length range".into()));
        }
        if self.dsts_per_source == 0 {
            return Err(SynthError::Invalid(
                "dsts_per_source must be positive".into(),
            ));
        }
        if let Some(a) = &self.attack {
            if a.rate_pps == 0 || a.start_s < 0.0 {
                return Err(SynthError::Invalid("bad attack rate or start".into()));
            }
            if let AttackKind::Scan { dst_count } = a.kind {
                if dst_count == 0 {
                    return Err(SynthError::Invalid(
                        "scan needs at least one destination".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The deepest planted prefix, if any; used for learning-phase
    /// measurements.
    pub fn deepest_heavy(&self) -> Option<Prefix> {
        self.heavies
            .iter()
            .max_by_key(|h| h.prefix.len())
            .map(|h| h.prefix)
    }
}

fn heavy_source(rng: &mut ChaCha8Rng, prefix: Prefix) -> u32 {
    let free_bits = 32 - u32::from(prefix.len());
    if free_bits == 0 {
        prefix.bits()
    } else {
        let low = rng.random_range(0..(1u64 << free_bits)) as u32;
        prefix.bits() | low
    }
}

fn destination_for(spec: &SyntheticSpec, rng: &mut ChaCha8Rng, src: u32) -> u32 {
    let j = u64::from(rng.random_range(0..spec.dsts_per_source));
    let raw = scramble((u64::from(src) << 8 | j) ^ DST_SALT);
    match spec.dst_pool {
        Some(pool) => scramble((raw % pool) ^ POOL_SALT) as u32,
        None => raw as u32,
    }
}

/// Materializes the trace for `spec`; the output is byte-identical for a
/// fixed (spec, seed) pair.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<Vec<PacketRecord>, SynthError> {
    spec.validate()?;
    let duration = spec.duration_us();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(spec.zipf.population as f64, spec.zipf.exponent)
        .map_err(|e| SynthError::Invalid(format!("zipf: {e}")))?;
    let cumulative: Vec<(f64, Prefix)> = {
        let mut acc = 0.0;
        spec.heavies
            .iter()
            .map(|h| {
                acc += h.share;
                (acc, h.prefix)
            })
            .collect()
    };
    let (len_min, len_max) = spec.packet_len;

    let mut base = Vec::new();
    let mut i = 0u64;
    loop {
        let ts = i * 1_000_000 / spec.rate_pps;
        if ts >= duration {
            break;
        }
        let class = rng.random::<f64>();
        let src = match cumulative.iter().find(|(cum, _)| class < *cum) {
            Some((_, prefix)) => heavy_source(&mut rng, *prefix),
            None => {
                let rank = zipf.sample(&mut rng) as u64;
                scramble(rank ^ SRC_SALT) as u32
            }
        };
        let dst = destination_for(spec, &mut rng, src);
        let len = rng.random_range(len_min..=len_max);
        base.push(PacketRecord { ts, src, dst, len });
        i += 1;
    }

    let mut attack_pkts = Vec::new();
    if let Some(attack) = &spec.attack {
        let mut arng = ChaCha8Rng::seed_from_u64(seed ^ ATTACK_SALT);
        let scan_dsts: Vec<u32> = match attack.kind {
            AttackKind::Scan { dst_count } => {
                (0..dst_count).map(|_| arng.random::<u32>()).collect()
            }
            AttackKind::Dos { .. } => Vec::new(),
        };
        let start = (attack.start_s * 1e6) as u64;
        let mut k = 0u64;
        loop {
            let ts = start + k * 1_000_000 / attack.rate_pps;
            if ts >= duration {
                break;
            }
            let dst = match attack.kind {
                AttackKind::Dos { dst } => dst,
                AttackKind::Scan { .. } => scan_dsts[(k % scan_dsts.len() as u64) as usize],
            };
            let len = arng.random_range(len_min..=len_max);
            attack_pkts.push(PacketRecord {
                ts,
                src: attack.source,
                dst,
                len,
            });
            k += 1;
        }
    }

    // Merge the two sorted streams; base wins ties.
    let mut out = Vec::with_capacity(base.len() + attack_pkts.len());
    let (mut bi, mut ai) = (0usize, 0usize);
    while bi < base.len() || ai < attack_pkts.len() {
        let take_base = match (base.get(bi), attack_pkts.get(ai)) {
            (Some(b), Some(a)) => b.ts <= a.ts,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if take_base {
            out.push(base[bi]);
            bi += 1;
        } else {
            out.push(attack_pkts[ai]);
            ai += 1;
        }
    }
    Ok(out)
}
