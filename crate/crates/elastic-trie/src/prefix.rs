//! Flow-key prefixes: up to 32 value bits plus an explicit length.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrefixError {
    #[error("prefix length {0} exceeds 32")]
    LengthOutOfRange(u8),
    #[error("value {bits:#010x} has bits set below prefix length {len}")]
    UnalignedBits { bits: u32, len: u8 },
    #[error("cannot parse prefix from {0:?}")]
    Parse(String),
}

/// A left-aligned address prefix. Bit 31 of `bits` is the first prefix bit
/// and everything below bit `32 - len` is zero. `len == 0` is the root
/// prefix that matches every key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix {
    bits: u32,
    len: u8,
}

impl Prefix {
    pub const ROOT: Prefix = Prefix { bits: 0, len: 0 };

    /// Mask selecting the first `len` bits of a key.
    pub fn mask(len: u8) -> u32 {
        match len {
            0 => 0,
            n => u32::MAX << (32 - u32::from(n.min(32))),
        }
    }

    pub fn new(bits: u32, len: u8) -> Result<Self, PrefixError> {
        if len > 32 {
            return Err(PrefixError::LengthOutOfRange(len));
        }
        if bits & !Self::mask(len) != 0 {
            return Err(PrefixError::UnalignedBits { bits, len });
        }
        Ok(Prefix { bits, len })
    }

    /// Truncates `key` to its first `len` bits.
    pub fn from_key(key: u32, len: u8) -> Self {
        assert!(len <= 32, "prefix length {len} exceeds 32");
        Prefix {
            bits: key & Self::mask(len),
            len,
        }
    }

    /// Builds a prefix from a string of `0`/`1` characters, e.g. `"010"`.
    pub fn from_bit_str(s: &str) -> Result<Self, PrefixError> {
        if s.len() > 32 {
            return Err(PrefixError::LengthOutOfRange(s.len() as u8));
        }
        let mut bits = 0u32;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << (31 - i),
                _ => return Err(PrefixError::Parse(s.to_string())),
            }
        }
        Ok(Prefix {
            bits,
            len: s.len() as u8,
        })
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> u8 {
        self.len
    }

    /// True for the zero-length root prefix.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    /// True when the first `len` bits of `key` equal this prefix.
    #[inline]
    pub fn matches_key(&self, key: u32) -> bool {
        (key ^ self.bits) & Self::mask(self.len) == 0
    }

    /// The one-bit-longer prefix extended by `side` (0 = left, 1 = right).
    pub fn child(&self, side: u8) -> Option<Prefix> {
        if self.len >= 32 {
            return None;
        }
        let bit = u32::from(side & 1) << (31 - u32::from(self.len));
        Some(Prefix {
            bits: self.bits | bit,
            len: self.len + 1,
        })
    }

    /// The one-bit-shorter prefix, or `None` at the root.
    pub fn parent(&self) -> Option<Prefix> {
        if self.len == 0 {
            return None;
        }
        Some(Prefix::from_key(self.bits, self.len - 1))
    }

    /// The key bit immediately after this prefix; decides which child
    /// counter a packet belongs to. Callers must ensure `len < 32`.
    #[inline]
    pub fn key_bit_after(&self, key: u32) -> u8 {
        debug_assert!(self.len < 32);
        ((key >> (31 - u32::from(self.len))) & 1) as u8
    }

    /// The last bit of the prefix itself, `None` at the root.
    pub fn last_bit(&self) -> Option<u8> {
        if self.len == 0 {
            return None;
        }
        Some(((self.bits >> (32 - u32::from(self.len))) & 1) as u8)
    }

    /// Ancestor-or-equal test.
    pub fn contains(&self, other: &Prefix) -> bool {
        self.len <= other.len && (other.bits ^ self.bits) & Self::mask(self.len) == 0
    }

    /// Truncates to at most `len` bits.
    pub fn truncate(&self, len: u8) -> Prefix {
        if len >= self.len {
            *self
        } else {
            Prefix::from_key(self.bits, len)
        }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", Ipv4Addr::from(self.bits), self.len)
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Prefix {
    type Err = PrefixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, len) = s
            .split_once('/')
            .ok_or_else(|| PrefixError::Parse(s.to_string()))?;
        let bits = addr
            .parse::<Ipv4Addr>()
            .map(u32::from)
            .or_else(|_| addr.parse::<u32>())
            .map_err(|_| PrefixError::Parse(s.to_string()))?;
        let len: u8 = len.parse().map_err(|_| PrefixError::Parse(s.to_string()))?;
        Prefix::new(bits, len)
    }
}

impl Serialize for Prefix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Prefix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}
