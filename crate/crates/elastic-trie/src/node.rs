//! The per-node storage unit of the trie.

/// State stored for one prefix node: a counter per child subprefix, the
/// window timestamp and the stored flow-key prefix value used to detect
/// hash collisions. Matches a 144-bit hardware layout: 32 + 32 + 48 bits
/// of node state plus the 32-bit key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRecord {
    /// Volume of the left (bit 0) child subprefix.
    pub c0: u32,
    /// Volume of the right (bit 1) child subprefix.
    pub c1: u32,
    /// Microseconds since trace start, 48-bit domain; set at creation and
    /// at every counter reset.
    pub ts: u64,
    /// Left-aligned prefix value stored with the node.
    pub key: u32,
}

impl NodeRecord {
    pub fn fresh(key: u32, ts: u64) -> Self {
        NodeRecord {
            c0: 0,
            c1: 0,
            ts,
            key,
        }
    }

    #[inline]
    pub fn volume(&self) -> u64 {
        u64::from(self.c0) + u64::from(self.c1)
    }

    #[inline]
    pub fn counter(&self, side: u8) -> u32 {
        if side & 1 == 0 {
            self.c0
        } else {
            self.c1
        }
    }

    #[inline]
    pub fn add(&mut self, side: u8, weight: u64) {
        let c = if side & 1 == 0 {
            &mut self.c0
        } else {
            &mut self.c1
        };
        *c = c.saturating_add(weight.min(u64::from(u32::MAX)) as u32);
    }

    /// Zeroes both counters and renews the window timestamp.
    #[inline]
    pub fn reset(&mut self, ts: u64) {
        self.c0 = 0;
        self.c1 = 0;
        self.ts = ts;
    }

    #[inline]
    pub fn zero_side(&mut self, side: u8) {
        if side & 1 == 0 {
            self.c0 = 0;
        } else {
            self.c1 = 0;
        }
    }
}
