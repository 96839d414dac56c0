//! Michael, the 64-bit keyed MIC of 802.11i TKIP.

/// Michael key: two 32-bit little-endian words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MichaelKey(pub [u8; 8]);

impl MichaelKey {
    fn words(&self) -> (u32, u32) {
        let k = &self.0;
        (
            u32::from_le_bytes([k[0], k[1], k[2], k[3]]),
            u32::from_le_bytes([k[4], k[5], k[6], k[7]]),
        )
    }
}

impl From<[u8; 8]> for MichaelKey {
    fn from(k: [u8; 8]) -> Self {
        Self(k)
    }
}

fn xswap(v: u32) -> u32 {
    ((v & 0xFF00_FF00) >> 8) | ((v & 0x00FF_00FF) << 8)
}

fn block(mut l: u32, mut r: u32) -> (u32, u32) {
    r ^= l.rotate_left(17);
    l = l.wrapping_add(r);
    r ^= xswap(l);
    l = l.wrapping_add(r);
    r ^= l.rotate_left(3);
    l = l.wrapping_add(r);
    r ^= l.rotate_right(2);
    l = l.wrapping_add(r);
    (l, r)
}

/// Streaming Michael, so callers can feed header fields and payload without
/// concatenating them first.
#[derive(Debug, Clone)]
pub struct Michael {
    l: u32,
    r: u32,
    pending: [u8; 4],
    pending_len: usize,
}

impl Michael {
    pub fn new(key: &MichaelKey) -> Self {
        let (l, r) = key.words();
        Self { l, r, pending: [0; 4], pending_len: 0 }
    }

    fn absorb(&mut self, word: u32) {
        self.l ^= word;
        let (l, r) = block(self.l, self.r);
        self.l = l;
        self.r = r;
    }

    pub fn update(&mut self, mut data: &[u8]) {
        if self.pending_len > 0 {
            let take = (4 - self.pending_len).min(data.len());
            self.pending[self.pending_len..self.pending_len + take].copy_from_slice(&data[..take]);
            self.pending_len += take;
            data = &data[take..];
            if self.pending_len < 4 {
                return;
            }
            self.absorb(u32::from_le_bytes(self.pending));
            self.pending_len = 0;
        }
        let mut chunks = data.chunks_exact(4);
        for c in &mut chunks {
            self.absorb(u32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        }
        let rest = chunks.remainder();
        self.pending[..rest.len()].copy_from_slice(rest);
        self.pending_len = rest.len();
    }

    pub fn finalize(mut self) -> [u8; 8] {
        // 0x5A then zeros up to a word boundary, then one all-zero word.
        let mut last = [0u8; 4];
        last[..self.pending_len].copy_from_slice(&self.pending[..self.pending_len]);
        last[self.pending_len] = 0x5A;
        self.absorb(u32::from_le_bytes(last));
        self.absorb(0);
        let mut mic = [0u8; 8];
        mic[..4].copy_from_slice(&self.l.to_le_bytes());
        mic[4..].copy_from_slice(&self.r.to_le_bytes());
        mic
    }
}

pub fn michael(key: &MichaelKey, message: &[u8]) -> [u8; 8] {
    let mut m = Michael::new(key);
    m.update(message);
    m.finalize()
}

/// Number of octets Michael absorbs for an `len`-octet message, padding included.
pub fn padded_len(len: usize) -> usize {
    (len + 1).div_ceil(4) * 4 + 4
}
