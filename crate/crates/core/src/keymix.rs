//! TKIP per-packet key mixing.
//!
//! Phase 1 folds the temporal key, the transmitter address and the upper 32
//! bits of the TSC into an 80-bit P1K. Phase 2 combines P1K, the temporal key
//! and the lower 16 TSC bits into the 16-octet RC4 seed. Word construction is
//! little-endian wherever octet order matters.

use std::fmt;

use crate::error::{Error, Result};
use crate::ops::OpCounters;

/// 128-bit temporal key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TemporalKey(pub [u8; 16]);

impl fmt::Debug for TemporalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TemporalKey(..)")
    }
}

impl TemporalKey {
    fn word(&self, i: usize) -> u16 {
        mk16(self.0[i + 1], self.0[i])
    }
}

/// 48-bit MAC address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct MacAddr(pub [u8; 6]);

pub type TransmitterAddress = MacAddr;

impl fmt::Debug for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.0;
        write!(f, "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", a[0], a[1], a[2], a[3], a[4], a[5])
    }
}

/// The 48-bit TKIP sequence counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Tsc48 {
    pub iv32: u32,
    pub iv16: u16,
}

impl Tsc48 {
    pub const MAX: u64 = (1 << 48) - 1;

    pub const fn new(iv32: u32, iv16: u16) -> Self {
        Self { iv32, iv16 }
    }

    pub fn as_u64(self) -> u64 {
        ((self.iv32 as u64) << 16) | self.iv16 as u64
    }

    /// Truncates to 48 bits.
    pub fn from_u64(v: u64) -> Self {
        Self { iv32: (v >> 16) as u32, iv16: v as u16 }
    }

    /// Next counter value, carrying iv16 into iv32. `None` past 2^48 - 1.
    pub fn successor(self) -> Option<Self> {
        let v = self.as_u64();
        (v < Self::MAX).then(|| Self::from_u64(v + 1))
    }

    /// TSC0..TSC5, least significant first.
    pub fn to_le_bytes(self) -> [u8; 6] {
        let v = self.as_u64().to_le_bytes();
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    }

    pub fn from_le_bytes(b: [u8; 6]) -> Self {
        let mut v = [0u8; 8];
        v[..6].copy_from_slice(&b);
        Self::from_u64(u64::from_le_bytes(v))
    }
}

impl fmt::Display for Tsc48 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08x}:{:04x}", self.iv32, self.iv16)
    }
}

/// 80-bit phase-1 output (TTAK).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct P1k(pub [u16; 5]);

impl P1k {
    /// Hex form used in vector files: five 16-bit words, each most significant digit first.
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|w| format!("{w:04x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::InvalidHex(e.to_string()))?;
        if bytes.len() != 10 {
            return Err(Error::InvalidHex(format!("P1K needs 10 octets, got {}", bytes.len())));
        }
        let mut words = [0u16; 5];
        for (w, c) in words.iter_mut().zip(bytes.chunks_exact(2)) {
            *w = mk16(c[0], c[1]);
        }
        Ok(Self(words))
    }
}

/// 128-bit per-packet RC4 key: 3 WEP IV octets followed by 13 base-key octets.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WepSeed(pub [u8; 16]);

impl fmt::Debug for WepSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WepSeed({})", hex::encode(self.0))
    }
}

impl WepSeed {
    pub fn wep_iv(&self) -> [u8; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn iv16(&self) -> u16 {
        mk16(self.0[0], self.0[2])
    }
}

pub const fn mk16(hi: u8, lo: u8) -> u16 {
    ((hi as u16) << 8) | lo as u16
}

const fn lo8(v: u16) -> u8 {
    v as u8
}

const fn hi8(v: u16) -> u8 {
    (v >> 8) as u8
}

/// Phase-1 iteration count.
const PHASE1_ROUNDS: u16 = 8;

/// First 802.11i TKIP S-box table; the second table is this one with octets swapped.
#[rustfmt::skip]
const SBOX_TABLE: [u16; 256] = [
    0xC6A5, 0xF884, 0xEE99, 0xF68D, 0xFF0D, 0xD6BD, 0xDEB1, 0x9154,
    0x6050, 0x0203, 0xCEA9, 0x567D, 0xE719, 0xB562, 0x4DE6, 0xEC9A,
    0x8F45, 0x1F9D, 0x8940, 0xFA87, 0xEF15, 0xB2EB, 0x8EC9, 0xFB0B,
    0x41EC, 0xB367, 0x5FFD, 0x45EA, 0x23BF, 0x53F7, 0xE496, 0x9B5B,
    0x75C2, 0xE11C, 0x3DAE, 0x4C6A, 0x6C5A, 0x7E41, 0xF502, 0x834F,
    0x685C, 0x51F4, 0xD134, 0xF908, 0xE293, 0xAB73, 0x6253, 0x2A3F,
    0x080C, 0x9552, 0x4665, 0x9D5E, 0x3028, 0x37A1, 0x0A0F, 0x2FB5,
    0x0E09, 0x2436, 0x1B9B, 0xDF3D, 0xCD26, 0x4E69, 0x7FCD, 0xEA9F,
    0x121B, 0x1D9E, 0x5874, 0x342E, 0x362D, 0xDCB2, 0xB4EE, 0x5BFB,
    0xA4F6, 0x764D, 0xB761, 0x7DCE, 0x527B, 0xDD3E, 0x5E71, 0x1397,
    0xA6F5, 0xB968, 0x0000, 0xC12C, 0x4060, 0xE31F, 0x79C8, 0xB6ED,
    0xD4BE, 0x8D46, 0x67D9, 0x724B, 0x94DE, 0x98D4, 0xB0E8, 0x854A,
    0xBB6B, 0xC52A, 0x4FE5, 0xED16, 0x86C5, 0x9AD7, 0x6655, 0x1194,
    0x8ACF, 0xE910, 0x0406, 0xFE81, 0xA0F0, 0x7844, 0x25BA, 0x4BE3,
    0xA2F3, 0x5DFE, 0x80C0, 0x058A, 0x3FAD, 0x21BC, 0x7048, 0xF104,
    0x63DF, 0x77C1, 0xAF75, 0x4263, 0x2030, 0xE51A, 0xFD0E, 0xBF6D,
    0x814C, 0x1814, 0x2635, 0xC32F, 0xBEE1, 0x35A2, 0x88CC, 0x2E39,
    0x9357, 0x55F2, 0xFC82, 0x7A47, 0xC8AC, 0xBAE7, 0x322B, 0xE695,
    0xC0A0, 0x1998, 0x9ED1, 0xA37F, 0x4466, 0x547E, 0x3BAB, 0x0B83,
    0x8CCA, 0xC729, 0x6BD3, 0x283C, 0xA779, 0xBCE2, 0x161D, 0xAD76,
    0xDB3B, 0x6456, 0x744E, 0x141E, 0x92DB, 0x0C0A, 0x486C, 0xB8E4,
    0x9F5D, 0xBD6E, 0x43EF, 0xC4A6, 0x39A8, 0x31A4, 0xD337, 0xF28B,
    0xD532, 0x8B43, 0x6E59, 0xDAB7, 0x018C, 0xB164, 0x9CD2, 0x49E0,
    0xD8B4, 0xACFA, 0xF307, 0xCF25, 0xCAAF, 0xF48E, 0x47E9, 0x1018,
    0x6FD5, 0xF088, 0x4A6F, 0x5C72, 0x3824, 0x57F1, 0x73C7, 0x9751,
    0xCB23, 0xA17C, 0xE89C, 0x3E21, 0x96DD, 0x61DC, 0x0D86, 0x0F85,
    0xE090, 0x7C42, 0x71C4, 0xCCAA, 0x90D8, 0x0605, 0xF701, 0x1C12,
    0xC2A3, 0x6A5F, 0xAEF9, 0x69D0, 0x1791, 0x9958, 0x3A27, 0x27B9,
    0xD938, 0xEB13, 0x2BB3, 0x2233, 0xD2BB, 0xA970, 0x0789, 0x33A7,
    0x2DB6, 0x3C22, 0x1592, 0xC920, 0x8749, 0xAAFF, 0x5078, 0xA57A,
    0x038F, 0x59F8, 0x0980, 0x1A17, 0x65DA, 0xD731, 0x84C6, 0xD0B8,
    0x82C3, 0x29B0, 0x5A77, 0x1E11, 0x7BCB, 0xA8FC, 0x6DD6, 0x2C3A,
];

/// Non-linear 16-bit substitution used by both mixing phases.
pub fn sbox(v: u16) -> u16 {
    SBOX_TABLE[lo8(v) as usize] ^ SBOX_TABLE[hi8(v) as usize].swap_bytes()
}

pub fn phase1(tk: &TemporalKey, ta: &TransmitterAddress, iv32: u32) -> P1k {
    let a = &ta.0;
    let mut p = [
        iv32 as u16,
        (iv32 >> 16) as u16,
        mk16(a[1], a[0]),
        mk16(a[3], a[2]),
        mk16(a[5], a[4]),
    ];
    for i in 0..PHASE1_ROUNDS {
        let j = 2 * (i as usize & 1);
        p[0] = p[0].wrapping_add(sbox(p[4] ^ tk.word(j)));
        p[1] = p[1].wrapping_add(sbox(p[0] ^ tk.word(4 + j)));
        p[2] = p[2].wrapping_add(sbox(p[1] ^ tk.word(8 + j)));
        p[3] = p[3].wrapping_add(sbox(p[2] ^ tk.word(12 + j)));
        p[4] = p[4].wrapping_add(sbox(p[3] ^ tk.word(j))).wrapping_add(i);
    }
    P1k(p)
}

pub fn phase2(p1k: &P1k, tk: &TemporalKey, iv16: u16) -> WepSeed {
    let t = &p1k.0;
    let mut ppk = [t[0], t[1], t[2], t[3], t[4], t[4].wrapping_add(iv16)];

    for k in 0..6 {
        let prev = ppk[(k + 5) % 6];
        ppk[k] = ppk[k].wrapping_add(sbox(prev ^ tk.word(2 * k)));
    }
    ppk[0] = ppk[0].wrapping_add((ppk[5] ^ tk.word(12)).rotate_right(1));
    ppk[1] = ppk[1].wrapping_add((ppk[0] ^ tk.word(14)).rotate_right(1));
    for k in 2..6 {
        ppk[k] = ppk[k].wrapping_add(ppk[k - 1].rotate_right(1));
    }

    let mut seed = [0u8; 16];
    seed[0] = hi8(iv16);
    // Bit 5 set, bit 4 clear: keeps the per-packet key out of the known weak-key classes.
    seed[1] = (hi8(iv16) | 0x20) & 0x7F;
    seed[2] = lo8(iv16);
    seed[3] = lo8((ppk[5] ^ tk.word(0)) >> 1);
    for (k, w) in ppk.iter().enumerate() {
        seed[4 + 2 * k] = lo8(*w);
        seed[5 + 2 * k] = hi8(*w);
    }
    WepSeed(seed)
}

/// Opaque handle for a temporal key generation, so cache keys never hold key octets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TkId(pub u64);

pub const P1K_CACHE_CAPACITY: usize = 16;

/// Small LRU cache of phase-1 results keyed by (key id, TA, iv32).
#[derive(Debug, Clone, Default)]
pub struct P1kCache {
    // Most recently used last.
    entries: Vec<((TkId, MacAddr, u32), P1k)>,
}

impl P1kCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &mut self,
        tk_id: TkId,
        tk: &TemporalKey,
        ta: &TransmitterAddress,
        iv32: u32,
        ops: &mut OpCounters,
    ) -> P1k {
        let key = (tk_id, *ta, iv32);
        if let Some(pos) = self.entries.iter().position(|(k, _)| *k == key) {
            let entry = self.entries.remove(pos);
            let p1k = entry.1;
            self.entries.push(entry);
            return p1k;
        }
        ops.phase1 += 1;
        let p1k = phase1(tk, ta, iv32);
        if self.entries.len() == P1K_CACHE_CAPACITY {
            self.entries.remove(0);
        }
        self.entries.push((key, p1k));
        p1k
    }

    pub fn contains(&self, tk_id: TkId, ta: &TransmitterAddress, iv32: u32) -> bool {
        self.entries.iter().any(|(k, _)| *k == (tk_id, *ta, iv32))
    }

    /// Drops every entry for `iv32`.
    pub fn retire_iv32(&mut self, iv32: u32) {
        self.entries.retain(|((_, _, v), _)| *v != iv32);
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
