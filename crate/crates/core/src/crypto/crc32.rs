//! Reflected CRC-32 (polynomial 0x04C11DB7) as used for the WEP/TKIP ICV.

const REFLECTED_POLY: u32 = 0xEDB8_8320;

const TABLE: [u32; 256] = build_table();

const fn build_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut n = 0;
    while n < 256 {
        let mut c = n as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 { REFLECTED_POLY ^ (c >> 1) } else { c >> 1 };
            k += 1;
        }
        table[n] = c;
        n += 1;
    }
    table
}

/// Raw register update with no initial or final inversion.
pub fn crc32_register(init: u32, data: &[u8]) -> u32 {
    data.iter()
        .fold(init, |crc, &b| TABLE[((crc ^ b as u32) & 0xFF) as usize] ^ (crc >> 8))
}

/// The 4-octet integrity check value appended to WEP and TKIP frame bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IcvValue(pub u32);

impl IcvValue {
    /// Wire order (little-endian).
    pub fn to_bytes(self) -> [u8; 4] {
        self.0.to_le_bytes()
    }

    pub fn from_bytes(b: [u8; 4]) -> Self {
        Self(u32::from_le_bytes(b))
    }
}

pub fn crc32_icv(data: &[u8]) -> IcvValue {
    IcvValue(!crc32_register(0xFFFF_FFFF, data))
}

/// Register value left after running the CRC over `data ‖ ICV(data)`.
pub const CRC32_RESIDUE: u32 = 0xDEBB_20E3;
