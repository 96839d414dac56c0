use crate::error::{Error, Result};

/// MoTKIP status byte. Bit i carries flag Fi; F5..F7 are reserved and must be zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FlagByte {
    /// F0: masked extended IV present in this header.
    pub ext_iv: bool,
    /// F1: same IV_H as the cached phase-1 epoch.
    pub same_iv32: bool,
    /// F2: IV_L is the previous IV_L plus one.
    pub unit_increment: bool,
    /// F3: the MSDU was fragmented.
    pub fragmented: bool,
    /// F4: continuation fragment of the same MSDU.
    pub same_msdu: bool,
}

const RESERVED: u8 = 0xE0;

impl FlagByte {
    pub fn encode(self) -> u8 {
        self.ext_iv as u8
            | (self.same_iv32 as u8) << 1
            | (self.unit_increment as u8) << 2
            | (self.fragmented as u8) << 3
            | (self.same_msdu as u8) << 4
    }

    pub fn decode(b: u8) -> Result<Self> {
        if b & RESERVED != 0 {
            return Err(Error::ReservedBitsSet(b));
        }
        Ok(Self {
            ext_iv: b & 0x01 != 0,
            same_iv32: b & 0x02 != 0,
            unit_increment: b & 0x04 != 0,
            fragmented: b & 0x08 != 0,
            same_msdu: b & 0x10 != 0,
        })
    }
}
