//! RC4, CRC-32 and Michael: the primitives every codec in this crate is built from.

pub mod crc32;
pub mod michael;
pub mod rc4;

pub use crc32::{crc32_icv, IcvValue};
pub use michael::{michael, MichaelKey};
pub use rc4::{rc4_apply, Rc4State};
