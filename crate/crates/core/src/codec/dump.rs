//! Binary frame dumps. Each record is `"MTKP" ‖ version ‖ scheme tag ‖
//! frame length (u16, big-endian) ‖ frame octets`, where the frame octets are
//! exactly [`Mpdu::to_bytes`].

use std::io::{self, Write};

use crate::error::{Error, Result};

use super::{FrameKind, Mpdu};

pub const MAGIC: &[u8; 4] = b"MTKP";
pub const VERSION: u8 = 1;
const RECORD_HEADER_LEN: usize = 8;

pub fn write_record<W: Write>(out: &mut W, mpdu: &Mpdu) -> io::Result<()> {
    let frame = mpdu.to_bytes();
    let len = u16::try_from(frame.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame longer than 65535 octets"))?;
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION, mpdu.kind.tag()])?;
    out.write_all(&len.to_be_bytes())?;
    out.write_all(&frame)
}

pub fn encode_dump(frames: &[Mpdu]) -> Vec<u8> {
    let mut out = Vec::new();
    for f in frames {
        write_record(&mut out, f).expect("writing to a Vec");
    }
    out
}

/// Parses a whole dump. Errors name the zero-based record index.
pub fn decode_dump(mut bytes: &[u8]) -> Result<Vec<Mpdu>> {
    let mut frames = Vec::new();
    while !bytes.is_empty() {
        let idx = frames.len();
        let bad = |msg: String| Error::MalformedFrame(format!("record {idx}: {msg}"));
        if bytes.len() < RECORD_HEADER_LEN {
            return Err(bad(format!("truncated record header ({} octets)", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(bad(format!("unsupported version {}", bytes[4])));
        }
        let kind = FrameKind::from_tag(bytes[5]).map_err(|e| bad(e.to_string()))?;
        let len = u16::from_be_bytes([bytes[6], bytes[7]]) as usize;
        let rest = &bytes[RECORD_HEADER_LEN..];
        if rest.len() < len {
            return Err(bad(format!("frame length {len} but only {} octets remain", rest.len())));
        }
        frames.push(Mpdu::parse(kind, &rest[..len]).map_err(|e| bad(e.to_string()))?);
        bytes = &rest[len..];
    }
    Ok(frames)
}
