//! Line-oriented hex vector files.
//!
//! Primitive vectors: `NAME key=<hex> msg=<hex> out=<hex>`, where the name
//! prefix (`RC4`, `CRC32`, `MICHAEL`) selects the algorithm. Key-mixing
//! vectors:
//!
//! ```text
//! P1 tk=<32hex> ta=<12hex> iv32=<8hex> -> p1k=<20hex>
//! P2 p1k=<20hex> tk=<32hex> iv16=<4hex> -> seed=<32hex>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;

use crate::crypto::{crc32_icv, michael, rc4_apply, MichaelKey};
use crate::error::{Error, Result};
use crate::keymix::{phase1, phase2, MacAddr, P1k, TemporalKey, WepSeed};

pub const CRYPTO_VECTORS: &str = include_str!("../vectors/crypto.txt");
pub const KEYMIX_VECTORS: &str = include_str!("../vectors/keymix.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Vector {
    Primitive { name: String, key: Vec<u8>, msg: Vec<u8>, out: Vec<u8> },
    Phase1 { tk: TemporalKey, ta: MacAddr, iv32: u32, p1k: P1k },
    Phase2 { p1k: P1k, tk: TemporalKey, iv16: u16, seed: WepSeed },
}

pub fn format_p1(tk: &TemporalKey, ta: &MacAddr, iv32: u32, p1k: &P1k) -> String {
    format!(
        "P1 tk={} ta={} iv32={:08x} -> p1k={}",
        hex::encode(tk.0),
        hex::encode(ta.0),
        iv32,
        p1k.to_hex()
    )
}

pub fn format_p2(p1k: &P1k, tk: &TemporalKey, iv16: u16, seed: &WepSeed) -> String {
    format!(
        "P2 p1k={} tk={} iv16={:04x} -> seed={}",
        p1k.to_hex(),
        hex::encode(tk.0),
        iv16,
        hex::encode(seed.0)
    )
}

pub fn decode_hex(s: &str) -> Result<Vec<u8>> {
    hex::decode(s).map_err(|e| Error::InvalidHex(format!("{s:?}: {e}")))
}

pub fn decode_fixed<const N: usize>(s: &str) -> Result<[u8; N]> {
    let v = decode_hex(s)?;
    v.as_slice()
        .try_into()
        .map_err(|_| Error::InvalidHex(format!("expected {N} octets, got {}", v.len())))
}

pub fn decode_u32(s: &str) -> Result<u32> {
    if s.len() != 8 {
        return Err(Error::InvalidHex(format!("expected 8 hex digits, got {s:?}")));
    }
    u32::from_str_radix(s, 16).map_err(|e| Error::InvalidHex(format!("{s:?}: {e}")))
}

pub fn decode_u16(s: &str) -> Result<u16> {
    if s.len() != 4 {
        return Err(Error::InvalidHex(format!("expected 4 hex digits, got {s:?}")));
    }
    u16::from_str_radix(s, 16).map_err(|e| Error::InvalidHex(format!("{s:?}: {e}")))
}

fn fields<'a>(tokens: impl Iterator<Item = &'a str>) -> Result<HashMap<&'a str, &'a str>> {
    let mut map = HashMap::new();
    for tok in tokens {
        if tok == "->" {
            continue;
        }
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::InvalidHex(format!("expected key=value, got {tok:?}")))?;
        map.insert(k, v);
    }
    Ok(map)
}

fn field<'a>(map: &HashMap<&'a str, &'a str>, name: &str) -> Result<&'a str> {
    map.get(name)
        .copied()
        .ok_or_else(|| Error::InvalidHex(format!("missing field {name}")))
}

/// Parses one line; `Ok(None)` for blanks and comments.
pub fn parse_line(line: &str) -> Result<Option<Vector>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let mut tokens = line.split_whitespace();
    let name = tokens.next().unwrap_or_default();
    let map = fields(tokens)?;
    let v = match name {
        "P1" => Vector::Phase1 {
            tk: TemporalKey(decode_fixed(field(&map, "tk")?)?),
            ta: MacAddr(decode_fixed(field(&map, "ta")?)?),
            iv32: decode_u32(field(&map, "iv32")?)?,
            p1k: P1k::from_hex(field(&map, "p1k")?)?,
        },
        "P2" => Vector::Phase2 {
            p1k: P1k::from_hex(field(&map, "p1k")?)?,
            tk: TemporalKey(decode_fixed(field(&map, "tk")?)?),
            iv16: decode_u16(field(&map, "iv16")?)?,
            seed: WepSeed(decode_fixed(field(&map, "seed")?)?),
        },
        _ => Vector::Primitive {
            name: name.to_string(),
            key: decode_hex(field(&map, "key")?)?,
            msg: decode_hex(field(&map, "msg")?)?,
            out: decode_hex(field(&map, "out")?)?,
        },
    };
    Ok(Some(v))
}

impl Vector {
    pub fn name(&self) -> &str {
        match self {
            Vector::Primitive { name, .. } => name,
            Vector::Phase1 { .. } => "P1",
            Vector::Phase2 { .. } => "P2",
        }
    }

    /// Recomputes the vector; `Err` carries a description of the mismatch.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let (expected, actual) = match self {
            Vector::Phase1 { tk, ta, iv32, p1k } => (p1k.to_hex(), phase1(tk, ta, *iv32).to_hex()),
            Vector::Phase2 { p1k, tk, iv16, seed } => {
                (hex::encode(seed.0), hex::encode(phase2(p1k, tk, *iv16).0))
            }
            Vector::Primitive { name, key, msg, out } => {
                let actual = if name.starts_with("RC4") {
                    rc4_apply(key, msg).map_err(|e| e.to_string())?
                } else if name.starts_with("CRC32") {
                    crc32_icv(msg).to_bytes().to_vec()
                } else if name.starts_with("MICHAEL") {
                    let key: [u8; 8] = key
                        .as_slice()
                        .try_into()
                        .map_err(|_| format!("Michael key must be 8 octets, got {}", key.len()))?;
                    michael(&MichaelKey(key), msg).to_vec()
                } else {
                    return Err(format!("unknown vector kind {name}"));
                };
                (hex::encode(out), hex::encode(actual))
            }
        };
        if expected == actual {
            Ok(())
        } else {
            Err(format!("expected {expected}, got {actual}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorOutcome {
    pub line: usize,
    pub name: String,
    pub result: std::result::Result<(), String>,
}

/// Parses and verifies every vector in `text`. Parse errors are reported as failures.
pub fn check_vectors(text: &str) -> Vec<VectorOutcome> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line_no = i + 1;
            match parse_line(line) {
                Ok(None) => None,
                Ok(Some(v)) => Some(VectorOutcome {
                    line: line_no,
                    name: v.name().to_string(),
                    result: v.verify(),
                }),
                Err(e) => Some(VectorOutcome {
                    line: line_no,
                    name: line.split_whitespace().next().unwrap_or("?").to_string(),
                    result: Err(e.to_string()),
                }),
            }
        })
        .collect()
}
