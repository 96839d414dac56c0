use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keymix::MacAddr;

use super::{ICV_LEN, MAC_HEADER_LEN};

/// Wire format of one MPDU, also the scheme tag in frame dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum FrameKind {
    Plain = 0,
    Wep = 1,
    Tkip = 2,
    MoTkipFirst = 3,
    MoTkipNext = 4,
}

impl FrameKind {
    pub fn header_len(self) -> usize {
        match self {
            FrameKind::Plain => 0,
            FrameKind::Wep => 4,
            FrameKind::Tkip => 8,
            FrameKind::MoTkipFirst => 9,
            FrameKind::MoTkipNext => 5,
        }
    }

    /// Security header plus ICV.
    pub fn expansion(self) -> usize {
        match self {
            FrameKind::Plain => 0,
            k => k.header_len() + ICV_LEN,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            0 => FrameKind::Plain,
            1 => FrameKind::Wep,
            2 => FrameKind::Tkip,
            3 => FrameKind::MoTkipFirst,
            4 => FrameKind::MoTkipNext,
            t => return Err(Error::MalformedFrame(format!("unknown scheme tag {t}"))),
        })
    }

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn is_protected(self) -> bool {
        self != FrameKind::Plain
    }
}

/// The 24-octet data-frame MAC header: frame control, duration, three
/// addresses (DA, TA, SA) and sequence control.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MacHeader {
    pub da: MacAddr,
    pub ta: MacAddr,
    pub sa: MacAddr,
    /// 12-bit MSDU sequence number.
    pub seq: u16,
    /// 4-bit fragment number.
    pub frag: u8,
    pub more_frags: bool,
}

const FC_DATA: u8 = 0x08;
const FC_MORE_FRAGS: u8 = 0x04;
const FC_PROTECTED: u8 = 0x40;

impl MacHeader {
    pub fn is_fragmented(&self) -> bool {
        self.frag > 0 || self.more_frags
    }

    pub fn write(&self, protected: bool, out: &mut Vec<u8>) {
        let mut flags = 0u8;
        if self.more_frags {
            flags |= FC_MORE_FRAGS;
        }
        if protected {
            flags |= FC_PROTECTED;
        }
        out.extend_from_slice(&[FC_DATA, flags, 0, 0]);
        out.extend_from_slice(&self.da.0);
        out.extend_from_slice(&self.ta.0);
        out.extend_from_slice(&self.sa.0);
        let sc = ((self.seq & 0x0FFF) << 4) | (self.frag & 0x0F) as u16;
        out.extend_from_slice(&sc.to_le_bytes());
    }

    /// Parses the header; returns it with the protected-frame bit.
    pub fn parse(b: &[u8]) -> Result<(Self, bool)> {
        if b.len() < MAC_HEADER_LEN {
            return Err(Error::MalformedFrame(format!("{} octets, MAC header needs {MAC_HEADER_LEN}", b.len())));
        }
        if b[0] != FC_DATA {
            return Err(Error::MalformedFrame(format!("frame control {:#04x} is not a data frame", b[0])));
        }
        if b[1] & !(FC_MORE_FRAGS | FC_PROTECTED) != 0 {
            return Err(Error::MalformedFrame(format!("unsupported frame control flags {:#04x}", b[1])));
        }
        let addr = |o: usize| MacAddr(b[o..o + 6].try_into().unwrap());
        let sc = u16::from_le_bytes([b[22], b[23]]);
        Ok((
            Self {
                da: addr(4),
                ta: addr(10),
                sa: addr(16),
                seq: sc >> 4,
                frag: (sc & 0x0F) as u8,
                more_frags: b[1] & FC_MORE_FRAGS != 0,
            },
            b[1] & FC_PROTECTED != 0,
        ))
    }
}

/// One wire frame: MAC header, security header, and body (ciphertext with
/// the encrypted ICV for protected kinds).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mpdu {
    pub kind: FrameKind,
    pub mac: MacHeader,
    pub header: Vec<u8>,
    pub body: Vec<u8>,
}

impl Mpdu {
    pub fn fragment_index(&self) -> u8 {
        self.mac.frag
    }

    pub fn more_fragments(&self) -> bool {
        self.mac.more_frags
    }

    /// Octets this frame occupies on the air, MAC header included.
    pub fn wire_len(&self) -> usize {
        MAC_HEADER_LEN + self.header.len() + self.body.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len());
        self.mac.write(self.kind.is_protected(), &mut out);
        out.extend_from_slice(&self.header);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn parse(kind: FrameKind, bytes: &[u8]) -> Result<Self> {
        let (mac, protected) = MacHeader::parse(bytes)?;
        if protected != kind.is_protected() {
            return Err(Error::MalformedFrame("protected bit disagrees with scheme".into()));
        }
        let rest = &bytes[MAC_HEADER_LEN..];
        let hlen = kind.header_len();
        let min = hlen + if kind.is_protected() { ICV_LEN } else { 0 };
        if rest.len() < min {
            return Err(Error::MalformedFrame(format!(
                "{:?} frame needs at least {min} octets after the MAC header, got {}",
                kind,
                rest.len()
            )));
        }
        Ok(Self { kind, mac, header: rest[..hlen].to_vec(), body: rest[hlen..].to_vec() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds() -> impl Strategy<Value = FrameKind> {
        (0u8..5).prop_map(|t| FrameKind::from_tag(t).unwrap())
    }

    proptest! {
        #[test]
        fn serialize_parse_identity(kind in kinds(), da in any::<[u8; 6]>(), ta in any::<[u8; 6]>(),
                                    sa in any::<[u8; 6]>(), seq in 0u16..4096, frag in 0u8..16, more: bool,
                                    body in proptest::collection::vec(any::<u8>(), 4..64)) {
            let header: Vec<u8> = (0..kind.header_len() as u8).collect();
            let m = Mpdu {
                kind,
                mac: MacHeader { da: MacAddr(da), ta: MacAddr(ta), sa: MacAddr(sa), seq, frag, more_frags: more },
                header,
                body,
            };
            let bytes = m.to_bytes();
            prop_assert_eq!(bytes.len(), m.wire_len());
            prop_assert_eq!(Mpdu::parse(kind, &bytes).unwrap(), m);
        }
    }

    #[test]
    fn truncated_frames_rejected() {
        assert!(matches!(Mpdu::parse(FrameKind::Wep, &[0x08, 0x40]), Err(Error::MalformedFrame(_))));
        let m = Mpdu { kind: FrameKind::Wep, mac: MacHeader::default(), header: vec![0; 4], body: vec![0; 4] };
        let bytes = m.to_bytes();
        assert!(Mpdu::parse(FrameKind::Wep, &bytes).is_ok());
        assert!(matches!(Mpdu::parse(FrameKind::Wep, &bytes[..bytes.len() - 1]), Err(Error::MalformedFrame(_))));
    }

    #[test]
    fn expansion_constants() {
        assert_eq!(FrameKind::Plain.expansion(), 0);
        assert_eq!(FrameKind::Wep.expansion(), 8);
        assert_eq!(FrameKind::Tkip.expansion(), 12);
        assert_eq!(FrameKind::MoTkipFirst.expansion(), 13);
        assert_eq!(FrameKind::MoTkipNext.expansion(), 9);
    }
}
