//! Encapsulation and decapsulation of MSDUs into MPDUs for four schemes:
//! plaintext, WEP, classic TKIP and MoTKIP.
//!
//! Per-MPDU expansion (security header plus ICV) is fixed per frame kind:
//!
//! | kind          | header | ICV | expansion |
//! |---------------|--------|-----|-----------|
//! | plain         | 0      | 0   | 0         |
//! | WEP           | 4      | 4   | 8         |
//! | TKIP          | 8      | 4   | 12        |
//! | MoTKIP first  | 9      | 4   | 13        |
//! | MoTKIP next   | 5      | 4   | 9         |
//!
//! TKIP and MoTKIP also append an 8-octet MIC to each MSDU before
//! fragmentation.

pub mod dump;
pub mod flags;
pub mod fragment;
pub mod frame;
pub mod motkip;
pub mod tkip;
pub mod wep;

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use flags::FlagByte;
pub use fragment::{fragment, reassemble, Fragment};
pub use frame::{FrameKind, MacHeader, Mpdu};

use crate::crypto::michael::Michael;
use crate::crypto::{crc32_icv, IcvValue, MichaelKey, Rc4State};
use crate::error::{Error, Result};
use crate::keymix::{MacAddr, TemporalKey, Tsc48};
use crate::ops::OpCounters;
use crate::session::SecurityAssociation;

pub const MAC_HEADER_LEN: usize = 24;
pub const ICV_LEN: usize = 4;
pub const MIC_LEN: usize = 8;
pub const DEFAULT_MAX_FRAGMENT: usize = 2304;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Plain,
    Wep,
    Tkip,
    #[serde(rename = "motkip")]
    MoTkip,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Plain, Scheme::Wep, Scheme::Tkip, Scheme::MoTkip];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Plain => "plain",
            Scheme::Wep => "wep",
            Scheme::Tkip => "tkip",
            Scheme::MoTkip => "motkip",
        }
    }

    /// Octets of MIC appended to every MSDU.
    pub fn mic_len(self) -> usize {
        match self {
            Scheme::Tkip | Scheme::MoTkip => MIC_LEN,
            _ => 0,
        }
    }

    pub fn accepts(self, kind: FrameKind) -> bool {
        matches!(
            (self, kind),
            (Scheme::Plain, FrameKind::Plain)
                | (Scheme::Wep, FrameKind::Wep)
                | (Scheme::Tkip, FrameKind::Tkip)
                | (Scheme::MoTkip, FrameKind::MoTkipFirst | FrameKind::MoTkipNext)
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" | "none" => Ok(Scheme::Plain),
            "wep" => Ok(Scheme::Wep),
            "tkip" => Ok(Scheme::Tkip),
            "motkip" => Ok(Scheme::MoTkip),
            other => Err(Error::InvalidConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

/// A MAC service data unit before encapsulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Msdu {
    pub da: MacAddr,
    pub sa: MacAddr,
    /// Reserved; must be 0.
    pub priority: u8,
    pub payload: Vec<u8>,
}

impl Msdu {
    pub fn new(da: MacAddr, sa: MacAddr, payload: Vec<u8>) -> Self {
        Self { da, sa, priority: 0, payload }
    }
}

/// All keys an association needs, as seen by the transmitting side.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub tk: TemporalKey,
    pub mic_tx: MichaelKey,
    pub mic_rx: MichaelKey,
    /// Session key masking the first MoTKIP packet's extended IV.
    pub ks: [u8; 6],
    /// WEP-128 base key for the baseline codec.
    pub wep_key: [u8; 13],
    /// 2-bit key index.
    pub key_id: u8,
}

impl fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyMaterial").field("key_id", &self.key_id).finish_non_exhaustive()
    }
}

impl KeyMaterial {
    /// Deterministic key material for simulations and tests.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut k = Self {
            tk: TemporalKey::default(),
            mic_tx: MichaelKey::default(),
            mic_rx: MichaelKey::default(),
            ks: [0; 6],
            wep_key: [0; 13],
            key_id: 0,
        };
        rng.fill_bytes(&mut k.tk.0);
        rng.fill_bytes(&mut k.mic_tx.0);
        rng.fill_bytes(&mut k.mic_rx.0);
        rng.fill_bytes(&mut k.ks);
        rng.fill_bytes(&mut k.wep_key);
        k
    }

    /// The same keys from the other end of the link: MIC directions swapped.
    pub fn peer(&self) -> Self {
        Self { mic_tx: self.mic_rx, mic_rx: self.mic_tx, ..self.clone() }
    }

    pub(crate) fn key_id_octet(&self) -> u8 {
        (self.key_id & 0x03) << 6
    }

    /// `key=value` lines: `tk`, `mic_tx`, `mic_rx`, `ks`, `wep_key` in hex and `key_id` 0-3.
    pub fn to_key_file(&self) -> String {
        format!(
            "tk={}\nmic_tx={}\nmic_rx={}\nks={}\nwep_key={}\nkey_id={}\n",
            hex::encode(self.tk.0),
            hex::encode(self.mic_tx.0),
            hex::encode(self.mic_rx.0),
            hex::encode(self.ks),
            hex::encode(self.wep_key),
            self.key_id
        )
    }

    /// Parses [`KeyMaterial::to_key_file`] output. Blank lines and `#` comments are ignored;
    /// `key_id` defaults to 0, every other field is required, and none may repeat.
    pub fn from_key_file(text: &str) -> Result<Self> {
        let mut fields: std::collections::BTreeMap<&str, &str> = Default::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value", i + 1)))?;
            let k = k.trim();
            if !["tk", "mic_tx", "mic_rx", "ks", "wep_key", "key_id"].contains(&k) {
                return Err(Error::InvalidConfig(format!("line {}: unknown key {k:?}", i + 1)));
            }
            if fields.insert(k, v.trim()).is_some() {
                return Err(Error::InvalidConfig(format!("line {}: duplicate key {k:?}", i + 1)));
            }
        }
        fn get<const N: usize>(f: &std::collections::BTreeMap<&str, &str>, k: &str) -> Result<[u8; N]> {
            let v = f.get(k).ok_or_else(|| Error::InvalidConfig(format!("missing key {k:?}")))?;
            let b = hex::decode(v).map_err(|e| Error::InvalidHex(format!("{k}: {e}")))?;
            let len = b.len();
            b.try_into().map_err(|_| Error::InvalidKeyLength(len))
        }
        let key_id = match fields.get("key_id") {
            None => 0,
            Some(v) => v
                .parse::<u8>()
                .ok()
                .filter(|k| *k < 4)
                .ok_or_else(|| Error::InvalidConfig(format!("key_id must be 0-3, got {v:?}")))?,
        };
        Ok(Self {
            tk: TemporalKey(get(&fields, "tk")?),
            mic_tx: MichaelKey(get(&fields, "mic_tx")?),
            mic_rx: MichaelKey(get(&fields, "mic_rx")?),
            ks: get(&fields, "ks")?,
            wep_key: get(&fields, "wep_key")?,
            key_id,
        })
    }
}

/// Encrypts `fragment ‖ ICV(fragment)` under the RC4 key `rc4_key`.
pub fn seal_body(rc4_key: &[u8], fragment: &[u8], ops: &mut OpCounters) -> Vec<u8> {
    let mut body = Vec::with_capacity(fragment.len() + ICV_LEN);
    body.extend_from_slice(fragment);
    body.extend_from_slice(&crc32_icv(fragment).to_bytes());
    ops.crc_octets += fragment.len() as u64;
    let mut rc4 = Rc4State::new(rc4_key).expect("per-packet keys are 16 octets");
    rc4.apply_keystream(&mut body);
    ops.rc4_inits += 1;
    ops.rc4_octets += body.len() as u64;
    body
}

/// Decrypts a body and checks its ICV, returning the plaintext fragment.
pub fn open_body(rc4_key: &[u8], body: &[u8], ops: &mut OpCounters) -> Result<Vec<u8>> {
    if body.len() < ICV_LEN {
        return Err(Error::MalformedFrame(format!("body of {} octets has no ICV", body.len())));
    }
    let mut plain = body.to_vec();
    let mut rc4 = Rc4State::new(rc4_key).expect("per-packet keys are 16 octets");
    rc4.apply_keystream(&mut plain);
    ops.rc4_inits += 1;
    ops.rc4_octets += plain.len() as u64;
    let split = plain.len() - ICV_LEN;
    let icv = IcvValue::from_bytes(plain[split..].try_into().unwrap());
    ops.crc_octets += split as u64;
    if crc32_icv(&plain[..split]) != icv {
        return Err(Error::IcvMismatch);
    }
    plain.truncate(split);
    Ok(plain)
}

/// Michael over `DA ‖ SA ‖ priority ‖ 0 0 0 [‖ extended IV] ‖ payload`.
pub fn compute_mic(
    key: &MichaelKey,
    da: &MacAddr,
    sa: &MacAddr,
    priority: u8,
    ext_iv: Option<Tsc48>,
    payload: &[u8],
    ops: &mut OpCounters,
) -> [u8; MIC_LEN] {
    let mut m = Michael::new(key);
    m.update(&da.0);
    m.update(&sa.0);
    m.update(&[priority, 0, 0, 0]);
    let mut len = 16 + payload.len();
    if let Some(tsc) = ext_iv {
        m.update(&tsc.to_le_bytes());
        len += 6;
    }
    m.update(payload);
    ops.michael_calls += 1;
    ops.michael_octets += crate::crypto::michael::padded_len(len) as u64;
    m.finalize()
}

pub(crate) fn check_priority(msdu: &Msdu) -> Result<()> {
    if msdu.priority != 0 {
        return Err(Error::InvalidConfig(format!("priority {} is reserved; must be 0", msdu.priority)));
    }
    Ok(())
}

/// Splits the MIC off a reassembled MSDU body and verifies it.
pub(crate) fn verify_mic(
    sa: &mut SecurityAssociation,
    mac: &MacHeader,
    data: Vec<u8>,
    ext_iv: Option<Tsc48>,
    first_tsc: Tsc48,
    now_ms: u64,
) -> Result<Msdu> {
    if data.len() < MIC_LEN {
        return Err(Error::MalformedFrame(format!("MSDU of {} octets cannot hold a MIC", data.len())));
    }
    let split = data.len() - MIC_LEN;
    let key = sa.keys.mic_rx;
    let expected = compute_mic(&key, &mac.da, &mac.sa, 0, ext_iv, &data[..split], &mut sa.ops);
    if expected[..] != data[split..] {
        sa.record_mic_failure(now_ms, Some(first_tsc));
        return Err(Error::MicFailure);
    }
    let mut payload = data;
    payload.truncate(split);
    Ok(Msdu { da: mac.da, sa: mac.sa, priority: 0, payload })
}

fn plain_encap(sa: &mut SecurityAssociation, msdu: &Msdu, max_fragment: usize) -> Result<Vec<Mpdu>> {
    let frags = fragment(&msdu.payload, max_fragment)?;
    let seq = sa.next_sequence_number();
    Ok(frags
        .into_iter()
        .map(|f| Mpdu {
            kind: FrameKind::Plain,
            mac: MacHeader { da: msdu.da, ta: sa.ta, sa: msdu.sa, seq, frag: f.index, more_frags: f.more },
            header: Vec::new(),
            body: f.data,
        })
        .collect())
}

fn plain_decap(sa: &mut SecurityAssociation, mpdu: &Mpdu) -> Result<Option<Msdu>> {
    let m = &mpdu.mac;
    let done = sa.reassembly.push(m.seq, m.frag, m.more_frags, Tsc48::default(), mpdu.body.clone())?;
    Ok(done.map(|r| Msdu { da: m.da, sa: m.sa, priority: 0, payload: r.data }))
}

/// Encapsulates one MSDU with the association's scheme.
pub fn encapsulate(sa: &mut SecurityAssociation, msdu: &Msdu, max_fragment: usize, now_ms: u64) -> Result<Vec<Mpdu>> {
    match sa.scheme {
        Scheme::Plain => plain_encap(sa, msdu, max_fragment),
        Scheme::Wep => wep::encap_msdu(sa, msdu, max_fragment, now_ms),
        Scheme::Tkip => tkip::encap_msdu(sa, msdu, max_fragment, now_ms),
        Scheme::MoTkip => motkip::encap_msdu(sa, msdu, max_fragment, now_ms),
    }
}

/// Processes one received MPDU. Returns the MSDU once its last fragment has
/// arrived and every check has passed.
pub fn decapsulate(sa: &mut SecurityAssociation, mpdu: &Mpdu, now_ms: u64) -> Result<Option<Msdu>> {
    if !sa.scheme.accepts(mpdu.kind) {
        return Err(Error::SchemeMismatch { expected: sa.scheme.to_string(), found: format!("{:?}", mpdu.kind) });
    }
    match sa.scheme {
        Scheme::Plain => plain_decap(sa, mpdu),
        Scheme::Wep => wep::decap_mpdu(sa, mpdu, now_ms),
        Scheme::Tkip => tkip::decap_mpdu(sa, mpdu, now_ms),
        Scheme::MoTkip => motkip::decap_mpdu(sa, mpdu, now_ms),
    }
}
