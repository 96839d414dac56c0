//! WEP-128 baseline: 24-bit IV prepended to a 104-bit base key.

use crate::error::{Error, Result};
use crate::ops::OpCounters;
use crate::session::SecurityAssociation;

use super::{check_priority, fragment, open_body, seal_body, FrameKind, MacHeader, Mpdu, Msdu};

pub const WEP_KEY_LEN: usize = 13;

fn rc4_key(iv: [u8; 3], key: &[u8; WEP_KEY_LEN]) -> [u8; 16] {
    let mut k = [0u8; 16];
    k[..3].copy_from_slice(&iv);
    k[3..].copy_from_slice(key);
    k
}

fn header(iv24: u32, key_id: u8) -> Vec<u8> {
    vec![(iv24 >> 16) as u8, (iv24 >> 8) as u8, iv24 as u8, (key_id & 0x03) << 6]
}

/// Seals one payload: IV ‖ key-id header and RC4 over `payload ‖ ICV`.
pub fn wep_encap(key: &[u8; WEP_KEY_LEN], iv24: u32, payload: &[u8]) -> Mpdu {
    wep_encap_counted(key, 0, iv24, payload, MacHeader::default(), &mut OpCounters::default())
}

pub(crate) fn wep_encap_counted(
    key: &[u8; WEP_KEY_LEN],
    key_id: u8,
    iv24: u32,
    payload: &[u8],
    mac: MacHeader,
    ops: &mut OpCounters,
) -> Mpdu {
    let header = header(iv24, key_id);
    let k = rc4_key([header[0], header[1], header[2]], key);
    Mpdu { kind: FrameKind::Wep, mac, header, body: seal_body(&k, payload, ops) }
}

pub fn wep_decap(key: &[u8; WEP_KEY_LEN], mpdu: &Mpdu) -> Result<Vec<u8>> {
    wep_decap_counted(key, mpdu, &mut OpCounters::default())
}

pub(crate) fn wep_decap_counted(key: &[u8; WEP_KEY_LEN], mpdu: &Mpdu, ops: &mut OpCounters) -> Result<Vec<u8>> {
    if mpdu.kind != FrameKind::Wep {
        return Err(Error::SchemeMismatch { expected: "wep".into(), found: format!("{:?}", mpdu.kind) });
    }
    if mpdu.header.len() != 4 || mpdu.body.len() < 4 {
        return Err(Error::MalformedFrame(format!(
            "WEP frame needs 8 octets of header and ICV, got {}",
            mpdu.header.len() + mpdu.body.len()
        )));
    }
    let h = &mpdu.header;
    open_body(&rc4_key([h[0], h[1], h[2]], key), &mpdu.body, ops)
}

pub fn encap_msdu(sa: &mut SecurityAssociation, msdu: &Msdu, max_fragment: usize, now_ms: u64) -> Result<Vec<Mpdu>> {
    sa.ensure_not_blocked(now_ms)?;
    check_priority(msdu)?;
    let frags = fragment(&msdu.payload, max_fragment)?;
    if sa.tsc_remaining() < frags.len() as u64 {
        return Err(Error::TscExhausted);
    }
    let seq = sa.next_sequence_number();
    let mut out = Vec::with_capacity(frags.len());
    for f in frags {
        // The WEP IV is the low 24 bits of the association counter.
        let iv24 = (sa.next_tsc(now_ms)?.as_u64() & 0xFF_FFFF) as u32;
        let mac = MacHeader { da: msdu.da, ta: sa.ta, sa: msdu.sa, seq, frag: f.index, more_frags: f.more };
        let key = sa.keys.wep_key;
        let key_id = sa.keys.key_id;
        out.push(wep_encap_counted(&key, key_id, iv24, &f.data, mac, &mut sa.ops));
    }
    Ok(out)
}

pub fn decap_mpdu(sa: &mut SecurityAssociation, mpdu: &Mpdu, now_ms: u64) -> Result<Option<Msdu>> {
    sa.ensure_not_blocked(now_ms)?;
    if mpdu.header.get(3) != Some(&((sa.keys.key_id & 3) << 6)) {
        return Err(Error::MalformedFrame("WEP key id does not match".into()));
    }
    let key = sa.keys.wep_key;
    let data = wep_decap_counted(&key, mpdu, &mut sa.ops)?;
    let m = &mpdu.mac;
    let done = sa.reassembly.push(m.seq, m.frag, m.more_frags, Default::default(), data)?;
    Ok(done.map(|r| Msdu { da: m.da, sa: m.sa, priority: 0, payload: r.data }))
}
