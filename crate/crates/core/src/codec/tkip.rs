//! Classic TKIP: 8-octet IV/extended-IV header, Michael over addresses and
//! payload, RC4 keyed by the phase-2 seed.

use crate::error::{Error, Result};
use crate::keymix::Tsc48;
use crate::session::{EventKind, SecurityAssociation};

use super::{check_priority, compute_mic, fragment, open_body, seal_body, verify_mic, FrameKind, MacHeader, Mpdu, Msdu};

/// Extended-IV bit in the key-id octet.
pub const EXT_IV: u8 = 0x20;

/// `TSC1 ‖ (TSC1 | 0x20) & 0x7F ‖ TSC0 ‖ key-id ‖ TSC2..TSC5`.
pub fn tkip_header(tsc: Tsc48, key_id_octet: u8) -> [u8; 8] {
    let b = tsc.to_le_bytes();
    [b[1], (b[1] | 0x20) & 0x7F, b[0], key_id_octet | EXT_IV, b[2], b[3], b[4], b[5]]
}

pub fn parse_tkip_header(h: &[u8]) -> Result<Tsc48> {
    if h.len() != 8 {
        return Err(Error::MalformedFrame(format!("TKIP header is 8 octets, got {}", h.len())));
    }
    if h[3] & EXT_IV == 0 {
        return Err(Error::MalformedFrame("TKIP header without the extended-IV bit".into()));
    }
    Ok(Tsc48::from_le_bytes([h[2], h[0], h[4], h[5], h[6], h[7]]))
}

pub fn encap_msdu(sa: &mut SecurityAssociation, msdu: &Msdu, max_fragment: usize, now_ms: u64) -> Result<Vec<Mpdu>> {
    sa.ensure_not_blocked(now_ms)?;
    check_priority(msdu)?;
    let n = super::fragment::fragment_count(msdu.payload.len() + super::MIC_LEN, max_fragment)?;
    if sa.tsc_remaining() < n as u64 {
        return Err(Error::TscExhausted);
    }
    let key = sa.keys.mic_tx;
    let mic = compute_mic(&key, &msdu.da, &msdu.sa, msdu.priority, None, &msdu.payload, &mut sa.ops);
    let mut data = msdu.payload.clone();
    data.extend_from_slice(&mic);

    let seq = sa.next_sequence_number();
    let mut out = Vec::with_capacity(n);
    for f in fragment(&data, max_fragment)? {
        let tsc = sa.next_tsc(now_ms)?;
        let seed = sa.seed_for(tsc);
        let header = tkip_header(tsc, sa.keys.key_id_octet()).to_vec();
        out.push(Mpdu {
            kind: FrameKind::Tkip,
            mac: MacHeader { da: msdu.da, ta: sa.ta, sa: msdu.sa, seq, frag: f.index, more_frags: f.more },
            header,
            body: seal_body(&seed.0, &f.data, &mut sa.ops),
        });
    }
    Ok(out)
}

/// Check order: parse, replay, decrypt and ICV, then (after reassembly) MIC.
pub fn decap_mpdu(sa: &mut SecurityAssociation, mpdu: &Mpdu, now_ms: u64) -> Result<Option<Msdu>> {
    sa.ensure_not_blocked(now_ms)?;
    let tsc = parse_tkip_header(&mpdu.header)?;
    let h = &mpdu.header;
    if h[1] != (h[0] | 0x20) & 0x7F || h[3] != sa.keys.key_id_octet() | EXT_IV {
        return Err(Error::MalformedFrame("TKIP header weak-key octet or key id does not match".into()));
    }
    if !sa.replay_would_accept(tsc) {
        sa.push_event(now_ms, EventKind::ReplayDetected, Some(tsc), "TSC outside or already in the replay window");
        return Err(Error::ReplayDetected(tsc));
    }
    let seed = sa.seed_for(tsc);
    let frag = open_body(&seed.0, &mpdu.body, &mut sa.ops)?;
    sa.accept_frame(tsc);
    let m = mpdu.mac;
    match sa.reassembly.push(m.seq, m.frag, m.more_frags, tsc, frag)? {
        None => Ok(None),
        Some(r) => verify_mic(sa, &m, r.data, None, r.first_tsc, now_ms).map(Some),
    }
}
