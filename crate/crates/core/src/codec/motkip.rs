//! MoTKIP: the first MPDU of an IV_H epoch carries the 48-bit TSC masked
//! with the session key; later MPDUs carry only IV_L and a status byte. The
//! MIC additionally covers the clear 48-bit IV of the MSDU's first fragment.
//!
//! First header (9 octets): `flags ‖ TSC0..TSC5 ⊕ Ks ‖ key-id ‖ 0`.
//! Next header (5 octets): `flags ‖ TSC0 ‖ TSC1 ‖ key-id ‖ 0`.

use crate::error::{Error, Result};
use crate::keymix::Tsc48;
use crate::session::{EventKind, SecurityAssociation};

use super::fragment::fragment_count;
use super::{
    check_priority, compute_mic, fragment, open_body, seal_body, verify_mic, FlagByte, FrameKind, MacHeader, Mpdu,
    Msdu, MIC_LEN,
};

pub fn mask_tsc(tsc: Tsc48, ks: &[u8; 6]) -> [u8; 6] {
    let mut b = tsc.to_le_bytes();
    for (x, k) in b.iter_mut().zip(ks) {
        *x ^= k;
    }
    b
}

pub fn unmask_tsc(masked: [u8; 6], ks: &[u8; 6]) -> Tsc48 {
    let mut b = masked;
    for (x, k) in b.iter_mut().zip(ks) {
        *x ^= k;
    }
    Tsc48::from_le_bytes(b)
}

pub fn first_header(flags: FlagByte, tsc: Tsc48, ks: &[u8; 6], key_id_octet: u8) -> [u8; 9] {
    let m = mask_tsc(tsc, ks);
    [flags.encode(), m[0], m[1], m[2], m[3], m[4], m[5], key_id_octet, 0]
}

pub fn next_header(flags: FlagByte, iv16: u16, key_id_octet: u8) -> [u8; 5] {
    let b = iv16.to_le_bytes();
    [flags.encode(), b[0], b[1], key_id_octet, 0]
}

pub fn encap_msdu(sa: &mut SecurityAssociation, msdu: &Msdu, max_fragment: usize, now_ms: u64) -> Result<Vec<Mpdu>> {
    sa.ensure_not_blocked(now_ms)?;
    check_priority(msdu)?;
    let n = fragment_count(msdu.payload.len() + MIC_LEN, max_fragment)?;
    if sa.tsc_remaining() < n as u64 {
        return Err(Error::TscExhausted);
    }
    let tscs = (0..n).map(|_| sa.next_tsc(now_ms)).collect::<Result<Vec<_>>>()?;

    let key = sa.keys.mic_tx;
    let mic = compute_mic(&key, &msdu.da, &msdu.sa, msdu.priority, Some(tscs[0]), &msdu.payload, &mut sa.ops);
    let mut data = msdu.payload.clone();
    data.extend_from_slice(&mic);

    let seq = sa.next_sequence_number();
    let key_id = sa.keys.key_id_octet();
    let mut out = Vec::with_capacity(n);
    for (f, tsc) in fragment(&data, max_fragment)?.into_iter().zip(tscs) {
        let mut flags = FlagByte { fragmented: n > 1, same_msdu: f.index > 0, ..Default::default() };
        let epoch_start = sa.force_epoch_start || sa.last_tx.is_none_or(|p| p.iv32 != tsc.iv32);
        let (kind, header) = if epoch_start {
            flags.ext_iv = true;
            sa.force_epoch_start = false;
            (FrameKind::MoTkipFirst, first_header(flags, tsc, &sa.keys.ks, key_id).to_vec())
        } else {
            flags.same_iv32 = true;
            flags.unit_increment = sa.last_tx.is_some_and(|p| p.iv16.wrapping_add(1) == tsc.iv16);
            (FrameKind::MoTkipNext, next_header(flags, tsc.iv16, key_id).to_vec())
        };
        sa.last_tx = Some(tsc);
        let seed = sa.seed_for(tsc);
        out.push(Mpdu {
            kind,
            mac: MacHeader { da: msdu.da, ta: sa.ta, sa: msdu.sa, seq, frag: f.index, more_frags: f.more },
            header,
            body: seal_body(&seed.0, &f.data, &mut sa.ops),
        });
    }
    Ok(out)
}

/// Recovers the full TSC from a MoTKIP header without touching receive state
/// beyond the resynchronisation counter.
fn recover_tsc(sa: &mut SecurityAssociation, mpdu: &Mpdu) -> Result<(Tsc48, FlagByte)> {
    let h = &mpdu.header;
    if h.len() != mpdu.kind.header_len() {
        return Err(Error::MalformedFrame(format!("{:?} header of {} octets", mpdu.kind, h.len())));
    }
    let flags = FlagByte::decode(h[0])?;
    if h[h.len() - 2] != sa.keys.key_id_octet() || h[h.len() - 1] != 0 {
        return Err(Error::MalformedFrame("MoTKIP key id or reserved octet does not match".into()));
    }
    let mac = &mpdu.mac;
    if flags.fragmented != mac.is_fragmented() || flags.same_msdu != (mac.frag > 0) {
        return Err(Error::MalformedFrame("fragmentation flags disagree with the MAC header".into()));
    }
    let tsc = match mpdu.kind {
        FrameKind::MoTkipFirst => {
            if !flags.ext_iv || flags.same_iv32 || flags.unit_increment {
                return Err(Error::MalformedFrame(format!("flags {:#04x} on a first-format frame", h[0])));
            }
            unmask_tsc(h[1..7].try_into().unwrap(), &sa.keys.ks)
        }
        FrameKind::MoTkipNext => {
            if flags.ext_iv || !flags.same_iv32 {
                return Err(Error::MalformedFrame(format!("flags {:#04x} on a subsequent-format frame", h[0])));
            }
            let iv32 = sa.rx_epoch_iv32.ok_or(Error::EpochMismatch)?;
            let tsc = Tsc48::new(iv32, u16::from_le_bytes([h[1], h[2]]));
            if flags.unit_increment {
                let predicted = sa.replay_window().highest().and_then(Tsc48::successor);
                if predicted != Some(tsc) {
                    // A frame was lost or reordered; the clear IV_L resynchronises us.
                    sa.rx_resyncs += 1;
                }
            }
            tsc
        }
        other => return Err(Error::SchemeMismatch { expected: "motkip".into(), found: format!("{other:?}") }),
    };
    Ok((tsc, flags))
}

pub fn decap_mpdu(sa: &mut SecurityAssociation, mpdu: &Mpdu, now_ms: u64) -> Result<Option<Msdu>> {
    sa.ensure_not_blocked(now_ms)?;
    let (tsc, flags) = recover_tsc(sa, mpdu)?;
    if !sa.replay_would_accept(tsc) {
        sa.push_event(now_ms, EventKind::ReplayDetected, Some(tsc), "TSC outside or already in the replay window");
        return Err(Error::ReplayDetected(tsc));
    }
    let seed = sa.seed_for(tsc);
    let frag = open_body(&seed.0, &mpdu.body, &mut sa.ops)?;
    sa.accept_frame(tsc);
    if flags.ext_iv && sa.rx_epoch_iv32.is_none_or(|e| tsc.iv32 >= e) {
        sa.rx_epoch_iv32 = Some(tsc.iv32);
    }
    let m = mpdu.mac;
    match sa.reassembly.push(m.seq, m.frag, m.more_frags, tsc, frag)? {
        None => Ok(None),
        Some(r) => verify_mic(sa, &m, r.data, Some(r.first_tsc), r.first_tsc, now_ms).map(Some),
    }
}
