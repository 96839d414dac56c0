mod common;

use common::{msdu, pair};
use motkip_core::codec::dump::{decode_dump, encode_dump};
use motkip_core::codec::motkip::{mask_tsc, unmask_tsc};
use motkip_core::codec::wep::{wep_decap, wep_encap};
use motkip_core::codec::{
    decapsulate, encapsulate, fragment, FlagByte, FrameKind, KeyMaterial, Mpdu, Scheme, ICV_LEN, MIC_LEN,
};
use motkip_core::keymix::Tsc48;
use motkip_core::session::{Role, SecurityAssociation};
use motkip_core::Error;
use proptest::prelude::*;

fn send(tx: &mut SecurityAssociation, payload: &[u8], max_fragment: usize) -> Vec<Mpdu> {
    encapsulate(tx, &msdu(payload.to_vec()), max_fragment, 0).unwrap()
}

fn deliver(rx: &mut SecurityAssociation, frames: &[Mpdu]) -> Option<Vec<u8>> {
    let mut out = None;
    for f in frames {
        if let Some(m) = decapsulate(rx, f, 0).unwrap() {
            assert!(out.is_none());
            out = Some(m.payload);
        }
    }
    out
}

fn flags(f: &Mpdu) -> FlagByte {
    FlagByte::decode(f.header[0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roundtrip_any_scheme(
        scheme in prop::sample::select(Scheme::ALL.to_vec()),
        payload in prop::collection::vec(any::<u8>(), 1..3000),
        max_fragment in 16usize..2400,
        seed in any::<u64>(),
    ) {
        let max_fragment = max_fragment.max((payload.len() + MIC_LEN).div_ceil(16));
        let (mut tx, mut rx) = pair(scheme, seed);
        for _ in 0..2 {
            let frames = send(&mut tx, &payload, max_fragment);
            prop_assert_eq!(deliver(&mut rx, &frames), Some(payload.clone()));
        }
    }

    #[test]
    fn wire_parse_is_identity(
        scheme in prop::sample::select(Scheme::ALL.to_vec()),
        payload in prop::collection::vec(any::<u8>(), 1..600),
    ) {
        let (mut tx, _) = pair(scheme, 3);
        let mut frames = send(&mut tx, &payload, 256);
        frames.extend(send(&mut tx, &payload, 256));
        for f in &frames {
            prop_assert_eq!(&Mpdu::parse(f.kind, &f.to_bytes()).unwrap(), f);
        }
        prop_assert_eq!(decode_dump(&encode_dump(&frames)).unwrap(), frames);
    }
}

#[test]
fn per_mpdu_expansion_constants() {
    let expect = [
        (FrameKind::Plain, 0),
        (FrameKind::Wep, 8),
        (FrameKind::Tkip, 12),
        (FrameKind::MoTkipFirst, 13),
        (FrameKind::MoTkipNext, 9),
    ];
    for (kind, n) in expect {
        assert_eq!(kind.header_len() + if kind.is_protected() { ICV_LEN } else { 0 }, n, "{kind:?}");
        assert_eq!(kind.expansion(), n);
    }
    assert_eq!(MIC_LEN, 8);
    assert_eq!(Scheme::Tkip.mic_len(), 8);
    assert_eq!(Scheme::MoTkip.mic_len(), 8);
    assert_eq!(Scheme::Wep.mic_len(), 0);
}

#[test]
fn tkip_length_arithmetic() {
    let (mut tx, _) = pair(Scheme::Tkip, 1);
    let one = send(&mut tx, &[7; 100], 1000);
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].body.len(), 112);

    let (mut tx, _) = pair(Scheme::Tkip, 1);
    let two = send(&mut tx, &[7; 2000], 1024);
    assert_eq!(two.len(), 2);
    let t0 = motkip_core::codec::tkip::parse_tkip_header(&two[0].header).unwrap();
    let t1 = motkip_core::codec::tkip::parse_tkip_header(&two[1].header).unwrap();
    assert_eq!(t0.successor(), Some(t1));
    assert_eq!((two[0].fragment_index(), two[0].more_fragments()), (0, true));
    assert_eq!((two[1].fragment_index(), two[1].more_fragments()), (1, false));
}

#[test]
fn fragment_sizes() {
    let sizes: Vec<_> = fragment(&[0; 3000], 1024).unwrap().iter().map(|f| f.data.len()).collect();
    assert_eq!(sizes, [1024, 1024, 952]);
}

#[test]
fn wep_regression_vector() {
    let key: [u8; 13] = std::array::from_fn(|i| i as u8 + 1);
    let f = wep_encap(&key, 0xABCDEF, b"WEP-128 regression");
    assert_eq!(f.header, [0xAB, 0xCD, 0xEF, 0x00]);
    assert_eq!(hex::encode(&f.body), "172d96248c2c787436df11978d5f2d3392a8b1f72fee");
    assert_eq!(f.body.len(), 18 + 4);
    assert_eq!(wep_decap(&key, &f).unwrap(), b"WEP-128 regression");
}

#[test]
fn motkip_three_packet_session() {
    let (mut tx, mut rx) = pair(Scheme::MoTkip, 9);
    let ks = tx.keys().ks;
    let mut all = Vec::new();
    for i in 0..3u8 {
        let frames = send(&mut tx, &[i; 40], 2304);
        assert_eq!(frames.len(), 1);
        assert_eq!(deliver(&mut rx, &frames), Some(vec![i; 40]));
        all.extend(frames);
    }
    assert_eq!(all[0].kind, FrameKind::MoTkipFirst);
    assert_eq!(all[0].header.len(), 9);
    let f0 = flags(&all[0]);
    assert!(f0.ext_iv && !f0.same_iv32);
    let masked: [u8; 6] = all[0].header[1..7].try_into().unwrap();
    assert_eq!(unmask_tsc(masked, &ks), Tsc48::new(0, 0));
    assert_eq!(masked, mask_tsc(Tsc48::new(0, 0), &ks));
    for f in &all[1..] {
        assert_eq!(f.kind, FrameKind::MoTkipNext);
        assert_eq!(f.header.len(), 5);
        let fl = flags(f);
        assert!(!fl.ext_iv && fl.same_iv32 && fl.unit_increment);
    }
    assert_eq!(all[2].header[1..3], [2, 0]);
}

#[test]
fn motkip_recovers_after_a_lost_packet() {
    let (mut tx, mut rx) = pair(Scheme::MoTkip, 4);
    for i in 1..=7u8 {
        let frames = send(&mut tx, &[i; 64], 2304);
        if i == 6 {
            continue;
        }
        assert_eq!(deliver(&mut rx, &frames), Some(vec![i; 64]), "packet {i}");
    }
    assert_eq!(rx.resync_count(), 1);
}

#[test]
fn motkip_next_before_first_is_epoch_mismatch() {
    let (mut tx, mut rx) = pair(Scheme::MoTkip, 4);
    let _first = send(&mut tx, &[1; 10], 2304);
    let second = send(&mut tx, &[2; 10], 2304);
    assert!(matches!(decapsulate(&mut rx, &second[0], 0), Err(Error::EpochMismatch)));
}

#[test]
fn motkip_wrong_ks_is_caught_by_the_icv() {
    let keys = KeyMaterial::from_seed(8);
    let mut tx = SecurityAssociation::new(Scheme::MoTkip, Role::Transmitter, keys.clone(), common::TA);
    let mut wrong = keys.peer();
    wrong.ks[0] ^= 0x01;
    let mut rx = SecurityAssociation::new(Scheme::MoTkip, Role::Receiver, wrong, common::TA);
    let frames = send(&mut tx, &[5; 80], 2304);
    assert!(matches!(decapsulate(&mut rx, &frames[0], 0), Err(Error::IcvMismatch)));
    assert_eq!(rx.ops().michael_calls, 0);
}

#[test]
fn corrupted_ciphertext_is_icv_mismatch_without_countermeasures() {
    for scheme in [Scheme::Tkip, Scheme::MoTkip] {
        let (mut tx, mut rx) = pair(scheme, 2);
        let mut frames = send(&mut tx, &[1; 200], 2304);
        frames[0].body[17] ^= 0x40;
        assert!(matches!(decapsulate(&mut rx, &frames[0], 0), Err(Error::IcvMismatch)));
        assert!(rx.countermeasures().failure_history().is_empty());
        assert_eq!(rx.ops().michael_calls, 0);
    }
}

#[test]
fn replay_rejected_before_decryption() {
    for scheme in [Scheme::Tkip, Scheme::MoTkip] {
        let (mut tx, mut rx) = pair(scheme, 2);
        let frames = send(&mut tx, &[1; 200], 2304);
        deliver(&mut rx, &frames).unwrap();
        let rc4 = rx.ops().rc4_octets;
        assert!(matches!(decapsulate(&mut rx, &frames[0], 0), Err(Error::ReplayDetected(_))));
        assert_eq!(rx.ops().rc4_octets, rc4);
    }
}

#[test]
fn out_of_order_fragments_reassemble() {
    for scheme in Scheme::ALL {
        let (mut tx, mut rx) = pair(scheme, 6);
        let payload: Vec<u8> = (0..1000).map(|i| i as u8).collect();
        let warmup = send(&mut tx, &[0; 4], 2304);
        deliver(&mut rx, &warmup);
        let mut frames = send(&mut tx, &payload, 128);
        assert!(frames.len() > 4);
        frames.swap(1, 3);
        frames.reverse();
        if scheme == Scheme::MoTkip {
            // The epoch is already known, so every fragment is next-format.
            assert!(frames.iter().all(|f| f.kind == FrameKind::MoTkipNext));
        }
        assert_eq!(deliver(&mut rx, &frames), Some(payload), "{scheme}");
    }
}

#[test]
fn motkip_saves_three_octets_per_subsequent_frame() {
    for n in [2usize, 10, 100] {
        let count = |scheme| {
            let (mut tx, _) = pair(scheme, 1);
            (0..n).flat_map(|_| send(&mut tx, &[0; 300], 2304)).map(|f| f.wire_len()).sum::<usize>() as i64
        };
        assert_eq!(count(Scheme::MoTkip), count(Scheme::Tkip) + 1 - 3 * (n as i64 - 1));
    }
}

#[test]
fn flag_byte_bijection() {
    let mut seen = std::collections::HashSet::new();
    for b in 0u8..=255 {
        match FlagByte::decode(b) {
            Ok(f) => {
                assert_eq!(f.encode(), b);
                seen.insert(b);
            }
            Err(e) => {
                assert!(b & 0xE0 != 0);
                assert!(matches!(e, Error::ReservedBitsSet(_)));
            }
        }
    }
    assert_eq!(seen.len(), 32);
    assert_eq!(FlagByte { ext_iv: true, ..Default::default() }.encode(), 0x01);
}

#[test]
fn nonzero_priority_rejected() {
    let (mut tx, _) = pair(Scheme::Tkip, 1);
    let mut m = msdu(vec![1; 10]);
    m.priority = 3;
    assert!(matches!(encapsulate(&mut tx, &m, 2304, 0), Err(Error::InvalidConfig(_))));
}

#[test]
fn scheme_mismatch_rejected() {
    let (mut tx, _) = pair(Scheme::Tkip, 1);
    let (_, mut rx) = pair(Scheme::MoTkip, 1);
    let frames = send(&mut tx, &[1; 10], 2304);
    assert!(decapsulate(&mut rx, &frames[0], 0).is_err());
}

#[test]
fn truncated_dump_reports_record() {
    let (mut tx, _) = pair(Scheme::Wep, 1);
    let frames = send(&mut tx, &[1; 50], 2304);
    let mut bytes = encode_dump(&[frames[0].clone(), frames[0].clone()]);
    bytes.truncate(bytes.len() - 3);
    let err = decode_dump(&bytes).unwrap_err().to_string();
    assert!(err.contains("record 1"), "{err}");
}

#[test]
fn key_file_roundtrip_and_errors() {
    let k = KeyMaterial { key_id: 2, ..KeyMaterial::from_seed(12) };
    assert_eq!(KeyMaterial::from_key_file(&k.to_key_file()).unwrap(), k);
    let short = k.to_key_file().replace(&format!("ks={}", hex::encode(k.ks)), "ks=0102");
    assert!(matches!(KeyMaterial::from_key_file(&short), Err(Error::InvalidKeyLength(2))));
    let missing: String = k.to_key_file().lines().filter(|l| !l.starts_with("tk=")).map(|l| format!("{l}\n")).collect();
    assert!(matches!(KeyMaterial::from_key_file(&missing), Err(Error::InvalidConfig(_))));
    assert!(KeyMaterial::from_key_file(&(k.to_key_file() + "key_id=9\n")).is_err());
}
