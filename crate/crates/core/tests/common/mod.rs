#![allow(dead_code)]

pub mod oracle;

use motkip_core::codec::{KeyMaterial, Msdu, Scheme};
use motkip_core::keymix::MacAddr;
use motkip_core::session::{Role, SecurityAssociation};

pub const TA: MacAddr = MacAddr([0x02, 0, 0, 0, 0, 0x01]);
pub const DA: MacAddr = MacAddr([0x02, 0, 0, 0, 0, 0xFE]);

/// Annex key-mixing vectors: (TK, TA, IV32, P1K, IV16, seed).
pub const ANNEX: [(&str, &str, u32, &str, u16, &str); 5] = [
    (
        "000102030405060708090a0b0c0d0e0f",
        "102233445566",
        0x0000_0000,
        "3dd2016e76f48697b2e8",
        0x0000,
        "00200033ea8d2f60ca6d1374234a660b",
    ),
    (
        "000102030405060708090a0b0c0d0e0f",
        "102233445566",
        0x0000_0000,
        "3dd2016e76f48697b2e8",
        0x0001,
        "00200190ffdc314389a9d9d074fd20aa",
    ),
    (
        "63893b250840b8ae0bd0fa7e61d2783e",
        "64f2eaeddc25",
        0x20dc_fd43,
        "7c6749d79724b5e9b4f1",
        0xffff,
        "ff7fff93810fc6e58f5dd326251544ce",
    ),
    (
        "63893b250840b8ae0bd0fa7e61d2783e",
        "64f2eaeddc25",
        0x20dc_fd44,
        "5a5d73a8a8592ec1dc8b",
        0x0000,
        "002000498ca471fcfbfaa16e3610f005",
    ),
    (
        "983a16ef4facb351aa9ecc271d7309e2",
        "509c4b1727d9",
        0xf0a4_10fc,
        "f2dfebb188d35923a07c",
        0x058c,
        "05258cf4d85152f4d9af1a64f1d07021",
    ),
];

pub fn hex<const N: usize>(s: &str) -> [u8; N] {
    let clean: String = s.split_whitespace().collect();
    hex::decode(clean).unwrap().try_into().unwrap()
}

pub fn p1k_words(s: &str) -> [u16; 5] {
    let b: [u8; 10] = hex(s);
    std::array::from_fn(|i| u16::from_be_bytes([b[2 * i], b[2 * i + 1]]))
}

/// A transmitter and the matching receiver for one scheme.
pub fn pair(scheme: Scheme, seed: u64) -> (SecurityAssociation, SecurityAssociation) {
    let keys = KeyMaterial::from_seed(seed);
    let tx = SecurityAssociation::new(scheme, Role::Transmitter, keys.clone(), TA);
    let rx = SecurityAssociation::new(scheme, Role::Receiver, keys.peer(), TA);
    (tx, rx)
}

pub fn msdu(payload: Vec<u8>) -> Msdu {
    Msdu::new(DA, TA, payload)
}
