//! Straight transcription of the 802.11i key-mixing pseudocode. The S-box is
//! rebuilt from GF(2^8) arithmetic instead of copying the library table.

fn gf_mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        let carry = a & 0x80;
        a <<= 1;
        if carry != 0 {
            a ^= 0x1B;
        }
        b >>= 1;
    }
    p
}

fn gf_inv(a: u8) -> u8 {
    if a == 0 {
        return 0;
    }
    (1..=255u8).find(|&b| gf_mul(a, b) == 1).unwrap()
}

fn aes_sbox(x: u8) -> u8 {
    let b = gf_inv(x);
    b ^ b.rotate_left(1) ^ b.rotate_left(2) ^ b.rotate_left(3) ^ b.rotate_left(4) ^ 0x63
}

pub struct Oracle {
    t0: [u16; 256],
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

fn lo8(v: u16) -> u8 {
    v as u8
}

fn hi8(v: u16) -> u8 {
    (v >> 8) as u8
}

fn mk16(hi: u8, lo: u8) -> u16 {
    (hi as u16) << 8 | lo as u16
}

fn rotr1(v: u16) -> u16 {
    v.rotate_right(1)
}

impl Oracle {
    pub fn new() -> Self {
        let mut t0 = [0u16; 256];
        for (i, t) in t0.iter_mut().enumerate() {
            let s = aes_sbox(i as u8);
            *t = mk16(gf_mul(s, 2), gf_mul(s, 3));
        }
        Self { t0 }
    }

    /// `_S_[v] = TSbox[0][Lo8(v)] ^ TSbox[1][Hi8(v)]`, TSbox[1] being the byte-swapped TSbox[0].
    pub fn s(&self, v: u16) -> u16 {
        self.t0[lo8(v) as usize] ^ self.t0[hi8(v) as usize].swap_bytes()
    }

    pub fn phase1(&self, tk: &[u8; 16], ta: &[u8; 6], iv32: u32) -> [u16; 5] {
        let mut p = [0u16; 5];
        p[0] = iv32 as u16;
        p[1] = (iv32 >> 16) as u16;
        p[2] = mk16(ta[1], ta[0]);
        p[3] = mk16(ta[3], ta[2]);
        p[4] = mk16(ta[5], ta[4]);
        for i in 0..8usize {
            let j = 2 * (i & 1);
            p[0] = p[0].wrapping_add(self.s(p[4] ^ mk16(tk[1 + j], tk[j])));
            p[1] = p[1].wrapping_add(self.s(p[0] ^ mk16(tk[5 + j], tk[4 + j])));
            p[2] = p[2].wrapping_add(self.s(p[1] ^ mk16(tk[9 + j], tk[8 + j])));
            p[3] = p[3].wrapping_add(self.s(p[2] ^ mk16(tk[13 + j], tk[12 + j])));
            p[4] = p[4].wrapping_add(self.s(p[3] ^ mk16(tk[1 + j], tk[j]))).wrapping_add(i as u16);
        }
        p
    }

    pub fn phase2(&self, p1k: &[u16; 5], tk: &[u8; 16], iv16: u16) -> [u8; 16] {
        let mut ppk = [0u16; 6];
        ppk[..5].copy_from_slice(p1k);
        ppk[5] = p1k[4].wrapping_add(iv16);
        let tkw = |i: usize| mk16(tk[2 * i + 1], tk[2 * i]);
        for i in 0..6 {
            let prev = ppk[(i + 5) % 6];
            ppk[i] = ppk[i].wrapping_add(self.s(prev ^ tkw(i)));
        }
        ppk[0] = ppk[0].wrapping_add(rotr1(ppk[5] ^ tkw(6)));
        ppk[1] = ppk[1].wrapping_add(rotr1(ppk[0] ^ tkw(7)));
        for i in 2..6 {
            ppk[i] = ppk[i].wrapping_add(rotr1(ppk[i - 1]));
        }
        let mut seed = [0u8; 16];
        seed[0] = hi8(iv16);
        seed[1] = (hi8(iv16) | 0x20) & 0x7F;
        seed[2] = lo8(iv16);
        seed[3] = lo8((ppk[5] ^ tkw(0)) >> 1);
        for i in 0..6 {
            seed[4 + 2 * i] = lo8(ppk[i]);
            seed[5 + 2 * i] = hi8(ppk[i]);
        }
        seed
    }
}
