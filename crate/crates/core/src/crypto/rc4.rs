use crate::error::{Error, Result};

/// RC4 cipher state after key scheduling.
#[derive(Clone, PartialEq, Eq)]
pub struct Rc4State {
    s: [u8; 256],
    i: u8,
    j: u8,
}

impl std::fmt::Debug for Rc4State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rc4State").field("i", &self.i).field("j", &self.j).finish_non_exhaustive()
    }
}

impl Rc4State {
    /// Runs the 256-step key schedule. Keys must be 1..=256 octets.
    pub fn new(key: &[u8]) -> Result<Self> {
        if key.is_empty() || key.len() > 256 {
            return Err(Error::InvalidKeyLength(key.len()));
        }
        let mut s = [0u8; 256];
        for (i, v) in s.iter_mut().enumerate() {
            *v = i as u8;
        }
        let mut j = 0u8;
        for i in 0..256 {
            j = j.wrapping_add(s[i]).wrapping_add(key[i % key.len()]);
            s.swap(i, j as usize);
        }
        Ok(Self { s, i: 0, j: 0 })
    }

    pub fn next_byte(&mut self) -> u8 {
        self.i = self.i.wrapping_add(1);
        self.j = self.j.wrapping_add(self.s[self.i as usize]);
        self.s.swap(self.i as usize, self.j as usize);
        let idx = self.s[self.i as usize].wrapping_add(self.s[self.j as usize]);
        self.s[idx as usize]
    }

    /// XORs the next `data.len()` keystream octets into `data`.
    pub fn apply_keystream(&mut self, data: &mut [u8]) {
        for b in data {
            *b ^= self.next_byte();
        }
    }

    pub fn permutation(&self) -> &[u8; 256] {
        &self.s
    }

    pub fn indices(&self) -> (u8, u8) {
        (self.i, self.j)
    }
}

/// Encrypts or decrypts `data` under `key`; the operation is its own inverse.
pub fn rc4_apply(key: &[u8], data: &[u8]) -> Result<Vec<u8>> {
    let mut state = Rc4State::new(key)?;
    let mut out = data.to_vec();
    state.apply_keystream(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_permutation(s: &[u8; 256]) -> bool {
        let mut seen = [false; 256];
        for &v in s {
            seen[v as usize] = true;
        }
        seen.iter().all(|&b| b)
    }

    #[test]
    fn zero_key_gives_permutation() {
        let st = Rc4State::new(&[0u8; 16]).unwrap();
        assert!(is_permutation(st.permutation()));
        assert_eq!(st.indices(), (0, 0));
    }

    #[test]
    fn key_length_bounds() {
        assert_eq!(Rc4State::new(&[]), Err(Error::InvalidKeyLength(0)));
        assert_eq!(Rc4State::new(&[1u8; 257]), Err(Error::InvalidKeyLength(257)));
        assert!(Rc4State::new(&[1u8; 256]).is_ok());
        assert!(rc4_apply(&[], b"x").is_err());
    }

    #[test]
    fn deterministic_init() {
        assert_eq!(Rc4State::new(b"abc").unwrap(), Rc4State::new(b"abc").unwrap());
    }

    #[test]
    fn empty_data() {
        assert!(rc4_apply(b"key", &[]).unwrap().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn involution(key in proptest::collection::vec(any::<u8>(), 1..=256),
                      data in proptest::collection::vec(any::<u8>(), 0..512)) {
            let once = rc4_apply(&key, &data).unwrap();
            prop_assert_eq!(once.len(), data.len());
            prop_assert_eq!(rc4_apply(&key, &once).unwrap(), data);
        }

        #[test]
        fn state_stays_permutation(key in proptest::collection::vec(any::<u8>(), 1..32), n in 0usize..2000) {
            let mut st = Rc4State::new(&key).unwrap();
            for _ in 0..n {
                st.next_byte();
            }
            prop_assert!(is_permutation(st.permutation()));
        }
    }
}
