//! Splitting an MSDU (payload plus MIC) into MPDU-sized pieces and putting it back together.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::keymix::Tsc48;

pub const MIN_FRAGMENT: usize = 16;
/// The MAC header carries a 4-bit fragment number.
pub const MAX_FRAGMENTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub index: u8,
    pub more: bool,
    pub data: Vec<u8>,
}

/// Number of fragments `len` octets split into.
pub fn fragment_count(len: usize, max_fragment: usize) -> Result<usize> {
    if max_fragment < MIN_FRAGMENT {
        return Err(Error::InvalidFragmentSize(max_fragment));
    }
    let n = len.div_ceil(max_fragment).max(1);
    if n > MAX_FRAGMENTS {
        return Err(Error::InvalidConfig(format!(
            "{len} octets need {n} fragments of {max_fragment}; at most {MAX_FRAGMENTS} allowed"
        )));
    }
    Ok(n)
}

pub fn fragment(data: &[u8], max_fragment: usize) -> Result<Vec<Fragment>> {
    let n = fragment_count(data.len(), max_fragment)?;
    if data.is_empty() {
        return Ok(vec![Fragment { index: 0, more: false, data: Vec::new() }]);
    }
    Ok(data
        .chunks(max_fragment)
        .enumerate()
        .map(|(i, c)| Fragment { index: i as u8, more: i + 1 < n, data: c.to_vec() })
        .collect())
}

/// Reassembles fragments given in any order.
pub fn reassemble(mut fragments: Vec<Fragment>) -> Result<Vec<u8>> {
    fragments.sort_by_key(|f| f.index);
    for pair in fragments.windows(2) {
        if pair[0].index == pair[1].index {
            return Err(Error::DuplicateFragment(pair[0].index));
        }
    }
    let last = fragments.iter().find(|f| !f.more).map(|f| f.index);
    let Some(last) = last else {
        return Err(Error::MissingFragment(fragments.last().map_or(0, |f| f.index + 1)));
    };
    for (expect, f) in (0..=last).zip(fragments.iter()) {
        if f.index != expect {
            return Err(Error::MissingFragment(expect));
        }
    }
    if fragments.len() != last as usize + 1 {
        // Fragments beyond the one marked final.
        return Err(Error::MalformedFrame(format!("fragment after final index {last}")));
    }
    Ok(fragments.into_iter().flat_map(|f| f.data).collect())
}

#[derive(Debug, Clone, Default)]
struct Partial {
    pieces: BTreeMap<u8, (Vec<u8>, Tsc48)>,
    last: Option<u8>,
}

/// A completed MSDU body and the TSC its first fragment was sent under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reassembled {
    pub data: Vec<u8>,
    pub first_tsc: Tsc48,
}

/// Receive-side buffer of partially received MSDUs keyed by sequence number.
#[derive(Debug, Clone, Default)]
pub struct Reassembler {
    pending: BTreeMap<u16, Partial>,
    order: VecDeque<u16>,
    dropped: u64,
}

/// Partial MSDUs kept before the oldest is abandoned.
pub const MAX_PENDING_MSDUS: usize = 16;

impl Reassembler {
    pub fn push(&mut self, seq: u16, index: u8, more: bool, tsc: Tsc48, data: Vec<u8>) -> Result<Option<Reassembled>> {
        if index == 0 && !more {
            return Ok(Some(Reassembled { data, first_tsc: tsc }));
        }
        if !self.pending.contains_key(&seq) {
            if self.order.len() == MAX_PENDING_MSDUS {
                if let Some(old) = self.order.pop_front() {
                    self.pending.remove(&old);
                    self.dropped += 1;
                }
            }
            self.order.push_back(seq);
        }
        let partial = self.pending.entry(seq).or_default();
        if partial.pieces.contains_key(&index) {
            return Err(Error::DuplicateFragment(index));
        }
        partial.pieces.insert(index, (data, tsc));
        if !more {
            partial.last = Some(index);
        }
        let Some(last) = partial.last else { return Ok(None) };
        if partial.pieces.len() != last as usize + 1 || partial.pieces.keys().next_back() != Some(&last) {
            return Ok(None);
        }
        let partial = self.pending.remove(&seq).expect("present");
        self.order.retain(|s| *s != seq);
        let first_tsc = partial.pieces[&0].1;
        let data = partial.pieces.into_values().flat_map(|(d, _)| d).collect();
        Ok(Some(Reassembled { data, first_tsc }))
    }

    /// MSDUs abandoned because too many were pending.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}
