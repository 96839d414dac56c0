use crate::keymix::Tsc48;

/// Number of TSC values remembered behind the highest accepted one.
pub const REPLAY_WINDOW: u64 = 16;

/// Receive-side replay memory.
///
/// A TSC is accepted iff it has not been accepted before and lies within 16
/// of the highest accepted value. Bit `k` of `seen` marks `highest - k`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayWindow {
    highest: Option<u64>,
    seen: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayVerdict {
    Accept,
    Reject,
}

impl ReplayWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn highest(&self) -> Option<Tsc48> {
        self.highest.map(Tsc48::from_u64)
    }

    pub fn would_accept(&self, tsc: Tsc48) -> bool {
        let t = tsc.as_u64();
        match self.highest {
            None => true,
            Some(h) if t > h => true,
            Some(h) => {
                let back = h - t;
                back < REPLAY_WINDOW && self.seen & (1 << back) == 0
            }
        }
    }

    /// Marks `tsc` as received. Callers check [`would_accept`](Self::would_accept) first.
    pub fn record(&mut self, tsc: Tsc48) {
        let t = tsc.as_u64();
        match self.highest {
            None => {
                self.highest = Some(t);
                self.seen = 1;
            }
            Some(h) if t > h => {
                let shift = t - h;
                self.seen = if shift >= REPLAY_WINDOW { 0 } else { self.seen << shift };
                self.seen |= 1;
                self.highest = Some(t);
            }
            Some(h) => {
                let back = h - t;
                if back < REPLAY_WINDOW {
                    self.seen |= 1 << back;
                }
            }
        }
    }

    pub fn check_and_record(&mut self, tsc: Tsc48) -> ReplayVerdict {
        if self.would_accept(tsc) {
            self.record(tsc);
            ReplayVerdict::Accept
        } else {
            ReplayVerdict::Reject
        }
    }

    /// Accepted TSC values still inside the window, newest first.
    pub fn entries(&self) -> Vec<Tsc48> {
        let Some(h) = self.highest else { return Vec::new() };
        (0..REPLAY_WINDOW)
            .filter(|k| self.seen & (1 << k) != 0 && *k <= h)
            .map(|k| Tsc48::from_u64(h - k))
            .collect()
    }

    pub fn clear(&mut self) {
        *self = Self::default();
    }
}
