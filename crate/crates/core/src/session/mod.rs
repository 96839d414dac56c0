//! Per-association state: TSC sequencing and exhaustion, the P1K cache and
//! seed queue, the 16-entry replay memory, MIC-failure countermeasures and
//! rekeying.
//!
//! A [`SecurityAssociation`] is single-writer; the codec reads and updates it
//! on every frame. Time is always passed in by the caller (see [`Clock`]).

mod countermeasures;
mod replay;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use countermeasures::{CountermeasureAction, Countermeasures, BLACKOUT_MS, MIC_FAILURE_WINDOW_MS};
pub use replay::{ReplayVerdict, ReplayWindow, REPLAY_WINDOW};

use crate::codec::fragment::Reassembler;
use crate::codec::{KeyMaterial, Scheme};
use crate::error::{Error, Result};
use crate::keymix::{phase2, MacAddr, P1k, P1kCache, TkId, Tsc48, WepSeed};
use crate::ops::OpCounters;

/// Default per-key packet budget before a rekey is recommended (the 16-bit TSC space).
pub const DEFAULT_REKEY_BUDGET: u64 = 1 << 16;
pub const SEED_QUEUE_CAPACITY: usize = 64;

/// Monotone millisecond clock, advanced explicitly by its owner.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clock {
    now_ms: u64,
}

impl Clock {
    pub fn new(now_ms: u64) -> Self {
        Self { now_ms }
    }

    pub fn now(&self) -> u64 {
        self.now_ms
    }

    /// Moves forward to `t`; earlier values are ignored so the clock never decreases.
    pub fn advance_to(&mut self, t: u64) {
        self.now_ms = self.now_ms.max(t);
    }

    pub fn advance_by(&mut self, dt: u64) {
        self.now_ms += dt;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Transmitter,
    Receiver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Disassociate,
    RekeyRequired,
    RekeyRecommended,
    Blackout,
    MicFailure,
    ReplayDetected,
}

/// One line of the JSON-lines event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    pub event: EventKind,
    /// 48-bit TSC as an integer, when the event concerns a frame.
    pub tsc: Option<u64>,
    pub details: String,
}

impl Event {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event serialization cannot fail")
    }
}

pub fn events_to_json_lines(events: &[Event]) -> String {
    events.iter().map(|e| e.to_json_line() + "\n").collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Packets per temporal key before `RekeyRecommended` is raised.
    pub rekey_budget: u64,
    /// When set, the budget is a hard limit and further TSC requests fail
    /// with `TscExhausted` instead of continuing into the 48-bit space.
    pub cease_at_budget: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { rekey_budget: DEFAULT_REKEY_BUDGET, cease_at_budget: false }
    }
}

#[derive(Debug, Clone)]
pub struct SecurityAssociation {
    pub(crate) scheme: Scheme,
    role: Role,
    config: SessionConfig,
    pub(crate) keys: KeyMaterial,
    tk_id: TkId,
    key_generation: u64,
    /// Address mixed into phase 1: ours when transmitting, the peer's when receiving.
    pub(crate) ta: MacAddr,
    pub(crate) bssid: MacAddr,

    next_tsc: Option<Tsc48>,
    last_issued: Option<Tsc48>,
    packets_under_key: u64,
    next_seq: u16,
    pub(crate) force_epoch_start: bool,
    pub(crate) last_tx: Option<Tsc48>,

    p1k_cache: P1kCache,
    seed_queue: VecDeque<(Tsc48, WepSeed)>,
    replay: ReplayWindow,
    pub(crate) rx_epoch_iv32: Option<u32>,
    pub(crate) rx_resyncs: u64,
    pub(crate) reassembly: Reassembler,

    countermeasures: Countermeasures,
    pub(crate) ops: OpCounters,
    events: Vec<Event>,
}

impl SecurityAssociation {
    pub fn new(scheme: Scheme, role: Role, keys: KeyMaterial, ta: MacAddr) -> Self {
        Self::with_config(scheme, role, keys, ta, SessionConfig::default())
    }

    pub fn with_config(scheme: Scheme, role: Role, keys: KeyMaterial, ta: MacAddr, config: SessionConfig) -> Self {
        Self {
            scheme,
            role,
            config,
            keys,
            tk_id: TkId(0),
            key_generation: 0,
            ta,
            bssid: MacAddr::default(),
            next_tsc: Some(Tsc48::default()),
            last_issued: None,
            packets_under_key: 0,
            next_seq: 0,
            force_epoch_start: true,
            last_tx: None,
            p1k_cache: P1kCache::new(),
            seed_queue: VecDeque::new(),
            replay: ReplayWindow::new(),
            rx_epoch_iv32: None,
            rx_resyncs: 0,
            reassembly: Reassembler::default(),
            countermeasures: Countermeasures::default(),
            ops: OpCounters::default(),
            events: Vec::new(),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn keys(&self) -> &KeyMaterial {
        &self.keys
    }

    pub fn transmitter_address(&self) -> MacAddr {
        self.ta
    }

    pub fn tk_id(&self) -> TkId {
        self.tk_id
    }

    pub fn ops(&self) -> &OpCounters {
        &self.ops
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    pub fn countermeasures(&self) -> &Countermeasures {
        &self.countermeasures
    }

    pub fn replay_window(&self) -> &ReplayWindow {
        &self.replay
    }

    pub fn p1k_cache(&self) -> &P1kCache {
        &self.p1k_cache
    }

    pub fn seed_queue_len(&self) -> usize {
        self.seed_queue.len()
    }

    pub fn precomputed_seeds(&self) -> impl Iterator<Item = &(Tsc48, WepSeed)> {
        self.seed_queue.iter()
    }

    /// Times a subsequent-format frame claimed a unit increment that did not
    /// match the receiver's own prediction (e.g. after a loss).
    pub fn resync_count(&self) -> u64 {
        self.rx_resyncs
    }

    /// The TSC the next `next_tsc` call will hand out, if any remain.
    pub fn peek_tsc(&self) -> Option<Tsc48> {
        self.next_tsc
    }

    pub fn packets_under_key(&self) -> u64 {
        self.packets_under_key
    }

    /// Starts the counter at an arbitrary value (tests and resumption).
    pub fn set_next_tsc(&mut self, tsc: Tsc48) {
        self.next_tsc = Some(tsc);
    }

    pub fn set_bssid(&mut self, bssid: MacAddr) {
        self.bssid = bssid;
    }

    /// Makes the next MoTKIP frame carry the masked extended IV again.
    pub fn request_epoch_restart(&mut self) {
        self.force_epoch_start = true;
    }

    pub(crate) fn push_event(&mut self, t: u64, event: EventKind, tsc: Option<Tsc48>, details: impl Into<String>) {
        self.events.push(Event { t, event, tsc: tsc.map(Tsc48::as_u64), details: details.into() });
    }

    pub fn ensure_not_blocked(&self, now_ms: u64) -> Result<()> {
        match self.countermeasures.blocked_until(now_ms) {
            Some(until_ms) => Err(Error::Blackout { until_ms }),
            None => Ok(()),
        }
    }

    /// TSC values left before the counter or the configured budget runs out.
    pub fn tsc_remaining(&self) -> u64 {
        let Some(next) = self.next_tsc else { return 0 };
        let space = Tsc48::MAX - next.as_u64() + 1;
        if self.config.cease_at_budget {
            space.min(self.config.rekey_budget.saturating_sub(self.packets_under_key))
        } else {
            space
        }
    }

    /// Hands out the current TSC and advances the counter.
    pub fn next_tsc(&mut self, now_ms: u64) -> Result<Tsc48> {
        self.ensure_not_blocked(now_ms)?;
        if self.config.cease_at_budget && self.packets_under_key >= self.config.rekey_budget {
            return Err(Error::TscExhausted);
        }
        let tsc = self.next_tsc.ok_or(Error::TscExhausted)?;
        self.next_tsc = tsc.successor();

        if let Some(prev) = self.last_issued {
            if prev.iv32 != tsc.iv32 {
                self.p1k_cache.retire_iv32(prev.iv32);
                self.seed_queue.clear();
            }
        }
        self.last_issued = Some(tsc);

        self.packets_under_key += 1;
        if self.packets_under_key == self.config.rekey_budget {
            self.push_event(
                now_ms,
                EventKind::RekeyRecommended,
                Some(tsc),
                format!("{} packets sent under the current temporal key", self.packets_under_key),
            );
        }
        Ok(tsc)
    }

    pub fn next_sequence_number(&mut self) -> u16 {
        let s = self.next_seq;
        self.next_seq = (self.next_seq + 1) & 0x0FFF;
        s
    }

    /// Checks `tsc` against the replay memory and records it when accepted.
    pub fn replay_check(&mut self, tsc: Tsc48) -> ReplayVerdict {
        self.replay.check_and_record(tsc)
    }

    pub(crate) fn replay_would_accept(&self, tsc: Tsc48) -> bool {
        self.replay.would_accept(tsc)
    }

    /// Commits a frame that passed the ICV check.
    pub(crate) fn accept_frame(&mut self, tsc: Tsc48) {
        if let Some(h) = self.replay.highest() {
            if tsc.iv32 > h.iv32 {
                self.p1k_cache.retire_iv32(h.iv32);
            }
        }
        self.replay.record(tsc);
    }

    pub fn record_mic_failure(&mut self, now_ms: u64, tsc: Option<Tsc48>) -> CountermeasureAction {
        self.push_event(now_ms, EventKind::MicFailure, tsc, "MIC verification failed");
        let action = self.countermeasures.record_failure(now_ms);
        if let CountermeasureAction::Blackout { until_ms } = action {
            self.push_event(now_ms, EventKind::Blackout, tsc, format!("traffic held until t={until_ms} ms"));
            self.push_event(now_ms, EventKind::Disassociate, tsc, "two MIC failures within one minute");
            self.push_event(now_ms, EventKind::RekeyRequired, tsc, "countermeasures require a new temporal key");
        }
        action
    }

    /// Holds traffic until `until_ms` because the peer disassociated us.
    pub fn impose_blackout(&mut self, until_ms: u64) {
        self.countermeasures.impose(until_ms);
    }

    pub(crate) fn p1k(&mut self, iv32: u32) -> P1k {
        let tk = self.keys.tk;
        let ta = self.ta;
        self.p1k_cache.get(self.tk_id, &tk, &ta, iv32, &mut self.ops)
    }

    /// Seed for `tsc`, from the precomputed queue when available.
    pub(crate) fn seed_for(&mut self, tsc: Tsc48) -> WepSeed {
        while self.seed_queue.front().is_some_and(|(t, _)| *t < tsc) {
            self.seed_queue.pop_front();
        }
        if self.seed_queue.front().is_some_and(|(t, _)| *t == tsc) {
            return self.seed_queue.pop_front().map(|(_, s)| s).unwrap();
        }
        let p1k = self.p1k(tsc.iv32);
        self.ops.phase2 += 1;
        phase2(&p1k, &self.keys.tk, tsc.iv16)
    }

    /// The TSC a receiver expects next: one past the highest accepted, or the initial value.
    pub fn expected_rx_tsc(&self) -> Option<Tsc48> {
        match self.replay.highest() {
            Some(h) => h.successor(),
            None => Some(Tsc48::default()),
        }
    }

    /// Tops the seed queue up so it covers the next `n` expected TSC values
    /// without advancing any counter. Returns how many seeds were computed.
    pub fn precompute_phase2(&mut self, n: usize) -> Result<usize> {
        if n > SEED_QUEUE_CAPACITY {
            return Err(Error::QueueFull);
        }
        let Some(base) = self.expected_rx_tsc() else { return Ok(0) };
        while self.seed_queue.front().is_some_and(|(t, _)| *t < base) {
            self.seed_queue.pop_front();
        }
        let mut next = match self.seed_queue.back() {
            Some((t, _)) => t.successor(),
            None => Some(base),
        };
        let mut computed = 0;
        while self.seed_queue.len() < n {
            let Some(tsc) = next else { break };
            let p1k = self.p1k(tsc.iv32);
            self.ops.phase2_precomputed += 1;
            let seed = phase2(&p1k, &self.keys.tk, tsc.iv16);
            self.seed_queue.push_back((tsc, seed));
            computed += 1;
            next = tsc.successor();
        }
        Ok(computed)
    }

    /// Installs new key material and resets all per-key state. Clears any blackout.
    pub fn rekey(&mut self, new_keys: KeyMaterial) {
        self.keys = new_keys;
        self.key_generation += 1;
        self.tk_id = TkId(self.key_generation);
        self.next_tsc = Some(Tsc48::default());
        self.last_issued = None;
        self.packets_under_key = 0;
        self.force_epoch_start = true;
        self.last_tx = None;
        self.p1k_cache.clear();
        self.seed_queue.clear();
        self.replay.clear();
        self.rx_epoch_iv32 = None;
        self.reassembly = Reassembler::default();
        self.countermeasures.clear();
    }
}
