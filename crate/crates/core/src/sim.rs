//! Deterministic, seeded link simulator.
//!
//! A transmitter and a receiver association exchange MSDUs through a channel
//! that can lose, reorder (bounded by the 16-frame burst window) and corrupt
//! frames. Every transmitted octet and every unit of crypto work is counted.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded from
//! [`ChannelConfig::seed`]; payload generation and channel decisions use
//! separate streams so the channel pattern does not depend on payload size.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{
    decapsulate, encapsulate, open_body, seal_body, FlagByte, FrameKind, KeyMaterial, Mpdu, Msdu, Scheme, ICV_LEN,
    DEFAULT_MAX_FRAGMENT, MAC_HEADER_LEN,
};
use crate::codec::{motkip, tkip};
use crate::crypto::crc32::crc32_icv;
use crate::error::{Error, Result};
use crate::keymix::{phase1, phase2, MacAddr, Tsc48};
use crate::ops::OpCounters;
use crate::session::{Event, Role, SecurityAssociation, SessionConfig, REPLAY_WINDOW, SEED_QUEUE_CAPACITY};

pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.3), seed_from_u64; stream 1 payloads, stream 2 channel";

pub const STATION_ADDR: MacAddr = MacAddr([0x02, 0x00, 0x00, 0x00, 0x00, 0x01]);
pub const SERVER_ADDR: MacAddr = MacAddr([0x02, 0x00, 0x00, 0x00, 0x00, 0xFE]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub seed: u64,
    pub loss_prob: f64,
    /// Maximum number of positions a frame may be delayed behind later frames.
    pub reorder_depth: usize,
    /// Per-octet probability of a bit flip in the protected part of a frame.
    pub corrupt_prob: f64,
    pub mac_header_octets: usize,
    /// PHY preamble / ACK octets charged to every frame.
    pub per_frame_fixed_octets: usize,
    pub link_rate_bits_per_sec: u64,
    pub max_fragment: usize,
    /// Seeds kept precomputed at the MoTKIP receiver; 0 disables prediction.
    pub precompute_depth: usize,
    pub session: SessionConfig,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            loss_prob: 0.0,
            reorder_depth: 0,
            corrupt_prob: 0.0,
            mac_header_octets: MAC_HEADER_LEN,
            per_frame_fixed_octets: 0,
            link_rate_bits_per_sec: 11_000_000,
            max_fragment: DEFAULT_MAX_FRAGMENT,
            precompute_depth: 0,
            session: SessionConfig::default(),
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return bad(format!("loss_prob {} outside [0, 1]", self.loss_prob));
        }
        if !(0.0..=1.0).contains(&self.corrupt_prob) {
            return bad(format!("corrupt_prob {} outside [0, 1]", self.corrupt_prob));
        }
        if self.reorder_depth as u64 > REPLAY_WINDOW {
            return bad(format!("reorder_depth {} exceeds the {REPLAY_WINDOW}-frame burst window", self.reorder_depth));
        }
        if self.max_fragment < crate::codec::fragment::MIN_FRAGMENT {
            return bad(format!("max_fragment {} below 16", self.max_fragment));
        }
        if self.precompute_depth > SEED_QUEUE_CAPACITY {
            return bad(format!("precompute_depth {} exceeds queue capacity {SEED_QUEUE_CAPACITY}", self.precompute_depth));
        }
        if self.link_rate_bits_per_sec == 0 {
            return bad("link rate must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficProfile {
    pub msdu_octets: usize,
    pub msdu_count: u64,
    pub scheme: Scheme,
}

impl TrafficProfile {
    pub fn validate(&self) -> Result<()> {
        if self.msdu_octets == 0 || self.msdu_count == 0 {
            return Err(Error::InvalidConfig("msdu_octets and msdu_count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub scheme: Scheme,
    pub seed: u64,
    pub loss: f64,
    pub corrupt: f64,
    pub reorder: usize,
    pub msdu_octets: usize,
    pub msdu_count: u64,
    pub link_rate_bits_per_sec: u64,

    pub on_air_octets: u64,
    pub frames_sent: u64,
    pub frames_accepted: u64,
    pub lost: u64,
    /// Frames the channel altered (at least one bit flipped).
    pub corrupted: u64,
    pub icv_rejects: u64,
    pub replay_rejects: u64,
    pub malformed_rejects: u64,
    pub epoch_rejects: u64,
    pub blackout_rejects: u64,

    pub delivered_msdus: u64,
    pub delivered_payload_octets: u64,
    /// Delivered MSDUs whose payload differs from what was sent (only possible without an ICV).
    pub delivered_altered: u64,
    pub goodput_fraction: f64,
    pub mic_failures: u64,
    pub blackouts: u64,
    pub rekeys: u64,
    pub resyncs: u64,
    pub epoch_restarts: u64,
    /// Frames rejected by the ICV or replay check during which Michael ran anyway. Must be 0.
    pub check_order_violations: u64,

    pub tx_ops: OpCounters,
    pub rx_ops: OpCounters,
    pub events: Vec<Event>,
}

impl SessionMetrics {
    pub fn ops(&self) -> OpCounters {
        self.tx_ops.merged(&self.rx_ops)
    }

    /// Goodput scaled to the link rate, in bits per second.
    pub fn throughput_bps(&self) -> f64 {
        self.goodput_fraction * self.link_rate_bits_per_sec as f64
    }

    /// Per-frame ledger: every frame sent is accounted for exactly once.
    pub fn ledger_balances(&self) -> bool {
        self.frames_sent
            == self.frames_accepted
                + self.lost
                + self.icv_rejects
                + self.replay_rejects
                + self.malformed_rejects
                + self.epoch_rejects
                + self.blackout_rejects
    }

    pub fn row(&self) -> MetricsRow {
        let ops = self.ops();
        MetricsRow {
            scheme: self.scheme.to_string(),
            seed: self.seed,
            loss: self.loss,
            msdu_octets: self.msdu_octets,
            msdu_count: self.msdu_count,
            on_air_octets: self.on_air_octets,
            delivered: self.delivered_msdus,
            goodput: self.goodput_fraction,
            phase1: ops.phase1,
            phase2: ops.phase2,
            rc4_octets: ops.rc4_octets,
            michael_octets: ops.michael_octets,
            mic_failures: self.mic_failures,
            crc_octets: ops.crc_octets,
            phase2_precomputed: ops.phase2_precomputed,
            crypto_octets: ops.crypto_octets(),
            throughput_kbps: self.throughput_bps() / 1000.0,
        }
    }
}

/// One CSV/JSON report row. The first thirteen columns are the stable core set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scheme: String,
    pub seed: u64,
    pub loss: f64,
    pub msdu_octets: usize,
    pub msdu_count: u64,
    pub on_air_octets: u64,
    pub delivered: u64,
    pub goodput: f64,
    pub phase1: u64,
    pub phase2: u64,
    pub rc4_octets: u64,
    pub michael_octets: u64,
    pub mic_failures: u64,
    pub crc_octets: u64,
    pub phase2_precomputed: u64,
    pub crypto_octets: u64,
    pub throughput_kbps: f64,
}

pub const CSV_COLUMNS: [&str; 17] = [
    "scheme",
    "seed",
    "loss",
    "msdu_octets",
    "msdu_count",
    "on_air_octets",
    "delivered",
    "goodput",
    "phase1",
    "phase2",
    "rc4_octets",
    "michael_octets",
    "mic_failures",
    "crc_octets",
    "phase2_precomputed",
    "crypto_octets",
    "throughput_kbps",
];

impl MetricsRow {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{},{},{},{},{},{},{},{},{:.3}",
            self.scheme,
            self.seed,
            self.loss,
            self.msdu_octets,
            self.msdu_count,
            self.on_air_octets,
            self.delivered,
            self.goodput,
            self.phase1,
            self.phase2,
            self.rc4_octets,
            self.michael_octets,
            self.mic_failures,
            self.crc_octets,
            self.phase2_precomputed,
            self.crypto_octets,
            self.throughput_kbps
        )
    }
}

#[derive(Debug, Clone)]
struct InFlight {
    mpdu: Mpdu,
    msdu_index: u64,
}

#[derive(Debug, Default)]
struct Channel {
    slot: u64,
    queue: BinaryHeap<Reverse<(u64, u64)>>,
    frames: HashMap<u64, InFlight>,
}

/// A running transmitter/receiver pair over the simulated channel.
pub struct LinkSession {
    config: ChannelConfig,
    profile: TrafficProfile,
    base_keys: KeyMaterial,
    tx: SecurityAssociation,
    rx: SecurityAssociation,
    payload_rng: ChaCha8Rng,
    channel_rng: ChaCha8Rng,
    clock_ns: u128,
    channel: Channel,
    sent_payloads: HashMap<u64, Vec<u8>>,
    captured: Vec<Mpdu>,
    next_msdu: u64,
    m: SessionMetrics,
}

/// Frames the forger has seen plus a handle to produce fresh ones.
pub struct ForgeryKit<'a> {
    pub captured: &'a [Mpdu],
    pub now_ms: u64,
    tx: &'a mut SecurityAssociation,
    max_fragment: usize,
}

impl ForgeryKit<'_> {
    /// Encapsulates a new MSDU with the legitimate transmitter without
    /// putting it on the air. Returns each frame with its TSC.
    pub fn fresh_frames(&mut self, payload: Vec<u8>) -> Result<Vec<(Tsc48, Mpdu)>> {
        let start = self.tx.peek_tsc().ok_or(Error::TscExhausted)?;
        let msdu = Msdu::new(SERVER_ADDR, STATION_ADDR, payload);
        let frames = encapsulate(self.tx, &msdu, self.max_fragment, self.now_ms)?;
        let mut tsc = Some(start);
        Ok(frames
            .into_iter()
            .map(|f| {
                let t = tsc.expect("encapsulation succeeded so TSCs were available");
                tsc = t.successor();
                (t, f)
            })
            .collect())
    }

    pub fn keys(&self) -> &KeyMaterial {
        self.tx.keys()
    }

    pub fn transmitter_address(&self) -> MacAddr {
        self.tx.transmitter_address()
    }
}

/// Standard frame manipulations for forgery scenarios.
pub mod forgery {
    use super::*;

    /// Flips `mask` into ciphertext octet `offset` and patches the encrypted
    /// ICV using CRC linearity, so the frame still passes the ICV check.
    pub fn crc_bitflip(frame: &Mpdu, offset: usize, mask: u8) -> Mpdu {
        let mut f = frame.clone();
        let data_len = f.body.len() - ICV_LEN;
        assert!(offset < data_len, "offset {offset} outside {data_len} data octets");
        let mut delta = vec![0u8; data_len];
        delta[offset] = mask;
        let zeros = vec![0u8; data_len];
        let icv_delta = (crc32_icv(&delta).0 ^ crc32_icv(&zeros).0).to_le_bytes();
        f.body[offset] ^= mask;
        for (b, d) in f.body[data_len..].iter_mut().zip(icv_delta) {
            *b ^= d;
        }
        f
    }

    /// Decrypts a TKIP or MoTKIP frame sent under `original` and re-encrypts
    /// the same plaintext (including its MIC octets) under `new_tsc`, with a
    /// header announcing `new_tsc`. Requires the temporal key, so this models
    /// an insider or a leaked per-packet key.
    pub fn reencrypt_under_tsc(
        frame: &Mpdu,
        original: Tsc48,
        new_tsc: Tsc48,
        keys: &KeyMaterial,
        ta: &MacAddr,
    ) -> Result<Mpdu> {
        let mut ops = OpCounters::default();
        let seed = |t: Tsc48| phase2(&phase1(&keys.tk, ta, t.iv32), &keys.tk, t.iv16);
        let plain = open_body(&seed(original).0, &frame.body, &mut ops)?;
        let key_id = (keys.key_id & 3) << 6;
        let (kind, header) = match frame.kind {
            FrameKind::Tkip => (FrameKind::Tkip, tkip::tkip_header(new_tsc, key_id).to_vec()),
            FrameKind::MoTkipFirst | FrameKind::MoTkipNext => {
                let flags = FlagByte {
                    ext_iv: true,
                    fragmented: frame.mac.is_fragmented(),
                    same_msdu: frame.mac.frag > 0,
                    ..Default::default()
                };
                (FrameKind::MoTkipFirst, motkip::first_header(flags, new_tsc, &keys.ks, key_id).to_vec())
            }
            other => return Err(Error::SchemeMismatch { expected: "tkip or motkip".into(), found: format!("{other:?}") }),
        };
        Ok(Mpdu { kind, mac: frame.mac, header, body: seal_body(&seed(new_tsc).0, &plain, &mut ops) })
    }
}

impl LinkSession {
    pub fn new(config: ChannelConfig, profile: TrafficProfile, keys: KeyMaterial) -> Result<Self> {
        config.validate()?;
        profile.validate()?;
        let mut tx = SecurityAssociation::with_config(profile.scheme, Role::Transmitter, keys.clone(), STATION_ADDR, config.session);
        let mut rx = SecurityAssociation::with_config(profile.scheme, Role::Receiver, keys.peer(), STATION_ADDR, config.session);
        tx.set_bssid(SERVER_ADDR);
        rx.set_bssid(SERVER_ADDR);
        let mut payload_rng = ChaCha8Rng::seed_from_u64(config.seed);
        payload_rng.set_stream(1);
        let mut channel_rng = ChaCha8Rng::seed_from_u64(config.seed);
        channel_rng.set_stream(2);
        let m = SessionMetrics {
            scheme: profile.scheme,
            seed: config.seed,
            loss: config.loss_prob,
            corrupt: config.corrupt_prob,
            reorder: config.reorder_depth,
            msdu_octets: profile.msdu_octets,
            msdu_count: profile.msdu_count,
            link_rate_bits_per_sec: config.link_rate_bits_per_sec,
            on_air_octets: 0,
            frames_sent: 0,
            frames_accepted: 0,
            lost: 0,
            corrupted: 0,
            icv_rejects: 0,
            replay_rejects: 0,
            malformed_rejects: 0,
            epoch_rejects: 0,
            blackout_rejects: 0,
            delivered_msdus: 0,
            delivered_payload_octets: 0,
            delivered_altered: 0,
            goodput_fraction: 0.0,
            mic_failures: 0,
            blackouts: 0,
            rekeys: 0,
            resyncs: 0,
            epoch_restarts: 0,
            check_order_violations: 0,
            tx_ops: OpCounters::default(),
            rx_ops: OpCounters::default(),
            events: Vec::new(),
        };
        let mut link = Self {
            config,
            profile,
            base_keys: keys,
            tx,
            rx,
            payload_rng,
            channel_rng,
            clock_ns: 0,
            channel: Channel::default(),
            sent_payloads: HashMap::new(),
            captured: Vec::new(),
            next_msdu: 0,
            m,
        };
        link.top_up_precompute();
        Ok(link)
    }

    pub fn now_ms(&self) -> u64 {
        (self.clock_ns / 1_000_000) as u64
    }

    pub fn advance_clock_ms(&mut self, ms: u64) {
        self.clock_ns += ms as u128 * 1_000_000;
    }

    pub fn transmitter(&self) -> &SecurityAssociation {
        &self.tx
    }

    pub fn receiver(&self) -> &SecurityAssociation {
        &self.rx
    }

    pub fn metrics(&self) -> &SessionMetrics {
        &self.m
    }

    pub fn remaining(&self) -> u64 {
        self.profile.msdu_count - self.next_msdu.min(self.profile.msdu_count)
    }

    fn top_up_precompute(&mut self) {
        if self.config.precompute_depth > 0 && self.profile.scheme == Scheme::MoTkip {
            self.rx
                .precompute_phase2(self.config.precompute_depth)
                .expect("depth validated against queue capacity");
        }
    }

    fn rekey_both(&mut self) {
        self.m.rekeys += 1;
        let keys = KeyMaterial::from_seed(self.config.seed ^ self.m.rekeys.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let keys = KeyMaterial { key_id: (self.base_keys.key_id + self.m.rekeys as u8) & 3, ..keys };
        self.tx.rekey(keys.clone());
        self.rx.rekey(keys.peer());
        self.channel = Channel::default();
        self.top_up_precompute();
    }

    /// Sends the next MSDU of the profile. Returns false once all have been sent.
    pub fn send_next(&mut self) -> bool {
        if self.next_msdu >= self.profile.msdu_count {
            return false;
        }
        let index = self.next_msdu;
        self.next_msdu += 1;
        let mut payload = vec![0u8; self.profile.msdu_octets];
        self.payload_rng.fill_bytes(&mut payload);
        let msdu = Msdu::new(SERVER_ADDR, STATION_ADDR, payload);

        let frames = loop {
            let now = self.now_ms();
            match encapsulate(&mut self.tx, &msdu, self.config.max_fragment, now) {
                Ok(f) => break f,
                Err(Error::Blackout { until_ms }) => {
                    // Traffic is held for the countermeasure period, then a new key is installed.
                    self.clock_ns = self.clock_ns.max(until_ms as u128 * 1_000_000);
                    self.rekey_both();
                }
                Err(Error::TscExhausted) => self.rekey_both(),
                Err(e) => panic!("encapsulation of a generated MSDU failed: {e}"),
            }
        };
        self.sent_payloads.insert(index, msdu.payload);
        for mpdu in frames {
            self.transmit(InFlight { mpdu, msdu_index: index });
        }
        true
    }

    fn transmit(&mut self, frame: InFlight) {
        let octets = (self.config.mac_header_octets + frame.mpdu.header.len() + frame.mpdu.body.len()
            + self.config.per_frame_fixed_octets) as u64;
        self.m.on_air_octets += octets;
        self.m.frames_sent += 1;
        self.clock_ns += octets as u128 * 8 * 1_000_000_000 / self.config.link_rate_bits_per_sec as u128;

        let slot = self.channel.slot;
        self.channel.slot += 1;
        let rng = &mut self.channel_rng;
        let lost = self.config.loss_prob > 0.0 && rng.gen_bool(self.config.loss_prob);
        let delay = if self.config.reorder_depth > 0 { rng.gen_range(0..=self.config.reorder_depth as u64) } else { 0 };
        if lost {
            self.m.lost += 1;
        } else {
            let mut frame = frame;
            if self.config.corrupt_prob > 0.0 {
                let mut hit = false;
                for part in [&mut frame.mpdu.header, &mut frame.mpdu.body] {
                    for b in part.iter_mut() {
                        if rng.gen_bool(self.config.corrupt_prob) {
                            *b ^= 1 << rng.gen_range(0..8);
                            hit = true;
                        }
                    }
                }
                if hit {
                    self.m.corrupted += 1;
                }
            }
            self.channel.queue.push(Reverse((slot + delay, slot)));
            self.channel.frames.insert(slot, frame);
        }
        self.release(Some(slot));
    }

    /// Delivers every queued frame whose release slot has come (all of them when `upto` is None).
    fn release(&mut self, upto: Option<u64>) {
        while let Some(Reverse((release, slot))) = self.channel.queue.peek().copied() {
            if upto.is_some_and(|u| release > u) {
                break;
            }
            self.channel.queue.pop();
            if let Some(f) = self.channel.frames.remove(&slot) {
                let _ = self.receive(f.mpdu, Some(f.msdu_index));
            }
        }
    }

    /// Delivers everything still in flight.
    pub fn flush(&mut self) {
        self.release(None);
    }

    fn receive(&mut self, mpdu: Mpdu, msdu_index: Option<u64>) -> Result<Option<Msdu>> {
        let now = self.now_ms();
        let michael_before = self.rx.ops().michael_calls;
        let kind = mpdu.kind;
        let result = decapsulate(&mut self.rx, &mpdu, now);
        let michael_ran = self.rx.ops().michael_calls != michael_before;
        match &result {
            Ok(done) => {
                self.m.frames_accepted += 1;
                if self.captured.len() == 64 {
                    self.captured.remove(0);
                }
                self.captured.push(mpdu);
                if let Some(msdu) = done {
                    self.m.delivered_msdus += 1;
                    self.m.delivered_payload_octets += msdu.payload.len() as u64;
                    let expected = msdu_index.and_then(|i| self.sent_payloads.remove(&i));
                    if expected.as_deref() != Some(msdu.payload.as_slice()) {
                        self.m.delivered_altered += 1;
                    }
                }
            }
            Err(Error::MicFailure) => {
                self.m.frames_accepted += 1;
                self.m.mic_failures += 1;
                if let Some(until) = self.rx.countermeasures().blocked_until(now) {
                    self.m.blackouts += 1;
                    self.tx.impose_blackout(until);
                }
            }
            Err(Error::IcvMismatch) => {
                self.m.icv_rejects += 1;
                self.m.check_order_violations += michael_ran as u64;
                if kind == FrameKind::MoTkipNext {
                    self.tx.request_epoch_restart();
                    self.m.epoch_restarts += 1;
                }
            }
            Err(Error::ReplayDetected(_)) => {
                self.m.replay_rejects += 1;
                self.m.check_order_violations += michael_ran as u64;
            }
            Err(Error::EpochMismatch) => {
                self.m.epoch_rejects += 1;
                self.tx.request_epoch_restart();
                self.m.epoch_restarts += 1;
            }
            Err(Error::Blackout { .. }) => self.m.blackout_rejects += 1,
            Err(_) => self.m.malformed_rejects += 1,
        }
        self.top_up_precompute();
        result
    }

    /// Delivers attacker-built frames straight to the receiver and returns
    /// the receiver's verdict for each. Outcomes also land in the metrics and
    /// the event log.
    pub fn inject_forgery<F>(&mut self, mutator: F) -> Vec<Result<Option<Msdu>>>
    where
        F: FnOnce(&mut ForgeryKit<'_>) -> Vec<Mpdu>,
    {
        let now = self.now_ms();
        let mut kit = ForgeryKit { captured: &self.captured, now_ms: now, tx: &mut self.tx, max_fragment: self.config.max_fragment };
        let frames = mutator(&mut kit);
        frames
            .into_iter()
            .map(|f| {
                self.m.frames_sent += 1;
                self.receive(f, None)
            })
            .collect()
    }

    /// Sends all remaining MSDUs, drains the channel and returns the metrics.
    pub fn run(mut self) -> SessionMetrics {
        while self.send_next() {}
        self.finish()
    }

    pub fn finish(mut self) -> SessionMetrics {
        self.flush();
        let mut m = self.m;
        m.goodput_fraction =
            if m.on_air_octets == 0 { 0.0 } else { m.delivered_payload_octets as f64 / m.on_air_octets as f64 };
        m.resyncs = self.rx.resync_count();
        m.tx_ops = *self.tx.ops();
        m.rx_ops = *self.rx.ops();
        let mut events = self.tx.take_events();
        events.extend(self.rx.take_events());
        events.sort_by_key(|e| e.t);
        m.events = events;
        m
    }
}

/// Runs one profile over one channel configuration.
pub fn run_session(config: &ChannelConfig, profile: &TrafficProfile, keys: &KeyMaterial) -> Result<SessionMetrics> {
    Ok(LinkSession::new(*config, *profile, keys.clone())?.run())
}

/// Evaluates every (config, profile) pair, configs outermost. With
/// `threads > 1` independent runs execute concurrently; row order is unchanged.
pub fn sweep(
    configs: &[ChannelConfig],
    profiles: &[TrafficProfile],
    keys: &KeyMaterial,
    threads: usize,
) -> Result<Vec<SessionMetrics>> {
    let jobs: Vec<(ChannelConfig, TrafficProfile)> =
        configs.iter().flat_map(|c| profiles.iter().map(move |p| (*c, *p))).collect();
    for (c, p) in &jobs {
        c.validate()?;
        p.validate()?;
    }
    if threads <= 1 || jobs.len() <= 1 {
        return jobs.iter().map(|(c, p)| run_session(c, p, keys)).collect();
    }
    let chunk = jobs.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|(c, p)| run_session(c, p, keys)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}
