//! `selftest`: recorded vectors plus a quick invariant suite.

use motkip_core::codec::{decapsulate, encapsulate, KeyMaterial, Msdu, Scheme};
use motkip_core::keymix::MacAddr;
use motkip_core::session::{CountermeasureAction, Countermeasures, ReplayVerdict, Role, SecurityAssociation};
use motkip_core::sim::{run_session, ChannelConfig, TrafficProfile};
use motkip_core::vectors::{check_vectors, CRYPTO_VECTORS, KEYMIX_VECTORS};

pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn line(&self) -> String {
        if self.failures.is_empty() {
            format!("selftest {}: ok ({} checks)", self.name, self.checks)
        } else {
            format!("selftest {}: FAIL ({}/{} failed): {}", self.name, self.failures.len(), self.checks, self.failures.join("; "))
        }
    }
}

pub fn vector_suite(name: &str, text: &str) -> SuiteResult {
    let outcomes = check_vectors(text);
    let failures = outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().err().map(|e| format!("line {} {}: {e}", o.line, o.name)))
        .collect::<Vec<_>>();
    let mut failures = failures;
    if outcomes.is_empty() {
        failures.push("no vectors found".into());
    }
    SuiteResult { name: name.to_string(), checks: outcomes.len(), failures }
}

fn suite(name: &str, checks: Vec<(String, bool)>) -> SuiteResult {
    SuiteResult {
        name: name.into(),
        checks: checks.len(),
        failures: checks.into_iter().filter(|(_, ok)| !ok).map(|(d, _)| d).collect(),
    }
}

fn roundtrip() -> SuiteResult {
    let ta = MacAddr([2, 0, 0, 0, 0, 1]);
    let mut checks = Vec::new();
    for scheme in Scheme::ALL {
        let keys = KeyMaterial::from_seed(1);
        let mut tx = SecurityAssociation::new(scheme, Role::Transmitter, keys.clone(), ta);
        let mut rx = SecurityAssociation::new(scheme, Role::Receiver, keys.peer(), ta);
        for len in [1usize, 15, 16, 17, 100, 1500, 2304, 3000] {
            let payload: Vec<u8> = (0..len).map(|i| (i * 7 + len) as u8).collect();
            let ok = encapsulate(&mut tx, &Msdu::new(ta, ta, payload.clone()), 512, 0).is_ok_and(|frames| {
                let mut got = None;
                for f in &frames {
                    match decapsulate(&mut rx, f, 0) {
                        Ok(Some(m)) => got = Some(m.payload),
                        Ok(None) => {}
                        Err(_) => return false,
                    }
                }
                got == Some(payload)
            });
            checks.push((format!("{scheme} {len} octets"), ok));
        }
    }
    suite("round-trip", checks)
}

fn channel() -> SuiteResult {
    let keys = KeyMaterial::from_seed(2);
    let mut checks = Vec::new();
    for scheme in [Scheme::Tkip, Scheme::MoTkip] {
        let cfg = ChannelConfig { seed: 2, corrupt_prob: 0.02, loss_prob: 0.05, reorder_depth: 16, ..Default::default() };
        match run_session(&cfg, &TrafficProfile { msdu_octets: 64, msdu_count: 2000, scheme }, &keys) {
            Ok(m) => {
                checks.push((format!("{scheme} check order"), m.check_order_violations == 0));
                checks.push((format!("{scheme} no MIC failures from noise"), m.mic_failures == 0));
                checks.push((format!("{scheme} ledger"), m.ledger_balances()));
            }
            Err(e) => checks.push((format!("{scheme}: {e}"), false)),
        }
    }
    let n = 50;
    let air = |scheme| {
        run_session(&ChannelConfig::default(), &TrafficProfile { msdu_octets: 100, msdu_count: n, scheme }, &keys)
            .map(|m| m.on_air_octets as i64)
            .unwrap_or(-1)
    };
    checks.push(("overhead identity n=50".into(), air(Scheme::MoTkip) == air(Scheme::Tkip) + 1 - 3 * (n as i64 - 1)));
    suite("channel", checks)
}

fn session() -> SuiteResult {
    let mut cm = Countermeasures::default();
    cm.record_failure(0);
    let inside = cm.record_failure(59_999) == CountermeasureAction::Blackout { until_ms: 119_999 };
    let mut cm = Countermeasures::default();
    cm.record_failure(0);
    let outside = cm.record_failure(60_001) == CountermeasureAction::None;

    let ta = MacAddr([2, 0, 0, 0, 0, 1]);
    let mut rx = SecurityAssociation::new(Scheme::Tkip, Role::Receiver, KeyMaterial::from_seed(3), ta);
    let t = motkip_core::keymix::Tsc48::from_u64;
    let mut replay = rx.replay_check(t(100)) == ReplayVerdict::Accept;
    replay &= rx.replay_check(t(100)) != ReplayVerdict::Accept;
    replay &= (85..100).all(|v| rx.replay_check(t(v)) == ReplayVerdict::Accept);
    replay &= rx.replay_check(t(84)) != ReplayVerdict::Accept;
    suite(
        "session",
        vec![
            ("two failures within 60 s black out".into(), inside),
            ("failures 60.001 s apart do not".into(), outside),
            ("replay window".into(), replay),
        ],
    )
}

/// Runs every suite. `extra` are (label, text) vector files supplied by the user.
pub fn run_all(extra: &[(String, String)]) -> Vec<SuiteResult> {
    let mut out = vec![vector_suite("crypto vectors", CRYPTO_VECTORS), vector_suite("keymix vectors", KEYMIX_VECTORS)];
    for (label, text) in extra {
        out.push(vector_suite(label, text));
    }
    out.push(roundtrip());
    out.push(channel());
    out.push(session());
    out
}
