/// Two MIC failures closer together than this trigger a blackout.
pub const MIC_FAILURE_WINDOW_MS: u64 = 60_000;
pub const BLACKOUT_MS: u64 = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountermeasureAction {
    None,
    /// Disassociate, require a rekey and hold traffic until `until_ms`.
    Blackout { until_ms: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Countermeasures {
    failures: Vec<u64>,
    blackout_until: Option<u64>,
    blackouts: u64,
}

impl Countermeasures {
    pub fn record_failure(&mut self, now_ms: u64) -> CountermeasureAction {
        self.failures.retain(|&t| now_ms.saturating_sub(t) < MIC_FAILURE_WINDOW_MS);
        self.failures.push(now_ms);
        if self.failures.len() >= 2 {
            let until_ms = now_ms + BLACKOUT_MS;
            self.blackout_until = Some(until_ms);
            self.blackouts += 1;
            self.failures.clear();
            CountermeasureAction::Blackout { until_ms }
        } else {
            CountermeasureAction::None
        }
    }

    /// `Some(until)` while traffic is held at `now_ms`.
    pub fn blocked_until(&self, now_ms: u64) -> Option<u64> {
        self.blackout_until.filter(|&until| now_ms < until)
    }

    pub fn blackout_until(&self) -> Option<u64> {
        self.blackout_until
    }

    pub fn blackout_count(&self) -> u64 {
        self.blackouts
    }

    pub fn failure_history(&self) -> &[u64] {
        &self.failures
    }

    /// Holds traffic without a local failure, e.g. when the peer disassociated.
    pub fn impose(&mut self, until_ms: u64) {
        self.blackout_until = Some(self.blackout_until.map_or(until_ms, |u| u.max(until_ms)));
        self.failures.clear();
    }

    pub fn clear(&mut self) {
        self.failures.clear();
        self.blackout_until = None;
    }
}
