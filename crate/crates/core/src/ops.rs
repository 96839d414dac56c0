use serde::{Deserialize, Serialize};

/// Counts of cryptographic work, used in place of wall-clock processing time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub phase1: u64,
    /// Phase-2 evaluations done while a frame was being processed.
    pub phase2: u64,
    /// Phase-2 evaluations done ahead of time into the seed queue.
    pub phase2_precomputed: u64,
    pub rc4_inits: u64,
    pub rc4_octets: u64,
    pub michael_calls: u64,
    pub michael_octets: u64,
    pub crc_octets: u64,
}

/// Octets of key material produced by one phase-1 evaluation (P1K).
pub const PHASE1_OUTPUT_OCTETS: u64 = 10;
/// Octets of key material produced by one phase-2 evaluation (WEP seed).
pub const PHASE2_OUTPUT_OCTETS: u64 = 16;

impl OpCounters {
    /// Octets pushed through RC4, Michael and CRC-32, plus the key-mixing
    /// output produced on the per-frame path.
    pub fn crypto_octets(&self) -> u64 {
        self.rc4_octets
            + self.michael_octets
            + self.crc_octets
            + self.phase1 * PHASE1_OUTPUT_OCTETS
            + self.phase2 * PHASE2_OUTPUT_OCTETS
    }

    pub fn merged(&self, other: &OpCounters) -> OpCounters {
        OpCounters {
            phase1: self.phase1 + other.phase1,
            phase2: self.phase2 + other.phase2,
            phase2_precomputed: self.phase2_precomputed + other.phase2_precomputed,
            rc4_inits: self.rc4_inits + other.rc4_inits,
            rc4_octets: self.rc4_octets + other.rc4_octets,
            michael_calls: self.michael_calls + other.michael_calls,
            michael_octets: self.michael_octets + other.michael_octets,
            crc_octets: self.crc_octets + other.crc_octets,
        }
    }
}
