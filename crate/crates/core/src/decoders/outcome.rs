use serde::{Deserialize, Serialize};

use crate::simkernel::Message;

/// Why a decoding stage gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// No candidate passed the typicality test.
    NoneTypical,
    /// More than one message passed.
    Ambiguous,
    /// An untested codeword of the ensemble would have passed (drawn from
    /// the analytic false-alarm tail) while no tested one did.
    Phantom,
    /// The window did not cover a position the stage needed.
    Coverage,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::NoneTypical => "none_typical",
            FailureReason::Ambiguous => "ambiguous",
            FailureReason::Phantom => "phantom",
            FailureReason::Coverage => "coverage",
        }
    }
}

/// One accepted (codeword, offset, pattern) decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub label: String,
    pub sender: usize,
    pub component: usize,
    pub block: i64,
    pub message: u128,
    /// Output index where the decoded block starts.
    pub offset: i64,
    /// Start of the separating pattern, for pattern-searching stages.
    pub pattern: Option<usize>,
    /// Several offsets (or patterns) carried the same message.
    pub ambiguous_offset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    /// Block-0 message per real sender.
    pub messages: Vec<Message>,
    /// Estimated delays, `-offset` of block 0.
    pub delays: Vec<usize>,
    pub delay_ambiguous: bool,
    pub records: Vec<StageRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeFailure {
    pub stage: usize,
    pub label: String,
    pub reason: FailureReason,
}

/// Per-stage instrumentation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub label: String,
    /// Explicit typicality tests performed.
    pub tests: u64,
    /// Distinct codewords tested explicitly.
    pub candidates: u64,
    /// Largest number of tests spent on one codeword for one block.
    pub tests_per_codeword: u64,
    /// Largest analytic false-alarm probability drawn from.
    pub tail_probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodeStats {
    pub stages: Vec<StageStats>,
}

impl DecodeStats {
    pub fn tests(&self) -> u64 {
        self.stages.iter().map(|s| s.tests).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Decoded(Decoded),
    Failed(DecodeFailure),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub verdict: Verdict,
    pub stats: DecodeStats,
}

impl DecodeOutcome {
    pub fn decoded(&self) -> Option<&Decoded> {
        match &self.verdict {
            Verdict::Decoded(d) => Some(d),
            Verdict::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&DecodeFailure> {
        match &self.verdict {
            Verdict::Decoded(_) => None,
            Verdict::Failed(f) => Some(f),
        }
    }
}
