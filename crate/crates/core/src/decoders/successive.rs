use rand_chacha::ChaCha8Rng;

use super::engine::{OffsetRule, Segmenting, Stage, StagePlan};
use super::outcome::DecodeOutcome;
use super::typicality::{SegmentLaw, TypicalityParams};
use crate::error::{AmacError, Result};
use crate::infocore::{stage_channel, DmcChannel, PairLaw, ProductInput};
use crate::regions::Ordering;
use crate::simkernel::{Codebook, CodebookSystem, Decoder, TransmissionWindow};

/// Sliding-window typicality decoder for one sender: scans the `n` offsets
/// that can hold block 0 and keeps the unique typical codeword.
pub fn decode_single_sender(
    window: &TransmissionWindow,
    codebook: &Codebook,
    law: &PairLaw,
    params: &TypicalityParams,
    rng: &mut ChaCha8Rng,
) -> Result<DecodeOutcome> {
    let n = codebook.n;
    let seg = SegmentLaw::new(law.clone(), n, &params.delta);
    let stage = Stage::new("1", 0, 0, vec![seg], Segmenting::Single, OffsetRule::Scan, 0, vec![])?;
    let plan = StagePlan::new(vec![stage], params.clone(), window.num_senders())?;
    Ok(plan.decode(&[vec![codebook]], window, rng))
}

/// Separating-pattern decoder: every offset and every cyclic placement of
/// the `first_len` positions governed by `first` is tried.
pub fn decode_two_segment(
    window: &TransmissionWindow,
    codebook: &Codebook,
    first: &PairLaw,
    second: &PairLaw,
    first_len: usize,
    params: &TypicalityParams,
    rng: &mut ChaCha8Rng,
) -> Result<DecodeOutcome> {
    let n = codebook.n;
    if first_len > n {
        return Err(AmacError::InvalidParameter(format!("segment length {first_len} exceeds n = {n}")));
    }
    let laws = vec![
        SegmentLaw::new(first.clone(), first_len, &params.delta),
        SegmentLaw::new(second.clone(), n - first_len, &params.delta),
    ];
    let stage = Stage::new("1", 0, 0, laws, Segmenting::Pattern { first_len }, OffsetRule::Scan, 0, vec![])?;
    let plan = StagePlan::new(vec![stage], params.clone(), window.num_senders())?;
    Ok(plan.decode(&[vec![codebook]], window, rng))
}

/// Successive decoding in order `pi`: stage `i` decodes sender `pi[i]`
/// against the output joined with the codewords of `pi[..i]`, treating
/// the rest as noise, over blocks `-(K-1-i)..=K-1-i`.
pub fn successive_plan(
    w: &DmcChannel,
    p: &ProductInput,
    pi: &Ordering,
    n: usize,
    params: &TypicalityParams,
) -> Result<StagePlan> {
    let k = w.num_senders();
    if pi.len() != k {
        return Err(AmacError::DimensionMismatch { expected: k, got: pi.len() });
    }
    let order = pi.as_slice();
    let stages = order
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let ch = stage_channel(w, p, &order[..i], m)?;
            let law = SegmentLaw::from_channel(p.marginal(m), &ch, n, &params.delta)?;
            Stage::new(
                (m + 1).to_string(),
                m,
                0,
                vec![law],
                Segmenting::Single,
                OffsetRule::Scan,
                k - 1 - i,
                (0..i).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    StagePlan::new(stages, params.clone(), k)
}

/// One-shot successive decoding of `window` with plain codebooks.
pub fn successive_decode(
    window: &TransmissionWindow,
    codebooks: &CodebookSystem,
    w: &DmcChannel,
    p: &ProductInput,
    pi: &Ordering,
    params: &TypicalityParams,
    rng: &mut ChaCha8Rng,
) -> Result<DecodeOutcome> {
    let plan = successive_plan(w, p, pi, codebooks.blocklength(), params)?;
    Ok(PlanDecoder::new(plan, codebooks).decode(window, rng))
}

/// A [`StagePlan`] bound to the codebooks of a coding system.
pub struct PlanDecoder<'a> {
    pub plan: StagePlan,
    books: Vec<Vec<&'a Codebook>>,
}

impl<'a> PlanDecoder<'a> {
    pub fn new(plan: StagePlan, codebooks: &'a CodebookSystem) -> Self {
        let books = codebooks.codes.iter().map(|c| c.codebooks()).collect();
        PlanDecoder { plan, books }
    }
}

impl Decoder for PlanDecoder<'_> {
    fn decode(&self, window: &TransmissionWindow, rng: &mut ChaCha8Rng) -> DecodeOutcome {
        self.plan.decode(&self.books, window, rng)
    }
}
