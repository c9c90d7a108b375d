use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::engine::StagePlan;
use super::outcome::{DecodeOutcome, DecodeStats, Decoded, Verdict};
use super::successive::successive_plan;
use super::typicality::TypicalityParams;
use crate::error::{AmacError, Result};
use crate::infocore::{DmcChannel, ProductInput};
use crate::regions::{Ordering, RateVector};
use crate::simkernel::{
    codebook_tag, Codebook, CodebookSystem, Decoder, SenderCode, Storage, SymbolSchedule, TransmissionWindow,
};

/// Rates, witness input law and decoding order used on one sub-stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub rates: RateVector,
    pub input: ProductInput,
    pub ordering: Ordering,
}

/// Time sharing with weights 1/2, 1/2 over even and odd symbols: each
/// operating point gets its own codebooks of length `n/2`.
#[derive(Debug, Clone)]
pub struct InterleavedCodec {
    pub n: usize,
    pub points: [OperatingPoint; 2],
    plans: [StagePlan; 2],
}

impl InterleavedCodec {
    pub fn new(w: &DmcChannel, points: [OperatingPoint; 2], n: usize, params: &TypicalityParams) -> Result<Self> {
        if n == 0 || n % 2 == 1 {
            return Err(AmacError::Unsupported(format!(
                "interleaving needs an even blocklength, got {n}; odd blocklengths only reach the synchronous-style region"
            )));
        }
        let k = w.num_senders();
        for pt in &points {
            if pt.rates.dim() != k {
                return Err(AmacError::DimensionMismatch { expected: k, got: pt.rates.dim() });
            }
            w.check_input(&pt.input)?;
        }
        let plans = [
            successive_plan(w, &points[0].input, &points[0].ordering, n / 2, params)?,
            successive_plan(w, &points[1].input, &points[1].ordering, n / 2, params)?,
        ];
        Ok(InterleavedCodec { n, points, plans })
    }

    /// Overall rate `(point_0 + point_1) / 2`.
    pub fn rates(&self) -> RateVector {
        RateVector::combine(&[self.points[0].rates.clone(), self.points[1].rates.clone()], &[0.5, 0.5])
    }

    pub fn min_half_blocks(&self) -> usize {
        self.plans[0].min_half_blocks().max(self.plans[1].min_half_blocks())
    }

    /// Independent sub-codebooks per sender: even positions from point 0,
    /// odd positions from point 1.
    pub fn encoder(&self, seed: u64, storage: Storage) -> Result<CodebookSystem> {
        let half = self.n / 2;
        let k = self.points[0].rates.dim();
        let codes = (0..k)
            .map(|m| {
                let mk = |r: usize| {
                    let pt = &self.points[r];
                    Codebook::new(
                        half,
                        pt.rates[m],
                        SymbolSchedule::single(pt.input.marginal(m).clone()),
                        seed,
                        codebook_tag(m, r),
                    )
                };
                Ok(SenderCode::Interleaved { even: mk(0)?, odd: mk(1)? })
            })
            .collect::<Result<Vec<_>>>()?;
        CodebookSystem::new(codes, seed, storage)
    }

    pub fn decoder<'a>(&'a self, codebooks: &'a CodebookSystem) -> Result<InterleavedDecoder<'a>> {
        let mut books = [Vec::new(), Vec::new()];
        for code in &codebooks.codes {
            match code {
                SenderCode::Interleaved { even, odd } => {
                    books[0].push(vec![even]);
                    books[1].push(vec![odd]);
                }
                _ => return Err(AmacError::InvalidParameter("interleaved decoder needs interleaved codes".into())),
            }
        }
        if codebooks.blocklength() != self.n {
            return Err(AmacError::DimensionMismatch { expected: self.n, got: codebooks.blocklength() });
        }
        Ok(InterleavedDecoder { codec: self, books })
    }
}

/// Sub-stream `r` of a window: outputs `y(2l + r)` seen by the `r`-th
/// sub-codebooks, with halved blocklength and delays.
pub fn sub_window(window: &TransmissionWindow, r: usize) -> TransmissionWindow {
    let half = window.n / 2;
    let lb = window.half_blocks;
    let span = (lb * half) as i64;
    let idx = |lp: i64| 2 * lp + r as i64;
    TransmissionWindow {
        n: half,
        half_blocks: lb,
        delays: window.delays.iter().map(|d| d / 2).collect(),
        first_block: window.first_block,
        messages: window
            .messages
            .iter()
            .map(|ms| ms.iter().map(|m| [m[r], 0]).collect())
            .collect(),
        outputs: (-span..=span).map(|lp| window.output(idx(lp))).collect(),
        inputs: (0..window.num_senders())
            .map(|m| (-span..=span).map(|lp| window.input(m, idx(lp)).unwrap_or(0)).collect())
            .collect(),
    }
}

pub struct InterleavedDecoder<'a> {
    codec: &'a InterleavedCodec,
    books: [Vec<Vec<&'a Codebook>>; 2],
}

impl Decoder for InterleavedDecoder<'_> {
    fn decode(&self, window: &TransmissionWindow, rng: &mut ChaCha8Rng) -> DecodeOutcome {
        let mut stats = DecodeStats::default();
        let mut parts: Vec<Decoded> = Vec::with_capacity(2);
        for r in 0..2 {
            let sub = sub_window(window, r);
            let out = self.codec.plans[r].decode(&self.books[r], &sub, rng);
            let tag = if r == 0 { "even" } else { "odd" };
            for mut s in out.stats.stages {
                s.label = format!("{tag}:{}", s.label);
                stats.stages.push(s);
            }
            match out.verdict {
                Verdict::Decoded(d) => parts.push(d),
                Verdict::Failed(mut f) => {
                    f.label = format!("{tag}:{}", f.label);
                    return DecodeOutcome { verdict: Verdict::Failed(f), stats };
                }
            }
        }
        let (even, odd) = (&parts[0], &parts[1]);
        let messages = even.messages.iter().zip(&odd.messages).map(|(a, b)| [a[0], b[0]]).collect();
        let delays: Vec<usize> = even.delays.iter().map(|d| 2 * d).collect();
        let disagree = even.delays != odd.delays;
        let mut records = even.records.clone();
        for mut rec in odd.records.iter().cloned() {
            rec.component = 1;
            records.push(rec);
        }
        DecodeOutcome {
            verdict: Verdict::Decoded(Decoded {
                messages,
                delays,
                delay_ambiguous: even.delay_ambiguous || odd.delay_ambiguous || disagree,
                records,
            }),
            stats,
        }
    }
}
