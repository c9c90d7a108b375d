use serde::Serialize;

use super::engine::{OffsetRule, Segmenting, Stage, StagePlan};
use super::successive::PlanDecoder;
use super::typicality::{SegmentLaw, TypicalityParams};
use crate::error::{AmacError, Result};
use crate::infocore::{stage_channel, DmcChannel, ProductInput};
use crate::regions::RateVector;
use crate::simkernel::{
    codebook_tag, segment_len, Codebook, CodebookSystem, SenderCode, Storage, SymbolSchedule,
};
use crate::splitting::{split_for_edge, EdgeSplit};

/// Senders sharing one delay; the last sender is delayed independently.
const SYNCED: [usize; 2] = [0, 1];

/// End-to-end codec for `alpha r + (1 - alpha) r~` on a three-sender
/// channel whose senders 1 and 2 share a delay: both points are split on
/// their common edge, the first `ceil(alpha n)` positions of the
/// synchronized senders follow the split of `r`, the rest that of `r~`.
#[derive(Debug, Clone, Serialize)]
pub struct PartlyAsyncPipeline {
    pub n: usize,
    /// Rounded segment fraction `first_len / n`.
    pub alpha: f64,
    pub first_len: usize,
    pub splits: [EdgeSplit; 2],
    /// Rates of the lifted senders, backed off.
    pub lifted_rates: RateVector,
    /// Rates of the real senders, backed off.
    pub rates: RateVector,
    /// Stage labels in decoding order, e.g. `["2", "1a", "3", "1b"]`.
    pub labels: Vec<String>,
    pub depths: Vec<usize>,
    #[serde(skip)]
    plan: StagePlan,
    #[serde(skip)]
    schedules: Vec<SymbolSchedule>,
}

impl PartlyAsyncPipeline {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        w: &DmcChannel,
        p: &ProductInput,
        r: &RateVector,
        p_tilde: &ProductInput,
        r_tilde: &RateVector,
        alpha: f64,
        backoff: f64,
        n: usize,
        params: &TypicalityParams,
    ) -> Result<Self> {
        if w.num_senders() != 3 {
            return Err(AmacError::Unsupported("the partly asynchronous pipeline needs 3 senders".into()));
        }
        if !(0.0..=1.0).contains(&alpha) || !(backoff > 0.0 && backoff <= 1.0) {
            return Err(AmacError::InvalidParameter(format!(
                "alpha {alpha} and backoff {backoff} must lie in [0, 1] and (0, 1]"
            )));
        }
        if p.marginal(2) != p_tilde.marginal(2) {
            return Err(AmacError::InvalidParameter("the asynchronous sender needs one input law at both points".into()));
        }
        let tol = 1e-6;
        let sa = split_for_edge(w, p, r, tol)?;
        let sb = split_for_edge(w, p_tilde, r_tilde, tol)?;
        if sa.edge != sb.edge || sa.ordering != sb.ordering || sa.split.sender != sb.split.sender {
            return Err(AmacError::InvalidParameter(format!(
                "operating points lie on different edge types ({:?} vs {:?})",
                sa.ordering_labels(),
                sb.ordering_labels()
            )));
        }
        let first_len = segment_len(n, alpha);
        let a = first_len as f64 / n as f64;
        let lifted_rates = RateVector::combine(&[sa.vertex.clone(), sb.vertex.clone()], &[a, 1.0 - a]).scaled(backoff);
        let rates = sa.lifted.regroup(&lifted_rates);

        let m = sa.split.sender;
        // lifted index -> (real sender, component)
        let stream = |i: usize| -> (usize, usize) {
            if i < m {
                (i, 0)
            } else if i == m || i == m + 1 {
                (m, i - m)
            } else {
                (i - 1, 0)
            }
        };
        let order = sa.ordering.as_slice().to_vec();
        let synced = |i: usize| SYNCED.contains(&stream(order[i]).0);
        let k = order.len();
        let mut depths = vec![0usize; k];
        for i in (0..k).rev() {
            depths[i] = (i + 1..k)
                .map(|s| depths[s] + usize::from(synced(i) != synced(s) || !synced(i)))
                .max()
                .unwrap_or(0);
        }
        let mut stages = Vec::with_capacity(k);
        let mut leader: Option<usize> = None;
        for (i, &li) in order.iter().enumerate() {
            let (sender, component) = stream(li);
            let law = |e: &EdgeSplit, len: usize| -> Result<SegmentLaw> {
                let ch = stage_channel(&e.lifted.channel, &e.inputs, &order[..i], li)?;
                SegmentLaw::from_channel(e.inputs.marginal(li), &ch, len, &params.delta)
            };
            let laws = vec![law(&sa, first_len)?, law(&sb, n - first_len)?];
            let (segmenting, offset) = if SYNCED.contains(&sender) {
                let off = match leader {
                    Some(s) => OffsetRule::Follow { stage: s },
                    None => {
                        leader = Some(i);
                        OffsetRule::Scan
                    }
                };
                (Segmenting::OwnBoundary { first_len }, off)
            } else {
                (Segmenting::Pattern { first_len }, OffsetRule::Scan)
            };
            stages.push(Stage::new(
                sa.labels[li].clone(),
                sender,
                component,
                laws,
                segmenting,
                offset,
                depths[i],
                (0..i).collect(),
            )?);
        }
        let plan = StagePlan::new(stages, params.clone(), 3)?;

        let mut schedules = Vec::with_capacity(4);
        for li in 0..4 {
            let (sender, _) = stream(li);
            let (pa, pb) = (sa.inputs.marginal(li).clone(), sb.inputs.marginal(li).clone());
            schedules.push(if SYNCED.contains(&sender) {
                SymbolSchedule::TwoSegment { first_len, first: pa, second: pb }
            } else {
                SymbolSchedule::single(pa)
            });
        }
        Ok(PartlyAsyncPipeline {
            n,
            alpha: a,
            first_len,
            labels: order.iter().map(|&i| sa.labels[i].clone()).collect(),
            splits: [sa, sb],
            lifted_rates,
            rates,
            depths,
            plan,
            schedules,
        })
    }

    pub fn plan(&self) -> &StagePlan {
        &self.plan
    }

    pub fn min_half_blocks(&self) -> usize {
        self.plan.min_half_blocks()
    }

    /// Two-segment codebooks for the synchronized senders (the split one
    /// as a max-combined pair), a single-law codebook for the last sender.
    pub fn encoder(&self, seed: u64, storage: Storage) -> Result<CodebookSystem> {
        let m = self.splits[0].split.sender;
        let book = |li: usize, sender: usize, part: usize| {
            Codebook::new(
                self.n,
                self.lifted_rates[li],
                self.schedules[li].clone(),
                seed,
                codebook_tag(sender, part),
            )
        };
        let codes = (0..3)
            .map(|s| {
                Ok(if s == m {
                    SenderCode::Split { a: book(m, s, 0)?, b: book(m + 1, s, 1)? }
                } else {
                    let li = if s < m { s } else { s + 1 };
                    SenderCode::Plain { code: book(li, s, 0)? }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CodebookSystem::new(codes, seed, storage)
    }

    pub fn decoder<'a>(&self, codebooks: &'a CodebookSystem) -> PlanDecoder<'a> {
        PlanDecoder::new(self.plan.clone(), codebooks)
    }
}
