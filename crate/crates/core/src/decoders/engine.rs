use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::outcome::{
    DecodeFailure, DecodeOutcome, DecodeStats, Decoded, FailureReason, StageRecord, StageStats, Verdict,
};
use super::typicality::{SegmentLaw, TypicalityParams};
use crate::error::{AmacError, Result};
use crate::simkernel::{Codebook, Message, TransmissionWindow, NO_SYMBOL};

/// How codeword positions map to segment laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segmenting {
    /// One law over the whole codeword.
    Single,
    /// Positions `0..first_len` of the codeword use law 0, the rest law 1.
    OwnBoundary { first_len: usize },
    /// Law 0 on the cyclic run `t0..t0+first_len` (mod n) for an unknown
    /// pattern start `t0`, law 1 elsewhere.
    Pattern { first_len: usize },
}

/// Where a stage looks for its block-0 codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffsetRule {
    /// Try every start in `-n+1..=0`.
    Scan,
    /// Reuse the offset found by an earlier stage.
    Follow { stage: usize },
}

/// One decoding stage: a codebook stream tested against the output
/// composed with the codewords of earlier stages.
#[derive(Debug, Clone)]
pub struct Stage {
    pub label: String,
    pub sender: usize,
    pub component: usize,
    /// One law for [`Segmenting::Single`], two otherwise.
    pub laws: Vec<SegmentLaw>,
    pub segmenting: Segmenting,
    pub offset: OffsetRule,
    /// Blocks `-depth..=depth` are decoded.
    pub depth: usize,
    /// Earlier stages whose codewords join the output, in composite order
    /// `z = y + |Y| (x_0 + |X_0| (x_1 + ...))`.
    pub conditioning: Vec<usize>,
    log2_pass: f64,
}

impl Stage {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        sender: usize,
        component: usize,
        laws: Vec<SegmentLaw>,
        segmenting: Segmenting,
        offset: OffsetRule,
        depth: usize,
        conditioning: Vec<usize>,
    ) -> Result<Self> {
        let need = if segmenting == Segmenting::Single { 1 } else { 2 };
        if laws.len() != need {
            return Err(AmacError::InvalidParameter(format!(
                "{segmenting:?} needs {need} segment laws, got {}",
                laws.len()
            )));
        }
        if laws.iter().any(|l| l.output_size() != laws[0].output_size()) {
            return Err(AmacError::ShapeMismatch("segment laws disagree on the output alphabet".into()));
        }
        let log2_pass = laws.iter().map(|l| l.log2_false_alarm(l.len)).sum();
        Ok(Stage {
            label: label.into(),
            sender,
            component,
            laws,
            segmenting,
            offset,
            depth,
            conditioning,
            log2_pass,
        })
    }

    /// `log2` of the false-alarm bound for one test of an independent codeword.
    pub fn log2_pass_probability(&self) -> f64 {
        self.log2_pass
    }

    fn first_len(&self) -> usize {
        match self.segmenting {
            Segmenting::Single => usize::MAX,
            Segmenting::OwnBoundary { first_len } | Segmenting::Pattern { first_len } => first_len,
        }
    }
}

/// Ordered list of stages plus shared decoder knobs.
#[derive(Debug, Clone)]
pub struct StagePlan {
    pub stages: Vec<Stage>,
    pub params: TypicalityParams,
    /// Real senders in the window.
    pub senders: usize,
}

impl StagePlan {
    pub fn new(stages: Vec<Stage>, params: TypicalityParams, senders: usize) -> Result<Self> {
        super::typicality::check_rule(&params.delta)?;
        for (i, s) in stages.iter().enumerate() {
            if s.sender >= senders {
                return Err(AmacError::SenderIndex { index: s.sender, senders });
            }
            if s.conditioning.iter().any(|&c| c >= i) {
                return Err(AmacError::InvalidParameter(format!(
                    "stage {} conditions on a later stage",
                    s.label
                )));
            }
            if let OffsetRule::Follow { stage } = s.offset {
                if stage >= i {
                    return Err(AmacError::InvalidParameter(format!("stage {} follows a later stage", s.label)));
                }
            }
        }
        Ok(StagePlan { stages, params, senders })
    }

    /// Smallest `L` for which every decoded block lies inside the window.
    pub fn min_half_blocks(&self) -> usize {
        self.stages.iter().map(|s| s.depth + 1).max().unwrap_or(1)
    }

    /// Runs the plan; `books[sender][component]` are the codebooks.
    pub fn decode(&self, books: &[Vec<&Codebook>], window: &TransmissionWindow, rng: &mut ChaCha8Rng) -> DecodeOutcome {
        let mut run = Run {
            plan: self,
            books,
            window,
            done: Vec::with_capacity(self.stages.len()),
            stats: DecodeStats::default(),
            records: Vec::new(),
        };
        let verdict = match run.all(rng) {
            Ok(()) => Verdict::Decoded(run.assemble()),
            Err(f) => Verdict::Failed(f),
        };
        DecodeOutcome { verdict, stats: run.stats }
    }
}

struct DoneStage {
    offset: i64,
    depth: usize,
    codewords: Vec<Vec<u8>>,
    alphabet: usize,
}

impl DoneStage {
    fn symbol(&self, l: i64, n: usize) -> Option<u8> {
        let rel = l - self.offset;
        let j = rel.div_euclid(n as i64);
        if j.unsigned_abs() as usize > self.depth {
            return None;
        }
        Some(self.codewords[(j + self.depth as i64) as usize][rel.rem_euclid(n as i64) as usize])
    }
}

struct Run<'a> {
    plan: &'a StagePlan,
    books: &'a [Vec<&'a Codebook>],
    window: &'a TransmissionWindow,
    done: Vec<DoneStage>,
    stats: DecodeStats,
    records: Vec<StageRecord>,
}

struct Hit {
    message: u128,
    offset: i64,
    pattern: Option<usize>,
}

impl Run<'_> {
    fn all(&mut self, rng: &mut ChaCha8Rng) -> std::result::Result<(), DecodeFailure> {
        for i in 0..self.plan.stages.len() {
            self.stage(i, rng).map_err(|reason| DecodeFailure {
                stage: i,
                label: self.plan.stages[i].label.clone(),
                reason,
            })?;
        }
        Ok(())
    }

    /// Output composed with the conditioning codewords, indexed from `lo`.
    fn composite(&self, stage: &Stage) -> Vec<u32> {
        let w = self.window;
        let n = w.n;
        let ny = stage.laws[0].output_size() as u64;
        let radix: u64 = stage.conditioning.iter().map(|&c| self.done[c].alphabet as u64).product();
        let y_size = ny / radix.max(1);
        (w.lo()..=w.hi())
            .map(|l| {
                let y = w.output(l);
                if y == NO_SYMBOL {
                    return NO_SYMBOL;
                }
                let mut base = 0u64;
                for &c in stage.conditioning.iter().rev() {
                    let d = &self.done[c];
                    match d.symbol(l, n) {
                        Some(x) => base = base * d.alphabet as u64 + x as u64,
                        None => return NO_SYMBOL,
                    }
                }
                (y as u64 + y_size * base) as u32
            })
            .collect()
    }

    fn stage(&mut self, si: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), FailureReason> {
        let stage = &self.plan.stages[si];
        let params = &self.plan.params;
        let w = self.window;
        let n = w.n;
        let book = self.books[stage.sender][stage.component];
        let z = self.composite(stage);
        let exhaustive = book.size.at_most(params.exhaustive_cap);
        let mut st = StageStats { label: stage.label.clone(), ..Default::default() };
        let mut scorer = Scorer::new(stage, n);

        let depth = stage.depth as i64;
        let mut blocks: Vec<i64> = vec![0];
        for j in 1..=depth {
            blocks.push(-j);
            blocks.push(j);
        }
        let mut codewords = vec![Vec::new(); 2 * stage.depth + 1];
        let mut t0 = 0i64;
        // patterns still consistent with every block decoded so far
        let mut pattern: Option<Vec<usize>> = None;
        let mut result = Ok(());

        for &j in &blocks {
            let offsets: Vec<i64> = if j == 0 {
                match stage.offset {
                    OffsetRule::Scan => (-(n as i64) + 1..=0).collect(),
                    OffsetRule::Follow { stage } => vec![self.done[stage].offset],
                }
            } else {
                vec![t0 + j * n as i64]
            };
            let (olo, ohi) = (offsets[0], *offsets.last().unwrap());
            if olo < w.lo() || ohi + n as i64 - 1 > w.hi() {
                result = Err(FailureReason::Coverage);
                break;
            }
            let patterns: Option<Vec<usize>> = match (stage.segmenting, &pattern) {
                (Segmenting::Pattern { .. }, None) => Some((0..n).collect()),
                (Segmenting::Pattern { .. }, Some(p)) => Some(p.clone()),
                _ => None,
            };
            let per_cw = offsets.len() as u64 * patterns.as_ref().map_or(1, |p| p.len() as u64);

            let candidates = self.candidates(stage, book, j, exhaustive, rng);
            let mut hits: Vec<Hit> = Vec::new();
            let mut uncovered = false;
            let mut buf = vec![0u8; n];
            for &m in &candidates {
                book.codeword_into(m, &mut buf);
                for &t in &offsets {
                    let start = (t - w.lo()) as usize;
                    match scorer.test(&buf, &z[start..start + n], patterns.as_deref()) {
                        Score::Uncovered => uncovered = true,
                        Score::Typical(ps) => {
                            for p in ps {
                                hits.push(Hit { message: m, offset: t, pattern: p });
                            }
                        }
                        Score::Atypical => {}
                    }
                }
            }
            st.tests += candidates.len() as u64 * per_cw;
            st.candidates += candidates.len() as u64;
            st.tests_per_codeword = st.tests_per_codeword.max(per_cw);

            let phantom = if exhaustive || !params.analytic_tail {
                false
            } else {
                let untested = match book.size.exact {
                    Some(c) => (c.saturating_sub(candidates.len() as u128)) as f64,
                    None => book.size.log2.exp2(),
                };
                if untested <= 0.0 {
                    false
                } else {
                    let log2_x = untested.log2() + (per_cw as f64).log2() + stage.log2_pass;
                    let tail = -(-log2_x.exp2()).exp_m1();
                    st.tail_probability = st.tail_probability.max(tail);
                    tail > 0.0 && rng.gen::<f64>() < tail
                }
            };

            let mut msgs: Vec<u128> = hits.iter().map(|h| h.message).collect();
            msgs.sort_unstable();
            msgs.dedup();
            match (msgs.len(), phantom) {
                (0, false) => {
                    result = Err(if uncovered { FailureReason::Coverage } else { FailureReason::NoneTypical });
                    break;
                }
                (0, true) => {
                    result = Err(FailureReason::Phantom);
                    break;
                }
                (1, false) => {}
                _ => {
                    result = Err(FailureReason::Ambiguous);
                    break;
                }
            }
            // same message at several offsets or patterns: smallest delay, then smallest pattern
            let best = hits
                .iter()
                .min_by(|a, b| b.offset.cmp(&a.offset).then(a.pattern.cmp(&b.pattern)))
                .unwrap();
            let ambiguous_offset = hits.iter().any(|h| h.offset != best.offset);
            if patterns.is_some() {
                let mut kept: Vec<usize> = hits
                    .iter()
                    .filter(|h| h.offset == best.offset)
                    .filter_map(|h| h.pattern)
                    .collect();
                kept.sort_unstable();
                kept.dedup();
                pattern = Some(kept);
            }
            if j == 0 {
                t0 = best.offset;
            }
            book.codeword_into(best.message, &mut buf);
            codewords[(j + depth) as usize] = buf.clone();
            self.records.push(StageRecord {
                label: stage.label.clone(),
                sender: stage.sender,
                component: stage.component,
                block: j,
                message: best.message,
                offset: best.offset,
                pattern: best.pattern,
                ambiguous_offset,
            });
        }
        self.stats.stages.push(st);
        result?;
        self.done.push(DoneStage {
            offset: t0,
            depth: stage.depth,
            codewords,
            alphabet: book.schedule.alphabet(),
        });
        Ok(())
    }

    /// Codewords worth testing explicitly: the whole codebook when small,
    /// else the codewords present around block `j` plus random competitors.
    /// All others are independent of the output and enter through the
    /// analytic false-alarm tail.
    fn candidates(&self, stage: &Stage, book: &Codebook, j: i64, exhaustive: bool, rng: &mut ChaCha8Rng) -> Vec<u128> {
        if exhaustive {
            return (0..book.size.exact.unwrap_or(1)).collect();
        }
        let mut c: Vec<u128> = (j - 1..=j + 1)
            .filter_map(|b| self.window.message(stage.sender, b).map(|m: Message| m[stage.component]))
            .collect();
        for _ in 0..self.plan.params.competitors {
            c.push(book.draw_message(rng));
        }
        c.sort_unstable();
        c.dedup();
        c
    }

    fn assemble(&self) -> Decoded {
        let k = self.plan.senders;
        let mut messages = vec![[0u128; 2]; k];
        let mut delays = vec![0usize; k];
        let mut seen = vec![false; k];
        for r in self.records.iter().filter(|r| r.block == 0) {
            messages[r.sender][r.component] = r.message;
            if !seen[r.sender] {
                seen[r.sender] = true;
                delays[r.sender] = (-r.offset) as usize;
            }
        }
        Decoded {
            messages,
            delays,
            delay_ambiguous: self.records.iter().any(|r| r.ambiguous_offset),
            records: self.records.clone(),
        }
    }
}

enum Score {
    Typical(Vec<Option<usize>>),
    Atypical,
    Uncovered,
}

/// Segment sums of the information density for one codeword placement.
struct Scorer<'s> {
    stage: &'s Stage,
    n: usize,
    first_len: usize,
    // pattern scratch: finite prefix sums and -inf counts, doubled for wraparound
    pre: [Vec<f64>; 2],
    inf: [Vec<u32>; 2],
}

impl<'s> Scorer<'s> {
    fn new(stage: &'s Stage, n: usize) -> Self {
        let cap = if matches!(stage.segmenting, Segmenting::Pattern { .. }) { 2 * n + 1 } else { 0 };
        Scorer {
            stage,
            n,
            first_len: stage.first_len().min(n),
            pre: [vec![0.0; cap], vec![0.0; cap]],
            inf: [vec![0; cap], vec![0; cap]],
        }
    }

    fn test(&mut self, x: &[u8], z: &[u32], patterns: Option<&[usize]>) -> Score {
        if z.contains(&NO_SYMBOL) {
            return Score::Uncovered;
        }
        let laws = &self.stage.laws;
        match patterns {
            None => {
                let mut sums = [0.0f64; 2];
                for (i, (&xi, &zi)) in x.iter().zip(z).enumerate() {
                    let s = usize::from(i >= self.first_len);
                    sums[s] += laws[s.min(laws.len() - 1)].density(xi, zi);
                }
                let lens = [self.first_len.min(self.n), self.n - self.first_len.min(self.n)];
                let ok = if laws.len() == 1 {
                    laws[0].accepts(sums[0], self.n)
                } else {
                    laws[0].accepts(sums[0], lens[0]) && laws[1].accepts(sums[1], lens[1])
                };
                if ok {
                    Score::Typical(vec![None])
                } else {
                    Score::Atypical
                }
            }
            Some(ps) => {
                let n = self.n;
                for s in 0..2 {
                    let (pre, inf) = (&mut self.pre[s], &mut self.inf[s]);
                    for i in 0..2 * n {
                        let d = laws[s].density(x[i % n], z[i % n]);
                        let (f, c) = if d.is_finite() { (d, 0) } else { (0.0, 1) };
                        pre[i + 1] = pre[i] + f;
                        inf[i + 1] = inf[i] + c;
                    }
                }
                let fl = self.first_len;
                let total1 = self.pre[1][n];
                let inf1 = self.inf[1][n];
                let mut hits = Vec::new();
                for &p in ps {
                    let (a, b) = (p, p + fl);
                    let in0 = self.inf[0][b] - self.inf[0][a];
                    if in0 > 0 {
                        continue;
                    }
                    let s0 = self.pre[0][b] - self.pre[0][a];
                    if inf1 - (self.inf[1][b] - self.inf[1][a]) > 0 {
                        continue;
                    }
                    let s1 = total1 - (self.pre[1][b] - self.pre[1][a]);
                    if laws[0].accepts(s0, fl) && laws[1].accepts(s1, n - fl) {
                        hits.push(Some(p));
                    }
                }
                if hits.is_empty() {
                    Score::Atypical
                } else {
                    Score::Typical(hits)
                }
            }
        }
    }
}
