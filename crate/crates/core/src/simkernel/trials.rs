use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::CodebookSystem;
use super::delay::DelaySystem;
use super::transmit::{transmit_sampled, ChannelSampler, TransmissionWindow};
use crate::decoders::{DecodeOutcome, Verdict};
use crate::error::{AmacError, Result};
use crate::infocore::DmcChannel;
use crate::rng::{stream, trial_rng};

/// Cells with fewer trials than this make the maximal estimate unreliable.
pub const MIN_TRIALS_PER_CELL: usize = 20;

/// Anything that maps a received window to block-0 message estimates.
pub trait Decoder: Sync {
    fn decode(&self, window: &TransmissionWindow, rng: &mut ChaCha8Rng) -> DecodeOutcome;
}

/// How delay cells are visited.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialMode {
    /// Delays sampled from the system; cells are per-sender delay bins.
    Sampled {
        trials: usize,
        /// Bins per sender; chosen from `trials` when absent.
        bins: Option<usize>,
    },
    /// Every support point gets `trials_per_cell` trials.
    Enumerated { trials_per_cell: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStat {
    /// Delay bins (sampled mode) or the delay vector (enumerated mode).
    pub key: Vec<usize>,
    pub trials: usize,
    pub errors: usize,
    /// Probability of the cell under the delay system.
    pub weight: f64,
}

impl CellStat {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }
}

/// Error statistics of a Monte Carlo run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub delay_system: String,
    pub n: usize,
    pub half_blocks: usize,
    pub seed: u64,
    pub rates: Vec<f64>,
    /// `"sampled"` or `"enumerated"`.
    pub mode: String,
    pub trials: usize,
    pub errors: usize,
    pub average_error: f64,
    pub average_half_width: f64,
    pub max_error: f64,
    pub max_half_width: f64,
    pub max_cell: Vec<usize>,
    pub cells: Vec<CellStat>,
    pub cells_possible: u128,
    pub insufficient_trials: bool,
    pub failures: BTreeMap<String, usize>,
    /// Trials decoded correctly but with an ambiguous delay estimate.
    pub delay_ambiguous: usize,
    pub typicality_tests: u64,
    /// Largest per-codeword test count seen at each stage.
    pub stage_tests_per_codeword: BTreeMap<String, u64>,
}

/// 95% normal-approximation half-width.
pub fn half_width(p: f64, trials: usize) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

struct TrialResult {
    cell: Vec<usize>,
    error: bool,
    reason: Option<String>,
    delay_ambiguous: bool,
    outcome_stats: crate::decoders::DecodeStats,
}

fn judge(window: &TransmissionWindow, outcome: &DecodeOutcome) -> (bool, Option<String>, bool) {
    match &outcome.verdict {
        Verdict::Failed(f) => (true, Some(f.reason.as_str().to_string()), false),
        Verdict::Decoded(d) => {
            let wrong = d
                .messages
                .iter()
                .enumerate()
                .any(|(m, msg)| window.message(m, 0) != Some(*msg));
            (wrong, wrong.then(|| "wrong_message".to_string()), d.delay_ambiguous)
        }
    }
}

fn bin_of(d: usize, n: usize, bins: usize) -> usize {
    (d * bins / n).min(bins - 1)
}

/// Runs independent trials of `decoder` on windows transmitted through `w`.
///
/// Trial `t` uses seeds derived from `seed ^ t`, so the report does not
/// depend on thread count. An error is any block-0 message wrong for any
/// sender, including decoder failures.
pub fn run_trials(
    w: &DmcChannel,
    cb: &CodebookSystem,
    ds: &DelaySystem,
    decoder: &dyn Decoder,
    mode: &TrialMode,
    half_blocks: usize,
    seed: u64,
) -> Result<TrialReport> {
    let n = cb.blocklength();
    let k = cb.num_senders();
    ds.validate(n)?;
    if ds.num_senders() != k {
        return Err(AmacError::ShapeMismatch(format!(
            "delay system has {} senders, codes {k}",
            ds.num_senders()
        )));
    }
    let sampler = ChannelSampler::new(w);

    let (plan, bins): (Vec<(Vec<usize>, Vec<usize>)>, Option<usize>) = match mode {
        TrialMode::Sampled { trials, bins } => {
            let bins = bins.unwrap_or_else(|| {
                let per = (*trials as f64 / MIN_TRIALS_PER_CELL as f64).max(1.0);
                (per.powf(1.0 / k as f64).floor() as usize).clamp(1, n)
            });
            let plan = (0..*trials)
                .map(|t| {
                    let mut rng = stream(&[seed ^ t as u64, 0xDE1A]);
                    let d = ds.sample(n, &mut rng)?;
                    let key = d.iter().map(|&x| bin_of(x, n, bins)).collect();
                    Ok((d, key))
                })
                .collect::<Result<_>>()?;
            (plan, Some(bins))
        }
        TrialMode::Enumerated { trials_per_cell } => {
            let support = ds.support(n)?;
            let plan = support
                .iter()
                .flat_map(|(d, _)| (0..*trials_per_cell).map(move |_| (d.clone(), d.clone())))
                .collect();
            (plan, None)
        }
    };

    let results: Vec<TrialResult> = plan
        .par_iter()
        .enumerate()
        .map(|(t, (d, key))| {
            let tseed = seed ^ t as u64;
            let window = transmit_sampled(&sampler, w, cb, d, half_blocks, tseed)?;
            let mut rng = trial_rng(seed, t as u64);
            let outcome = decoder.decode(&window, &mut rng);
            let (error, reason, amb) = judge(&window, &outcome);
            Ok(TrialResult {
                cell: key.clone(),
                error,
                reason,
                delay_ambiguous: amb && !error,
                outcome_stats: outcome.stats,
            })
        })
        .collect::<Result<_>>()?;

    let mut cells: BTreeMap<Vec<usize>, (usize, usize)> = BTreeMap::new();
    let mut failures = BTreeMap::new();
    let mut stage_tests = BTreeMap::new();
    let mut tests = 0u64;
    let mut delay_ambiguous = 0;
    for r in &results {
        let e = cells.entry(r.cell.clone()).or_insert((0, 0));
        e.0 += 1;
        e.1 += usize::from(r.error);
        if let Some(reason) = &r.reason {
            *failures.entry(reason.clone()).or_insert(0) += 1;
        }
        delay_ambiguous += usize::from(r.delay_ambiguous);
        tests += r.outcome_stats.tests();
        for s in &r.outcome_stats.stages {
            let v = stage_tests.entry(s.label.clone()).or_insert(0u64);
            *v = (*v).max(s.tests_per_codeword);
        }
    }
    let cell_stats: Vec<CellStat> = cells
        .into_iter()
        .map(|(key, (trials, errors))| {
            let weight = match bins {
                None => ds.pmf(n, &key),
                Some(_) => trials as f64 / results.len().max(1) as f64,
            };
            CellStat { key, trials, errors, weight }
        })
        .collect();
    let total = results.len();
    let errors = results.iter().filter(|r| r.error).count();
    let average_error = match bins {
        None => {
            let wsum: f64 = cell_stats.iter().map(|c| c.weight).sum();
            cell_stats.iter().map(|c| c.weight * c.rate()).sum::<f64>() / wsum.max(f64::MIN_POSITIVE)
        }
        Some(_) => errors as f64 / total.max(1) as f64,
    };
    let max = cell_stats
        .iter()
        .max_by(|a, b| a.rate().total_cmp(&b.rate()).then(b.key.cmp(&a.key)))
        .cloned();
    let (max_error, max_half_width, max_cell) = match &max {
        Some(c) => (c.rate(), half_width(c.rate(), c.trials), c.key.clone()),
        None => (0.0, 1.0, Vec::new()),
    };
    let cells_possible = match bins {
        Some(b) => match ds {
            DelaySystem::PartlyAsync3 => (b * b) as u128,
            _ => (b as u128).pow(k as u32),
        },
        None => ds.support_size(n),
    };
    let insufficient_trials = cell_stats.iter().any(|c| c.trials < MIN_TRIALS_PER_CELL)
        || (cell_stats.len() as u128) < cells_possible.min(total as u128);
    Ok(TrialReport {
        delay_system: ds.name(),
        n,
        half_blocks,
        seed,
        rates: cb.rates(),
        mode: if bins.is_some() { "sampled" } else { "enumerated" }.into(),
        trials: total,
        errors,
        average_error,
        average_half_width: half_width(average_error, total),
        max_error,
        max_half_width,
        max_cell,
        cells: cell_stats,
        cells_possible,
        insufficient_trials,
        failures,
        delay_ambiguous,
        typicality_tests: tests,
        stage_tests_per_codeword: stage_tests,
    })
}

impl TrialReport {
    pub const CSV_HEADER: &'static str =
        "delay_system,n,trials,errors,average_error,average_half_width,max_error,max_half_width,mode,insufficient_trials";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.delay_system,
            self.n,
            self.trials,
            self.errors,
            self.average_error,
            self.average_half_width,
            self.max_error,
            self.max_half_width,
            self.mode,
            self.insufficient_trials
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;
    use crate::decoders::{Decoded, DecodeStats};
    use crate::infocore::Distribution;
    use crate::simkernel::codebook::{generate_codebooks, CodebookSpec, Storage, SymbolSchedule};

    struct Oracle;
    impl Decoder for Oracle {
        fn decode(&self, window: &TransmissionWindow, _: &mut ChaCha8Rng) -> DecodeOutcome {
            DecodeOutcome {
                verdict: Verdict::Decoded(Decoded {
                    messages: (0..window.num_senders()).map(|m| window.message(m, 0).unwrap()).collect(),
                    delays: window.delays.clone(),
                    delay_ambiguous: false,
                    records: Vec::new(),
                }),
                stats: DecodeStats::default(),
            }
        }
    }

    struct Constant;
    impl Decoder for Constant {
        fn decode(&self, window: &TransmissionWindow, _: &mut ChaCha8Rng) -> DecodeOutcome {
            DecodeOutcome {
                verdict: Verdict::Decoded(Decoded {
                    messages: vec![[0, 0]; window.num_senders()],
                    delays: vec![0; window.num_senders()],
                    delay_ambiguous: false,
                    records: Vec::new(),
                }),
                stats: DecodeStats::default(),
            }
        }
    }

    fn setup(n: usize, rate: f64) -> (DmcChannel, CodebookSystem) {
        let spec = CodebookSpec {
            n,
            rates: vec![rate],
            schedules: vec![SymbolSchedule::single(Distribution::uniform(2))],
        };
        (channels::identity(2), generate_codebooks(&spec, 3, Storage::Auto).unwrap())
    }

    #[test]
    fn oracle_and_constant() {
        let (w, cb) = setup(8, 1.0 / 8.0);
        let ds = DelaySystem::TotallyAsync { senders: 1 };
        let r = run_trials(&w, &cb, &ds, &Oracle, &TrialMode::Sampled { trials: 200, bins: None }, 1, 1).unwrap();
        assert_eq!(r.errors, 0);
        assert_eq!(r.max_error, 0.0);
        let r = run_trials(&w, &cb, &ds, &Constant, &TrialMode::Sampled { trials: 2000, bins: None }, 1, 1).unwrap();
        assert!((r.average_error - 0.5).abs() < 3.0 * (0.25f64 / 2000.0).sqrt());
        assert!(r.max_error >= r.average_error - 1e-12);

        let e = run_trials(&w, &cb, &ds, &Constant, &TrialMode::Enumerated { trials_per_cell: 30 }, 1, 1).unwrap();
        assert_eq!(e.cells.len(), 8);
        assert_eq!(e.mode, "enumerated");
    }

    #[test]
    fn thread_count_independent() {
        let (w, cb) = setup(8, 0.25);
        let ds = DelaySystem::TotallyAsync { senders: 1 };
        let mode = TrialMode::Sampled { trials: 100, bins: Some(2) };
        let a = run_trials(&w, &cb, &ds, &Constant, &mode, 1, 4).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_trials(&w, &cb, &ds, &Constant, &mode, 1, 4).unwrap());
        assert_eq!(a.errors, b.errors);
        assert_eq!(a.cells, b.cells);
    }
}
