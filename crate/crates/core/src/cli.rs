//! Experiment configs and the four `amac` tasks.
//!
//! A config is one JSON object; see the README for the schema. Sender
//! lists inside configs (decoding orders) are 1-based, everything else is
//! positional. Channel matrices are row-major with `x_1` slowest and `y`
//! fastest, one inner array per input tuple.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::channels;
use crate::converse::{empirical_bound_report, EmpiricalBoundReport};
use crate::decoders::{
    InterleavedCodec, OperatingPoint, PartlyAsyncPipeline, PlanDecoder, TypicalityParams,
};
use crate::decoders::successive_plan;
use crate::error::{AmacError, Result};
use crate::infocore::{tuple_of, Distribution, DmcChannel, ProductInput};
use crate::regions::{emit_region_plot_data, Ordering, RateVector, RegionKind, SearchBudget};
use crate::simkernel::{
    generate_codebooks, run_trials, CodebookSpec, CodebookSystem, DelaySystem, Decoder, Storage,
    SymbolSchedule, TrialMode, TrialReport,
};
use crate::splitting::{split_for_edge, two_sender_split_point};

const PROB_TOL: f64 = 1e-9;

/// A complete, seeded experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub channel: ChannelSpec,
    /// Defaults to independent uniform delays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_system: Option<DelaySystem>,
    pub task: Task,
    #[serde(default)]
    pub output: OutputNames,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Inline { inputs: Vec<usize>, outputs: usize, transition: Vec<Vec<f64>> },
    /// JSON file holding an `inline` or `named` channel; relative paths
    /// resolve against the config file.
    File { path: PathBuf },
    Named(NamedChannel),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum NamedChannel {
    Example4,
    Bsc { crossover: f64 },
    Identity { size: usize },
    BinaryAdder { senders: usize },
    TupleOutput { inputs: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Region,
    Simulate,
    Split,
    Converse,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Region => "region",
            TaskKind::Simulate => "simulate",
            TaskKind::Split => "split",
            TaskKind::Converse => "converse",
        }
    }
}

/// Per-sender input laws as plain arrays, validated with field paths.
pub type Marginals = Vec<Vec<f64>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Polytope { input: Marginals },
    Union,
    EvenDelay,
    PartlyAsync,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Region {
        region: RegionSpec,
        #[serde(default = "default_resolution")]
        resolution: usize,
        #[serde(default)]
        budget: SearchBudget,
    },
    Simulate {
        n: usize,
        trials: usize,
        decoder: DecoderSpec,
        /// Window half-length in blocks; the decoder's minimum plus one by default.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_blocks: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
        #[serde(default)]
        typicality: TypicalityParams,
    },
    Split {
        input: Marginals,
        rates: Vec<f64>,
        /// Two-sender channels only: which sender to split (1-based).
        #[serde(default = "default_split_sender")]
        sender: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Converse {
        n: usize,
        rates: Vec<f64>,
        input: Marginals,
        /// Measured error probability, for the Fano slack.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error_estimate: Option<f64>,
    },
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Region { .. } => TaskKind::Region,
            Task::Simulate { .. } => TaskKind::Simulate,
            Task::Split { .. } => TaskKind::Split,
            Task::Converse { .. } => TaskKind::Converse,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderSpec {
    /// Plain i.i.d. codebooks decoded one sender at a time. The default
    /// order decodes lower rates first.
    Successive {
        rates: Vec<f64>,
        input: Marginals,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ordering: Option<Vec<usize>>,
    },
    /// Even/odd time sharing of two operating points.
    Interleaved { points: [PointSpec; 2] },
    /// Three senders, senders 1 and 2 sharing a delay: `alpha r + (1 - alpha) r~`
    /// split on a common edge type.
    Pipeline {
        input: Marginals,
        rates: Vec<f64>,
        input_tilde: Marginals,
        rates_tilde: Vec<f64>,
        alpha: f64,
        backoff: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub rates: Vec<f64>,
    pub input: Marginals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
}

/// File names inside the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputNames {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

fn default_resolution() -> usize {
    16
}

fn default_split_sender() -> usize {
    1
}

fn default_tol() -> f64 {
    1e-6
}

fn check(ok: bool, path: impl Into<String>, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(AmacError::config(path, message()))
    }
}

fn check_rates(rates: &[f64], k: usize, path: &str) -> Result<()> {
    check(rates.len() == k, path, || format!("{} rates for {k} senders", rates.len()))?;
    for (i, r) in rates.iter().enumerate() {
        check(r.is_finite() && *r >= 0.0, format!("{path}[{i}]"), || format!("rate {r} is not a non-negative number"))?;
    }
    Ok(())
}

fn to_input(p: &Marginals, w: &DmcChannel, path: &str) -> Result<ProductInput> {
    let k = w.num_senders();
    check(p.len() == k, path, || format!("{} marginals for {k} senders", p.len()))?;
    let mut laws = Vec::with_capacity(k);
    for (m, law) in p.iter().enumerate() {
        let want = w.input_sizes()[m];
        check(law.len() == want, format!("{path}[{m}]"), || {
            format!("{} probabilities, sender alphabet has {want}", law.len())
        })?;
        laws.push(Distribution::new(law.clone()).map_err(|e| AmacError::config(format!("{path}[{m}]"), e.to_string()))?);
    }
    Ok(ProductInput::new(laws))
}

fn region_kind(r: &RegionSpec, w: &DmcChannel) -> Result<RegionKind> {
    Ok(match r {
        RegionSpec::Polytope { input } => RegionKind::Polytope { input: to_input(input, w, "task.region.input")? },
        RegionSpec::Union => RegionKind::Union,
        RegionSpec::EvenDelay => RegionKind::EvenDelay,
        RegionSpec::PartlyAsync => RegionKind::PartlyAsync,
    })
}

fn check_ordering(o: &Option<Vec<usize>>, k: usize, path: &str) -> Result<()> {
    if let Some(o) = o {
        let mut seen = vec![false; k];
        for (i, &s) in o.iter().enumerate() {
            check((1..=k).contains(&s) && !seen[s - 1], format!("{path}[{i}]"), || {
                format!("{s} is not an unused sender in 1..={k}")
            })?;
            seen[s - 1] = true;
        }
        check(o.len() == k, path, || format!("{} entries for {k} senders", o.len()))?;
    }
    Ok(())
}

fn ordering_of(o: &Option<Vec<usize>>, rates: &[f64]) -> Result<Ordering> {
    match o {
        Some(o) => Ordering::new(o.iter().map(|s| s - 1).collect()),
        None => {
            let mut idx: Vec<usize> = (0..rates.len()).collect();
            idx.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]));
            Ordering::new(idx)
        }
    }
}

impl ChannelSpec {
    /// Builds the channel; the path prefix names the offending field.
    pub fn build(&self, base: &Path) -> Result<DmcChannel> {
        match self {
            ChannelSpec::Inline { inputs, outputs, transition } => {
                check(!inputs.is_empty(), "channel.inputs", || "no senders".into())?;
                for (m, &a) in inputs.iter().enumerate() {
                    check(a > 0, format!("channel.inputs[{m}]"), || "empty alphabet".into())?;
                }
                check(*outputs > 0, "channel.outputs", || "empty output alphabet".into())?;
                let rows: usize = inputs.iter().product();
                check(transition.len() == rows, "channel.transition", || {
                    format!("{} rows, expected one per input tuple ({rows})", transition.len())
                })?;
                let mut tuple = vec![0; inputs.len()];
                for (r, row) in transition.iter().enumerate() {
                    let path = format!("channel.transition[{r}]");
                    tuple_of(inputs, r, &mut tuple);
                    check(row.len() == *outputs, &path, || format!("{} entries, expected {outputs}", row.len()))?;
                    if let Some(j) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
                        return Err(AmacError::config(format!("{path}[{j}]"), format!("{} is not a probability", row[j])));
                    }
                    let total: f64 = row.iter().sum();
                    check((total - 1.0).abs() <= PROB_TOL, &path, || {
                        format!("row for inputs {tuple:?} sums to {total}, expected 1")
                    })?;
                }
                DmcChannel::new(inputs.clone(), *outputs, transition.concat())
                    .map_err(|e| AmacError::config("channel", e.to_string()))
            }
            ChannelSpec::File { path } => {
                let full = base.join(path);
                let text = fs::read_to_string(&full)
                    .map_err(|e| AmacError::config("channel.path", format!("{}: {e}", full.display())))?;
                let spec: ChannelSpec = parse_json(&text, "channel")?;
                if matches!(spec, ChannelSpec::File { .. }) {
                    return Err(AmacError::config("channel.path", "channel files cannot point to other files"));
                }
                spec.build(full.parent().unwrap_or(base))
            }
            ChannelSpec::Named(named) => {
                let w = match named {
                    NamedChannel::Example4 => channels::example4(),
                    NamedChannel::Bsc { crossover } => channels::bsc(*crossover)
                        .map_err(|e| AmacError::config("channel.crossover", e.to_string()))?,
                    NamedChannel::Identity { size } => {
                        check(*size > 0, "channel.size", || "empty alphabet".into())?;
                        channels::identity(*size)
                    }
                    NamedChannel::BinaryAdder { senders } => {
                        check((1..=16).contains(senders), "channel.senders", || format!("{senders} is not in 1..=16"))?;
                        channels::binary_adder(*senders)
                    }
                    NamedChannel::TupleOutput { inputs } => {
                        check(!inputs.is_empty() && inputs.iter().all(|&a| a > 0), "channel.inputs", || {
                            "need non-empty alphabets".into()
                        })?;
                        channels::tuple_output(inputs)
                    }
                };
                Ok(w)
            }
        }
    }

    /// Inline form of a channel, used when echoing resolved configs.
    pub fn inline(w: &DmcChannel) -> ChannelSpec {
        ChannelSpec::Inline {
            inputs: w.input_sizes().to_vec(),
            outputs: w.output_size(),
            transition: w.transition().chunks(w.output_size()).map(|r| r.to_vec()).collect(),
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, prefix: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        AmacError::config(path, e.into_inner().to_string())
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text, "")
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path)
            .map_err(|e| AmacError::config("<config>", format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    /// Validates every field and returns the config with the channel
    /// inlined when it came from a file, plus the channel itself.
    pub fn resolve(&self, base: &Path) -> Result<(ExperimentConfig, DmcChannel)> {
        let w = self.channel.build(base)?;
        let k = w.num_senders();
        if let Some(ds) = &self.delay_system {
            check(ds.num_senders() == k, "delay_system", || format!("{} senders, channel has {k}", ds.num_senders()))?;
        }
        match &self.task {
            Task::Region { region, resolution, budget } => {
                check(*resolution >= 2, "task.resolution", || "need at least 2".into())?;
                check(budget.grid_resolution >= 1, "task.budget.grid_resolution", || "must be positive".into())?;
                match region_kind(region, &w)? {
                    RegionKind::Polytope { .. } => {}
                    RegionKind::EvenDelay => check(k == 2, "task.region", || format!("even-delay region needs 2 senders, channel has {k}"))?,
                    RegionKind::PartlyAsync => check(k == 3, "task.region", || format!("partly asynchronous region needs 3 senders, channel has {k}"))?,
                    RegionKind::Union => {}
                }
            }
            Task::Simulate { n, trials, decoder, half_blocks, bins, .. } => {
                check(*n > 0, "task.n", || "blocklength must be positive".into())?;
                check(*trials > 0, "task.trials", || "need at least one trial".into())?;
                check(half_blocks.is_none_or(|l| l > 0), "task.half_blocks", || "must be positive".into())?;
                check(bins.is_none_or(|b| b > 0), "task.bins", || "must be positive".into())?;
                match decoder {
                    DecoderSpec::Successive { rates, input, ordering } => {
                        check_rates(rates, k, "task.decoder.rates")?;
                        to_input(input, &w, "task.decoder.input")?;
                        check_ordering(ordering, k, "task.decoder.ordering")?;
                    }
                    DecoderSpec::Interleaved { points } => {
                        check(n % 2 == 0, "task.n", || format!("interleaving needs an even blocklength, got {n}"))?;
                        for (i, pt) in points.iter().enumerate() {
                            let p = format!("task.decoder.points[{i}]");
                            check_rates(&pt.rates, k, &format!("{p}.rates"))?;
                            to_input(&pt.input, &w, &format!("{p}.input"))?;
                            check_ordering(&pt.ordering, k, &format!("{p}.ordering"))?;
                        }
                    }
                    DecoderSpec::Pipeline { input, rates, input_tilde, rates_tilde, alpha, backoff } => {
                        check(k == 3, "task.decoder", || format!("the pipeline needs 3 senders, channel has {k}"))?;
                        check_rates(rates, k, "task.decoder.rates")?;
                        check_rates(rates_tilde, k, "task.decoder.rates_tilde")?;
                        to_input(input, &w, "task.decoder.input")?;
                        to_input(input_tilde, &w, "task.decoder.input_tilde")?;
                        check((0.0..=1.0).contains(alpha), "task.decoder.alpha", || format!("{alpha} is not in [0, 1]"))?;
                        check(*backoff > 0.0 && *backoff <= 1.0, "task.decoder.backoff", || format!("{backoff} is not in (0, 1]"))?;
                    }
                }
            }
            Task::Split { input, rates, sender, tol } => {
                check(k == 2 || k == 3, "channel", || format!("splitting needs 2 or 3 senders, channel has {k}"))?;
                to_input(input, &w, "task.input")?;
                check_rates(rates, k, "task.rates")?;
                check((1..=2).contains(sender), "task.sender", || format!("{sender} is not 1 or 2"))?;
                check(*tol > 0.0, "task.tol", || "must be positive".into())?;
            }
            Task::Converse { n, rates, input, error_estimate } => {
                check(*n > 0, "task.n", || "blocklength must be positive".into())?;
                check_rates(rates, k, "task.rates")?;
                to_input(input, &w, "task.input")?;
                if let Some(e) = error_estimate {
                    check((0.0..=1.0).contains(e), "task.error_estimate", || format!("{e} is not a probability"))?;
                }
            }
        }
        let mut resolved = self.clone();
        if matches!(self.channel, ChannelSpec::File { .. }) {
            resolved.channel = ChannelSpec::inline(&w);
        }
        Ok((resolved, w))
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn delay_system(&self, k: usize) -> DelaySystem {
        self.delay_system.clone().unwrap_or(DelaySystem::TotallyAsync { senders: k })
    }
}

/// Files written by one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub task: TaskKind,
    pub config_hash: String,
    pub json: PathBuf,
    pub csv: PathBuf,
}

/// Validates `config`, runs its task and writes a JSON report and a CSV
/// summary to `out_dir`. Both embed the resolved config, its hash and the seed.
pub fn run(config: &ExperimentConfig, base: &Path, expected: Option<TaskKind>, out_dir: &Path) -> Result<RunSummary> {
    let kind = config.task.kind();
    if let Some(e) = expected {
        check(e == kind, "task.kind", || format!("config holds a `{}` task, not `{}`", kind.name(), e.name()))?;
    }
    let (resolved, w) = config.resolve(base)?;
    let hash = resolved.hash();
    let (result, csv_body) = execute(&resolved, &w)?;

    let config_json = serde_json::to_string(&resolved)?;
    let report = json!({
        "tool": "amac",
        "version": env!("CARGO_PKG_VERSION"),
        "task": kind.name(),
        "config_hash": hash,
        "seed": resolved.seed,
        "config": resolved,
        "result": result,
    });
    let mut csv = String::new();
    let _ = writeln!(csv, "# config_hash={hash}");
    let _ = writeln!(csv, "# seed={}", resolved.seed);
    let _ = writeln!(csv, "# config={config_json}");
    csv.push_str(&csv_body);

    fs::create_dir_all(out_dir)?;
    let json_path = out_dir.join(resolved.output.json.clone().unwrap_or_else(|| format!("{}.json", kind.name())));
    let csv_path = out_dir.join(resolved.output.csv.clone().unwrap_or_else(|| format!("{}.csv", kind.name())));
    fs::write(&json_path, serde_json::to_string_pretty(&report)? + "\n")?;
    fs::write(&csv_path, csv)?;
    Ok(RunSummary { task: kind, config_hash: hash, json: json_path, csv: csv_path })
}

fn rate_vector(r: &[f64]) -> Result<RateVector> {
    RateVector::new(r.to_vec())
}

fn iid_codebooks(n: usize, rates: &[f64], input: &ProductInput, seed: u64) -> Result<CodebookSystem> {
    let spec = CodebookSpec {
        n,
        rates: rates.to_vec(),
        schedules: (0..rates.len()).map(|m| SymbolSchedule::single(input.marginal(m).clone())).collect(),
    };
    generate_codebooks(&spec, seed, Storage::Auto)
}

fn trials_csv(rep: &TrialReport) -> String {
    format!("{}\n{}\n", TrialReport::CSV_HEADER, rep.csv_row())
}

fn execute(cfg: &ExperimentConfig, w: &DmcChannel) -> Result<(serde_json::Value, String)> {
    let k = w.num_senders();
    let seed = cfg.seed;
    match &cfg.task {
        Task::Region { region, resolution, budget } => {
            let plot = emit_region_plot_data(w, &region_kind(region, w)?, *resolution, budget)?;
            let csv = plot.to_csv(&[]);
            Ok((serde_json::to_value(&plot)?, csv))
        }
        Task::Simulate { n, trials, decoder, half_blocks, bins, typicality } => {
            let ds = cfg.delay_system(k);
            let mode = TrialMode::Sampled { trials: *trials, bins: *bins };
            let go = |cb: &CodebookSystem, dec: &dyn Decoder, min_l: usize| {
                run_trials(w, cb, &ds, dec, &mode, half_blocks.unwrap_or(min_l + 1), seed)
            };
            let rep = match decoder {
                DecoderSpec::Successive { rates, input, ordering } => {
                    let input = &to_input(input, w, "task.decoder.input")?;
                    let pi = ordering_of(ordering, rates)?;
                    let plan = successive_plan(w, input, &pi, *n, typicality)?;
                    let cb = iid_codebooks(*n, rates, input, seed)?;
                    let min_l = plan.min_half_blocks();
                    go(&cb, &PlanDecoder::new(plan, &cb), min_l)?
                }
                DecoderSpec::Interleaved { points } => {
                    let pts = [0, 1].map(|i| -> Result<OperatingPoint> {
                        Ok(OperatingPoint {
                            rates: rate_vector(&points[i].rates)?,
                            input: to_input(&points[i].input, w, &format!("task.decoder.points[{i}].input"))?,
                            ordering: ordering_of(&points[i].ordering, &points[i].rates)?,
                        })
                    });
                    let [a, b] = pts;
                    let codec = InterleavedCodec::new(w, [a?, b?], *n, typicality)?;
                    let cb = codec.encoder(seed, Storage::Auto)?;
                    let dec = codec.decoder(&cb)?;
                    go(&cb, &dec, codec.min_half_blocks())?
                }
                DecoderSpec::Pipeline { input, rates, input_tilde, rates_tilde, alpha, backoff } => {
                    let pipe = PartlyAsyncPipeline::new(
                        w,
                        &to_input(input, w, "task.decoder.input")?,
                        &rate_vector(rates)?,
                        &to_input(input_tilde, w, "task.decoder.input_tilde")?,
                        &rate_vector(rates_tilde)?,
                        *alpha,
                        *backoff,
                        *n,
                        typicality,
                    )?;
                    let cb = pipe.encoder(seed, Storage::Auto)?;
                    let dec = pipe.decoder(&cb);
                    let rep = go(&cb, &dec, pipe.min_half_blocks())?;
                    let csv = trials_csv(&rep);
                    return Ok((json!({ "pipeline": pipe, "trials": rep }), csv));
                }
            };
            let csv = trials_csv(&rep);
            Ok((json!({ "trials": rep }), csv))
        }
        Task::Split { input, rates, sender, tol } => {
            let input = &to_input(input, w, "task.input")?;
            let r = rate_vector(rates)?;
            let mut csv = String::from("stream,rate\n");
            let value = if k == 3 {
                let s = split_for_edge(w, input, &r, *tol)?;
                let _ = writeln!(csv, "# ordering=({})", s.ordering_labels().join(","));
                for (label, rate) in s.labels.iter().zip(s.vertex.as_slice()) {
                    let _ = writeln!(csv, "{label},{rate}");
                }
                serde_json::to_value(&s)?
            } else {
                let s = two_sender_split_point(w, input.marginal(0), input.marginal(1), &r, sender - 1)?;
                let m = sender - 1;
                let labels = if m == 0 { ["1a", "1b", "2"] } else { ["1", "2a", "2b"] };
                for (label, rate) in labels.iter().zip(s.vertex.as_slice()) {
                    let _ = writeln!(csv, "{label},{rate}");
                }
                serde_json::to_value(&s)?
            };
            Ok((value, csv))
        }
        Task::Converse { n, rates, input, error_estimate } => {
            let ds = cfg.delay_system(k);
            let cb = iid_codebooks(*n, rates, &to_input(input, w, "task.input")?, seed)?;
            let rep: EmpiricalBoundReport = empirical_bound_report(w, &cb, &ds, *error_estimate)?;
            let mut csv = String::from(EmpiricalBoundReport::CSV_HEADER);
            csv.push('\n');
            for row in rep.csv_rows() {
                csv.push_str(&row);
                csv.push('\n');
            }
            Ok((serde_json::to_value(&rep)?, csv))
        }
    }
}
