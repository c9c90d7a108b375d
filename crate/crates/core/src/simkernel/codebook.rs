use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AmacError, Result};
use crate::infocore::Distribution;
use crate::rng::stream;

/// Codebooks at or below this many codewords are stored explicitly under
/// [`Storage::Auto`].
pub const DEFAULT_MATERIALIZE_CAP: u128 = 1 << 16;

/// Per-position symbol law of one sender's codewords.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSchedule {
    Single { law: Distribution },
    /// Positions `0..first_len` use `first`, the rest `second`.
    TwoSegment {
        first_len: usize,
        first: Distribution,
        second: Distribution,
    },
}

impl SymbolSchedule {
    pub fn single(law: Distribution) -> Self {
        SymbolSchedule::Single { law }
    }

    /// Two-segment schedule with `ceil(alpha n)` leading positions.
    pub fn two_segment(n: usize, alpha: f64, first: Distribution, second: Distribution) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(AmacError::InvalidParameter(format!("segment fraction {alpha} outside [0, 1]")));
        }
        Ok(SymbolSchedule::TwoSegment {
            first_len: segment_len(n, alpha),
            first,
            second,
        })
    }

    pub fn law_at(&self, pos: usize) -> &Distribution {
        match self {
            SymbolSchedule::Single { law } => law,
            SymbolSchedule::TwoSegment { first_len, first, second } => {
                if pos < *first_len {
                    first
                } else {
                    second
                }
            }
        }
    }

    pub fn alphabet(&self) -> usize {
        match self {
            SymbolSchedule::Single { law } => law.len(),
            SymbolSchedule::TwoSegment { first, .. } => first.len(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let SymbolSchedule::TwoSegment { first_len, first, second } = self {
            if *first_len > n {
                return Err(AmacError::InvalidParameter(format!(
                    "first segment {first_len} longer than blocklength {n}"
                )));
            }
            if first.len() != second.len() {
                return Err(AmacError::ShapeMismatch("segment laws on different alphabets".into()));
            }
        }
        if self.alphabet() > 256 {
            return Err(AmacError::Unsupported("input alphabets above 256 symbols".into()));
        }
        Ok(())
    }
}

/// `ceil(alpha n)`, guarding against float noise.
pub fn segment_len(n: usize, alpha: f64) -> usize {
    let x = alpha * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Codebook sizes: exact below `2^127`, otherwise only the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookSize {
    pub log2: f64,
    pub exact: Option<u128>,
}

impl CodebookSize {
    /// `max(1, floor(2^{nR}))`.
    pub fn from_rate(n: usize, rate: f64) -> Self {
        let bits = (n as f64 * rate).max(0.0);
        if bits < 127.0 {
            let exact = (bits.exp2().floor() as u128).max(1);
            CodebookSize {
                log2: (exact as f64).log2(),
                exact: Some(exact),
            }
        } else {
            CodebookSize { log2: bits, exact: None }
        }
    }

    pub fn at_most(&self, cap: u128) -> bool {
        self.exact.is_some_and(|c| c <= cap)
    }
}

/// Random codebook of one (possibly virtual) sender. Codeword `i` is a
/// deterministic function of `(seed, tag, i)`, so huge codebooks need not
/// be stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Codebook {
    pub n: usize,
    pub rate: f64,
    pub size: CodebookSize,
    pub schedule: SymbolSchedule,
    seed: u64,
    tag: u64,
    #[serde(skip)]
    cdfs: Vec<Vec<f64>>,
    #[serde(skip)]
    stored: Option<Vec<u8>>,
}

impl Codebook {
    pub fn new(n: usize, rate: f64, schedule: SymbolSchedule, seed: u64, tag: u64) -> Result<Self> {
        if n == 0 {
            return Err(AmacError::InvalidParameter("blocklength must be positive".into()));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(AmacError::InvalidParameter(format!("rate {rate} must be finite and >= 0")));
        }
        schedule.validate(n)?;
        let cdfs = match &schedule {
            SymbolSchedule::Single { law } => vec![law.cdf()],
            SymbolSchedule::TwoSegment { first, second, .. } => vec![first.cdf(), second.cdf()],
        };
        Ok(Codebook {
            n,
            rate,
            size: CodebookSize::from_rate(n, rate),
            schedule,
            seed,
            tag,
            cdfs,
            stored: None,
        })
    }

    pub fn is_materialized(&self) -> bool {
        self.stored.is_some()
    }

    /// Stores every codeword; fails beyond `max_bytes`.
    pub fn materialize(&mut self, max_bytes: usize) -> Result<()> {
        let count = self.size.exact.filter(|c| c.saturating_mul(self.n as u128) <= max_bytes as u128);
        let Some(count) = count else {
            return Err(AmacError::Capacity(format!(
                "codebook of 2^{:.1} codewords x {} symbols exceeds {max_bytes} bytes",
                self.size.log2, self.n
            )));
        };
        let mut data = vec![0u8; count as usize * self.n];
        for (i, chunk) in data.chunks_mut(self.n).enumerate() {
            self.generate(i as u128, chunk);
        }
        self.stored = Some(data);
        Ok(())
    }

    fn generate(&self, index: u128, out: &mut [u8]) {
        let mut rng = stream(&[self.seed, self.tag, index as u64, (index >> 64) as u64]);
        for (pos, slot) in out.iter_mut().enumerate() {
            let cdf = match &self.schedule {
                SymbolSchedule::TwoSegment { first_len, .. } if pos >= *first_len => &self.cdfs[1],
                _ => &self.cdfs[0],
            };
            let u: f64 = rng.gen();
            *slot = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u8;
        }
    }

    /// Writes codeword `index` into `out` (length `n`).
    pub fn codeword_into(&self, index: u128, out: &mut [u8]) {
        match &self.stored {
            Some(data) => {
                let i = index as usize;
                out.copy_from_slice(&data[i * self.n..(i + 1) * self.n]);
            }
            None => self.generate(index, out),
        }
    }

    pub fn codeword(&self, index: u128) -> Vec<u8> {
        let mut out = vec![0; self.n];
        self.codeword_into(index, &mut out);
        out
    }

    /// Uniform message index.
    pub fn draw_message<R: Rng + ?Sized>(&self, rng: &mut R) -> u128 {
        match self.size.exact {
            Some(1) => 0,
            Some(c) => rng.gen_range(0..c),
            None => rng.gen(),
        }
    }
}

/// One real sender's code: plain, split into two virtual senders combined
/// by `max`, or interleaved (even positions from `parts[0]`, odd from
/// `parts[1]`, each of length `n/2`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SenderCode {
    Plain { code: Codebook },
    Split { a: Codebook, b: Codebook },
    Interleaved { even: Codebook, odd: Codebook },
}

/// Message of one sender in one block; the second word is used by split
/// and interleaved codes.
pub type Message = [u128; 2];

impl SenderCode {
    pub fn blocklength(&self) -> usize {
        match self {
            SenderCode::Plain { code } => code.n,
            SenderCode::Split { a, .. } => a.n,
            SenderCode::Interleaved { even, .. } => 2 * even.n,
        }
    }

    pub fn alphabet(&self) -> usize {
        match self {
            SenderCode::Plain { code } => code.schedule.alphabet(),
            SenderCode::Split { a, .. } => a.schedule.alphabet(),
            SenderCode::Interleaved { even, .. } => even.schedule.alphabet(),
        }
    }

    /// Rate in bits per channel symbol.
    pub fn rate(&self) -> f64 {
        match self {
            SenderCode::Plain { code } => code.size.log2 / code.n as f64,
            SenderCode::Split { a, b } => (a.size.log2 + b.size.log2) / a.n as f64,
            SenderCode::Interleaved { even, odd } => (even.size.log2 + odd.size.log2) / (2 * even.n) as f64,
        }
    }

    pub fn draw_message<R: Rng + ?Sized>(&self, rng: &mut R) -> Message {
        match self {
            SenderCode::Plain { code } => [code.draw_message(rng), 0],
            SenderCode::Split { a, b } => [a.draw_message(rng), b.draw_message(rng)],
            SenderCode::Interleaved { even, odd } => [even.draw_message(rng), odd.draw_message(rng)],
        }
    }

    /// Channel-input symbols of one block.
    pub fn block_symbols(&self, msg: &Message, out: &mut [u8]) {
        match self {
            SenderCode::Plain { code } => code.codeword_into(msg[0], out),
            SenderCode::Split { a, b } => {
                a.codeword_into(msg[0], out);
                let xb = b.codeword(msg[1]);
                for (o, v) in out.iter_mut().zip(xb) {
                    *o = (*o).max(v);
                }
            }
            SenderCode::Interleaved { even, odd } => {
                let xe = even.codeword(msg[0]);
                let xo = odd.codeword(msg[1]);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = if i % 2 == 0 { xe[i / 2] } else { xo[i / 2] };
                }
            }
        }
    }

    pub fn codebooks(&self) -> Vec<&Codebook> {
        match self {
            SenderCode::Plain { code } => vec![code],
            SenderCode::Split { a, b } => vec![a, b],
            SenderCode::Interleaved { even, odd } => vec![even, odd],
        }
    }

    fn codebooks_mut(&mut self) -> Vec<&mut Codebook> {
        match self {
            SenderCode::Plain { code } => vec![code],
            SenderCode::Split { a, b } => vec![a, b],
            SenderCode::Interleaved { even, odd } => vec![even, odd],
        }
    }
}

/// Rates and symbol schedules for plain codebooks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodebookSpec {
    pub n: usize,
    pub rates: Vec<f64>,
    pub schedules: Vec<SymbolSchedule>,
}

/// How codewords are held in memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Storage {
    /// Store small codebooks, generate large ones on demand.
    Auto,
    /// Store everything; error beyond `max_bytes` per codebook.
    Materialize { max_bytes: usize },
}

/// The `K` codes of a coding system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodebookSystem {
    pub codes: Vec<SenderCode>,
    pub seed: u64,
}

impl CodebookSystem {
    pub fn new(mut codes: Vec<SenderCode>, seed: u64, storage: Storage) -> Result<Self> {
        let n = codes.first().map(SenderCode::blocklength).ok_or_else(|| {
            AmacError::InvalidParameter("coding system needs at least one sender".into())
        })?;
        if codes.iter().any(|c| c.blocklength() != n) {
            return Err(AmacError::ShapeMismatch("senders use different blocklengths".into()));
        }
        for code in &mut codes {
            for cb in code.codebooks_mut() {
                match storage {
                    Storage::Auto => {
                        if cb.size.at_most(DEFAULT_MATERIALIZE_CAP) {
                            cb.materialize(usize::MAX)?;
                        }
                    }
                    Storage::Materialize { max_bytes } => cb.materialize(max_bytes)?,
                }
            }
        }
        Ok(CodebookSystem { codes, seed })
    }

    pub fn num_senders(&self) -> usize {
        self.codes.len()
    }

    pub fn blocklength(&self) -> usize {
        self.codes[0].blocklength()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.codes.iter().map(SenderCode::rate).collect()
    }
}

/// Tag for codebook `part` of sender `sender`.
pub fn codebook_tag(sender: usize, part: usize) -> u64 {
    ((sender as u64) << 8) | part as u64
}

/// Plain i.i.d. codebooks for every sender of `spec`.
pub fn generate_codebooks(spec: &CodebookSpec, seed: u64, storage: Storage) -> Result<CodebookSystem> {
    if spec.rates.len() != spec.schedules.len() {
        return Err(AmacError::ShapeMismatch(format!(
            "{} rates but {} symbol schedules",
            spec.rates.len(),
            spec.schedules.len()
        )));
    }
    let codes = spec
        .rates
        .iter()
        .zip(&spec.schedules)
        .enumerate()
        .map(|(m, (&r, s))| {
            Ok(SenderCode::Plain {
                code: Codebook::new(spec.n, r, s.clone(), seed, codebook_tag(m, 0))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CodebookSystem::new(codes, seed, storage)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, r: f64, s: SymbolSchedule) -> CodebookSpec {
        CodebookSpec { n, rates: vec![r], schedules: vec![s] }
    }

    #[test]
    fn sizes_and_determinism() {
        let u = SymbolSchedule::single(Distribution::uniform(2));
        let cb = generate_codebooks(&spec(4, 0.0, u.clone()), 1, Storage::Auto).unwrap();
        assert_eq!(cb.codes[0].codebooks()[0].size.exact, Some(1));

        let a = generate_codebooks(&spec(4, 0.5, u.clone()), 9, Storage::Auto).unwrap();
        let b = generate_codebooks(&spec(4, 0.5, u.clone()), 9, Storage::Auto).unwrap();
        let ca = a.codes[0].codebooks()[0];
        assert_eq!(ca.size.exact, Some(4));
        for i in 0..4 {
            assert_eq!(ca.codeword(i), b.codes[0].codebooks()[0].codeword(i));
        }
        let lazy = Codebook::new(4, 0.5, u.clone(), 9, codebook_tag(0, 0)).unwrap();
        assert_eq!(lazy.codeword(3), ca.codeword(3));

        assert!(generate_codebooks(&spec(400, 0.3, u), 1, Storage::Materialize { max_bytes: 1 << 20 }).is_err());
    }

    #[test]
    fn two_segment_frequencies() {
        let s = SymbolSchedule::two_segment(
            100,
            0.5,
            Distribution::bernoulli(0.9).unwrap(),
            Distribution::bernoulli(0.1).unwrap(),
        )
        .unwrap();
        let cb = Codebook::new(100, 0.1, s, 3, 0).unwrap();
        let mut ones = [0usize; 2];
        for i in 0..1000u128 {
            let w = cb.codeword(i);
            ones[0] += w[..50].iter().filter(|&&x| x == 1).count();
            ones[1] += w[50..].iter().filter(|&&x| x == 1).count();
        }
        let f0 = ones[0] as f64 / 50_000.0;
        let f1 = ones[1] as f64 / 50_000.0;
        assert!((f0 - 0.9).abs() < 0.05 && (f1 - 0.1).abs() < 0.05);
    }
}
