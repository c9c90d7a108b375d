use rand::Rng;
use serde::{Deserialize, Serialize};

use super::codebook::{CodebookSystem, Message};
use super::delay::DelaySystem;
use crate::error::{AmacError, Result};
use crate::infocore::{tuple_index, DmcChannel};
use crate::rng::stream;

/// Marks an output position outside the received window.
pub const NO_SYMBOL: u32 = u32::MAX;

/// Receiver-side window of `2Ln + 1` outputs centered at index 0, plus the
/// ground truth the decoders are scored against.
///
/// Sender `m`'s block `j` occupies stream indices `jn..(j+1)n`; the output at
/// `l` sees stream index `l + d_m`, so block 0 starts at output `-d_m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmissionWindow {
    pub n: usize,
    pub half_blocks: usize,
    pub delays: Vec<usize>,
    /// First block index held in `messages` (`-L-1`).
    pub first_block: i64,
    /// `messages[m][j - first_block]`.
    pub messages: Vec<Vec<Message>>,
    /// `outputs[l + L n]` for `l` in `-Ln..=Ln`.
    pub outputs: Vec<u32>,
    /// Channel-input symbols aligned with `outputs`.
    pub inputs: Vec<Vec<u8>>,
}

impl TransmissionWindow {
    pub fn lo(&self) -> i64 {
        -((self.half_blocks * self.n) as i64)
    }

    pub fn hi(&self) -> i64 {
        (self.half_blocks * self.n) as i64
    }

    pub fn output(&self, l: i64) -> u32 {
        if l < self.lo() || l > self.hi() {
            NO_SYMBOL
        } else {
            self.outputs[(l - self.lo()) as usize]
        }
    }

    pub fn input(&self, m: usize, l: i64) -> Option<u8> {
        (l >= self.lo() && l <= self.hi()).then(|| self.inputs[m][(l - self.lo()) as usize])
    }

    pub fn message(&self, m: usize, block: i64) -> Option<Message> {
        let i = block - self.first_block;
        (i >= 0).then(|| self.messages[m].get(i as usize).copied()).flatten()
    }

    /// Output index where sender `m`'s block 0 starts.
    pub fn block0_start(&self, m: usize) -> i64 {
        -(self.delays[m] as i64)
    }

    pub fn num_senders(&self) -> usize {
        self.delays.len()
    }
}

/// Per-row cumulative laws for sampling channel outputs.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    sizes: Vec<usize>,
    cdfs: Vec<Vec<f64>>,
}

impl ChannelSampler {
    pub fn new(w: &DmcChannel) -> Self {
        let cdfs = (0..w.num_input_tuples())
            .map(|r| {
                let mut acc = 0.0;
                let mut c: Vec<f64> = w.row(r).iter().map(|p| {
                    acc += p;
                    acc
                }).collect();
                if let Some(last) = c.last_mut() {
                    *last = 1.0;
                }
                c
            })
            .collect();
        ChannelSampler { sizes: w.input_sizes().to_vec(), cdfs }
    }

    pub fn sample<R: Rng + ?Sized>(&self, tuple: &[usize], rng: &mut R) -> u32 {
        let cdf = &self.cdfs[tuple_index(&self.sizes, tuple)];
        let u: f64 = rng.gen();
        cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u32
    }
}

/// Samples delays from `ds`, then transmits; see [`transmit_with_delays`].
pub fn transmit(
    w: &DmcChannel,
    cb: &CodebookSystem,
    ds: &DelaySystem,
    half_blocks: usize,
    seed: u64,
) -> Result<TransmissionWindow> {
    let mut rng = stream(&[seed, 0xDE1A]);
    let delays = ds.sample(cb.blocklength(), &mut rng)?;
    transmit_with_delays(w, cb, &delays, half_blocks, seed)
}

/// Draws i.i.d. uniform messages for blocks `-L-1..=L+1` and passes the
/// delayed streams through `w` symbol by symbol.
pub fn transmit_with_delays(
    w: &DmcChannel,
    cb: &CodebookSystem,
    delays: &[usize],
    half_blocks: usize,
    seed: u64,
) -> Result<TransmissionWindow> {
    transmit_sampled(&ChannelSampler::new(w), w, cb, delays, half_blocks, seed)
}

pub(crate) fn transmit_sampled(
    sampler: &ChannelSampler,
    w: &DmcChannel,
    cb: &CodebookSystem,
    delays: &[usize],
    half_blocks: usize,
    seed: u64,
) -> Result<TransmissionWindow> {
    let k = cb.num_senders();
    let n = cb.blocklength();
    if half_blocks == 0 {
        return Err(AmacError::InvalidParameter("window needs L >= 1".into()));
    }
    if w.num_senders() != k || delays.len() != k {
        return Err(AmacError::ShapeMismatch(format!(
            "channel has {} senders, codes {k}, delays {}",
            w.num_senders(),
            delays.len()
        )));
    }
    for (m, code) in cb.codes.iter().enumerate() {
        if code.alphabet() != w.input_sizes()[m] {
            return Err(AmacError::ShapeMismatch(format!(
                "sender {} code alphabet {} but channel alphabet {}",
                m + 1,
                code.alphabet(),
                w.input_sizes()[m]
            )));
        }
    }
    if let Some(d) = delays.iter().find(|&&d| d >= n) {
        return Err(AmacError::InvalidParameter(format!("delay {d} outside 0..{n}")));
    }
    let lb = half_blocks as i64;
    let first_block = -lb - 1;
    let blocks = (2 * lb + 3) as usize;
    let mut rng = stream(&[seed, 0x3E55]);
    let messages: Vec<Vec<Message>> = cb
        .codes
        .iter()
        .map(|c| (0..blocks).map(|_| c.draw_message(&mut rng)).collect())
        .collect();

    let len = 2 * half_blocks * n + 1;
    let lo = -((half_blocks * n) as i64);
    let mut inputs = vec![vec![0u8; len]; k];
    let mut buf = vec![0u8; n];
    for m in 0..k {
        for (bi, msg) in messages[m].iter().enumerate() {
            let j = first_block + bi as i64;
            let start = j * n as i64 - delays[m] as i64;
            if start + n as i64 <= lo || start > -lo {
                continue;
            }
            cb.codes[m].block_symbols(msg, &mut buf);
            for (i, &x) in buf.iter().enumerate() {
                let l = start + i as i64;
                if l >= lo && l <= -lo {
                    inputs[m][(l - lo) as usize] = x;
                }
            }
        }
    }
    let mut tuple = vec![0usize; k];
    let outputs = (0..len)
        .map(|i| {
            for m in 0..k {
                tuple[m] = inputs[m][i] as usize;
            }
            sampler.sample(&tuple, &mut rng)
        })
        .collect();
    Ok(TransmissionWindow {
        n,
        half_blocks,
        delays: delays.to_vec(),
        first_block,
        messages,
        outputs,
        inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;
    use crate::infocore::Distribution;
    use crate::simkernel::codebook::{generate_codebooks, CodebookSpec, Storage, SymbolSchedule};

    #[test]
    fn identity_tiling_and_shift() {
        let w = channels::identity(2);
        let spec = CodebookSpec {
            n: 8,
            rates: vec![0.0],
            schedules: vec![SymbolSchedule::single(Distribution::uniform(2))],
        };
        let cb = generate_codebooks(&spec, 5, Storage::Auto).unwrap();
        let word = cb.codes[0].codebooks()[0].codeword(0);
        for d in [0usize, 3, 7] {
            let win = transmit_with_delays(&w, &cb, &[d], 2, 1).unwrap();
            for l in win.lo()..=win.hi() {
                let idx = (l + d as i64).rem_euclid(8) as usize;
                assert_eq!(win.output(l), word[idx] as u32);
            }
        }
    }

    #[test]
    fn example4_saturated_cell() {
        let w = channels::example4();
        let ones = SymbolSchedule::single(Distribution::point_mass(2, 1));
        let spec = CodebookSpec { n: 100, rates: vec![0.0, 0.0], schedules: vec![ones.clone(), ones] };
        let cb = generate_codebooks(&spec, 1, Storage::Auto).unwrap();
        let win = transmit(&w, &cb, &DelaySystem::TotallyAsync { senders: 2 }, 5, 3).unwrap();
        let n = win.outputs.len() as f64;
        let freq = win.outputs.iter().filter(|&&y| y == 1).count() as f64 / n;
        assert!((freq - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    }
}
