//! Monte Carlo machinery: delay systems, random codebooks, windowed
//! transmission through the channel and error statistics.

mod codebook;
mod delay;
mod transmit;
mod trials;

pub use codebook::{
    codebook_tag, generate_codebooks, segment_len, Codebook, CodebookSize, CodebookSpec,
    CodebookSystem, Message, SenderCode, Storage, SymbolSchedule, DEFAULT_MATERIALIZE_CAP,
};
pub use delay::{DelaySystem, MAX_ENUMERATED_SUPPORT};
pub use transmit::{transmit, transmit_with_delays, ChannelSampler, TransmissionWindow, NO_SYMBOL};
pub use trials::{half_width, run_trials, CellStat, Decoder, TrialMode, TrialReport, MIN_TRIALS_PER_CELL};
