//! Capacity regions of asynchronous discrete memoryless multiple-access
//! channels, and Monte Carlo validation of the coding schemes that achieve
//! them.
//!
//! * [`infocore`]: distributions, channels, exact information measures.
//! * [`regions`]: rate polytopes, dominant faces, unions and convex
//!   combinations, the even-delay and partly asynchronous regions.
//! * [`splitting`]: max-combiner rate splitting and edge-type splits.
//! * [`simkernel`]: delay systems, random codebooks, windowed
//!   transmission and error statistics.
//! * [`decoders`]: sliding-window typicality decoders, successive
//!   decoding, interleaved time sharing and separating-pattern decoding.
//! * [`converse`]: single-letter converse bounds from codebook statistics.
//! * [`cli`]: experiment configs and the `amac` command.

pub mod channels;
pub mod cli;
pub mod converse;
pub mod decoders;
pub mod error;
pub mod infocore;
pub mod regions;
pub mod rng;
pub mod simkernel;
pub mod splitting;

pub use error::{AmacError, Result};
pub use infocore::{DmcChannel, Distribution, JointSystem, PairLaw, ProductInput, SenderSet};
