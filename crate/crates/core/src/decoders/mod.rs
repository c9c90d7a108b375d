//! Sliding-window joint-typicality decoders: one sender, successive
//! stages, even/odd interleaving, separating patterns and the three-sender
//! rate-split pipeline.

mod engine;
mod interleaved;
mod outcome;
mod pipeline;
mod successive;
mod typicality;

pub use engine::{OffsetRule, Segmenting, Stage, StagePlan};
pub use interleaved::{sub_window, InterleavedCodec, InterleavedDecoder, OperatingPoint};
pub use outcome::*;
pub use pipeline::PartlyAsyncPipeline;
pub use successive::{decode_single_sender, decode_two_segment, successive_decode, successive_plan, PlanDecoder};
pub use typicality::{check_rule, DeltaRule, SegmentLaw, TypicalityParams};
