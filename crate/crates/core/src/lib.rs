//! Rotational slip estimation from tactile contact masks.
//!
//! A contact region is segmented from a raw tactile frame (or read as a mask),
//! reduced to its largest 8-connected component, thinned to a skeleton and
//! given a principal-axis orientation. The tracker turns per-frame axis
//! angles into an unwrapped slip signal relative to the first frame.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); overlap scores
//! are generic over [`Measure`], which also covers exact rationals. The
//! aliases below fix the common instantiations.

pub mod bench;
pub mod campaign;
pub mod error;
pub mod eval;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod orientation;
pub mod pipeline;
pub mod scalar;
pub mod segmenter;
pub mod synth;
pub mod thinning;
pub mod tracker;

pub use error::{Error, Result};
pub use mask::{BinaryMask, Connectivity, GrayFrame, MorphOp};
pub use orientation::{AngleEstimate, Estimator, MomentSet, OrientationParams};
pub use pipeline::{Pipeline, PipelineConfig, TrackSummary};
pub use scalar::{reduce_axis_deg, Measure, Scalar};
pub use segmenter::SegmentParams;
pub use thinning::{thin, Skeleton};
pub use tracker::{SlipSample, SlipTrack};

pub type AngleEstimateF64 = AngleEstimate<f64>;
pub type AngleEstimateF32 = AngleEstimate<f32>;
pub type MomentSetF64 = MomentSet<f64>;
pub type MomentSetF32 = MomentSet<f32>;
pub type OrientationParamsF64 = OrientationParams<f64>;
pub type SlipSampleF64 = SlipSample<f64>;
pub type SlipTrackF64 = SlipTrack<f64>;
pub type SlipTrackF32 = SlipTrack<f32>;
pub type SegScoreF64 = metrics::SegScore<f64>;
/// Dice/IoU as exact fractions of pixel counts.
pub type SegScoreExact = metrics::SegScore<num_rational::Ratio<u64>>;
pub type SlipErrorF64 = metrics::SlipError<f64>;
pub type ShapeSpecF64 = synth::ShapeSpec<f64>;
pub type SequenceSpecF64 = synth::SequenceSpec<f64>;
