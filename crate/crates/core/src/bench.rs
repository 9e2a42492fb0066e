//! Per-frame latency of the tracking pipeline on a synthetic raw frame.

use crate::error::Result;
use crate::mask::GrayFrame;
use crate::metrics::{time_stage, StageTiming};
use crate::orientation::{skeleton_orientation, AngleEstimate, OrientationParams};
use crate::pipeline::PipelineConfig;
use crate::segmenter::segment_diff;
use crate::synth::{contact_frame, rasterize, reference_frame, ShapeKind, ShapeSpec};
use crate::thinning::thin;
use crate::tracker::SlipTrack;

pub const END_TO_END: &str = "end_to_end";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchParams {
    pub width: usize,
    pub height: usize,
    pub reps: usize,
    pub warmup: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            reps: 100,
            warmup: 10,
        }
    }
}

/// Reference frame and one contact frame carrying a 30 degree capsule that
/// spans about half the shorter side.
pub fn bench_frames(width: usize, height: usize) -> Result<(GrayFrame, GrayFrame)> {
    let short = width.min(height) as f64;
    let shape = ShapeSpec::centered(
        ShapeKind::Capsule,
        0.35 * short,
        0.15 * short,
        30.0,
        (width, height),
    );
    let reference = reference_frame(width, height)?;
    let frame = contact_frame(&reference, &rasterize(&shape)?, 60)?;
    Ok((reference, frame))
}

/// Times segmentation, thinning, skeleton orientation, the tracker update and
/// all four together. The end-to-end stage is last.
pub fn run_bench(params: &BenchParams, config: &PipelineConfig) -> Result<Vec<StageTiming>> {
    let (reference, frame) = bench_frames(params.width, params.height)?;
    let orientation: OrientationParams<f64> = config.orientation();
    let mask = segment_diff(&frame, &reference, &config.segment)?;
    let skeleton = thin(&mask)?;
    let estimate: AngleEstimate<f64> = skeleton_orientation(&skeleton, &orientation);
    let mut track = SlipTrack::start(&estimate, 0)?;
    let mut next = 1u64;
    let mut stages = vec![
        time_stage("segment_diff", params.reps, params.warmup, || {
            segment_diff(&frame, &reference, &config.segment)
        }),
        time_stage("thin", params.reps, params.warmup, || thin(&mask)),
        time_stage("skeleton_orientation", params.reps, params.warmup, || {
            skeleton_orientation::<f64>(&skeleton, &orientation)
        }),
        time_stage("tracker_update", params.reps, params.warmup, || {
            next += 1;
            track.update(&estimate, next)
        }),
    ];
    let mut track = SlipTrack::start(&estimate, 0)?;
    let mut next = 0u64;
    stages.push(time_stage(
        END_TO_END,
        params.reps,
        params.warmup,
        || -> Result<()> {
            let mask = segment_diff(&frame, &reference, &config.segment)?;
            let skeleton = thin(&mask)?;
            let estimate: AngleEstimate<f64> = skeleton_orientation(&skeleton, &orientation);
            next += 1;
            track.update(&estimate, next)?;
            Ok(())
        },
    ));
    Ok(stages)
}
