//! Synthetic grasp-and-lift campaign: several contact shapes, several seeded
//! trials each, every trial a rotation ramp tracked end to end and scored
//! against its ground-truth schedule.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::eval::{SlipReport, TrialError};
use crate::metrics::rotational_error;
use crate::orientation::Estimator;
use crate::pipeline::{Pipeline, PipelineConfig};
use crate::synth::{
    gen_sequence, linear_schedule, write_sequence_dir, SequenceSpec, ShapeKind, ShapeSpec,
};

/// One campaign object.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignShape {
    pub label: String,
    pub kind: ShapeKind,
    pub length: f64,
    pub width: f64,
    /// Orientation at the start of the ramp, before per-trial jitter.
    pub base_angle_deg: f64,
}

impl CampaignShape {
    pub fn new(label: &str, kind: ShapeKind, length: f64, width: f64, base_angle_deg: f64) -> Self {
        Self {
            label: label.to_string(),
            kind,
            length,
            width,
            base_angle_deg,
        }
    }
}

/// Nine objects with second-moment elongation between 1.5 and 4: capsules at
/// 2, 3 and 4 (a capsule is at least 1.93 since its straight part is no
/// shorter than its width), rectangles and ellipses at 1.5, 2.5 and 4.
pub fn default_shapes() -> Vec<CampaignShape> {
    use ShapeKind::*;
    vec![
        CampaignShape::new("capsule-a", Capsule, 55.6, 52.0, -50.0),
        CampaignShape::new("capsule-b", Capsule, 87.7, 42.0, 10.0),
        CampaignShape::new("capsule-c", Capsule, 111.5, 36.0, 55.0),
        CampaignShape::new("rectangle-a", Rectangle, 96.0, 64.0, -20.0),
        CampaignShape::new("rectangle-b", Rectangle, 125.0, 50.0, 35.0),
        CampaignShape::new("rectangle-c", Rectangle, 160.0, 40.0, -75.0),
        CampaignShape::new("ellipse-a", Ellipse, 105.0, 70.0, 70.0),
        CampaignShape::new("ellipse-b", Ellipse, 140.0, 56.0, -35.0),
        CampaignShape::new("ellipse-c", Ellipse, 176.0, 44.0, 0.0),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub shapes: Vec<CampaignShape>,
    pub seeds: Vec<u64>,
    pub boundary_noise_p: f64,
    /// Slip ramp end in degrees (the ramp starts at 0).
    pub ramp_end_deg: f64,
    pub ramp_step_deg: f64,
    pub canvas: (usize, usize),
    pub pipeline: PipelineConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            shapes: default_shapes(),
            seeds: (1..=5).collect(),
            boundary_noise_p: 0.03,
            ramp_end_deg: 40.0,
            ramp_step_deg: 1.0,
            canvas: (320, 240),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl CampaignConfig {
    /// Every (shape, seed) pair, shape-major.
    pub fn jobs(&self) -> Vec<(&CampaignShape, u64)> {
        self.shapes
            .iter()
            .flat_map(|s| self.seeds.iter().map(move |&seed| (s, seed)))
            .collect()
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.pipeline.estimator = estimator;
        self
    }
}

/// Sequence for one trial. The seed jitters the starting angle by up to
/// 5 degrees and the centre by up to 3 pixels, and seeds the noise.
pub fn trial_sequence(
    shape: &CampaignShape,
    seed: u64,
    config: &CampaignConfig,
) -> SequenceSpec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0x5EED);
    let start = shape.base_angle_deg + rng.random_range(-5.0..=5.0);
    let (w, h) = config.canvas;
    let center = (
        (w as f64 - 1.0) / 2.0 + rng.random_range(-3.0..=3.0),
        (h as f64 - 1.0) / 2.0 + rng.random_range(-3.0..=3.0),
    );
    let spec = ShapeSpec {
        kind: shape.kind,
        length: shape.length,
        width: shape.width,
        center,
        angle_deg: start,
        canvas: config.canvas,
    };
    let schedule = linear_schedule(0.0, config.ramp_end_deg, config.ramp_step_deg)
        .into_iter()
        .map(|slip| start + slip)
        .collect();
    SequenceSpec::new(spec, schedule, config.boundary_noise_p, seed)
}

/// Directory of a trial below a campaign root, e.g. `capsule-a/seed-3`.
pub fn trial_dir(shape: &CampaignShape, seed: u64) -> String {
    format!("{}/seed-{seed}", shape.label)
}

pub fn run_trial(shape: &CampaignShape, seed: u64, config: &CampaignConfig) -> Result<TrialError> {
    let seq = trial_sequence(shape, seed, config);
    let frames = gen_sequence(&seq)?;
    let start = seq.schedule[0];
    let mut pipeline = Pipeline::new(config.pipeline);
    let mut truth = Vec::with_capacity(frames.len());
    for (k, frame) in frames.iter().enumerate() {
        pipeline.push_mask(k as u64, &frame.mask)?;
        truth.push((k as u64, frame.truth_angle_deg - start));
    }
    let track = pipeline.into_track().expect("at least one frame");
    let error = rotational_error(&track, &truth)?;
    Ok(TrialError {
        label: shape.label.clone(),
        trial: trial_dir(shape, seed),
        error,
        invalid_frames: track.invalid_count(),
        final_slip_deg: track.last().slip_deg,
    })
}

/// Runs every (shape, seed) trial, in parallel; results keep shape-major order.
pub fn run_campaign(config: &CampaignConfig) -> Result<SlipReport> {
    let trials = config
        .jobs()
        .par_iter()
        .map(|&(shape, seed)| run_trial(shape, seed, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(SlipReport::from_trials(trials))
}

/// Writes every trial sequence below `root` at [`trial_dir`], in parallel.
/// Returns the trial directories in shape-major order.
pub fn write_corpus(
    root: &Path,
    config: &CampaignConfig,
    contact_delta: Option<u8>,
) -> Result<Vec<PathBuf>> {
    config
        .jobs()
        .par_iter()
        .map(|&(shape, seed)| {
            let dir = root.join(trial_dir(shape, seed));
            write_sequence_dir(&dir, &trial_sequence(shape, seed, config), contact_delta)?;
            Ok(dir)
        })
        .collect()
}
