//! Per-frame pipeline: segment (raw frames only), isolate the largest
//! region, estimate its orientation and feed the slip tracker.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{list_frames, read_pgm};
use crate::mask::{largest_component, BinaryMask, Connectivity, GrayFrame};
use crate::orientation::{AngleEstimate, Estimator, OrientationParams};
use crate::segmenter::{segment_diff, SegmentParams};
use crate::tracker::{SlipSample, SlipTrack};

/// Effective configuration of a tracking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub estimator: Estimator,
    pub circularity_threshold: f64,
    pub min_area: u64,
    pub segment: SegmentParams,
    /// Moving-average window over valid slips; 0 disables smoothing.
    pub smoothing_window: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let orientation = OrientationParams::<f64>::default();
        Self {
            estimator: Estimator::Skeleton,
            circularity_threshold: orientation.circularity_threshold,
            min_area: orientation.min_area,
            segment: SegmentParams::default(),
            smoothing_window: 0,
        }
    }
}

impl PipelineConfig {
    pub fn orientation(&self) -> OrientationParams<f64> {
        OrientationParams {
            circularity_threshold: self.circularity_threshold,
            min_area: self.min_area,
        }
    }

    /// Flat `key = value` entries; see [`crate::io::write_manifest`].
    pub fn to_entries(&self) -> Vec<(String, String)> {
        vec![
            ("estimator".into(), self.estimator.to_string()),
            (
                "circularity_threshold".into(),
                format!("{:?}", self.circularity_threshold),
            ),
            ("min_area".into(), self.min_area.to_string()),
            ("threshold".into(), self.segment.threshold.to_string()),
            ("open_radius".into(), self.segment.open_radius.to_string()),
            ("close_radius".into(), self.segment.close_radius.to_string()),
            ("smoothing_window".into(), self.smoothing_window.to_string()),
        ]
    }

    /// Applies entries over the defaults. Unknown keys are rejected.
    pub fn from_entries<'a, I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = Self::default();
        for (key, value) in entries {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "estimator" => self.estimator = value.trim().parse()?,
            "circularity_threshold" => self.circularity_threshold = parse(key, value)?,
            "min_area" => self.min_area = parse(key, value)?,
            "threshold" => self.segment.threshold = parse(key, value)?,
            "open_radius" => self.segment.open_radius = parse(key, value)?,
            "close_radius" => self.segment.close_radius = parse(key, value)?,
            "smoothing_window" => self.smoothing_window = parse(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key '{other}'"
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.circularity_threshold.is_finite() && self.circularity_threshold >= 1.0) {
            return Err(Error::Config(format!(
                "circularity_threshold must be a finite ratio >= 1, got {}",
                self.circularity_threshold
            )));
        }
        Ok(())
    }
}

/// Orientation of the largest 8-connected region of `mask`.
pub fn estimate_region(mask: &BinaryMask, config: &PipelineConfig) -> Result<AngleEstimate<f64>> {
    let region = largest_component(mask, Connectivity::Eight);
    config.estimator.estimate(&region, &config.orientation())
}

/// Stateful frame-by-frame tracker for one grasp.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    reference_frame: Option<GrayFrame>,
    track: Option<SlipTrack<f64>>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Self {
            config,
            reference_frame: None,
            track: None,
        }
    }

    /// Pipeline for raw tactile frames differenced against `reference`.
    pub fn with_reference(config: PipelineConfig, reference: GrayFrame) -> Self {
        Self {
            reference_frame: Some(reference),
            ..Self::new(config)
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn track(&self) -> Option<&SlipTrack<f64>> {
        self.track.as_ref()
    }

    pub fn into_track(self) -> Option<SlipTrack<f64>> {
        self.track
    }

    /// Processes a raw frame (needs a reference) or, without a reference,
    /// treats the frame as a mask.
    pub fn push_frame(&mut self, frame_index: u64, frame: &GrayFrame) -> Result<SlipSample<f64>> {
        let mask = match &self.reference_frame {
            Some(reference) => segment_diff(frame, reference, &self.config.segment)?,
            None => frame.to_mask(),
        };
        self.push_mask(frame_index, &mask)
    }

    pub fn push_mask(&mut self, frame_index: u64, mask: &BinaryMask) -> Result<SlipSample<f64>> {
        let estimate = estimate_region(mask, &self.config)?;
        self.push_estimate(frame_index, &estimate)
    }

    pub fn push_estimate(
        &mut self,
        frame_index: u64,
        estimate: &AngleEstimate<f64>,
    ) -> Result<SlipSample<f64>> {
        match &mut self.track {
            Some(track) => track.update(estimate, frame_index),
            None => {
                let track = SlipTrack::start(estimate, frame_index)?
                    .with_smoothing(self.config.smoothing_window);
                let first = *track.last();
                self.track = Some(track);
                Ok(first)
            }
        }
    }
}

/// Final slip, frame count and invalid-frame count of a track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSummary {
    pub frames: usize,
    pub invalid_frames: usize,
    pub final_slip_deg: f64,
}

impl TrackSummary {
    pub fn of(track: &SlipTrack<f64>) -> Self {
        Self {
            frames: track.samples().len(),
            invalid_frames: track.invalid_count(),
            final_slip_deg: track.last().slip_deg,
        }
    }
}

/// Tracks every numbered frame in `dir`. With a reference the frames are raw
/// and get segmented; otherwise they are masks.
pub fn run_track_dir(
    dir: &Path,
    config: &PipelineConfig,
    reference: Option<&GrayFrame>,
) -> Result<SlipTrack<f64>> {
    let frames = list_frames(dir)?;
    if frames.is_empty() {
        return Err(Error::format(dir, "no numbered .pgm frames"));
    }
    let mut pipeline = match reference {
        Some(r) => Pipeline::with_reference(*config, r.clone()),
        None => Pipeline::new(*config),
    };
    for (index, path) in &frames {
        let frame = read_pgm(path)?;
        pipeline.push_frame(*index, &frame).map_err(|e| match e {
            Error::DimensionMismatch { .. } | Error::NonMonotonicFrame { .. } => {
                Error::format(path, e.to_string())
            }
            other => other,
        })?;
    }
    Ok(pipeline.into_track().expect("at least one frame"))
}

/// Directories below `root` (including `root`) holding numbered frames,
/// sorted. The search does not descend into a sequence directory.
pub fn find_sequence_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        if !list_frames(dir)?.is_empty() {
            out.push(dir.to_path_buf());
            return Ok(());
        }
        let mut subdirs = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_dir() {
                subdirs.push(path);
            }
        }
        subdirs.sort();
        for sub in subdirs {
            walk(&sub, out)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, &mut out)?;
    Ok(out)
}

/// Tracks independent sequences in parallel. Results are in input order.
/// `reference` names a reference frame file inside each sequence directory.
pub fn run_track_batch(
    dirs: &[PathBuf],
    config: &PipelineConfig,
    reference: Option<&Path>,
) -> Vec<Result<SlipTrack<f64>>> {
    dirs.par_iter()
        .map(|dir| {
            let reference = reference
                .map(|name| read_pgm(&dir.join(name)))
                .transpose()?;
            run_track_dir(dir, config, reference.as_ref())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{rasterize, ShapeKind, ShapeSpec};

    #[test]
    fn config_round_trips_through_entries() {
        let cfg = PipelineConfig {
            estimator: Estimator::Ellipse,
            circularity_threshold: 1.0 / 3.0 + 1.0,
            min_area: 7,
            segment: SegmentParams {
                threshold: 9,
                open_radius: 0,
                close_radius: 3,
            },
            smoothing_window: 4,
        };
        let entries = cfg.to_entries();
        let back =
            PipelineConfig::from_entries(entries.iter().map(|(k, v)| (k.as_str(), v.as_str())))
                .unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_bad_entries() {
        assert!(PipelineConfig::from_entries([("nope", "1")]).is_err());
        assert!(PipelineConfig::from_entries([("min_area", "x")]).is_err());
        assert!(PipelineConfig::from_entries([("estimator", "hough")]).is_err());
        assert!(PipelineConfig::from_entries([("circularity_threshold", "0.5")]).is_err());
    }

    #[test]
    fn defaults() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.estimator, Estimator::Skeleton);
        assert_eq!(cfg.circularity_threshold, 1.3);
        assert_eq!(cfg.min_area, 20);
        assert_eq!(
            cfg.segment,
            SegmentParams {
                threshold: 25,
                open_radius: 1,
                close_radius: 2
            }
        );
        assert_eq!(cfg.smoothing_window, 0);
    }

    #[test]
    fn disc_first_frame_is_degenerate() {
        let disc = rasterize(&ShapeSpec::centered(
            ShapeKind::Disc,
            30.0,
            30.0,
            0.0,
            (64, 64),
        ))
        .unwrap();
        let mut p = Pipeline::new(PipelineConfig::default());
        assert!(matches!(
            p.push_mask(0, &disc),
            Err(Error::DegenerateInitialContact)
        ));
        assert!(p.track().is_none());
    }

    #[test]
    fn single_frame_track() {
        let m = rasterize(&ShapeSpec::centered(
            ShapeKind::Capsule,
            30.0,
            10.0,
            20.0,
            (64, 64),
        ))
        .unwrap();
        let mut p = Pipeline::new(PipelineConfig::default());
        let s = p.push_mask(0, &m).unwrap();
        assert_eq!(s.slip_deg, 0.0);
        let summary = TrackSummary::of(p.track().unwrap());
        assert_eq!(summary.frames, 1);
        assert_eq!(summary.final_slip_deg, 0.0);
    }
}
