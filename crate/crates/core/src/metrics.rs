//! Segmentation overlap, rotational error and per-stage latency.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::scalar::{Measure, Scalar};
use crate::tracker::{SlipSample, SlipTrack};

/// Pixel counts behind a Dice/IoU pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapCounts {
    pub intersection: u64,
    pub union: u64,
    pub pred: u64,
    pub truth: u64,
}

pub fn overlap_counts(pred: &BinaryMask, truth: &BinaryMask) -> Result<OverlapCounts> {
    pred.ensure_same_dims(truth)?;
    let mut c = OverlapCounts {
        intersection: 0,
        union: 0,
        pred: 0,
        truth: 0,
    };
    for (&a, &b) in pred.pixels().iter().zip(truth.pixels()) {
        c.intersection += u64::from(a && b);
        c.union += u64::from(a || b);
        c.pred += u64::from(a);
        c.truth += u64::from(b);
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegScore<T> {
    pub dice: T,
    pub iou: T,
    pub counts: OverlapCounts,
}

impl<T: Measure> SegScore<T> {
    /// Both-empty masks score 1 on both measures.
    pub fn from_counts(counts: OverlapCounts) -> Self {
        if counts.union == 0 {
            return Self {
                dice: T::one(),
                iou: T::one(),
                counts,
            };
        }
        let i = T::from_count(counts.intersection);
        Self {
            dice: (i + i) / T::from_count(counts.pred + counts.truth),
            iou: i / T::from_count(counts.union),
            counts,
        }
    }

    /// `2 * iou / (1 + iou)`, which equals `dice` exactly over the rationals.
    pub fn dice_from_iou(&self) -> T {
        (self.iou + self.iou) / (T::one() + self.iou)
    }
}

pub fn dice_iou<T: Measure>(pred: &BinaryMask, truth: &BinaryMask) -> Result<SegScore<T>> {
    Ok(SegScore::from_counts(overlap_counts(pred, truth)?))
}

/// Arithmetic mean and population standard deviation.
pub fn mean_std<T: Scalar>(values: &[T]) -> Option<(T, T)> {
    if values.is_empty() {
        return None;
    }
    let n = T::from_usize(values.len())?;
    let mean = values.iter().fold(T::zero(), |acc, &v| acc + v) / n;
    let var = values
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean))
        / n;
    Some((mean, var.sqrt()))
}

pub fn median<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / T::lit(2.0)
    })
}

/// Absolute slip error between a predicted track and ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SlipError<T> {
    pub mean_abs_deg: T,
    pub std_deg: T,
    /// `(frame, |pred - truth|)` for every compared frame.
    pub per_frame_abs_deg: Vec<(u64, T)>,
    /// Error at the last compared frame (the trial's final angle).
    pub final_abs_deg: T,
}

/// Compares valid predicted samples against `(frame, slip_deg)` ground truth.
pub fn rotational_error<T: Scalar>(
    pred: &SlipTrack<T>,
    truth: &[(u64, T)],
) -> Result<SlipError<T>> {
    sample_error(pred.samples(), truth)
}

/// [`rotational_error`] over samples sorted by frame index, e.g. a track read back from CSV.
pub fn sample_error<T: Scalar>(
    samples: &[SlipSample<T>],
    truth: &[(u64, T)],
) -> Result<SlipError<T>> {
    let mut per_frame = Vec::with_capacity(truth.len());
    for &(frame, angle) in truth {
        let idx = samples
            .binary_search_by_key(&frame, |s| s.frame_index)
            .map_err(|_| Error::MissingFrame(frame))?;
        let s = &samples[idx];
        if s.valid {
            per_frame.push((frame, (s.slip_deg - angle).abs()));
        }
    }
    let errors: Vec<T> = per_frame.iter().map(|&(_, e)| e).collect();
    let (mean, std) = mean_std(&errors).ok_or(Error::NoComparableFrames)?;
    let final_abs_deg = per_frame
        .iter()
        .max_by_key(|(f, _)| *f)
        .map(|&(_, e)| e)
        .expect("non-empty");
    Ok(SlipError {
        mean_abs_deg: mean,
        std_deg: std,
        per_frame_abs_deg: per_frame,
        final_abs_deg,
    })
}

/// Wall-clock timings of one pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: String,
    /// Seconds per measured repetition, warm-up excluded.
    pub samples: Vec<f64>,
}

impl StageTiming {
    pub fn mean_std(&self) -> (f64, f64) {
        mean_std(&self.samples).unwrap_or((0.0, 0.0))
    }

    pub fn median(&self) -> f64 {
        median(&self.samples).unwrap_or(0.0)
    }
}

/// Runs `stage` `warmup + reps` times and keeps the last `reps` durations.
pub fn time_stage<R>(
    name: &str,
    reps: usize,
    warmup: usize,
    mut stage: impl FnMut() -> R,
) -> StageTiming {
    for _ in 0..warmup {
        std::hint::black_box(stage());
    }
    let samples = (0..reps)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(stage());
            start.elapsed().as_secs_f64()
        })
        .collect();
    StageTiming {
        stage: name.to_string(),
        samples,
    }
}
