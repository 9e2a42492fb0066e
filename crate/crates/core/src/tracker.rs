//! Accumulated rotational slip relative to the grasp reference.
//!
//! Orientation is an axis, so each frame's `current - reference` difference
//! is only known modulo 180. Every valid frame picks the representative
//! nearest the previous valid slip value, which is correct as long as the true
//! rotation between consecutive valid frames stays below 90 degrees.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::orientation::AngleEstimate;
use crate::scalar::{reduce_axis_deg, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipSample<T> {
    pub frame_index: u64,
    pub raw_angle_deg: T,
    /// Unwrapped slip in degrees; held at the previous value on invalid frames.
    pub slip_deg: T,
    pub valid: bool,
    pub elongation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlipTrack<T> {
    reference_angle_deg: T,
    samples: Vec<SlipSample<T>>,
    /// Last unwrapped (unsmoothed) slip of a valid frame.
    last_unwrapped: T,
    smoothing: usize,
    window: VecDeque<T>,
}

/// Starts a track at frame 0.
pub fn start_track<T: Scalar>(reference: &AngleEstimate<T>) -> Result<SlipTrack<T>> {
    SlipTrack::start(reference, 0)
}

impl<T: Scalar> SlipTrack<T> {
    /// Starts a track whose first sample has the given frame index. The
    /// reference must be a valid estimate.
    pub fn start(reference: &AngleEstimate<T>, frame_index: u64) -> Result<Self> {
        if !reference.valid {
            return Err(Error::DegenerateInitialContact);
        }
        let zero = T::zero();
        Ok(Self {
            reference_angle_deg: reference.angle_deg,
            samples: vec![SlipSample {
                frame_index,
                raw_angle_deg: reference.angle_deg,
                slip_deg: zero,
                valid: true,
                elongation: reference.elongation,
            }],
            last_unwrapped: zero,
            smoothing: 0,
            window: VecDeque::from([zero]),
        })
    }

    /// Enables a trailing moving average over the last `window` valid slips
    /// (0 or 1 disables smoothing). Unwrapping always uses the raw values.
    pub fn with_smoothing(mut self, window: usize) -> Self {
        self.smoothing = window;
        self
    }

    pub fn reference_angle_deg(&self) -> T {
        self.reference_angle_deg
    }

    pub fn samples(&self) -> &[SlipSample<T>] {
        &self.samples
    }

    pub fn last(&self) -> &SlipSample<T> {
        self.samples
            .last()
            .expect("a track always holds its reference sample")
    }

    pub fn invalid_count(&self) -> usize {
        self.samples.iter().filter(|s| !s.valid).count()
    }

    /// Appends the sample for `frame_index` and returns it.
    pub fn update(
        &mut self,
        estimate: &AngleEstimate<T>,
        frame_index: u64,
    ) -> Result<SlipSample<T>> {
        let last = *self.last();
        if frame_index <= last.frame_index {
            return Err(Error::NonMonotonicFrame {
                last: last.frame_index,
                got: frame_index,
            });
        }
        let sample = if estimate.valid {
            let unwrapped = unwrap_near(
                estimate.angle_deg - self.reference_angle_deg,
                self.last_unwrapped,
            );
            self.last_unwrapped = unwrapped;
            SlipSample {
                frame_index,
                raw_angle_deg: estimate.angle_deg,
                slip_deg: self.smooth(unwrapped),
                valid: true,
                elongation: estimate.elongation,
            }
        } else {
            SlipSample {
                frame_index,
                raw_angle_deg: estimate.angle_deg,
                slip_deg: last.slip_deg,
                valid: false,
                elongation: estimate.elongation,
            }
        };
        self.samples.push(sample);
        Ok(sample)
    }

    fn smooth(&mut self, value: T) -> T {
        if self.smoothing <= 1 {
            return value;
        }
        self.window.push_back(value);
        while self.window.len() > self.smoothing {
            self.window.pop_front();
        }
        let sum = self.window.iter().fold(T::zero(), |acc, &v| acc + v);
        sum / T::from_usize(self.window.len()).unwrap()
    }
}

/// Representative of `diff` (mod 180) nearest to `previous`; the step from
/// `previous` lies in (-90, 90].
pub fn unwrap_near<T: Scalar>(diff: T, previous: T) -> T {
    let half = T::lit(180.0);
    let base = reduce_axis_deg(diff);
    let step = reduce_axis_deg(base - previous);
    let turns = ((previous + step - base) / half).round();
    base + turns * half
}
