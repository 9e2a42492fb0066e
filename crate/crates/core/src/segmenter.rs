//! Contact-region extraction by differencing a tactile frame against a
//! no-contact reference frame.

use crate::error::{Error, Result};
use crate::mask::{largest_component, morph, BinaryMask, Connectivity, GrayFrame, MorphOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentParams {
    /// Minimum absolute intensity difference for a contact pixel.
    pub threshold: u8,
    /// Opening radius; 0 skips the opening.
    pub open_radius: usize,
    /// Closing radius; 0 skips the closing.
    pub close_radius: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            threshold: 25,
            open_radius: 1,
            close_radius: 2,
        }
    }
}

/// Pixels whose absolute difference reaches the threshold, before any cleanup.
pub fn diff_threshold(
    frame: &GrayFrame,
    reference: &GrayFrame,
    threshold: u8,
) -> Result<BinaryMask> {
    if frame.dims() != reference.dims() {
        return Err(Error::DimensionMismatch {
            left: frame.dims(),
            right: reference.dims(),
        });
    }
    let pixels = frame
        .data()
        .iter()
        .zip(reference.data())
        .map(|(&a, &b)| a.abs_diff(b) >= threshold)
        .collect();
    BinaryMask::from_vec(frame.width(), frame.height(), pixels)
}

/// Threshold, open, close, then keep the largest 8-connected component.
pub fn segment_diff(
    frame: &GrayFrame,
    reference: &GrayFrame,
    params: &SegmentParams,
) -> Result<BinaryMask> {
    let mut mask = diff_threshold(frame, reference, params.threshold)?;
    if params.open_radius > 0 {
        mask = morph(&mask, MorphOp::Open, params.open_radius)?;
    }
    if params.close_radius > 0 {
        mask = morph(&mask, MorphOp::Close, params.close_radius)?;
    }
    Ok(largest_component(&mask, Connectivity::Eight))
}
