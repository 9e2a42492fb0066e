//! Synthetic contact shapes and rotation sequences with known ground truth.
//!
//! Pixel `(row, col)` has its centre at `(x, y) = (col, row)`, the same frame
//! the orientation estimators use. A shape at `angle_deg` has its long axis
//! along `(cos, sin)` of that angle.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io;
use crate::mask::{BinaryMask, GrayFrame};
use crate::scalar::{sin_cos_deg, Scalar};

/// Name of the pseudo-random generator recorded in sequence manifests.
pub const GENERATOR: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    /// Rectangle `length x width` with semicircular caps of diameter `width`
    /// on both short sides; total extent `length + width`.
    Capsule,
    Rectangle,
    /// Axes `length` and `width` (full diameters).
    Ellipse,
    /// Diameter `width`; `length` must equal `width`.
    Disc,
}

impl ShapeKind {
    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Capsule => "capsule",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::Disc => "disc",
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "capsule" => Ok(ShapeKind::Capsule),
            "rectangle" => Ok(ShapeKind::Rectangle),
            "ellipse" => Ok(ShapeKind::Ellipse),
            "disc" => Ok(ShapeKind::Disc),
            other => Err(Error::Config(format!("unknown shape kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec<T> {
    pub kind: ShapeKind,
    pub length: T,
    pub width: T,
    /// `(x, y)` in pixels.
    pub center: (T, T),
    pub angle_deg: T,
    /// `(width, height)` in pixels.
    pub canvas: (usize, usize),
}

impl<T: Scalar> ShapeSpec<T> {
    /// Shape centred on the canvas, at pixel-centre coordinates
    /// `((w - 1) / 2, (h - 1) / 2)`.
    pub fn centered(
        kind: ShapeKind,
        length: T,
        width: T,
        angle_deg: T,
        canvas: (usize, usize),
    ) -> Self {
        let half = T::lit(0.5);
        let cx = T::from_usize(canvas.0).unwrap() - T::one();
        let cy = T::from_usize(canvas.1).unwrap() - T::one();
        Self {
            kind,
            length,
            width,
            center: (cx * half, cy * half),
            angle_deg,
            canvas,
        }
    }

    pub fn at_angle(&self, angle_deg: T) -> Self {
        Self { angle_deg, ..*self }
    }

    /// Half extents of the rotated shape along x and y.
    pub fn half_extents(&self) -> (T, T) {
        let (s, c) = sin_cos_deg(self.angle_deg);
        let (s, c) = (s.abs(), c.abs());
        let half = T::lit(0.5);
        let (hl, hw) = (self.length * half, self.width * half);
        match self.kind {
            ShapeKind::Capsule => (c * hl + hw, s * hl + hw),
            ShapeKind::Rectangle => (c * hl + s * hw, s * hl + c * hw),
            ShapeKind::Ellipse => ((c * hl).hypot(s * hw), (s * hl).hypot(c * hw)),
            ShapeKind::Disc => (hw, hw),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.length,
            self.width,
            self.center.0,
            self.center.1,
            self.angle_deg,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidShape("non-finite parameter".into()));
        }
        if self.width < T::one() || self.length < self.width {
            return Err(Error::InvalidShape(format!(
                "need length >= width >= 1, got length {} width {}",
                self.length, self.width
            )));
        }
        if self.kind == ShapeKind::Disc && self.length != self.width {
            return Err(Error::InvalidShape("disc needs length == width".into()));
        }
        if self.canvas.0 == 0 || self.canvas.1 == 0 {
            return Err(Error::InvalidDimensions {
                width: self.canvas.0,
                height: self.canvas.1,
            });
        }
        let (hx, hy) = self.half_extents();
        let edge = T::lit(-0.5);
        let (w, h) = (
            T::from_usize(self.canvas.0).unwrap(),
            T::from_usize(self.canvas.1).unwrap(),
        );
        let (cx, cy) = self.center;
        if cx - hx < edge || cy - hy < edge || cx + hx > w + edge || cy + hy > h + edge {
            return Err(Error::ShapeOutsideCanvas);
        }
        Ok(())
    }

    /// Continuous area of the shape.
    pub fn area(&self) -> T {
        let quarter_pi = T::FRAC_PI_4();
        match self.kind {
            ShapeKind::Capsule => self.length * self.width + quarter_pi * self.width * self.width,
            ShapeKind::Rectangle => self.length * self.width,
            ShapeKind::Ellipse => quarter_pi * self.length * self.width,
            ShapeKind::Disc => quarter_pi * self.width * self.width,
        }
    }
}

/// Pixel `(r, c)` is foreground iff its centre lies inside the shape.
pub fn rasterize<T: Scalar>(spec: &ShapeSpec<T>) -> Result<BinaryMask> {
    spec.validate()?;
    let (w, h) = spec.canvas;
    let mut mask = BinaryMask::new(w, h)?;
    let (s, c) = sin_cos_deg(spec.angle_deg);
    let half = T::lit(0.5);
    let (hl, hw) = (spec.length * half, spec.width * half);
    let (cx, cy) = spec.center;
    let (ex, ey) = spec.half_extents();

    let to_index = |v: T, hi: usize| -> usize {
        v.max(T::zero())
            .min(T::from_usize(hi).unwrap())
            .to_usize()
            .unwrap_or(0)
    };
    let (c0, c1) = (
        to_index((cx - ex).floor(), w - 1),
        to_index((cx + ex).ceil(), w - 1),
    );
    let (r0, r1) = (
        to_index((cy - ey).floor(), h - 1),
        to_index((cy + ey).ceil(), h - 1),
    );

    for r in r0..=r1 {
        let dy = T::from_usize(r).unwrap() - cy;
        for col in c0..=c1 {
            let dx = T::from_usize(col).unwrap() - cx;
            let u = dx * c + dy * s;
            let v = dy * c - dx * s;
            let inside = match spec.kind {
                ShapeKind::Capsule => {
                    let du = (u.abs() - hl).max(T::zero());
                    du * du + v * v <= hw * hw
                }
                ShapeKind::Rectangle => u.abs() <= hl && v.abs() <= hw,
                ShapeKind::Ellipse => u * u * hw * hw + v * v * hl * hl <= hl * hl * hw * hw,
                ShapeKind::Disc => u * u + v * v <= hw * hw,
            };
            if inside {
                mask.set(r, col, true);
            }
        }
    }
    Ok(mask)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec<T> {
    pub shape: ShapeSpec<T>,
    /// Shape angle in degrees for each frame.
    pub schedule: Vec<T>,
    /// Flip probability for each boundary pixel, in [0, 1).
    pub boundary_noise_p: T,
    /// Flip probability for every pixel (global salt-and-pepper), in [0, 1). Default 0.
    pub salt_pepper_p: T,
    pub seed: u64,
}

impl<T: Scalar> SequenceSpec<T> {
    pub fn new(shape: ShapeSpec<T>, schedule: Vec<T>, boundary_noise_p: T, seed: u64) -> Self {
        Self {
            shape,
            schedule,
            boundary_noise_p,
            salt_pepper_p: T::zero(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("boundary_noise_p", self.boundary_noise_p),
            ("salt_pepper_p", self.salt_pepper_p),
        ] {
            if !(p >= T::zero() && p < T::one()) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {p}")));
            }
        }
        for &angle in &self.schedule {
            self.shape.at_angle(angle).validate()?;
        }
        Ok(())
    }
}

/// One generated frame and its pre-noise ground-truth angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFrame<T> {
    pub mask: BinaryMask,
    pub truth_angle_deg: T,
}

/// Ramp from `start` to `end` (inclusive) in increments of `|step|`, counting
/// down when `end < start`.
pub fn linear_schedule<T: Scalar>(start: T, end: T, step: T) -> Vec<T> {
    let n = ((end - start) / step).abs().round().to_usize().unwrap_or(0);
    let step = if end < start { -step.abs() } else { step.abs() };
    (0..=n)
        .map(|k| start + step * T::from_usize(k).unwrap())
        .collect()
}

pub fn gen_sequence<T: Scalar>(spec: &SequenceSpec<T>) -> Result<Vec<SynthFrame<T>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = spec.boundary_noise_p.to_f64().unwrap_or(0.0);
    let q = spec.salt_pepper_p.to_f64().unwrap_or(0.0);
    spec.schedule
        .iter()
        .map(|&angle| {
            let mut mask = rasterize(&spec.shape.at_angle(angle))?;
            if p > 0.0 {
                apply_boundary_noise(&mut mask, p, &mut rng);
            }
            if q > 0.0 {
                apply_salt_pepper(&mut mask, q, &mut rng);
            }
            Ok(SynthFrame {
                mask,
                truth_angle_deg: angle,
            })
        })
        .collect()
}

/// Pixels on either side of the region edge: foreground with a background
/// 4-neighbour, or background with a foreground 4-neighbour.
pub fn boundary_band(mask: &BinaryMask) -> Vec<(usize, usize)> {
    let (w, h) = mask.dims();
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let here = mask.get(r, c);
            let (ri, ci) = (r as isize, c as isize);
            let neighbours = [(ri - 1, ci), (ri + 1, ci), (ri, ci - 1), (ri, ci + 1)];
            if neighbours
                .iter()
                .any(|&(nr, nc)| mask.get_or_bg(nr, nc) != here)
            {
                out.push((r, c));
            }
        }
    }
    out
}

/// Flips each boundary-band pixel with probability `p`, in row-major order.
pub fn apply_boundary_noise<R: Rng>(mask: &mut BinaryMask, p: f64, rng: &mut R) {
    for (r, c) in boundary_band(mask) {
        if rng.random::<f64>() < p {
            let v = mask.get(r, c);
            mask.set(r, c, !v);
        }
    }
}

pub fn apply_salt_pepper<R: Rng>(mask: &mut BinaryMask, p: f64, rng: &mut R) {
    let (w, h) = mask.dims();
    for r in 0..h {
        for c in 0..w {
            if rng.random::<f64>() < p {
                let v = mask.get(r, c);
                mask.set(r, c, !v);
            }
        }
    }
}

/// Smooth, deterministic no-contact background texture.
pub fn reference_frame(width: usize, height: usize) -> Result<GrayFrame> {
    let mut frame = GrayFrame::new(width, height, 0)?;
    for r in 0..height {
        for c in 0..width {
            let (x, y) = (c as f64, r as f64);
            let v = 96.0 + 18.0 * (x / 23.0).sin() * (y / 17.0).cos() + 0.08 * y;
            frame.set(r, c, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(frame)
}

/// `reference` brightened by `delta` inside the contact mask.
pub fn contact_frame(reference: &GrayFrame, contact: &BinaryMask, delta: u8) -> Result<GrayFrame> {
    if reference.dims() != contact.dims() {
        return Err(Error::DimensionMismatch {
            left: reference.dims(),
            right: contact.dims(),
        });
    }
    let mut frame = reference.clone();
    for (r, c) in contact.points() {
        let v = frame.get(r, c).saturating_add(delta);
        frame.set(r, c, v);
    }
    Ok(frame)
}

impl SequenceSpec<f64> {
    /// Manifest entries echoing the spec, the seed and the generator.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let schedule: Vec<String> = self.schedule.iter().map(|a| format!("{a:?}")).collect();
        let sh = &self.shape;
        [
            ("generator", GENERATOR.to_string()),
            ("seed", self.seed.to_string()),
            ("kind", sh.kind.name().to_string()),
            ("length", format!("{:?}", sh.length)),
            ("width", format!("{:?}", sh.width)),
            ("center_x", format!("{:?}", sh.center.0)),
            ("center_y", format!("{:?}", sh.center.1)),
            ("canvas_width", sh.canvas.0.to_string()),
            ("canvas_height", sh.canvas.1.to_string()),
            ("boundary_noise_p", format!("{:?}", self.boundary_noise_p)),
            ("salt_pepper_p", format!("{:?}", self.salt_pepper_p)),
            ("frames", self.schedule.len().to_string()),
            ("schedule", schedule.join(",")),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Writes a sequence to `dir`: numbered frames, `truth.csv` (slip relative to
/// the first frame) and `manifest.txt`. With `contact_delta` the numbered
/// frames are raw grey frames over `reference.pgm` and the ground-truth masks
/// go to `masks/`.
pub fn write_sequence_dir(
    dir: &Path,
    spec: &SequenceSpec<f64>,
    contact_delta: Option<u8>,
) -> Result<()> {
    let frames = gen_sequence(spec)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let reference = match contact_delta {
        Some(_) => {
            let (w, h) = spec.shape.canvas;
            let reference = reference_frame(w, h)?;
            io::write_pgm(&dir.join("reference.pgm"), &reference)?;
            let masks = dir.join("masks");
            fs::create_dir_all(&masks).map_err(|e| Error::io(&masks, e))?;
            Some(reference)
        }
        None => None,
    };
    let start = spec.schedule.first().copied().unwrap_or(0.0);
    let mut truth = Vec::with_capacity(frames.len());
    for (k, frame) in frames.iter().enumerate() {
        let name = io::frame_name(k as u64);
        match (&reference, contact_delta) {
            (Some(reference), Some(delta)) => {
                io::write_pgm(
                    &dir.join(&name),
                    &contact_frame(reference, &frame.mask, delta)?,
                )?;
                io::write_mask(&dir.join("masks").join(&name), &frame.mask)?;
            }
            _ => io::write_mask(&dir.join(&name), &frame.mask)?,
        }
        truth.push((k as u64, frame.truth_angle_deg - start));
    }
    io::write_truth(&dir.join("truth.csv"), &truth)?;
    let mut manifest = spec.manifest_entries();
    if let Some(delta) = contact_delta {
        manifest.push(("contact_delta".into(), delta.to_string()));
    }
    io::write_manifest(&dir.join("manifest.txt"), &manifest)
}
