//! Binary contact masks, raw tactile frames, connected components and
//! square-element morphology.
//!
//! Coordinates are `(row, col)`. Pixels outside the grid are background for
//! every neighbourhood operation.

use crate::error::{Error, Result};

/// 2-D boolean grid, row-major, `true` = contact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryMask {}x{}", self.width, self.height)?;
        if self.width * self.height <= 64 * 64 {
            for r in 0..self.height {
                let row: String = (0..self.width)
                    .map(|c| if self.get(r, c) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{row}")?;
            }
        }
        Ok(())
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(())
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![false; width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds a mask with the given `(row, col)` pixels set. Out-of-range
    /// points are ignored.
    pub fn from_points<I>(width: usize, height: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut mask = Self::new(width, height)?;
        for (r, c) in points {
            if r < height && c < width {
                mask.set(r, c, true);
            }
        }
        Ok(mask)
    }

    /// Parses rows of `#`/`1` (foreground) and `.`/`0` (background).
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut pixels = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(Error::InvalidDimensions { width, height });
            }
            pixels.extend(row.chars().map(|ch| matches!(ch, '#' | '1')));
        }
        Self::from_vec(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.pixels[row * self.width + col]
    }

    /// Like [`get`](Self::get) but signed and treating out-of-grid as background.
    #[inline]
    pub fn get_or_bg(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.pixels[row as usize * self.width + col as usize]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Inclusive `(row_min, row_max, col_min, col_max)` of the foreground.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let w = self.width;
        let first = self.pixels.iter().position(|&p| p)?;
        let last = self.pixels.iter().rposition(|&p| p)?;
        let (mut c0, mut c1) = (w, 0);
        for row in self.pixels[first - first % w..=last].chunks(w) {
            if let Some(c) = row.iter().position(|&p| p) {
                c0 = c0.min(c);
                c1 = c1.max(row.iter().rposition(|&p| p).expect("row has a pixel"));
            }
        }
        Some((first / w, last / w, c0, c1))
    }

    /// `height x width` window with top-left pixel `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> BinaryMask {
        assert!(
            row + height <= self.height && col + width <= self.width,
            "crop outside mask"
        );
        let pixels = (row..row + height)
            .flat_map(|r| self.pixels[r * self.width + col..][..width].iter().copied())
            .collect();
        BinaryMask {
            width,
            height,
            pixels,
        }
    }

    /// Foreground pixels in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| (i / w, i % w))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self {
            width: self.height,
            height: self.width,
            pixels: vec![false; self.pixels.len()],
        };
        for (r, c) in self.points() {
            out.set(c, r, true);
        }
        out
    }

    /// Shifts every foreground pixel by `(dr, dc)`; pixels leaving the grid are dropped.
    pub fn shifted(&self, dr: isize, dc: isize) -> Self {
        let mut out = Self {
            width: self.width,
            height: self.height,
            pixels: vec![false; self.pixels.len()],
        };
        for (r, c) in self.points() {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if nr >= 0 && nc >= 0 && (nr as usize) < self.height && (nc as usize) < self.width {
                out.set(nr as usize, nc as usize, true);
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dims() == other.dims()
            && self
                .pixels
                .iter()
                .zip(&other.pixels)
                .all(|(&a, &b)| !a || b)
    }

    /// Foreground pixels with at least one background 4-neighbour.
    pub fn inner_boundary(&self) -> Vec<(usize, usize)> {
        self.points()
            .filter(|&(r, c)| {
                let (r, c) = (r as isize, c as isize);
                !self.get_or_bg(r - 1, c)
                    || !self.get_or_bg(r + 1, c)
                    || !self.get_or_bg(r, c - 1)
                    || !self.get_or_bg(r, c + 1)
            })
            .collect()
    }

    pub(crate) fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }
}

/// 2-D 8-bit intensity grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, fill: u8) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![fill; width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.data[row * self.width + col] = v;
    }

    /// Foreground where intensity >= 128.
    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            pixels: self.data.iter().map(|&v| v >= 128).collect(),
        }
    }

    /// Foreground stored as 255, background as 0.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width,
            height: mask.height,
            data: mask
                .pixels
                .iter()
                .map(|&p| if p { 255 } else { 0 })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// A maximal connected set of foreground pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Pixels in row-major order; the first one is the top-left pixel.
    pub pixels: Vec<(usize, usize)>,
}

impl Component {
    pub fn size(&self) -> usize {
        self.pixels.len()
    }

    pub fn top_left(&self) -> (usize, usize) {
        self.pixels[0]
    }
}

/// Labels connected components, sorted by size descending then by top-left pixel.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut components = Vec::new();

    for start in 0..w * h {
        if !mask.pixels[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (r, c) = ((i / w) as isize, (i % w) as isize);
            pixels.push((r as usize, c as usize));
            for &(dr, dc) in connectivity.offsets() {
                let (nr, nc) = (r + dr, c + dc);
                if mask.get_or_bg(nr, nc) {
                    let j = nr as usize * w + nc as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        pixels.sort_unstable();
        components.push(Component { pixels });
    }

    // Components are discovered in raster order of their top-left pixel, so a
    // stable sort by size keeps the documented tie-break.
    components.sort_by_key(|c| std::cmp::Reverse(c.size()));
    components
}

pub fn component_count(mask: &BinaryMask, connectivity: Connectivity) -> usize {
    connected_components(mask, connectivity).len()
}

/// Mask holding only the largest component (empty input gives an empty mask).
pub fn largest_component(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let mut out = BinaryMask {
        width: mask.width,
        height: mask.height,
        pixels: vec![false; mask.pixels.len()],
    };
    if let Some(best) = connected_components(mask, connectivity).first() {
        for &(r, c) in &best.pixels {
            out.set(r, c, true);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
    Open,
    Close,
}

/// Morphology with a square structuring element of side `2 * radius + 1`.
pub fn morph(mask: &BinaryMask, op: MorphOp, radius: usize) -> Result<BinaryMask> {
    if radius == 0 {
        return Err(Error::ZeroRadius);
    }
    // Everything farther than `radius` from the foreground stays background
    // through either pass, so the filters only need the padded bounding box.
    let Some((r0, r1, c0, c1)) = mask.bounding_box() else {
        return Ok(mask.clone());
    };
    let pad = 2 * radius + 1;
    let (w, h) = mask.dims();
    let (r0, c0) = (r0.saturating_sub(pad), c0.saturating_sub(pad));
    let (r1, c1) = ((r1 + pad).min(h - 1), (c1 + pad).min(w - 1));
    let crop = mask.crop(r0, c0, c1 - c0 + 1, r1 - r0 + 1);
    let filtered = match op {
        MorphOp::Erode => erode(&crop, radius),
        MorphOp::Dilate => dilate(&crop, radius),
        MorphOp::Open => dilate(&erode(&crop, radius), radius),
        MorphOp::Close => erode(&dilate(&crop, radius), radius),
    };
    let mut out = BinaryMask {
        width: w,
        height: h,
        pixels: vec![false; w * h],
    };
    let cw = filtered.width;
    for (i, row) in filtered.pixels.chunks_exact(cw).enumerate() {
        let start = (r0 + i) * w + c0;
        out.pixels[start..start + cw].copy_from_slice(row);
    }
    Ok(out)
}

fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    square_filter(mask, radius, true)
}

fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    square_filter(mask, radius, false)
}

/// Separable square filter. With `all = true` a pixel survives when every
/// pixel of the window is set and the window lies inside the grid; with
/// `all = false` when any window pixel is set.
fn square_filter(mask: &BinaryMask, radius: usize, all: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let horiz = filter_rows(&mask.pixels, w, radius, all);
    BinaryMask {
        width: w,
        height: h,
        pixels: filter_columns(&horiz, w, h, radius, all),
    }
}

fn window_hit(count: usize, i: usize, len: usize, radius: usize, all: bool) -> bool {
    if all {
        // out-of-grid window pixels count as background
        i >= radius && i + radius < len && count == 2 * radius + 1
    } else {
        count > 0
    }
}

fn filter_rows(src: &[bool], w: usize, radius: usize, all: bool) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    for (row, out_row) in src.chunks_exact(w).zip(out.chunks_exact_mut(w)) {
        let mut count: usize = row[..radius.min(w)].iter().map(|&b| usize::from(b)).sum();
        for i in 0..w {
            if i + radius < w {
                count += usize::from(row[i + radius]);
            }
            if i > radius {
                count -= usize::from(row[i - radius - 1]);
            }
            out_row[i] = window_hit(count, i, w, radius, all);
        }
    }
    out
}

fn filter_columns(src: &[bool], w: usize, h: usize, radius: usize, all: bool) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    let mut counts = vec![0usize; w];
    for row in src.chunks_exact(w).take(radius.min(h)) {
        for (n, &b) in counts.iter_mut().zip(row) {
            *n += usize::from(b);
        }
    }
    for r in 0..h {
        if r + radius < h {
            for (n, &b) in counts.iter_mut().zip(&src[(r + radius) * w..][..w]) {
                *n += usize::from(b);
            }
        }
        if r > radius {
            for (n, &b) in counts.iter_mut().zip(&src[(r - radius - 1) * w..][..w]) {
                *n -= usize::from(b);
            }
        }
        for (o, &n) in out[r * w..][..w].iter_mut().zip(&counts) {
            *o = window_hit(n, r, h, radius, all);
        }
    }
    out
}
