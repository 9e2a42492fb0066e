//! Two-subiteration parallel thinning over the 8-neighbourhood.
//!
//! Neighbours of `p` are numbered clockwise from north, `P2` (N), `P3` (NE),
//! ..., `P9` (NW). With `B(p)` the number of foreground neighbours and `A(p)`
//! the number of 0 -> 1 transitions in the cyclic sequence `P2..P9, P2`, the
//! first sub-pass deletes `p` when
//!
//! ```text
//! 2 <= B(p) <= 6,  A(p) = 1,  P2*P4*P6 = 0,  P4*P6*P8 = 0
//! ```
//!
//! and the second sub-pass when
//!
//! ```text
//! 2 <= B(p) <= 6,  A(p) = 1,  P2*P4*P8 = 0,  P2*P6*P8 = 0.
//! ```
//!
//! All deletions of a sub-pass are decided against the image as it was before
//! that sub-pass.

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::orientation::RawMoments;

/// One-pixel-thick representation of a contact region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    source_width: usize,
    source_height: usize,
    /// `(row, col)` in row-major order.
    points: Vec<(usize, usize)>,
    source: Option<RawMoments>,
}

impl Skeleton {
    /// Wraps an arbitrary point set. No source-region statistics are attached.
    pub fn from_points(
        source_width: usize,
        source_height: usize,
        points: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut points: Vec<_> = points.into_iter().collect();
        points.sort_unstable();
        points.dedup();
        Self {
            source_width,
            source_height,
            points,
            source: None,
        }
    }

    pub fn source_width(&self) -> usize {
        self.source_width
    }

    pub fn source_height(&self) -> usize {
        self.source_height
    }

    pub fn points(&self) -> &[(usize, usize)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Moments of the region this skeleton was thinned from, if known.
    pub fn source_moments(&self) -> Option<&RawMoments> {
        self.source.as_ref()
    }

    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask::from_points(
            self.source_width,
            self.source_height,
            self.points.iter().copied(),
        )
        .expect("skeleton dimensions come from a valid mask")
    }
}

const N: u8 = 1 << 0; // P2
const E: u8 = 1 << 2; // P4
const S: u8 = 1 << 4; // P6
const W: u8 = 1 << 6; // P8

const fn has_all(code: u8, bits: u8) -> bool {
    code & bits == bits
}

const fn delete_table(second: bool) -> [bool; 256] {
    let mut table = [false; 256];
    let mut code = 0usize;
    while code < 256 {
        let c = code as u8;
        let b = c.count_ones();
        let mut a = 0;
        let mut i = 0;
        while i < 8 {
            let cur = (c >> i) & 1;
            let next = (c >> ((i + 1) % 8)) & 1;
            if cur == 0 && next == 1 {
                a += 1;
            }
            i += 1;
        }
        let directional = if second {
            !has_all(c, N | E | W) && !has_all(c, N | S | W)
        } else {
            !has_all(c, N | E | S) && !has_all(c, E | S | W)
        };
        table[code] = b >= 2 && b <= 6 && a == 1 && directional;
        code += 1;
    }
    table
}

static FIRST_PASS: [bool; 256] = delete_table(false);
static SECOND_PASS: [bool; 256] = delete_table(true);

/// Thins the mask to a skeleton. Empty and single-pixel masks pass through.
pub fn thin(mask: &BinaryMask) -> Result<Skeleton> {
    thin_counting_passes(mask).map(|(s, _)| s)
}

/// Like [`thin`] but also returns the number of full passes (both
/// sub-passes) executed, including the final pass that changed nothing.
pub fn thin_counting_passes(mask: &BinaryMask) -> Result<(Skeleton, usize)> {
    let (w, h) = mask.dims();
    let cap = 10 * w.max(h);
    let stride = w + 2;
    let mut grid = vec![0u8; stride * (h + 2)];
    let mut active = Vec::new();
    for (r, c) in mask.points() {
        let idx = (r + 1) * stride + c + 1;
        grid[idx] = 1;
        active.push(idx);
    }

    // P2..P9 as offsets into the padded grid
    let s = stride as isize;
    let offsets: [isize; 8] = [-s, -s + 1, 1, s + 1, s, s - 1, -1, -s - 1];
    let mut doomed = Vec::new();
    let mut passes = 0;

    loop {
        if passes == cap {
            return Err(Error::ThinningIterationCap { cap });
        }
        passes += 1;
        let mut changed = false;
        for table in [&FIRST_PASS, &SECOND_PASS] {
            doomed.clear();
            for &idx in &active {
                let mut code = 0u8;
                for (bit, off) in offsets.iter().enumerate() {
                    code |= grid[(idx as isize + off) as usize] << bit;
                }
                if table[code as usize] {
                    doomed.push(idx);
                }
            }
            if !doomed.is_empty() {
                changed = true;
                for &idx in &doomed {
                    grid[idx] = 0;
                }
                active.retain(|&idx| grid[idx] == 1);
            }
        }
        if !changed {
            break;
        }
    }

    let mut points: Vec<(usize, usize)> = active
        .iter()
        .map(|&idx| (idx / stride - 1, idx % stride - 1))
        .collect();
    points.sort_unstable();
    let skeleton = Skeleton {
        source_width: w,
        source_height: h,
        points,
        source: Some(RawMoments::from_mask(mask)),
    };
    Ok((skeleton, passes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{component_count, Connectivity};

    /// Direct transcription of the sub-pass rules on a nested-vector image.
    fn reference_thin(mask: &BinaryMask) -> BinaryMask {
        let (w, h) = mask.dims();
        let mut img: Vec<Vec<bool>> = (0..h)
            .map(|r| (0..w).map(|c| mask.get(r, c)).collect())
            .collect();
        let at = |img: &Vec<Vec<bool>>, r: isize, c: isize| -> u32 {
            if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
                0
            } else {
                u32::from(img[r as usize][c as usize])
            }
        };
        loop {
            let mut changed = false;
            for step in 0..2 {
                let before = img.clone();
                for r in 0..h as isize {
                    for c in 0..w as isize {
                        if at(&before, r, c) == 0 {
                            continue;
                        }
                        let p = [
                            at(&before, r - 1, c),
                            at(&before, r - 1, c + 1),
                            at(&before, r, c + 1),
                            at(&before, r + 1, c + 1),
                            at(&before, r + 1, c),
                            at(&before, r + 1, c - 1),
                            at(&before, r, c - 1),
                            at(&before, r - 1, c - 1),
                        ];
                        let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
                        let b: u32 = p.iter().sum();
                        let a = (0..8).filter(|&i| p[i] == 0 && p[(i + 1) % 8] == 1).count();
                        let cond = if step == 0 {
                            p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                        } else {
                            p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                        };
                        if (2..=6).contains(&b) && a == 1 && cond {
                            img[r as usize][c as usize] = false;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let pts = (0..h).flat_map(|r| (0..w).map(move |c| (r, c)));
        let pts: Vec<_> = pts.filter(|&(r, c)| img[r][c]).collect();
        BinaryMask::from_points(w, h, pts).unwrap()
    }

    fn filled(
        w: usize,
        h: usize,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> BinaryMask {
        let pts = rows.flat_map(|r| cols.clone().map(move |c| (r, c)));
        BinaryMask::from_points(w, h, pts).unwrap()
    }

    #[test]
    fn single_pixel_and_empty() {
        let single = BinaryMask::from_points(5, 5, [(2, 3)]).unwrap();
        assert_eq!(thin(&single).unwrap().points(), &[(2, 3)]);
        let empty = BinaryMask::new(5, 5).unwrap();
        assert!(thin(&empty).unwrap().is_empty());
    }

    #[test]
    fn horizontal_bar_thins_to_middle_row() {
        let bar = filled(13, 7, 2..5, 2..11);
        let oracle = reference_thin(&bar);
        let skel = thin(&bar).unwrap();
        assert_eq!(skel.to_mask(), oracle);
        assert!(!skel.is_empty());
        assert!(skel.points().iter().all(|&(r, _)| r == 3));
        let cols: Vec<_> = skel.points().iter().map(|&(_, c)| c).collect();
        assert!(cols.windows(2).all(|p| p[1] == p[0] + 1));
        // frozen from the reference implementation
        assert_eq!(cols, (3..9).collect::<Vec<_>>());
    }

    #[test]
    fn square_thins_to_one_component() {
        let sq = filled(13, 13, 2..11, 2..11);
        let skel = thin(&sq).unwrap();
        assert_eq!(skel.to_mask(), reference_thin(&sq));
        assert!(skel.len() < 81);
        assert_eq!(component_count(&skel.to_mask(), Connectivity::Eight), 1);
    }

    #[test]
    fn two_by_two_block_vanishes() {
        // Known property of the delete rules: an isolated 2x2 block is removed
        // entirely in the first sub-pass.
        let block = filled(6, 6, 2..4, 2..4);
        assert!(thin(&block).unwrap().is_empty());
        assert!(reference_thin(&block).is_empty());
    }

    #[test]
    fn matches_reference_on_random_blobs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let (w, h) = (rng.random_range(1..24), rng.random_range(1..24));
            let p = rng.random_range(0.3..0.9);
            let pixels = (0..w * h).map(|_| rng.random_bool(p)).collect();
            let m = BinaryMask::from_vec(w, h, pixels).unwrap();
            assert_eq!(thin(&m).unwrap().to_mask(), reference_thin(&m));
        }
    }

    #[test]
    fn delete_tables_spot_checks() {
        // isolated pixel
        assert!(!FIRST_PASS[0]);
        // end of a horizontal line (only W set): B = 1
        assert!(!FIRST_PASS[W as usize]);
        // south-east corner of a block: N, NW, W set
        let corner = (N | W | (1 << 7)) as usize;
        assert!(FIRST_PASS[corner]);
        // north-west corner of a block: E, SE, S set -> P4*P6*P8 = 0 and P2*P4*P6 = 0
        let nw = (E | S | (1 << 3)) as usize;
        assert!(FIRST_PASS[nw]);
        assert!(SECOND_PASS[nw]);
        // interior pixel
        assert!(!FIRST_PASS[255] && !SECOND_PASS[255]);
    }

    #[test]
    fn records_source_moments() {
        let bar = filled(13, 7, 2..5, 2..11);
        let skel = thin(&bar).unwrap();
        assert_eq!(skel.source_moments().unwrap().count, 27);
        assert!(Skeleton::from_points(4, 4, [(0, 0)])
            .source_moments()
            .is_none());
    }
}
