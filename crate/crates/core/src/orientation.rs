//! Principal-orientation estimators for a contact region.
//!
//! All estimators share one convention: image frame with `x` = column
//! (rightward) and `y` = row (downward), angles in degrees in `(-90, 90]`,
//! positive from `+x` toward `+y`, and orientation defined modulo 180.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::scalar::{reduce_axis_deg, Scalar};
use crate::thinning::{thin, Skeleton};

/// Exact integer accumulators of a pixel set's zeroth, first and second
/// raw moments, with `x` = column and `y` = row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RawMoments {
    pub count: u64,
    pub sum_x: i128,
    pub sum_y: i128,
    pub sum_xx: i128,
    pub sum_yy: i128,
    pub sum_xy: i128,
}

impl RawMoments {
    pub fn from_points<I: IntoIterator<Item = (usize, usize)>>(points: I) -> Self {
        let mut m = Self::default();
        for (r, c) in points {
            let (x, y) = (c as i128, r as i128);
            m.count += 1;
            m.sum_x += x;
            m.sum_y += y;
            m.sum_xx += x * x;
            m.sum_yy += y * y;
            m.sum_xy += x * y;
        }
        m
    }

    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self::from_points(mask.points())
    }

    /// `count^2` times the central moments `(mu20, mu02, mu11)`, exact.
    /// These are invariant under integer translation of the pixel set.
    pub fn scaled_central(&self) -> (i128, i128, i128) {
        let n = self.count as i128;
        (
            n * self.sum_xx - self.sum_x * self.sum_x,
            n * self.sum_yy - self.sum_y * self.sum_y,
            n * self.sum_xy - self.sum_x * self.sum_y,
        )
    }

    pub fn to_moments<T: Scalar>(&self) -> MomentSet<T> {
        if self.count == 0 {
            return MomentSet::default();
        }
        let n = T::from_count(self.count);
        let (a, b, c) = self.scaled_central();
        MomentSet {
            m00: n,
            centroid_x: T::from_wide(self.sum_x) / n,
            centroid_y: T::from_wide(self.sum_y) / n,
            mu20: T::from_wide(a) / n,
            mu02: T::from_wide(b) / n,
            mu11: T::from_wide(c) / n,
        }
    }

    /// Principal axis angle and elongation of the pixel set.
    pub fn principal_axis<T: Scalar>(&self) -> (T, T) {
        let (a, b, c) = self.scaled_central();
        principal_axis(T::from_wide(a), T::from_wide(b), T::from_wide(c))
    }
}

/// Centroid and central second moments of a pixel set (pixel centres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet<T> {
    pub m00: T,
    pub centroid_x: T,
    pub centroid_y: T,
    pub mu20: T,
    pub mu02: T,
    pub mu11: T,
}

impl<T: Scalar> Default for MomentSet<T> {
    fn default() -> Self {
        let z = T::zero();
        Self {
            m00: z,
            centroid_x: z,
            centroid_y: z,
            mu20: z,
            mu02: z,
            mu11: z,
        }
    }
}

pub fn region_moments<T: Scalar>(mask: &BinaryMask) -> MomentSet<T> {
    RawMoments::from_mask(mask).to_moments()
}

/// Orientation of a contact region's principal axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate<T> {
    /// Degrees in (-90, 90]; 0 when `valid` is false.
    pub angle_deg: T,
    /// sqrt(major / minor eigenvalue), at least 1.
    pub elongation: T,
    pub valid: bool,
}

impl<T: Scalar> AngleEstimate<T> {
    pub fn invalid(elongation: T) -> Self {
        Self {
            angle_deg: T::zero(),
            elongation: elongation.max(T::one()),
            valid: false,
        }
    }

    /// A valid estimate at `angle_deg` (reduced into range).
    pub fn valid(angle_deg: T, elongation: T) -> Self {
        Self {
            angle_deg: reduce_axis_deg(angle_deg),
            elongation: elongation.max(T::one()),
            valid: true,
        }
    }
}

/// Validity gates shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationParams<T> {
    /// Elongation below this is treated as circular.
    pub circularity_threshold: T,
    /// Regions with fewer pixels are rejected.
    pub min_area: u64,
}

impl<T: Scalar> Default for OrientationParams<T> {
    fn default() -> Self {
        Self {
            circularity_threshold: T::lit(1.3),
            min_area: 20,
        }
    }
}

const EIGEN_FLOOR: f64 = 1e-9;

/// Angle (degrees) and elongation of the axis maximizing the second moment.
pub fn principal_axis<T: Scalar>(mu20: T, mu02: T, mu11: T) -> (T, T) {
    let two = T::lit(2.0);
    let angle = (two * mu11).atan2(mu20 - mu02) / two;
    let half_sum = (mu20 + mu02) / two;
    let half_diff = (mu20 - mu02) / two;
    let radius = half_diff.hypot(mu11);
    let major = half_sum + radius;
    let minor = (half_sum - radius).max(T::lit(EIGEN_FLOOR));
    let elongation = if major <= T::zero() {
        T::one()
    } else {
        (major / minor).sqrt().max(T::one())
    };
    (reduce_axis_deg(angle.to_degrees()), elongation)
}

/// Region-moments PCA orientation.
pub fn pca_orientation<T: Scalar>(
    mask: &BinaryMask,
    params: &OrientationParams<T>,
) -> AngleEstimate<T> {
    let raw = RawMoments::from_mask(mask);
    if raw.count == 0 {
        return AngleEstimate::invalid(T::one());
    }
    let (angle, elongation) = raw.principal_axis::<T>();
    if raw.count < params.min_area || elongation < params.circularity_threshold {
        return AngleEstimate::invalid(elongation);
    }
    AngleEstimate::valid(angle, elongation)
}

/// Total-least-squares line through the skeleton points.
///
/// When the skeleton carries its source region's moments, the region must
/// also pass the area and circularity gates: the skeleton of a disc is a
/// short, arbitrarily oriented stroke and must not count as an orientation.
pub fn skeleton_orientation<T: Scalar>(
    skeleton: &Skeleton,
    params: &OrientationParams<T>,
) -> AngleEstimate<T> {
    if skeleton.len() < 2 {
        return AngleEstimate::invalid(T::one());
    }
    let raw = RawMoments::from_points(skeleton.points().iter().copied());
    let (angle, elongation) = raw.principal_axis::<T>();
    if elongation < params.circularity_threshold {
        return AngleEstimate::invalid(elongation);
    }
    if let Some(source) = skeleton.source_moments() {
        let (_, region_elongation) = source.principal_axis::<T>();
        if source.count < params.min_area || region_elongation < params.circularity_threshold {
            return AngleEstimate::invalid(elongation);
        }
    }
    AngleEstimate::valid(angle, elongation)
}

/// Direct least-squares ellipse fit to the region's boundary pixels.
pub fn ellipse_orientation<T: Scalar>(
    mask: &BinaryMask,
    params: &OrientationParams<T>,
) -> AngleEstimate<T> {
    let area = mask.count() as u64;
    let boundary: Vec<(T, T)> = mask
        .inner_boundary()
        .into_iter()
        .map(|(r, c)| (T::from_usize(c).unwrap(), T::from_usize(r).unwrap()))
        .collect();
    let Some(fit) = fit_ellipse(&boundary) else {
        return AngleEstimate::invalid(T::one());
    };
    if area < params.min_area || fit.elongation < params.circularity_threshold {
        return AngleEstimate::invalid(fit.elongation);
    }
    AngleEstimate::valid(fit.angle_deg, fit.elongation)
}

/// Orientation of a fitted ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseFit<T> {
    /// General conic `A x^2 + B xy + C y^2 + D x + E y + F = 0` in
    /// normalized coordinates (centred on the point mean, isotropically scaled).
    pub conic: [T; 6],
    /// Major-axis angle in degrees, (-90, 90].
    pub angle_deg: T,
    /// Semi-major over semi-minor axis.
    pub elongation: T,
}

type Mat3<T> = [[T; 3]; 3];

/// Fits a conic constrained to be an ellipse (`4AC - B^2 > 0`) by direct
/// least squares over `(x, y)` points. Returns `None` for fewer than six
/// points, degenerate scatter, or a fit that is not a real ellipse.
pub fn fit_ellipse<T: Scalar>(points: &[(T, T)]) -> Option<EllipseFit<T>> {
    if points.len() < 6 {
        return None;
    }
    let n = T::from_usize(points.len())?;
    let zero = T::zero();
    let (sx, sy) = points
        .iter()
        .fold((zero, zero), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let mean_dist = points
        .iter()
        .fold(zero, |acc, &(x, y)| acc + (x - mx).hypot(y - my))
        / n;
    if mean_dist <= T::epsilon() {
        return None;
    }
    let scale = T::SQRT_2() / mean_dist;

    // Scatter blocks for quadratic terms d1 = [x^2, xy, y^2] and linear terms d2 = [x, y, 1].
    let mut s1 = [[zero; 3]; 3];
    let mut s2 = [[zero; 3]; 3];
    let mut s3 = [[zero; 3]; 3];
    for &(px, py) in points {
        let x = (px - mx) * scale;
        let y = (py - my) * scale;
        let d1 = [x * x, x * y, y * y];
        let d2 = [x, y, T::one()];
        for i in 0..3 {
            for j in 0..3 {
                s1[i][j] = s1[i][j] + d1[i] * d1[j];
                s2[i][j] = s2[i][j] + d1[i] * d2[j];
                s3[i][j] = s3[i][j] + d2[i] * d2[j];
            }
        }
    }

    // Eliminate the linear terms: a2 = -S3^-1 S2^T a1.
    let s3_inv = invert3(&s3)?;
    let elim = scale3(&mul3(&s3_inv, &transpose3(&s2)), -T::one());
    let reduced = add3(&s1, &mul3(&s2, &elim));
    let reduced = symmetrize3(&reduced);

    // Maximize a^T C a / a^T M a with C the ellipse constraint matrix. With
    // M = L L^T this is the largest eigenvalue of L^-1 C L^-T.
    let trace = reduced[0][0] + reduced[1][1] + reduced[2][2];
    if trace <= zero {
        return None;
    }
    let ridge = trace * T::epsilon() * T::lit(64.0);
    let mut m = reduced;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = row[i] + ridge;
    }
    let l = cholesky3(&m)?;
    let l_inv = invert_lower3(&l)?;
    let two = T::lit(2.0);
    let constraint = [
        [zero, zero, two],
        [zero, -T::one(), zero],
        [two, zero, zero],
    ];
    let sym = symmetrize3(&mul3(&mul3(&l_inv, &constraint), &transpose3(&l_inv)));
    let (values, vectors) = symmetric_eigen3(sym);
    let best = (0..3).max_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap())?;
    if values[best] <= zero {
        return None;
    }
    let b = [vectors[0][best], vectors[1][best], vectors[2][best]];
    // a1 = L^-T b
    let lt_inv = transpose3(&l_inv);
    let a1 = mat_vec3(&lt_inv, &b);
    let a2 = mat_vec3(&elim, &a1);
    let mut conic = [a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]];
    if conic[0] + conic[2] < zero {
        conic.iter_mut().for_each(|v| *v = -*v);
    }
    let [a, bxy, c, d, e, f] = conic;
    let four = T::lit(4.0);
    let det = four * a * c - bxy * bxy;
    if det <= zero || !det.is_finite() {
        return None;
    }
    // Centre and conic value there; a real ellipse needs a negative value.
    let cx = (bxy * e - two * c * d) / det;
    let cy = (bxy * d - two * a * e) / det;
    let at_centre = a * cx * cx + bxy * cx * cy + c * cy * cy + d * cx + e * cy + f;
    if at_centre >= zero {
        return None;
    }
    // Major axis follows the smaller eigenvalue of the quadratic form.
    let angle = (-bxy).atan2(c - a) / two;
    let half_sum = (a + c) / two;
    let radius = ((a - c) / two).hypot(bxy / two);
    let large = half_sum + radius;
    let small = half_sum - radius;
    if small <= zero {
        return None;
    }
    Some(EllipseFit {
        conic,
        angle_deg: reduce_axis_deg(angle.to_degrees()),
        elongation: (large / small).sqrt(),
    })
}

fn mul3<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]);
        }
    }
    out
}

fn add3<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = out[i][j] + b[i][j];
        }
    }
    out
}

fn scale3<T: Scalar>(a: &Mat3<T>, s: T) -> Mat3<T> {
    a.map(|row| row.map(|v| v * s))
}

fn transpose3<T: Scalar>(a: &Mat3<T>) -> Mat3<T> {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn symmetrize3<T: Scalar>(a: &Mat3<T>) -> Mat3<T> {
    let half = T::lit(0.5);
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (a[i][j] + a[j][i]) * half;
        }
    }
    out
}

fn mat_vec3<T: Scalar>(a: &Mat3<T>, v: &[T; 3]) -> [T; 3] {
    [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2])
}

fn invert3<T: Scalar>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    let norm = m
        .iter()
        .flatten()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if !det.is_finite() || det.abs() <= norm * norm * norm * T::epsilon() * T::lit(16.0) {
        return None;
    }
    Some(scale3(&adj, T::one() / det))
}

#[allow(clippy::needless_range_loop)]
fn cholesky3<T: Scalar>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let mut l = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut sum = m[i][j];
            for k in 0..j {
                sum = sum - l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= T::zero() || !sum.is_finite() {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

#[allow(clippy::needless_range_loop)]
fn invert_lower3<T: Scalar>(l: &Mat3<T>) -> Option<Mat3<T>> {
    let mut inv = [[T::zero(); 3]; 3];
    for col in 0..3 {
        for row in col..3 {
            let mut rhs = if row == col { T::one() } else { T::zero() };
            for k in col..row {
                rhs = rhs - l[row][k] * inv[k][col];
            }
            if l[row][row] == T::zero() {
                return None;
            }
            inv[row][col] = rhs / l[row][row];
        }
    }
    Some(inv)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix. Returns the
/// eigenvalues and the eigenvectors as matrix columns.
#[allow(clippy::needless_range_loop)]
fn symmetric_eigen3<T: Scalar>(mut a: Mat3<T>) -> ([T; 3], Mat3<T>) {
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _ in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let diag = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
        if off <= diag * T::epsilon() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Orientation estimator selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    Skeleton,
    Pca,
    Ellipse,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Skeleton, Estimator::Pca, Estimator::Ellipse];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Skeleton => "skeleton",
            Estimator::Pca => "pca",
            Estimator::Ellipse => "ellipse",
        }
    }

    /// Runs the estimator on an already isolated region.
    pub fn estimate<T: Scalar>(
        self,
        region: &BinaryMask,
        params: &OrientationParams<T>,
    ) -> Result<AngleEstimate<T>> {
        Ok(match self {
            Estimator::Skeleton => skeleton_orientation(&thin(region)?, params),
            Estimator::Pca => pca_orientation(region, params),
            Estimator::Ellipse => ellipse_orientation(region, params),
        })
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skeleton" => Ok(Estimator::Skeleton),
            "pca" => Ok(Estimator::Pca),
            "ellipse" => Ok(Estimator::Ellipse),
            other => Err(Error::Config(format!(
                "unknown estimator '{other}' (expected skeleton, pca or ellipse)"
            ))),
        }
    }
}
