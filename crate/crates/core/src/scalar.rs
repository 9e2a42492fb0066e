//! Scalar abstractions shared by the geometric code.

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating point type the estimators and trackers are written against: f32 or f64.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts a literal. Every literal used by this crate is representable in f32.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    #[inline]
    fn from_wide(v: i128) -> Self {
        Self::from_i128(v).expect("integer representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Number type able to hold a ratio of pixel counts. Implemented for the
/// floating point types and for exact rationals.
pub trait Measure: Num + Copy + PartialOrd + Debug {
    fn from_count(n: u64) -> Self;
}

impl Measure for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }
}

impl Measure for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl Measure for Ratio<u64> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(n)
    }
}

impl Measure for Ratio<i64> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i64::try_from(n).expect("count fits in i64"))
    }
}

/// Reduces an axis angle in degrees to the canonical range (-90, 90].
pub fn reduce_axis_deg<T: Scalar>(angle: T) -> T {
    let half = T::lit(180.0);
    let ninety = T::lit(90.0);
    let mut a = angle % half;
    if a > ninety {
        a = a - half;
    } else if a <= -ninety {
        a = a + half;
    }
    // normalises -0.0
    a + T::zero()
}

/// Sine and cosine of an angle in degrees, exact at multiples of 90.
pub fn sin_cos_deg<T: Scalar>(angle: T) -> (T, T) {
    let quarter = T::lit(90.0);
    let q = angle / quarter;
    if q == q.round() {
        let k = q.to_i64().unwrap_or(0).rem_euclid(4);
        let (s, c) = match k {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        };
        return (T::lit(s), T::lit(c));
    }
    angle.to_radians().sin_cos()
}
