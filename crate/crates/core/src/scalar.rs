//! Numeric abstraction shared by the game model, the solver and the bound
//! evaluators.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar the analysis is generic over (`f32` or `f64`).
pub trait Scalar: Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Infallible for the supported float types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative closeness with an absolute floor, used for tie detection.
    fn approx_eq(self, other: Self, tol: Self) -> bool {
        let scale = Self::one().max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// A nonnegative real extended with `+∞`.
///
/// Used for free-flow deviation parameters; `+∞` is never encoded as a large
/// float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Extended<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// `self <= other` in the extended order.
    pub fn le(self, other: Self) -> bool {
        match (self, other) {
            (_, Extended::Infinite) => true,
            (Extended::Infinite, Extended::Finite(_)) => false,
            (Extended::Finite(a), Extended::Finite(b)) => a <= b,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.le(other) {
            other
        } else {
            self
        }
    }

    /// Maps `+∞` to `f64::INFINITY`; intended only for display and JSON.
    pub fn to_f64_lossy(self) -> f64 {
        match self {
            Extended::Finite(v) => v.as_f64(),
            Extended::Infinite => f64::INFINITY,
        }
    }
}

impl<T: Scalar> Display for Extended<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Scalar> std::str::FromStr for Extended<T> {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Extended::Infinite);
        }
        let value = if let Some((num, den)) = t.split_once('/') {
            let num: f64 = num.trim().parse().map_err(|_| parse_err(s))?;
            let den: f64 = den.trim().parse().map_err(|_| parse_err(s))?;
            num / den
        } else {
            t.parse::<f64>().map_err(|_| parse_err(s))?
        };
        if !value.is_finite() || value < 0.0 {
            return Err(parse_err(s));
        }
        Ok(Extended::Finite(T::lit(value)))
    }
}

fn parse_err(s: &str) -> crate::Error {
    crate::Error::Parse(format!("expected a nonnegative number, a fraction or 'inf', got {s:?}"))
}
