//! Extended real values `[-∞, +∞]`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Neg, Sub};

/// A value in `[-∞, +∞]`.
///
/// `Finite` always carries a finite `f64`; the infinities are separate tags so that
/// an empty family (value `-∞`) is never confused with a large negative float.
/// In sums `-∞` absorbs everything, including `+∞`, following the usual convention
/// for upper semicontinuous functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    MinusInfinity,
    Finite(f64),
    PlusInfinity,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `±inf` floats to the tags. NaN is a logic error.
    pub fn from_f64(x: f64) -> ExtReal {
        debug_assert!(!x.is_nan(), "NaN has no extended-real meaning");
        if x == f64::NEG_INFINITY {
            ExtReal::MinusInfinity
        } else if x == f64::INFINITY {
            ExtReal::PlusInfinity
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_minus_infinity(self) -> bool {
        matches!(self, ExtReal::MinusInfinity)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Clamp `-∞` to `floor` (grid representation); `+∞` maps to `f64::MAX`.
    pub fn clamp_below(self, floor: f64) -> (f64, bool) {
        match self {
            ExtReal::MinusInfinity => (floor, true),
            ExtReal::Finite(x) if x < floor => (floor, true),
            ExtReal::Finite(x) => (x, false),
            ExtReal::PlusInfinity => (f64::MAX, false),
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn rank(self) -> u8 {
        match self {
            ExtReal::MinusInfinity => 0,
            ExtReal::Finite(_) => 1,
            ExtReal::PlusInfinity => 2,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            _ => Some(self.rank().cmp(&other.rank())),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, rhs) {
            (MinusInfinity, _) | (_, MinusInfinity) => MinusInfinity,
            (PlusInfinity, _) | (_, PlusInfinity) => PlusInfinity,
            (Finite(a), Finite(b)) => ExtReal::from_f64(a + b),
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::MinusInfinity => ExtReal::PlusInfinity,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PlusInfinity => ExtReal::MinusInfinity,
        }
    }
}

impl Sub<f64> for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(-rhs)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::MinusInfinity => f.write_str("-inf"),
            ExtReal::Finite(x) => write!(f, "{x:.16e}"),
            ExtReal::PlusInfinity => f.write_str("+inf"),
        }
    }
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::ExtReal;
    use serde::de::{self, Visitor};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    // Finite values are plain JSON numbers; the infinities are the strings "-inf" / "+inf".
    impl Serialize for ExtReal {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            match self {
                ExtReal::MinusInfinity => s.serialize_str("-inf"),
                ExtReal::Finite(x) => s.serialize_f64(*x),
                ExtReal::PlusInfinity => s.serialize_str("+inf"),
            }
        }
    }

    struct ExtVisitor;

    impl<'de> Visitor<'de> for ExtVisitor {
        type Value = ExtReal;
        fn expecting(&self, f: &mut core::fmt::Formatter) -> core::fmt::Result {
            f.write_str("a finite number or one of \"-inf\", \"+inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
            Ok(ExtReal::from_f64(v))
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
            Ok(ExtReal::Finite(v as f64))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
            Ok(ExtReal::Finite(v as f64))
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
            match v {
                "-inf" => Ok(ExtReal::MinusInfinity),
                "+inf" | "inf" => Ok(ExtReal::PlusInfinity),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    impl<'de> Deserialize<'de> for ExtReal {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtReal, D::Error> {
            d.deserialize_any(ExtVisitor)
        }
    }
}
