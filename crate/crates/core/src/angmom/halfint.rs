use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exact half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        Self { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn to_real<T: Real>(self) -> T {
        T::lit(self.to_f64())
    }

    /// Number of projections `2j + 1` for a magnitude.
    pub fn multiplicity(self) -> usize {
        debug_assert!(self.twice >= 0);
        (self.twice + 1) as usize
    }

    /// `m` is a projection of magnitude `self`: in range and of matching parity.
    pub fn admits(self, m: HalfInt) -> bool {
        self.twice >= 0 && m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }

    pub fn check_magnitude(self, what: &str) -> Result<()> {
        if self.twice < 0 {
            return Err(Error::InvalidQuantumNumbers(format!(
                "{what} = {self} must be non-negative"
            )));
        }
        Ok(())
    }

    pub fn check_projection(self, m: HalfInt, what: &str) -> Result<()> {
        self.check_magnitude(what)?;
        if !self.admits(m) {
            return Err(Error::InvalidQuantumNumbers(format!(
                "projection {m} is not valid for {what} = {self}"
            )));
        }
        Ok(())
    }

    /// Projections `j, j-1, ..., -j` in descending order.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.twice;
        (0..=j.max(-1)).filter(move |_| j >= 0).map(move |k| HalfInt::from_twice(j - 2 * k))
    }

    /// Magnitudes `|a - b|, ..., a + b` allowed by the triangle rule.
    pub fn coupled_range(a: HalfInt, b: HalfInt) -> impl Iterator<Item = HalfInt> {
        let lo = (a.twice - b.twice).abs();
        let hi = a.twice + b.twice;
        (lo..=hi).step_by(2).map(HalfInt::from_twice)
    }

    pub fn abs(self) -> Self {
        Self::from_twice(self.twice.abs())
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl From<i32> for HalfInt {
    fn from(n: i32) -> Self {
        HalfInt::from_int(n)
    }
}

impl PartialOrd for HalfInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HalfInt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.twice.cmp(&other.twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"-1/2"`, `"2"` and decimal forms such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidQuantumNumbers(format!("cannot parse '{s}' as a half-integer"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "2" => Ok(HalfInt::from_twice(num)),
                "1" => Ok(HalfInt::from_int(num)),
                _ => Err(bad()),
            }
        } else if let Ok(n) = s.parse::<i32>() {
            Ok(HalfInt::from_int(n))
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            HalfInt::try_from(x)
        }
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if twice.is_finite() && twice.fract() == 0.0 && twice.abs() < f64::from(i32::MAX) {
            Ok(HalfInt::from_twice(twice as i32))
        } else {
            Err(Error::InvalidQuantumNumbers(format!("{x} is not a half-integer")))
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(de::Error::custom),
            Repr::Int(n) => i32::try_from(n)
                .map(HalfInt::from_int)
                .map_err(de::Error::custom),
            Repr::Float(x) => HalfInt::try_from(x).map_err(de::Error::custom),
        }
    }
}
