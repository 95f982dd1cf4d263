use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact element `p/q mod 1` of the circle group, stored reduced with `0 <= p < q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusValue {
    num: i64,
    den: i64,
}

impl TorusValue {
    pub const ZERO: TorusValue = TorusValue { num: 0, den: 1 };

    /// Builds `p/q mod 1`. Panics if `q == 0`.
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q != 0, "torus value with zero denominator");
        Self::from_i128(p as i128, q as i128)
    }

    fn from_i128(p: i128, q: i128) -> Self {
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        let p = p.rem_euclid(q);
        let g = p.gcd(&q);
        let (p, q) = if g == 0 { (0, 1) } else { (p / g, q / g) };
        TorusValue {
            num: p as i64,
            den: q as i64,
        }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Self::from_i128(self.num as i128 * n as i128, self.den as i128)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `e(x) = exp(2 pi i x)`, exact for denominators 1, 2 and 4.
    pub fn expi(&self) -> Complex64 {
        match (self.num, self.den) {
            (0, 1) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            _ => {
                let theta = std::f64::consts::TAU * self.to_f64();
                Complex64::new(theta.cos(), theta.sin())
            }
        }
    }

    /// Additive order in the circle group, i.e. the reduced denominator.
    pub fn order(&self) -> i64 {
        self.den
    }
}

impl Default for TorusValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Add for TorusValue {
    type Output = TorusValue;
    fn add(self, rhs: TorusValue) -> TorusValue {
        if self.den == rhs.den {
            return Self::from_i128(self.num as i128 + rhs.num as i128, self.den as i128);
        }
        let l = (self.den as i128).lcm(&(rhs.den as i128));
        let a = self.num as i128 * (l / self.den as i128);
        let b = rhs.num as i128 * (l / rhs.den as i128);
        Self::from_i128(a + b, l)
    }
}

impl AddAssign for TorusValue {
    fn add_assign(&mut self, rhs: TorusValue) {
        *self = *self + rhs;
    }
}

impl Neg for TorusValue {
    type Output = TorusValue;
    fn neg(self) -> TorusValue {
        Self::from_i128(-(self.num as i128), self.den as i128)
    }
}

impl Sub for TorusValue {
    type Output = TorusValue;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: TorusValue) -> TorusValue {
        self + (-rhs)
    }
}

impl SubAssign for TorusValue {
    fn sub_assign(&mut self, rhs: TorusValue) {
        *self = *self - rhs;
    }
}

impl PartialOrd for TorusValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by the representative in `[0, 1)`.
impl Ord for TorusValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl fmt::Display for TorusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for TorusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for TorusValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid torus value {s:?}, expected \"p/q\""));
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let p: i64 = p.parse().map_err(|_| bad())?;
        let q: i64 = q.parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        Ok(TorusValue::new(p, q))
    }
}

impl Serialize for TorusValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TorusValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_wraps() {
        assert_eq!(TorusValue::new(6, 8), TorusValue::new(3, 4));
        assert_eq!(TorusValue::new(-1, 4), TorusValue::new(3, 4));
        assert_eq!(TorusValue::new(5, 5), TorusValue::ZERO);
        assert_eq!(TorusValue::new(3, -4), TorusValue::new(1, 4));
        assert_eq!(TorusValue::ZERO.to_string(), "0/1");
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = TorusValue::new(1, 3);
        let b = TorusValue::new(1, 6);
        assert_eq!(a + b, TorusValue::new(1, 2));
        assert_eq!(a - b, TorusValue::new(1, 6));
        assert_eq!(a.mul_int(3), TorusValue::ZERO);
        assert_eq!(-TorusValue::new(1, 2), TorusValue::new(1, 2));
    }

    #[test]
    fn parse_roundtrip() {
        let v: TorusValue = "81/256".parse().unwrap();
        assert_eq!(v.to_string(), "81/256");
        assert!("1/0".parse::<TorusValue>().is_err());
        assert!("x".parse::<TorusValue>().is_err());
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "\"81/256\"");
        let back: TorusValue = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn expi_exact_quarters() {
        assert_eq!(TorusValue::new(1, 4).expi(), Complex64::new(0.0, 1.0));
        assert_eq!(TorusValue::new(1, 2).expi(), Complex64::new(-1.0, 0.0));
        let z = TorusValue::new(1, 3).expi();
        assert!((z.norm() - 1.0).abs() < 1e-15);
    }
}
