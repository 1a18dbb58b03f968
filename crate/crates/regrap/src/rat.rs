//! Exact rational arithmetic for corpus statistics and score fractions.
//!
//! Averages are kept as exact rationals and only rounded when rendered.
//! Floats coming from manifests are interpreted through their shortest
//! decimal rendering, so a stored `5.2` means 26/5, not the nearest binary
//! double.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Interprets a float through its shortest decimal rendering.
    pub fn from_f64_decimal(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        Self::parse_decimal(&format!("{x}"))
    }

    /// Parses a plain or scientific decimal literal exactly.
    pub fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
            None => (s, 0),
        };
        let (sign, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match digits.find('.') {
            Some(i) => (&digits[..i], &digits[i + 1..]),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let joined = format!("{int_part}{frac_part}");
        let num: BigInt = joined.parse().ok()?;
        let scale = frac_part.len() as i64 - exp;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::new(num, ten.pow(scale as u32))
        } else {
            BigRational::from_integer(num * ten.pow((-scale) as u32))
        };
        Some(Rat(BigRational::from_integer(BigInt::from(sign)) * value))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let num: f64 = self.0.numer().to_string().parse().unwrap_or(f64::NAN);
        let den: f64 = self.0.denom().to_string().parse().unwrap_or(f64::NAN);
        num / den
    }

    /// Renders with a fixed number of fraction digits, rounding half away
    /// from zero.
    pub fn to_decimal_string(&self, places: u32) -> String {
        let ten = BigInt::from(10);
        let scale = ten.pow(places);
        let scaled = self.0.numer() * &scale;
        let den = self.0.denom().clone();
        let quotient = &scaled / &den;
        let remainder = &scaled % &den;
        let mut rounded = quotient;
        if &remainder.abs() * BigInt::from(2) >= den {
            rounded += if self.0.is_negative() {
                BigInt::from(-1)
            } else {
                BigInt::from(1)
            };
        }
        let negative = rounded.is_negative();
        let digits = rounded.abs().to_string();
        let digits = if digits.len() <= places as usize {
            format!("{:0>width$}", digits, width = places as usize + 1)
        } else {
            digits
        };
        let split = digits.len() - places as usize;
        let (int_part, frac_part) = digits.split_at(split);
        let sign = if negative { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(3))
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat(self.0 + rhs.0)
    }
}

impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        Rat(self.0 - rhs.0)
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        Rat(self.0 * rhs.0)
    }
}

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.0.is_zero(), "division by zero");
        Rat(self.0 / rhs.0)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_decimal_string(3))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let parsed = match &value {
            serde_json::Value::String(s) => Rat::parse_decimal(s),
            serde_json::Value::Number(n) => n.as_f64().and_then(Rat::from_f64_decimal),
            _ => None,
        };
        parsed.ok_or_else(|| serde::de::Error::custom(format!("not a decimal: {value}")))
    }
}
