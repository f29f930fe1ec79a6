use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::dd::DoubleDouble;

/// Arithmetic precision tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// IEEE binary64, about 16 significant digits.
    #[default]
    Native,
    /// Double-double, about 31 significant digits.
    #[serde(alias = "compensated")]
    Dd,
}

impl Precision {
    /// Decimal digits a bisection can meaningfully resolve in this tier.
    pub fn max_digits(self) -> u32 {
        match self {
            Precision::Native => 14,
            Precision::Dd => 30,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "native" | "f64" => Ok(Precision::Native),
            "dd" | "compensated" | "double-double" => Ok(Precision::Dd),
            other => Err(format!("unknown precision tier {other:?} (expected native or dd)")),
        }
    }
}

/// Real scalar that field arithmetic is generic over.
pub trait Real:
    Copy
    + Send
    + Sync
    + Debug
    + Display
    + PartialOrd
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    const TIER: Precision;
    /// Unit roundoff.
    const EPS: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    #[inline(always)]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    #[inline(always)]
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Multiplication by a double constant.
    fn scale(self, c: f64) -> Self;
    fn is_finite(self) -> bool;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, y: Self) -> Self;

    /// Parses a decimal literal at full precision of the tier.
    fn parse_decimal(s: &str) -> Option<Self>;
    /// Shortest representation that round-trips through `parse_decimal`.
    fn to_decimal(self) -> String;

    #[inline(always)]
    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    #[inline(always)]
    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const TIER: Precision = Precision::Native;
    const EPS: f64 = f64::EPSILON / 2.0;

    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline(always)]
    fn scale(self, c: f64) -> Self {
        self * c
    }
    #[inline(always)]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline(always)]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline(always)]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, y: Self) -> Self {
        f64::powf(self, y)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn to_decimal(self) -> String {
        format!("{self:?}")
    }
}

impl Real for DoubleDouble {
    const TIER: Precision = Precision::Dd;
    const EPS: f64 = DoubleDouble::EPSILON;

    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    #[inline(always)]
    fn scale(self, c: f64) -> Self {
        self.mul_f64(c)
    }
    #[inline(always)]
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
    #[inline(always)]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn sin(self) -> Self {
        DoubleDouble::sin(self)
    }
    fn cos(self) -> Self {
        DoubleDouble::cos(self)
    }
    fn sinh(self) -> Self {
        DoubleDouble::sinh(self)
    }
    fn cosh(self) -> Self {
        DoubleDouble::cosh(self)
    }
    fn tanh(self) -> Self {
        DoubleDouble::tanh(self)
    }
    #[inline(always)]
    fn powi(self, n: i32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn powf(self, y: Self) -> Self {
        DoubleDouble::powf(self, y)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn to_decimal(self) -> String {
        self.to_sci_string(33)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tier_agreement<T: Real>(x: f64) -> [f64; 8] {
        let v = T::from_f64(x);
        [
            v.sqrt().to_f64(),
            v.exp().to_f64(),
            v.ln().to_f64(),
            v.sin().to_f64(),
            v.cos().to_f64(),
            v.cosh().to_f64(),
            v.tanh().to_f64(),
            v.powf(T::from_f64(1.75)).to_f64(),
        ]
    }

    #[test]
    fn tiers_agree_to_fourteen_digits() {
        for x in [0.1, 0.75, 1.0, 2.5, 7.0] {
            let a = tier_agreement::<f64>(x);
            let b = tier_agreement::<DoubleDouble>(x);
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() <= 1e-14 * q.abs().max(1e-300), "x={x}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn decimal_round_trips() {
        let x = 1.0 / 3.0;
        assert_eq!(f64::parse_decimal(&x.to_decimal()), Some(x));
        let d = DoubleDouble::ONE / DoubleDouble::from_f64(7.0);
        let back = DoubleDouble::parse_decimal(&d.to_decimal()).unwrap();
        assert!((back - d).to_f64().abs() < 1e-32);
    }

    #[test]
    fn precision_parse() {
        assert_eq!("dd".parse::<Precision>(), Ok(Precision::Dd));
        assert_eq!("Native".parse::<Precision>(), Ok(Precision::Native));
        assert!("quad".parse::<Precision>().is_err());
    }
}
