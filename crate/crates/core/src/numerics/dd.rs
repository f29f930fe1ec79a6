//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64`s with
//! `|lo| <= ulp(hi) / 2`, giving roughly 31 significant decimal digits.
//! The basic operations follow the classic error-free transformations
//! (Knuth two-sum, Dekker/FMA two-product). Elementary functions use
//! argument reduction followed by a Taylor series or a Newton correction
//! of the native result.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Unevaluated sum of two non-overlapping `f64` values.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[cfg(target_feature = "fma")]
#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[cfg(not(target_feature = "fma"))]
#[inline(always)]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[cfg(not(target_feature = "fma"))]
#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const FRAC_PI_2: Self = Self {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123_233_995_736_766e-17,
    };
    pub const LN_2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };
    /// 2^-104, the unit roundoff of the representation.
    pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

    #[inline(always)]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline(always)]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Builds a normalized value from two arbitrary doubles.
    #[inline(always)]
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    #[inline(always)]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline(always)]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline(always)]
    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    #[inline(always)]
    pub fn abs(self) -> Self {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    /// Exact product with a double.
    #[inline(always)]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, mut p2) = two_prod(self.hi, b);
        p2 += self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    #[inline(always)]
    pub fn add_f64(self, b: f64) -> Self {
        let (s1, mut s2) = two_sum(self.hi, b);
        s2 += self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }

    #[inline(always)]
    pub fn sqr(self) -> Self {
        let (p1, mut p2) = two_prod(self.hi, self.hi);
        p2 += 2.0 * self.hi * self.lo;
        p2 += self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    #[inline(always)]
    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let lo = self.lo.floor();
            let (hi, lo) = quick_two_sum(hi, lo);
            Self { hi, lo }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self::from_f64(f64::NAN);
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let corr = (self - Self::from_f64(ax).sqr()).hi * (x * 0.5);
        Self::from_sum(ax, corr)
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self::ONE + self;
        }
        let k = (self.hi / Self::LN_2.hi).round();
        let r = (self - Self::LN_2.mul_f64(k)).ldexp(-10);
        // exp(r) - 1 by Taylor series, |r| < 3.4e-4.
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = (term * r) / Self::from_f64(n);
            sum += term;
            if term.hi.abs() < 1e-34 * sum.hi.abs() || n > 20.0 {
                break;
            }
        }
        // (e^r - 1) -> (e^{2r} - 1) = s (s + 2), ten times.
        for _ in 0..10 {
            sum = sum.mul_f64(2.0) + sum.sqr();
        }
        (sum + Self::ONE).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(if self.hi == 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            });
        }
        if self == Self::ONE {
            return Self::ZERO;
        }
        // One Newton step on exp(y) = x doubles the native precision.
        let y = Self::from_f64(self.hi.ln());
        y + self * (-y).exp() - Self::ONE
    }

    /// Reduces `self` to `r` with |r| <= pi/4 and returns (r, quadrant).
    fn reduce_quadrant(self) -> (Self, i64) {
        let j = (self / Self::FRAC_PI_2).round();
        let r = self - Self::FRAC_PI_2 * j;
        let q = (j.hi as i64 + j.lo as i64).rem_euclid(4);
        (r, q)
    }

    fn sin_taylor(r: Self) -> Self {
        let r2 = r.sqr();
        let mut term = r;
        let mut sum = r;
        let mut k = 1.0;
        loop {
            term = -(term * r2) / Self::from_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            sum += term;
            if term.hi.abs() < 1e-34 || k > 60.0 {
                break;
            }
        }
        sum
    }

    fn cos_taylor(r: Self) -> Self {
        let r2 = r.sqr();
        let mut term = Self::ONE;
        let mut sum = Self::ONE;
        let mut k = 0.0;
        loop {
            term = -(term * r2) / Self::from_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            sum += term;
            if term.hi.abs() < 1e-34 || k > 60.0 {
                break;
            }
        }
        sum
    }

    pub fn sin(self) -> Self {
        let (r, q) = self.reduce_quadrant();
        match q {
            0 => Self::sin_taylor(r),
            1 => Self::cos_taylor(r),
            2 => -Self::sin_taylor(r),
            _ => -Self::cos_taylor(r),
        }
    }

    pub fn cos(self) -> Self {
        let (r, q) = self.reduce_quadrant();
        match q {
            0 => Self::cos_taylor(r),
            1 => -Self::sin_taylor(r),
            2 => -Self::cos_taylor(r),
            _ => Self::sin_taylor(r),
        }
    }

    pub fn sinh(self) -> Self {
        if self.hi.abs() < 0.05 {
            // odd Taylor series avoids cancellation near zero
            let x2 = self.sqr();
            let mut term = self;
            let mut sum = self;
            let mut k = 1.0;
            while term.hi.abs() > 1e-34 * sum.hi.abs() && k < 40.0 {
                term = term * x2 / Self::from_f64((k + 1.0) * (k + 2.0));
                k += 2.0;
                sum += term;
            }
            return sum;
        }
        let e = self.exp();
        (e - e.recip()).mul_f64(0.5)
    }

    pub fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()).mul_f64(0.5)
    }

    pub fn tanh(self) -> Self {
        if self.hi.abs() > 40.0 {
            return Self::from_f64(self.hi.signum());
        }
        self.sinh() / self.cosh()
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let mut base = self;
        let mut m = n.unsigned_abs();
        let mut acc = Self::ONE;
        while m > 0 {
            if m & 1 == 1 {
                acc *= base;
            }
            m >>= 1;
            if m > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// `self^y` for `self > 0`; zero maps to zero for positive `y`.
    pub fn powf(self, y: Self) -> Self {
        if self.hi == 0.0 {
            return if y.hi > 0.0 { Self::ZERO } else { Self::from_f64(f64::INFINITY) };
        }
        (y * self.ln()).exp()
    }

    /// Decimal representation with `digits` significant digits, in
    /// scientific notation.
    pub fn to_sci_string(self, digits: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        if self.hi == 0.0 {
            return format!("{:.*}e0", digits.saturating_sub(1), 0.0);
        }
        let digits = digits.clamp(1, 34);
        let neg = self.is_sign_negative();
        let x = self.abs();
        let mut e = x.hi.log10().floor() as i32;
        let ten = Self::from_f64(10.0);
        let mut r = x / ten.powi(e);
        if r.hi >= 10.0 {
            r = r / ten;
            e += 1;
        } else if r.hi < 1.0 {
            r *= ten;
            e -= 1;
        }
        // one extra digit for rounding
        let mut ds = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let mut d = r.hi.floor();
            let mut rem = r - Self::from_f64(d);
            if rem.is_sign_negative() {
                d -= 1.0;
                rem += Self::ONE;
            }
            if d > 9.0 {
                d = 9.0;
            }
            ds.push(d as u8);
            r = (r - Self::from_f64(d)) * ten;
        }
        let round_up = ds[digits] >= 5;
        ds.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut s = String::with_capacity(digits + 8);
        if neg {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if digits > 1 {
            s.push('.');
            for d in &ds[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push('e');
        s.push_str(&e.to_string());
        s
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string(f.precision().unwrap_or(32)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDoubleDoubleError(pub String);

impl fmt::Display for ParseDoubleDoubleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid double-double literal: {:?}", self.0)
    }
}

impl std::error::Error for ParseDoubleDoubleError {}

impl FromStr for DoubleDouble {
    type Err = ParseDoubleDoubleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDoubleDoubleError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        if body.eq_ignore_ascii_case("inf") || body.eq_ignore_ascii_case("nan") {
            let v: f64 = t.parse().map_err(|_| err())?;
            return Ok(Self::from_f64(v));
        }
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (body, 0),
        };
        if mant.is_empty() {
            return Err(err());
        }
        let ten = Self::from_f64(10.0);
        let mut acc = Self::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_dot = false;
        let mut any = false;
        for c in mant.chars() {
            match c {
                '0'..='9' => {
                    acc = acc * ten + Self::from_f64(f64::from(c as u8 - b'0'));
                    any = true;
                    if seen_dot {
                        frac_digits += 1;
                    }
                }
                '.' if !seen_dot => seen_dot = true,
                _ => return Err(err()),
            }
        }
        if !any {
            return Err(err());
        }
        let e = exp - frac_digits;
        let v = if e >= 0 { acc * ten.powi(e) } else { acc / ten.powi(-e) };
        Ok(if neg { -v } else { v })
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline(always)]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline(always)]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline(always)]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline(always)]
    fn mul(self, b: Self) -> Self {
        let (p1, mut p2) = two_prod(self.hi, b.hi);
        p2 += self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }.add_f64(q3)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for DoubleDouble {
            #[inline(always)]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(s: &str) -> DoubleDouble {
        s.parse().unwrap()
    }

    fn rel(a: DoubleDouble, b: DoubleDouble) -> f64 {
        ((a - b).to_f64() / b.to_f64()).abs()
    }

    #[test]
    fn third_times_three_is_one() {
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        let back = third * DoubleDouble::from_f64(3.0);
        assert!((back - DoubleDouble::ONE).to_f64().abs() < 1e-31);
        assert!(third.lo != 0.0);
    }

    #[test]
    fn non_overlapping_after_ops() {
        let a = dd("1.2345678901234567890123456789012");
        let b = dd("9.8765432109876543210987654321098e-3");
        for v in [a + b, a - b, a * b, a / b, a.sqrt(), a.exp(), b.ln()] {
            let ulp = v.hi.abs() * f64::EPSILON;
            assert!(v.lo.abs() <= 0.5 * ulp, "{v:?}");
        }
    }

    #[test]
    fn sqrt_two_digits() {
        let s = DoubleDouble::from_f64(2.0).sqrt();
        let expect = dd("1.4142135623730950488016887242096980786");
        assert!(rel(s, expect) < 1e-31);
    }

    #[test]
    fn exp_and_ln_reference_values() {
        let e = DoubleDouble::ONE.exp();
        assert!(rel(e, dd("2.7182818284590452353602874713526624977")) < 2e-31);
        let l = DoubleDouble::from_f64(10.0).ln();
        assert!(rel(l, dd("2.3025850929940456840179914546843642076")) < 2e-31);
        let m = DoubleDouble::from_f64(-7.5).exp();
        assert!(rel(m, dd("5.530843701478335831020000885303571978e-4")) < 1e-30);
        let round = (dd("0.123456789012345678901234567") .ln()).exp();
        assert!(rel(round, dd("0.123456789012345678901234567")) < 1e-30);
    }

    #[test]
    fn trig_reference_values() {
        let one = DoubleDouble::ONE;
        assert!(rel(one.sin(), dd("0.84147098480789650665250232163029899962")) < 1e-30);
        assert!(rel(one.cos(), dd("0.54030230586813971740093660744297660373")) < 1e-30);
        let x = DoubleDouble::from_f64(100.0);
        assert!(rel(x.sin(), dd("-0.50636564110975879365655761045978543206")) < 1e-29);
        let s = DoubleDouble::from_f64(0.3);
        let sum = s.sin().sqr() + s.cos().sqr();
        assert!((sum - one).to_f64().abs() < 1e-31);
    }

    #[test]
    fn hyperbolic_identities() {
        for x in [1e-6, 0.01, 0.3, 2.0, 15.0] {
            let v = DoubleDouble::from_f64(x);
            let id = v.cosh().sqr() - v.sinh().sqr();
            assert!((id - DoubleDouble::ONE).to_f64().abs() < 1e-30 * v.cosh().sqr().to_f64());
            let t = v.tanh();
            assert!(rel(t, v.sinh() / v.cosh()) < 1e-31);
        }
        let s = dd("1e-3").sinh();
        assert!(rel(s, dd("1.00000016666667500000019841270116843e-3")) < 1e-30);
    }

    #[test]
    fn powers() {
        let x = dd("1.5");
        assert_eq!(x.powi(3), dd("3.375"));
        let c = x.powf(DoubleDouble::ONE / DoubleDouble::from_f64(3.0));
        assert!(rel(c.powi(3), x) < 1e-30);
        assert_eq!(DoubleDouble::ZERO.powf(x), DoubleDouble::ZERO);
    }

    #[test]
    fn decimal_round_trip() {
        let v = DoubleDouble::PI;
        let s = v.to_sci_string(32);
        assert_eq!(&s[..33], "3.1415926535897932384626433832795");
        let back: DoubleDouble = s.parse().unwrap();
        assert!(rel(back, v) < 1e-31);
        assert_eq!(dd("-2.5e-3").to_sci_string(3), "-2.50e-3");
        assert_eq!(dd("9.9999").to_sci_string(3), "1.00e1");
        assert!("1.2.3".parse::<DoubleDouble>().is_err());
        assert!("".parse::<DoubleDouble>().is_err());
    }

    #[test]
    fn bit_identical_repeats() {
        let a = dd("0.7071067811865475244008443621048490");
        let r1 = (a.exp() * a.sin()).ln();
        let r2 = (a.exp() * a.sin()).ln();
        assert_eq!(r1.hi.to_bits(), r2.hi.to_bits());
        assert_eq!(r1.lo.to_bits(), r2.lo.to_bits());
    }
}
