use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::algebra::ExactScalar;

/// Working precision in bits for a requested number of decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

/// Binary floating point number `mant · 2^exp` with a mantissa of at most `prec` bits.
#[derive(Clone)]
pub struct HpFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl HpFloat {
    pub fn zero(prec: u32) -> Self {
        HpFloat { mant: BigInt::zero(), exp: 0, prec }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::normalize(BigInt::from(n), 0, prec)
    }

    pub fn from_exact(x: &ExactScalar, prec: u32) -> Self {
        Self::ratio(x.numer(), x.denom(), prec)
    }

    fn ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        if num.is_zero() {
            return Self::zero(prec);
        }
        let shift = prec as i64 + den.bits() as i64 - num.bits() as i64 + 2;
        let shift = shift.max(0);
        let q = (num << shift as usize) / den;
        Self::normalize(q, -shift, prec)
    }

    /// The exact binary value `mant · 2^exp`.
    pub fn to_exact(&self) -> ExactScalar {
        if self.exp >= 0 {
            ExactScalar::from(&self.mant << self.exp as usize)
        } else {
            ExactScalar::new(self.mant.clone(), BigInt::from(1) << (-self.exp) as usize).expect("nonzero")
        }
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        if x == 0.0 || !x.is_finite() {
            return Self::zero(prec);
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        Self::normalize(BigInt::from(m) * sign, ex, prec)
    }

    fn normalize(mant: BigInt, exp: i64, prec: u32) -> Self {
        if mant.is_zero() {
            return Self::zero(prec);
        }
        let bits = mant.bits();
        if bits <= prec as u64 {
            return HpFloat { mant, exp, prec };
        }
        let shift = bits - prec as u64;
        let neg = mant.is_negative();
        let mag = mant.magnitude().clone();
        let half = num_bigint::BigUint::from(1u8) << (shift - 1) as usize;
        let mut m = (mag + half) >> shift as usize;
        let mut e = exp + shift as i64;
        if m.bits() > prec as u64 {
            m >>= 1usize;
            e += 1;
        }
        let m = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, m);
        HpFloat { mant: m, exp: e, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::normalize(self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Binary order of magnitude: `|x| ∈ [2^(m-1), 2^m)`.
    fn magnitude_bits(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    pub fn abs(&self) -> Self {
        HpFloat { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    fn add_impl(&self, other: &HpFloat, negate: bool) -> HpFloat {
        let prec = self.prec.max(other.prec);
        let b_mant = if negate { -&other.mant } else { other.mant.clone() };
        if other.is_zero() {
            return self.with_prec(prec);
        }
        if self.is_zero() {
            return Self::normalize(b_mant, other.exp, prec);
        }
        let gap = prec as i64 + 4;
        if self.magnitude_bits() - other.magnitude_bits() > gap {
            return self.with_prec(prec);
        }
        if other.magnitude_bits() - self.magnitude_bits() > gap {
            return Self::normalize(b_mant, other.exp, prec);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = b_mant << (other.exp - e) as usize;
        Self::normalize(a + b, e, prec)
    }

    pub fn mul_ref(&self, other: &HpFloat) -> HpFloat {
        let prec = self.prec.max(other.prec);
        Self::normalize(&self.mant * &other.mant, self.exp + other.exp, prec)
    }

    pub fn div_ref(&self, other: &HpFloat) -> HpFloat {
        assert!(!other.is_zero(), "division by zero");
        let prec = self.prec.max(other.prec);
        if self.is_zero() {
            return Self::zero(prec);
        }
        let shift = (prec as i64 + other.mant.bits() as i64 - self.mant.bits() as i64 + 2).max(0);
        let q = (&self.mant << shift as usize) / &other.mant;
        Self::normalize(q, self.exp - other.exp - shift, prec)
    }

    pub fn sqrt(&self) -> HpFloat {
        assert!(!self.is_negative(), "square root of a negative number");
        if self.is_zero() {
            return self.clone();
        }
        let want = 2 * self.prec as i64 + 2;
        let mut shift = (want - self.mant.bits() as i64).max(0);
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let m = (&self.mant << shift as usize).sqrt();
        Self::normalize(m, (self.exp - shift) / 2, self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let drop = (bits - 60).max(0);
        let top = (&self.mant >> drop as usize).to_f64().unwrap_or(0.0);
        let e = self.exp + drop;
        let clamped = e.clamp(-2000, 2000) as i32;
        top * 2f64.powi(clamped / 2) * 2f64.powi(clamped - clamped / 2)
    }

    /// `log10 |x|`, `-inf` for zero; finite even where `to_f64` under- or overflows.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mant.bits() as i64;
        let drop = (bits - 60).max(0);
        let top = (&self.mant >> drop as usize).to_f64().unwrap_or(1.0).abs();
        top.log10() + (self.exp + drop) as f64 * std::f64::consts::LOG10_2
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let l = self.log10_abs().floor() as i64;
        // scale to an integer with `digits` digits
        let k = digits as i64 - 1 - l;
        let ten = BigInt::from(10);
        let (num, den) = if k >= 0 {
            (&self.mant * num_traits::pow(ten.clone(), k as usize), BigInt::from(1))
        } else {
            (self.mant.clone(), num_traits::pow(ten.clone(), (-k) as usize))
        };
        let (num, den) = if self.exp >= 0 {
            (num << self.exp as usize, den)
        } else {
            (num, den << (-self.exp) as usize)
        };
        let neg = num.is_negative();
        let num = num.abs();
        let q = (&num + (&den >> 1usize)) / &den;
        let mut s = q.to_string();
        let mut exp10 = l;
        if s.len() > digits {
            s.truncate(digits);
            exp10 += 1;
        }
        let (head, tail) = s.split_at(1);
        let sign = if neg { "-" } else { "" };
        if tail.is_empty() {
            format!("{sign}{head}e{exp10}")
        } else {
            format!("{sign}{head}.{tail}e{exp10}")
        }
    }
}

impl PartialEq for HpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl HpFloat {
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let d = self.add_impl(other, true);
        if d.is_zero() {
            Ordering::Equal
        } else if d.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for HpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl fmt::Debug for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(20))
    }
}

impl fmt::Display for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec.saturating_sub(16)) as f64 / std::f64::consts::LOG2_10) as usize;
        write!(f, "{}", self.to_sci(digits.max(1)))
    }
}

impl Add<&HpFloat> for &HpFloat {
    type Output = HpFloat;
    fn add(self, rhs: &HpFloat) -> HpFloat {
        self.add_impl(rhs, false)
    }
}

impl Sub<&HpFloat> for &HpFloat {
    type Output = HpFloat;
    fn sub(self, rhs: &HpFloat) -> HpFloat {
        self.add_impl(rhs, true)
    }
}

impl Mul<&HpFloat> for &HpFloat {
    type Output = HpFloat;
    fn mul(self, rhs: &HpFloat) -> HpFloat {
        self.mul_ref(rhs)
    }
}

impl Div<&HpFloat> for &HpFloat {
    type Output = HpFloat;
    fn div(self, rhs: &HpFloat) -> HpFloat {
        self.div_ref(rhs)
    }
}

impl Neg for &HpFloat {
    type Output = HpFloat;
    fn neg(self) -> HpFloat {
        HpFloat { mant: -&self.mant, exp: self.exp, prec: self.prec }
    }
}

/// Complex number with [`HpFloat`] parts.
#[derive(Clone, PartialEq)]
pub struct HpComplex {
    pub re: HpFloat,
    pub im: HpFloat,
}

impl HpComplex {
    pub fn new(re: HpFloat, im: HpFloat) -> Self {
        HpComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        HpComplex { re: HpFloat::zero(prec), im: HpFloat::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self::real(HpFloat::from_i64(1, prec))
    }

    pub fn real(re: HpFloat) -> Self {
        let prec = re.prec();
        HpComplex { re, im: HpFloat::zero(prec) }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::real(HpFloat::from_i64(n, prec))
    }

    pub fn from_exact(x: &ExactScalar, prec: u32) -> Self {
        Self::real(HpFloat::from_exact(x, prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        HpComplex { re: HpFloat::from_f64(re, prec), im: HpFloat::from_f64(im, prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        HpComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> HpFloat {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs(&self) -> HpFloat {
        self.norm_sqr().sqrt()
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.norm_sqr().log10_abs() / 2.0
    }

    pub fn scale_real(&self, r: &HpFloat) -> Self {
        HpComplex { re: &self.re * r, im: &self.im * r }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        HpComplex { re: &self.re / &n, im: -&(&self.im / &n) }
    }

    /// Principal square root, branch cut along the negative real axis.
    pub fn sqrt(&self) -> Self {
        let prec = self.prec();
        if self.is_zero() {
            return Self::zero(prec);
        }
        let two = HpFloat::from_i64(2, prec);
        let r = self.abs();
        let re = (&(&r + &self.re) / &two).abs().sqrt();
        let im_mag = (&(&r - &self.re) / &two).abs().sqrt();
        let im = if self.im.is_negative() { -&im_mag } else { im_mag };
        HpComplex { re, im }
    }

    /// The cube root nearest to `guess` (Newton iteration from a double-precision start).
    pub fn cbrt_near(&self, guess: (f64, f64)) -> Self {
        let prec = self.prec();
        if self.is_zero() {
            return Self::zero(prec);
        }
        let mut z = HpComplex::from_f64(guess.0, guess.1, prec);
        let three = HpComplex::from_i64(3, prec);
        let mut iters = 8;
        let mut bits = 48u32;
        while bits < prec {
            bits *= 2;
            iters += 1;
        }
        for _ in 0..iters {
            let z2 = &z * &z;
            let step = &(&(&z2 * &z) - self) / &(&three * &z2);
            z = &z - &step;
        }
        z
    }

    pub fn pow_u(&self, e: u32) -> Self {
        let mut r = Self::one(self.prec());
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    pub fn to_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn to_strings(&self, digits: usize) -> (String, String) {
        (self.re.to_sci(digits), self.im.to_sci(digits))
    }
}

impl fmt::Debug for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl Add<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn add(self, rhs: &HpComplex) -> HpComplex {
        HpComplex { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn sub(self, rhs: &HpComplex) -> HpComplex {
        HpComplex { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn mul(self, rhs: &HpComplex) -> HpComplex {
        if self.im.is_zero() && rhs.im.is_zero() {
            let prec = self.prec().max(rhs.prec());
            return HpComplex { re: &self.re * &rhs.re, im: HpFloat::zero(prec) };
        }
        HpComplex {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl Div<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn div(self, rhs: &HpComplex) -> HpComplex {
        if rhs.im.is_zero() {
            return HpComplex { re: &self.re / &rhs.re, im: &self.im / &rhs.re };
        }
        let n = rhs.norm_sqr();
        let num = self * &rhs.conj();
        HpComplex { re: &num.re / &n, im: &num.im / &n }
    }
}

impl Neg for &HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        HpComplex { re: -&self.re, im: -&self.im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two_to_many_digits() {
        let prec = bits_for_digits(60);
        let two = HpFloat::from_i64(2, prec);
        let r = two.sqrt();
        let back = &r * &r;
        assert!((&back - &two).log10_abs() < -58.0);
        assert!(r.to_sci(30).starts_with("1.4142135623730950488016887242"));
    }

    #[test]
    fn rational_conversion_and_division() {
        let prec = bits_for_digits(50);
        let third = HpFloat::from_exact(&ExactScalar::ratio(1, 3), prec);
        let three = HpFloat::from_i64(3, prec);
        let one = &third * &three;
        assert!((&one - &HpFloat::from_i64(1, prec)).log10_abs() < -49.0);
        let q = &HpFloat::from_i64(1, prec) / &three;
        assert!((&q - &third).log10_abs() < -49.0);
        assert_eq!(HpFloat::from_f64(-0.375, prec).to_f64(), -0.375);
    }

    #[test]
    fn complex_sqrt_branch() {
        let prec = bits_for_digits(40);
        let m1 = HpComplex::from_i64(-1, prec);
        let i = m1.sqrt();
        assert!(i.re.log10_abs() < -38.0 || i.re.is_zero());
        assert!((i.im.to_f64() - 1.0).abs() < 1e-15);
        let z = HpComplex::from_f64(3.0, -4.0, prec);
        let s = z.sqrt();
        let (re, im) = s.to_pair();
        assert!((re - 2.0).abs() < 1e-15 && (im + 1.0).abs() < 1e-15);
    }
}
