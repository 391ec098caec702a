use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::gcd::gcd;
use super::poly::{parse_term_lines, parse_vars_line, MultiPoly, Ring};
use super::{AlgebraError, ExactScalar};

/// Quotient of two polynomials in lowest terms, denominator with leading coefficient one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFunc {
    /// Normalizing constructor.
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self, AlgebraError> {
        num.check_ring(&den);
        if den.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: MultiPoly, den: MultiPoly) -> Self {
        if num.is_zero() {
            let ring = den.ring().clone();
            return RatFunc { num: MultiPoly::zero(&ring), den: MultiPoly::one(&ring) };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        Self::with_monic_den(num, den)
    }

    fn with_monic_den(num: MultiPoly, den: MultiPoly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.recip().expect("nonzero");
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    /// Skips the gcd; the caller guarantees the parts are coprime.
    pub fn from_coprime(num: MultiPoly, den: MultiPoly) -> Result<Self, AlgebraError> {
        num.check_ring(&den);
        if den.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero(den.ring()));
        }
        Ok(Self::with_monic_den(num, den))
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let den = MultiPoly::one(p.ring());
        RatFunc { num: p, den }
    }

    pub fn zero(ring: &Ring) -> Self {
        Self::from_poly(MultiPoly::zero(ring))
    }

    pub fn one(ring: &Ring) -> Self {
        Self::from_poly(MultiPoly::one(ring))
    }

    pub fn constant(ring: &Ring, c: ExactScalar) -> Self {
        Self::from_poly(MultiPoly::constant(ring, c))
    }

    pub fn int(ring: &Ring, n: i64) -> Self {
        Self::constant(ring, ExactScalar::from(n))
    }

    pub fn var(ring: &Ring, i: usize) -> Self {
        Self::from_poly(MultiPoly::var(ring, i))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn ring(&self) -> &Ring {
        self.num.ring()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<ExactScalar> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Self::normalized(&self.num + &other.num, self.den.clone());
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = &(&self.num * &other.den) + &(&other.num * &self.den);
            let den = &self.den * &other.den;
            // gcd(num, den) = 1 automatically when the denominators are coprime
            return Self::from_coprime(num, den).expect("nonzero");
        }
        let b1 = self.den.div_exact(&g).expect("gcd divides");
        let d1 = other.den.div_exact(&g).expect("gcd divides");
        let num = &(&self.num * &d1) + &(&other.num * &b1);
        if num.is_zero() {
            return Self::zero(self.ring());
        }
        let h = gcd(&num, &g);
        let (num, g2) = if h.is_one() {
            (num, g)
        } else {
            (num.div_exact(&h).expect("divides"), g.div_exact(&h).expect("divides"))
        };
        let den = &(&b1 * &d1) * &g2;
        Self::with_monic_den(num, den)
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.ring());
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let cut = |p: &MultiPoly, g: &MultiPoly| {
            if g.is_one() {
                p.clone()
            } else {
                p.div_exact(g).expect("gcd divides")
            }
        };
        let num = &cut(&self.num, &g1) * &cut(&other.num, &g2);
        let den = &cut(&self.den, &g2) * &cut(&other.den, &g1);
        Self::with_monic_den(num, den)
    }

    pub fn scale(&self, c: &ExactScalar) -> RatFunc {
        if c.is_zero() {
            return Self::zero(self.ring());
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<RatFunc, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::with_monic_den(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, AlgebraError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, e: i32) -> Result<RatFunc, AlgebraError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let k = e.unsigned_abs();
        // numerator and denominator stay coprime under powers
        Ok(Self::with_monic_den(base.num.pow(k), base.den.pow(k)))
    }

    /// Partial derivative with respect to variable index `i`.
    pub fn diff(&self, i: usize) -> RatFunc {
        let dn = self.num.derivative(i);
        let dd = self.den.derivative(i);
        if dd.is_zero() {
            return Self::normalized(dn, self.den.clone());
        }
        // (n/d)' = (n' d - n d') / d^2; the gcd with d^2 divides d * gcd(d, d')
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        Self::normalized(num, &self.den * &self.den)
    }

    pub fn diff_named(&self, name: &str) -> Result<RatFunc, AlgebraError> {
        Ok(self.diff(self.ring().require(name)?))
    }

    pub fn eval(&self, point: &[ExactScalar]) -> Result<ExactScalar, AlgebraError> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(AlgebraError::Pole);
        }
        Ok(&self.num.eval(point) / &d)
    }

    /// Evaluation at a point given by name; unnamed variables are an error.
    pub fn eval_named(&self, point: &[(&str, ExactScalar)]) -> Result<ExactScalar, AlgebraError> {
        let ring = self.ring();
        let mut vals = vec![None; ring.nvars()];
        for (name, v) in point {
            vals[ring.require(name)?] = Some(v.clone());
        }
        let vals: Vec<ExactScalar> = vals
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| AlgebraError::UnknownVariable(ring.name(i).to_string())))
            .collect::<Result<_, _>>()?;
        self.eval(&vals)
    }

    /// Substitutes rational functions for the variables (a field homomorphism into `target`).
    pub fn compose(&self, target: &Ring, images: &[RatFunc]) -> Result<RatFunc, AlgebraError> {
        let n = compose_poly(&self.num, target, images);
        let d = compose_poly(&self.den, target, images);
        n.div(&d)
    }

    /// Moves into a ring whose variables are matched by name.
    pub fn embed_by_name(&self, target: &Ring) -> Result<RatFunc, AlgebraError> {
        let num = self.num.embed_by_name(target)?;
        let den = self.den.embed_by_name(target)?;
        // renaming keeps coprimality but may change the leading term
        Self::from_coprime(num, den)
    }

    pub fn to_canonical_text(&self) -> String {
        let mut s = format!("vars: {}\nnum:\n", self.ring().names().join(" "));
        self.num.write_terms(&mut s);
        s.push_str("den:\n");
        self.den.write_terms(&mut s);
        s
    }

    pub fn from_canonical_text(text: &str) -> Result<RatFunc, AlgebraError> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let ring = parse_vars_line(lines.first().copied())?;
        let num_at = lines.iter().position(|l| l.trim() == "num:");
        let den_at = lines.iter().position(|l| l.trim() == "den:");
        let (Some(a), Some(b)) = (num_at, den_at) else {
            return Err(AlgebraError::Parse("missing num:/den: sections".into()));
        };
        if b < a {
            return Err(AlgebraError::Parse("den: before num:".into()));
        }
        let num = parse_term_lines(&ring, lines[a + 1..b].iter().copied())?;
        let den = parse_term_lines(&ring, lines[b + 1..].iter().copied())?;
        RatFunc::new(num, den)
    }
}

fn compose_poly(p: &MultiPoly, target: &Ring, images: &[RatFunc]) -> RatFunc {
    assert_eq!(images.len(), p.ring().nvars());
    let mut powers: Vec<Vec<RatFunc>> = images.iter().map(|r| vec![RatFunc::one(target), r.clone()]).collect();
    let mut acc = RatFunc::zero(target);
    for (m, c) in p.terms() {
        let mut t = RatFunc::constant(target, c.clone());
        for (k, row) in powers.iter_mut().enumerate() {
            let e = m.exp(k) as usize;
            if e == 0 {
                continue;
            }
            while row.len() <= e {
                let next = row.last().unwrap().mul(&row[1]);
                row.push(next);
            }
            t = t.mul(&row[e]);
        }
        acc = acc.add(&t);
    }
    acc
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::add(self, rhs)
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::sub(self, rhs)
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::mul(self, rhs)
    }
}

impl Div<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    /// Panics on a zero divisor; [`RatFunc::div`] is the checked form.
    fn div(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::div(self, rhs).expect("division by zero rational function")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PolyRing;

    #[test]
    fn normalize_examples() {
        let r = PolyRing::new(&["x"]).unwrap();
        let x = MultiPoly::var(&r, 0);
        let one = MultiPoly::one(&r);
        let a = RatFunc::new(x.scale(&ExactScalar::from(2)), MultiPoly::int(&r, 4)).unwrap();
        assert_eq!(a, RatFunc::from_poly(x.scale(&ExactScalar::ratio(1, 2))));
        let b = RatFunc::new(&(&x * &x) - &one, &x - &one).unwrap();
        assert_eq!(b, RatFunc::from_poly(&x + &one));
        assert!(RatFunc::new(x.clone(), MultiPoly::zero(&r)).is_err());
    }

    #[test]
    fn derivative_and_eval() {
        let r = PolyRing::new(&["x"]).unwrap();
        let x = RatFunc::var(&r, 0);
        let sq = x.mul(&x);
        assert_eq!(sq.diff(0), x.scale(&ExactScalar::from(2)));
        let inv = x.recip().unwrap();
        assert_eq!(inv.diff(0), sq.recip().unwrap().neg());
        let half = x.scale(&ExactScalar::ratio(1, 2));
        assert_eq!(half.eval(&[ExactScalar::from(4)]).unwrap(), ExactScalar::from(2));
        assert!(inv.eval(&[ExactScalar::zero()]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let r = PolyRing::new(&["x", "y"]).unwrap();
        let x = RatFunc::var(&r, 0);
        let y = RatFunc::var(&r, 1);
        let f = x.add(&RatFunc::one(&r)).div(&y.sub(&x)).unwrap();
        let back = RatFunc::from_canonical_text(&f.to_canonical_text()).unwrap();
        assert_eq!(back, f);
    }
}
