//! Rational functions whose denominator is a product of powers of fixed linear forms.
//!
//! When every denominator that can occur is known in advance (as for the
//! Hamiltonians, whose poles lie on `t_i = 0`, `q_j ∈ {0, 1}` and the diagonals
//! `q_j = q_k`), normalization reduces to trial division by those forms. The
//! expanded quotient is already in lowest terms, so conversion to [`RatFunc`]
//! needs no gcd.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{MultiPoly, Ring};
use super::{AlgebraError, ExactScalar, RatFunc};

/// A list of pairwise non-associate monic linear polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorBasis {
    ring: Ring,
    factors: Vec<MultiPoly>,
}

impl FactorBasis {
    pub fn new(ring: &Ring, factors: Vec<MultiPoly>) -> Result<Arc<Self>, AlgebraError> {
        let mut out: Vec<MultiPoly> = Vec::with_capacity(factors.len());
        for f in factors {
            f.check_ring(&MultiPoly::zero(ring));
            if f.total_degree() != 1 {
                return Err(AlgebraError::NotLinear(f.to_string()));
            }
            let f = f.monic();
            if out.contains(&f) {
                return Err(AlgebraError::DuplicateFactor(f.to_string()));
            }
            out.push(f);
        }
        Ok(Arc::new(FactorBasis { ring: ring.clone(), factors: out }))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factor(&self, i: usize) -> &MultiPoly {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[MultiPoly] {
        &self.factors
    }

    /// Finds `i` and `c` with `p = c · factor(i)`.
    pub fn find(&self, p: &MultiPoly) -> Option<(usize, ExactScalar)> {
        if p.total_degree() != 1 {
            return None;
        }
        let lc = p.leading_coeff();
        let m = p.monic();
        self.factors.iter().position(|f| *f == m).map(|i| (i, lc))
    }
}

/// `num / Π factor_i^den_i` with `num` not divisible by any factor that has a positive exponent.
#[derive(Clone, PartialEq, Eq)]
pub struct FactoredFrac {
    basis: Arc<FactorBasis>,
    num: MultiPoly,
    den: Vec<u32>,
}

impl FactoredFrac {
    pub fn from_poly(basis: &Arc<FactorBasis>, p: MultiPoly) -> Self {
        p.check_ring(&MultiPoly::zero(basis.ring()));
        FactoredFrac { basis: basis.clone(), num: p, den: vec![0; basis.len()] }
    }

    pub fn zero(basis: &Arc<FactorBasis>) -> Self {
        Self::from_poly(basis, MultiPoly::zero(basis.ring()))
    }

    pub fn one(basis: &Arc<FactorBasis>) -> Self {
        Self::from_poly(basis, MultiPoly::one(basis.ring()))
    }

    pub fn constant(basis: &Arc<FactorBasis>, c: ExactScalar) -> Self {
        Self::from_poly(basis, MultiPoly::constant(basis.ring(), c))
    }

    pub fn int(basis: &Arc<FactorBasis>, n: i64) -> Self {
        Self::constant(basis, ExactScalar::from(n))
    }

    pub fn var(basis: &Arc<FactorBasis>, i: usize) -> Self {
        Self::from_poly(basis, MultiPoly::var(basis.ring(), i))
    }

    /// `1 / factor(i)^k`.
    pub fn inv_factor(basis: &Arc<FactorBasis>, i: usize, k: u32) -> Self {
        let mut den = vec![0; basis.len()];
        den[i] = k;
        FactoredFrac { basis: basis.clone(), num: MultiPoly::one(basis.ring()), den }
    }

    pub fn basis(&self) -> &Arc<FactorBasis> {
        &self.basis
    }

    pub fn ring(&self) -> &Ring {
        self.basis.ring()
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den_exponents(&self) -> &[u32] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn num_degree(&self) -> u32 {
        self.num.total_degree()
    }

    pub fn den_degree(&self) -> u32 {
        self.den.iter().sum()
    }

    pub fn den_poly(&self) -> MultiPoly {
        let mut d = MultiPoly::one(self.ring());
        for (f, &e) in self.basis.factors.iter().zip(&self.den) {
            if e > 0 {
                d = &d * &f.pow(e);
            }
        }
        d
    }

    fn check_basis(&self, other: &FactoredFrac) {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis,
            "fractions over different factor bases"
        );
    }

    fn reduce(mut self) -> Self {
        if self.num.is_zero() {
            self.den.iter_mut().for_each(|e| *e = 0);
            return self;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.num.len() as u64);
        for i in 0..self.den.len() {
            while self.den[i] > 0 {
                let f = &self.basis.factors[i];
                if !vanishes_on(&self.num, f, &mut rng) {
                    break;
                }
                match self.num.div_exact(f) {
                    Some(q) => {
                        self.num = q;
                        self.den[i] -= 1;
                    }
                    None => break,
                }
            }
        }
        self
    }

    pub fn add(&self, other: &FactoredFrac) -> FactoredFrac {
        self.check_basis(other);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut den = vec![0; self.den.len()];
        let mut ca = self.num.clone();
        let mut cb = other.num.clone();
        for i in 0..den.len() {
            let (a, b) = (self.den[i], other.den[i]);
            den[i] = a.max(b);
            let f = &self.basis.factors[i];
            if a < b {
                ca = &ca * &f.pow(b - a);
            } else if b < a {
                cb = &cb * &f.pow(a - b);
            }
        }
        FactoredFrac { basis: self.basis.clone(), num: &ca + &cb, den }.reduce()
    }

    pub fn sub(&self, other: &FactoredFrac) -> FactoredFrac {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FactoredFrac {
        FactoredFrac { basis: self.basis.clone(), num: -&self.num, den: self.den.clone() }
    }

    pub fn scale(&self, c: &ExactScalar) -> FactoredFrac {
        if c.is_zero() {
            return Self::zero(&self.basis);
        }
        FactoredFrac { basis: self.basis.clone(), num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul(&self, other: &FactoredFrac) -> FactoredFrac {
        self.check_basis(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.basis);
        }
        let den: Vec<u32> = self.den.iter().zip(&other.den).map(|(a, b)| a + b).collect();
        FactoredFrac { basis: self.basis.clone(), num: &self.num * &other.num, den }.reduce()
    }

    pub fn mul_poly(&self, p: &MultiPoly) -> FactoredFrac {
        self.mul(&Self::from_poly(&self.basis, p.clone()))
    }

    pub fn pow(&self, e: u32) -> FactoredFrac {
        let mut r = Self::one(&self.basis);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Division by `factor(i)^k`.
    pub fn div_factor(&self, i: usize, k: u32) -> FactoredFrac {
        let mut den = self.den.clone();
        den[i] += k;
        FactoredFrac { basis: self.basis.clone(), num: self.num.clone(), den }.reduce()
    }

    /// Division by a nonzero constant or by a scalar multiple of a basis factor.
    pub fn div_poly(&self, p: &MultiPoly) -> Result<FactoredFrac, AlgebraError> {
        if let Some(c) = p.as_constant() {
            return Ok(self.scale(&c.recip()?));
        }
        let (i, c) = self.basis.find(p).ok_or_else(|| AlgebraError::NotInFactorBasis(p.to_string()))?;
        Ok(self.div_factor(i, 1).scale(&c.recip()?))
    }

    pub fn diff(&self, v: usize) -> FactoredFrac {
        let active: Vec<usize> = (0..self.den.len())
            .filter(|&i| self.den[i] > 0 && self.basis.factors[i].degree_in(v) > 0)
            .collect();
        if active.is_empty() {
            return FactoredFrac { basis: self.basis.clone(), num: self.num.derivative(v), den: self.den.clone() }
                .reduce();
        }
        // d(N / Π f^e) = (N' Π f - N Σ e_i f_i' Π_{k≠i} f_k) / (Π f^e · Π f)
        let mut prod_all = MultiPoly::one(self.ring());
        for &i in &active {
            prod_all = &prod_all * &self.basis.factors[i];
        }
        let mut num = &self.num.derivative(v) * &prod_all;
        for &i in &active {
            let f = &self.basis.factors[i];
            let df = f.derivative(v).as_constant().expect("linear factor");
            let mut others = MultiPoly::one(self.ring());
            for &k in &active {
                if k != i {
                    others = &others * &self.basis.factors[k];
                }
            }
            let coef = &df * &ExactScalar::from(self.den[i] as i64);
            num = &num - &(&self.num * &others).scale(&coef);
        }
        let mut den = self.den.clone();
        for &i in &active {
            den[i] += 1;
        }
        FactoredFrac { basis: self.basis.clone(), num, den }.reduce()
    }

    pub fn eval(&self, point: &[ExactScalar]) -> Result<ExactScalar, AlgebraError> {
        let mut d = ExactScalar::one();
        for (f, &e) in self.basis.factors.iter().zip(&self.den) {
            if e > 0 {
                let v = f.eval(point);
                if v.is_zero() {
                    return Err(AlgebraError::Pole);
                }
                d *= &v.pow(e);
            }
        }
        Ok(&self.num.eval(point) / &d)
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        RatFunc::from_coprime(self.num.clone(), self.den_poly()).expect("nonzero denominator")
    }

    /// Replaces variable `v` by `value`; no denominator factor may involve `v`.
    pub fn substitute(&self, v: usize, value: &FactoredFrac) -> Result<FactoredFrac, AlgebraError> {
        self.check_basis(value);
        for (i, &e) in self.den.iter().enumerate() {
            if e > 0 && self.basis.factors[i].degree_in(v) > 0 {
                return Err(AlgebraError::NotInFactorBasis(format!(
                    "denominator factor {} depends on the substituted variable",
                    self.basis.factors[i]
                )));
            }
        }
        let coeffs = self.num.coeffs_in(v);
        let mut acc = Self::zero(&self.basis);
        for c in coeffs.into_iter().rev() {
            acc = acc.mul(value).add(&Self::from_poly(&self.basis, c));
        }
        let mut den = self.den.clone();
        for (a, b) in den.iter_mut().zip(&acc.den) {
            *a += b;
        }
        Ok(FactoredFrac { basis: self.basis.clone(), num: acc.num, den }.reduce())
    }

    /// Maps into another basis through a ring homomorphism given by `images`.
    pub fn transport(&self, target: &Arc<FactorBasis>, images: &[MultiPoly]) -> Result<FactoredFrac, AlgebraError> {
        let num = self.num.compose(target.ring(), images);
        let mut out = Self::from_poly(target, num);
        for (i, &e) in self.den.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let f = self.basis.factors[i].compose(target.ring(), images);
            if let Some(c) = f.as_constant() {
                if c.is_zero() {
                    return Err(AlgebraError::Pole);
                }
                out = out.scale(&c.pow(e).recip()?);
                continue;
            }
            let (j, c) = target.find(&f).ok_or_else(|| AlgebraError::NotInFactorBasis(f.to_string()))?;
            out = out.div_factor(j, e).scale(&c.pow(e).recip()?);
        }
        Ok(out)
    }
}

impl std::fmt::Debug for FactoredFrac {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}) / [", self.num)?;
        let mut first = true;
        for (g, &e) in self.basis.factors.iter().zip(&self.den) {
            if e > 0 {
                if !first {
                    write!(f, " * ")?;
                }
                first = false;
                write!(f, "({g})^{e}")?;
            }
        }
        write!(f, "]")
    }
}

/// Cheap necessary test for `f | p`: does `p` vanish at a random point of `f = 0` mod a prime.
fn vanishes_on(p: &MultiPoly, f: &MultiPoly, rng: &mut ChaCha8Rng) -> bool {
    use super::modp;
    let n = p.ring().nvars();
    let (lead, _) = f.leading().expect("nonzero factor");
    let v = (0..n).find(|&k| lead.exp(k) == 1).expect("linear leading term");
    let mut vals: Vec<u64> = (0..n).map(|_| rng.gen_range(1..modp::PRIME)).collect();
    vals[v] = 0;
    // f is monic in v: v = -(f - v)
    let Some(rest) = modp::eval(f, &vals) else { return true };
    vals[v] = modp::neg(rest);
    match modp::eval(p, &vals) {
        Some(r) => r == 0,
        None => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PolyRing;

    #[test]
    fn cancellation_and_conversion() {
        let r = PolyRing::new(&["x", "y"]).unwrap();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let basis = FactorBasis::new(&r, vec![x.clone(), &x - &y]).unwrap();
        let a = FactoredFrac::inv_factor(&basis, 1, 1);
        let b = FactoredFrac::from_poly(&basis, &x - &y);
        assert_eq!(a.mul(&b), FactoredFrac::one(&basis));
        let sum = a.add(&FactoredFrac::inv_factor(&basis, 0, 1));
        let expect = RatFunc::var(&r, 0)
            .recip()
            .unwrap()
            .add(&RatFunc::from_poly(&x - &y).recip().unwrap());
        assert_eq!(sum.to_ratfunc(), expect);
    }

    #[test]
    fn derivative_matches_ratfunc() {
        let r = PolyRing::new(&["x", "y"]).unwrap();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let one = MultiPoly::one(&r);
        let basis = FactorBasis::new(&r, vec![x.clone(), &x - &one, &x - &y]).unwrap();
        let f = FactoredFrac::from_poly(&basis, &(&x * &y) + &one)
            .div_factor(0, 2)
            .div_factor(2, 1)
            .div_factor(1, 3);
        for v in 0..2 {
            assert_eq!(f.diff(v).to_ratfunc(), f.to_ratfunc().diff(v));
        }
    }
}
