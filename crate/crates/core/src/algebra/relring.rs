//! The ring Q(s₀,s₁,s₂)[t₀,t₁,t₂] / (t_i² − s_i³), a free module of rank 8.

use std::fmt;
use std::sync::OnceLock;

use super::poly::{MultiPoly, Ring};
use super::{AlgebraError, ExactScalar, PolyRing, RatFunc};

/// The coefficient ring `(s0, s1, s2)`.
pub fn s_ring() -> Ring {
    static RING: OnceLock<Ring> = OnceLock::new();
    RING.get_or_init(|| PolyRing::new(&["s0", "s1", "s2"]).expect("valid names")).clone()
}

/// `Σ_e R_e(s) · t₀^{e₀} t₁^{e₁} t₂^{e₂}`, component index `e₀ + 2e₁ + 4e₂`.
#[derive(Clone, PartialEq, Eq)]
pub struct RelRingElem {
    comps: [RatFunc; 8],
}

impl RelRingElem {
    pub fn zero() -> Self {
        let z = RatFunc::zero(&s_ring());
        RelRingElem { comps: std::array::from_fn(|_| z.clone()) }
    }

    pub fn one() -> Self {
        Self::scalar(RatFunc::one(&s_ring()))
    }

    /// Embeds a rational function of `s`; it must live in [`s_ring`].
    pub fn scalar(r: RatFunc) -> Self {
        assert_eq!(**r.ring(), *s_ring(), "coefficients must be rational functions of (s0, s1, s2)");
        let mut out = Self::zero();
        out.comps[0] = r;
        out
    }

    pub fn int(n: i64) -> Self {
        Self::scalar(RatFunc::int(&s_ring(), n))
    }

    /// The generator `t_i`.
    pub fn t(i: usize) -> Self {
        assert!(i < 3);
        let mut out = Self::zero();
        out.comps[1 << i] = RatFunc::one(&s_ring());
        out
    }

    pub fn s(i: usize) -> Self {
        Self::scalar(RatFunc::var(&s_ring(), i))
    }

    pub fn component(&self, e: [u8; 3]) -> &RatFunc {
        &self.comps[(e[0] | e[1] << 1 | e[2] << 2) as usize]
    }

    pub fn components(&self) -> &[RatFunc; 8] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(RatFunc::is_zero)
    }

    /// The coefficient if no t-component survives.
    pub fn as_scalar(&self) -> Option<&RatFunc> {
        if self.comps[1..].iter().all(RatFunc::is_zero) {
            Some(&self.comps[0])
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        RelRingElem { comps: std::array::from_fn(|k| self.comps[k].add(&other.comps[k])) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        RelRingElem { comps: std::array::from_fn(|k| self.comps[k].sub(&other.comps[k])) }
    }

    pub fn neg(&self) -> Self {
        RelRingElem { comps: std::array::from_fn(|k| self.comps[k].neg()) }
    }

    pub fn scale(&self, r: &RatFunc) -> Self {
        RelRingElem { comps: std::array::from_fn(|k| self.comps[k].mul(r)) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let ring = s_ring();
        let cubes: [RatFunc; 3] = std::array::from_fn(|i| RatFunc::var(&ring, i).pow(3).expect("positive power"));
        let mut out = Self::zero();
        for a in 0..8usize {
            if self.comps[a].is_zero() {
                continue;
            }
            for b in 0..8usize {
                if other.comps[b].is_zero() {
                    continue;
                }
                let mut c = self.comps[a].mul(&other.comps[b]);
                let both = a & b;
                for (i, cube) in cubes.iter().enumerate() {
                    if both & (1 << i) != 0 {
                        c = c.mul(cube);
                    }
                }
                out.comps[a ^ b] = out.comps[a ^ b].add(&c);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// The automorphism `t_i ↦ −t_i`.
    pub fn conj(&self, i: usize) -> Self {
        RelRingElem {
            comps: std::array::from_fn(|k| if k & (1 << i) != 0 { self.comps[k].neg() } else { self.comps[k].clone() }),
        }
    }

    /// Product over all sign patterns; a rational function of `s`.
    pub fn norm(&self) -> RatFunc {
        let mut b = self.clone();
        for i in 0..3 {
            b = b.mul(&b.conj(i));
        }
        b.as_scalar().expect("norm is free of t").clone()
    }

    pub fn invert(&self) -> Result<Self, AlgebraError> {
        let mut b = self.clone();
        let mut cofactor = Self::one();
        for i in 0..3 {
            let c = b.conj(i);
            cofactor = cofactor.mul(&c);
            b = b.mul(&c);
        }
        let n = b.as_scalar().expect("norm is free of t");
        if n.is_zero() {
            return Err(AlgebraError::NotInvertible);
        }
        Ok(cofactor.scale(&n.recip()?))
    }

    /// Evaluates every component at a point of `s`.
    pub fn eval(&self, s: &[ExactScalar; 3]) -> Result<[ExactScalar; 8], AlgebraError> {
        let mut out: [ExactScalar; 8] = Default::default();
        for (k, c) in self.comps.iter().enumerate() {
            out[k] = c.eval(s)?;
        }
        Ok(out)
    }

    /// Image of a polynomial under the homomorphism sending variable `k` to `images[k]`.
    pub fn eval_poly(p: &MultiPoly, images: &[RelRingElem]) -> Self {
        assert_eq!(images.len(), p.ring().nvars());
        let mut powers: Vec<Vec<RelRingElem>> = images.iter().map(|r| vec![Self::one(), r.clone()]).collect();
        let ring = s_ring();
        let mut acc = Self::zero();
        for (m, c) in p.terms() {
            let mut t = Self::scalar(RatFunc::constant(&ring, c.clone()));
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

    /// Image of a rational function; the denominator image must be invertible.
    pub fn eval_ratfunc(r: &RatFunc, images: &[RelRingElem]) -> Result<Self, AlgebraError> {
        let n = Self::eval_poly(r.num(), images);
        let d = Self::eval_poly(r.den(), images);
        Ok(n.mul(&d.invert()?))
    }
}

impl fmt::Debug for RelRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RelRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut gens = String::new();
            for i in 0..3 {
                if k & (1 << i) != 0 {
                    gens.push_str(&format!("*t{i}"));
                }
            }
            parts.push(format!("({c}){gens}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_reduces() {
        let t0 = RelRingElem::t(0);
        let s0 = RelRingElem::s(0);
        assert_eq!(t0.mul(&t0), s0.pow(3));
        assert_eq!(t0.pow(3), s0.pow(3).mul(&t0));
        let t1 = RelRingElem::t(1);
        let sum = t0.add(&t1);
        let expect = s0.pow(3).add(&RelRingElem::s(1).pow(3)).add(&t0.mul(&t1).scale(&RatFunc::int(&s_ring(), 2)));
        assert_eq!(sum.mul(&sum), expect);
    }

    #[test]
    fn inverses() {
        let t0 = RelRingElem::t(0);
        let inv = t0.invert().unwrap();
        assert_eq!(inv, t0.scale(&RelRingElem::s(0).pow(3).as_scalar().unwrap().recip().unwrap()));
        let a = RelRingElem::one().add(&t0);
        let expect_den = RatFunc::one(&s_ring()).sub(RelRingElem::s(0).pow(3).as_scalar().unwrap());
        let expect = RelRingElem::one().sub(&t0).scale(&expect_den.recip().unwrap());
        assert_eq!(a.invert().unwrap(), expect);
        assert!(RelRingElem::zero().invert().is_err());
    }
}
