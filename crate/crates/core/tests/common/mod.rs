//! Generators and property bodies shared by the property suite and the acceptance run.
#![allow(dead_code)]

use garnier_core::algebra::{s_ring, Monomial, MultiPoly, PolyRing, RatFunc, RelRingElem, Ring};
use garnier_core::ExactScalar;
use num_integer::Integer;
use num_traits::{One, Signed};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use std::sync::OnceLock;

pub const CASES: u32 = 500;

pub type PropResult = Result<(), TestCaseError>;

fn xyz() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["x", "y", "z"]).unwrap()).clone()
}

fn poly_from(ring: &Ring, terms: &[([u16; 3], i64)]) -> MultiPoly {
    MultiPoly::from_terms(ring, terms.iter().map(|(e, c)| (Monomial::from_exps(e), ExactScalar::from(*c))))
}

fn terms(max_terms: usize) -> impl Strategy<Value = Vec<([u16; 3], i64)>> {
    prop::collection::vec(([0u16..3, 0u16..3, 0u16..3], -6i64..7), 0..max_terms)
}

pub fn poly() -> impl Strategy<Value = MultiPoly> {
    terms(5).prop_map(|t| poly_from(&xyz(), &t))
}

pub fn nonzero_poly() -> impl Strategy<Value = MultiPoly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

pub fn ratfunc() -> impl Strategy<Value = RatFunc> {
    (poly(), nonzero_poly()).prop_map(|(n, d)| RatFunc::new(n, d).unwrap())
}

fn s_ratfunc() -> impl Strategy<Value = RatFunc> {
    (terms(3), prop::collection::vec(([0u16..2, 0u16..2, 0u16..2], 1i64..4), 1..3)).prop_map(|(n, d)| {
        let r = s_ring();
        RatFunc::new(poly_from(&r, &n), poly_from(&r, &d)).unwrap()
    })
}

fn monomial_in_t(r: RatFunc, e: u8) -> RelRingElem {
    let mut m = RelRingElem::scalar(r);
    for i in 0..3 {
        if e >> i & 1 == 1 {
            m = m.mul(&RelRingElem::t(i));
        }
    }
    m
}

/// `Σ_e R_e(s) t^e` with up to four nonzero components.
pub fn rel_elem() -> impl Strategy<Value = RelRingElem> {
    prop::collection::vec((0u8..8, s_ratfunc()), 0..4)
        .prop_map(|parts| parts.into_iter().fold(RelRingElem::zero(), |a, (e, r)| a.add(&monomial_in_t(r, e))))
}

/// Polynomial components only; keeps the degree-8 norm cheap.
pub fn rel_poly_elem() -> impl Strategy<Value = RelRingElem> {
    prop::collection::vec((0u8..8, terms(3)), 1..3).prop_map(|parts| {
        let r = s_ring();
        parts
            .into_iter()
            .fold(RelRingElem::zero(), |a, (e, n)| a.add(&monomial_in_t(RatFunc::from_poly(poly_from(&r, &n)), e)))
    })
}

pub fn scalar() -> impl Strategy<Value = ExactScalar> {
    (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| ExactScalar::ratio(n, d))
}

pub fn scalar_is_reduced(a: &ExactScalar, b: &ExactScalar) -> PropResult {
    for v in [a + b, a * b, a - b] {
        prop_assert!(v.denom().is_positive());
        prop_assert!(v.numer().gcd(v.denom()).is_one());
    }
    Ok(())
}

#[allow(clippy::eq_op)]
pub fn poly_ring_axioms(a: &MultiPoly, b: &MultiPoly, c: &MultiPoly) -> PropResult {
    prop_assert_eq!(a + b, b + a);
    prop_assert_eq!(a * b, b * a);
    prop_assert_eq!(&(a + b) + c, a + &(b + c));
    prop_assert_eq!(&(a * b) * c, a * &(b * c));
    prop_assert_eq!(a * &(b + c), &(a * b) + &(a * c));
    prop_assert!((a - a).is_zero());
    Ok(())
}

pub fn poly_has_no_zero_terms(a: &MultiPoly, b: &MultiPoly) -> PropResult {
    let p = &(a * b) - &(a + b);
    prop_assert!(p.terms().iter().all(|(_, c)| !c.is_zero()));
    Ok(())
}

pub fn ratfunc_field_axioms(a: &RatFunc, b: &RatFunc, c: &RatFunc) -> PropResult {
    prop_assert_eq!(a.add(b), b.add(a));
    prop_assert_eq!(a.mul(b), b.mul(a));
    prop_assert_eq!(a.add(b).add(c), a.add(&b.add(c)));
    prop_assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
    prop_assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
    if !b.is_zero() {
        prop_assert_eq!(&a.div(b).unwrap().mul(b), a);
    }
    Ok(())
}

pub fn canonical_form_is_unique(p: &MultiPoly, q: &MultiPoly, c: &MultiPoly, k: i64) -> PropResult {
    let plain = RatFunc::new(p.clone(), q.clone()).unwrap();
    let padded = RatFunc::new((p * c).scale(&ExactScalar::from(k)), (q * c).scale(&ExactScalar::from(-k))).unwrap();
    prop_assert_eq!(plain.neg().to_canonical_text(), padded.to_canonical_text());
    prop_assert_eq!(plain.neg(), padded);
    Ok(())
}

pub fn zero_difference_iff_identical(a: &RatFunc, b: &RatFunc) -> PropResult {
    prop_assert_eq!(a.sub(b).is_zero(), a.to_canonical_text() == b.to_canonical_text());
    Ok(())
}

pub fn denominator_is_normalized(a: &RatFunc) -> PropResult {
    prop_assert!(a.den().leading_coeff().is_one());
    Ok(())
}

pub fn leibniz(a: &RatFunc, b: &RatFunc, v: usize) -> PropResult {
    let lhs = a.mul(b).diff(v);
    let rhs = a.diff(v).mul(b).add(&a.mul(&b.diff(v)));
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

pub fn canonical_text_round_trip(a: &RatFunc) -> PropResult {
    prop_assert_eq!(&RatFunc::from_canonical_text(&a.to_canonical_text()).unwrap(), a);
    Ok(())
}

pub fn relring_axioms(a: &RelRingElem, b: &RelRingElem, c: &RelRingElem) -> PropResult {
    prop_assert_eq!(a.mul(b), b.mul(a));
    prop_assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
    prop_assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
    Ok(())
}

pub fn conjugation_is_an_involutive_automorphism(a: &RelRingElem, b: &RelRingElem, i: usize) -> PropResult {
    prop_assert_eq!(a.mul(b).conj(i), a.conj(i).mul(&b.conj(i)));
    prop_assert_eq!(a.add(b).conj(i), a.conj(i).add(&b.conj(i)));
    prop_assert_eq!(&a.conj(i).conj(i), a);
    Ok(())
}

pub fn relring_inverse(a: &RelRingElem) -> PropResult {
    if let Ok(inv) = a.invert() {
        prop_assert_eq!(a.mul(&inv), RelRingElem::one());
    } else {
        prop_assert!(a.norm().is_zero());
    }
    Ok(())
}
