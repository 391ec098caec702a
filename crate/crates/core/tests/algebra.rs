use garnier_core::algebra::{pit_zero, s_ring, MultiPoly, PolyRing, RatFunc, RelRingElem, Ring};
use garnier_core::solution::cubic_at;
use garnier_core::{AlgebraError, ExactScalar};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type S = ExactScalar;

fn ring(names: &[&str]) -> Ring {
    PolyRing::new(names).unwrap()
}

fn x_poly(r: &Ring, coeffs: &[i64]) -> MultiPoly {
    let x = MultiPoly::var(r, 0);
    coeffs.iter().rev().fold(MultiPoly::zero(r), |acc, &c| &(&acc * &x) + &MultiPoly::int(r, c))
}

fn pow10(k: u32) -> S {
    S::from_int(num_traits::pow(BigInt::from(10), k as usize))
}

#[test]
fn normalize_examples() {
    let r = ring(&["x"]);
    let x = MultiPoly::var(&r, 0);
    let a = RatFunc::new(x.scale(&S::from(2)), MultiPoly::int(&r, 4)).unwrap();
    assert_eq!(a, RatFunc::from_poly(x.scale(&S::ratio(1, 2))));
    let b = RatFunc::new(x_poly(&r, &[-1, 0, 1]), x_poly(&r, &[-1, 1])).unwrap();
    assert_eq!(b, RatFunc::from_poly(x_poly(&r, &[1, 1])));
    assert!(b.den().is_one());
    assert_eq!(RatFunc::new(x.clone(), MultiPoly::zero(&r)), Err(AlgebraError::ZeroDenominator));
}

#[test]
fn cancelling_a_random_factor() {
    let r = ring(&["x", "y"]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut rand_poly = || {
            let mut p = MultiPoly::zero(&r);
            for _ in 0..4 {
                let m = &MultiPoly::var(&r, 0).pow(rng.gen_range(0..3)) * &MultiPoly::var(&r, 1).pow(rng.gen_range(0..3));
                p = &p + &m.scale(&S::from(rng.gen_range(-9i64..10)));
            }
            p
        };
        let p = rand_poly();
        let q = rand_poly();
        if q.is_zero() {
            continue;
        }
        assert_eq!(RatFunc::new(&p * &q, q).unwrap(), RatFunc::new(p.clone(), MultiPoly::one(&r)).unwrap());
    }
}

#[test]
fn derivative_examples() {
    let r = ring(&["x", "t0"]);
    let x2 = RatFunc::from_poly(MultiPoly::var(&r, 0).pow(2));
    assert_eq!(x2.diff(0), RatFunc::from_poly(MultiPoly::var(&r, 0).scale(&S::from(2))));
    let t2 = RatFunc::from_poly(MultiPoly::var(&r, 1).pow(2));
    assert_eq!(t2.diff_named("t0").unwrap(), RatFunc::from_poly(MultiPoly::var(&r, 1).scale(&S::from(2))));
    assert!(matches!(t2.diff_named("t9"), Err(AlgebraError::UnknownVariable(_))));
}

#[test]
fn derivative_matches_central_differences() {
    let r = ring(&["a", "b", "c"]);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = pow10(25).recip().unwrap();
    let tol = pow10(20).recip().unwrap();
    let mut checked = 0;
    while checked < 30 {
        let mut rand_poly = |terms: usize| {
            let mut p = MultiPoly::zero(&r);
            for _ in 0..terms {
                let mut m = MultiPoly::int(&r, rng.gen_range(-7..8));
                for v in 0..3 {
                    m = &m * &MultiPoly::var(&r, v).pow(rng.gen_range(0..3));
                }
                p = &p + &m;
            }
            p
        };
        let (n, d) = (rand_poly(4), rand_poly(3));
        if d.is_zero() {
            continue;
        }
        let f = RatFunc::new(n, d).unwrap();
        let pt: Vec<S> = (0..3).map(|_| S::ratio(rng.gen_range(-30..30), rng.gen_range(1..7))).collect();
        let v = rng.gen_range(0..3);
        let Ok(exact) = f.diff(v).eval(&pt) else { continue };
        let mut up = pt.clone();
        let mut dn = pt.clone();
        up[v] = &up[v] + &h;
        dn[v] = &dn[v] - &h;
        let (Ok(fu), Ok(fd)) = (f.eval(&up), f.eval(&dn)) else { continue };
        let approx = &(&fu - &fd) / &(&S::from(2) * &h);
        let err = (&approx - &exact).abs();
        assert!(err <= &tol * &(&S::one() + &exact.abs()), "derivative of {f:?} in variable {v}");
        checked += 1;
    }
}

#[test]
fn evaluation_examples() {
    let r = ring(&["x"]);
    let half_x = RatFunc::from_poly(MultiPoly::var(&r, 0).scale(&S::ratio(1, 2)));
    assert_eq!(half_x.eval(&[S::from(4)]).unwrap(), S::from(2));
    // the unreduced quotient still has its removable pole
    let raw = RatFunc::from_coprime(x_poly(&r, &[-1, 0, 1]), x_poly(&r, &[-1, 1])).unwrap();
    assert_eq!(raw.eval(&[S::one()]), Err(AlgebraError::Pole));
    let cubic = cubic_at(&[S::one(), S::one(), S::one()]).unwrap();
    assert!(cubic.eval(&[S::from(-1)]).is_zero());
}

#[test]
fn relation_ring_examples() {
    let (t0, t1, s0, s1) = (RelRingElem::t(0), RelRingElem::t(1), RelRingElem::s(0), RelRingElem::s(1));
    assert_eq!(t0.mul(&t0), s0.pow(3));
    assert_eq!(t0.pow(3), s0.pow(3).mul(&t0));
    let sum = t0.add(&t1);
    let expect = s0.pow(3).add(&s1.pow(3)).add(&t0.mul(&t1).mul(&RelRingElem::int(2)));
    assert_eq!(sum.mul(&sum), expect);
}

#[test]
fn relation_ring_inverse_examples() {
    let sr = s_ring();
    let t0 = RelRingElem::t(0);
    let s0_cubed = RelRingElem::s(0).pow(3);
    assert_eq!(t0.invert().unwrap(), t0.mul(&s0_cubed.invert().unwrap()));

    let a = RelRingElem::one().add(&t0);
    let inv = a.invert().unwrap();
    let den = RatFunc::one(&sr).sub(s0_cubed.as_scalar().unwrap());
    assert_eq!(inv, RelRingElem::one().sub(&t0).scale(&den.recip().unwrap()));
    assert_eq!(a.mul(&inv), RelRingElem::one());

    let s0 = RelRingElem::s(0);
    assert_eq!(s0.invert().unwrap(), RelRingElem::scalar(RatFunc::var(&sr, 0).recip().unwrap()));
    assert_eq!(RelRingElem::zero().invert(), Err(AlgebraError::NotInvertible));
}

#[test]
fn identity_testing_examples() {
    let r = ring(&["x"]);
    let x = RatFunc::var(&r, 0);
    let zero = pit_zero(&x.sub(&x), 10, 3).unwrap();
    assert!(zero.zero && zero.witness.is_none());

    let nz = pit_zero(&x.sub(&RatFunc::one(&r)), 10, 3).unwrap();
    assert!(!nz.zero);
    let witness = nz.witness.unwrap();
    assert_eq!(witness[0].0, "x");
    assert_ne!(witness[0].1, "1");

    assert!(pit_zero(&RatFunc::zero(&r), 1, 0).unwrap().zero);
    assert!(pit_zero(&x, 0, 0).is_err());
}

#[test]
fn identity_testing_reports_the_degree_bound() {
    let r = ring(&["x", "y"]);
    let x = MultiPoly::var(&r, 0);
    let y = MultiPoly::var(&r, 1);
    let lhs = RatFunc::from_poly((&x + &y).pow(5));
    let rhs = RatFunc::from_poly((0..=5u32).fold(MultiPoly::zero(&r), |acc, k| {
        let binom = (1..=i64::from(k)).fold(1i64, |b, i| b * (5 - i + 1) / i);
        &acc + &(&x.pow(k) * &y.pow(5 - k)).scale(&S::from(binom))
    }));
    let out = pit_zero(&lhs.sub(&rhs), 20, 1).unwrap();
    assert!(out.zero);
    assert_eq!(out.degree.num, 0);
    let nonzero = pit_zero(&lhs, 20, 1).unwrap();
    assert!(!nonzero.zero);
    assert_eq!(nonzero.degree.num, 5);
    // a degree-5 nonzero expression passes one trial with probability at most 5/(2·10⁶)
    let single = garnier_core::algebra::DegreeBound { num: 5, den: 0 }.per_trial();
    assert!(single < 3e-6);
}

#[test]
fn relation_ring_identity_testing() {
    let t0 = RelRingElem::t(0);
    let s0 = RelRingElem::s(0);
    assert!(pit_zero(&t0.mul(&t0).sub(&s0.pow(3)), 10, 2).unwrap().zero);
    assert!(!pit_zero(&t0.sub(&s0), 10, 2).unwrap().zero);
}
