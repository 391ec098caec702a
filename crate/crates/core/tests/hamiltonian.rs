use garnier_core::algebra::{FactoredFrac, MultiPoly};
use garnier_core::hamiltonian::{
    build_hamiltonian, check_compatibility, compatibility_residual, hamiltonians, permute_pairs, poisson, vector_field,
    PhaseRing, ETA, Q, T,
};
use garnier_core::{ExactScalar, VerifyMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type S = ExactScalar;

fn r(n: i64, d: i64) -> S {
    S::ratio(n, d)
}

/// A second transcription of the printed Hamiltonians, evaluated directly in exact rationals.
/// The printed subscripts 1, 2, 3 on `t` are the indices 0, 1, 2 here.
fn printed(i: usize, t: &[S; 3], q: &[S; 3], eta: &[S; 3]) -> S {
    let one = S::one();
    let n = |k: i64| S::from(k);
    let qp = |j: usize| {
        let mut v = one.clone();
        for k in 0..3 {
            if k != j {
                v = &v * &(&q[j] - &q[k]);
            }
        }
        v
    };
    let s1 = &(&q[0] + &q[1]) + &q[2];
    let s2 = &(&(&q[0] * &q[1]) + &(&q[1] * &q[2])) + &(&q[2] * &q[0]);
    let s3 = &(&q[0] * &q[1]) * &q[2];
    let pm1 = &(&(&q[0] - &one) * &(&q[1] - &one)) * &(&q[2] - &one);
    let div = |a: &S, b: &S| a * &b.recip().unwrap();
    let (t1, t2, t3) = (&t[0], &t[1], &t[2]);
    let mut h = S::zero();
    match i {
        0 => {
            let mut sum = S::zero();
            for j in 0..3 {
                let qj = &q[j];
                let a = div(&(qj * &(qj - &one).pow(2)), &qp(j));
                let b = div(&(&(&(&n(5) * &qj.pow(2)) - &(&n(9) * qj)) + &n(4)), &(&n(3) * &qp(j)));
                sum = &sum + &(&(&a * &eta[j].pow(2)) - &(&b * &eta[j]));
                h = &h + &div(&(&n(4) * t1), &qj.pow(2));
            }
            h = &h - &(&div(&s3, t1) * &sum);
            h = &h + &div(&(&(&(&n(144) * &t1.pow(2)) + &(&n(144) * &t2.pow(2))) - &n(13)), &(&n(36) * t1));
            h = &h + &div(&(&(&(&n(4) * &t3.pow(2)) * &s3) * &(&s1 - &n(2))), t1);
            h = &h - &div(&(&(&n(4) * t1) * &(&(&n(2) * &s2) - &s1)), &s3);
            let poly = &(&(&(&(&(&(&(&s1.pow(2) - &(&(&n(2) * &s1) * &s2)) + &(&(&n(3) * &s1) * &s3)) + &s2.pow(2))
                - &(&(&n(2) * &s2) * &s3))
                - &(&n(2) * &s1))
                + &(&n(2) * &s2))
                - &(&n(4) * &s3))
                + &one;
            h = &h - &div(&(&(&n(4) * &t2.pow(2)) * &poly), &(t1 * &pm1.pow(2)));
        }
        1 => {
            let mut sum = S::zero();
            for j in 0..3 {
                let qj = &q[j];
                let a = div(&(&qj.pow(2) * &(qj - &one)), &qp(j));
                let b = div(&(qj * &(&(&n(5) * qj) - &one)), &(&n(3) * &qp(j)));
                sum = &sum + &(&(&a * &eta[j].pow(2)) - &(&b * &eta[j]));
                h = &h + &div(&(&n(4) * t2), &(qj - &one).pow(2));
            }
            h = &h - &(&div(&pm1, t2) * &sum);
            h = &h + &div(&(&(&(&n(144) * &t1.pow(2)) + &(&n(144) * &t2.pow(2))) - &n(13)), &(&n(36) * t2));
            h = &h + &div(&(&(&(&n(4) * &t3.pow(2)) * &(&(&(&s1 - &s2) + &s3) - &one)) * &(&s1 - &one)), t2);
            h = &h + &div(&(&(&n(4) * t2) * &(&(&(&n(2) * &s2) - &(&n(3) * &s1)) + &n(3))), &pm1);
            let poly = &(&(&(&(&(&s1 * &s2) - &(&s1 * &s3)) - &s2.pow(2)) + &(&(&n(2) * &s2) * &s3)) - &s2) + &s3;
            h = &h - &div(&(&(&n(4) * &t1.pow(2)) * &poly), &(t2 * &s3.pow(2)));
        }
        _ => {
            let mut sum = S::zero();
            for j in 0..3 {
                let qj = &q[j];
                let a = div(&(&qj.pow(2) * &(qj - &one).pow(2)), &qp(j));
                let b = div(&(qj * &(&(&(&n(2) * &qj.pow(2)) - &(&n(3) * qj)) + &one)), &(&n(3) * &qp(j)));
                sum = &sum + &(&(&a * &eta[j].pow(2)) - &(&b * &eta[j]));
            }
            h = &h - &div(&sum, t3);
            h = &h + &(&(&n(4) * t3) * &(&(&(&s1.pow(2) - &(&n(2) * &s1)) - &s2) + &one));
            h = &h - &div(&one, &(&n(36) * t3));
            h = &h - &div(&(&(&n(4) * &t1.pow(2)) * &(&(&n(2) * &s3) - &s2)), &(t3 * &s3.pow(2)));
            h = &h + &div(&(&(&n(4) * &t2.pow(2)) * &(&(&(&n(2) * &s3) - &s2) + &one)), &(t3 * &pm1.pow(2)));
        }
    }
    h
}

fn point(t: [S; 3], q: [S; 3], eta: [S; 3]) -> Vec<S> {
    t.into_iter().chain(q).chain(eta).collect()
}

fn random_point(rng: &mut ChaCha8Rng) -> ([S; 3], [S; 3], [S; 3]) {
    let mut v = || r(rng.gen_range(-40..40), rng.gen_range(1..9));
    loop {
        let t = [v(), v(), v()];
        let q = [v(), v(), v()];
        let eta = [v(), v(), v()];
        let bad = t.iter().any(S::is_zero)
            || q.iter().any(|x| x.is_zero() || x.is_one())
            || q[0] == q[1]
            || q[0] == q[2]
            || q[1] == q[2];
        if !bad {
            return (t, q, eta);
        }
    }
}

#[test]
fn matches_independent_transcription_at_reference_point() {
    let t = [r(1, 1), r(1, 1), r(1, 1)];
    let q = [r(-1, 1), r(2, 1), r(1, 2)];
    let eta = [r(-1, 2), r(1, 2), r(0, 1)];
    let pt = point(t.clone(), q.clone(), eta.clone());
    for i in 0..3 {
        assert_eq!(hamiltonians()[i].eval(&pt).unwrap(), printed(i, &t, &q, &eta), "H_{i}");
    }
}

#[test]
fn matches_independent_transcription_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let (t, q, eta) = random_point(&mut rng);
        let pt = point(t.clone(), q.clone(), eta.clone());
        for i in 0..3 {
            assert_eq!(hamiltonians()[i].eval(&pt).unwrap(), printed(i, &t, &q, &eta));
        }
    }
}

#[test]
fn eta_squared_coefficient_of_third_hamiltonian() {
    let h = hamiltonians()[2].expr();
    let coeff = h.diff(ETA[0]).diff(ETA[0]).scale(&r(1, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let (t, q, eta) = random_point(&mut rng);
        let qp = &(&q[0] - &q[1]) * &(&q[0] - &q[2]);
        let expect = -(&(&q[0].pow(2) * &(&q[0] - &S::one()).pow(2)) * &(&t[2] * &qp).recip().unwrap());
        assert_eq!(coeff.eval(&point(t, q, eta)).unwrap(), expect);
    }
}

#[test]
fn constant_term_of_third_hamiltonian() {
    // with t0 = t1 = 0 and η = 0 the third Hamiltonian is 4·t2·A − 1/(36·t2)
    let h = hamiltonians()[2].expr();
    let q = [r(-1, 1), r(2, 1), r(1, 2)];
    let z = S::zero();
    let at = |t2: S| {
        let v = h.eval(&point([z.clone(), z.clone(), t2.clone()], q.clone(), [z.clone(), z.clone(), z.clone()])).unwrap();
        &v * &t2
    };
    let (a1, a2) = (at(r(1, 1)), at(r(2, 1)));
    // a(t) = 4At² + c  ⇒  c = (4a1 − a2)/3
    let c = &(&(&S::from(4) * &a1) - &a2) * &r(1, 3);
    assert_eq!(c, r(-1, 36));
}

#[test]
fn denominators_use_only_phase_factors() {
    let pr = PhaseRing::get();
    for h in hamiltonians() {
        assert_eq!(h.expr().den_exponents().len(), pr.basis().len());
        assert!(h.expr().num().degree_in(ETA[0]) <= 2);
    }
}

#[test]
fn canonical_pair() {
    let pr = PhaseRing::get();
    let b = poisson(&pr.var(Q[0]), &pr.var(ETA[0]));
    assert_eq!(b.eval(&vec![S::one(); 9]).unwrap(), S::one());
    assert!(b.sub(&pr.int(1)).is_zero());
    assert!(poisson(&pr.var(Q[0]), &pr.var(ETA[1])).is_zero());
}

#[test]
fn bad_index_is_rejected() {
    assert!(build_hamiltonian(3).is_err());
    assert!(check_compatibility(0, 0, VerifyMode::Pit, 20, 1).is_err());
    assert!(check_compatibility(0, 5, VerifyMode::Pit, 20, 1).is_err());
}

fn small_phase_poly(terms: &[(usize, usize, i64)]) -> FactoredFrac {
    let pr = PhaseRing::get();
    let mut p = MultiPoly::zero(pr.ring());
    for &(a, b, c) in terms {
        let m = &pr.poly(Q[a % 3]) * &pr.poly(ETA[b % 3]);
        p = &p + &(&m * &pr.poly(Q[(a + b) % 3])).scale(&S::from(c));
        p = &p + &pr.poly(ETA[a % 3]).pow(2).scale(&S::from(c - b as i64));
    }
    FactoredFrac::from_poly(pr.basis(), p)
}

fn phase_poly() -> impl Strategy<Value = FactoredFrac> {
    prop::collection::vec((0usize..3, 0usize..3, -3i64..4), 1..4).prop_map(|t| small_phase_poly(&t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(f in phase_poly(), g in phase_poly()) {
        prop_assert!(poisson(&f, &f).is_zero());
        prop_assert!(poisson(&f, &g).add(&poisson(&g, &f)).is_zero());
    }

    #[test]
    fn jacobi(f in phase_poly(), g in phase_poly(), h in phase_poly()) {
        let j = poisson(&f, &poisson(&g, &h)).add(&poisson(&g, &poisson(&h, &f))).add(&poisson(&h, &poisson(&f, &g)));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn bracket_leibniz(f in phase_poly(), g in phase_poly(), h in phase_poly()) {
        let lhs = poisson(&f, &g.mul(&h));
        let rhs = poisson(&f, &g).mul(&h).add(&g.mul(&poisson(&f, &h)));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }
}

#[test]
fn compatibility_all_pairs_pit() {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let rep = check_compatibility(i, j, VerifyMode::Pit, 20, 42).unwrap();
        assert!(rep.zero, "pair ({i},{j})");
        let pit = rep.pit.unwrap();
        assert!(pit.trials >= 20 && pit.failure_bound_log10 < -12.0);
        assert!(rep.minus_bracket_value.is_some_and(|v| v != "0"));
    }
}

#[test]
fn compatibility_full_and_antisymmetric() {
    let r01 = compatibility_residual(0, 1).unwrap();
    assert!(r01.is_zero());
    let r10 = compatibility_residual(1, 0).unwrap();
    assert!(r10.add(&r01).is_zero());
}

#[test]
fn invariant_under_pair_permutations() {
    let perms = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    for h in hamiltonians() {
        for perm in perms {
            assert!(permute_pairs(h.expr(), perm).unwrap().sub(h.expr()).is_zero(), "H_{} under {perm:?}", h.index());
        }
    }
}

#[test]
fn vector_field_shape_and_symmetry() {
    for i in 0..3 {
        let vf = vector_field(i).unwrap();
        for j in 0..3 {
            assert_eq!(vf[j].num().degree_in(ETA[j]), 1);
        }
        let swapped = permute_pairs(&vf[1], [0, 2, 1]).unwrap();
        assert!(swapped.sub(&vf[2]).is_zero());
    }
}

#[test]
fn vector_field_matches_finite_differences() {
    let t = [r(1, 1), r(1, 1), r(1, 1)];
    let q = [r(-1, 1), r(2, 1), r(1, 2)];
    let eta = [r(-1, 2), r(1, 2), r(0, 1)];
    let base = point(t, q, eta);
    let h = S::new(1, num_traits::pow(num_bigint::BigInt::from(10), 30)).unwrap();
    let tol = S::new(1, num_traits::pow(num_bigint::BigInt::from(10), 20)).unwrap();
    for i in 0..3 {
        let vf = vector_field(i).unwrap();
        let ham = hamiltonians()[i].expr();
        for (k, var) in ETA.iter().chain(Q.iter()).enumerate() {
            let mut up = base.clone();
            let mut dn = base.clone();
            up[*var] = &up[*var] + &h;
            dn[*var] = &dn[*var] - &h;
            let fd = &(&ham.eval(&up).unwrap() - &ham.eval(&dn).unwrap()) * &(&S::from(2) * &h).recip().unwrap();
            let exact = if k < 3 { vf[k].eval(&base).unwrap() } else { -vf[k].eval(&base).unwrap() };
            let err = (&fd - &exact).abs();
            assert!(err < &tol * &(&S::one() + &exact.abs()), "H_{i} variable {var}");
        }
    }
    assert_eq!(T, [0, 1, 2]);
}
