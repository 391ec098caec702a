use garnier_core::algebra::RatFunc;
use garnier_core::connection::{
    build_connection, check_apparent, derive_hamiltonians_from_connection, hamiltonians_at, laurent_1d, scalar_form,
    ConnectionMatrix, ExactParams, SingularPoint,
};
use garnier_core::hamiltonian::hamiltonians;
use garnier_core::solution::x_ring;
use garnier_core::{AlgebraError, ExactScalar, VerifyMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type S = ExactScalar;

fn r(n: i64, d: i64) -> S {
    S::ratio(n, d)
}

fn zeros() -> [S; 3] {
    [S::zero(), S::zero(), S::zero()]
}

fn ones() -> [S; 3] {
    [S::one(), S::one(), S::one()]
}

fn sample_q() -> [S; 3] {
    [r(-1, 1), r(2, 1), r(1, 2)]
}

/// The apparent-pole constant written out again from the printed formula.
fn ctilde_oracle(q: &[S; 3], p: &[S; 3], t: &[S; 3], j: usize) -> S {
    let n = |k: i64| S::from(k);
    let inv = |v: S| v.recip().unwrap();
    let (qj, pj) = (&q[j], &p[j]);
    let qj1 = qj - &S::one();
    let mut qprime = S::one();
    let mut cross = S::zero();
    for k in (0..3).filter(|&k| k != j) {
        qprime = &qprime * &(qj - &q[k]);
        cross = &cross + &(&(pj - &p[k]) * &inv(qj - &q[k]));
    }
    let a = &pj.pow(2) * &inv(&qj.pow(2) * &qj1.pow(2));
    let b = &(&(qj * pj) + &(&(&n(12) * &t[0].pow(2)) * &(&(&n(2) * qj) - &S::one()))) * &inv(&n(3) * &qj.pow(2));
    let c = &(&(&qj1 * pj) - &(&(&n(12) * &t[1].pow(2)) * &(&(&n(2) * qj) - &S::one()))) * &inv(&n(3) * &qj1.pow(2));
    let d = &(&(&n(4) * &t[2].pow(2)) * &qj.pow(3)) * &(qj - &n(2));
    &(&(&(&(&a + &b) + &c) + &cross) - &d) * &inv(qprime)
}

fn random_params(rng: &mut ChaCha8Rng) -> ([S; 3], [S; 3], [S; 3]) {
    let mut v = |lo: i64, hi: i64| r(rng.gen_range(lo..hi), rng.gen_range(1..8));
    loop {
        let q = [v(-30, 30), v(-30, 30), v(-30, 30)];
        let p = [v(-9, 10), v(-9, 10), v(-9, 10)];
        let t = [v(1, 20), v(1, 20), v(1, 20)];
        if ExactParams::new(q.clone(), p.clone(), t.clone()).is_ok() {
            return (q, p, t);
        }
    }
}

fn eta_point(c: &ConnectionMatrix, t: &[S; 3]) -> Vec<S> {
    let par = c.params();
    let eta: Vec<S> = (0..3).map(|j| ExactParams::eta_from_p(&par.q[j], &par.p[j])).collect();
    t.iter().cloned().chain(par.q.iter().cloned()).chain(eta).collect()
}

#[test]
fn matrix_shape() {
    let c = build_connection(sample_q(), zeros(), ones()).unwrap();
    let xr = x_ring();
    let x = RatFunc::var(&xr, 0);
    let f = x.pow(2).unwrap().mul(&x.sub(&RatFunc::one(&xr)).pow(2).unwrap()).recip().unwrap();
    assert!(c.entries()[0][0].is_zero());
    assert_eq!(c.f(), &f);
}

#[test]
fn coefficient_polynomials() {
    let t = [r(3, 1), r(5, 2), r(7, 3)];
    let c = build_connection(sample_q(), [r(1, 1), r(-2, 1), r(3, 1)], t.clone()).unwrap();
    // C₁(x)/(x−1)² at x = 1 gives C₁(1), C₁′(1) = 4t₁², 8t₁²
    let at1 = laurent_1d(c.c2(), &S::one(), -2, -1).unwrap();
    assert_eq!(at1, vec![&S::from(4) * &t[1].pow(2), &S::from(8) * &t[1].pow(2)]);
    // C₀(x)/x² at 0: 4t₀², −8t₀²
    let at0 = laurent_1d(c.c2(), &S::zero(), -2, -1).unwrap();
    assert_eq!(at0, vec![&S::from(4) * &t[0].pow(2), &S::from(-8) * &t[0].pow(2)]);
    // D₀(x)/x² = −1/(3x)
    assert_eq!(laurent_1d(c.d2(), &S::zero(), -2, -1).unwrap(), vec![S::zero(), r(-1, 3)]);
    assert_eq!(laurent_1d(c.d2(), &S::one(), -2, -1).unwrap(), vec![S::zero(), r(-1, 3)]);
    // every apparent pole carries residue −1 in d₂, including the third
    for q in sample_q() {
        assert_eq!(laurent_1d(c.d2(), &q, -1, -1).unwrap(), vec![r(-1, 1)]);
    }
}

#[test]
fn ctilde_matches_independent_transcription() {
    let c = build_connection(sample_q(), zeros(), ones()).unwrap();
    for j in 0..3 {
        assert_eq!(c.ctilde()[j], ctilde_oracle(&sample_q(), &zeros(), &ones(), j));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..15 {
        let (q, p, t) = random_params(&mut rng);
        let c = build_connection(q.clone(), p.clone(), t.clone()).unwrap();
        for j in 0..3 {
            assert_eq!(c.ctilde()[j], ctilde_oracle(&q, &p, &t, j));
        }
    }
}

#[test]
fn scalar_form_definition() {
    let c = build_connection(sample_q(), [r(1, 2), r(0, 1), r(-3, 1)], [r(2, 1), r(1, 1), r(1, 3)]).unwrap();
    let xr = x_ring();
    let x = RatFunc::var(&xr, 0);
    let one = RatFunc::one(&xr);
    let logd = x.recip().unwrap().scale(&S::from(-2)).add(&x.sub(&one).recip().unwrap().scale(&S::from(-2)));
    assert_eq!(c.f().diff(0).div(c.f()).unwrap(), logd);
    let ode = scalar_form(&c).unwrap();
    assert_eq!(ode.p(), &c.d2().sub(&logd));
    assert_eq!(ode.qc(), &c.c2().mul(c.f()).neg());
    assert!(scalar_form(&c.to_w_chart().unwrap()).is_err());
}

#[test]
fn apparent_at_sample_point() {
    let c = build_connection(sample_q(), zeros(), ones()).unwrap();
    for j in 0..3 {
        let rep = check_apparent(&c, j).unwrap();
        assert!(rep.apparent, "q{}", j + 1);
        assert_eq!(rep.p_residue, "-1");
        assert_eq!(rep.exponents, ("0".to_string(), "2".to_string()));
    }
}

#[test]
fn apparent_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..12 {
        let (q, p, t) = random_params(&mut rng);
        let c = build_connection(q, p, t).unwrap();
        for j in 0..3 {
            assert!(check_apparent(&c, j).unwrap().apparent);
        }
    }
}

#[test]
fn perturbed_constant_is_not_apparent() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let (q, p, t) = random_params(&mut rng);
        let c = build_connection(q, p, t).unwrap();
        let mut ct = c.ctilde().clone();
        ct[0] = &ct[0] + &S::one();
        let bent = c.with_ctilde(ct).unwrap();
        let rep = check_apparent(&bent, 0).unwrap();
        assert!(!rep.apparent);
        assert_ne!(rep.obstruction, "0");
    }
}

#[test]
fn colliding_poles_are_rejected() {
    let q = [r(2, 1), r(2, 1), r(1, 2)];
    assert!(matches!(build_connection(q, zeros(), ones()), Err(AlgebraError::Precondition(_))));
    let q = [r(0, 1), r(2, 1), r(1, 2)];
    assert!(build_connection(q, zeros(), ones()).is_err());
}

#[test]
fn formal_data_leading_and_residue() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for _ in 0..4 {
        let (q, p, t) = random_params(&mut rng);
        let c = build_connection(q, p, t.clone()).unwrap();
        for pt in SingularPoint::ALL {
            let fd = c.formal_data(pt, 3).unwrap();
            let ti = &t[pt.time_index()];
            assert_eq!(fd.leading, [&S::from(2) * ti, &S::from(-2) * ti]);
            assert_eq!(fd.residue, [r(-1, 6), r(-1, 6)]);
            assert_eq!(&fd.residue[0] + &fd.residue[1], r(-1, 3));
        }
    }
}

#[test]
fn theta_is_stable_under_deeper_truncation() {
    let c = build_connection(sample_q(), [r(1, 3), r(-1, 2), r(2, 1)], [r(2, 1), r(3, 2), r(1, 1)]).unwrap();
    for pt in SingularPoint::ALL {
        let a = c.formal_data(pt, 2).unwrap();
        let b = c.formal_data(pt, 4).unwrap();
        let d = c.formal_data(pt, 6).unwrap();
        assert_eq!((&a.theta_plus, &a.theta_minus), (&b.theta_plus, &b.theta_minus));
        assert_eq!((&b.theta_plus, &b.theta_minus), (&d.theta_plus, &d.theta_minus));
    }
}

#[test]
fn exact_hamiltonians_agree_with_closed_forms() {
    let c = build_connection(sample_q(), zeros(), ones()).unwrap();
    let derived = hamiltonians_at(&c, 3).unwrap();
    let pt = eta_point(&c, &ones());
    for i in 0..3 {
        assert_eq!(derived[i], hamiltonians()[i].eval(&pt).unwrap());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..6 {
        let (q, p, t) = random_params(&mut rng);
        let c = build_connection(q, p, t.clone()).unwrap();
        let derived = hamiltonians_at(&c, 3).unwrap();
        let pt = eta_point(&c, &t);
        for i in 0..3 {
            assert_eq!(derived[i], hamiltonians()[i].eval(&pt).unwrap());
        }
    }
}

#[test]
fn symbolic_rederivation_matches() {
    let out = derive_hamiltonians_from_connection(VerifyMode::Pit, 20, 42).unwrap();
    assert_eq!(out.len(), 3);
    for cmp in out {
        assert!(cmp.equal, "H_{}", cmp.i);
        let pit = cmp.pit.unwrap();
        assert!(pit.trials >= 20 && pit.failure_bound_log10 < -12.0);
    }
}

#[test]
fn p_and_eta_are_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let (q, p, _) = random_params(&mut rng);
        let eta = ExactParams::eta_from_p(&q[0], &p[0]);
        assert_eq!(ExactParams::p_from_eta(&q[0], &eta), p[0]);
    }
}
