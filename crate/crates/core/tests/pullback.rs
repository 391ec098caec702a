use garnier_core::algebra::{MultiPoly, PolyRing, RatFunc};
use garnier_core::connection::{build_connection, scalar_form};
use garnier_core::pullback::{
    cover_phi, cover_phi_symbolic, fixed_system, ode_invariant, pullback_ode, split_point, verify_pullback_exact,
    verify_pullback_symbolic, z_ring, RationalCover, ScalarOde,
};
use garnier_core::solution::{x_ring, Branch};
use garnier_core::ExactScalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type S = ExactScalar;

fn r(n: i64, d: i64) -> S {
    S::ratio(n, d)
}

fn ones() -> [S; 3] {
    [S::one(), S::one(), S::one()]
}

/// Strips every power of `f` from `p` and returns the cofactor.
fn strip(mut p: MultiPoly, f: &MultiPoly) -> MultiPoly {
    while let Some(q) = p.div_exact(f) {
        if q.total_degree() == p.total_degree() {
            break;
        }
        p = q;
    }
    p
}

#[test]
fn cover_degree_and_shape() {
    assert_eq!(cover_phi_symbolic().degree(), 6);
    let c = cover_phi(&ones()).unwrap();
    assert_eq!(c.degree(), 6);
    assert_eq!(c.phi().num().degree_in(0), 6);
    assert_eq!(c.phi().den().degree_in(0), 4);
    assert!(cover_phi(&[S::one(), S::one(), S::zero()]).is_err());
}

#[test]
fn cover_has_a_double_pole_at_zero() {
    let s = [r(2, 1), r(-3, 1), r(5, 1)];
    let c = cover_phi(&s).unwrap();
    let z = [S::zero()];
    assert!(c.phi().den().eval(&z).is_zero());
    assert_eq!(c.phi().num().eval(&z), s[0].pow(3));
    let x = MultiPoly::var(&x_ring(), 0);
    let rest = c.phi().den().div_exact(&x.pow(2)).unwrap();
    assert!(!rest.eval(&z).is_zero());
}

#[test]
fn zeros_of_cover_are_triple() {
    let xr = x_ring();
    let x = MultiPoly::var(&xr, 0);
    let one = MultiPoly::one(&xr);
    for s in [ones(), [r(2, 1), r(-3, 1), r(5, 1)], [r(1, 3), r(7, 2), r(-4, 1)]] {
        let c = cover_phi(&s).unwrap();
        let k = |v: &S| MultiPoly::constant(&xr, v.clone());
        let inner = &(&(&k(&s[2]) * &(&x * &(&x - &one))) + &(&k(&s[1]) * &x)) + &(&k(&s[0]) * &(&one - &x));
        let cube = inner.pow(3);
        let ratio = RatFunc::new(c.phi().num().clone(), cube).unwrap();
        assert!(ratio.as_constant().is_some());
    }
}

#[test]
fn identity_cover_returns_fixed_system() {
    let id = RationalCover::new(RatFunc::var(&z_ring(), 0));
    assert_eq!(pullback_ode(&id).unwrap(), fixed_system());
}

#[test]
fn fixed_system_invariant() {
    let zr = z_ring();
    let z = RatFunc::var(&zr, 0);
    let expect = z.recip().unwrap().neg().add(&z.pow(-2).unwrap().scale(&r(2, 9)));
    assert_eq!(ode_invariant(&fixed_system()), expect);
}

#[test]
fn invariant_without_first_order_term() {
    let zr = z_ring();
    let z = RatFunc::var(&zr, 0);
    let qc = z.pow(3).unwrap().add(&RatFunc::int(&zr, 2)).div(&z.sub(&RatFunc::int(&zr, 5))).unwrap();
    let ode = ScalarOde::new(RatFunc::zero(&zr), qc.clone());
    assert_eq!(ode_invariant(&ode), qc);
}

#[test]
fn invariant_is_gauge_independent() {
    let zr = PolyRing::new(&["z"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let rand_rat = |rng: &mut ChaCha8Rng, deg: u32| {
        let z = MultiPoly::var(&zr, 0);
        let mut poly = || (0..=deg).fold(MultiPoly::zero(&zr), |acc, k| &acc + &z.pow(k).scale(&S::from(rng.gen_range(-5i64..6))));
        let num = poly();
        let mut den = poly();
        if den.is_zero() {
            den = MultiPoly::one(&zr);
        }
        RatFunc::new(num, den).unwrap()
    };
    let mut done = 0;
    while done < 25 {
        let p = rand_rat(&mut rng, 2);
        let qc = rand_rat(&mut rng, 2);
        let g = rand_rat(&mut rng, 2);
        if g.is_zero() {
            continue;
        }
        let ode = ScalarOde::new(p, qc);
        let gauged = ode.gauge(&g).unwrap();
        assert_eq!(ode_invariant(&gauged), ode_invariant(&ode));
        done += 1;
    }
}

#[test]
fn pulled_back_poles_are_accounted_for() {
    let xr = x_ring();
    let x = MultiPoly::var(&xr, 0);
    let one = MultiPoly::one(&xr);
    let pulled = pullback_ode(&cover_phi(&ones()).unwrap()).unwrap();
    // inner factor at s = (1,1,1) is x² − x + 1
    let inner = &(&x.pow(2) - &x) + &one;
    let mut den = pulled.qc().den().clone();
    for f in [x.clone(), &x - &one, inner] {
        den = strip(den, &f);
    }
    assert!(den.is_constant());
}

#[test]
fn pullback_matches_family_by_direct_computation() {
    let q = [r(-1, 1), r(1, 2), r(2, 1)];
    let zero = [S::zero(), S::zero(), S::zero()];
    let family = scalar_form(&build_connection(q, zero, ones()).unwrap()).unwrap();
    let pulled = pullback_ode(&cover_phi(&ones()).unwrap()).unwrap();
    assert_eq!(ode_invariant(&family), ode_invariant(&pulled));
}

#[test]
fn exact_coincidence_on_every_branch() {
    for b in Branch::all() {
        let rep = verify_pullback_exact(&ones(), b).unwrap();
        assert!(rep.zero, "branch {b}");
        assert!(rep.difference.is_none());
    }
}

#[test]
fn exact_coincidence_at_split_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    while done < 5 {
        let q1 = r(rng.gen_range(-9..10), rng.gen_range(1..5));
        let q2 = r(rng.gen_range(-9..10), rng.gen_range(1..5));
        let Ok(s) = split_point(&q1, &q2, &r(rng.gen_range(1..6), 1)) else { continue };
        let Ok(rep) = verify_pullback_exact(&s, Branch::PLUS) else { continue };
        assert!(rep.zero, "s = {s:?}");
        done += 1;
    }
}

#[test]
fn exact_comparison_needs_rational_roots() {
    assert!(verify_pullback_exact(&[r(2, 1), r(3, 1), r(5, 1)], Branch::PLUS).is_err());
}

#[test]
fn symbolic_coincidence() {
    let rep = verify_pullback_symbolic().unwrap();
    assert!(rep.symbolic && rep.zero);
}
