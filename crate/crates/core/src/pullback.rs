//! Pull-back of the fixed equation `u″ + 2/(3z) u′ − u/z = 0` along the degree-six cover
//! `z = φ_s(x)` and its comparison with the connection family on the algebraic solution.

use std::sync::OnceLock;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{s_ring, AlgebraError, ExactScalar, FactoredFrac, Monomial, MultiPoly, PolyRing, RatFunc, Ring};
use crate::connection::{scalar_form, ConnRing, ConnectionMatrix, ExactParams, SymbolicConnection, P};
use crate::hamiltonian::{Q, T};
use crate::numeric::{bits_for_digits, poly_roots, HpComplex};
use crate::solution::{cubic_at, sigma_from_s, sigma_ring, symmetrize, Branch, SIG};

/// `y″ + P y′ + Qc y = 0`; the independent variable is the first variable of the ring.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarOde {
    p: RatFunc,
    qc: RatFunc,
}

impl ScalarOde {
    pub fn new(p: RatFunc, qc: RatFunc) -> Self {
        assert_eq!(p.ring(), qc.ring(), "coefficients must share a ring");
        ScalarOde { p, qc }
    }

    pub fn p(&self) -> &RatFunc {
        &self.p
    }

    pub fn qc(&self) -> &RatFunc {
        &self.qc
    }

    /// `I = Qc − P′/2 − P²/4`.
    pub fn invariant(&self) -> RatFunc {
        ode_invariant(self)
    }

    /// The equation satisfied by `v` where `y = g·v`.
    pub fn gauge(&self, g: &RatFunc) -> Result<ScalarOde, AlgebraError> {
        let l1 = g.diff(0).div(g)?;
        let l2 = g.diff(0).diff(0).div(g)?;
        let p = self.p.add(&l1.scale(&ExactScalar::from(2)));
        let qc = self.qc.add(&self.p.mul(&l1)).add(&l2);
        Ok(ScalarOde { p, qc })
    }
}

pub fn ode_invariant(o: &ScalarOde) -> RatFunc {
    let half = ExactScalar::ratio(1, 2);
    let quarter = ExactScalar::ratio(1, 4);
    o.qc.sub(&o.p.diff(0).scale(&half)).sub(&o.p.mul(&o.p).scale(&quarter))
}

pub fn z_ring() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["z"]).expect("name")).clone()
}

/// `x` followed by `s0, s1, s2`.
pub fn xs_ring() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["x", "s0", "s1", "s2"]).expect("names")).clone()
}

/// The fixed equation `u″ + 2/(3z) u′ − u/z = 0`.
pub fn fixed_system() -> ScalarOde {
    let r = z_ring();
    let z = RatFunc::var(&r, 0);
    let p = RatFunc::constant(&r, ExactScalar::ratio(2, 3)).div(&z).expect("z != 0");
    let qc = RatFunc::int(&r, -1).div(&z).expect("z != 0");
    ScalarOde::new(p, qc)
}

/// A rational map `z = φ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalCover {
    phi: RatFunc,
}

impl RationalCover {
    pub fn new(phi: RatFunc) -> Self {
        RationalCover { phi }
    }

    pub fn phi(&self) -> &RatFunc {
        &self.phi
    }

    /// Degree in `x`: the larger of numerator and denominator degrees.
    pub fn degree(&self) -> u32 {
        u32::from(self.phi.num().degree_in(0).max(self.phi.den().degree_in(0)))
    }
}

fn inner_quadratic(r: &Ring, s: [MultiPoly; 3]) -> MultiPoly {
    let x = MultiPoly::var(r, 0);
    let one = MultiPoly::one(r);
    let a = &(&s[2] * &x) * &(&x - &one);
    let b = &s[1] * &x;
    let c = &s[0] * &(&one - &x);
    &(&a + &b) + &c
}

fn cover_from(r: &Ring, s: [MultiPoly; 3]) -> Result<RationalCover, AlgebraError> {
    let x = MultiPoly::var(r, 0);
    let xm1 = &x - &MultiPoly::one(r);
    let num = inner_quadratic(r, s).pow(3);
    let den = &x.pow(2) * &xm1.pow(2);
    Ok(RationalCover { phi: RatFunc::new(num, den)? })
}

/// `φ_s(x) = (s₂x(x−1) + s₁x + s₀(1−x))³ / (x²(x−1)²)` with symbolic `s`.
pub fn cover_phi_symbolic() -> RationalCover {
    let r = xs_ring();
    cover_from(&r, std::array::from_fn(|i| MultiPoly::var(&r, i + 1))).expect("nonzero denominator")
}

/// The same cover at an exact `s`.
pub fn cover_phi(s: &[ExactScalar; 3]) -> Result<RationalCover, AlgebraError> {
    if s[2].is_zero() {
        return Err(AlgebraError::Precondition("s2 must be nonzero".into()));
    }
    let r = crate::solution::x_ring();
    cover_from(&r, std::array::from_fn(|i| MultiPoly::constant(&r, s[i].clone())))
}

/// Pull-back of a univariate equation along `z = φ(x)`: for `v(x) = u(φ(x))`,
/// `P = p(φ)φ′ − φ″/φ′` and `Qc = q(φ)φ′²`.
pub fn pullback_of(base: &ScalarOde, cover: &RationalCover) -> Result<ScalarOde, AlgebraError> {
    let phi = cover.phi();
    let target = phi.ring().clone();
    let d1 = phi.diff(0);
    if d1.is_zero() {
        return Err(AlgebraError::Precondition("constant cover".into()));
    }
    let d2 = d1.diff(0);
    let images = std::slice::from_ref(phi);
    let p = base.p.compose(&target, images)?.mul(&d1).sub(&d2.div(&d1)?);
    let qc = base.qc.compose(&target, images)?.mul(&d1).mul(&d1);
    Ok(ScalarOde { p, qc })
}

pub fn pullback_ode(cover: &RationalCover) -> Result<ScalarOde, AlgebraError> {
    pullback_of(&fixed_system(), cover)
}

/// Exact rational roots of a univariate polynomial, found by rounding high-precision numeric
/// roots through continued fractions and confirming each candidate exactly.
pub fn rational_roots(p: &MultiPoly) -> Vec<ExactScalar> {
    let coeffs: Vec<ExactScalar> =
        p.coeffs_in(0).iter().map(|c| c.as_constant().unwrap_or_else(ExactScalar::zero)).collect();
    if coeffs.len() < 2 {
        return Vec::new();
    }
    let prec = bits_for_digits(120);
    let hp: Vec<HpComplex> = coeffs.iter().map(|c| HpComplex::from_exact(c, prec)).collect();
    let mut out: Vec<ExactScalar> = Vec::new();
    for z in poly_roots(&hp, 600) {
        let (re, im) = z.to_pair();
        if im.abs() > 1e-30 * (1.0 + re.abs()) {
            continue;
        }
        if let Some(c) = rationalize(&z, p) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out.sort_by(|a, b| a.as_rational().cmp(b.as_rational()));
    out
}

fn rationalize(z: &HpComplex, p: &MultiPoly) -> Option<ExactScalar> {
    let target = z.re.to_exact();
    // continued-fraction convergents of the decimal approximation
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = target.as_rational().clone();
    for _ in 0..200 {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        let cand = ExactScalar::new(h2.clone(), k2.clone()).ok()?;
        if p.eval(std::slice::from_ref(&cand)).is_zero() {
            return Some(cand);
        }
        let frac = &rest - num_rational::BigRational::from_integer(a);
        if frac.is_zero() {
            return None;
        }
        rest = num_rational::BigRational::from_integer(BigInt::one()) / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub s: Option<[String; 3]>,
    pub branch: Branch,
    pub symbolic: bool,
    pub q: Option<Vec<String>>,
    pub zero: bool,
    /// `(P_family − P_pullback)/2`, the logarithmic derivative of the scalar gauge.
    pub gauge_log_derivative: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<String>,
    pub seconds: f64,
}

fn exact_sqrt(v: &ExactScalar) -> Option<ExactScalar> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    let c = ExactScalar::new(n, d).ok()?;
    (c.pow(2) == *v).then_some(c)
}

/// Exact comparison at an `s` whose cubic splits over the rationals.
pub fn verify_pullback_exact(s: &[ExactScalar; 3], branch: Branch) -> Result<PullbackReport, AlgebraError> {
    let start = Instant::now();
    let cubic = cubic_at(s)?;
    let roots = rational_roots(&cubic);
    if roots.len() != 3 {
        return Err(AlgebraError::Precondition(format!(
            "Q(x; s) has {} distinct rational roots; use the symbolic comparison",
            roots.len()
        )));
    }
    let q: [ExactScalar; 3] = roots.try_into().expect("three roots");
    let zero = ExactScalar::zero;
    let t_sq: [ExactScalar; 3] = std::array::from_fn(|i| s[i].pow(3));
    // t itself is rational only when every s_i is a square; otherwise t enters through t² alone
    let t: Option<[ExactScalar; 3]> = (0..3)
        .map(|i| exact_sqrt(&s[i]).map(|r| if branch.sign(i) < 0 { -(&r * &s[i]) } else { &r * &s[i] }))
        .collect::<Option<Vec<_>>>()
        .map(|v| v.try_into().expect("three"));
    let params = match t {
        Some(t) => ExactParams::new(q.clone(), [zero(), zero(), zero()], t)?,
        None => ExactParams::from_t_squared(q.clone(), [zero(), zero(), zero()], t_sq)?,
    };
    let family = scalar_form(&ConnectionMatrix::from_params(params)?)?;
    let pulled = pullback_ode(&cover_phi(s)?)?;
    let diff = family.invariant().sub(&pulled.invariant());
    let g = family.p().sub(pulled.p()).scale(&ExactScalar::ratio(1, 2));
    Ok(PullbackReport {
        s: Some(std::array::from_fn(|i| s[i].to_string())),
        branch,
        symbolic: false,
        q: Some(q.iter().map(ToString::to_string).collect()),
        zero: diff.is_zero(),
        gauge_log_derivative: g.to_string(),
        difference: (!diff.is_zero()).then(|| diff.to_string()),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `x`, `t`, `σ`.
fn xts_ring() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["x", "t0", "t1", "t2", "sig1", "sig2", "sig3"]).expect("names")).clone()
}

/// `x`, `s`, `σ`.
fn xss_ring() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["x", "s0", "s1", "s2", "sig1", "sig2", "sig3"]).expect("names")).clone()
}

/// The scalar form of the family at `p = 0` with `q` the roots of `x³ − σ₁x² + σ₂x − σ₃`,
/// over `(x, t, σ)`.
pub fn family_scalar_form_sigma() -> Result<ScalarOde, AlgebraError> {
    let r = xts_ring();
    let v = |i| RatFunc::var(&r, i);
    let k = |n: i64, d: i64| RatFunc::constant(&r, ExactScalar::ratio(n, d));
    let x = v(0);
    let one = k(1, 1);
    let xm1 = x.sub(&one);
    let (s1, s2, s3) = (v(4), v(5), v(6));
    let cubic = x.pow(3)?.sub(&s1.mul(&x.pow(2)?)).add(&s2.mul(&x)).sub(&s3);
    let d2 = k(-1, 3).div(&x)?.add(&k(-1, 3).div(&xm1)?).sub(&cubic.diff(0).div(&cubic)?);
    let t_sq = |i: usize| v(1 + i).pow(2).expect("power");
    let c0 = t_sq(0).mul(&k(4, 1)).mul(&one.sub(&x.mul(&k(2, 1))));
    let c1 = t_sq(1).mul(&k(4, 1)).mul(&x.mul(&k(2, 1)).sub(&one));
    let mut c2 = c0.div(&x.pow(2)?)?.add(&c1.div(&xm1.pow(2)?)?);
    // the whole polynomial part at p = 0, rewritten symmetrically
    let cr = ConnRing::get();
    let sym = SymbolicConnection::get();
    let zero_p = FactoredFrac::zero(cr.basis());
    let to_xts: Vec<usize> = vec![1, 2, 3, 4, 5, 6];
    for (deg, coeff) in sym.entries[1][0].poly.iter().enumerate() {
        let mut c = coeff.clone();
        for j in 0..3 {
            c = c.substitute(P[j], &zero_p)?;
        }
        let sig = symmetrize(&c, T, Q)?;
        let num = sig.num().embed(&r, &to_xts);
        let den = sig.den().embed(&r, &to_xts);
        c2 = c2.add(&RatFunc::new(num, den)?.mul(&x.pow(deg as i32)?));
    }
    let f = one.div(&x.pow(2)?.mul(&xm1.pow(2)?))?;
    let p = d2.sub(&f.diff(0).div(&f)?);
    let qc = c2.mul(&f).neg();
    Ok(ScalarOde::new(p, qc))
}

/// Rewrites `t_i^{2k}` as `s_i^{3k}`; odd powers of `t` are rejected.
fn t_squared_to_s_cubed(p: &MultiPoly, target: &Ring) -> Result<MultiPoly, AlgebraError> {
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        let mut e = [0u16; 7];
        e[0] = m.exp(0);
        for i in 0..3 {
            let ti = m.exp(1 + i);
            if ti % 2 == 1 {
                return Err(AlgebraError::Precondition("odd power of t in a t²-only expression".into()));
            }
            e[1 + i] = ti / 2 * 3;
        }
        for k in 4..7 {
            e[k] = m.exp(k);
        }
        terms.push((Monomial::from_exps(&e), c.clone()));
    }
    Ok(MultiPoly::from_terms(target, terms))
}

/// Sends a function of `(x, t, σ)` that depends on `t` only through `t²` to `(x, s)` on the solution.
pub fn onto_solution(r: &RatFunc) -> Result<RatFunc, AlgebraError> {
    let mid = xss_ring();
    let num = t_squared_to_s_cubed(r.num(), &mid)?;
    let den = t_squared_to_s_cubed(r.den(), &mid)?;
    let target = xs_ring();
    let sig = sigma_from_s();
    let mut images: Vec<RatFunc> = (0..4).map(|i| RatFunc::var(&target, i)).collect();
    for g in &sig {
        images.push(g.embed_by_name(&target)?);
    }
    RatFunc::new(num, den)?.compose(&target, &images)
}

/// Symbolic comparison at the level of elementary symmetric functions.
pub fn verify_pullback_symbolic() -> Result<PullbackReport, AlgebraError> {
    let start = Instant::now();
    let family = family_scalar_form_sigma()?;
    let fam_inv = onto_solution(&family.invariant())?;
    let pulled = pullback_ode(&cover_phi_symbolic())?;
    let diff = fam_inv.sub(&pulled.invariant());
    let g = onto_solution(family.p())?.sub(pulled.p()).scale(&ExactScalar::ratio(1, 2));
    Ok(PullbackReport {
        s: None,
        branch: Branch::PLUS,
        symbolic: true,
        q: None,
        zero: diff.is_zero(),
        gauge_log_derivative: g.to_string(),
        difference: (!diff.is_zero()).then(|| diff.to_string()),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// A point `s` on which the cubic splits over the rationals, built from two chosen roots:
/// the third root is fixed by `σ₂ = 2σ₃ − σ₁ + 2`, then `s ∝ (−σ₃, 2σ₁ − σ₃ − 3, 1)`.
pub fn split_point(q1: &ExactScalar, q2: &ExactScalar, scale: &ExactScalar) -> Result<[ExactScalar; 3], AlgebraError> {
    let one = ExactScalar::one();
    let two = ExactScalar::from(2);
    let den = &(&(q1 + q2) - &(&two * &(q1 * q2))) + &one;
    if den.is_zero() || scale.is_zero() {
        return Err(AlgebraError::Precondition("degenerate choice of roots".into()));
    }
    let numer = &(&(&(q1 * q2) + q1) + q2) - &two;
    let q3 = -(&numer * &den.recip()?);
    let s1v = &(q1 + q2) + &q3;
    let s3v = &(q1 * q2) * &q3;
    let r = [-s3v.clone(), &(&(&two * &s1v) - &s3v) - &ExactScalar::from(3), one];
    Ok(std::array::from_fn(|i| &r[i] * scale))
}

/// The ring of `s` for callers that need it alongside the covers.
pub fn s_variables() -> Ring {
    s_ring()
}

/// `σ` variables of [`sigma_ring`], re-exported for the CLI's symbolic emitters.
pub fn sigma_variables() -> (Ring, [usize; 3]) {
    (sigma_ring(), SIG)
}
