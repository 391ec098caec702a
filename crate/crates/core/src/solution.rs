//! The algebraic solution: the cubic family whose roots are the `q_j`, the section
//! `η_j = 1/(3q_j) + 1/(3(q_j − 1))`, the reduction to elementary symmetric functions and
//! the checks that the resulting point moves by the Garnier flows.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use serde::Serialize;

use crate::algebra::{s_ring, AlgebraError, ExactScalar, FactoredFrac, MultiPoly, PolyRing, RatFunc, RelRingElem, Ring};
use crate::hamiltonian::{factor, hamiltonians, PhaseRing, ETA, Q, T};
use crate::numeric::{bits_for_digits, poly_roots, CompiledFrac, HpComplex};

/// Signs of `t_i = ±s_i^{3/2}` (principal square root).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Branch(pub [i8; 3]);

impl Branch {
    pub const PLUS: Branch = Branch([1, 1, 1]);

    pub fn sign(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn all() -> impl Iterator<Item = Branch> {
        (0..8u8).map(|m| Branch(std::array::from_fn(|i| if m & (1 << i) != 0 { -1 } else { 1 })))
    }
}

impl Default for Branch {
    fn default() -> Self {
        Branch::PLUS
    }
}

impl FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let signs: Vec<i8> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '−' => Ok(-1),
                other => Err(format!("bad branch sign '{other}'")),
            })
            .collect::<Result<_, _>>()?;
        let arr: [i8; 3] = signs.try_into().map_err(|_| format!("branch '{s}' needs exactly three signs"))?;
        Ok(Branch(arr))
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl Serialize for Branch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The ring `(x)` of the cubic.
pub fn x_ring() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["x"]).expect("name")).clone()
}

/// The ring `(t0, t1, t2, sig1, sig2, sig3)` in which symmetric expressions are written.
pub fn sigma_ring() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["t0", "t1", "t2", "sig1", "sig2", "sig3"]).expect("names")).clone()
}

pub const SIG: [usize; 3] = [3, 4, 5];

fn check_s(s: &[ExactScalar; 3]) -> Result<(), AlgebraError> {
    if s[2].is_zero() {
        return Err(AlgebraError::Precondition("s2 must be nonzero".into()));
    }
    Ok(())
}

/// `σ(s)` as rational functions of `(s0, s1, s2)`.
pub fn sigma_from_s() -> [RatFunc; 3] {
    let r = s_ring();
    let s = |i| MultiPoly::var(&r, i);
    let two_s2 = s(2).scale(&ExactScalar::from(2));
    let s1_num = (&(&s(0) - &s(1)) - &s(2).scale(&ExactScalar::from(3))).scale(&ExactScalar::from(-1));
    let s2_num = &(&s(0).scale(&ExactScalar::from(-3)) - &s(1)) + &s(2);
    let s3_num = s(0).scale(&ExactScalar::from(-1));
    [
        RatFunc::new(s1_num, two_s2.clone()).expect("nonzero"),
        RatFunc::new(s2_num, two_s2).expect("nonzero"),
        RatFunc::new(s3_num, s(2)).expect("nonzero"),
    ]
}

pub fn sigma_at(s: &[ExactScalar; 3]) -> Result<[ExactScalar; 3], AlgebraError> {
    check_s(s)?;
    let sig = sigma_from_s();
    Ok([sig[0].eval(s)?, sig[1].eval(s)?, sig[2].eval(s)?])
}

/// `Q(x; s) = x³ − σ₁x² + σ₂x − σ₃`.
pub fn cubic_at(s: &[ExactScalar; 3]) -> Result<MultiPoly, AlgebraError> {
    let [a, b, c] = sigma_at(s)?;
    let r = x_ring();
    let x = MultiPoly::var(&r, 0);
    let terms = [x.pow(3), x.pow(2).scale(&-a), x.scale(&b), MultiPoly::constant(&r, -c)];
    Ok(terms.iter().fold(MultiPoly::zero(&r), |acc, t| &acc + t))
}

/// Discriminant of a monic cubic given by its elementary symmetric values.
pub fn discriminant(sig: &[ExactScalar; 3]) -> ExactScalar {
    let [a, b, c] = sig;
    let i = |n: i64| ExactScalar::from(n);
    let t1 = &(&a.pow(2) * &b.pow(2)) - &(&i(4) * &b.pow(3));
    let t2 = &(&i(4) * &(&a.pow(3) * c)) - &(&i(18) * &(&(a * b) * c));
    &(&t1 - &t2) - &(&i(27) * &c.pow(2))
}

fn sigma_poly_disc(r: &Ring) -> MultiPoly {
    let v = |k| MultiPoly::var(r, SIG[k]);
    let n = |k: i64| ExactScalar::from(k);
    let (a, b, c) = (v(0), v(1), v(2));
    let terms = [
        (&a.pow(2) * &b.pow(2), n(1)),
        (b.pow(3), n(-4)),
        (&a.pow(3) * &c, n(-4)),
        (&(&a * &b) * &c, n(18)),
        (c.pow(2), n(-27)),
    ];
    terms.iter().fold(MultiPoly::zero(r), |acc, (p, k)| &acc + &p.scale(k))
}

/// Working ring for the reduction: the σ-ring followed by `q1, q2`.
fn work_ring() -> Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| PolyRing::new(&["t0", "t1", "t2", "sig1", "sig2", "sig3", "q1", "q2"]).expect("names")).clone()
}

/// Remainder of `p` modulo the monic relation `v^d = Σ_{k<d} rel[k] v^k`.
fn reduce_by(p: &MultiPoly, v: usize, rel: &[MultiPoly]) -> Vec<MultiPoly> {
    let d = rel.len();
    let mut c = p.coeffs_in(v);
    if c.len() <= d {
        c.resize(d, MultiPoly::zero(p.ring()));
        return c;
    }
    for k in (d..c.len()).rev() {
        let top = std::mem::replace(&mut c[k], MultiPoly::zero(p.ring()));
        if top.is_zero() {
            continue;
        }
        for (m, r) in rel.iter().enumerate() {
            if !r.is_zero() {
                let idx = k - d + m;
                c[idx] = &c[idx] + &(&top * r);
            }
        }
    }
    c.truncate(d);
    c
}

/// Rewrites a symmetric polynomial in `q1, q2, q3` (given after `q3 ↦ σ₁ − q1 − q2` in the
/// work ring) as a polynomial in σ, or reports the asymmetric remainder.
fn reduce_symmetric(p: &MultiPoly) -> Result<MultiPoly, AlgebraError> {
    let w = p.ring().clone();
    let v = |i| MultiPoly::var(&w, i);
    let (q1, s1, s2, s3) = (v(6), v(SIG[0]), v(SIG[1]), v(SIG[2]));
    // q2² = (σ₁ − q1) q2 − (σ₂ − σ₁q1 + q1²)
    let rel2 = [(&(&s2 - &(&s1 * &q1)) + &q1.pow(2)).scale(&ExactScalar::from(-1)), &s1 - &q1];
    // q1³ = σ₁q1² − σ₂q1 + σ₃
    let rel1 = [s3, s2.scale(&ExactScalar::from(-1)), s1];
    let by_q2 = reduce_by(p, 7, &rel2);
    let mut out = None;
    for (k2, c) in by_q2.iter().enumerate() {
        let by_q1 = reduce_by(c, 6, &rel1);
        for (k1, r) in by_q1.iter().enumerate() {
            if k1 == 0 && k2 == 0 {
                out = Some(r.clone());
            } else if !r.is_zero() {
                return Err(AlgebraError::NotSymmetric(format!("remainder at q1^{k1} q2^{k2} has {} terms", r.len())));
            }
        }
    }
    Ok(out.expect("constant slot"))
}

/// Rewrites a fraction symmetric under permutations of the `q` variables as a rational function
/// of `(t, σ)`. The basis must start with the twelve phase factors laid out as in
/// [`crate::hamiltonian::PhaseRing`]; variables other than `t` and `q` must not occur.
pub fn symmetrize(f: &FactoredFrac, t: [usize; 3], q: [usize; 3]) -> Result<RatFunc, AlgebraError> {
    let src = f.ring().clone();
    for v in 0..src.nvars() {
        if !t.contains(&v) && !q.contains(&v) && f.num().degree_in(v) > 0 {
            return Err(AlgebraError::Precondition(format!("expression depends on {}", src.name(v))));
        }
    }
    let e = f.den_exponents();
    if e.len() < 12 || e[12..].iter().any(|&k| k > 0) {
        return Err(AlgebraError::Precondition("denominator outside the phase factors".into()));
    }
    let basis = f.basis();
    let fam_max = |r: std::ops::Range<usize>| r.map(|k| e[k]).max().unwrap_or(0);
    let a = fam_max(3..6);
    let b = fam_max(6..9);
    let c = fam_max(9..12);
    let m = c.div_ceil(2);
    let mut num = f.num().clone();
    for k in 3..12 {
        let target = if k < 6 {
            a
        } else if k < 9 {
            b
        } else {
            2 * m
        };
        let extra = target - e[k];
        if extra > 0 {
            num = &num * &basis.factor(k).pow(extra);
        }
    }
    let w = work_ring();
    let wv = |i| MultiPoly::var(&w, i);
    let mut images = vec![MultiPoly::zero(&w); src.nvars()];
    for i in 0..3 {
        images[t[i]] = wv(i);
    }
    images[q[0]] = wv(6);
    images[q[1]] = wv(7);
    images[q[2]] = &(&wv(SIG[0]) - &wv(6)) - &wv(7);
    let reduced = reduce_symmetric(&num.compose(&w, &images))?;
    let sr = sigma_ring();
    let num_sigma = reduced.embed(&sr, &[0, 1, 2, 3, 4, 5, 0, 0]);
    let sv = |i| MultiPoly::var(&sr, i);
    let mut den = MultiPoly::one(&sr);
    for i in 0..3 {
        den = &den * &sv(i).pow(e[factor::t(i)]);
    }
    let p1 = &(&(&sv(SIG[2]) - &sv(SIG[1])) + &sv(SIG[0])) - &MultiPoly::one(&sr);
    den = &(&(&den * &sv(SIG[2]).pow(a)) * &p1.pow(b)) * &sigma_poly_disc(&sr).pow(m);
    RatFunc::new(num_sigma, den)
}

/// `η_j` on the section, `(2q_j − 1) / (3 q_j (q_j − 1))`.
pub fn section_eta(j: usize) -> FactoredFrac {
    let pr = PhaseRing::get();
    let q = pr.var(Q[j]);
    q.scale(&ExactScalar::from(2))
        .sub(&pr.int(1))
        .div_factor(factor::q(j), 1)
        .div_factor(factor::q_minus_one(j), 1)
        .scale(&ExactScalar::ratio(1, 3))
}

/// Restricts a phase-space expression to the section `η = η(q)`.
pub fn on_section(f: &FactoredFrac) -> Result<FactoredFrac, AlgebraError> {
    let mut out = f.clone();
    for j in 0..3 {
        out = out.substitute(ETA[j], &section_eta(j))?;
    }
    Ok(out)
}

/// `K^{(k)}_{t_i} = Σ_j ∂σ_k/∂q_j · ∂H_{t_i}/∂η_j`, `k ∈ 1..=3`.
pub fn build_k(k: usize, i: usize) -> Result<FactoredFrac, AlgebraError> {
    if !(1..=3).contains(&k) || i > 2 {
        return Err(AlgebraError::Precondition(format!("K index ({k}, {i}) out of range")));
    }
    let pr = PhaseRing::get();
    let h = hamiltonians()[i].expr();
    let mut acc = pr.int(0);
    for j in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&l| l != j).collect();
        let weight = match k {
            1 => pr.int(1),
            2 => pr.var(Q[others[0]]).add(&pr.var(Q[others[1]])),
            _ => pr.var(Q[others[0]]).mul(&pr.var(Q[others[1]])),
        };
        acc = acc.add(&weight.mul(&h.diff(ETA[j])));
    }
    Ok(acc)
}

/// `σ*K`: restrict to the section, then rewrite in `(t, σ)`.
pub fn pullback_by_section(kexpr: &FactoredFrac) -> Result<RatFunc, AlgebraError> {
    symmetrize(&on_section(kexpr)?, T, Q)
}

/// The nine `σ*K^{(k)}_{t_i}`, indexed `[i][k − 1]`.
pub fn sigma_pullbacks() -> Result<&'static [[RatFunc; 3]; 3], AlgebraError> {
    static CACHE: OnceLock<[[RatFunc; 3]; 3]> = OnceLock::new();
    if let Some(c) = CACHE.get() {
        return Ok(c);
    }
    let mut rows = Vec::with_capacity(3);
    for i in 0..3 {
        let mut row = Vec::with_capacity(3);
        for k in 1..=3 {
            row.push(pullback_by_section(&build_k(k, i)?)?);
        }
        rows.push(<[RatFunc; 3]>::try_from(row).expect("three entries"));
    }
    let table = <[[RatFunc; 3]; 3]>::try_from(rows).expect("three rows");
    Ok(CACHE.get_or_init(|| table))
}

/// Sends a rational function of `(t, σ)` into the relation ring with `σ = σ(s)`.
pub fn sigma_to_relring(r: &RatFunc) -> Result<RelRingElem, AlgebraError> {
    let sig = sigma_from_s();
    let images: Vec<RelRingElem> = (0..3)
        .map(RelRingElem::t)
        .chain(sig.iter().map(|g| RelRingElem::scalar(g.clone())))
        .collect();
    RelRingElem::eval_ratfunc(r, &images)
}

/// `∂σ_k/∂t_i` along the solution, via `dt_i/ds_i = 3s_i²/(2t_i)`.
pub fn sigma_derivative_in_t(k: usize, i: usize) -> RelRingElem {
    let sig = sigma_from_s();
    let r = s_ring();
    let si = RatFunc::var(&r, i);
    let factor = RatFunc::int(&r, 2).div(&si.pow(2).expect("power").scale(&ExactScalar::from(3))).expect("nonzero");
    RelRingElem::t(i).scale(&sig[k - 1].diff(i).mul(&factor))
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaEquation {
    pub i: usize,
    pub k: usize,
    pub rhs_sigma: String,
    pub zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaSystemReport {
    pub equations: Vec<SigmaEquation>,
    pub all_zero: bool,
    pub seconds: f64,
}

/// All nine equations `∂σ_k/∂t_i = σ*K^{(k)}_{t_i}` in the relation ring.
pub fn verify_sigma_system() -> Result<SigmaSystemReport, AlgebraError> {
    let start = Instant::now();
    let table = sigma_pullbacks()?;
    let mut equations = Vec::new();
    for i in 0..3 {
        for k in 1..=3 {
            let rhs = &table[i][k - 1];
            let residual = sigma_derivative_in_t(k, i).sub(&sigma_to_relring(rhs)?);
            let zero = residual.is_zero();
            equations.push(SigmaEquation {
                i,
                k,
                rhs_sigma: rhs.to_string(),
                zero,
                residual: (!zero).then(|| residual.to_string()),
            });
        }
    }
    let all_zero = equations.iter().all(|e| e.zero);
    Ok(SigmaSystemReport { equations, all_zero, seconds: start.elapsed().as_secs_f64() })
}

/// A numeric point of the solution at given `s`, branch and precision.
#[derive(Debug, Clone)]
pub struct SolutionPoint {
    pub s: [ExactScalar; 3],
    pub branch: Branch,
    pub prec: u32,
    pub t: [HpComplex; 3],
    pub q: [HpComplex; 3],
    pub eta: [HpComplex; 3],
}

impl SolutionPoint {
    /// Roots sorted by real part, then imaginary part.
    pub fn new(s: &[ExactScalar; 3], branch: Branch, digits: u32) -> Result<Self, AlgebraError> {
        check_s(s)?;
        if s[0].is_zero() || s[1].is_zero() {
            return Err(AlgebraError::Precondition("s0 = 0 or s1 = 0 puts a root at 0 or 1".into()));
        }
        let sig = sigma_at(s)?;
        if discriminant(&sig).is_zero() {
            return Err(AlgebraError::RootCollision(format!("cubic has a repeated root at s = ({}, {}, {})", s[0], s[1], s[2])));
        }
        let prec = bits_for_digits(digits);
        let c = |x: &ExactScalar| HpComplex::from_exact(x, prec);
        let coeffs = [c(&-sig[2].clone()), c(&sig[1]), c(&-sig[0].clone()), HpComplex::one(prec)];
        let mut roots = poly_roots(&coeffs, 400);
        roots.sort_by(|a, b| {
            let (ar, ai) = a.to_pair();
            let (br, bi) = b.to_pair();
            ar.total_cmp(&br).then(ai.total_cmp(&bi))
        });
        let q: [HpComplex; 3] = roots.try_into().map_err(|_| AlgebraError::Precondition("cubic root count".into()))?;
        let one = HpComplex::one(prec);
        let three = HpComplex::from_i64(3, prec);
        let eta = std::array::from_fn(|j| {
            let a = (&three * &q[j]).recip();
            let b = (&three * &(&q[j] - &one)).recip();
            &a + &b
        });
        let t = std::array::from_fn(|i| {
            let si = c(&s[i]);
            let v = &si * &si.sqrt();
            if branch.sign(i) < 0 {
                -&v
            } else {
                v
            }
        });
        Ok(SolutionPoint { s: s.clone(), branch, prec, t, q, eta })
    }

    /// `(t, q, η)` in phase-ring variable order.
    pub fn phase_coords(&self) -> Vec<HpComplex> {
        self.t.iter().chain(&self.q).chain(&self.eta).cloned().collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub i: usize,
    pub j: usize,
    pub value: String,
    pub log10: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaReport {
    pub s: [String; 3],
    pub branch: Branch,
    pub digits: u32,
    pub roots: Vec<(String, String)>,
    pub eta_residuals: Vec<Residual>,
    pub q_residuals: Vec<Residual>,
    /// `None` when every residual is exactly zero at working precision.
    pub max_log10: Option<f64>,
    pub threshold_log10: f64,
    pub pass: bool,
    pub seconds: f64,
}

fn residual(i: usize, j: usize, v: &HpComplex) -> Residual {
    let l = v.log10_abs();
    Residual { i, j, value: v.abs().to_sci(6), log10: l.is_finite().then_some(l) }
}

/// Checks `∂η_j/∂t_i = −∂H_{t_i}/∂q_j` (and the `q` half) along the solution at precision `digits`,
/// with the left sides from implicit differentiation of `Q(q_j; s) = 0`.
pub fn verify_eta_equations_numeric(
    s: &[ExactScalar; 3],
    digits: u32,
    branch: Branch,
) -> Result<EtaReport, AlgebraError> {
    let start = Instant::now();
    let pt = SolutionPoint::new(s, branch, digits)?;
    let prec = pt.prec;
    let coords = pt.phase_coords();
    let sig = sigma_at(s)?;
    let sig_s = sigma_from_s();
    let c = |x: &ExactScalar| HpComplex::from_exact(x, prec);
    let three = HpComplex::from_i64(3, prec);
    let two = HpComplex::from_i64(2, prec);
    let one = HpComplex::one(prec);
    let mut eta_residuals = Vec::new();
    let mut q_residuals = Vec::new();
    for i in 0..3 {
        let h = hamiltonians()[i].expr();
        let dsig: Vec<HpComplex> = sig_s.iter().map(|g| g.diff(i).eval(s).map(|v| c(&v))).collect::<Result<_, _>>()?;
        let si = c(&s[i]);
        let ds_dt = &(&two * &pt.t[i]) / &(&three * &(&si * &si));
        for j in 0..3 {
            let x = &pt.q[j];
            let x2 = x * x;
            let q_s = &(&(-&(&dsig[0] * &x2)) + &(&dsig[1] * x)) - &dsig[2];
            let q_x = &(&(&three * &x2) - &(&(&two * &c(&sig[0])) * x)) + &c(&sig[1]);
            let dq_dt = &(-&(&q_s / &q_x)) * &ds_dt;
            let xm1 = x - &one;
            let deta_dq = -&(&(&three * &x2).recip() + &(&three * &(&xm1 * &xm1)).recip());
            let deta_dt = &deta_dq * &dq_dt;
            let dh_dq = CompiledFrac::new(&h.diff(Q[j]), prec).eval(&coords)?;
            let dh_deta = CompiledFrac::new(&h.diff(ETA[j]), prec).eval(&coords)?;
            eta_residuals.push(residual(i, j, &(&deta_dt + &dh_dq)));
            q_residuals.push(residual(i, j, &(&dq_dt - &dh_deta)));
        }
    }
    let max_log10 = eta_residuals.iter().chain(&q_residuals).filter_map(|r| r.log10).reduce(f64::max);
    let threshold_log10 = -(digits as f64 - 10.0);
    let pass = max_log10.is_none_or(|m| m < threshold_log10);
    Ok(EtaReport {
        s: std::array::from_fn(|i| s[i].to_string()),
        branch,
        digits,
        roots: pt.q.iter().map(|r| r.to_strings(digits as usize)).collect(),
        eta_residuals,
        q_residuals,
        max_log10,
        threshold_log10,
        pass,
        seconds: start.elapsed().as_secs_f64(),
    })
}
