//! The three Hamiltonians on the phase space `(t₀,t₁,t₂,q₁,q₂,q₃,η₁,η₂,η₃)`,
//! their Poisson bracket, the Hamiltonian vector fields and the compatibility check.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::pit::{random_point, DegreeBound, FnProbe};
use crate::algebra::{
    pit_zero, AlgebraError, ExactScalar, FactorBasis, FactoredFrac, MultiPoly, PitOutcome, PolyRing, RatFunc, Ring,
};
use crate::report::VerifyMode;

pub const T: [usize; 3] = [0, 1, 2];
pub const Q: [usize; 3] = [3, 4, 5];
pub const ETA: [usize; 3] = [6, 7, 8];

/// Variables `t0 t1 t2 q1 q2 q3 eta1 eta2 eta3` with the factor basis of all poles that occur.
#[derive(Debug)]
pub struct PhaseRing {
    ring: Ring,
    basis: Arc<FactorBasis>,
}

/// Index of the basis factor `t_i`, `q_j`, `q_j − 1` or `q_j − q_k` (0-based `j < k`).
pub mod factor {
    pub fn t(i: usize) -> usize {
        i
    }
    pub fn q(j: usize) -> usize {
        3 + j
    }
    pub fn q_minus_one(j: usize) -> usize {
        6 + j
    }
    pub fn diag(j: usize, k: usize) -> usize {
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        match (a, b) {
            (0, 1) => 9,
            (0, 2) => 10,
            (1, 2) => 11,
            _ => panic!("no diagonal factor for ({j}, {k})"),
        }
    }
}

impl PhaseRing {
    pub fn get() -> &'static PhaseRing {
        static PR: OnceLock<PhaseRing> = OnceLock::new();
        PR.get_or_init(|| {
            let ring = PolyRing::new(&["t0", "t1", "t2", "q1", "q2", "q3", "eta1", "eta2", "eta3"]).expect("names");
            let basis = phase_basis(&ring, T, Q).expect("linear factors");
            PhaseRing { ring, basis }
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn basis(&self) -> &Arc<FactorBasis> {
        &self.basis
    }

    pub fn var(&self, i: usize) -> FactoredFrac {
        FactoredFrac::var(&self.basis, i)
    }

    pub fn poly(&self, i: usize) -> MultiPoly {
        MultiPoly::var(&self.ring, i)
    }

    pub fn int(&self, n: i64) -> FactoredFrac {
        FactoredFrac::int(&self.basis, n)
    }

    pub fn ratio(&self, n: i64, d: i64) -> FactoredFrac {
        FactoredFrac::constant(&self.basis, ExactScalar::ratio(n, d))
    }
}

/// The twelve pole factors for a ring whose `t` and `q` variables sit at the given indices.
pub(crate) fn phase_basis(ring: &Ring, t: [usize; 3], q: [usize; 3]) -> Result<Arc<FactorBasis>, AlgebraError> {
    let v = |i| MultiPoly::var(ring, i);
    let one = MultiPoly::one(ring);
    let mut fs: Vec<MultiPoly> = t.iter().map(|&i| v(i)).collect();
    fs.extend(q.iter().map(|&i| v(i)));
    fs.extend(q.iter().map(|&i| &v(i) - &one));
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        fs.push(&v(q[a]) - &v(q[b]));
    }
    FactorBasis::new(ring, fs)
}

/// `1 / Q'(q_j) = 1 / Π_{k≠j} (q_j − q_k)` over a basis built by [`phase_basis`].
pub(crate) fn inv_qprime(basis: &Arc<FactorBasis>, q: [usize; 3], j: usize) -> FactoredFrac {
    let ring = basis.ring();
    let mut out = FactoredFrac::one(basis);
    for k in 0..3 {
        if k != j {
            let d = &MultiPoly::var(ring, q[j]) - &MultiPoly::var(ring, q[k]);
            out = out.div_poly(&d).expect("diagonal factor in basis");
        }
    }
    out
}

/// One of the three Hamiltonians.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    index: usize,
    expr: FactoredFrac,
}

impl Hamiltonian {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn expr(&self) -> &FactoredFrac {
        &self.expr
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        self.expr.to_ratfunc()
    }

    pub fn eval(&self, point: &[ExactScalar]) -> Result<ExactScalar, AlgebraError> {
        self.expr.eval(point)
    }
}

struct Builder<'a> {
    pr: &'a PhaseRing,
}

impl Builder<'_> {
    fn t(&self, i: usize) -> FactoredFrac {
        self.pr.var(T[i])
    }
    fn q(&self, j: usize) -> FactoredFrac {
        self.pr.var(Q[j])
    }
    fn eta(&self, j: usize) -> FactoredFrac {
        self.pr.var(ETA[j])
    }
    fn n(&self, k: i64) -> FactoredFrac {
        self.pr.int(k)
    }
    fn over_t(&self, f: &FactoredFrac, i: usize) -> FactoredFrac {
        f.div_factor(factor::t(i), 1)
    }
    fn inv_qp(&self, j: usize) -> FactoredFrac {
        inv_qprime(self.pr.basis(), Q, j)
    }
    fn sigma(&self) -> [FactoredFrac; 3] {
        let (a, b, c) = (self.q(0), self.q(1), self.q(2));
        let s1 = a.add(&b).add(&c);
        let s2 = a.mul(&b).add(&a.mul(&c)).add(&b.mul(&c));
        let s3 = a.mul(&b).mul(&c);
        [s1, s2, s3]
    }
    /// `1 / (q1 q2 q3)^k`
    fn inv_s3(&self, k: u32) -> FactoredFrac {
        let mut f = self.n(1);
        for j in 0..3 {
            f = f.div_factor(factor::q(j), k);
        }
        f
    }
    /// `1 / Π (q_j − 1)^k`
    fn inv_p1(&self, k: u32) -> FactoredFrac {
        let mut f = self.n(1);
        for j in 0..3 {
            f = f.div_factor(factor::q_minus_one(j), k);
        }
        f
    }
    fn sum_j(&self, term: impl Fn(usize) -> FactoredFrac) -> FactoredFrac {
        (0..3).fold(self.n(0), |acc, j| acc.add(&term(j)))
    }
}

/// The Hamiltonian `H_{t_i}`, transcribed term by term from its closed form.
pub fn build_hamiltonian(i: usize) -> Result<Hamiltonian, AlgebraError> {
    if i > 2 {
        return Err(AlgebraError::Precondition(format!("Hamiltonian index {i} not in 0..=2")));
    }
    let pr = PhaseRing::get();
    let b = Builder { pr };
    let [s1, s2, s3] = b.sigma();
    let (t0, t1, t2) = (b.t(0), b.t(1), b.t(2));
    let t0sq = t0.mul(&t0);
    let t1sq = t1.mul(&t1);
    let t2sq = t2.mul(&t2);
    let one = b.n(1);
    let expr = match i {
        0 => {
            let kinetic = b.sum_j(|j| {
                let q = b.q(j);
                let qm1 = q.sub(&one);
                let e = b.eta(j);
                let quad = q.mul(&qm1).mul(&qm1).mul(&b.inv_qp(j)).mul(&e).mul(&e);
                let lin_num = b.n(5).mul(&q).mul(&q).sub(&b.n(9).mul(&q)).add(&b.n(4));
                let lin = lin_num.mul(&b.inv_qp(j)).mul(&e).scale(&ExactScalar::ratio(1, 3));
                quad.sub(&lin)
            });
            let part1 = b.over_t(&s3.mul(&kinetic), 0).neg();
            let part2 = b.sum_j(|j| b.n(4).mul(&t0).div_factor(factor::q(j), 2));
            let part3 = b.over_t(&b.n(144).mul(&t0sq).add(&b.n(144).mul(&t1sq)).sub(&b.n(13)), 0)
                .scale(&ExactScalar::ratio(1, 36));
            let part4 = b.over_t(&b.n(4).mul(&t2sq).mul(&s3).mul(&s1.sub(&b.n(2))), 0);
            let part5 = b.n(4).mul(&t0).mul(&b.n(2).mul(&s2).sub(&s1)).mul(&b.inv_s3(1)).neg();
            let poly = s1.mul(&s1)
                .sub(&b.n(2).mul(&s1).mul(&s2))
                .add(&b.n(3).mul(&s1).mul(&s3))
                .add(&s2.mul(&s2))
                .sub(&b.n(2).mul(&s2).mul(&s3))
                .sub(&b.n(2).mul(&s1))
                .add(&b.n(2).mul(&s2))
                .sub(&b.n(4).mul(&s3))
                .add(&one);
            let part6 = b.over_t(&b.n(4).mul(&t1sq).mul(&poly).mul(&b.inv_p1(2)), 0).neg();
            part1.add(&part2).add(&part3).add(&part4).add(&part5).add(&part6)
        }
        1 => {
            let p1 = (0..3).fold(one.clone(), |acc, j| acc.mul(&b.q(j).sub(&one)));
            let kinetic = b.sum_j(|j| {
                let q = b.q(j);
                let qm1 = q.sub(&one);
                let e = b.eta(j);
                let quad = q.mul(&q).mul(&qm1).mul(&b.inv_qp(j)).mul(&e).mul(&e);
                let lin_num = q.mul(&b.n(5).mul(&q).sub(&one));
                let lin = lin_num.mul(&b.inv_qp(j)).mul(&e).scale(&ExactScalar::ratio(1, 3));
                quad.sub(&lin)
            });
            let part1 = b.over_t(&p1.mul(&kinetic), 1).neg();
            let part2 = b.sum_j(|j| b.n(4).mul(&t1).div_factor(factor::q_minus_one(j), 2));
            let part3 = b.over_t(&b.n(144).mul(&t0sq).add(&b.n(144).mul(&t1sq)).sub(&b.n(13)), 1)
                .scale(&ExactScalar::ratio(1, 36));
            let part4 = b.over_t(
                &b.n(4).mul(&t2sq).mul(&s1.sub(&s2).add(&s3).sub(&one)).mul(&s1.sub(&one)),
                1,
            );
            let part5 = b.n(4).mul(&t1).mul(&b.n(2).mul(&s2).sub(&b.n(3).mul(&s1)).add(&b.n(3))).mul(&b.inv_p1(1));
            let poly = s1.mul(&s2)
                .sub(&s1.mul(&s3))
                .sub(&s2.mul(&s2))
                .add(&b.n(2).mul(&s2).mul(&s3))
                .sub(&s2)
                .add(&s3);
            let part6 = b.over_t(&b.n(4).mul(&t0sq).mul(&poly).mul(&b.inv_s3(2)), 1).neg();
            part1.add(&part2).add(&part3).add(&part4).add(&part5).add(&part6)
        }
        _ => {
            let kinetic = b.sum_j(|j| {
                let q = b.q(j);
                let qm1 = q.sub(&one);
                let e = b.eta(j);
                let quad = q.mul(&q).mul(&qm1).mul(&qm1).mul(&b.inv_qp(j)).mul(&e).mul(&e);
                let lin_num = q.mul(&b.n(2).mul(&q).mul(&q).sub(&b.n(3).mul(&q)).add(&one));
                let lin = lin_num.mul(&b.inv_qp(j)).mul(&e).scale(&ExactScalar::ratio(1, 3));
                quad.sub(&lin)
            });
            let part1 = b.over_t(&kinetic, 2).neg();
            let part2 = b.n(4).mul(&t2).mul(&s1.mul(&s1).sub(&b.n(2).mul(&s1)).sub(&s2).add(&one));
            let part3 = b.over_t(&one, 2).scale(&ExactScalar::ratio(-1, 36));
            let part4 = b.over_t(&b.n(4).mul(&t0sq).mul(&b.n(2).mul(&s3).sub(&s2)).mul(&b.inv_s3(2)), 2).neg();
            let part5 = b.over_t(
                &b.n(4).mul(&t1sq).mul(&b.n(2).mul(&s3).sub(&s2).add(&one)).mul(&b.inv_p1(2)),
                2,
            );
            part1.add(&part2).add(&part3).add(&part4).add(&part5)
        }
    };
    Ok(Hamiltonian { index: i, expr })
}

/// All three Hamiltonians, built once.
pub fn hamiltonians() -> &'static [Hamiltonian; 3] {
    static HS: OnceLock<[Hamiltonian; 3]> = OnceLock::new();
    HS.get_or_init(|| std::array::from_fn(|i| build_hamiltonian(i).expect("valid index")))
}

/// `{f, g} = Σ_k (∂f/∂q_k ∂g/∂η_k − ∂g/∂q_k ∂f/∂η_k)`.
pub fn poisson(f: &FactoredFrac, g: &FactoredFrac) -> FactoredFrac {
    let mut acc = FactoredFrac::zero(f.basis());
    for k in 0..3 {
        let a = f.diff(Q[k]).mul(&g.diff(ETA[k]));
        let b = g.diff(Q[k]).mul(&f.diff(ETA[k]));
        acc = acc.add(&a.sub(&b));
    }
    acc
}

/// The same bracket on plain rational functions of the phase ring.
pub fn poisson_ratfunc(f: &RatFunc, g: &RatFunc) -> RatFunc {
    let mut acc = RatFunc::zero(f.ring());
    for k in 0..3 {
        let a = f.diff(Q[k]).mul(&g.diff(ETA[k]));
        let b = g.diff(Q[k]).mul(&f.diff(ETA[k]));
        acc = acc.add(&a.sub(&b));
    }
    acc
}

/// `(∂H/∂η₁, ∂H/∂η₂, ∂H/∂η₃, −∂H/∂q₁, −∂H/∂q₂, −∂H/∂q₃)`.
pub fn vector_field(i: usize) -> Result<[FactoredFrac; 6], AlgebraError> {
    let h = build_hamiltonian(i)?;
    Ok(vector_field_of(h.expr()))
}

pub fn vector_field_of(h: &FactoredFrac) -> [FactoredFrac; 6] {
    std::array::from_fn(|k| if k < 3 { h.diff(ETA[k]) } else { h.diff(Q[k - 3]).neg() })
}

/// Images of the phase variables under a permutation of the pairs `(q_j, η_j)`.
pub fn pair_permutation_images(perm: [usize; 3]) -> Vec<MultiPoly> {
    let pr = PhaseRing::get();
    let mut images: Vec<MultiPoly> = (0..9).map(|i| pr.poly(i)).collect();
    for j in 0..3 {
        images[Q[j]] = pr.poly(Q[perm[j]]);
        images[ETA[j]] = pr.poly(ETA[perm[j]]);
    }
    images
}

pub fn permute_pairs(f: &FactoredFrac, perm: [usize; 3]) -> Result<FactoredFrac, AlgebraError> {
    f.transport(PhaseRing::get().basis(), &pair_permutation_images(perm))
}

/// Outcome of one compatibility check.
#[derive(Debug, Clone, Serialize)]
pub struct CompatReport {
    pub i: usize,
    pub j: usize,
    pub mode: VerifyMode,
    pub zero: bool,
    pub pit: Option<PitOutcome>,
    /// Value at the first sample point of the variant with `−{H_i, H_j}`, which does not vanish.
    pub minus_bracket_value: Option<String>,
    pub seconds: f64,
}

/// Partial derivatives of one Hamiltonian, kept for repeated evaluation.
struct Partials {
    dt: [FactoredFrac; 3],
    dq: [FactoredFrac; 3],
    deta: [FactoredFrac; 3],
}

impl Partials {
    fn of(h: &FactoredFrac) -> Self {
        Partials {
            dt: std::array::from_fn(|k| h.diff(T[k])),
            dq: std::array::from_fn(|k| h.diff(Q[k])),
            deta: std::array::from_fn(|k| h.diff(ETA[k])),
        }
    }
}

/// Combined-denominator degree bound for a sum of products of factored fractions.
pub(crate) fn sum_of_products_bound(terms: &[Vec<&FactoredFrac>]) -> DegreeBound {
    let n = terms[0][0].den_exponents().len();
    let term_exps: Vec<(u32, Vec<u32>)> = terms
        .iter()
        .map(|fs| {
            let mut e = vec![0u32; n];
            let mut d = 0;
            for f in fs {
                d += f.num_degree();
                for (a, b) in e.iter_mut().zip(f.den_exponents()) {
                    *a += b;
                }
            }
            (d, e)
        })
        .collect();
    let mut lcm = vec![0u32; n];
    for (_, e) in &term_exps {
        for (a, b) in lcm.iter_mut().zip(e) {
            *a = (*a).max(*b);
        }
    }
    let num = term_exps
        .iter()
        .map(|(d, e)| d + lcm.iter().zip(e).map(|(a, b)| a - b).sum::<u32>())
        .max()
        .unwrap_or(0);
    DegreeBound { num, den: lcm.iter().sum() }
}

/// The compatibility residual `∂H_i/∂t_j − ∂H_j/∂t_i + {H_i, H_j}` as an exact fraction.
pub fn compatibility_residual(i: usize, j: usize) -> Result<FactoredFrac, AlgebraError> {
    check_pair(i, j)?;
    let hs = hamiltonians();
    let (hi, hj) = (hs[i].expr(), hs[j].expr());
    Ok(hi.diff(T[j]).sub(&hj.diff(T[i])).add(&poisson(hi, hj)))
}

fn check_pair(i: usize, j: usize) -> Result<(), AlgebraError> {
    if i > 2 || j > 2 {
        return Err(AlgebraError::Precondition(format!("indices ({i}, {j}) not in 0..=2")));
    }
    if i == j {
        return Err(AlgebraError::Precondition("compatibility needs i != j".into()));
    }
    Ok(())
}

pub fn check_compatibility(
    i: usize,
    j: usize,
    mode: VerifyMode,
    trials: usize,
    seed: u64,
) -> Result<CompatReport, AlgebraError> {
    check_pair(i, j)?;
    let start = Instant::now();
    let hs = hamiltonians();
    let pi = Partials::of(hs[i].expr());
    let pj = Partials::of(hs[j].expr());
    let eval_parts = |pt: &[ExactScalar]| -> Result<(ExactScalar, ExactScalar), AlgebraError> {
        let lin = &pi.dt[j].eval(pt)? - &pj.dt[i].eval(pt)?;
        let mut br = ExactScalar::zero();
        for k in 0..3 {
            br += &(&pi.dq[k].eval(pt)? * &pj.deta[k].eval(pt)?);
            br -= &(&pj.dq[k].eval(pt)? * &pi.deta[k].eval(pt)?);
        }
        Ok((lin, br))
    };
    // the literal `−{H_i,H_j}` variant, reported at the first pole-free sample
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut minus_bracket_value = None;
    for _ in 0..crate::algebra::pit::RESAMPLE_CAP {
        let pt = random_point(&mut rng, 9);
        if let Ok((lin, br)) = eval_parts(&pt) {
            minus_bracket_value = Some((&lin - &br).to_string());
            break;
        }
    }
    let (zero, pit) = match mode {
        VerifyMode::Full => {
            let r = compatibility_residual(i, j)?;
            (r.is_zero(), None)
        }
        VerifyMode::Pit => {
            let mut terms: Vec<Vec<&FactoredFrac>> = vec![vec![&pi.dt[j]], vec![&pj.dt[i]]];
            for k in 0..3 {
                terms.push(vec![&pi.dq[k], &pj.deta[k]]);
                terms.push(vec![&pj.dq[k], &pi.deta[k]]);
            }
            let probe = FnProbe {
                names: PhaseRing::get().ring().names().to_vec(),
                bound: sum_of_products_bound(&terms),
                f: |pt: &[ExactScalar]| {
                    let (lin, br) = eval_parts(pt)?;
                    Ok((&lin + &br).is_zero())
                },
            };
            let out = pit_zero(&probe, trials, seed)?;
            (out.zero, Some(out))
        }
    };
    Ok(CompatReport { i, j, mode, zero, pit, minus_bracket_value, seconds: start.elapsed().as_secs_f64() })
}
