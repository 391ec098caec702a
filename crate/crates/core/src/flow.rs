//! High-precision integration of the Hamiltonian flows and monitoring of the algebraic locus.

use std::sync::OnceLock;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{AlgebraError, ExactScalar, FactoredFrac};
use crate::hamiltonian::{hamiltonians, vector_field_of};
use crate::numeric::{bits_for_digits, CompiledFrac, HpComplex, HpFloat};
use crate::solution::{Branch, SolutionPoint};

/// Minimum distance to the singular locus before a run is aborted.
pub const SINGULAR_GUARD: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("singular locus approached ({reason}) at step {step}")]
    Singular { reason: String, step: usize, last: Box<PhasePoint> },
    #[error("step size underflow at step {step}")]
    StepUnderflow { step: usize, last: Box<PhasePoint> },
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl FlowError {
    /// The last accepted point when the run was aborted.
    pub fn last_point(&self) -> Option<&PhasePoint> {
        match self {
            FlowError::Singular { last, .. } | FlowError::StepUnderflow { last, .. } => Some(last),
            _ => None,
        }
    }
}

/// A point `(t, q, η)` in complex phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub t: [HpComplex; 3],
    pub q: [HpComplex; 3],
    pub eta: [HpComplex; 3],
    pub digits: u32,
}

impl PhasePoint {
    pub fn new(t: [HpComplex; 3], q: [HpComplex; 3], eta: [HpComplex; 3], digits: u32) -> Result<Self, FlowError> {
        let p = PhasePoint { t, q, eta, digits };
        if let Some(reason) = p.singularity(0.0) {
            return Err(FlowError::Precondition(format!("invalid phase point: {reason}")));
        }
        Ok(p)
    }

    /// The point of the algebraic solution at `s`.
    pub fn on_solution(s: &[ExactScalar; 3], branch: Branch, digits: u32) -> Result<Self, FlowError> {
        let sp = SolutionPoint::new(s, branch, digits)?;
        Ok(PhasePoint { t: sp.t, q: sp.q, eta: sp.eta, digits })
    }

    pub fn prec(&self) -> u32 {
        bits_for_digits(self.digits)
    }

    /// Coordinates in phase-ring order.
    pub fn coords(&self) -> Vec<HpComplex> {
        self.t.iter().chain(&self.q).chain(&self.eta).cloned().collect()
    }

    /// Names the nearest singular configuration when closer than `guard`.
    pub fn singularity(&self, guard: f64) -> Option<String> {
        let one = HpComplex::one(self.prec());
        let check = |v: &HpComplex| v.is_zero() || v.abs_f64() <= guard;
        for i in 0..3 {
            if check(&self.t[i]) {
                return Some(format!("t{i} -> 0"));
            }
        }
        for j in 0..3 {
            if check(&self.q[j]) {
                return Some(format!("q{} -> 0", j + 1));
            }
            if check(&(&self.q[j] - &one)) {
                return Some(format!("q{} -> 1", j + 1));
            }
            for k in j + 1..3 {
                if check(&(&self.q[j] - &self.q[k])) {
                    return Some(format!("q{} -> q{}", j + 1, k + 1));
                }
            }
        }
        None
    }

    /// Swaps the pairs `(q_a, η_a)` and `(q_b, η_b)`.
    pub fn swap_pairs(&self, a: usize, b: usize) -> Self {
        let mut p = self.clone();
        p.q.swap(a, b);
        p.eta.swap(a, b);
        p
    }

    fn with_state(&self, i: usize, t_i: &HpComplex, y: &[HpComplex]) -> Self {
        let mut p = self.clone();
        p.t[i] = t_i.clone();
        p.q.clone_from_slice(&y[..3]);
        p.eta.clone_from_slice(&y[3..6]);
        p
    }

    fn state(&self) -> Vec<HpComplex> {
        self.q.iter().chain(&self.eta).cloned().collect()
    }
}

/// Compiled right-hand sides of one flow direction.
pub struct FlowField {
    direction: usize,
    prec: u32,
    /// `∂H/∂η_j`, `−∂H/∂q_j`.
    components: Vec<CompiledFrac>,
    hamiltonian: CompiledFrac,
    dh_dt: CompiledFrac,
}

fn symbolic_field(i: usize) -> &'static ([FactoredFrac; 6], FactoredFrac) {
    static F: OnceLock<[([FactoredFrac; 6], FactoredFrac); 3]> = OnceLock::new();
    &F.get_or_init(|| {
        std::array::from_fn(|k| {
            let h = hamiltonians()[k].expr();
            (vector_field_of(h), h.diff(crate::hamiltonian::T[k]))
        })
    })[i]
}

impl FlowField {
    pub fn new(direction: usize, digits: u32) -> Result<Self, FlowError> {
        if direction > 2 {
            return Err(FlowError::Precondition(format!("direction {direction} not in 0..=2")));
        }
        let prec = bits_for_digits(digits);
        let (field, dt) = symbolic_field(direction);
        Ok(FlowField {
            direction,
            prec,
            components: field.iter().map(|f| CompiledFrac::new(f, prec)).collect(),
            hamiltonian: CompiledFrac::new(hamiltonians()[direction].expr(), prec),
            dh_dt: CompiledFrac::new(dt, prec),
        })
    }

    pub fn direction(&self) -> usize {
        self.direction
    }

    fn point(&self, base: &PhasePoint, t_i: &HpComplex, y: &[HpComplex]) -> Vec<HpComplex> {
        let mut c = Vec::with_capacity(9);
        for k in 0..3 {
            c.push(if k == self.direction { t_i.clone() } else { base.t[k].clone() });
        }
        c.extend(y[..6].iter().cloned());
        c
    }

    /// `d(q, η[, w])/dt_i` where the optional `w` accumulates `∫ ∂H/∂t_i dt_i`.
    fn rhs(&self, base: &PhasePoint, t_i: &HpComplex, y: &[HpComplex]) -> Result<Vec<HpComplex>, FlowError> {
        let pt = self.point(base, t_i, y);
        let mut out = Vec::with_capacity(y.len());
        for c in &self.components {
            out.push(c.eval(&pt)?);
        }
        if y.len() > 6 {
            out.push(self.dh_dt.eval(&pt)?);
        }
        Ok(out)
    }

    pub fn hamiltonian_at(&self, p: &PhasePoint) -> Result<HpComplex, FlowError> {
        Ok(self.hamiltonian.eval(&p.coords())?)
    }
}

/// Dormand–Prince 5(4) tableau.
struct Tableau {
    c: [HpFloat; 7],
    a: Vec<Vec<HpFloat>>,
    b: [HpFloat; 7],
    /// `b − b*`, the embedded error weights.
    e: [HpFloat; 7],
}

fn dopri(prec: u32) -> Tableau {
    let r = |n: i64, d: i64| HpFloat::from_exact(&ExactScalar::ratio(n, d), prec);
    let a_rows: [&[(i64, i64)]; 7] = [
        &[],
        &[(1, 5)],
        &[(3, 40), (9, 40)],
        &[(44, 45), (-56, 15), (32, 9)],
        &[(19372, 6561), (-25360, 2187), (64448, 6561), (-212, 729)],
        &[(9017, 3168), (-355, 33), (46732, 5247), (49, 176), (-5103, 18656)],
        &[(35, 384), (0, 1), (500, 1113), (125, 192), (-2187, 6784), (11, 84)],
    ];
    let b5 = [(35, 384), (0, 1), (500, 1113), (125, 192), (-2187, 6784), (11, 84), (0, 1)];
    let b4 = [(5179, 57600), (0, 1), (7571, 16695), (393, 640), (-92097, 339200), (187, 2100), (1, 40)];
    let c = [(0, 1), (1, 5), (3, 10), (4, 5), (8, 9), (1, 1), (1, 1)];
    Tableau {
        c: std::array::from_fn(|k| r(c[k].0, c[k].1)),
        a: a_rows.iter().map(|row| row.iter().map(|&(n, d)| r(n, d)).collect()).collect(),
        b: std::array::from_fn(|k| r(b5[k].0, b5[k].1)),
        e: std::array::from_fn(|k| &r(b5[k].0, b5[k].1) - &r(b4[k].0, b4[k].1)),
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub direction: usize,
    /// `(t_i, point)` in integration order; the first sample is the start.
    pub samples: Vec<(HpComplex, PhasePoint)>,
    pub stats: StepStats,
    /// `∫ ∂H/∂t_i dt_i` along the path, when requested.
    pub work: Option<HpComplex>,
}

impl Trajectory {
    pub fn end(&self) -> &PhasePoint {
        &self.samples.last().expect("trajectory holds its start").1
    }

    /// One JSON object per sample with coordinates and locus residuals.
    pub fn json_lines(&self, digits: usize) -> Vec<String> {
        let c = |z: &HpComplex| {
            let (re, im) = z.to_strings(digits);
            json!([re, im])
        };
        self.samples
            .iter()
            .enumerate()
            .map(|(k, (t, p))| {
                let residual = locus_residual(p).map_or(Value::Null, |r| serde_json::to_value(r).unwrap_or(Value::Null));
                json!({
                    "sample": k,
                    "direction": self.direction,
                    "t_i": c(t),
                    "t": p.t.iter().map(c).collect::<Vec<_>>(),
                    "q": p.q.iter().map(c).collect::<Vec<_>>(),
                    "eta": p.eta.iter().map(c).collect::<Vec<_>>(),
                    "residuals": residual,
                })
                .to_string()
            })
            .collect()
    }
}

/// Integration settings; `tol` bounds the scaled per-step error estimate.
#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub tol: f64,
    pub guard: f64,
    pub max_steps: usize,
    /// Accumulate `∫ ∂H/∂t_i dt_i` alongside the state.
    pub track_work: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: 1e-18, guard: SINGULAR_GUARD, max_steps: 1_000_000, track_work: false }
    }
}

struct Stepper<'a> {
    field: &'a FlowField,
    tab: Tableau,
    base: PhasePoint,
    t0: HpComplex,
    delta: HpComplex,
    prec: u32,
}

impl Stepper<'_> {
    fn t_at(&self, tau: &HpFloat) -> HpComplex {
        &self.t0 + &self.delta.scale_real(tau)
    }

    /// One step in the real parameter `τ ∈ [0, 1]`, `t_i = t₀ + τ·δ`; returns the new state and the error vector.
    fn step(&self, tau: &HpFloat, h: &HpFloat, y: &[HpComplex]) -> Result<(Vec<HpComplex>, Vec<HpComplex>), FlowError> {
        let n = y.len();
        let mut k: Vec<Vec<HpComplex>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.to_vec();
            for (m, a) in self.tab.a[s].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let ha = h * a;
                for c in 0..n {
                    ys[c] = &ys[c] + &k[m][c].scale_real(&ha);
                }
            }
            let ts = self.t_at(&(tau + &(h * &self.tab.c[s])));
            let f = self.field.rhs(&self.base, &ts, &ys)?;
            k.push(f.iter().map(|v| v * &self.delta).collect());
        }
        let mut out = y.to_vec();
        let mut err = vec![HpComplex::zero(self.prec); n];
        for s in 0..7 {
            let hb = h * &self.tab.b[s];
            let he = h * &self.tab.e[s];
            for c in 0..n {
                if !hb.is_zero() {
                    out[c] = &out[c] + &k[s][c].scale_real(&hb);
                }
                if !he.is_zero() {
                    err[c] = &err[c] + &k[s][c].scale_real(&he);
                }
            }
        }
        Ok((out, err))
    }

    fn check(&self, tau: &HpFloat, y: &[HpComplex], guard: f64, step: usize, last: &PhasePoint) -> Result<(), FlowError> {
        let p = self.base.with_state(self.field.direction, &self.t_at(tau), y);
        match p.singularity(guard) {
            Some(reason) => Err(FlowError::Singular { reason, step, last: Box::new(last.clone()) }),
            None => Ok(()),
        }
    }
}

fn start_state(start: &PhasePoint, track_work: bool, prec: u32) -> Vec<HpComplex> {
    let mut y = start.state();
    if track_work {
        y.push(HpComplex::zero(prec));
    }
    y.iter().map(|v| HpComplex::new(v.re.with_prec(prec), v.im.with_prec(prec))).collect()
}

fn finish(field: &FlowField, samples: Vec<(HpComplex, PhasePoint)>, stats: StepStats, y: &[HpComplex]) -> Trajectory {
    Trajectory { direction: field.direction, samples, stats, work: (y.len() > 6).then(|| y[6].clone()) }
}

/// Adaptive Dormand–Prince 5(4) from `start` to `t_i + delta`.
pub fn integrate(field: &FlowField, start: &PhasePoint, delta: &HpComplex, opts: FlowOptions) -> Result<Trajectory, FlowError> {
    if !(opts.tol > 0.0) {
        return Err(FlowError::Precondition("tol must be positive".into()));
    }
    let i = field.direction;
    let prec = field.prec;
    let mut y = start_state(start, opts.track_work, prec);
    let mut samples = vec![(start.t[i].clone(), start.clone())];
    let mut stats = StepStats::default();
    if delta.is_zero() {
        return Ok(finish(field, samples, stats, &y));
    }
    if let Some(reason) = start.singularity(opts.guard) {
        return Err(FlowError::Singular { reason, step: 0, last: Box::new(start.clone()) });
    }
    let st = Stepper { field, tab: dopri(prec), base: start.clone(), t0: start.t[i].clone(), delta: delta.clone(), prec };
    let one = HpFloat::from_i64(1, prec);
    let mut tau = HpFloat::zero(prec);
    let mut h = opts.tol.powf(0.2).min(0.05);
    let (mut min_h, mut max_h) = (f64::INFINITY, 0.0f64);
    while tau.cmp_value(&one).is_lt() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(FlowError::StepUnderflow { step: stats.accepted, last: Box::new(samples.last().unwrap().1.clone()) });
        }
        let remaining = (&one - &tau).to_f64();
        let last_step = h >= remaining;
        let hh = if last_step { &one - &tau } else { HpFloat::from_f64(h, prec) };
        let (next, err) = match st.step(&tau, &hh, &y) {
            Ok(v) => v,
            Err(FlowError::Algebra(AlgebraError::Pole)) => {
                let last = samples.last().unwrap().1.clone();
                return Err(FlowError::Singular { reason: "pole of the vector field".into(), step: stats.accepted, last: Box::new(last) });
            }
            Err(e) => return Err(e),
        };
        let mut e = 0.0f64;
        for c in 0..y.len() {
            let scale = 1.0 + y[c].abs_f64().max(next[c].abs_f64());
            e = e.max(err[c].abs_f64() / (opts.tol * scale));
        }
        let hf = hh.to_f64();
        if e <= 1.0 {
            tau = if last_step { one.clone() } else { &tau + &hh };
            y = next;
            stats.accepted += 1;
            min_h = min_h.min(hf);
            max_h = max_h.max(hf);
            let t_i = st.t_at(&tau);
            let p = start.with_state(i, &t_i, &y);
            st.check(&tau, &y, opts.guard, stats.accepted, &samples.last().unwrap().1)?;
            samples.push((t_i, p));
        } else {
            stats.rejected += 1;
        }
        let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = hf * fac;
        if h < 1e-40 {
            return Err(FlowError::StepUnderflow { step: stats.accepted, last: Box::new(samples.last().unwrap().1.clone()) });
        }
    }
    stats.min_step = if min_h.is_finite() { min_h } else { 0.0 };
    stats.max_step = max_h;
    Ok(finish(field, samples, stats, &y))
}

/// `steps` equal Dormand–Prince steps (fifth-order solution) from `start` to `t_i + delta`.
pub fn integrate_fixed(field: &FlowField, start: &PhasePoint, delta: &HpComplex, steps: usize) -> Result<Trajectory, FlowError> {
    if steps == 0 {
        return Err(FlowError::Precondition("at least one step".into()));
    }
    let i = field.direction;
    let prec = field.prec;
    let st = Stepper { field, tab: dopri(prec), base: start.clone(), t0: start.t[i].clone(), delta: delta.clone(), prec };
    let h = HpFloat::from_exact(&ExactScalar::ratio(1, steps as i64), prec);
    let mut y = start_state(start, false, prec);
    let mut samples = vec![(start.t[i].clone(), start.clone())];
    for k in 0..steps {
        let tau = HpFloat::from_exact(&ExactScalar::ratio(k as i64, steps as i64), prec);
        y = st.step(&tau, &h, &y)?.0;
        let t_i = st.t_at(&(&tau + &h));
        samples.push((t_i.clone(), start.with_state(i, &t_i, &y)));
    }
    let stats = StepStats { accepted: steps, rejected: 0, min_step: h.to_f64(), max_step: h.to_f64() };
    Ok(finish(field, samples, stats, &y))
}

/// Distances of a phase point from the algebraic locus.
#[derive(Debug, Clone, Serialize)]
pub struct LocusResidual {
    /// Recovered `s`, as decimal strings `[re, im]`.
    pub s: [[String; 2]; 3],
    /// `|Q(q_j; s)|`.
    pub cubic: [f64; 3],
    /// `|t_i² − s_i³|` for `i = 1, 2`.
    pub time: [f64; 2],
    /// `|η_j − 1/(3q_j) − 1/(3(q_j − 1))|`.
    pub eta: [f64; 3],
    pub max: f64,
}

/// Recovers `s` from `σ(q)` and `t₀`, then measures every defining relation.
pub fn locus_residual(p: &PhasePoint) -> Result<LocusResidual, FlowError> {
    let prec = p.prec();
    let c = |n: i64| HpComplex::from_i64(n, prec);
    let q = &p.q;
    let s1 = &(&q[0] + &q[1]) + &q[2];
    let s3 = &(&q[0] * &q[1]) * &q[2];
    // with s₂ = 1: σ₃ = −s₀ and σ₁ = (s₁ − s₀ + 3)/2
    let r = [-&s3, &(&(&c(2) * &s1) - &s3) - &c(3), c(1)];
    if r[0].abs_f64() < 1e-30 {
        return Err(FlowError::Precondition("degenerate σ: s-scale unrecoverable".into()));
    }
    let cube = &(&p.t[0] * &p.t[0]) / &r[0].pow_u(3);
    let (re, im) = cube.to_pair();
    let (mag, arg) = (re.hypot(im).cbrt(), im.atan2(re) / 3.0);
    let mut best: Option<(f64, [HpComplex; 3], [f64; 2])> = None;
    for k in 0..3 {
        let a = arg + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
        let lambda = cube.cbrt_near((mag * a.cos(), mag * a.sin()));
        let s: [HpComplex; 3] = std::array::from_fn(|m| &r[m] * &lambda);
        let time = [1, 2].map(|m| (&(&p.t[m] * &p.t[m]) - &s[m].pow_u(3)).abs_f64());
        if best.as_ref().is_none_or(|b| time[0] + time[1] < b.0) {
            best = Some((time[0] + time[1], s, time));
        }
    }
    let (_, s, time) = best.expect("three candidates");
    // σ(s) for the recovered s
    let two_s2 = &c(2) * &s[2];
    let sig1 = &(&(&s[1] - &s[0]) + &(&c(3) * &s[2])) / &two_s2;
    let sig2 = &(&(&s[2] - &s[1]) - &(&c(3) * &s[0])) / &two_s2;
    let sig3 = -&(&s[0] / &s[2]);
    let one = c(1);
    let three = c(3);
    let cubic = std::array::from_fn(|j| {
        let x = &q[j];
        let v = &(&(&x.pow_u(3) - &(&sig1 * &(x * x))) + &(&sig2 * x)) - &sig3;
        v.abs_f64()
    });
    let eta = std::array::from_fn(|j| {
        let a = (&three * &q[j]).recip();
        let b = (&three * &(&q[j] - &one)).recip();
        (&(&p.eta[j] - &a) - &b).abs_f64()
    });
    let max = time.iter().chain(&cubic).chain(&eta).fold(0.0f64, |m, v| m.max(*v));
    let s = std::array::from_fn(|m| {
        let (a, b) = s[m].to_strings(20);
        [a, b]
    });
    Ok(LocusResidual { s, cubic, time, eta, max })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocusFlowReport {
    pub direction: usize,
    pub delta: [f64; 2],
    pub tol: f64,
    pub threshold: f64,
    pub initial_residual: f64,
    pub max_residual: f64,
    pub final_residual: f64,
    pub stats: StepStats,
    pub pass: bool,
    pub seconds: f64,
}

/// Integrates one direction and records the worst locus residual over all samples.
/// `threshold` defaults to `10³·tol`.
pub fn flow_preserves_locus(
    direction: usize,
    start: &PhasePoint,
    delta: &HpComplex,
    opts: FlowOptions,
    threshold: Option<f64>,
) -> Result<(LocusFlowReport, Trajectory), FlowError> {
    let clock = Instant::now();
    let field = FlowField::new(direction, start.digits)?;
    let traj = integrate(&field, start, delta, opts)?;
    let mut worst = 0.0f64;
    let mut residuals = Vec::with_capacity(traj.samples.len());
    for (_, p) in &traj.samples {
        let r = locus_residual(p)?.max;
        worst = worst.max(r);
        residuals.push(r);
    }
    let threshold = threshold.unwrap_or(1e3 * opts.tol);
    let report = LocusFlowReport {
        direction,
        delta: delta.to_pair().into(),
        tol: opts.tol,
        threshold,
        initial_residual: residuals[0],
        max_residual: worst,
        final_residual: *residuals.last().unwrap(),
        stats: traj.stats,
        pass: worst < threshold,
        seconds: clock.elapsed().as_secs_f64(),
    };
    Ok((report, traj))
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkReport {
    pub direction: usize,
    /// `|H(end) − H(start) − ∫ ∂H/∂t_i dt_i|`.
    pub mismatch: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Along its own flow, `dH_{t_i}/dt_i = ∂H_{t_i}/∂t_i`: compares the change of `H` with the
/// integrated explicit derivative.
pub fn hamiltonian_work(direction: usize, start: &PhasePoint, delta: &HpComplex, tol: f64) -> Result<WorkReport, FlowError> {
    let field = FlowField::new(direction, start.digits)?;
    let traj = integrate(&field, start, delta, FlowOptions { tol, track_work: true, ..FlowOptions::default() })?;
    let h0 = field.hamiltonian_at(start)?;
    let h1 = field.hamiltonian_at(traj.end())?;
    let w = traj.work.clone().expect("work tracked");
    let mismatch = (&(&h1 - &h0) - &w).abs_f64();
    Ok(WorkReport { direction, mismatch, tol, pass: mismatch <= 10.0 * tol * (1.0 + h0.abs_f64()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_start(digits: u32) -> PhasePoint {
        let one = ExactScalar::from(1);
        PhasePoint::on_solution(&[one.clone(), one.clone(), one], Branch::PLUS, digits).unwrap()
    }

    #[test]
    fn zero_delta_is_identity() {
        let start = unit_start(30);
        let f = FlowField::new(0, 30).unwrap();
        let tr = integrate(&f, &start, &HpComplex::zero(start.prec()), FlowOptions::default()).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.end(), &start);
    }

    #[test]
    fn locus_point_has_small_residual() {
        let r = locus_residual(&unit_start(40)).unwrap();
        assert!(r.max < 1e-35, "{r:?}");
    }

    #[test]
    fn perturbed_eta_is_reported() {
        let mut p = unit_start(40);
        let eps = HpComplex::from_f64(1e-6, 0.0, p.prec());
        p.eta[0] = &p.eta[0] + &eps;
        let r = locus_residual(&p).unwrap();
        assert!((r.eta[0] - 1e-6).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn guard_rejects_collision() {
        let mut p = unit_start(30);
        p.q[1] = p.q[0].clone();
        assert!(p.singularity(SINGULAR_GUARD).is_some());
    }
}
