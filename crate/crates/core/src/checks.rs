//! Every verification wrapped as a [`VerificationReport`], shared by the command line and the test suites.

use std::time::Instant;

use serde_json::{json, Value};

use crate::algebra::{AlgebraError, ExactScalar, PitOutcome};
use crate::connection::{check_apparent, derive_hamiltonians_from_connection, ConnectionMatrix, ExactParams};
use crate::flow::{flow_preserves_locus, FlowError, FlowOptions, PhasePoint, Trajectory};
use crate::hamiltonian::check_compatibility;
use crate::numeric::{bits_for_digits, HpComplex};
use crate::pullback::{verify_pullback_exact, verify_pullback_symbolic};
use crate::report::{CheckMode, VerificationReport, VerifyMode};
use crate::solution::{verify_eta_equations_numeric, verify_sigma_system, Branch};
use crate::tau::{potential_and_tau, restricted_bracket};

pub const ANCHOR_COMPAT: &str = "Hamiltonians: compatibility of the three flows";
pub const ANCHOR_SIGMA: &str = "algebraic solution: reduced system for the symmetric functions";
pub const ANCHOR_ETA: &str = "algebraic solution: equations for eta";
pub const ANCHOR_DERIVE: &str = "connection: Hamiltonians from local formal data";
pub const ANCHOR_APPARENT: &str = "connection: apparent singular points q_j";
pub const ANCHOR_PULLBACK: &str = "pull-back of the fixed equation along phi_s";
pub const ANCHOR_TAU: &str = "tau-function: the one-form and its potential";
pub const ANCHOR_FLOW: &str = "algebraic solution: invariance under the Hamiltonian flows";

/// Run-wide settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub digits: u32,
    pub trials: usize,
    pub mode: VerifyMode,
    pub s: [ExactScalar; 3],
    pub branch: Branch,
    pub tol: f64,
    pub delta: (f64, f64),
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 42,
            digits: 50,
            trials: 20,
            mode: VerifyMode::Pit,
            s: [ExactScalar::from(1), ExactScalar::from(1), ExactScalar::from(1)],
            branch: Branch::PLUS,
            tol: 1e-18,
            delta: (0.1, 0.0),
        }
    }
}

fn s_json(s: &[ExactScalar; 3]) -> Value {
    json!(s.iter().map(ToString::to_string).collect::<Vec<_>>())
}

fn pit_or_exact(id: &str, anchor: &str, mode: VerifyMode, zero: bool, pit: Option<&PitOutcome>, witness: impl FnOnce() -> Value) -> VerificationReport {
    match (mode, pit) {
        (VerifyMode::Pit, Some(o)) => VerificationReport::from_pit(id, anchor, o),
        _ => VerificationReport::verdict(id, anchor, CheckMode::Exact, zero, witness),
    }
}

pub fn compatibility(i: usize, j: usize, set: &Settings) -> VerificationReport {
    let id = format!("compatibility.{i}{j}");
    match check_compatibility(i, j, set.mode, set.trials, set.seed) {
        Ok(r) => {
            let rep = pit_or_exact(&id, ANCHOR_COMPAT, set.mode, r.zero, r.pit.as_ref(), || json!({"pair": [i, j], "zero": false}));
            let rep = match &r.minus_bracket_value {
                Some(v) => rep.with_meta("minus_bracket_value", v.clone()),
                None => rep,
            };
            rep.with_meta("pair", json!([i, j])).with_timing(r.seconds)
        }
        Err(e) => VerificationReport::precondition(&id, ANCHOR_COMPAT, &e.to_string()),
    }
}

pub fn sigma_system() -> VerificationReport {
    let id = "solution.sigma-system";
    match verify_sigma_system() {
        Ok(r) => {
            let failing: Vec<Value> = r
                .equations
                .iter()
                .filter(|e| !e.zero)
                .map(|e| json!({"i": e.i, "k": e.k, "residual": e.residual}))
                .collect();
            VerificationReport::verdict(id, ANCHOR_SIGMA, CheckMode::Exact, r.all_zero, || json!(failing))
                .with_meta("equations", r.equations.len())
                .with_timing(r.seconds)
        }
        Err(e) => VerificationReport::precondition(id, ANCHOR_SIGMA, &e.to_string()),
    }
}

pub fn eta_equations(s: &[ExactScalar; 3], set: &Settings) -> VerificationReport {
    let id = "solution.eta-equations";
    match verify_eta_equations_numeric(s, set.digits, set.branch) {
        Ok(r) => {
            let worst = r.max_log10;
            VerificationReport::verdict(id, ANCHOR_ETA, CheckMode::Numeric, r.pass, || {
                json!({"s": s_json(s), "max_log10": worst, "eta_residuals": r.eta_residuals})
            })
            .with_meta("s", s_json(s))
            .with_meta("branch", r.branch.to_string())
            .with_meta("digits", set.digits)
            .with_meta("max_log10", worst.map_or(Value::String("-inf".into()), Value::from))
            .with_meta("threshold_log10", r.threshold_log10)
            .with_timing(r.seconds)
        }
        Err(e) => VerificationReport::precondition(id, ANCHOR_ETA, &e.to_string()),
    }
}

pub fn derived_hamiltonians(set: &Settings) -> Vec<VerificationReport> {
    match derive_hamiltonians_from_connection(set.mode, set.trials, set.seed) {
        Ok(list) => list
            .into_iter()
            .map(|c| {
                let id = format!("connection.derive-hamiltonian.{}", c.i);
                pit_or_exact(&id, ANCHOR_DERIVE, set.mode, c.equal, c.pit.as_ref(), || json!({"index": c.i, "equal": false}))
                    .with_meta("derived_terms", c.derived_terms)
                    .with_timing(c.seconds)
            })
            .collect(),
        Err(e) => vec![VerificationReport::precondition("connection.derive-hamiltonian", ANCHOR_DERIVE, &e.to_string())],
    }
}

/// Apparentness of the three `q_j`; with `perturb` the coefficient at `q₁` is shifted by one and the
/// check passes when `q₁` is then *not* apparent.
pub fn apparent(q: [ExactScalar; 3], p: [ExactScalar; 3], t: [ExactScalar; 3], perturb: bool) -> Vec<VerificationReport> {
    let start = Instant::now();
    let build = || -> Result<ConnectionMatrix, AlgebraError> {
        let c = ConnectionMatrix::from_params(ExactParams::new(q.clone(), p.clone(), t.clone())?)?;
        if perturb {
            let mut ct = c.ctilde().clone();
            ct[0] = &ct[0] + &ExactScalar::from(1);
            c.with_ctilde(ct)
        } else {
            Ok(c)
        }
    };
    let c = match build() {
        Ok(c) => c,
        Err(e) => return vec![VerificationReport::precondition("connection.apparent", ANCHOR_APPARENT, &e.to_string())],
    };
    let which: Vec<usize> = if perturb { vec![0] } else { vec![0, 1, 2] };
    which
        .into_iter()
        .map(|j| {
            let id = if perturb { "connection.apparent.perturbed-q1".to_string() } else { format!("connection.apparent.q{}", j + 1) };
            match check_apparent(&c, j) {
                Ok(r) => {
                    let ok = r.apparent != perturb;
                    let w = serde_json::to_value(&r).unwrap_or(Value::Null);
                    VerificationReport::verdict(&id, ANCHOR_APPARENT, CheckMode::Exact, ok, || w)
                        .with_meta("apparent", r.apparent)
                        .with_meta("obstruction", r.obstruction.clone())
                        .with_timing(start.elapsed().as_secs_f64())
                }
                Err(e) => VerificationReport::precondition(&id, ANCHOR_APPARENT, &e.to_string()),
            }
        })
        .collect()
}

pub fn pullback_exact(s: &[ExactScalar; 3], branch: Branch) -> VerificationReport {
    let id = "pullback.exact";
    match verify_pullback_exact(s, branch) {
        Ok(r) => {
            let diff = r.difference.clone();
            VerificationReport::verdict(id, ANCHOR_PULLBACK, CheckMode::Exact, r.zero, || json!({"difference": diff}))
                .with_meta("s", s_json(s))
                .with_meta("branch", branch.to_string())
                .with_meta("roots", json!(r.q))
                .with_meta("gauge_log_derivative", r.gauge_log_derivative.clone())
                .with_timing(r.seconds)
        }
        Err(e) => VerificationReport::precondition(id, ANCHOR_PULLBACK, &e.to_string()),
    }
}

pub fn pullback_symbolic() -> VerificationReport {
    let id = "pullback.symbolic";
    match verify_pullback_symbolic() {
        Ok(r) => {
            let diff = r.difference.clone();
            VerificationReport::verdict(id, ANCHOR_PULLBACK, CheckMode::Exact, r.zero, || json!({"difference": diff}))
                .with_meta("gauge_log_derivative", r.gauge_log_derivative.clone())
                .with_timing(r.seconds)
        }
        Err(e) => VerificationReport::precondition(id, ANCHOR_PULLBACK, &e.to_string()),
    }
}

/// Restricted brackets, closedness, the potential and the comparison with the printed one-form.
pub fn tau() -> Vec<VerificationReport> {
    let mut out = Vec::new();
    let start = Instant::now();
    let mut zero = true;
    let mut nonzero = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        match restricted_bracket(i, j) {
            Ok(b) if b.is_zero() => {}
            Ok(_) => {
                zero = false;
                nonzero.push(json!([i, j]));
            }
            Err(e) => return vec![VerificationReport::precondition("tau.restricted-brackets", ANCHOR_TAU, &e.to_string())],
        }
    }
    out.push(
        VerificationReport::verdict("tau.restricted-brackets", ANCHOR_TAU, CheckMode::Exact, zero, || json!(nonzero))
            .with_timing(start.elapsed().as_secs_f64()),
    );
    let (potential, r) = match potential_and_tau() {
        Ok(v) => v,
        Err(e) => {
            out.push(VerificationReport::precondition("tau.varpi", ANCHOR_TAU, &e.to_string()));
            return out;
        }
    };
    let varpi = json!(r.varpi);
    out.push(
        VerificationReport::verdict("tau.varpi-closed", ANCHOR_TAU, CheckMode::Exact, r.closed, || varpi.clone())
            .with_timing(r.seconds),
    );
    let sign: i64 = if r.varpi_matches_display { 1 } else { -1 };
    out.push(
        VerificationReport::verdict(
            "tau.varpi-display-up-to-sign",
            ANCHOR_TAU,
            CheckMode::Exact,
            r.varpi_matches_display || r.varpi_matches_negated_display,
            || varpi.clone(),
        )
        .with_meta("literal_match", r.varpi_matches_display)
        .with_meta("sign", sign)
        .with_meta("varpi", varpi.clone()),
    );
    out.push(
        VerificationReport::verdict("tau.potential", ANCHOR_TAU, CheckMode::Exact, r.exact_with_f || r.exact_with_minus_f, || varpi)
            .with_meta("varpi_equals_dF", r.exact_with_f)
            .with_meta("varpi_equals_minus_dF", r.exact_with_minus_f)
            .with_meta("potential", potential.to_string())
            .with_meta("tau", r.tau.clone())
            .with_meta("constant", "c (free)"),
    );
    out
}

pub fn flow_locus(direction: usize, start_s: &[ExactScalar; 3], set: &Settings) -> VerificationReport {
    flow_locus_with_trajectory(direction, start_s, set).0
}

/// As [`flow_locus`], also handing back the integrated trajectory when the run completed.
pub fn flow_locus_with_trajectory(
    direction: usize,
    start_s: &[ExactScalar; 3],
    set: &Settings,
) -> (VerificationReport, Option<Trajectory>) {
    let id = format!("flow.locus.{direction}");
    let run = || -> Result<_, FlowError> {
        let start = PhasePoint::on_solution(start_s, set.branch, set.digits)?;
        let delta = HpComplex::from_f64(set.delta.0, set.delta.1, bits_for_digits(set.digits));
        flow_preserves_locus(direction, &start, &delta, FlowOptions { tol: set.tol, ..FlowOptions::default() }, None)
    };
    match run() {
        Ok((r, traj)) => {
            let rv = serde_json::to_value(&r).unwrap_or(Value::Null);
            let rep = VerificationReport::verdict(&id, ANCHOR_FLOW, CheckMode::Numeric, r.pass, || rv)
                .with_meta("s", s_json(start_s))
                .with_meta("delta", json!([set.delta.0, set.delta.1]))
                .with_meta("tol", set.tol)
                .with_meta("threshold", r.threshold)
                .with_meta("max_residual", r.max_residual)
                .with_meta("steps", r.stats.accepted)
                .with_meta("digits", set.digits)
                .with_timing(r.seconds);
            (rep, Some(traj))
        }
        Err(e) => {
            let last = e.last_point().map(|p| json!(p.q.iter().map(|z| z.to_strings(20)).collect::<Vec<_>>()));
            (VerificationReport::fail(&id, ANCHOR_FLOW, CheckMode::Numeric, json!({"error": e.to_string(), "last_q": last})), None)
        }
    }
}

/// The sample apparent-point data used when none is given: the roots at `s = (1,1,1)`, `p = 0`, `t = (1,1,1)`.
pub fn default_apparent_params() -> ([ExactScalar; 3], [ExactScalar; 3], [ExactScalar; 3]) {
    let r = ExactScalar::ratio;
    ([r(-1, 1), r(1, 2), r(2, 1)], [r(0, 1), r(0, 1), r(0, 1)], [r(1, 1), r(1, 1), r(1, 1)])
}

/// The whole suite; independent groups run on separate threads and the output order is fixed.
pub fn verify_all(set: &Settings) -> Vec<VerificationReport> {
    let (q, p, t) = default_apparent_params();
    std::thread::scope(|sc| {
        let flows: Vec<_> = (0..3).map(|d| sc.spawn(move || flow_locus(d, &set.s, set))).collect();
        let algebra = sc.spawn(move || {
            let mut v = Vec::new();
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                v.push(compatibility(i, j, set));
            }
            v.push(sigma_system());
            v.push(eta_equations(&set.s, set));
            v
        });
        let connection = sc.spawn(move || {
            let mut v = derived_hamiltonians(set);
            v.extend(apparent(q.clone(), p.clone(), t.clone(), false));
            v.extend(apparent(q, p, t, true));
            v
        });
        let rest = sc.spawn(move || {
            let mut v = vec![pullback_exact(&set.s, set.branch), pullback_symbolic()];
            v.extend(tau());
            v
        });
        let mut out = algebra.join().expect("check thread");
        out.extend(connection.join().expect("check thread"));
        out.extend(rest.join().expect("check thread"));
        for f in flows {
            out.push(f.join().expect("flow thread"));
        }
        out
    })
}
