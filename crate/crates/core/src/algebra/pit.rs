//! Schwartz–Zippel identity testing at random integer points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{AlgebraError, ExactScalar, FactoredFrac, RatFunc, RelRingElem};

/// Sample coordinates are drawn from `[-HALF_WIDTH, HALF_WIDTH]`.
pub const HALF_WIDTH: i64 = 1_000_000;
/// Number of attempts to find a point off the polar locus before giving up.
pub const RESAMPLE_CAP: usize = 64;

fn box_size() -> f64 {
    (2 * HALF_WIDTH + 1) as f64
}

/// Total-degree bounds of numerator and denominator of the expression under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeBound {
    pub num: u32,
    pub den: u32,
}

impl DegreeBound {
    /// Probability that one random point fails to expose a nonzero expression.
    pub fn per_trial(&self) -> f64 {
        let denom = box_size() - self.den as f64;
        (self.num as f64 / denom).min(1.0)
    }
}

/// An expression that can be evaluated at exact points and tested for vanishing.
pub trait IdentityProbe {
    fn var_names(&self) -> Vec<String>;
    fn degree_bound(&self) -> DegreeBound;
    /// `Ok(true)` when the expression is zero at `point`; `Err(Pole)` requests a resample.
    fn vanishes_at(&self, point: &[ExactScalar]) -> Result<bool, AlgebraError>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PitOutcome {
    pub zero: bool,
    pub trials: usize,
    pub seed: u64,
    pub degree: DegreeBound,
    pub per_trial_bound: f64,
    /// log10 of the probability that a nonzero expression passes every trial.
    pub failure_bound_log10: f64,
    pub resamples: usize,
    pub witness: Option<Vec<(String, String)>>,
}

impl PitOutcome {
    pub fn failure_bound(&self) -> f64 {
        10f64.powf(self.failure_bound_log10)
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<ExactScalar> {
    (0..n).map(|_| ExactScalar::from(rng.gen_range(-HALF_WIDTH..=HALF_WIDTH))).collect()
}

pub fn pit_zero<P: IdentityProbe + ?Sized>(probe: &P, trials: usize, seed: u64) -> Result<PitOutcome, AlgebraError> {
    if trials == 0 {
        return Err(AlgebraError::Precondition("pit_zero needs at least one trial".into()));
    }
    let names = probe.var_names();
    let degree = probe.degree_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resamples = 0;
    let per_trial = degree.per_trial();
    for trial in 0..trials {
        let mut attempts = 0;
        loop {
            let point = random_point(&mut rng, names.len());
            match probe.vanishes_at(&point) {
                Ok(true) => break,
                Ok(false) => {
                    let witness = names.iter().cloned().zip(point.iter().map(|v| v.to_string())).collect();
                    return Ok(PitOutcome {
                        zero: false,
                        trials: trial + 1,
                        seed,
                        degree,
                        per_trial_bound: per_trial,
                        failure_bound_log10: 0.0,
                        resamples,
                        witness: Some(witness),
                    });
                }
                Err(AlgebraError::Pole) => {
                    attempts += 1;
                    resamples += 1;
                    if attempts >= RESAMPLE_CAP {
                        return Err(AlgebraError::ResampleExhausted(RESAMPLE_CAP));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    let log_bound = if degree.num == 0 { f64::NEG_INFINITY } else { trials as f64 * per_trial.log10() };
    Ok(PitOutcome {
        zero: true,
        trials,
        seed,
        degree,
        per_trial_bound: per_trial,
        failure_bound_log10: log_bound,
        resamples,
        witness: None,
    })
}

impl IdentityProbe for RatFunc {
    fn var_names(&self) -> Vec<String> {
        self.ring().names().to_vec()
    }
    fn degree_bound(&self) -> DegreeBound {
        DegreeBound { num: self.num().total_degree(), den: self.den().total_degree() }
    }
    fn vanishes_at(&self, point: &[ExactScalar]) -> Result<bool, AlgebraError> {
        Ok(self.eval(point)?.is_zero())
    }
}

impl IdentityProbe for FactoredFrac {
    fn var_names(&self) -> Vec<String> {
        self.ring().names().to_vec()
    }
    fn degree_bound(&self) -> DegreeBound {
        DegreeBound { num: self.num_degree(), den: self.den_degree() }
    }
    fn vanishes_at(&self, point: &[ExactScalar]) -> Result<bool, AlgebraError> {
        Ok(self.eval(point)?.is_zero())
    }
}

impl IdentityProbe for RelRingElem {
    fn var_names(&self) -> Vec<String> {
        vec!["s0".into(), "s1".into(), "s2".into()]
    }
    fn degree_bound(&self) -> DegreeBound {
        // a nonzero element has a nonzero component; bound by the worst one
        let mut b = DegreeBound { num: 0, den: 0 };
        for c in self.components() {
            b.num = b.num.max(c.num().total_degree());
            b.den = b.den.max(c.den().total_degree());
        }
        b
    }
    fn vanishes_at(&self, point: &[ExactScalar]) -> Result<bool, AlgebraError> {
        let p: [ExactScalar; 3] = [point[0].clone(), point[1].clone(), point[2].clone()];
        Ok(self.eval(&p)?.iter().all(ExactScalar::is_zero))
    }
}

/// A probe defined by a closure together with a degree bound supplied by the caller.
pub struct FnProbe<F> {
    pub names: Vec<String>,
    pub bound: DegreeBound,
    pub f: F,
}

impl<F> IdentityProbe for FnProbe<F>
where
    F: Fn(&[ExactScalar]) -> Result<bool, AlgebraError>,
{
    fn var_names(&self) -> Vec<String> {
        self.names.clone()
    }
    fn degree_bound(&self) -> DegreeBound {
        self.bound
    }
    fn vanishes_at(&self, point: &[ExactScalar]) -> Result<bool, AlgebraError> {
        (self.f)(point)
    }
}
