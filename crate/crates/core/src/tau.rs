//! The Hamiltonians restricted to the algebraic solution, the one-form
//! `ϖ = Σ H_{t_i}(t) dt_i` written in `s`, its potential and the tau function.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::algebra::{s_ring, AlgebraError, ExactScalar, MultiPoly, RatFunc, RelRingElem};
use crate::hamiltonian::{hamiltonians, poisson, Q, T};
use crate::solution::{on_section, sigma_to_relring, symmetrize};

/// `A₀ ds₀ + A₁ ds₁ + A₂ ds₂` over `Q(s₀, s₁, s₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormS {
    coeffs: [RatFunc; 3],
}

impl OneFormS {
    pub fn new(coeffs: [RatFunc; 3]) -> Self {
        OneFormS { coeffs }
    }

    pub fn coeff(&self, i: usize) -> &RatFunc {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[RatFunc; 3] {
        &self.coeffs
    }

    pub fn neg(&self) -> Self {
        OneFormS { coeffs: std::array::from_fn(|i| self.coeffs[i].neg()) }
    }

    /// `∂A_i/∂s_j − ∂A_j/∂s_i` for `(i, j) = (0,1), (0,2), (1,2)`.
    pub fn exterior_derivative(&self) -> [RatFunc; 3] {
        let c = |i: usize, j: usize| self.coeffs[i].diff(j).sub(&self.coeffs[j].diff(i));
        [c(0, 1), c(0, 2), c(1, 2)]
    }

    pub fn is_closed(&self) -> bool {
        self.exterior_derivative().iter().all(RatFunc::is_zero)
    }

    /// Relabels `s` by `perm` and moves the coefficients along with it.
    pub fn permute(&self, perm: [usize; 3]) -> Result<Self, AlgebraError> {
        let r = s_ring();
        let images: Vec<RatFunc> = (0..3).map(|i| RatFunc::var(&r, perm[i])).collect();
        let mut coeffs = self.coeffs.clone();
        for i in 0..3 {
            coeffs[perm[i]] = self.coeffs[i].compose(&r, &images)?;
        }
        Ok(OneFormS { coeffs })
    }
}

/// `R + Σ c_k ln(u_k)` with rational `R` and polynomial `u_k`; only differentiation is defined
/// on the logarithmic part.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    rational: RatFunc,
    logs: Vec<(ExactScalar, MultiPoly)>,
}

impl Potential {
    pub fn new(rational: RatFunc, logs: Vec<(ExactScalar, MultiPoly)>) -> Self {
        Potential { rational, logs }
    }

    pub fn rational(&self) -> &RatFunc {
        &self.rational
    }

    pub fn logs(&self) -> &[(ExactScalar, MultiPoly)] {
        &self.logs
    }

    /// `∂/∂s_i`, with `d ln u = du/u`.
    pub fn diff(&self, i: usize) -> Result<RatFunc, AlgebraError> {
        let mut out = self.rational.diff(i);
        for (c, u) in &self.logs {
            let du = RatFunc::from_poly(u.derivative(i));
            out = out.add(&du.div(&RatFunc::from_poly(u.clone()))?.scale(c));
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Result<OneFormS, AlgebraError> {
        Ok(OneFormS { coeffs: [self.diff(0)?, self.diff(1)?, self.diff(2)?] })
    }

    pub fn neg(&self) -> Self {
        Potential {
            rational: self.rational.neg(),
            logs: self.logs.iter().map(|(c, u)| (-c.clone(), u.clone())).collect(),
        }
    }

    /// Relabels `s` by `perm`.
    pub fn permute(&self, perm: [usize; 3]) -> Result<Self, AlgebraError> {
        let r = s_ring();
        let images: Vec<MultiPoly> = (0..3).map(|i| MultiPoly::var(&r, perm[i])).collect();
        let rimages: Vec<RatFunc> = images.iter().cloned().map(RatFunc::from_poly).collect();
        Ok(Potential {
            rational: self.rational.compose(&r, &rimages)?,
            logs: self.logs.iter().map(|(c, u)| (c.clone(), u.compose(&r, &images))).collect(),
        })
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rational)?;
        for (c, u) in &self.logs {
            write!(f, " + ({c})*ln({u})")?;
        }
        Ok(())
    }
}

/// Restricts each `H_{t_i}` to the solution and writes it in the relation ring.
pub fn restrict_hamiltonians() -> Result<[RelRingElem; 3], AlgebraError> {
    let mut out = Vec::with_capacity(3);
    for h in hamiltonians() {
        let sym = symmetrize(&on_section(h.expr())?, T, Q)?;
        out.push(sigma_to_relring(&sym)?);
    }
    Ok(out.try_into().expect("three"))
}

/// `{H_{t_i}, H_{t_j}}` on the solution.
pub fn restricted_bracket(i: usize, j: usize) -> Result<RelRingElem, AlgebraError> {
    let hs = hamiltonians();
    if i > 2 || j > 2 {
        return Err(AlgebraError::Precondition("indices must lie in 0..=2".into()));
    }
    let b = poisson(hs[i].expr(), hs[j].expr());
    sigma_to_relring(&symmetrize(&on_section(&b)?, T, Q)?)
}

/// `A_i = H_{t_i} · dt_i/ds_i` with `dt_i/ds_i = 3s_i²/(2t_i) = 3t_i/(2s_i)`.
pub fn build_varpi_from(restricted: &[RelRingElem; 3]) -> Result<OneFormS, AlgebraError> {
    let r = s_ring();
    let mut coeffs = Vec::with_capacity(3);
    for (i, h) in restricted.iter().enumerate() {
        let k = RatFunc::constant(&r, ExactScalar::ratio(3, 2)).div(&RatFunc::var(&r, i))?;
        let a = h.mul(&RelRingElem::t(i)).scale(&k);
        let scalar = a
            .as_scalar()
            .ok_or_else(|| AlgebraError::Precondition(format!("coefficient {i} keeps a t-component")))?
            .clone();
        coeffs.push(scalar);
    }
    Ok(OneFormS { coeffs: coeffs.try_into().expect("three") })
}

pub fn build_varpi() -> Result<OneFormS, AlgebraError> {
    build_varpi_from(&restrict_hamiltonians()?)
}

fn s_poly(i: usize) -> MultiPoly {
    MultiPoly::var(&s_ring(), i)
}

fn int(n: i64) -> MultiPoly {
    MultiPoly::constant(&s_ring(), ExactScalar::from(n))
}

/// The three printed coefficients `(1 + 36s_i³ − 216(s_j + s_k)s_i² − 108(s_j − s_k)²s_i)/(24s_i)`.
pub fn displayed_varpi() -> OneFormS {
    let coeff = |i: usize, j: usize, k: usize| {
        let si = s_poly(i);
        let num = &(&(&int(1) + &(&int(36) * &si.pow(3))) - &(&(&int(216) * &(&s_poly(j) + &s_poly(k))) * &si.pow(2)))
            - &(&(&int(108) * &(&s_poly(j) - &s_poly(k)).pow(2)) * &si);
        RatFunc::new(num, &int(24) * &si).expect("nonzero")
    };
    OneFormS { coeffs: [coeff(0, 1, 2), coeff(1, 0, 2), coeff(2, 0, 1)] }
}

/// `F = (s₀³+s₁³+s₂³)/2 + ln(s₀s₁s₂)/24 − 9((s₁−s₂)²s₀ + (s₀−s₂)²s₁ + (s₁−s₀)²s₂)/2 − 18s₀s₁s₂`.
pub fn displayed_potential() -> Potential {
    let s = s_poly;
    let half = ExactScalar::ratio(1, 2);
    let cubes = (&(&s(0).pow(3) + &s(1).pow(3)) + &s(2).pow(3)).scale(&half);
    let mixed = &(&(&(&s(1) - &s(2)).pow(2) * &s(0)) + &(&(&s(0) - &s(2)).pow(2) * &s(1))) + &(&(&s(1) - &s(0)).pow(2) * &s(2));
    let product = &(&s(0) * &s(1)) * &s(2);
    let rational = &(&cubes - &mixed.scale(&ExactScalar::ratio(9, 2))) - &(&int(18) * &product);
    Potential::new(RatFunc::from_poly(rational), vec![(ExactScalar::ratio(1, 24), product)])
}

#[derive(Debug, Clone, Serialize)]
pub struct TauReport {
    /// Computed coefficients equal the printed ones.
    pub varpi_matches_display: bool,
    /// Computed coefficients equal the negatives of the printed ones.
    pub varpi_matches_negated_display: bool,
    pub closed: bool,
    pub display_closed: bool,
    /// `ϖ = dF` with `F` as printed.
    pub exact_with_f: bool,
    /// `ϖ = −dF`, i.e. `d ln τ = ϖ` for `τ = c·e^{−F}`.
    pub exact_with_minus_f: bool,
    pub varpi: [String; 3],
    pub potential: String,
    /// `τ` with the free constant `c`.
    pub tau: String,
    pub seconds: f64,
}

/// Builds `ϖ`, checks closedness and compares with the printed coefficients and potential.
pub fn potential_and_tau() -> Result<(Potential, TauReport), AlgebraError> {
    let start = Instant::now();
    let varpi = build_varpi()?;
    let display = displayed_varpi();
    let f = displayed_potential();
    let df = f.gradient()?;
    let exact_with_f = varpi == df;
    let exact_with_minus_f = varpi == df.neg();
    let potential = if exact_with_minus_f && !exact_with_f { f.neg() } else { f };
    let report = TauReport {
        varpi_matches_display: varpi == display,
        varpi_matches_negated_display: varpi == display.neg(),
        closed: varpi.is_closed(),
        display_closed: display.is_closed(),
        exact_with_f,
        exact_with_minus_f,
        varpi: std::array::from_fn(|i| varpi.coeff(i).to_string()),
        potential: potential.to_string(),
        tau: format!("c*exp({potential})"),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((potential, report))
}
