//! Exact expressions compiled to nested Horner form for repeated numeric evaluation.

use crate::algebra::{AlgebraError, FactoredFrac, MultiPoly, RatFunc};

use super::hp::{HpComplex, HpFloat};

#[derive(Clone, Debug)]
enum Node {
    Const(HpFloat),
    /// `Σ child_k · v^{power_k}`, powers strictly decreasing.
    Horner { var: usize, terms: Vec<(u16, Node)> },
}

/// A polynomial ready for fast evaluation at [`HpComplex`] points.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    root: Node,
    max_deg: Vec<u16>,
    prec: u32,
}

fn build(p: &MultiPoly, from: usize, prec: u32) -> Node {
    if let Some(c) = p.as_constant() {
        return Node::Const(HpFloat::from_exact(&c, prec));
    }
    let n = p.ring().nvars();
    let used = p.used_vars();
    let var = (from..n).find(|&v| used & (1 << v) != 0).expect("nonconstant polynomial uses a variable");
    let coeffs = p.coeffs_in(var);
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate().rev() {
        if !c.is_zero() {
            terms.push((k as u16, build(c, var + 1, prec)));
        }
    }
    Node::Horner { var, terms }
}

fn eval_node(node: &Node, powers: &[Vec<HpComplex>], prec: u32) -> HpComplex {
    match node {
        Node::Const(c) => HpComplex::real(c.clone()),
        Node::Horner { var, terms } => {
            let row = &powers[*var];
            let mut acc: Option<HpComplex> = None;
            let mut prev = 0u16;
            for (k, child) in terms {
                let c = eval_node(child, powers, prec);
                acc = Some(match acc {
                    None => c,
                    Some(a) => &(&a * &row[(prev - k) as usize]) + &c,
                });
                prev = *k;
            }
            let a = acc.unwrap_or_else(|| HpComplex::zero(prec));
            if prev == 0 {
                a
            } else {
                &a * &row[prev as usize]
            }
        }
    }
}

fn power_table(point: &[HpComplex], max_deg: &[u16], prec: u32) -> Vec<Vec<HpComplex>> {
    point
        .iter()
        .zip(max_deg)
        .map(|(x, &d)| {
            let mut row = Vec::with_capacity(d as usize + 1);
            row.push(HpComplex::one(prec));
            for k in 1..=d as usize {
                let next = &row[k - 1] * x;
                row.push(next);
            }
            row
        })
        .collect()
}

impl CompiledPoly {
    pub fn new(p: &MultiPoly, prec: u32) -> Self {
        let nvars = p.ring().nvars();
        let max_deg = (0..nvars).map(|v| p.degree_in(v)).collect();
        CompiledPoly { nvars, root: build(p, 0, prec), max_deg, prec }
    }

    pub fn eval(&self, point: &[HpComplex]) -> HpComplex {
        assert_eq!(point.len(), self.nvars);
        let powers = power_table(point, &self.max_deg, self.prec);
        eval_node(&self.root, &powers, self.prec)
    }

    fn eval_with(&self, powers: &[Vec<HpComplex>]) -> HpComplex {
        eval_node(&self.root, powers, self.prec)
    }
}

/// A compiled [`FactoredFrac`]: numerator in Horner form, denominator as factor powers.
#[derive(Clone, Debug)]
pub struct CompiledFrac {
    num: CompiledPoly,
    den: Vec<(CompiledPoly, u32)>,
}

impl CompiledFrac {
    pub fn new(f: &FactoredFrac, prec: u32) -> Self {
        let den = f
            .basis()
            .factors()
            .iter()
            .zip(f.den_exponents())
            .filter(|(_, &e)| e > 0)
            .map(|(g, &e)| (CompiledPoly::new(g, prec), e))
            .collect();
        CompiledFrac { num: CompiledPoly::new(f.num(), prec), den }
    }

    pub fn eval(&self, point: &[HpComplex]) -> Result<HpComplex, AlgebraError> {
        let powers = power_table(point, &self.num.max_deg, self.num.prec);
        let n = self.num.eval_with(&powers);
        let mut d = HpComplex::one(self.num.prec);
        for (g, e) in &self.den {
            let v = g.eval(point);
            if v.is_zero() {
                return Err(AlgebraError::Pole);
            }
            d = &d * &v.pow_u(*e);
        }
        Ok(&n / &d)
    }
}

/// A compiled [`RatFunc`].
#[derive(Clone, Debug)]
pub struct CompiledRatFunc {
    num: CompiledPoly,
    den: CompiledPoly,
}

impl CompiledRatFunc {
    pub fn new(r: &RatFunc, prec: u32) -> Self {
        CompiledRatFunc { num: CompiledPoly::new(r.num(), prec), den: CompiledPoly::new(r.den(), prec) }
    }

    pub fn eval(&self, point: &[HpComplex]) -> Result<HpComplex, AlgebraError> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(AlgebraError::Pole);
        }
        Ok(&self.num.eval(point) / &d)
    }
}

/// One-off evaluation of a rational function at a high-precision complex point.
pub fn eval_ratfunc_hp(r: &RatFunc, point: &[HpComplex], prec: u32) -> Result<HpComplex, AlgebraError> {
    CompiledRatFunc::new(r, prec).eval(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ExactScalar, PolyRing};
    use crate::numeric::bits_for_digits;

    #[test]
    fn horner_matches_exact() {
        let r = PolyRing::new(&["x", "y", "z"]).unwrap();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let z = MultiPoly::var(&r, 2);
        let p = &(&(&x * &x) * &y).scale(&ExactScalar::ratio(3, 7)) - &(&(&z.pow(3) * &x) + &MultiPoly::int(&r, 5));
        let pt = [ExactScalar::ratio(1, 3), ExactScalar::ratio(-2, 5), ExactScalar::from(7)];
        let exact = p.eval(&pt);
        let prec = bits_for_digits(40);
        let hp: Vec<HpComplex> = pt.iter().map(|v| HpComplex::from_exact(v, prec)).collect();
        let got = CompiledPoly::new(&p, prec).eval(&hp);
        let want = HpComplex::from_exact(&exact, prec);
        assert!((&got - &want).log10_abs() < -35.0);
    }
}
