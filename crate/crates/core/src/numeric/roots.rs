//! Roots of univariate polynomials at high precision.

use super::hp::{HpComplex, HpFloat};

fn horner(coeffs: &[HpComplex], x: &HpComplex) -> HpComplex {
    let mut acc = coeffs.last().expect("nonempty").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = &(&acc * x) + c;
    }
    acc
}

fn derivative(coeffs: &[HpComplex]) -> Vec<HpComplex> {
    let prec = coeffs[0].prec();
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale_real(&HpFloat::from_i64(k as i64, prec)))
        .collect()
}

/// All roots of `Σ coeffs[k] x^k` (leading coefficient nonzero) by Weierstrass
/// iteration followed by Newton polishing. Roots are assumed simple.
pub fn poly_roots(coeffs: &[HpComplex], max_iter: usize) -> Vec<HpComplex> {
    let n = coeffs.len() - 1;
    assert!(n >= 1, "constant polynomial has no roots");
    let prec = coeffs.iter().map(HpComplex::prec).max().unwrap();
    let lead = coeffs[n].clone();
    let monic: Vec<HpComplex> = coeffs.iter().map(|c| c / &lead).collect();
    let seed = HpComplex::from_f64(0.4, 0.9, prec);
    let mut z: Vec<HpComplex> = Vec::with_capacity(n);
    let mut p = HpComplex::one(prec);
    for _ in 0..n {
        z.push(p.clone());
        p = &p * &seed;
    }
    let tol = -(prec as f64) * std::f64::consts::LOG10_2 + 4.0;
    for _ in 0..max_iter {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            let mut den = HpComplex::one(prec);
            for j in 0..n {
                if i != j {
                    den = &den * &(&z[i] - &z[j]);
                }
            }
            if den.is_zero() {
                continue;
            }
            let step = &horner(&monic, &z[i]) / &den;
            worst = worst.max(step.log10_abs() - z[i].log10_abs().max(0.0));
            z[i] = &z[i] - &step;
        }
        if worst < tol {
            break;
        }
    }
    let d = derivative(&monic);
    for r in z.iter_mut() {
        for _ in 0..3 {
            let dv = horner(&d, r);
            if dv.is_zero() {
                break;
            }
            *r = &*r - &(&horner(&monic, r) / &dv);
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::bits_for_digits;

    #[test]
    fn cubic_with_rational_roots() {
        let prec = bits_for_digits(50);
        // 2x^3 - 3x^2 - 3x + 2 = (x + 1)(2x - 1)(x - 2)
        let c: Vec<HpComplex> = [2, -3, -3, 2].iter().rev().map(|&k| HpComplex::from_i64(k, prec)).collect();
        let mut roots: Vec<f64> = poly_roots(&c, 200).iter().map(|r| r.re.to_f64()).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in roots.iter().zip([-1.0, 0.5, 2.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }
}
