//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive primitive-PRS with two shortcuts: a variable that occurs in only
//! one operand is eliminated through the content, and a modular univariate
//! image bounds the degree of the gcd in each variable (a zero bound proves
//! the gcd is free of that variable).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{Monomial, MultiPoly};

use super::modp::{self, add as addmod, inv as invmod, mul as mulmod, pow as powmod, sub as submod, PRIME};

/// Image in Z_p[v] after evaluating every other variable at `vals`.
fn univariate_image(p: &MultiPoly, coeffs: &[u64], v: usize, vals: &[u64]) -> Vec<u64> {
    let n = p.ring().nvars();
    let mut out = vec![0u64; p.degree_in(v) as usize + 1];
    for ((m, _), &c) in p.terms().iter().zip(coeffs) {
        let mut t = c;
        for k in 0..n {
            if k != v && m.exp(k) > 0 {
                t = mulmod(t, powmod(vals[k], m.exp(k) as u64));
            }
        }
        let slot = &mut out[m.exp(v) as usize];
        *slot = addmod(*slot, t);
    }
    out
}

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let lb_inv = invmod(*b.last().unwrap()).unwrap();
        while a.len() >= b.len() {
            let f = mulmod(*a.last().unwrap(), lb_inv);
            let shift = a.len() - b.len();
            for (i, &bc) in b.iter().enumerate() {
                a[shift + i] = submod(a[shift + i], mulmod(f, bc));
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Upper bound for the degree in `v` of gcd(a, b); exact with high probability.
fn degree_bound(a: &MultiPoly, b: &MultiPoly, v: usize, rng: &mut ChaCha8Rng) -> usize {
    let fallback = a.degree_in(v).min(b.degree_in(v)) as usize;
    let (Some(ca), Some(cb)) = (modp::coeffs(a), modp::coeffs(b)) else {
        return fallback;
    };
    let n = a.ring().nvars();
    let (da, db) = (a.degree_in(v) as usize, b.degree_in(v) as usize);
    for _ in 0..4 {
        let vals: Vec<u64> = (0..n).map(|_| rng.gen_range(1..PRIME)).collect();
        let ia = univariate_image(a, &ca, v, &vals);
        let ib = univariate_image(b, &cb, v, &vals);
        // leading coefficients must survive, otherwise the bound is not rigorous
        if ia[da] == 0 || ib[db] == 0 {
            continue;
        }
        return univariate_gcd_degree(ia, ib);
    }
    fallback
}

/// gcd with leading coefficient one; gcd(0, 0) = 0.
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    a.check_ring(b);
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9 ^ (a.len() as u64) << 20 ^ b.len() as u64);
    gcd_nonzero(a, b, &mut rng).monic()
}

fn gcd_nonzero(a: &MultiPoly, b: &MultiPoly, rng: &mut ChaCha8Rng) -> MultiPoly {
    let ring = a.ring();
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(ring);
    }
    let ma = a.min_exponents();
    let mb = b.min_exponents();
    let common = ma.meet(&mb);
    let a1 = strip_monomial(a, &ma);
    let b1 = strip_monomial(b, &mb);
    let mono = MultiPoly::monomial(ring, common, super::ExactScalar::one());
    if a1.is_constant() || b1.is_constant() {
        return mono;
    }
    &mono * &gcd_no_monomial(&a1, &b1, rng)
}

fn strip_monomial(p: &MultiPoly, m: &Monomial) -> MultiPoly {
    if m.is_one() {
        return p.clone();
    }
    let d = MultiPoly::monomial(p.ring(), *m, super::ExactScalar::one());
    p.div_exact(&d).expect("monomial content divides")
}

fn fold_gcd(start: MultiPoly, polys: impl IntoIterator<Item = MultiPoly>, rng: &mut ChaCha8Rng) -> MultiPoly {
    let mut g = start;
    for p in polys {
        if p.is_zero() {
            continue;
        }
        if g.is_constant() {
            break;
        }
        g = gcd_nonzero(&g, &p, rng).monic();
    }
    if g.is_constant() {
        MultiPoly::one(g.ring())
    } else {
        g
    }
}

fn sorted_by_size(mut v: Vec<MultiPoly>) -> Vec<MultiPoly> {
    v.retain(|p| !p.is_zero());
    v.sort_by_key(|p| (p.total_degree(), p.len()));
    v
}

fn gcd_no_monomial(a: &MultiPoly, b: &MultiPoly, rng: &mut ChaCha8Rng) -> MultiPoly {
    let ring = a.ring();
    let (ua, ub) = (a.used_vars(), b.used_vars());
    if let Some(v) = first_bit(ua & !ub) {
        return fold_gcd(b.clone(), sorted_by_size(a.coeffs_in(v)), rng);
    }
    if let Some(v) = first_bit(ub & !ua) {
        return fold_gcd(a.clone(), sorted_by_size(b.coeffs_in(v)), rng);
    }
    if a.primitive() == b.primitive() {
        return a.clone();
    }
    let vars: Vec<usize> = (0..ring.nvars()).filter(|&v| ua & (1 << v) != 0).collect();
    let mut bounds = Vec::with_capacity(vars.len());
    for &v in &vars {
        let d = degree_bound(a, b, v, rng);
        if d == 0 {
            // the gcd is free of v, so it divides every coefficient in v
            let mut coeffs = a.coeffs_in(v);
            coeffs.extend(b.coeffs_in(v));
            let coeffs = sorted_by_size(coeffs);
            let (first, rest) = coeffs.split_first().expect("nonempty");
            return fold_gcd(first.clone(), rest.iter().cloned(), rng);
        }
        bounds.push(d);
    }
    let (small, large) = if (b.total_degree(), b.len()) <= (a.total_degree(), a.len()) { (b, a) } else { (a, b) };
    if vars.iter().zip(&bounds).all(|(&v, &d)| d == small.degree_in(v) as usize) && large.div_exact(small).is_some() {
        return small.clone();
    }
    let main = *vars
        .iter()
        .min_by_key(|&&v| (a.degree_in(v).min(b.degree_in(v)), a.degree_in(v) + b.degree_in(v)))
        .expect("nonconstant");
    prs_gcd(a, b, main, rng)
}

fn first_bit(mask: u32) -> Option<usize> {
    if mask == 0 {
        None
    } else {
        Some(mask.trailing_zeros() as usize)
    }
}

fn content_in(p: &MultiPoly, v: usize, rng: &mut ChaCha8Rng) -> MultiPoly {
    let coeffs = sorted_by_size(p.coeffs_in(v));
    let (first, rest) = coeffs.split_first().expect("nonzero polynomial");
    fold_gcd(first.clone(), rest.iter().cloned(), rng)
}

fn primitive_in(p: &MultiPoly, v: usize, rng: &mut ChaCha8Rng) -> MultiPoly {
    let c = content_in(p, v, rng);
    let q = if c.is_constant() { p.clone() } else { p.div_exact(&c).expect("content divides") };
    q.primitive()
}

/// Sparse pseudo-remainder of `a` by `b` with respect to `v`.
fn pseudo_rem(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let db = b.degree_in(v);
    let lb = b.lead_in(v);
    let ring = a.ring();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = r.lead_in(v);
        let shift = MultiPoly::monomial(ring, Monomial::var(v, dr - db), super::ExactScalar::one());
        r = &(&lb * &r) - &(&(&lr * &shift) * b);
        r = r.primitive();
    }
    r
}

fn prs_gcd(a: &MultiPoly, b: &MultiPoly, v: usize, rng: &mut ChaCha8Rng) -> MultiPoly {
    let ca = content_in(a, v, rng);
    let cb = content_in(b, v, rng);
    let c = if ca.is_constant() || cb.is_constant() {
        MultiPoly::one(a.ring())
    } else {
        gcd_nonzero(&ca, &cb, rng)
    };
    let mut pa = if ca.is_constant() { a.primitive() } else { a.div_exact(&ca).expect("content divides") };
    let mut pb = if cb.is_constant() { b.primitive() } else { b.div_exact(&cb).expect("content divides") };
    if pa.degree_in(v) < pb.degree_in(v) {
        std::mem::swap(&mut pa, &mut pb);
    }
    loop {
        let r = pseudo_rem(&pa, &pb, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            pb = MultiPoly::one(a.ring());
            break;
        }
        pa = pb;
        pb = primitive_in(&r, v, rng);
    }
    let g = primitive_in(&pb, v, rng);
    (&c * &g).monic()
}

/// Largest power of `f` dividing `p`, and the cofactor.
pub fn strip_factor(p: &MultiPoly, f: &MultiPoly, max: u32) -> (u32, MultiPoly) {
    let mut k = 0;
    let mut cur = p.clone();
    while k < max {
        match cur.div_exact(f) {
            Some(q) => {
                cur = q;
                k += 1;
            }
            None => break,
        }
    }
    (k, cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ExactScalar, PolyRing};

    #[test]
    fn simple_common_factor() {
        let r = PolyRing::new(&["x", "y"]).unwrap();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let one = MultiPoly::one(&r);
        let f = &(&x * &y) + &one;
        let a = &f * &(&x - &y);
        let b = &f * &(&x + &(&y * &y));
        assert_eq!(gcd(&a, &b), f.monic());
        assert!(gcd(&(&x - &y), &(&x + &y)).is_one());
    }

    #[test]
    fn monomial_and_rational_content() {
        let r = PolyRing::new(&["x", "y"]).unwrap();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let a = (&(&x * &x) * &y).scale(&ExactScalar::ratio(3, 2));
        let b = (&x * &(&y + &x)).scale(&ExactScalar::from(6));
        assert_eq!(gcd(&a, &b), x);
    }

    #[test]
    fn gcd_of_powers() {
        let r = PolyRing::new(&["x", "y", "z"]).unwrap();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let z = MultiPoly::var(&r, 2);
        let f = &(&x - &y) + &z;
        let g = &(&x * &z) - &MultiPoly::int(&r, 2);
        let a = &f.pow(3) * &g;
        let b = &f.pow(2) * &(&g + &y).pow(2);
        assert_eq!(gcd(&a, &b), f.pow(2).monic());
    }
}
