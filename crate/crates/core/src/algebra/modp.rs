//! Arithmetic modulo the Mersenne prime 2^61 - 1, for cheap probabilistic filters.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::poly::MultiPoly;

pub(crate) const PRIME: u64 = 0x1fff_ffff_ffff_ffff;

pub(crate) fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

pub(crate) fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

pub(crate) fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + PRIME - b
    }
}

pub(crate) fn neg(a: u64) -> u64 {
    sub(0, a)
}

pub(crate) fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

pub(crate) fn inv(a: u64) -> Option<u64> {
    if a == 0 {
        None
    } else {
        Some(pow(a, PRIME - 2))
    }
}

pub(crate) fn from_int(n: &BigInt) -> u64 {
    n.mod_floor(&BigInt::from(PRIME)).to_u64().expect("reduced residue fits")
}

/// Coefficients reduced mod p; `None` when some denominator vanishes.
pub(crate) fn coeffs(p: &MultiPoly) -> Option<Vec<u64>> {
    p.terms()
        .iter()
        .map(|(_, c)| inv(from_int(c.denom())).map(|di| mul(from_int(c.numer()), di)))
        .collect()
}

pub(crate) fn eval(p: &MultiPoly, vals: &[u64]) -> Option<u64> {
    let cs = coeffs(p)?;
    let mut acc = 0;
    for ((m, _), c) in p.terms().iter().zip(cs) {
        let mut t = c;
        for (k, &v) in vals.iter().enumerate() {
            let e = m.exp(k);
            if e > 0 {
                t = mul(t, pow(v, e as u64));
            }
        }
        acc = add(acc, t);
    }
    Some(acc)
}
