use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{AlgebraError, ExactScalar};

/// Hard cap on the number of variables of one ring.
pub const MAX_VARS: usize = 16;

/// Ordered variable names of a polynomial ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyRing {
    names: Vec<String>,
}

pub type Ring = Arc<PolyRing>;

impl PolyRing {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Ring, AlgebraError> {
        if names.len() > MAX_VARS {
            return Err(AlgebraError::TooManyVariables(names.len()));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || names[..i].contains(n) {
                return Err(AlgebraError::Parse(format!("bad or duplicate variable name {n:?}")));
            }
        }
        Ok(Arc::new(PolyRing { names }))
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, AlgebraError> {
        self.index_of(name).ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))
    }
}

/// Exponent vector with cached total degree. Ordered graded-lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    deg: u32,
    exps: [u16; MAX_VARS],
}

impl Monomial {
    pub const ONE: Monomial = Monomial { deg: 0, exps: [0; MAX_VARS] };

    pub fn var(i: usize, e: u16) -> Self {
        let mut m = Monomial::ONE;
        m.exps[i] = e;
        m.deg = e as u32;
        m
    }

    pub fn from_exps(exps: &[u16]) -> Self {
        let mut m = Monomial::ONE;
        for (i, &e) in exps.iter().enumerate() {
            m.exps[i] = e;
            m.deg += e as u32;
        }
        m
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn exps(&self) -> &[u16; MAX_VARS] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a = a.checked_add(*b).expect("exponent overflow");
        }
        Monomial { deg: self.deg + other.deg, exps }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.deg <= other.deg && self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// `self / other`, assuming `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a -= *b;
        }
        Monomial { deg: self.deg - other.deg, exps }
    }

    pub fn meet(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        let mut deg = 0;
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a = (*a).min(*b);
            deg += *a as u32;
        }
        Monomial { deg, exps }
    }

    pub fn with_exp(&self, i: usize, e: u16) -> Monomial {
        let mut m = *self;
        m.deg = m.deg - m.exps[i] as u32 + e as u32;
        m.exps[i] = e;
        m
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.deg.cmp(&other.deg).then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.exps[..])
    }
}

/// Sparse polynomial over the rationals; terms are kept sorted by decreasing monomial.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    ring: Ring,
    terms: Vec<(Monomial, ExactScalar)>,
}

fn same_ring(a: &Ring, b: &Ring) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl MultiPoly {
    pub fn zero(ring: &Ring) -> Self {
        MultiPoly { ring: ring.clone(), terms: Vec::new() }
    }

    pub fn one(ring: &Ring) -> Self {
        Self::constant(ring, ExactScalar::one())
    }

    pub fn constant(ring: &Ring, c: ExactScalar) -> Self {
        let terms = if c.is_zero() { Vec::new() } else { vec![(Monomial::ONE, c)] };
        MultiPoly { ring: ring.clone(), terms }
    }

    pub fn int(ring: &Ring, n: i64) -> Self {
        Self::constant(ring, ExactScalar::from(n))
    }

    pub fn var(ring: &Ring, i: usize) -> Self {
        assert!(i < ring.nvars(), "variable index out of range");
        MultiPoly { ring: ring.clone(), terms: vec![(Monomial::var(i, 1), ExactScalar::one())] }
    }

    pub fn var_named(ring: &Ring, name: &str) -> Result<Self, AlgebraError> {
        Ok(Self::var(ring, ring.require(name)?))
    }

    pub fn monomial(ring: &Ring, m: Monomial, c: ExactScalar) -> Self {
        let terms = if c.is_zero() { Vec::new() } else { vec![(m, c)] };
        MultiPoly { ring: ring.clone(), terms }
    }

    /// Builds from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Monomial, ExactScalar)>) -> Self {
        let mut map: HashMap<Monomial, ExactScalar> = HashMap::new();
        for (m, c) in terms {
            debug_assert!(m.exps[ring.nvars()..].iter().all(|&e| e == 0));
            *map.entry(m).or_default() += &c;
        }
        Self::from_map(ring, map)
    }

    fn from_map(ring: &Ring, map: HashMap<Monomial, ExactScalar>) -> Self {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        MultiPoly { ring: ring.clone(), terms }
    }

    /// Trusts that `terms` are strictly decreasing with nonzero coefficients.
    fn from_sorted(ring: &Ring, terms: Vec<(Monomial, ExactScalar)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|t| !t.1.is_zero()));
        MultiPoly { ring: ring.clone(), terms }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &[(Monomial, ExactScalar)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    /// The value if the polynomial is constant (zero included).
    pub fn as_constant(&self) -> Option<ExactScalar> {
        match self.terms.as_slice() {
            [] => Some(ExactScalar::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn leading(&self) -> Option<&(Monomial, ExactScalar)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> ExactScalar {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_default()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|t| t.0.deg).unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u16 {
        self.terms.iter().map(|t| t.0.exps[i]).max().unwrap_or(0)
    }

    /// Bit mask of variables that occur.
    pub fn used_vars(&self) -> u32 {
        let mut mask = 0u32;
        for (m, _) in &self.terms {
            for i in 0..self.ring.nvars() {
                if m.exps[i] > 0 {
                    mask |= 1 << i;
                }
            }
        }
        mask
    }

    pub fn min_exponents(&self) -> Monomial {
        let mut it = self.terms.iter();
        match it.next() {
            None => Monomial::ONE,
            Some(first) => it.fold(first.0, |acc, t| acc.meet(&t.0)),
        }
    }

    pub fn check_ring(&self, other: &MultiPoly) {
        assert!(same_ring(&self.ring, &other.ring), "polynomials live in different rings");
    }

    fn merge(&self, other: &MultiPoly, negate: bool) -> MultiPoly {
        self.check_ring(other);
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0, c));
        }
        MultiPoly::from_sorted(&self.ring, out)
    }

    pub fn scale(&self, c: &ExactScalar) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.ring);
        }
        let terms = self.terms.iter().map(|(m, a)| (*m, a * c)).collect();
        MultiPoly::from_sorted(&self.ring, terms)
    }

    /// Multiplication by a single term; order is preserved.
    pub fn mul_term(&self, m: &Monomial, c: &ExactScalar) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.ring);
        }
        let terms = self.terms.iter().map(|(mm, a)| (mm.mul(m), a * c)).collect();
        MultiPoly::from_sorted(&self.ring, terms)
    }

    pub fn mul_poly(&self, other: &MultiPoly) -> MultiPoly {
        self.check_ring(other);
        if self.is_zero() || other.is_zero() {
            return MultiPoly::zero(&self.ring);
        }
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.len() <= 4 {
            let mut acc = MultiPoly::zero(&self.ring);
            for (m, c) in &small.terms {
                acc = acc.merge(&big.mul_term(m, c), false);
            }
            return acc;
        }
        let mut map: HashMap<Monomial, ExactScalar> = HashMap::with_capacity(big.len() * 2);
        for (ma, ca) in &small.terms {
            for (mb, cb) in &big.terms {
                let prod = ca * cb;
                map.entry(ma.mul(mb))
                    .and_modify(|e| *e += &prod)
                    .or_insert(prod);
            }
        }
        MultiPoly::from_map(&self.ring, map)
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut result = MultiPoly::one(&self.ring);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_poly(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_poly(&base);
            }
        }
        result
    }

    pub fn derivative(&self, i: usize) -> MultiPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exps[i] > 0)
            .map(|(m, c)| {
                let e = m.exps[i];
                (m.with_exp(i, e - 1), c * &ExactScalar::from(e as i64))
            })
            .collect::<Vec<_>>();
        // subtracting the same exponent vector preserves the order
        MultiPoly::from_sorted(&self.ring, terms)
    }

    /// Coefficients with respect to variable `i`: `self = Σ_k out[k] · v_i^k`.
    pub fn coeffs_in(&self, i: usize) -> Vec<MultiPoly> {
        let deg = self.degree_in(i) as usize;
        let mut buckets: Vec<Vec<(Monomial, ExactScalar)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            buckets[m.exps[i] as usize].push((m.with_exp(i, 0), c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut b| {
                b.sort_unstable_by(|x, y| y.0.cmp(&x.0));
                MultiPoly::from_sorted(&self.ring, b)
            })
            .collect()
    }

    /// Leading coefficient as a polynomial in variable `i`.
    pub fn lead_in(&self, i: usize) -> MultiPoly {
        let d = self.degree_in(i);
        let mut b: Vec<_> = self
            .terms
            .iter()
            .filter(|(m, _)| m.exps[i] == d)
            .map(|(m, c)| (m.with_exp(i, 0), c.clone()))
            .collect();
        b.sort_unstable_by(|x, y| y.0.cmp(&x.0));
        MultiPoly::from_sorted(&self.ring, b)
    }

    pub fn eval(&self, point: &[ExactScalar]) -> ExactScalar {
        assert_eq!(point.len(), self.ring.nvars(), "point has wrong arity");
        let mut powers: Vec<Vec<ExactScalar>> = Vec::with_capacity(point.len());
        for (i, p) in point.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut row = Vec::with_capacity(d + 1);
            row.push(ExactScalar::one());
            for k in 1..=d {
                let next = &row[k - 1] * p;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = ExactScalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, row) in powers.iter().enumerate() {
                let e = m.exps[i] as usize;
                if e > 0 {
                    t *= &row[e];
                }
            }
            acc += &t;
        }
        acc
    }

    /// Replaces variable `i` by a constant; the variable stays in the ring.
    pub fn substitute_scalar(&self, i: usize, value: &ExactScalar) -> MultiPoly {
        let d = self.degree_in(i) as usize;
        let mut pw = vec![ExactScalar::one()];
        for k in 1..=d {
            let next = &pw[k - 1] * value;
            pw.push(next);
        }
        MultiPoly::from_terms(
            &self.ring,
            self.terms.iter().map(|(m, c)| (m.with_exp(i, 0), c * &pw[m.exps[i] as usize])),
        )
    }

    /// Ring homomorphism sending variable `k` to `images[k]` (all in `target`).
    pub fn compose(&self, target: &Ring, images: &[MultiPoly]) -> MultiPoly {
        assert_eq!(images.len(), self.ring.nvars());
        let mut cache: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|p| {
                assert!(same_ring(p.ring(), target));
                vec![MultiPoly::one(target), p.clone()]
            })
            .collect();
        let mut acc = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for k in 0..self.ring.nvars() {
                let e = m.exps[k] as usize;
                if e == 0 {
                    continue;
                }
                while cache[k].len() <= e {
                    let next = cache[k].last().unwrap().mul_poly(&cache[k][1]);
                    cache[k].push(next);
                }
                t = t.mul_poly(&cache[k][e]);
            }
            acc = acc + t;
        }
        acc
    }

    /// Renames into `target`; `map[k]` is the target index of variable `k`.
    pub fn embed(&self, target: &Ring, map: &[usize]) -> MultiPoly {
        assert_eq!(map.len(), self.ring.nvars());
        MultiPoly::from_terms(
            target,
            self.terms.iter().map(|(m, c)| {
                let mut exps = [0u16; MAX_VARS];
                for (k, &tk) in map.iter().enumerate() {
                    exps[tk] += m.exps[k];
                }
                (Monomial::from_exps(&exps[..target.nvars()]), c.clone())
            }),
        )
    }

    /// Moves into a ring whose variables are matched by name.
    pub fn embed_by_name(&self, target: &Ring) -> Result<MultiPoly, AlgebraError> {
        let used = self.used_vars();
        let mut map = Vec::with_capacity(self.ring.nvars());
        for (k, n) in self.ring.names().iter().enumerate() {
            match target.index_of(n) {
                Some(t) => map.push(t),
                None if used & (1 << k) == 0 => map.push(0),
                None => return Err(AlgebraError::UnknownVariable(n.clone())),
            }
        }
        Ok(self.embed(target, &map))
    }

    /// Exact quotient if `divisor` divides `self`, otherwise `None`.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        self.check_ring(divisor);
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(self.clone());
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.recip().ok()?));
        }
        let (lm, lc) = divisor.terms[0].clone();
        let inv = lc.recip().ok()?;
        if divisor.len() == 1 {
            let mut out = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                if !lm.divides(m) {
                    return None;
                }
                out.push((m.div(&lm), c * &inv));
            }
            return Some(MultiPoly::from_sorted(&self.ring, out));
        }
        for i in 0..self.ring.nvars() {
            if divisor.degree_in(i) > self.degree_in(i) {
                return None;
            }
        }
        let mut rem: BTreeMap<Monomial, ExactScalar> =
            self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            if !lm.divides(&m) {
                return None;
            }
            let qm = m.div(&lm);
            let qc = &c * &inv;
            for (dm, dc) in &divisor.terms[1..] {
                let key = dm.mul(&qm);
                let delta = dc * &qc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= &delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Some(MultiPoly::from_sorted(&self.ring, quot))
    }

    /// Rational content: positive gcd of numerators over lcm of denominators.
    pub fn content(&self) -> ExactScalar {
        let mut it = self.terms.iter();
        let Some(first) = it.next() else { return ExactScalar::one() };
        let mut g = first.1.abs();
        for (_, c) in it {
            if g.is_one() {
                break;
            }
            g = g.content_gcd(c);
        }
        g
    }

    /// Integer primitive part with positive leading coefficient.
    pub fn primitive(&self) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.content();
        if self.terms[0].1.is_negative() {
            c = -c;
        }
        self.scale(&c.recip().expect("nonzero content"))
    }

    /// Scaled to leading coefficient one.
    pub fn monic(&self) -> MultiPoly {
        match self.terms.first() {
            None => self.clone(),
            Some((_, lc)) if lc.is_one() => self.clone(),
            Some((_, lc)) => self.scale(&lc.recip().expect("nonzero")),
        }
    }

    /// Canonical text: the variable line, then `exponent-vector: coefficient` lines.
    pub fn to_canonical_text(&self) -> String {
        let mut s = format!("vars: {}\n", self.ring.names().join(" "));
        self.write_terms(&mut s);
        s
    }

    pub(crate) fn write_terms(&self, s: &mut String) {
        use std::fmt::Write;
        let n = self.ring.nvars();
        for (m, c) in &self.terms {
            let exps: Vec<String> = m.exps[..n].iter().map(|e| e.to_string()).collect();
            let _ = writeln!(s, "[{}]: {}", exps.join(","), c);
        }
    }

    pub fn from_canonical_text(text: &str) -> Result<MultiPoly, AlgebraError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let ring = parse_vars_line(lines.next())?;
        parse_term_lines(&ring, lines)
    }

    /// Human-readable infix form.
    pub fn to_infix(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if idx > 0 {
                out.push_str(if neg { " - " } else { " + " });
            } else if neg {
                out.push('-');
            }
            let a = c.abs();
            let mut factors = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(a.to_string());
            }
            for i in 0..self.ring.nvars() {
                match m.exps[i] {
                    0 => {}
                    1 => factors.push(self.ring.name(i).to_string()),
                    e => factors.push(format!("{}^{}", self.ring.name(i), e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

pub(crate) fn parse_vars_line(line: Option<&str>) -> Result<Ring, AlgebraError> {
    let line = line.ok_or_else(|| AlgebraError::Parse("missing vars line".into()))?;
    let rest = line
        .trim()
        .strip_prefix("vars:")
        .ok_or_else(|| AlgebraError::Parse(format!("expected `vars:` line, got {line:?}")))?;
    let names: Vec<&str> = rest.split_whitespace().collect();
    PolyRing::new(&names)
}

pub(crate) fn parse_term_lines<'a>(
    ring: &Ring,
    lines: impl Iterator<Item = &'a str>,
) -> Result<MultiPoly, AlgebraError> {
    let mut terms = Vec::new();
    for line in lines {
        let (lhs, rhs) = line
            .split_once("]:")
            .ok_or_else(|| AlgebraError::Parse(format!("bad term line {line:?}")))?;
        let lhs = lhs
            .trim()
            .strip_prefix('[')
            .ok_or_else(|| AlgebraError::Parse(format!("bad exponent vector {line:?}")))?;
        let exps: Vec<u16> = if lhs.trim().is_empty() {
            Vec::new()
        } else {
            lhs.split(',')
                .map(|e| e.trim().parse::<u16>())
                .collect::<Result<_, _>>()
                .map_err(|_| AlgebraError::Parse(format!("bad exponent in {line:?}")))?
        };
        if exps.len() != ring.nvars() {
            return Err(AlgebraError::Parse(format!("exponent vector length mismatch in {line:?}")));
        }
        let c: ExactScalar = rhs.trim().parse()?;
        terms.push((Monomial::from_exps(&exps), c));
    }
    Ok(MultiPoly::from_terms(ring, terms))
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_infix())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_infix())
    }
}

impl Add<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.merge(rhs, false)
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        self.merge(&rhs, false)
    }
}

impl Sub<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.merge(rhs, true)
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        self.merge(&rhs, true)
    }
}

impl Mul<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.mul_poly(rhs)
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        self.mul_poly(&rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c)).collect();
        MultiPoly::from_sorted(&self.ring, terms)
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Ring {
        PolyRing::new(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn grlex_order() {
        let a = Monomial::from_exps(&[2, 0, 0]);
        let b = Monomial::from_exps(&[1, 1, 0]);
        let c = Monomial::from_exps(&[0, 0, 3]);
        assert!(a > b);
        assert!(c > a);
    }

    #[test]
    fn arithmetic_and_division() {
        let r = ring();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let one = MultiPoly::one(&r);
        let p = &(&x + &y) * &(&x - &one);
        let q = p.div_exact(&(&x - &one)).unwrap();
        assert_eq!(q, &x + &y);
        assert!(p.div_exact(&(&y - &one)).is_none());
        assert_eq!((&x * &x).derivative(0), x.scale(&ExactScalar::from(2)));
    }

    #[test]
    fn canonical_text_round_trip() {
        let r = ring();
        let x = MultiPoly::var(&r, 0);
        let z = MultiPoly::var(&r, 2);
        let p = &(&x * &x).scale(&ExactScalar::ratio(3, 2)) - &z;
        let text = p.to_canonical_text();
        assert_eq!(text, "vars: x y z\n[2,0,0]: 3/2\n[0,0,1]: -1\n");
        assert_eq!(MultiPoly::from_canonical_text(&text).unwrap(), p);
    }

    #[test]
    fn compose_substitutes() {
        let r = ring();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let z = MultiPoly::var(&r, 2);
        let p = &(&x * &x) + &y;
        let img = vec![&y + &z, y.clone(), z.clone()];
        let got = p.compose(&r, &img);
        assert_eq!(got, &(&(&y + &z) * &(&y + &z)) + &y);
    }
}
