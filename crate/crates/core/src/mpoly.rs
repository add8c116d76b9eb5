//! Sparse multivariate polynomials over [`RingParams`] coefficients.
//!
//! Terms are kept in a flat, lexicographically sorted layout: exponent
//! vectors (`u16` per variable) in one buffer and ring coefficients (`r_den`
//! residues per term) in another. Variables are always listed in the
//! canonical [`Var`] order, so the lexicographic order on exponent vectors
//! is the serialization order.
//!
//! Multiplying every term by one fixed monomial preserves the sort order, and
//! so do derivatives and coefficient extraction. Products are therefore
//! computed as a merge of shifted copies rather than by hashing.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{RamifiedElem, RingParams};

/// Polynomial variable. The derived order is the canonical variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// The single integration variable `t`.
    T,
    /// Integration variable `t_i` (1-based).
    Tn(u16),
    /// The single position `z`.
    Z,
    /// Position `z_i` (1-based).
    Zn(u16),
    /// The dynamical parameter.
    Lambda,
}

impl Var {
    /// `t_{i+1}` for a 0-based index.
    pub fn t(i: usize) -> Var {
        Var::Tn(u16::try_from(i + 1).expect("variable index fits u16"))
    }

    /// `z_{i+1}` for a 0-based index.
    pub fn z(i: usize) -> Var {
        Var::Zn(u16::try_from(i + 1).expect("variable index fits u16"))
    }

    pub fn name(&self) -> String {
        match self {
            Var::T => "t".into(),
            Var::Tn(i) => format!("t{i}"),
            Var::Z => "z".into(),
            Var::Zn(i) => format!("z{i}"),
            Var::Lambda => "lambda".into(),
        }
    }

    pub fn parse(name: &str) -> Option<Var> {
        let indexed = |rest: &str| -> Option<u16> {
            if rest.starts_with('0') {
                return None;
            }
            rest.parse().ok().filter(|&i| i > 0)
        };
        match name {
            "t" => Some(Var::T),
            "z" => Some(Var::Z),
            "lambda" => Some(Var::Lambda),
            _ => {
                if let Some(rest) = name.strip_prefix('t') {
                    indexed(rest).map(Var::Tn)
                } else if let Some(rest) = name.strip_prefix('z') {
                    indexed(rest).map(Var::Zn)
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn union_vars(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn canonical_vars(vars: &[Var]) -> Vec<Var> {
    let mut v = vars.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Sparse polynomial with coefficients in `Z[π]/(π^{r_den} − p)` modulo `p^s`.
#[derive(Clone)]
pub struct MultiPoly {
    ring: RingParams,
    vars: Vec<Var>,
    exps: Vec<u16>,
    coeffs: Vec<u64>,
}

impl MultiPoly {
    pub fn zero(ring: RingParams) -> Self {
        Self::zero_in(ring, &[])
    }

    /// The zero polynomial over the given variables.
    pub fn zero_in(ring: RingParams, vars: &[Var]) -> Self {
        MultiPoly {
            ring,
            vars: canonical_vars(vars),
            exps: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    pub fn one(ring: RingParams) -> Self {
        Self::constant(&RamifiedElem::one(ring))
    }

    pub fn constant(c: &RamifiedElem) -> Self {
        let ring = c.ring();
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.coeffs.extend_from_slice(c.coeffs());
        }
        p
    }

    pub fn from_int(ring: RingParams, c: i64) -> Self {
        Self::constant(&RamifiedElem::from_int(ring, c))
    }

    pub fn var(ring: RingParams, v: Var) -> Self {
        Self::monomial(ring, &[(v, 1)], &RamifiedElem::one(ring))
    }

    /// `c · Π v^e`.
    pub fn monomial(ring: RingParams, powers: &[(Var, u32)], c: &RamifiedElem) -> Self {
        let vars = canonical_vars(&powers.iter().map(|&(v, _)| v).collect::<Vec<_>>());
        let mut e = vec![0u32; vars.len()];
        for &(v, k) in powers {
            let idx = vars.binary_search(&v).unwrap();
            e[idx] += k;
        }
        Self::from_terms(ring, &vars, [(e, c.coeffs().to_vec())])
    }

    /// Build from arbitrary `(exponents, coefficients)` pairs; exponent vectors
    /// follow the order of `vars`. Terms are sorted and combined; zero
    /// coefficients are dropped.
    pub fn from_terms<I>(ring: RingParams, vars: &[Var], terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Vec<u64>)>,
    {
        let canon = canonical_vars(vars);
        assert_eq!(canon.len(), vars.len(), "duplicate variables");
        let perm: Vec<usize> = canon
            .iter()
            .map(|v| vars.iter().position(|x| x == v).unwrap())
            .collect();
        let w = ring.width();
        let mut rows: Vec<(Vec<u16>, Vec<u64>)> = terms
            .into_iter()
            .map(|(e, c)| {
                assert_eq!(e.len(), vars.len(), "exponent vector length");
                assert_eq!(c.len(), w, "coefficient width");
                let e = perm
                    .iter()
                    .map(|&i| u16::try_from(e[i]).expect("exponent fits u16"))
                    .collect();
                let c = c.into_iter().map(|x| x % ring.modulus()).collect();
                (e, c)
            })
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = Self::zero_in(ring, &canon);
        let mut i = 0;
        while i < rows.len() {
            let mut acc = rows[i].1.clone();
            let mut j = i + 1;
            while j < rows.len() && rows[j].0 == rows[i].0 {
                ring.add_assign_coeffs(&mut acc, &rows[j].1);
                j += 1;
            }
            if !RingParams::is_zero_coeffs(&acc) {
                out.exps.extend_from_slice(&rows[i].0);
                out.coeffs.extend_from_slice(&acc);
            }
            i = j;
        }
        out
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    fn nv(&self) -> usize {
        self.vars.len()
    }

    fn w(&self) -> usize {
        self.ring.width()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.coeffs.len() / self.w()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent vector of term `i` (in the order of [`vars`](Self::vars)).
    pub fn term_exps(&self, i: usize) -> &[u16] {
        let nv = self.nv();
        &self.exps[i * nv..(i + 1) * nv]
    }

    pub fn term_coeffs(&self, i: usize) -> &[u64] {
        let w = self.w();
        &self.coeffs[i * w..(i + 1) * w]
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], &[u64])> + '_ {
        (0..self.len()).map(move |i| (self.term_exps(i), self.term_coeffs(i)))
    }

    /// Terms as owned `(exponents, coefficients)` pairs, lexicographically sorted.
    pub fn to_terms(&self) -> Vec<(Vec<u32>, Vec<u64>)> {
        self.terms()
            .map(|(e, c)| (e.iter().map(|&x| x as u32).collect(), c.to_vec()))
            .collect()
    }

    /// Lexicographically smallest term, if any.
    pub fn lowest_term(&self) -> Option<(Vec<u32>, RamifiedElem)> {
        (!self.is_zero()).then(|| {
            (
                self.term_exps(0).iter().map(|&x| x as u32).collect(),
                RamifiedElem::from_raw(self.ring, self.term_coeffs(0).to_vec()),
            )
        })
    }

    /// The same polynomial over a superset of its variables.
    pub fn embed(&self, vars: &[Var]) -> MultiPoly {
        let target = canonical_vars(vars);
        if target == self.vars {
            return self.clone();
        }
        let pos: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                target
                    .binary_search(v)
                    .unwrap_or_else(|_| panic!("cannot embed: {v} missing from target"))
            })
            .collect();
        let nt = target.len();
        let mut exps = vec![0u16; self.len() * nt];
        for (i, (e, _)) in self.terms().enumerate() {
            for (k, &x) in e.iter().enumerate() {
                exps[i * nt + pos[k]] = x;
            }
        }
        MultiPoly {
            ring: self.ring,
            vars: target,
            exps,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Drop variables that occur with exponent zero in every term.
    pub fn trimmed(&self) -> MultiPoly {
        let nv = self.nv();
        let keep: Vec<usize> = (0..nv)
            .filter(|&k| self.terms().any(|(e, _)| e[k] > 0))
            .collect();
        if keep.len() == nv {
            return self.clone();
        }
        let mut exps = Vec::with_capacity(self.len() * keep.len());
        for (e, _) in self.terms() {
            exps.extend(keep.iter().map(|&k| e[k]));
        }
        MultiPoly {
            ring: self.ring,
            vars: keep.iter().map(|&k| self.vars[k]).collect(),
            exps,
            coeffs: self.coeffs.clone(),
        }
    }

    fn aligned<'a>(&'a self, other: &'a MultiPoly) -> (Cow<'a, MultiPoly>, Cow<'a, MultiPoly>) {
        assert_eq!(self.ring, other.ring, "polynomials over different rings");
        if self.vars == other.vars {
            return (Cow::Borrowed(self), Cow::Borrowed(other));
        }
        let u = union_vars(&self.vars, &other.vars);
        let a = if u == self.vars {
            Cow::Borrowed(self)
        } else {
            Cow::Owned(self.embed(&u))
        };
        let b = if u == other.vars {
            Cow::Borrowed(other)
        } else {
            Cow::Owned(other.embed(&u))
        };
        (a, b)
    }

    /// Merge two aligned polynomials, `a + b` or `a − b`.
    fn merge(a: &MultiPoly, b: &MultiPoly, subtract: bool) -> MultiPoly {
        let ring = a.ring;
        let (nv, w) = (a.nv(), a.w());
        let mut out = MultiPoly {
            ring,
            vars: a.vars.clone(),
            exps: Vec::with_capacity(a.exps.len() + b.exps.len()),
            coeffs: Vec::with_capacity(a.coeffs.len() + b.coeffs.len()),
        };
        let push_b = |out: &mut MultiPoly, j: usize| {
            out.exps.extend_from_slice(b.term_exps(j));
            let start = out.coeffs.len();
            out.coeffs.extend_from_slice(b.term_coeffs(j));
            if subtract {
                ring.neg_coeffs(&mut out.coeffs[start..]);
            }
        };
        let (na, nb) = (a.len(), b.len());
        let (mut i, mut j) = (0, 0);
        let mut scratch = vec![0u64; w];
        while i < na && j < nb {
            match a.term_exps(i).cmp(b.term_exps(j)) {
                Ordering::Less => {
                    out.exps.extend_from_slice(a.term_exps(i));
                    out.coeffs.extend_from_slice(a.term_coeffs(i));
                    i += 1;
                }
                Ordering::Greater => {
                    push_b(&mut out, j);
                    j += 1;
                }
                Ordering::Equal => {
                    scratch.copy_from_slice(b.term_coeffs(j));
                    if subtract {
                        ring.neg_coeffs(&mut scratch);
                    }
                    ring.add_assign_coeffs(&mut scratch, a.term_coeffs(i));
                    if !RingParams::is_zero_coeffs(&scratch) {
                        out.exps.extend_from_slice(a.term_exps(i));
                        out.coeffs.extend_from_slice(&scratch);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        if i < na {
            out.exps.extend_from_slice(&a.exps[i * nv..]);
            out.coeffs.extend_from_slice(&a.coeffs[i * w..]);
        }
        while j < nb {
            push_b(&mut out, j);
            j += 1;
        }
        out
    }

    /// Sum of many polynomials by a balanced merge tree.
    pub fn sum<I: IntoIterator<Item = MultiPoly>>(ring: RingParams, parts: I) -> MultiPoly {
        let mut parts: Vec<MultiPoly> = parts.into_iter().filter(|p| !p.is_zero()).collect();
        if parts.is_empty() {
            return MultiPoly::zero(ring);
        }
        let vars = parts
            .iter()
            .fold(Vec::new(), |acc, p| union_vars(&acc, &p.vars));
        for p in parts.iter_mut() {
            if p.vars != vars {
                *p = p.embed(&vars);
            }
        }
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len().div_ceil(2));
            let mut it = parts.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(MultiPoly::merge(&a, &b, false)),
                    None => next.push(a),
                }
            }
            parts = next;
        }
        parts.pop().unwrap()
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let (a, b) = self.aligned(other);
        MultiPoly::merge(&a, &b, false)
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        let (a, b) = self.aligned(other);
        MultiPoly::merge(&a, &b, true)
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = self.clone();
        self.ring.neg_coeffs(&mut out.coeffs);
        out
    }

    /// Multiply by a ring element.
    pub fn scale(&self, c: &RamifiedElem) -> MultiPoly {
        assert_eq!(self.ring, c.ring(), "scalar from a different ring");
        let zero = vec![0u16; self.nv()];
        self.mul_term(&zero, c.coeffs())
    }

    pub fn scale_int(&self, c: i64) -> MultiPoly {
        self.scale(&RamifiedElem::from_int(self.ring, c))
    }

    /// Multiply every term by `c · x^e` (same variables). Order-preserving.
    fn mul_term(&self, e: &[u16], c: &[u64]) -> MultiPoly {
        let (nv, w) = (self.nv(), self.w());
        let mut out = MultiPoly {
            ring: self.ring,
            vars: self.vars.clone(),
            exps: Vec::with_capacity(self.exps.len()),
            coeffs: Vec::with_capacity(self.coeffs.len()),
        };
        let mut prod = vec![0u64; w];
        for (te, tc) in self.terms() {
            self.ring.mul_coeffs(tc, c, &mut prod);
            if RingParams::is_zero_coeffs(&prod) {
                continue;
            }
            for k in 0..nv {
                out.exps
                    .push(te[k].checked_add(e[k]).expect("exponent overflow (u16)"));
            }
            out.coeffs.extend_from_slice(&prod);
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let (a, b) = self.aligned(other);
        if a.is_zero() || b.is_zero() {
            return MultiPoly::zero_in(self.ring, &a.vars);
        }
        let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let parts: Vec<MultiPoly> = small.terms().map(|(e, c)| big.mul_term(e, c)).collect();
        let mut out = MultiPoly::sum(self.ring, parts);
        if out.is_zero() {
            out.vars = small.vars.clone();
        }
        out
    }

    pub fn pow(&self, mut n: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(self.ring).embed(&self.vars);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn var_index(&self, v: Var) -> Option<usize> {
        self.vars.binary_search(&v).ok()
    }

    /// Degree in `v`; `-1` for the zero polynomial.
    pub fn degree_in(&self, v: Var) -> i64 {
        if self.is_zero() {
            return -1;
        }
        match self.var_index(v) {
            Some(k) => self.terms().map(|(e, _)| e[k] as i64).max().unwrap(),
            None => 0,
        }
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn total_degree(&self) -> i64 {
        self.terms()
            .map(|(e, _)| e.iter().map(|&x| x as i64).sum::<i64>())
            .max()
            .unwrap_or(-1)
    }

    /// Formal partial derivative.
    pub fn partial_derivative(&self, v: Var) -> Result<MultiPoly> {
        let k = self
            .var_index(v)
            .ok_or_else(|| Error::UnknownVariable(v.name()))?;
        let (nv, w) = (self.nv(), self.w());
        let mut out = MultiPoly::zero_in(self.ring, &self.vars);
        let mut factor = vec![0u64; w];
        let mut prod = vec![0u64; w];
        for (e, c) in self.terms() {
            if e[k] == 0 {
                continue;
            }
            factor[0] = e[k] as u64 % self.ring.modulus();
            self.ring.mul_coeffs(c, &factor, &mut prod);
            if RingParams::is_zero_coeffs(&prod) {
                continue;
            }
            let start = out.exps.len();
            out.exps.extend_from_slice(e);
            out.exps[start + k] -= 1;
            out.coeffs.extend_from_slice(&prod);
        }
        debug_assert_eq!(out.exps.len() % nv.max(1), 0);
        Ok(out)
    }

    /// Coefficient of `v^d`, as a polynomial in the remaining variables.
    pub fn coefficient_of(&self, v: Var, d: u32) -> MultiPoly {
        let Some(k) = self.var_index(v) else {
            return if d == 0 {
                self.clone()
            } else {
                MultiPoly::zero_in(self.ring, &self.vars)
            };
        };
        let rest: Vec<Var> = self.vars.iter().copied().filter(|&x| x != v).collect();
        let mut out = MultiPoly::zero_in(self.ring, &rest);
        for (e, c) in self.terms() {
            if e[k] as u32 == d {
                out.exps.extend_from_slice(&e[..k]);
                out.exps.extend_from_slice(&e[k + 1..]);
                out.coeffs.extend_from_slice(c);
            }
        }
        out
    }

    /// All coefficients with respect to `v`, keyed by degree.
    pub fn coefficients_in(&self, v: Var) -> BTreeMap<u32, MultiPoly> {
        let (_, split) = self.split_by(&[v]);
        split.into_iter().map(|(e, p)| (e[0], p)).collect()
    }

    /// Group terms by their exponents in `main`; values are polynomials in
    /// the remaining variables (returned first).
    pub fn split_by(&self, main: &[Var]) -> (Vec<Var>, BTreeMap<Vec<u32>, MultiPoly>) {
        let main_idx: Vec<Option<usize>> = main.iter().map(|&v| self.var_index(v)).collect();
        let rest_idx: Vec<usize> = (0..self.nv())
            .filter(|k| !main.contains(&self.vars[*k]))
            .collect();
        let rest: Vec<Var> = rest_idx.iter().map(|&k| self.vars[k]).collect();
        let mut out: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
        for (e, c) in self.terms() {
            let key: Vec<u32> = main_idx
                .iter()
                .map(|k| k.map_or(0, |k| e[k] as u32))
                .collect();
            let entry = out
                .entry(key)
                .or_insert_with(|| MultiPoly::zero_in(self.ring, &rest));
            entry.exps.extend(rest_idx.iter().map(|&k| e[k]));
            entry.coeffs.extend_from_slice(c);
        }
        (rest, out)
    }

    /// Replace `v` by `q`.
    pub fn substitute(&self, v: Var, q: &MultiPoly) -> MultiPoly {
        if self.var_index(v).is_none() {
            return self.clone();
        }
        let mut vars: Vec<Var> = self.vars.iter().copied().filter(|&x| x != v).collect();
        vars = union_vars(&vars, &q.vars);
        let coeffs = self.coefficients_in(v);
        let Some(&top) = coeffs.keys().next_back() else {
            return MultiPoly::zero_in(self.ring, &vars);
        };
        let mut acc = MultiPoly::zero(self.ring);
        for d in (0..=top).rev() {
            acc = acc.mul(q);
            if let Some(c) = coeffs.get(&d) {
                acc = acc.add(c);
            }
        }
        acc.embed(&vars)
    }

    /// Evaluate at a point; every variable of the polynomial must be assigned.
    pub fn evaluate(&self, assignment: &BTreeMap<Var, RamifiedElem>) -> Result<RamifiedElem> {
        let mut values = Vec::with_capacity(self.nv());
        for v in &self.vars {
            let x = assignment
                .get(v)
                .ok_or_else(|| Error::MissingVariable(v.name()))?;
            if x.ring() != self.ring {
                return Err(Error::RingMismatch);
            }
            values.push(x);
        }
        let mut acc = RamifiedElem::zero(self.ring);
        for (e, c) in self.terms() {
            let mut term = RamifiedElem::from_raw(self.ring, c.to_vec());
            for (x, &k) in values.iter().zip(e) {
                if k > 0 {
                    term = term.mul(&x.pow(k as u64))?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Reduce the coefficients into a ring of lower precision over the same
    /// prime and exponent.
    pub fn reduce_to(&self, ring: RingParams) -> Result<MultiPoly> {
        if ring.p() != self.ring.p()
            || ring.r_num() != self.ring.r_num()
            || ring.r_den() != self.ring.r_den()
            || ring.s() > self.ring.s()
        {
            return Err(Error::RingMismatch);
        }
        Ok(MultiPoly::from_terms(ring, &self.vars, self.to_terms()))
    }

    /// Semantic equality, independent of the declared variable lists.
    pub fn equals(&self, other: &MultiPoly) -> bool {
        self.ring == other.ring && self.sub(other).is_zero()
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.ring != other.ring {
            return false;
        }
        if self.vars == other.vars {
            return self.exps == other.exps && self.coeffs == other.coeffs;
        }
        self.equals(other)
    }
}

impl Eq for MultiPoly {}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.ring, self)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for i in (0..self.len()).rev() {
            if i + 1 != self.len() {
                write!(f, " + ")?;
            }
            let c = RamifiedElem::from_raw(self.ring, self.term_coeffs(i).to_vec());
            let e = self.term_exps(i);
            let is_one = c == RamifiedElem::one(self.ring);
            let is_const = e.iter().all(|&x| x == 0);
            if !is_one || is_const {
                if self.w() > 1 {
                    write!(f, "({c})")?;
                } else {
                    write!(f, "{c}")?;
                }
            }
            let mut first = is_one && !is_const;
            for (v, &k) in self.vars.iter().zip(e) {
                if k == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                if k == 1 {
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{v}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// Falling factorial `(v)_m = v (v−1) ⋯ (v−m+1)`, with `(v)_0 = 1`.
pub fn pochhammer_poly(ring: RingParams, m: u32, v: Var) -> MultiPoly {
    let x = MultiPoly::var(ring, v);
    let mut acc = MultiPoly::one(ring).embed(&[v]);
    for i in 0..m {
        acc = acc.mul(&x.sub(&MultiPoly::from_int(ring, i as i64)));
    }
    acc
}

/// Stirling numbers of the second kind `S(n, k)` modulo `p^s` for `n, k ≤ n_max`,
/// from `S(n, k) = k S(n−1, k) + S(n−1, k−1)`.
pub fn stirling2_table(ring: RingParams, n_max: usize) -> Vec<Vec<u64>> {
    let mut s = vec![vec![0u64; n_max + 1]; n_max + 1];
    s[0][0] = 1 % ring.modulus();
    for n in 1..=n_max {
        for k in 1..=n {
            let a = ring.mul_mod(k as u64 % ring.modulus(), s[n - 1][k]);
            s[n][k] = ring.add_mod(a, s[n - 1][k - 1]);
        }
    }
    s
}

/// `Σ_d c_d · (v)_d` with coefficients in the other variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PochhammerExpansion {
    pub var: Var,
    pub coeffs: BTreeMap<u32, MultiPoly>,
}

impl PochhammerExpansion {
    /// Coefficient of `(v)_d` (zero when absent).
    pub fn coefficient(&self, ring: RingParams, d: u32) -> MultiPoly {
        self.coeffs
            .get(&d)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(ring))
    }

    /// Expand back into the monomial basis.
    pub fn reconstruct(&self, ring: RingParams) -> MultiPoly {
        MultiPoly::sum(
            ring,
            self.coeffs
                .iter()
                .map(|(&d, c)| c.mul(&pochhammer_poly(ring, d, self.var))),
        )
    }
}

/// Rewrite `p` in the falling-factorial basis of `v` via `v^n = Σ_k S(n,k) (v)_k`.
pub fn to_pochhammer_basis(p: &MultiPoly, v: Var) -> PochhammerExpansion {
    let ring = p.ring();
    let by_degree = p.coefficients_in(v);
    let top = by_degree.keys().next_back().copied().unwrap_or(0) as usize;
    let stirling = stirling2_table(ring, top);
    let mut parts: BTreeMap<u32, Vec<MultiPoly>> = BTreeMap::new();
    for (&n, a) in &by_degree {
        for k in 0..=n {
            let s = stirling[n as usize][k as usize];
            if s != 0 {
                parts
                    .entry(k)
                    .or_default()
                    .push(a.scale(&RamifiedElem::from_int(ring, s as i64)));
            }
        }
    }
    let coeffs = parts
        .into_iter()
        .map(|(k, ps)| (k, MultiPoly::sum(ring, ps)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    PochhammerExpansion { var: v, coeffs }
}

/// Coefficient of `Π main_i^{target_i}` in the product of `factors`, as a
/// polynomial in the remaining variables.
///
/// The product is never expanded in full: after each factor only the partial
/// products whose `main` exponents can still reach `target` are kept.
pub fn product_coefficient(
    ring: RingParams,
    factors: &[MultiPoly],
    main: &[Var],
    target: &[u32],
) -> MultiPoly {
    assert_eq!(main.len(), target.len());
    let all_vars = factors
        .iter()
        .fold(main.to_vec(), |acc, f| union_vars(&acc, f.vars()));
    let rest: Vec<Var> = all_vars
        .iter()
        .copied()
        .filter(|v| !main.contains(v))
        .collect();

    let mut moving: Vec<Vec<(Vec<u32>, MultiPoly)>> = Vec::new();
    let mut fixed: Vec<MultiPoly> = Vec::new();
    for f in factors {
        let (_, split) = f.split_by(main);
        if split.keys().all(|e| e.iter().all(|&x| x == 0)) {
            fixed.push(f.embed(&all_vars).coefficient_of_main(main));
        } else {
            moving.push(
                split
                    .into_iter()
                    .map(|(e, p)| (e, p.embed(&rest)))
                    .collect(),
            );
        }
    }

    // remaining[i][v]: largest total exponent of main[v] in factors i.. .
    let mut remaining = vec![vec![0u32; main.len()]; moving.len() + 1];
    for i in (0..moving.len()).rev() {
        for v in 0..main.len() {
            let top = moving[i].iter().map(|(e, _)| e[v]).max().unwrap_or(0);
            remaining[i][v] = remaining[i + 1][v] + top;
        }
    }

    let mut state: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
    state.insert(vec![0; main.len()], MultiPoly::one(ring).embed(&rest));
    for (i, factor) in moving.iter().enumerate() {
        let rem = &remaining[i + 1];
        let mut buckets: BTreeMap<Vec<u32>, Vec<MultiPoly>> = BTreeMap::new();
        for (e_old, p_old) in &state {
            for (e_f, q_f) in factor {
                let e: Vec<u32> = e_old.iter().zip(e_f).map(|(a, b)| a + b).collect();
                let reachable = (0..main.len()).all(|v| e[v] <= target[v] && e[v] + rem[v] >= target[v]);
                if reachable {
                    buckets.entry(e).or_default().push(p_old.mul(q_f));
                }
            }
        }
        state = buckets
            .into_iter()
            .map(|(e, parts)| (e, MultiPoly::sum(ring, parts)))
            .filter(|(_, p)| !p.is_zero())
            .collect();
        if state.is_empty() {
            return MultiPoly::zero_in(ring, &rest);
        }
    }
    let mut out = state
        .remove(target)
        .unwrap_or_else(|| MultiPoly::zero_in(ring, &rest));
    for f in fixed {
        out = out.mul(&f);
    }
    out.embed(&rest)
}

impl MultiPoly {
    /// Coefficient of `Π main^0` (used for factors free of the main variables).
    fn coefficient_of_main(&self, main: &[Var]) -> MultiPoly {
        main.iter().fold(self.clone(), |acc, &v| acc.coefficient_of(v, 0))
    }
}

/// Binomial coefficients `C(e, k) mod p^s` for `k = 0..=e`, tracking the
/// `p`-adic valuation so no non-unit is ever inverted.
pub fn binomial_row(ring: RingParams, e: u64) -> Vec<u64> {
    let p = ring.p();
    let m = ring.modulus();
    let mut out = Vec::with_capacity(e as usize + 1);
    let (mut unit, mut val) = (1u64 % m, 0u64);
    out.push(unit);
    for k in 1..=e {
        let (mut num, mut den) = (e - k + 1, k);
        while num % p == 0 {
            num /= p;
            val += 1;
        }
        while den % p == 0 {
            den /= p;
            val -= 1;
        }
        let inv = ring.inv_mod(den % m).expect("unit");
        unit = ring.mul_mod(ring.mul_mod(unit, num % m), inv);
        out.push(if val >= ring.s() as u64 {
            0
        } else {
            ring.mul_mod(unit, ring.pow_mod(p, val))
        });
    }
    out
}

/// `(a − b)^e` expanded, for distinct variables `a`, `b`.
pub fn binomial_power(ring: RingParams, a: Var, b: Var, e: u32) -> MultiPoly {
    assert_ne!(a, b, "binomial_power needs distinct variables");
    let row = binomial_row(ring, e as u64);
    let a_first = a < b;
    let w = ring.width();
    let terms = row.iter().enumerate().map(|(k, &c)| {
        // C(e,k) a^{e-k} (-b)^k
        let c = if k % 2 == 1 { ring.sub_mod(0, c) } else { c };
        let mut coeff = vec![0u64; w];
        coeff[0] = c;
        let (ea, eb) = (e - k as u32, k as u32);
        let exps = if a_first { vec![ea, eb] } else { vec![eb, ea] };
        (exps, coeff)
    });
    let vars = if a_first { [a, b] } else { [b, a] };
    MultiPoly::from_terms(ring, &vars, terms)
}

impl MultiPoly {
    /// Exact quotient `self / divisor`, or `None` when the division leaves a
    /// remainder. The leading coefficient of `divisor` (lexicographically
    /// highest term) must be a unit.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        let (a, d) = self.aligned(divisor);
        let (mut rem, d) = (a.into_owned(), d.into_owned());
        let vars = rem.vars.clone();
        if d.is_zero() {
            return None;
        }
        let last = d.len() - 1;
        let lead_e: Vec<u16> = d.term_exps(last).to_vec();
        let lead_c = RamifiedElem::from_raw(self.ring, d.term_coeffs(last).to_vec());
        let lead_inv = lead_c.as_residue()?.inv().ok()?;
        let lead_inv = RamifiedElem::from(lead_inv);
        let mut quotient = Vec::new();
        while !rem.is_zero() {
            let top = rem.len() - 1;
            let te = rem.term_exps(top).to_vec();
            if te.iter().zip(&lead_e).any(|(a, b)| a < b) {
                return None;
            }
            let shift: Vec<u16> = te.iter().zip(&lead_e).map(|(a, b)| a - b).collect();
            let tc = RamifiedElem::from_raw(self.ring, rem.term_coeffs(top).to_vec());
            let q = tc.mul(&lead_inv).ok()?;
            let step = d.mul_term(&shift, q.coeffs());
            rem = rem.sub(&step);
            quotient.push((shift.iter().map(|&x| x as u32).collect::<Vec<_>>(), q.coeffs().to_vec()));
        }
        Some(MultiPoly::from_terms(self.ring, &vars, quotient))
    }
}
