//! `sl_2` tensor modules `L_{m_1} ⊗ … ⊗ L_{m_n}`, Gaudin and dynamical
//! Hamiltonians, weight functions, and the solutions extracted from the
//! master polynomial
//!
//! `Φ = Π_l E(p^r m_l z_l λ/(2κ)) Π_i E(−p^r t_i λ/κ) Π_{i<j}(z_i−z_j)^{M_ij}
//!      Π_{i<j}(t_i−t_j)^{M0} Π_{s,i}(t_i−z_s)^{M_s}`.
//!
//! Slots are numbered from 1 in the public API.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::certificate::{
    Component, ComponentIndex, EquationResidual, Family, FamilyParams, ResidualReport,
    SolutionCertificate,
};
use crate::error::{Error, Result};
use crate::mpoly::{binomial_power, product_coefficient, MultiPoly, Var};
use crate::padic::{embed_rational, p_to_r, RamifiedElem, Residue, RingParams};
use crate::truncexp::trunc_exp_poly;

const MAX_DEGREE: u64 = u16::MAX as u64;

/// Basis vector `f^{j_1} v ⊗ … ⊗ f^{j_n} v`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(pub Vec<u32>);

impl BasisIndex {
    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All `J` with `j_s ≤ m_s` and `|J| = k`, in lexicographic order.
pub fn weight_basis(m: &[u32], k: u32) -> Vec<BasisIndex> {
    fn rec(m: &[u32], left: u32, cur: &mut Vec<u32>, out: &mut Vec<BasisIndex>) {
        if cur.len() == m.len() {
            if left == 0 {
                out.push(BasisIndex(cur.clone()));
            }
            return;
        }
        let rest: u32 = m[cur.len() + 1..].iter().sum();
        for j in 0..=m[cur.len()].min(left) {
            if left - j > rest {
                continue;
            }
            cur.push(j);
            rec(m, left - j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sl2Params {
    ring: RingParams,
    kappa: (i64, i64),
    m: Vec<u32>,
    k: u32,
    ell: Vec<u32>,
    m_slot: Vec<u64>,
    m_pair: Vec<Vec<u64>>,
    m_zero: u64,
}

/// Smallest positive representative of `x mod p^s`.
fn positive_rep(ring: RingParams, x: &Residue) -> u64 {
    if x.value() == 0 {
        ring.modulus()
    } else {
        x.value()
    }
}

impl Sl2Params {
    /// Parameters with the default exponents (smallest positive residues).
    pub fn new(
        ring: RingParams,
        kappa: (i64, i64),
        m: Vec<u32>,
        k: u32,
        ell: Vec<u32>,
    ) -> Result<Self> {
        let (mut a, mut b) = kappa;
        if b == 0 {
            return Err(Error::InvalidParams("kappa denominator is zero".into()));
        }
        if b < 0 {
            a = -a;
            b = -b;
        }
        let p = ring.p() as i64;
        if a % p == 0 || b % p == 0 {
            return Err(Error::InvalidParams(format!(
                "p = {p} must not divide kappa = {a}/{b}"
            )));
        }
        if m.is_empty() || m.iter().any(|&x| x == 0) {
            return Err(Error::InvalidParams(
                "m must be a nonempty list of positive integers".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidParams("k must be a positive integer".into()));
        }
        if k > m.iter().sum::<u32>() {
            return Err(Error::InvalidParams(format!(
                "k = {k} exceeds |m| = {}",
                m.iter().sum::<u32>()
            )));
        }
        if ell.len() != k as usize || ell.iter().any(|&x| x == 0) {
            return Err(Error::InvalidParams(format!(
                "ell must list {k} positive integers"
            )));
        }
        let n = m.len();
        let mut params = Sl2Params {
            ring,
            kappa: (a, b),
            m,
            k,
            ell,
            m_slot: vec![0; n],
            m_pair: vec![vec![0; n]; n],
            m_zero: 0,
        };
        for s in 0..n {
            params.m_slot[s] = positive_rep(ring, &params.required_slot(s)?);
            for t in s + 1..n {
                params.m_pair[s][t] = positive_rep(ring, &params.required_pair(s, t)?);
            }
        }
        params.m_zero = positive_rep(ring, &params.required_zero()?);
        params.check_degrees()?;
        Ok(params)
    }

    /// Override exponent representatives; each must be positive and satisfy its congruence.
    pub fn with_exponents(
        mut self,
        m_slot: Option<Vec<u64>>,
        m_pair: Option<Vec<Vec<u64>>>,
        m_zero: Option<u64>,
    ) -> Result<Self> {
        let n = self.n();
        let modulus = self.ring.modulus();
        if let Some(ms) = m_slot {
            if ms.len() != n {
                return Err(Error::InvalidParams(format!("M must list {n} exponents")));
            }
            for (s, &v) in ms.iter().enumerate() {
                let want = self.required_slot(s)?.value();
                if v == 0 || v % modulus != want {
                    return Err(Error::InvalidParams(format!(
                        "M_{} = {v} must be positive and ≡ -m_{}/kappa ≡ {want} mod {modulus}",
                        s + 1,
                        s + 1
                    )));
                }
            }
            self.m_slot = ms;
        }
        if let Some(mp) = m_pair {
            if mp.len() != n || mp.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidParams(format!("M_pair must be {n}x{n}")));
            }
            for s in 0..n {
                for t in s + 1..n {
                    let v = mp[s][t];
                    let want = self.required_pair(s, t)?.value();
                    if v == 0 || v % modulus != want {
                        return Err(Error::InvalidParams(format!(
                            "M_{}{} = {v} must be positive and ≡ m_i m_j/(2 kappa) ≡ {want} mod {modulus}",
                            s + 1,
                            t + 1
                        )));
                    }
                    self.m_pair[s][t] = v;
                }
            }
        }
        if let Some(v) = m_zero {
            let want = self.required_zero()?.value();
            if v == 0 || v % modulus != want {
                return Err(Error::InvalidParams(format!(
                    "M0 = {v} must be positive and ≡ 2/kappa ≡ {want} mod {modulus}"
                )));
            }
            self.m_zero = v;
        }
        self.check_degrees()?;
        Ok(self)
    }

    fn check_degrees(&self) -> Result<()> {
        let t_degree = self.m_slot.iter().sum::<u64>()
            + self.m_zero * (self.k as u64 - 1)
            + self.ring.exp_degree_bound();
        let z_degree = self.m_slot.iter().max().copied().unwrap_or(0) * self.k as u64
            + self.m_pair.iter().flatten().sum::<u64>()
            + self.ring.exp_degree_bound();
        let target = self.ell.iter().max().copied().unwrap_or(1) as u64 * self.ring.modulus();
        if t_degree.max(z_degree).max(target) > MAX_DEGREE {
            return Err(Error::InvalidParams(format!(
                "polynomial degrees exceed the supported exponent bound {MAX_DEGREE}"
            )));
        }
        Ok(())
    }

    /// `1/κ` in the ring.
    fn kappa_inv(&self) -> Result<Residue> {
        embed_rational(self.ring, self.kappa.1, self.kappa.0)
    }

    /// `κ` in the ring.
    pub fn kappa_elem(&self) -> Result<Residue> {
        embed_rational(self.ring, self.kappa.0, self.kappa.1)
    }

    fn required_slot(&self, s: usize) -> Result<Residue> {
        let inv = self.kappa_inv()?;
        Residue::from_int(self.ring, -(self.m[s] as i64)).mul(&inv)
    }

    fn required_pair(&self, s: usize, t: usize) -> Result<Residue> {
        let half = embed_rational(self.ring, 1, 2)?;
        Residue::from_int(self.ring, self.m[s] as i64 * self.m[t] as i64)
            .mul(&half)?
            .mul(&self.kappa_inv()?)
    }

    fn required_zero(&self) -> Result<Residue> {
        Residue::from_int(self.ring, 2).mul(&self.kappa_inv()?)
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    /// `(numerator, denominator)` with a positive denominator.
    pub fn kappa(&self) -> (i64, i64) {
        self.kappa
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn ell(&self) -> &[u32] {
        &self.ell
    }

    pub fn m_slot(&self) -> &[u64] {
        &self.m_slot
    }

    /// `M_{ij}` for 0-based `i < j`.
    pub fn m_pair(&self, i: usize, j: usize) -> u64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.m_pair[a][b]
    }

    pub fn m_zero(&self) -> u64 {
        self.m_zero
    }

    /// The weight-space basis `{ J : |J| = k }`.
    pub fn basis(&self) -> Vec<BasisIndex> {
        weight_basis(&self.m, self.k)
    }
}

/// A vector of `L^{⊗m}` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorVector {
    ring: RingParams,
    m: Vec<u32>,
    comps: BTreeMap<BasisIndex, MultiPoly>,
}

impl TensorVector {
    pub fn zero(ring: RingParams, m: &[u32]) -> Self {
        TensorVector {
            ring,
            m: m.to_vec(),
            comps: BTreeMap::new(),
        }
    }

    /// `c · f_J v`.
    pub fn basis_vector(ring: RingParams, m: &[u32], j: BasisIndex, c: MultiPoly) -> Result<Self> {
        let mut v = TensorVector::zero(ring, m);
        v.insert(j, c)?;
        Ok(v)
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    fn check_index(&self, j: &BasisIndex) -> Result<()> {
        if j.0.len() != self.m.len() || j.0.iter().zip(&self.m).any(|(a, b)| a > b) {
            return Err(Error::OutOfRange(format!(
                "basis index {j} does not fit m = {:?}",
                self.m
            )));
        }
        Ok(())
    }

    /// Add `c` to the coefficient of `f_J v`.
    pub fn insert(&mut self, j: BasisIndex, c: MultiPoly) -> Result<()> {
        self.check_index(&j)?;
        let ring = self.ring;
        let entry = self
            .comps
            .entry(j.clone())
            .or_insert_with(|| MultiPoly::zero(ring));
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.comps.remove(&j);
        }
        Ok(())
    }

    /// Coefficient of `f_J v` (zero when absent).
    pub fn get(&self, j: &BasisIndex) -> MultiPoly {
        self.comps
            .get(j)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(self.ring))
    }

    pub fn components(&self) -> impl Iterator<Item = (&BasisIndex, &MultiPoly)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|c| c.is_zero())
    }

    /// `|m| − 2|J|` when every nonzero component has the same weight.
    pub fn weight(&self) -> Option<i64> {
        let total: i64 = self.m.iter().map(|&x| x as i64).sum();
        let mut weights = self.comps.keys().map(|j| total - 2 * j.level() as i64);
        let w = weights.next()?;
        weights.all(|x| x == w).then_some(w)
    }

    fn map_terms<F>(&self, mut f: F) -> TensorVector
    where
        F: FnMut(&BasisIndex) -> Option<(BasisIndex, i64)>,
    {
        let mut out = TensorVector::zero(self.ring, &self.m);
        for (j, c) in &self.comps {
            if let Some((j2, k)) = f(j) {
                if k != 0 {
                    out.insert(j2, c.scale_int(k)).expect("index stays in range");
                }
            }
        }
        out
    }

    pub fn add(&self, other: &TensorVector) -> TensorVector {
        let mut out = self.clone();
        for (j, c) in &other.comps {
            out.insert(j.clone(), c.clone()).expect("same module");
        }
        out
    }

    pub fn sub(&self, other: &TensorVector) -> TensorVector {
        self.add(&other.scale_int(-1))
    }

    pub fn scale(&self, c: &RamifiedElem) -> TensorVector {
        self.mul_poly(&MultiPoly::constant(c))
    }

    pub fn scale_int(&self, k: i64) -> TensorVector {
        self.scale(&RamifiedElem::from_int(self.ring, k))
    }

    /// Multiply every coefficient by a polynomial.
    pub fn mul_poly(&self, q: &MultiPoly) -> TensorVector {
        let mut out = TensorVector::zero(self.ring, &self.m);
        for (j, c) in &self.comps {
            let prod = c.mul(q);
            if !prod.is_zero() {
                out.comps.insert(j.clone(), prod);
            }
        }
        out
    }

    /// Apply `∂/∂v` to every coefficient.
    pub fn partial_derivative(&self, v: Var) -> Result<TensorVector> {
        let mut out = TensorVector::zero(self.ring, &self.m);
        for (j, c) in &self.comps {
            let d = c.partial_derivative(v)?;
            if !d.is_zero() {
                out.comps.insert(j.clone(), d);
            }
        }
        Ok(out)
    }

    fn slot(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.m.len() {
            return Err(Error::OutOfRange(format!(
                "slot {i} is outside 1..={}",
                self.m.len()
            )));
        }
        Ok(i - 1)
    }
}

/// `e^{(i)}`: `f^j v → j (m_i − j + 1) f^{j−1} v`.
pub fn act_e(i: usize, v: &TensorVector) -> Result<TensorVector> {
    let s = v.slot(i)?;
    let m = v.m[s] as i64;
    Ok(v.map_terms(|j| {
        let js = j.0[s] as i64;
        (js > 0).then(|| {
            let mut j2 = j.clone();
            j2.0[s] -= 1;
            (j2, js * (m - js + 1))
        })
    }))
}

/// `f^{(i)}`: `f^j v → f^{j+1} v`, zero past `j = m_i`.
pub fn act_f(i: usize, v: &TensorVector) -> Result<TensorVector> {
    let s = v.slot(i)?;
    let m = v.m[s];
    Ok(v.map_terms(|j| {
        (j.0[s] < m).then(|| {
            let mut j2 = j.clone();
            j2.0[s] += 1;
            (j2, 1)
        })
    }))
}

/// `h^{(i)}`: `f^j v → (m_i − 2j) f^j v`.
pub fn act_h(i: usize, v: &TensorVector) -> Result<TensorVector> {
    let s = v.slot(i)?;
    let m = v.m[s] as i64;
    Ok(v.map_terms(|j| Some((j.clone(), m - 2 * j.0[s] as i64))))
}

/// `Ω^{(i,j)} = e^{(i)} f^{(j)} + f^{(i)} e^{(j)} + ½ h^{(i)} h^{(j)}`.
pub fn casimir_apply(i: usize, j: usize, v: &TensorVector) -> Result<TensorVector> {
    if i == j {
        return Err(Error::OutOfRange(format!(
            "Casimir needs distinct slots (got {i} twice)"
        )));
    }
    let half: RamifiedElem = embed_rational(v.ring, 1, 2)?.into();
    let a = act_e(i, &act_f(j, v)?)?;
    let b = act_f(i, &act_e(j, v)?)?;
    let c = act_h(i, &act_h(j, v)?)?.scale(&half);
    Ok(a.add(&b).add(&c))
}

fn z_difference(ring: RingParams, i: usize, j: usize) -> MultiPoly {
    binomial_power(ring, Var::z(i), Var::z(j), 1)
}

/// `Π_{m ∉ skip, m ≠ i} (z_i − z_m)`, 0-based.
fn z_difference_product(ring: RingParams, n: usize, i: usize, skip: Option<usize>) -> MultiPoly {
    (0..n)
        .filter(|&m| m != i && Some(m) != skip)
        .fold(MultiPoly::one(ring), |acc, m| acc.mul(&z_difference(ring, i, m)))
}

/// Cleared Gaudin action
/// `Π_{j≠i}(z_i−z_j) p^r (λ/2) h^{(i)} v + Σ_{j≠i} Π_{m≠i,j}(z_i−z_m) Ω^{(i,j)} v`.
pub fn gaudin_apply(i: usize, v: &TensorVector, params: &Sl2Params) -> Result<TensorVector> {
    let ring = params.ring;
    let n = params.n();
    let s = v.slot(i)?;
    let half: RamifiedElem = embed_rational(ring, 1, 2)?.into();
    let coeff = MultiPoly::var(ring, Var::Lambda)
        .scale(&p_to_r(ring).mul(&half)?)
        .mul(&z_difference_product(ring, n, s, None));
    let mut out = act_h(i, v)?.mul_poly(&coeff);
    for j in (0..n).filter(|&j| j != s) {
        let omega = casimir_apply(i, j + 1, v)?;
        out = out.add(&omega.mul_poly(&z_difference_product(ring, n, s, Some(j))));
    }
    Ok(out)
}

/// Cleared dynamical action `p^r λ Σ_i (z_i/2) h^{(i)} v + Σ_{i,j} f^{(i)} e^{(j)} v`.
pub fn dynamical_apply(v: &TensorVector, params: &Sl2Params) -> Result<TensorVector> {
    let ring = params.ring;
    let n = params.n();
    let half: RamifiedElem = embed_rational(ring, 1, 2)?.into();
    let lam = MultiPoly::var(ring, Var::Lambda).scale(&p_to_r(ring).mul(&half)?);
    let mut out = TensorVector::zero(ring, v.m());
    for i in 1..=n {
        let zi = MultiPoly::var(ring, Var::z(i - 1)).mul(&lam);
        out = out.add(&act_h(i, v)?.mul_poly(&zi));
        for j in 1..=n {
            out = out.add(&act_f(i, &act_e(j, v)?)?);
        }
    }
    Ok(out)
}

/// Maps `a: {1..k} → {1..n}` (0-based in the result) with fibers of sizes
/// `j_1, …, j_n`, in lexicographic order; there are `k!/(j_1! ⋯ j_n!)` of them.
pub fn weight_assignments(j: &[u32], k: u32) -> Result<Vec<Vec<usize>>> {
    if j.iter().sum::<u32>() != k {
        return Err(Error::InvalidParams(format!(
            "|J| = {} differs from k = {k}",
            j.iter().sum::<u32>()
        )));
    }
    fn rec(left: &mut [u32], cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in 0..left.len() {
            if left[s] > 0 {
                left[s] -= 1;
                cur.push(s);
                rec(left, cur, k, out);
                cur.pop();
                left[s] += 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut j.to_vec(), &mut Vec::new(), k as usize, &mut out);
    Ok(out)
}

fn as_u32(x: u64) -> u32 {
    u32::try_from(x).expect("exponent validated against the degree bound")
}

/// `Π_l E(p^r m_l z_l λ/(2κ)) Π_{i<j} (z_i − z_j)^{M_ij}`: the factors free of `t`.
fn z_part(params: &Sl2Params) -> Result<MultiPoly> {
    let ring = params.ring;
    let n = params.n();
    let lambda = MultiPoly::var(ring, Var::Lambda);
    let mut acc = MultiPoly::one(ring);
    for l in 0..n {
        let c: RamifiedElem =
            embed_rational(ring, params.m[l] as i64 * params.kappa.1, 2 * params.kappa.0)?.into();
        let arg = MultiPoly::var(ring, Var::z(l)).mul(&lambda).scale(&c);
        acc = acc.mul(&trunc_exp_poly(&arg));
    }
    for i in 0..n {
        for j in i + 1..n {
            acc = acc.mul(&binomial_power(
                ring,
                Var::z(i),
                Var::z(j),
                as_u32(params.m_pair(i, j)),
            ));
        }
    }
    Ok(acc)
}

/// Factors involving `t`, with the exponent of `(t_i − z_{a(i)})` lowered by
/// one for each `i` when an assignment `a` is given.
fn t_factors(params: &Sl2Params, assignment: Option<&[usize]>) -> Result<Vec<MultiPoly>> {
    let ring = params.ring;
    let k = params.k as usize;
    let lambda = MultiPoly::var(ring, Var::Lambda);
    let c: RamifiedElem = embed_rational(ring, -params.kappa.1, params.kappa.0)?.into();
    let mut out = Vec::new();
    for i in 0..k {
        for s in 0..params.n() {
            let mut e = params.m_slot[s];
            if assignment.is_some_and(|a| a[i] == s) {
                e -= 1;
            }
            out.push(binomial_power(ring, Var::t(i), Var::z(s), as_u32(e)));
        }
        for j in i + 1..k {
            out.push(binomial_power(ring, Var::t(i), Var::t(j), as_u32(params.m_zero)));
        }
        let arg = MultiPoly::var(ring, Var::t(i)).mul(&lambda).scale(&c);
        out.push(trunc_exp_poly(&arg));
    }
    Ok(out)
}

/// The master polynomial, fully expanded in `t_1..t_k, z_1..z_n, λ`.
pub fn master_polynomial(params: &Sl2Params) -> Result<MultiPoly> {
    let z = z_part(params)?;
    Ok(t_factors(params, None)?
        .iter()
        .fold(z, |acc, f| acc.mul(f)))
}

/// `Φ · W_J` as a polynomial, fully expanded (small parameters only).
pub fn weighted_integrand(params: &Sl2Params, j: &BasisIndex) -> Result<MultiPoly> {
    let z = z_part(params)?;
    let ring = params.ring;
    let parts = weight_assignments(&j.0, params.k)?
        .iter()
        .map(|a| -> Result<MultiPoly> {
            Ok(t_factors(params, Some(a))?
                .iter()
                .fold(z.clone(), |acc, f| acc.mul(f)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiPoly::sum(ring, parts))
}

fn solution_vars(n: usize) -> Vec<Var> {
    let mut v: Vec<Var> = (0..n).map(Var::z).collect();
    v.push(Var::Lambda);
    v
}

/// Coefficients of `Π t_i^{ℓ_i p^s − 1}` in `Φ · W_J f_J v`, one per basis index.
pub fn construct_solution_sl2(params: &Sl2Params) -> Result<SolutionCertificate> {
    let ring = params.ring;
    let k = params.k as usize;
    let main: Vec<Var> = (0..k).map(Var::t).collect();
    let target: Vec<u32> = params
        .ell
        .iter()
        .map(|&l| l * ring.modulus() as u32 - 1)
        .collect();
    let z = z_part(params)?;
    let vars = solution_vars(params.n());
    let components = params
        .basis()
        .into_par_iter()
        .map(|j| -> Result<Component> {
            let parts = weight_assignments(&j.0, params.k)?
                .iter()
                .map(|a| -> Result<MultiPoly> {
                    let factors = t_factors(params, Some(a))?;
                    Ok(product_coefficient(ring, &factors, &main, &target))
                })
                .collect::<Result<Vec<_>>>()?;
            let poly = MultiPoly::sum(ring, parts).mul(&z).embed(&vars);
            Ok(Component {
                index: ComponentIndex::Basis(j.0),
                poly,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SolutionCertificate::new(FamilyParams::Sl2(params.clone()), components)
}

/// The certificate as a vector of `L^{⊗m}`.
pub fn certificate_vector(cert: &SolutionCertificate) -> Result<TensorVector> {
    let params = sl2_params(cert)?;
    let mut v = TensorVector::zero(params.ring, &params.m);
    for c in cert.components() {
        match &c.index {
            ComponentIndex::Basis(j) => v.insert(BasisIndex(j.clone()), c.poly.clone())?,
            ComponentIndex::Slot(_) => {
                return Err(Error::Format("sl2 components need basis indices".into()))
            }
        }
    }
    Ok(v)
}

fn sl2_params(cert: &SolutionCertificate) -> Result<&Sl2Params> {
    cert.expect_family(Family::Sl2)?;
    match cert.params() {
        FamilyParams::Sl2(s) => Ok(s),
        _ => unreachable!("family checked"),
    }
}

/// KZ residuals `κ Π_{j≠i}(z_i−z_j) ∂I/∂z_i − gaudin_apply(i, I)` and the
/// dynamical residual `κ λ ∂I/∂λ − dynamical_apply(I)`, per basis component.
pub fn verify_sl2(cert: &SolutionCertificate) -> Result<ResidualReport> {
    let params = sl2_params(cert)?;
    let ring = params.ring;
    let n = params.n();
    let kappa: RamifiedElem = params.kappa_elem()?.into();
    let v = certificate_vector(cert)?;
    let basis = params.basis();

    let residuals: Vec<(String, TensorVector)> = (0..=n)
        .into_par_iter()
        .map(|eq| -> Result<(String, TensorVector)> {
            if eq < n {
                let lhs = v
                    .partial_derivative(Var::z(eq))?
                    .mul_poly(&z_difference_product(ring, n, eq, None))
                    .scale(&kappa);
                Ok((format!("KZ[{}]", eq + 1), lhs.sub(&gaudin_apply(eq + 1, &v, params)?)))
            } else {
                let lhs = v
                    .partial_derivative(Var::Lambda)?
                    .mul_poly(&MultiPoly::var(ring, Var::Lambda))
                    .scale(&kappa);
                Ok(("DYN".to_string(), lhs.sub(&dynamical_apply(&v, params)?)))
            }
        })
        .collect::<Result<_>>()?;

    let mut equations = Vec::new();
    for (label, r) in residuals {
        for j in &basis {
            equations.push(EquationResidual::new(
                format!("{label} J={j}"),
                r.get(j).embed(cert.vars()),
            ));
        }
        // Anything outside the weight space would be a bug in the operators.
        for (j, c) in r.components() {
            if !basis.contains(j) {
                equations.push(EquationResidual::new(
                    format!("{label} J={j}"),
                    c.embed(cert.vars()),
                ));
            }
        }
    }
    Ok(
        ResidualReport::new(Family::Sl2, "kz+dynamical", cert.vars(), equations)
            .with_note("dynamical equation valid for unit lambda (cleared form)"),
    )
}
