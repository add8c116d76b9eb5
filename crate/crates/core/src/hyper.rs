//! The hyperelliptic family: `Φ^o = Π (t − z_i)^{(p^s−1)/2}`, the integrand
//! `Ψ = E(p^r λ t) Φ^o · (1/(t − z_i))_i`, and the solutions
//! `I^ℓ = coefficient of t^{ℓ p^s − 1}` of `KZ` and dynamical congruences.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::certificate::{
    Component, ComponentIndex, EquationResidual, Family, FamilyParams, ResidualReport,
    SolutionCertificate,
};
use crate::error::{Error, Result};
use crate::mpoly::{binomial_power, product_coefficient, MultiPoly, Var};
use crate::padic::{embed_rational, p_to_r, RamifiedElem, RingParams};
use crate::truncexp::trunc_exp_poly;

/// Largest exponent a polynomial term may carry.
const MAX_DEGREE: u64 = u16::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HyperParams {
    ring: RingParams,
    g: u32,
    ell: u32,
}

impl HyperParams {
    pub fn new(ring: RingParams, g: u32, ell: u32) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidParams("g must be a positive integer".into()));
        }
        if ell == 0 {
            return Err(Error::InvalidParams("ell must be a positive integer".into()));
        }
        let n = 2 * g as u64 + 1;
        let degree = n * ring.half_modulus() + ring.exp_degree_bound();
        if degree > MAX_DEGREE || ell as u64 * ring.modulus() > MAX_DEGREE + 1 {
            return Err(Error::InvalidParams(format!(
                "t-degree {degree} exceeds the supported exponent bound {MAX_DEGREE}"
            )));
        }
        Ok(HyperParams { ring, g, ell })
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `n = 2g + 1`.
    pub fn n(&self) -> usize {
        2 * self.g as usize + 1
    }

    pub fn with_ell(&self, ell: u32) -> Result<Self> {
        HyperParams::new(self.ring, self.g, ell)
    }

    /// `(p^s − 1)/2`.
    fn half(&self) -> u32 {
        self.ring.half_modulus() as u32
    }

    fn target(&self) -> u32 {
        self.ell * self.ring.modulus() as u32 - 1
    }

    fn z_vars(&self) -> Vec<Var> {
        (0..self.n()).map(Var::z).collect()
    }
}

/// `Φ^o_s(t, z)`, fully expanded.
pub fn master_poly(params: &HyperParams) -> MultiPoly {
    let ring = params.ring;
    (0..params.n()).fold(MultiPoly::one(ring), |acc, i| {
        acc.mul(&binomial_power(ring, Var::T, Var::z(i), params.half()))
    })
}

/// `E(p^r λ t)`.
fn exp_factor(ring: RingParams) -> MultiPoly {
    trunc_exp_poly(&MultiPoly::var(ring, Var::Lambda).mul(&MultiPoly::var(ring, Var::T)))
}

/// Factored form of `Φ^o/(t − z_i)`: the exponent of `(t − z_i)` is lowered by one.
fn psi_o_factors(params: &HyperParams, ring: RingParams, i: usize) -> Vec<MultiPoly> {
    (0..params.n())
        .map(|j| {
            let e = if j == i { params.half() - 1 } else { params.half() };
            binomial_power(ring, Var::T, Var::z(j), e)
        })
        .collect()
}

/// `Ψ_s`, each component fully expanded in `t, z, λ`.
pub fn psi_vector(params: &HyperParams) -> Vec<MultiPoly> {
    let e = exp_factor(params.ring);
    (0..params.n())
        .map(|i| {
            psi_o_factors(params, params.ring, i)
                .iter()
                .fold(e.clone(), |acc, f| acc.mul(f))
        })
        .collect()
}

fn component_coefficient(params: &HyperParams, i: usize, with_exp: bool) -> MultiPoly {
    let mut factors = psi_o_factors(params, params.ring, i);
    if with_exp {
        factors.push(exp_factor(params.ring));
    }
    product_coefficient(params.ring, &factors, &[Var::T], &[params.target()])
}

/// `I^ℓ`: the `t^{ℓ p^s − 1}` coefficients of `Ψ_s`.
pub fn construct_solution(params: &HyperParams) -> Result<SolutionCertificate> {
    let components: Vec<Component> = (0..params.n())
        .into_par_iter()
        .map(|i| Component {
            index: ComponentIndex::Slot(i as u32 + 1),
            poly: component_coefficient(params, i, true),
        })
        .collect();
    SolutionCertificate::new(FamilyParams::Hyper(*params), components)
}

/// `I^ℓ(z, 0)`, computed without the exponential factor.
pub fn solution_at_lambda_zero(params: &HyperParams) -> Vec<MultiPoly> {
    (0..params.n())
        .into_par_iter()
        .map(|i| component_coefficient(params, i, false))
        .collect()
}

/// `I^ℓ(z, 0) mod p`. The factors have integer coefficients, so they are
/// built over `F_p` directly; most binomials vanish there, which keeps the
/// partial products small.
pub fn solution_at_lambda_zero_mod_p(params: &HyperParams) -> Result<Vec<MultiPoly>> {
    let field = RingParams::new(params.ring.p(), 1, params.ring.r_num(), params.ring.r_den())?;
    Ok((0..params.n())
        .into_par_iter()
        .map(|i| {
            let factors = psi_o_factors(params, field, i);
            product_coefficient(field, &factors, &[Var::T], &[params.target()])
        })
        .collect())
}

fn hyper_params(cert: &SolutionCertificate) -> Result<HyperParams> {
    cert.expect_family(Family::Hyper)?;
    match cert.params() {
        FamilyParams::Hyper(h) => Ok(*h),
        _ => unreachable!("family checked"),
    }
}

/// `Π_{m ∉ skip} (z_i − z_m)`.
fn z_difference_product(ring: RingParams, n: usize, i: usize, skip: &[usize]) -> MultiPoly {
    (0..n)
        .filter(|m| *m != i && !skip.contains(m))
        .fold(MultiPoly::one(ring), |acc, m| {
            acc.mul(&binomial_power(ring, Var::z(i), Var::z(m), 1))
        })
}

fn half(ring: RingParams) -> RamifiedElem {
    embed_rational(ring, 1, 2).expect("p is odd").into()
}

/// Cleared KZ residuals:
/// `R_ij = (z_i − z_j) ∂I_j/∂z_i − ½ (I_i − I_j)` for `i ≠ j`, and
/// `R_i = Π_{j≠i}(z_i − z_j)(∂I_i/∂z_i − p^r λ I_i) + ½ Σ_{j≠i} Π_{m≠i,j}(z_i − z_m)(I_i − I_j)`.
pub fn verify_kz(cert: &SolutionCertificate) -> Result<ResidualReport> {
    let params = hyper_params(cert)?;
    let ring = params.ring;
    let n = params.n();
    let comps = cert.polys();
    let h = half(ring);
    let pr_lambda = MultiPoly::var(ring, Var::Lambda).scale(&p_to_r(ring));

    let mut jobs: Vec<(usize, Option<usize>)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                jobs.push((i, Some(j)));
            }
        }
    }
    jobs.extend((0..n).map(|i| (i, None)));

    let equations: Vec<EquationResidual> = jobs
        .par_iter()
        .map(|&(i, j)| -> Result<EquationResidual> {
            let zi = Var::z(i);
            match j {
                Some(j) => {
                    let lhs = binomial_power(ring, zi, Var::z(j), 1)
                        .mul(&comps[j].partial_derivative(zi)?);
                    let rhs = comps[i].sub(&comps[j]).scale(&h);
                    Ok(EquationResidual::new(
                        format!("KZ[{},{}]", i + 1, j + 1),
                        lhs.sub(&rhs).embed(cert.vars()),
                    ))
                }
                None => {
                    let d = comps[i]
                        .partial_derivative(zi)?
                        .sub(&pr_lambda.mul(&comps[i]));
                    let mut parts = vec![z_difference_product(ring, n, i, &[]).mul(&d)];
                    for j in (0..n).filter(|&j| j != i) {
                        parts.push(
                            z_difference_product(ring, n, i, &[j])
                                .mul(&comps[i].sub(&comps[j]))
                                .scale(&h),
                        );
                    }
                    Ok(EquationResidual::new(
                        format!("KZ[{}]", i + 1),
                        MultiPoly::sum(ring, parts).embed(cert.vars()),
                    ))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(ResidualReport::new(Family::Hyper, "kz", cert.vars(), equations))
}

/// Cleared dynamical residuals `D_i = 2λ ∂I_i/∂λ − 2 p^r λ z_i I_i − Σ_j I_j`.
pub fn verify_dynamical(cert: &SolutionCertificate) -> Result<ResidualReport> {
    let params = hyper_params(cert)?;
    let ring = params.ring;
    let comps = cert.polys();
    let total = MultiPoly::sum(ring, comps.clone());
    let lambda = MultiPoly::var(ring, Var::Lambda);
    let two_pr_lambda = lambda.scale(&p_to_r(ring)).scale_int(2);
    let equations: Vec<EquationResidual> = (0..params.n())
        .into_par_iter()
        .map(|i| -> Result<EquationResidual> {
            let a = lambda
                .mul(&comps[i].partial_derivative(Var::Lambda)?)
                .scale_int(2);
            let b = two_pr_lambda
                .mul(&MultiPoly::var(ring, Var::z(i)))
                .mul(&comps[i]);
            Ok(EquationResidual::new(
                format!("D[{}]", i + 1),
                a.sub(&b).sub(&total).embed(cert.vars()),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(
        ResidualReport::new(Family::Hyper, "dynamical", cert.vars(), equations)
            .with_note("valid for unit lambda (cleared form)"),
    )
}

/// `Σ_j I_j(z, 0)`; expected to be zero.
pub fn lambda_zero_sum(cert: &SolutionCertificate) -> Result<MultiPoly> {
    let params = hyper_params(cert)?;
    let ring = params.ring;
    let zero = MultiPoly::zero(ring);
    let parts = cert
        .components()
        .iter()
        .map(|c| c.poly.substitute(Var::Lambda, &zero));
    Ok(MultiPoly::sum(ring, parts).embed(&params.z_vars()))
}

/// The vanishing inequality `(p^s + 2g − 1)(r(p−1) − 1) > 2 s (p−1)`; for
/// `r = 1` this reads `p^s + 2g − 1 > s (2p−2)/(p−2)`.
pub fn vanishing_inequality_holds(ring: RingParams, g: u32) -> bool {
    let (p, s) = (ring.p() as u128, ring.s() as u128);
    let (a, b) = (ring.r_num() as u128, ring.r_den() as u128);
    let lhs = (ring.modulus() as u128 + 2 * g as u128 - 1) * (a * (p - 1) - b);
    lhs > 2 * s * (p - 1) * b
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VanishingOutcome {
    /// The inequality fails; nothing is claimed.
    Inapplicable,
    /// `I^ℓ` is zero for every listed `ℓ`.
    Verified(Vec<u32>),
    /// `I^ℓ` is nonzero for this `ℓ`.
    Failed(u32),
}

/// Checks that `I^ℓ = 0` for `ℓ = g+1, …, g+extra`.
pub fn vanishing_check(params: &HyperParams, extra: u32) -> Result<VanishingOutcome> {
    if !vanishing_inequality_holds(params.ring, params.g) {
        return Ok(VanishingOutcome::Inapplicable);
    }
    let mut ells = Vec::new();
    for ell in params.g + 1..=params.g + extra {
        let cert = construct_solution(&params.with_ell(ell)?)?;
        if !cert.is_zero() {
            return Ok(VanishingOutcome::Failed(ell));
        }
        ells.push(ell);
    }
    Ok(VanishingOutcome::Verified(ells))
}

/// A nonzero `g × g` minor of the matrix with rows `I^1(z,0), …, I^g(z,0)` mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceWitness {
    /// 1-based column indices of the minor.
    pub columns: Vec<usize>,
    /// The minor as a polynomial over `F_p`. Only computed when no point
    /// witness turned up, since a nonzero value already proves the minor nonzero.
    pub minor: Option<MultiPoly>,
    /// A point of `F_p^n` where the minor is a nonzero scalar, when one was found.
    pub point: Option<Vec<u64>>,
    pub value: Option<u64>,
}

/// Determinant by the Leibniz formula (matrices here are at most a few rows).
fn determinant(ring: RingParams, m: &[Vec<MultiPoly>]) -> MultiPoly {
    let k = m.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut parts = Vec::new();
    permutations(&mut perm, 0, &mut |p| {
        let mut inversions = 0;
        for a in 0..k {
            for b in a + 1..k {
                if p[a] > p[b] {
                    inversions += 1;
                }
            }
        }
        let term = (0..k).fold(MultiPoly::one(ring), |acc, r| acc.mul(&m[r][p[r]]));
        parts.push(if inversions % 2 == 1 { term.neg() } else { term });
    });
    MultiPoly::sum(ring, parts)
}

fn permutations(v: &mut Vec<usize>, start: usize, f: &mut dyn FnMut(&[usize])) {
    if start == v.len() {
        f(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permutations(v, start + 1, f);
        v.swap(start, i);
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Advances `point` lexicographically in `F_p^n`; false once it wraps around.
fn next_point(point: &mut [u64], p: u64) -> bool {
    for k in (0..point.len()).rev() {
        point[k] += 1;
        if point[k] < p {
            return true;
        }
        point[k] = 0;
    }
    false
}

fn assignment_at(ring: RingParams, vars: &[Var], point: &[u64]) -> BTreeMap<Var, RamifiedElem> {
    vars.iter()
        .zip(point)
        .map(|(v, &x)| (*v, RamifiedElem::from_int(ring, x as i64)))
        .collect()
}

/// Determinant of a small matrix over `F_p`.
fn scalar_determinant(p: u64, m: &[Vec<u64>]) -> u64 {
    let k = m.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut acc = 0u64;
    permutations(&mut perm, 0, &mut |q| {
        let odd = (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
            .filter(|&(a, b)| q[a] > q[b])
            .count()
            % 2
            == 1;
        let term = (0..k).fold(1u64, |t, r| t * m[r][q[r]] % p);
        acc = if odd { (acc + p - term) % p } else { (acc + term) % p };
    });
    acc
}

/// Evaluates the rows at up to `limit` points of `F_p^n` and returns the
/// first (point, columns, value) with a nonzero scalar minor.
fn point_witness(
    field: RingParams,
    rows: &[Vec<MultiPoly>],
    vars: &[Var],
    cols: &[Vec<usize>],
    limit: u64,
) -> Option<(Vec<u64>, Vec<usize>, u64)> {
    let p = field.p();
    let distinct = |pt: &[u64]| (0..pt.len()).all(|a| (a + 1..pt.len()).all(|b| pt[a] != pt[b]));
    // Points with pairwise distinct coordinates first: coinciding z_i tend to kill minors.
    let mut candidates = Vec::new();
    for pass in [true, false] {
        let mut point = vec![0u64; vars.len()];
        loop {
            if distinct(&point) == pass {
                candidates.push(point.clone());
                if candidates.len() as u64 >= limit {
                    break;
                }
            }
            if !next_point(&mut point, p) {
                break;
            }
        }
    }
    for point in candidates.into_iter().take(limit as usize) {
        let assignment = assignment_at(field, vars, &point);
        let values: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|f| f.evaluate(&assignment).map(|v| v.coeffs()[0]).unwrap_or(0))
                    .collect()
            })
            .collect();
        for c in cols {
            let sub: Vec<Vec<u64>> = values
                .iter()
                .map(|row| c.iter().map(|&j| row[j]).collect())
                .collect();
            let det = scalar_determinant(p, &sub);
            if det != 0 {
                return Some((point, c.clone(), det));
            }
        }
    }
    None
}

fn nonzero_point(f: &MultiPoly, vars: &[Var], limit: u64) -> Option<(Vec<u64>, u64)> {
    let ring = f.ring();
    let mut point = vec![0u64; vars.len()];
    for _ in 0..limit {
        let value = f.evaluate(&assignment_at(ring, vars, &point)).ok()?;
        if !value.is_zero() {
            return Some((point, value.coeffs()[0]));
        }
        if !next_point(&mut point, ring.p()) {
            break;
        }
    }
    None
}

/// Linear independence of the projections `I^1(z,0), …, I^g(z,0)` mod `p`.
///
/// Returns `Ok(Some(witness))` for a nonzero minor and `Ok(None)` when every
/// minor vanishes. Requires `p^s > 2g + 1` and an unramified ring.
pub fn independence_check(params: &HyperParams) -> Result<Option<IndependenceWitness>> {
    let ring = params.ring;
    let n = params.n();
    if ring.modulus() <= n as u64 {
        return Err(Error::Hypothesis(format!(
            "p^s = {} must exceed 2g+1 = {n}",
            ring.modulus()
        )));
    }
    if ring.r_den() != 1 {
        return Err(Error::Hypothesis(
            "independence is checked over Z/p^s (r_den = 1)".into(),
        ));
    }
    let field = RingParams::new(ring.p(), 1, ring.r_num(), 1)?;
    let z_vars = params.z_vars();
    let rows: Vec<Vec<MultiPoly>> = (1..=params.g)
        .map(|ell| solution_at_lambda_zero_mod_p(&params.with_ell(ell)?))
        .collect::<Result<_>>()?;
    let cols = combinations(n, params.g as usize);
    if let Some((point, columns, value)) = point_witness(field, &rows, &z_vars, &cols, 4_096) {
        return Ok(Some(IndependenceWitness {
            columns: columns.iter().map(|c| c + 1).collect(),
            minor: None,
            point: Some(point),
            value: Some(value),
        }));
    }
    // No point found: decide each minor symbolically.
    for c in cols {
        let sub: Vec<Vec<MultiPoly>> = rows
            .iter()
            .map(|row| c.iter().map(|&j| row[j].clone()).collect())
            .collect();
        let minor = determinant(field, &sub).embed(&z_vars);
        if minor.is_zero() {
            continue;
        }
        let found = nonzero_point(&minor, &z_vars, 200_000);
        return Ok(Some(IndependenceWitness {
            columns: c.iter().map(|j| j + 1).collect(),
            point: found.as_ref().map(|(pt, _)| pt.clone()),
            value: found.map(|(_, v)| v),
            minor: Some(minor),
        }));
    }
    Ok(None)
}
