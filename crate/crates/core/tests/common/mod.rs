//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's arithmetic: polynomials are dense maps
//! with big-integer coefficients (one per power of π), multiplied by a
//! double loop and reduced only at the end.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use pskz::{MultiPoly, RingParams, Var};
use rand::Rng;

/// Polynomial over `Z[π]/(π^w − p)` with unreduced integer coefficients.
#[derive(Debug, Clone)]
pub struct NaivePoly {
    pub p: u64,
    pub w: usize,
    pub vars: Vec<Var>,
    pub terms: BTreeMap<Vec<u32>, Vec<BigInt>>,
}

impl NaivePoly {
    pub fn zero(p: u64, w: usize, vars: &[Var]) -> Self {
        NaivePoly {
            p,
            w,
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(p: u64, w: usize, vars: &[Var], c: i64) -> Self {
        let mut out = Self::zero(p, w, vars);
        let mut coeff = vec![BigInt::zero(); w];
        coeff[0] = BigInt::from(c);
        out.terms.insert(vec![0; vars.len()], coeff);
        out
    }

    /// `Σ c_i x^{e_i}` with integer coefficients (no π part).
    pub fn from_int_terms(p: u64, w: usize, vars: &[Var], terms: &[(Vec<u32>, i64)]) -> Self {
        let mut out = Self::zero(p, w, vars);
        for (e, c) in terms {
            let mut coeff = vec![BigInt::zero(); w];
            coeff[0] = BigInt::from(*c);
            out.add_term(e.clone(), coeff);
        }
        out
    }

    pub fn var(p: u64, w: usize, vars: &[Var], v: Var) -> Self {
        let mut e = vec![0; vars.len()];
        e[vars.iter().position(|x| *x == v).unwrap()] = 1;
        let mut coeff = vec![BigInt::zero(); w];
        coeff[0] = BigInt::one();
        let mut out = Self::zero(p, w, vars);
        out.terms.insert(e, coeff);
        out
    }

    fn add_term(&mut self, e: Vec<u32>, c: Vec<BigInt>) {
        let entry = self
            .terms
            .entry(e)
            .or_insert_with(|| vec![BigInt::zero(); c.len()]);
        for (a, b) in entry.iter_mut().zip(c) {
            *a += b;
        }
    }

    pub fn add(&self, other: &NaivePoly) -> NaivePoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: i64) -> NaivePoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            for x in c.iter_mut() {
                *x *= k;
            }
        }
        out
    }

    /// Product of two π-polynomials with `π^w = p`.
    fn mul_coeff(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.w];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let k = i + j;
                let mut prod = x * y;
                if k >= self.w {
                    prod *= self.p;
                }
                out[k % self.w] += prod;
            }
        }
        out
    }

    pub fn mul(&self, other: &NaivePoly) -> NaivePoly {
        assert_eq!(self.vars, other.vars);
        let mut out = Self::zero(self.p, self.w, &self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = self.mul_coeff(ca, cb);
                out.add_term(e, c);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> NaivePoly {
        let mut acc = Self::constant(self.p, self.w, &self.vars, 1);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coefficient of `v^d`, keeping `v` in the variable list with exponent 0.
    pub fn coefficient_of(&self, v: Var, d: u32) -> NaivePoly {
        let k = self.vars.iter().position(|x| *x == v).unwrap();
        let mut out = Self::zero(self.p, self.w, &self.vars);
        for (e, c) in &self.terms {
            if e[k] == d {
                let mut e2 = e.clone();
                e2[k] = 0;
                out.add_term(e2, c.clone());
            }
        }
        out
    }

    /// Reduce into the library's representation.
    pub fn to_multipoly(&self, ring: RingParams) -> MultiPoly {
        let m = BigInt::from(ring.modulus());
        let terms = self.terms.iter().map(|(e, c)| {
            let coeffs = c
                .iter()
                .map(|x| {
                    let mut r = x % &m;
                    if r.is_negative() {
                        r += &m;
                    }
                    u64::try_from(r).unwrap()
                })
                .collect();
            (e.clone(), coeffs)
        });
        MultiPoly::from_terms(ring, &self.vars, terms)
    }

    pub fn from_multipoly(p: &MultiPoly, vars: &[Var]) -> NaivePoly {
        let ring = p.ring();
        let q = p.embed(vars);
        let mut out = Self::zero(ring.p(), ring.width(), vars);
        for (e, c) in q.terms() {
            out.add_term(
                e.iter().map(|&x| x as u32).collect(),
                c.iter().map(|&x| BigInt::from(x)).collect(),
            );
        }
        out
    }
}

/// `p^{k r} / k!` computed with big integers by stripping factors of `p`
/// from `k!` one at a time; returns the `π`-coefficients mod `p^s`.
pub fn exp_coefficient_oracle(ring: RingParams, k: u64) -> Vec<u64> {
    let p = BigInt::from(ring.p());
    let modulus = BigInt::from(ring.modulus());
    let mut fact = BigInt::one();
    for i in 1..=k {
        fact *= i;
    }
    let mut v = 0u64;
    while (&fact % &p).is_zero() {
        fact /= &p;
        v += 1;
    }
    let w = ring.r_den();
    let pi_exp = k * ring.r_num() - v * w;
    let mut out = vec![0u64; w as usize];
    let p_exp = pi_exp / w;
    if p_exp < ring.s() as u64 {
        // unit inverse by Euler: u^{φ(p^s) − 1}
        let phi = &modulus - &modulus / &p;
        let inv = (&fact % &modulus).modpow(&(phi - 1u32), &modulus);
        let val = (p.pow(p_exp as u32) * inv) % &modulus;
        out[(pi_exp % w) as usize] = u64::try_from(val).unwrap();
    }
    out
}

/// `E(p^r · arg)` built from the oracle coefficients with naive arithmetic.
pub fn exp_oracle(ring: RingParams, arg: &NaivePoly) -> NaivePoly {
    let d = ring.exp_degree_bound();
    let mut acc = NaivePoly::zero(arg.p, arg.w, &arg.vars);
    let mut power = NaivePoly::constant(arg.p, arg.w, &arg.vars, 1);
    for k in 0..=d {
        if k > 0 {
            power = power.mul(arg);
        }
        let c: Vec<BigInt> = exp_coefficient_oracle(ring, k)
            .into_iter()
            .map(BigInt::from)
            .collect();
        let mut scaled = NaivePoly::zero(arg.p, arg.w, &arg.vars);
        for (e, x) in &power.terms {
            scaled.add_term(e.clone(), power.mul_coeff(x, &c));
        }
        acc = acc.add(&scaled);
    }
    acc
}

/// `a − b` as a naive polynomial.
pub fn naive_diff(ring: RingParams, vars: &[Var], a: Var, b: Var) -> NaivePoly {
    let w = ring.width();
    NaivePoly::var(ring.p(), w, vars, a).add(&NaivePoly::var(ring.p(), w, vars, b).scale(-1))
}

/// A random polynomial with at most `max_terms` terms and exponents `≤ max_deg`.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    ring: RingParams,
    vars: &[Var],
    max_terms: usize,
    max_deg: u32,
) -> MultiPoly {
    let n = rng.gen_range(0..=max_terms);
    let terms: Vec<(Vec<u32>, Vec<u64>)> = (0..n)
        .map(|_| {
            let e = vars.iter().map(|_| rng.gen_range(0..=max_deg)).collect();
            let c = (0..ring.width())
                .map(|_| rng.gen_range(0..ring.modulus()))
                .collect();
            (e, c)
        })
        .collect();
    MultiPoly::from_terms(ring, vars, terms)
}

/// Rings used by the randomized checks.
pub fn sample_rings() -> Vec<RingParams> {
    [
        (3, 1, 1, 1),
        (3, 2, 1, 1),
        (5, 1, 1, 1),
        (5, 2, 1, 1),
        (7, 1, 1, 1),
        (3, 1, 2, 1),
        (5, 1, 3, 2),
        (7, 2, 2, 3),
    ]
    .into_iter()
    .map(|(p, s, a, b)| RingParams::new(p, s, a, b).unwrap())
    .collect()
}
