//! The one-variable qKZ difference equation `E(p^r λ) I(z − 1, λ) ≡ I(z, λ)`.
//!
//! The master polynomial is `E(p^r λ t) (t−z−1)_{(p^s−1)/2} (t−z−1)_{(p^s+1)/2}`
//! and the solution is its coefficient at `(t)_{p^s−1}` in the falling-factorial
//! basis of `t`.

use crate::certificate::{
    Component, ComponentIndex, EquationResidual, Family, FamilyParams, ResidualReport,
    SolutionCertificate,
};
use crate::error::{Error, Result};
use crate::mpoly::{pochhammer_poly, to_pochhammer_basis, MultiPoly, Var};
use crate::padic::RingParams;
use crate::truncexp::trunc_exp_poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QkzParams {
    ring: RingParams,
}

impl QkzParams {
    pub fn new(ring: RingParams) -> Self {
        QkzParams { ring }
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }
}

/// `t − z − 1`.
fn shifted_t(ring: RingParams) -> MultiPoly {
    MultiPoly::var(ring, Var::T)
        .sub(&MultiPoly::var(ring, Var::Z))
        .sub(&MultiPoly::one(ring))
}

/// `(t−z−1)_{(p^s−1)/2} (t−z−1)_{(p^s+1)/2}` without the exponential.
pub fn pochhammer_product(params: &QkzParams) -> MultiPoly {
    let ring = params.ring;
    let a = ring.half_modulus() as u32;
    let x = shifted_t(ring);
    // Both factors are polynomials in a placeholder `t`; substitute t → t−z−1 once.
    let prod = pochhammer_poly(ring, a, Var::T).mul(&pochhammer_poly(ring, a + 1, Var::T));
    prod.substitute(Var::T, &x)
}

/// The master polynomial, expanded in `t, z, λ`.
pub fn qkz_master(params: &QkzParams) -> MultiPoly {
    let ring = params.ring;
    let e = trunc_exp_poly(&MultiPoly::var(ring, Var::Lambda).mul(&MultiPoly::var(ring, Var::T)));
    e.mul(&pochhammer_product(params))
}

fn solution_vars() -> [Var; 2] {
    [Var::Z, Var::Lambda]
}

/// `I_{r,s}(z, λ)`: the `(t)_{p^s−1}` coefficient of the master polynomial.
pub fn construct_qkz_solution(params: &QkzParams) -> Result<SolutionCertificate> {
    let ring = params.ring;
    if ring.modulus() + ring.exp_degree_bound() > u16::MAX as u64 {
        return Err(Error::InvalidParams(format!(
            "p^s = {} is too large for the qkz master polynomial",
            ring.modulus()
        )));
    }
    let expansion = to_pochhammer_basis(&qkz_master(params), Var::T);
    let poly = expansion
        .coefficient(ring, ring.modulus() as u32 - 1)
        .embed(&solution_vars());
    SolutionCertificate::new(
        FamilyParams::Qkz(*params),
        vec![Component {
            index: ComponentIndex::Slot(1),
            poly,
        }],
    )
}

/// Residual `E(p^r λ) I(z − 1, λ) − I(z, λ)`.
pub fn verify_qkz(cert: &SolutionCertificate) -> Result<ResidualReport> {
    cert.expect_family(Family::Qkz)?;
    let ring = cert.ring();
    let i = &cert.components()[0].poly;
    let z_minus_one = MultiPoly::var(ring, Var::Z).sub(&MultiPoly::one(ring));
    let e = trunc_exp_poly(&MultiPoly::var(ring, Var::Lambda));
    let residual = e.mul(&i.substitute(Var::Z, &z_minus_one)).sub(i);
    Ok(ResidualReport::new(
        Family::Qkz,
        "qkz",
        cert.vars(),
        vec![EquationResidual::new("QKZ", residual.embed(cert.vars()))],
    ))
}
