//! Polynomial solutions modulo `p^s` of the KZ and dynamical equations and of a
//! baby qKZ difference equation, together with exact verifiers.
//!
//! The families:
//! - [`hyper`]: the hyperelliptic family built from `Π (t − z_i)^{(p^s−1)/2}`.
//! - [`sl2`]: `sl_2` tensor-product modules, Gaudin and dynamical Hamiltonians.
//! - [`qkz`]: the difference equation `E(p^r λ) I(z−1) ≡ I(z)` in the
//!   falling-factorial basis.
//!
//! Every verifier works with `λ` as a formal variable and with all
//! denominators cleared, so a zero residual is an identity of polynomials
//! over `Z/p^s` (or over the ramified ring when `r` is fractional).

pub mod certificate;
pub mod error;
pub mod gauge;
pub mod hyper;
pub mod mpoly;
pub mod padic;
pub mod qkz;
pub mod sl2;
pub mod truncexp;

pub use certificate::{
    CertificateFile, Component, ComponentIndex, Family, FamilyParams, ResidualReport,
    SolutionCertificate,
};
pub use error::{Error, Result};
pub use mpoly::{MultiPoly, PochhammerExpansion, Var};
pub use padic::{RamifiedElem, Residue, RingParams};
