//! Truncated exponentials `E_{r,s}(p^r A) = Σ_{k ≤ d(r,s)} p^{kr} A^k / k!`.
//!
//! Callers pass the content `A` of the argument; the factor `p^r` is folded
//! into the coefficients `p^{kr}/k!`, which are integral in the ring.

use crate::mpoly::MultiPoly;
use crate::padic::{p_power_over_factorial, RamifiedElem, RingParams};

/// `d(r, s)`; for `r = 1` this is `d(s) = floor(s (p-1)/(p-2)) + 1`.
pub fn degree_bound(ring: &RingParams) -> u64 {
    ring.exp_degree_bound()
}

/// The coefficients `p^{kr}/k!` for `k = 0..=d(r,s)`.
pub fn exp_coefficients(ring: RingParams) -> Vec<RamifiedElem> {
    (0..=degree_bound(&ring))
        .map(|k| p_power_over_factorial(ring, k).expect("k within the degree bound"))
        .collect()
}

/// `E_{r,s}(p^r · arg)` as a polynomial.
pub fn trunc_exp_poly(arg: &MultiPoly) -> MultiPoly {
    let ring = arg.ring();
    let mut power = MultiPoly::one(ring).embed(arg.vars());
    let mut parts = Vec::new();
    for (k, c) in exp_coefficients(ring).iter().enumerate() {
        if k > 0 {
            power = power.mul(arg);
        }
        if !c.is_zero() {
            parts.push(power.scale(c));
        }
    }
    MultiPoly::sum(ring, parts).embed(arg.vars())
}
