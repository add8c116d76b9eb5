//! Empirical comparison of the hyperelliptic solutions with the `sl_2`
//! solutions for `m = (1, …, 1)`, `k = 1`, `κ = 2`.
//!
//! For every scale `c ∈ Z/p^s` the search looks for one polynomial
//! `G(z, λ)` with `I_sl2,J(z, λ) ≡ G · I_hyper,j(z, cλ)` for all slots, where
//! `J = 1_j`. `G` is obtained by exact division in one slot and checked in
//! all others.

use std::fmt;

use crate::error::Result;
use crate::hyper::{construct_solution, HyperParams};
use crate::mpoly::{MultiPoly, Var};
use crate::padic::RingParams;
use crate::sl2::{construct_solution_sl2, BasisIndex, Sl2Params};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeMatch {
    pub scale: u64,
    pub gauge: MultiPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeReport {
    pub ring: RingParams,
    pub g: u32,
    pub matches: Vec<GaugeMatch>,
    /// Scales for which no slot admitted an exact division.
    pub undecided: Vec<u64>,
    pub sl2_is_zero: bool,
}

impl GaugeReport {
    pub fn found(&self) -> bool {
        !self.matches.is_empty()
    }
}

impl fmt::Display for GaugeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "gauge search: ring {} g={} (m = (1,...,1), k = 1, kappa = 2)",
            self.ring, self.g
        )?;
        if self.sl2_is_zero {
            writeln!(f, "  sl2 solution is zero; every gauge is trivial")?;
        }
        if self.matches.is_empty() {
            writeln!(f, "  no (G, c) found")?;
        }
        for m in &self.matches {
            writeln!(f, "  c = {}: G = {}", m.scale, m.gauge)?;
        }
        if !self.undecided.is_empty() {
            writeln!(f, "  scales without an exact quotient: {:?}", self.undecided)?;
        }
        Ok(())
    }
}

/// Runs the search at `ℓ = 1`.
pub fn gauge_search(ring: RingParams, g: u32) -> Result<GaugeReport> {
    let n = 2 * g as usize + 1;
    let hyper = construct_solution(&HyperParams::new(ring, g, 1)?)?;
    let sl2 = construct_solution_sl2(&Sl2Params::new(ring, (2, 1), vec![1; n], 1, vec![1])?)?;

    let target: Vec<MultiPoly> = (0..n)
        .map(|j| {
            let mut idx = vec![0u32; n];
            idx[j] = 1;
            let key = BasisIndex(idx);
            sl2.components()
                .iter()
                .find(|c| matches!(&c.index, crate::ComponentIndex::Basis(b) if *b == key.0))
                .map(|c| c.poly.clone())
                .unwrap_or_else(|| MultiPoly::zero(ring))
        })
        .collect();
    let sl2_is_zero = target.iter().all(|t| t.is_zero());

    let mut matches = Vec::new();
    let mut undecided = Vec::new();
    for c in 0..ring.modulus() {
        let scaled_lambda = MultiPoly::var(ring, Var::Lambda).scale_int(c as i64);
        let h: Vec<MultiPoly> = hyper
            .components()
            .iter()
            .map(|comp| comp.poly.substitute(Var::Lambda, &scaled_lambda))
            .collect();
        let candidate = (0..n).find_map(|j| {
            if h[j].is_zero() {
                None
            } else {
                target[j].div_exact(&h[j])
            }
        });
        match candidate {
            Some(gauge) => {
                let ok = (0..n).all(|j| gauge.mul(&h[j]).equals(&target[j]));
                if ok && !gauge.is_zero() {
                    matches.push(GaugeMatch { scale: c, gauge });
                }
            }
            None => {
                if h.iter().any(|x| !x.is_zero()) && !sl2_is_zero {
                    undecided.push(c);
                }
            }
        }
    }
    Ok(GaugeReport {
        ring,
        g,
        matches,
        undecided,
        sl2_is_zero,
    })
}
