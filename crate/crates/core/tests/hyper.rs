mod common;

use proptest::prelude::*;
use pskz::certificate::{Component, ComponentIndex, FamilyParams, SolutionCertificate};
use pskz::hyper::{
    construct_solution, independence_check, lambda_zero_sum, master_poly, psi_vector,
    solution_at_lambda_zero_mod_p, vanishing_check, vanishing_inequality_holds, verify_dynamical,
    verify_kz, HyperParams, VanishingOutcome,
};
use pskz::padic::RamifiedElem;
use pskz::truncexp::{exp_coefficients, trunc_exp_poly};
use pskz::{Error, MultiPoly, RingParams, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use common::{exp_oracle, naive_diff, random_poly, NaivePoly};

fn ring(p: u64, s: u32, rn: u64) -> RingParams {
    RingParams::new(p, s, rn, 1).unwrap()
}

fn hp(p: u64, s: u32, g: u32, ell: u32) -> HyperParams {
    HyperParams::new(ring(p, s, 1), g, ell).unwrap()
}

fn naive_vars(n: usize) -> Vec<Var> {
    let mut v = vec![Var::T];
    v.extend((0..n).map(Var::z));
    v.push(Var::Lambda);
    v
}

/// `I^ℓ` by naive big-integer expansion of `E(p^r λ t) Π (t − z_j)^{e_j}`.
fn naive_solution(params: &HyperParams) -> Vec<MultiPoly> {
    let r = params.ring();
    let n = params.n();
    let vars = naive_vars(n);
    let half = (r.modulus() - 1) / 2;
    let lt = NaivePoly::var(r.p(), r.width(), &vars, Var::Lambda)
        .mul(&NaivePoly::var(r.p(), r.width(), &vars, Var::T));
    let e = exp_oracle(r, &lt);
    let target = params.ell() * r.modulus() as u32 - 1;
    (0..n)
        .map(|i| {
            let mut acc = e.clone();
            for j in 0..n {
                let k = if i == j { half - 1 } else { half };
                acc = acc.mul(&naive_diff(r, &vars, Var::T, Var::z(j)).pow(k as u32));
            }
            acc.coefficient_of(Var::T, target).to_multipoly(r)
        })
        .collect()
}

fn zero_certificate(params: &HyperParams) -> SolutionCertificate {
    let comps = (0..params.n())
        .map(|i| Component {
            index: ComponentIndex::Slot(i as u32 + 1),
            poly: MultiPoly::zero(params.ring()),
        })
        .collect();
    SolutionCertificate::new(FamilyParams::Hyper(*params), comps).unwrap()
}

#[test]
fn master_polynomial_examples() {
    let params = hp(3, 1, 1, 1);
    let r = params.ring();
    let t = MultiPoly::var(r, Var::T);
    let naive = (0..3).fold(MultiPoly::one(r), |acc, i| acc.mul(&t.sub(&MultiPoly::var(r, Var::z(i)))));
    assert!(master_poly(&params).equals(&naive));
    assert_eq!(master_poly(&hp(5, 1, 1, 1)).degree_in(Var::T), 6);
    assert_eq!(master_poly(&hp(7, 1, 2, 1)).degree_in(Var::T), 15);
}

#[test]
fn psi_components() {
    let params = hp(3, 1, 1, 1);
    let r = params.ring();
    let t = MultiPoly::var(r, Var::T);
    let psi = psi_vector(&params);
    let want = t.sub(&MultiPoly::var(r, Var::z(1))).mul(&t.sub(&MultiPoly::var(r, Var::z(2))));
    assert!(psi[0].equals(&want));

    for params in [hp(5, 1, 1, 1), hp(3, 2, 1, 1), hp(5, 1, 2, 1)] {
        let r = params.ring();
        let bound = params.n() as i64 * r.half_modulus() as i64 - 1 + r.exp_degree_bound() as i64;
        for (i, c) in psi_vector(&params).iter().enumerate() {
            assert!(c.degree_in(Var::T) <= bound);
            // λ = 0 leaves Φ^o/(t − z_i)
            let at_zero = c.substitute(Var::Lambda, &MultiPoly::zero(r));
            let prod = at_zero.mul(&t_minus_z(r, i));
            assert!(prod.equals(&master_poly(&params).embed(prod.vars())));
        }
    }
}

fn t_minus_z(r: RingParams, i: usize) -> MultiPoly {
    MultiPoly::var(r, Var::T).sub(&MultiPoly::var(r, Var::z(i)))
}

#[test]
fn worked_values() {
    let one = MultiPoly::one(ring(3, 1, 1));
    let cert = construct_solution(&hp(3, 1, 1, 1)).unwrap();
    assert!(cert.components().iter().all(|c| c.poly.equals(&one)));
    assert!(construct_solution(&hp(3, 1, 1, 2)).unwrap().is_zero());
    assert!(construct_solution(&hp(5, 1, 1, 2)).unwrap().is_zero());
}

#[test]
fn solutions_match_naive_expansion() {
    let cases = [
        hp(5, 1, 1, 1),
        hp(3, 2, 1, 1),
        hp(3, 1, 2, 1),
        hp(3, 1, 2, 2),
        HyperParams::new(ring(3, 1, 2), 1, 1).unwrap(),
        HyperParams::new(ring(3, 2, 2), 1, 2).unwrap(),
        HyperParams::new(RingParams::new(5, 1, 3, 2).unwrap(), 1, 1).unwrap(),
    ];
    for params in cases {
        let cert = construct_solution(&params).unwrap();
        for (got, want) in cert.polys().iter().zip(naive_solution(&params)) {
            assert!(got.embed(want.vars()).equals(&want), "{:?}", params);
        }
    }
}

#[test]
fn residuals_vanish_and_perturbations_are_located() {
    for params in [hp(3, 1, 1, 1), hp(5, 1, 1, 1), hp(5, 2, 1, 1), hp(7, 1, 2, 2)] {
        let cert = construct_solution(&params).unwrap();
        assert!(verify_kz(&cert).unwrap().all_zero());
        let dynamical = verify_dynamical(&cert).unwrap();
        assert!(dynamical.all_zero());
        assert!(dynamical.note.as_deref().unwrap_or("").contains("unit lambda"));

        let zero = zero_certificate(&params);
        assert!(verify_kz(&zero).unwrap().all_zero());
        assert!(verify_dynamical(&zero).unwrap().all_zero());
        assert!(lambda_zero_sum(&zero).unwrap().is_zero());

        let r = params.ring();
        let bumped = cert.polys()[0].add(&MultiPoly::one(r));
        let bad = cert.with_component(&ComponentIndex::Slot(1), bumped).unwrap();
        let report = verify_kz(&bad).unwrap();
        let failed: Vec<&str> = report.failures().map(|e| e.equation.as_str()).collect();
        assert!(failed.contains(&"KZ[1,2]"), "{failed:?}");
        assert!(!verify_dynamical(&bad).unwrap().all_zero());
    }
}

#[test]
fn dynamical_worked_value() {
    // I¹ = (1,1,1) mod 3: D_i = 0 − 2·3λ z_i − 3 ≡ 0
    let cert = construct_solution(&hp(3, 1, 1, 1)).unwrap();
    let report = verify_dynamical(&cert).unwrap();
    assert_eq!(report.equations.len(), 3);
    assert!(report.all_zero());
}

#[test]
fn sum_identity() {
    for params in [hp(3, 1, 1, 1), hp(5, 1, 1, 1), hp(3, 2, 2, 1), hp(7, 2, 1, 1)] {
        let cert = construct_solution(&params).unwrap();
        assert!(lambda_zero_sum(&cert).unwrap().is_zero());
    }
}

#[test]
fn vanishing_lemma() {
    assert_eq!(
        vanishing_check(&hp(5, 1, 2, 1), 3).unwrap(),
        VanishingOutcome::Verified(vec![3, 4, 5])
    );
    assert!(!vanishing_inequality_holds(ring(3, 1, 1), 1));
    assert_eq!(vanishing_check(&hp(3, 1, 1, 1), 3).unwrap(), VanishingOutcome::Inapplicable);
    assert_eq!(
        vanishing_check(&hp(7, 1, 1, 1), 3).unwrap(),
        VanishingOutcome::Verified(vec![2, 3, 4])
    );
}

fn det_mod_p(p: u64, m: &[Vec<u64>]) -> u64 {
    match m.len() {
        1 => m[0][0] % p,
        2 => (m[0][0] * m[1][1] % p + p - m[0][1] * m[1][0] % p) % p,
        _ => unreachable!("g ≤ 2 here"),
    }
}

#[test]
fn independence_witnesses_check_out() {
    assert!(matches!(
        independence_check(&hp(3, 1, 1, 1)),
        Err(Error::Hypothesis(_))
    ));
    for (p, s, g) in [(7, 1, 1), (7, 1, 2), (5, 2, 2), (5, 1, 1)] {
        let params = hp(p, s, g, 1);
        let w = independence_check(&params).unwrap().expect("independent");
        let point = w.point.clone().expect("point found");
        let field = ring(p, 1, 1);
        let at: BTreeMap<Var, RamifiedElem> = point
            .iter()
            .enumerate()
            .map(|(i, &x)| (Var::z(i), RamifiedElem::from_int(field, x as i64)))
            .collect();
        // recompute the rows by reducing the full-precision λ = 0 solutions
        let m: Vec<Vec<u64>> = (1..=g)
            .map(|ell| {
                let cert = construct_solution(&params.with_ell(ell).unwrap()).unwrap();
                w.columns
                    .iter()
                    .map(|&c| {
                        let poly = cert.polys()[c - 1]
                            .substitute(Var::Lambda, &MultiPoly::zero(params.ring()))
                            .reduce_to(field)
                            .unwrap();
                        poly.embed(&(0..params.n()).map(Var::z).collect::<Vec<_>>())
                            .evaluate(&at)
                            .unwrap()
                            .coeffs()[0]
                    })
                    .collect()
            })
            .collect();
        let det = det_mod_p(p, &m);
        assert_ne!(det, 0, "p={p} s={s} g={g}");
        assert_eq!(Some(det), w.value);
    }
}

/// At p = 3, s = 2, g = 2 the hypothesis p^s > 2g + 1 holds but
/// I¹(z,0) ≡ −e₃(z₁³,…,z₅³)·I²(z,0) mod 3, so no 2×2 minor survives.
#[test]
fn dependent_projections_at_p3_s2() {
    let params = hp(3, 2, 2, 1);
    assert!(independence_check(&params).unwrap().is_none());
    let field = ring(3, 1, 1);
    let rows: Vec<Vec<MultiPoly>> = (1..=2)
        .map(|ell| solution_at_lambda_zero_mod_p(&params.with_ell(ell).unwrap()).unwrap())
        .collect();
    let cubes: Vec<MultiPoly> = (0..5).map(|i| MultiPoly::var(field, Var::z(i)).pow(3)).collect();
    let mut e3 = MultiPoly::zero(field);
    for a in 0..5 {
        for b in a + 1..5 {
            for c in b + 1..5 {
                e3 = e3.add(&cubes[a].mul(&cubes[b]).mul(&cubes[c]));
            }
        }
    }
    for j in 0..5 {
        assert!(!rows[1][j].is_zero());
        assert!(rows[0][j].equals(&e3.neg().mul(&rows[1][j])));
    }
}

#[test]
fn lambda_free_part_and_exponential_expansion() {
    // c_N(z, λ) = Σ_k (p^{kr}/k!) λ^k c^o_{N−k}(z)
    for params in [hp(5, 1, 1, 1), hp(3, 2, 1, 1), HyperParams::new(ring(3, 1, 2), 1, 1).unwrap()] {
        let r = params.ring();
        let cert = construct_solution(&params).unwrap();
        let target = params.ell() * r.modulus() as u32 - 1;
        let at_zero = params.with_ell(params.ell()).unwrap();
        let lambda = MultiPoly::var(r, Var::Lambda);
        for (i, got) in cert.polys().iter().enumerate() {
            let psi_o = master_like_component(&at_zero, i);
            let mut want = MultiPoly::zero(r);
            for (k, c) in exp_coefficients(r).iter().enumerate() {
                if k as u32 > target {
                    break;
                }
                let co = psi_o.coefficient_of(Var::T, target - k as u32);
                want = want.add(&co.mul(&lambda.pow(k as u32)).scale(c));
            }
            assert!(got.equals(&want), "{:?} slot {i}", params);
            let free = got.coefficient_of(Var::Lambda, 0);
            assert!(free.equals(&psi_o.coefficient_of(Var::T, target).embed(free.vars())));
        }
    }
}

/// `Φ^o / (t − z_i)` expanded.
fn master_like_component(params: &HyperParams, i: usize) -> MultiPoly {
    let r = params.ring();
    let half = r.half_modulus() as u32;
    (0..params.n()).fold(MultiPoly::one(r), |acc, j| {
        let e = if i == j { half - 1 } else { half };
        acc.mul(&t_minus_z(r, j).pow(e))
    })
}

/// `I(z + c)` still solves the KZ system (it only sees differences of the
/// `z_i`), and `E(−p^r λ c) · I(z + c)` solves the dynamical equation too.
#[test]
fn translation_covariance() {
    for params in [hp(3, 1, 1, 1), hp(5, 1, 1, 1), hp(3, 2, 1, 1), hp(5, 2, 2, 1), hp(7, 1, 2, 2)] {
        let r = params.ring();
        let cert = construct_solution(&params).unwrap();
        for c in [1i64, 2, -1] {
            let gauge = trunc_exp_poly(&MultiPoly::var(r, Var::Lambda).scale_int(-c));
            let (mut plain, mut gauged) = (cert.clone(), cert.clone());
            for (k, comp) in cert.components().iter().enumerate() {
                let mut poly = comp.poly.clone();
                for i in 0..params.n() {
                    let zi = MultiPoly::var(r, Var::z(i)).add(&MultiPoly::from_int(r, c));
                    poly = poly.substitute(Var::z(i), &zi);
                }
                let idx = ComponentIndex::Slot(k as u32 + 1);
                gauged = gauged.with_component(&idx, gauge.mul(&poly)).unwrap();
                plain = plain.with_component(&idx, poly).unwrap();
            }
            assert!(verify_kz(&plain).unwrap().all_zero(), "{:?} c={c}", params);
            assert!(verify_kz(&gauged).unwrap().all_zero(), "{:?} c={c}", params);
            assert!(verify_dynamical(&gauged).unwrap().all_zero(), "{:?} c={c}", params);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The `t^{ℓ p^s − 1}` coefficient of `∂_t(E(p^r λ t) F)` vanishes.
    #[test]
    fn extraction_kills_t_derivatives(
        case in prop::sample::select(vec![(3u64, 1u32, 1u64), (3, 2, 1), (5, 1, 1), (5, 2, 1), (7, 1, 1), (3, 1, 2)]),
        seed in any::<u64>(),
        ell in 1u32..=2,
    ) {
        let r = ring(case.0, case.1, case.2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = [Var::T, Var::z(0), Var::z(1), Var::Lambda];
        let f = random_poly(&mut rng, r, &vars, 8, 2 * r.modulus() as u32);
        let e = trunc_exp_poly(&MultiPoly::var(r, Var::Lambda).mul(&MultiPoly::var(r, Var::T)));
        let g = e.mul(&f).embed(&vars).partial_derivative(Var::T).unwrap();
        prop_assert!(g.coefficient_of(Var::T, ell * r.modulus() as u32 - 1).is_zero());
    }
}
