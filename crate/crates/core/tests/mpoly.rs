mod common;

use proptest::prelude::*;
use pskz::mpoly::{
    binomial_power, pochhammer_poly, product_coefficient, stirling2_table, to_pochhammer_basis,
};
use pskz::padic::RamifiedElem;
use pskz::{Error, MultiPoly, RingParams, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use common::{random_poly, sample_rings, NaivePoly};

fn ring(p: u64, s: u32) -> RingParams {
    RingParams::unramified(p, s).unwrap()
}

fn var(r: RingParams, v: Var) -> MultiPoly {
    MultiPoly::var(r, v)
}

fn int(r: RingParams, c: i64) -> MultiPoly {
    MultiPoly::from_int(r, c)
}

#[test]
fn product_examples() {
    let r = ring(7, 2);
    let (t, z) = (var(r, Var::T), var(r, Var::Z));
    assert_eq!(t.sub(&z).mul(&t.add(&z)), t.pow(2).sub(&z.pow(2)));
    assert_eq!(t.mul(&MultiPoly::one(r)), t);

    // (t−z1)(t−z2)(t−z3) against elementary symmetric functions, mod 3
    let r = ring(3, 1);
    let t = var(r, Var::T);
    let z: Vec<MultiPoly> = (0..3).map(|i| var(r, Var::z(i))).collect();
    let prod = z.iter().fold(MultiPoly::one(r), |acc, zi| acc.mul(&t.sub(zi)));
    let e1 = z[0].add(&z[1]).add(&z[2]);
    let e2 = z[0].mul(&z[1]).add(&z[0].mul(&z[2])).add(&z[1].mul(&z[2]));
    let e3 = z[0].mul(&z[1]).mul(&z[2]);
    let expected = t
        .pow(3)
        .sub(&e1.mul(&t.pow(2)))
        .add(&e2.mul(&t))
        .sub(&e3);
    assert!(prod.equals(&expected));
}

#[test]
fn derivative_examples() {
    let r = ring(5, 1);
    let t = var(r, Var::T);
    assert_eq!(t.pow(3).partial_derivative(Var::T).unwrap(), t.pow(2).scale_int(3));
    let z2 = var(r, Var::Z).pow(2);
    assert!(z2.embed(&[Var::T, Var::Z]).partial_derivative(Var::T).unwrap().is_zero());
    assert!(matches!(z2.partial_derivative(Var::T), Err(Error::UnknownVariable(_))));
    let r = ring(3, 1);
    assert!(var(r, Var::T).pow(3).partial_derivative(Var::T).unwrap().is_zero());
}

#[test]
fn coefficient_examples() {
    let r = ring(5, 1);
    let (t, z) = (var(r, Var::T), var(r, Var::z(1)));
    let p = t.pow(2).add(&t.mul(&z).scale_int(2));
    assert!(p.coefficient_of(Var::T, 1).equals(&z.scale_int(2)));
    assert!(p.coefficient_of(Var::T, 3).is_zero());
    let q = t.sub(&var(r, Var::z(1))).mul(&t.sub(&var(r, Var::z(2))));
    assert!(q.coefficient_of(Var::T, 2).equals(&MultiPoly::one(r)));
}

#[test]
fn substitution_examples() {
    let r = ring(7, 1);
    let (t, z) = (var(r, Var::T), var(r, Var::Z));
    let shifted = z.pow(2).substitute(Var::Z, &z.sub(&int(r, 1)));
    assert!(shifted.equals(&z.pow(2).sub(&z.scale_int(2)).add(&int(r, 1))));
    let p = t.mul(&z).add(&z.pow(3));
    assert!(p.substitute(Var::Z, &z).equals(&p));
    assert!(t.mul(&z).substitute(Var::Z, &MultiPoly::zero(r)).is_zero());
}

#[test]
fn pochhammer_examples() {
    let r = ring(7, 1);
    let t = var(r, Var::T);
    assert!(pochhammer_poly(r, 0, Var::T).equals(&MultiPoly::one(r)));
    assert!(pochhammer_poly(r, 1, Var::T).equals(&t));
    assert!(pochhammer_poly(r, 2, Var::T).equals(&t.pow(2).sub(&t)));
    assert!(pochhammer_poly(r, 3, Var::T).equals(&t.pow(3).sub(&t.pow(2).scale_int(3)).add(&t.scale_int(2))));

    let e = to_pochhammer_basis(&t.pow(2), Var::T);
    assert_eq!(e.coeffs.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
    assert!(e.coefficient(r, 2).equals(&MultiPoly::one(r)));
    assert!(e.coefficient(r, 1).equals(&MultiPoly::one(r)));
    let e = to_pochhammer_basis(&t.pow(3), Var::T);
    assert!(e.coefficient(r, 2).equals(&int(r, 3)));
    let e = to_pochhammer_basis(&int(r, 4), Var::T);
    assert!(e.coefficient(r, 0).equals(&int(r, 4)));
}

#[test]
fn stirling_numbers_match_explicit_sums() {
    // S(n,k) = (1/k!) Σ_j (−1)^j C(k,j) (k−j)^n, evaluated in i128
    fn explicit(n: u32, k: u32) -> i128 {
        let mut binom = 1i128;
        let mut acc = 0i128;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as i128 / j as i128;
            }
            let term = binom * ((k - j) as i128).pow(n);
            acc += if j % 2 == 0 { term } else { -term };
        }
        let fact: i128 = (1..=k as i128).product();
        acc / fact
    }
    let r = ring(3, 3);
    let table = stirling2_table(r, 14);
    for n in 0..=14u32 {
        for k in 0..=n {
            let want = explicit(n, k).rem_euclid(27) as u64;
            assert_eq!(table[n as usize][k as usize], want, "S({n},{k})");
        }
    }
}

#[test]
fn evaluation_examples() {
    let r = ring(3, 1);
    let (t, z) = (var(r, Var::T), var(r, Var::Z));
    let one = RamifiedElem::one(r);
    let at: BTreeMap<Var, RamifiedElem> = [(Var::T, one.clone()), (Var::Z, one)].into();
    assert!(t.sub(&z).evaluate(&at).unwrap().is_zero());
    assert_eq!(MultiPoly::one(r).evaluate(&BTreeMap::new()).unwrap(), RamifiedElem::one(r));
    let at: BTreeMap<Var, RamifiedElem> = [(Var::T, RamifiedElem::from_int(r, 2))].into();
    assert_eq!(t.pow(2).evaluate(&at).unwrap(), RamifiedElem::one(r));
    assert!(matches!(t.mul(&z).evaluate(&at), Err(Error::MissingVariable(_))));
}

#[test]
fn binomial_powers_match_repeated_products() {
    for r in [ring(3, 2), ring(5, 3), RingParams::new(3, 2, 3, 2).unwrap()] {
        let d = var(r, Var::T).sub(&var(r, Var::z(2)));
        for e in 0..30 {
            assert!(binomial_power(r, Var::T, Var::z(2), e).equals(&d.pow(e)), "{r} e={e}");
            assert!(binomial_power(r, Var::z(2), Var::T, e).equals(&d.neg().pow(e)), "{r} e={e}");
        }
    }
}

#[test]
fn exact_division() {
    let r = ring(5, 2);
    let (t, z) = (var(r, Var::T), var(r, Var::Z));
    let a = t.pow(3).sub(&z.mul(&t)).add(&int(r, 7));
    let b = t.sub(&z.pow(2)).add(&int(r, 2));
    assert!(a.mul(&b).div_exact(&b).unwrap().equals(&a));
    assert!(t.add(&int(r, 1)).div_exact(&t).is_none());
    assert!(a.div_exact(&MultiPoly::zero(r)).is_none());
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn any_ring() -> impl Strategy<Value = RingParams> {
    prop::sample::select(sample_rings())
}

const VARS: [Var; 3] = [Var::T, Var::Z, Var::Lambda];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_naive_double_loop(r in any_ring(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_poly(&mut rng, r, &VARS, 6, 8);
        let b = random_poly(&mut rng, r, &VARS, 6, 8);
        let naive = NaivePoly::from_multipoly(&a, &VARS).mul(&NaivePoly::from_multipoly(&b, &VARS));
        prop_assert!(a.mul(&b).equals(&naive.to_multipoly(r)));
    }

    #[test]
    fn ring_laws(r in any_ring(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_poly(&mut rng, r, &VARS, 5, 4);
        let b = random_poly(&mut rng, r, &VARS, 5, 4);
        let c = random_poly(&mut rng, r, &VARS, 5, 4);
        prop_assert!(a.mul(&b).equals(&b.mul(&a)));
        prop_assert!(a.mul(&b.add(&c)).equals(&a.mul(&b).add(&a.mul(&c))));
        prop_assert!(a.mul(&b).mul(&c).equals(&a.mul(&b.mul(&c))));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn derivative_is_a_derivation(r in any_ring(), seed in any::<u64>(), k in 0usize..3) {
        let mut rng = seeded(seed);
        let a = random_poly(&mut rng, r, &VARS, 6, 6);
        let b = random_poly(&mut rng, r, &VARS, 6, 6);
        let v = VARS[k];
        let lhs = a.mul(&b).embed(&VARS).partial_derivative(v).unwrap();
        let rhs = a.embed(&VARS).partial_derivative(v).unwrap().mul(&b)
            .add(&a.mul(&b.embed(&VARS).partial_derivative(v).unwrap()));
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn pochhammer_round_trip(r in any_ring(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_poly(&mut rng, r, &VARS, 8, 12);
        let e = to_pochhammer_basis(&a, Var::T);
        prop_assert!(e.reconstruct(r).equals(&a));
    }

    /// The `(t)_{ℓ p^s − 1}` coefficient is unchanged by `t → t + 1`.
    #[test]
    fn shift_preserves_extracted_coefficient(r in any_ring(), seed in any::<u64>(), ell in 1u32..=3) {
        let mut rng = seeded(seed);
        let max_deg = 3 * r.modulus() as u32 - 1;
        let f = random_poly(&mut rng, r, &VARS, 10, max_deg);
        let shifted = f.substitute(Var::T, &var(r, Var::T).add(&int(r, 1)));
        let d = ell * r.modulus() as u32 - 1;
        let a = to_pochhammer_basis(&f, Var::T).coefficient(r, d);
        let b = to_pochhammer_basis(&shifted, Var::T).coefficient(r, d);
        prop_assert!(a.equals(&b));
    }

    #[test]
    fn coefficient_of_product_is_a_convolution(r in any_ring(), seed in any::<u64>(), d in 0u32..12) {
        let mut rng = seeded(seed);
        let a = random_poly(&mut rng, r, &VARS, 6, 6);
        let b = random_poly(&mut rng, r, &VARS, 6, 6);
        let conv = MultiPoly::sum(
            r,
            (0..=d).map(|i| a.coefficient_of(Var::T, i).mul(&b.coefficient_of(Var::T, d - i))),
        );
        prop_assert!(a.mul(&b).coefficient_of(Var::T, d).equals(&conv));
    }

    #[test]
    fn windowed_extraction_matches_full_expansion(r in any_ring(), seed in any::<u64>(), dt in 0u32..14, dz in 0u32..8) {
        let mut rng = seeded(seed);
        let factors: Vec<MultiPoly> = (0..3).map(|_| random_poly(&mut rng, r, &VARS, 5, 5)).collect();
        let full = factors.iter().fold(MultiPoly::one(r), |acc, f| acc.mul(f));
        let want = full.coefficient_of(Var::T, dt).coefficient_of(Var::Z, dz);
        let got = product_coefficient(r, &factors, &[Var::T, Var::Z], &[dt, dz]);
        prop_assert!(got.equals(&want));
    }

    #[test]
    fn substitution_is_a_ring_map(r in any_ring(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_poly(&mut rng, r, &VARS, 5, 4);
        let b = random_poly(&mut rng, r, &VARS, 5, 4);
        let q = random_poly(&mut rng, r, &[Var::Z, Var::Lambda], 3, 2);
        let lhs = a.mul(&b).substitute(Var::T, &q);
        let rhs = a.substitute(Var::T, &q).mul(&b.substitute(Var::T, &q));
        prop_assert!(lhs.equals(&rhs));
    }
}
