//! Shared generators and fixtures for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

use qsde_core::algebra::{CommutationMatrix, NormalMonomial, OpPoly};
use qsde_core::frontend::{elaborate, parse, Elaborated};
use qsde_core::matrix::OpVector;
use qsde_core::realize::Oscillator;
use qsde_core::scalar::Scalar;

pub const FIXTURES: &[&str] = &[
    "opo.qs",
    "cavity.qs",
    "linear_cavity.qs",
    "empty.qs",
    "kerr.qs",
    "opo_d2.qs",
    "opo_flipped_b.qs",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> Elaborated {
    let desc = parse(&fixture(name)).unwrap_or_else(|d| panic!("{name}: {d}"));
    elaborate(&desc).unwrap_or_else(|d| panic!("{name}: {d}"))
}

pub fn p(name: &str) -> Scalar {
    Scalar::param(name)
}

/// `c · a*^cre a^ann`.
pub fn term(c: Scalar, cre: &[u32], ann: &[u32]) -> OpPoly {
    OpPoly::term(NormalMonomial::new(cre.to_vec(), ann.to_vec()), c)
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---- seeded generators -------------------------------------------------

pub fn random_scalar<R: Rng>(rng: &mut R, symbolic: bool) -> Scalar {
    let re = Scalar::ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
    let im = if rng.gen_bool(0.5) {
        &Scalar::ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2)) * &Scalar::i()
    } else {
        Scalar::zero()
    };
    let mut c = &re + &im;
    if c.is_zero() {
        c = Scalar::one();
    }
    if symbolic && rng.gen_bool(0.3) {
        c = &c * &p(["x", "y"][rng.gen_range(0..2)]);
    }
    c
}

/// Random exponents with total degree at most `max_degree`.
pub fn random_monomial<R: Rng>(rng: &mut R, n: usize, max_degree: u32, creation: bool) -> NormalMonomial {
    let mut cre = vec![0; n];
    let mut ann = vec![0; n];
    for _ in 0..rng.gen_range(0..=max_degree) {
        let j = rng.gen_range(0..n);
        if creation && rng.gen_bool(0.5) {
            cre[j] += 1;
        } else {
            ann[j] += 1;
        }
    }
    NormalMonomial::new(cre, ann)
}

pub fn random_poly<R: Rng>(rng: &mut R, n: usize, max_degree: u32, max_terms: usize, symbolic: bool) -> OpPoly {
    let terms: Vec<_> = (0..rng.gen_range(1..=max_terms))
        .map(|_| (random_monomial(rng, n, max_degree, true), random_scalar(rng, symbolic)))
        .collect();
    OpPoly::from_terms(n, terms)
}

pub fn random_annihilation_poly<R: Rng>(rng: &mut R, n: usize, max_degree: u32, max_terms: usize) -> OpPoly {
    let terms: Vec<_> = (0..rng.gen_range(1..=max_terms))
        .map(|_| (random_monomial(rng, n, max_degree, false), random_scalar(rng, false)))
        .collect();
    OpPoly::from_terms(n, terms)
}

/// `H = K + K†` with `deg K ≤ 3` and `m ≤ 2` annihilation-only couplings of
/// degree at most `coupling_degree`, all with rational coefficients.
pub fn random_oscillator<R: Rng>(rng: &mut R, coupling_degree: u32) -> Oscillator {
    let n = rng.gen_range(1..=2);
    let m = rng.gen_range(1..=2);
    let k = random_poly(rng, n, 3, 3, false);
    let h = &k + &k.adjoint();
    let l: Vec<OpPoly> = (0..m)
        .map(|_| random_annihilation_poly(rng, n, coupling_degree, 2))
        .collect();
    Oscillator::new(CommutationMatrix::identity(n), h, OpVector::new(n, l).unwrap()).unwrap()
}

// ---- proptest strategies -----------------------------------------------

pub fn scalar_strategy() -> impl Strategy<Value = Scalar> {
    (-4i64..=4, 1i64..=3, -3i64..=3, 1i64..=2, 0usize..4).prop_map(|(a, b, c, d, sym)| {
        let s = &Scalar::ratio(a, b) + &(&Scalar::ratio(c, d) * &Scalar::i());
        match sym {
            0 => &s * &p("x"),
            1 => &s * &(&p("y") + &Scalar::one()),
            _ => s,
        }
    })
}

/// A monomial as a multiset of generator indices: `0..n` are annihilators and
/// `n..2n` creators.
pub fn monomial_strategy(n: usize, max_degree: u32) -> impl Strategy<Value = NormalMonomial> {
    prop::collection::vec(0..2 * n, 0..=max_degree as usize).prop_map(move |gens| {
        let mut cre = vec![0; n];
        let mut ann = vec![0; n];
        for g in gens {
            if g < n {
                ann[g] += 1;
            } else {
                cre[g - n] += 1;
            }
        }
        NormalMonomial::new(cre, ann)
    })
}

pub fn poly_strategy(n: usize, max_degree: u32, max_terms: usize) -> impl Strategy<Value = OpPoly> {
    prop::collection::vec((monomial_strategy(n, max_degree), scalar_strategy()), 0..=max_terms)
        .prop_map(move |terms| OpPoly::from_terms(n, terms))
}

/// Up to three modes with `(n, polys)`.
pub fn polys_strategy(count: usize, max_degree: u32, max_terms: usize) -> impl Strategy<Value = (usize, Vec<OpPoly>)> {
    (1usize..=3).prop_flat_map(move |n| {
        (
            Just(n),
            prop::collection::vec(poly_strategy(n, max_degree, max_terms), count),
        )
    })
}
