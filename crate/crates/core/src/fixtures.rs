//! Small structures used across tests, benches and examples.

use crate::exactlin::q;
use crate::gradedspace::{GradedBasis, Letter, Side, StructureMap, Word, WordComb};
use crate::inftystruct::{InftyKind, InftyStructure};

/// Strict algebra from a multiplication table on V given as
/// `(left, right, output, coefficient)` over generator names.
pub fn strict_algebra(
    kind: InftyKind,
    v_gens: &[(&str, i64)],
    table: &[(&str, &str, &str, i64)],
    unit: Option<&str>,
) -> InftyStructure {
    let v = GradedBasis::from_pairs(v_gens, Side::V).expect("fixture names are distinct");
    let idx = |n: &str| v.index_of(n).unwrap_or_else(|| panic!("unknown fixture generator {n}"));
    let entries = table.iter().map(|(a, b, c, k)| (vec![idx(a), idx(b)], idx(c), q(*k))).collect();
    let maps = [StructureMap { arity: 2, entries }];
    let unit = unit.map(|n| idx(n) as Letter);
    InftyStructure::from_maps(kind, &v, &maps, unit).expect("fixture degrees are consistent")
}

/// ℚ[x]/(x²) with unit `u`, as a C∞ structure.
pub fn dual_numbers() -> InftyStructure {
    strict_algebra(
        InftyKind::Cinf,
        &[("u", 0), ("x", 0)],
        &[("u", "u", "u", 1), ("u", "x", "x", 1), ("x", "u", "x", 1)],
        Some("u"),
    )
}

/// ℚ[x]/(x³) with unit `u`, as a C∞ structure.
pub fn truncated_cubic() -> InftyStructure {
    strict_algebra(
        InftyKind::Cinf,
        &[("u", 0), ("x", 0), ("x2", 0)],
        &[
            ("u", "u", "u", 1),
            ("u", "x", "x", 1),
            ("x", "u", "x", 1),
            ("u", "x2", "x2", 1),
            ("x2", "u", "x2", 1),
            ("x", "x", "x2", 1),
        ],
        Some("u"),
    )
}

/// The ground field as a unital C∞ structure on one generator.
pub fn ground_field() -> InftyStructure {
    strict_algebra(InftyKind::Cinf, &[("u", 0)], &[("u", "u", "u", 1)], Some("u"))
}

/// Non-associative product on two generators: `a·a = b`, `b·a = a`, so that
/// `(a·a)·a ≠ a·(a·a)`.
pub fn nonassociative_magma() -> InftyStructure {
    strict_algebra(InftyKind::Ainf, &[("a", 0), ("b", 0)], &[("a", "a", "b", 1), ("b", "a", "a", 1)], None)
}

/// Associative, noncommutative: `e·e = e`, `e·n = n`, `n·e = 0`, `n·n = 0`
/// (the pattern of upper-triangular matrix units).
pub fn noncommutative_strict() -> InftyStructure {
    strict_algebra(InftyKind::Ainf, &[("e", 0), ("n", 0)], &[("e", "e", "e", 1), ("e", "n", "n", 1)], None)
}

/// Only an order-one component: `q ↦ p` on V, plus a generator `r` with
/// nothing attached, so the linear cohomology is nonzero.
pub fn linear_differential() -> InftyStructure {
    let v = GradedBasis::from_pairs(&[("p", 0), ("q", 1), ("r", 0)], Side::V).unwrap();
    let maps = [StructureMap { arity: 1, entries: vec![(vec![1], 0, q(1))] }];
    InftyStructure::from_maps(InftyKind::Cinf, &v, &maps, None).unwrap()
}

/// Coefficients `(α, β, γ, δ)` of the non-strict C∞ fixture: the first
/// square-zero member of [`nonstrict_family`] with all four coefficients
/// nonzero, each running over `1, -1, 2, -2` in that order.
pub const NONSTRICT_COEFFS: [i64; 4] = [1, 1, 1, 1];

/// Alphabet of the non-strict fixture: `a`, `b`, `c` in degrees 1, 2, 3.
pub fn nonstrict_alphabet() -> GradedBasis {
    GradedBasis::from_pairs(&[("a", 1), ("b", 2), ("c", 3)], Side::W).unwrap()
}

/// The family `m(a) = α aa`, `m(b) = β[a,b]`, `m(c) = γ[a,c] + δ[a,[a,b]]`.
/// The `δ` term has order three.
pub fn nonstrict_family(alpha: i64, beta: i64, gamma: i64, delta: i64) -> InftyStructure {
    let basis = nonstrict_alphabet();
    let t = |terms: &[(&[Letter], i64)]| -> WordComb {
        terms.iter().map(|(l, c)| (Word::from_slice(l), q(*c))).collect::<WordComb>()
    };
    let (a, b, c) = (0, 1, 2);
    let ma = t(&[(&[a, a], alpha)]);
    // [a,b] = ab − ba; [a,c] = ac + ca; [a,[a,b]] = aab − baa.
    let mb = t(&[(&[a, b], beta), (&[b, a], -beta)]);
    let mc = t(&[(&[a, c], gamma), (&[c, a], gamma), (&[a, a, b], delta), (&[b, a, a], -delta)]);
    InftyStructure::new(InftyKind::Cinf, basis, vec![ma, mb, mc], None).unwrap()
}

/// The frozen non-strict C∞ fixture.
pub fn nonstrict_cinf() -> InftyStructure {
    let [a, b, c, d] = NONSTRICT_COEFFS;
    nonstrict_family(a, b, c, d)
}
