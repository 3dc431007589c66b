//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any
//! failure. Reference values come from the oracles in `common`.

mod common;

use common::*;
use infty_core::cycliccomplex::{compare_cyclic_models, cyclic_harrison_window, periodicity_les};
use infty_core::cyclicshuffle::{CyclicOperatorTable, TableOp};
use infty_core::fixtures::{
    dual_numbers, ground_field, noncommutative_strict, nonstrict_alphabet, nonstrict_cinf, truncated_cubic, NONSTRICT_COEFFS,
};
use infty_core::gradedspace::{enumerate_words, Letter, Side};
use infty_core::hodge::{
    cohomology_by_order, decompose_cyclic, decompose_hochschild, failing_nodes, harrison_comparison, verify_decomposed_les,
    CyclicModel, HochschildFlavour, LesKind,
};
use infty_core::homcomplex::{
    bar_window, check_contracting_homotopy, differential_identities, harrison_window, hochschild_window,
    normalised_hochschild_window, Coefficients, ComplexWindow, Window,
};
use infty_core::inftystruct::{check_cinfty, validate_square_zero, InftyStructure};
use infty_core::ncforms::{bilinear_form, FormCalculus, Geometry, Substitution, VectorField};
use infty_core::{GradedBasis, RationalMatrix, Word, WordComb};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn alphabet(degs: &[i64]) -> GradedBasis {
    let names = ["a", "b", "c", "d"];
    let pairs: Vec<(&str, i64)> = degs.iter().enumerate().map(|(i, &d)| (names[i], d)).collect();
    GradedBasis::from_pairs(&pairs, Side::W).unwrap()
}

fn elem_of(x: &WordComb) -> Elem {
    x.iter().map(|(w, c)| (w.0.clone(), c.clone())).collect()
}

fn column_elem(m: &RationalMatrix, words: &[Word], c: usize) -> Elem {
    clean(m.column(c).iter().map(|(r, v)| (words[*r].0.clone(), v.clone())).collect())
}

fn content_of(w: &[u16]) -> Vec<u16> {
    let mut c = w.to_vec();
    c.sort_unstable();
    c
}

/// Cohomology dimensions at every degree of the window, or the first
/// degree the window cannot certify.
fn exact_dims(w: &ComplexWindow, lo: i64, hi: i64) -> Result<Vec<usize>, String> {
    (lo..=hi)
        .map(|n| {
            ensure(w.is_exact(n), || format!("{}: degree {n} not complete at this cap", w.theory))?;
            w.cohomology(n).map_err(|e| e.to_string())
        })
        .collect()
}

// ---------------------------------------------------------------------------

/// The cyclic operator identities and the spectrum of `s`.
fn criterion_1() -> Outcome {
    let mut checked = 0;
    for (degs, oracle_max) in [(vec![0i64, 1], 6usize), (vec![1, 2, 3], 5), (vec![0, 0, 1], 5)] {
        let b = alphabet(&degs);
        let table = CyclicOperatorTable::new(&b);
        for n in 1..=6 {
            for c in table.check_identities(n).map_err(|e| e.to_string())? {
                ensure(c.holds, || format!("{} fails at weight {n} for degrees {degs:?}", c.name))?;
                checked += 1;
            }
            let words = enumerate_words(&b, n, None);
            ensure(words.iter().map(|w| w.0.clone()).eq(common::words(degs.len(), n)), || "word order differs".into())?;
            let s = table.weight_matrix(n, TableOp::S).map_err(|e| e.to_string())?;
            for (c, w) in words.iter().enumerate() {
                ensure(column_elem(&s, &words, c) == shuffle_oracle(&degs, &w.0), || {
                    format!("s differs from the shuffle oracle on {:?} (degrees {degs:?})", w.0)
                })?;
            }
            if n <= oracle_max {
                for (content, block) in content_blocks(degs.len(), n) {
                    let m = block_matrix(&block, |w| shuffle_oracle(&degs, w));
                    ensure(annihilated_by(&m, 1..=n as u32), || {
                        format!("Π(s - 2^i) ≠ 0 on content {content:?} (degrees {degs:?})")
                    })?;
                }
            }
        }
    }
    Ok(format!("{checked} identity checks, s matches the shuffle oracle, minimal polynomial verified"))
}

/// The image of `e(1)` is the free graded Lie algebra.
fn criterion_2() -> Outcome {
    let mut report = Vec::new();
    for degs in [vec![0i64, 0], vec![0, 0, 0], vec![1, 1], vec![0, 1], vec![1, 2]] {
        let b = alphabet(&degs);
        let table = CyclicOperatorTable::new(&b);
        let max_n = if degs.len() == 3 { 5 } else { 6 };
        for n in 1..=max_n {
            let words = enumerate_words(&b, n, None);
            let e1 = table.weight_matrix(n, TableOp::E(1)).map_err(|e| e.to_string())?;
            let mut image: BTreeMap<Vec<u16>, Vec<Elem>> = BTreeMap::new();
            for (c, w) in words.iter().enumerate() {
                let col = column_elem(&e1, &words, c);
                if !col.is_empty() {
                    image.entry(content_of(&w.0)).or_default().push(col);
                }
            }
            let mut lie: BTreeMap<Vec<u16>, Vec<Elem>> = BTreeMap::new();
            for x in lie_monomials(&degs, n) {
                let key = content_of(x.keys().next().unwrap());
                lie.entry(key).or_default().push(x);
            }
            let mut total = 0;
            for content in image.keys().chain(lie.keys()).collect::<std::collections::BTreeSet<_>>() {
                let (a, l) = (image.get(content).cloned().unwrap_or_default(), lie.get(content).cloned().unwrap_or_default());
                ensure(same_span(&a, &l), || format!("e(1) image ≠ Lie span on content {content:?} (degrees {degs:?})"))?;
                total += elem_rank(&l);
            }
            if degs.iter().all(|&d| d == 0) {
                ensure(total == witt(degs.len(), n), || format!("rank {total} ≠ Witt({}, {n})", degs.len()))?;
            }
        }
        report.push(format!("{degs:?}≤{max_n}"));
    }
    Ok(format!("Lie spans agree for {}", report.join(", ")))
}

/// The non-strict C∞ fixture and the differential identities.
fn criterion_3() -> Outcome {
    let found = first_square_zero_nonstrict().ok_or("oracle search found no square-zero member")?;
    ensure(found == NONSTRICT_COEFFS, || format!("oracle found {found:?}, fixture uses {NONSTRICT_COEFFS:?}"))?;
    let s = nonstrict_cinf();
    ensure(s.basis() == &nonstrict_alphabet(), || "fixture alphabet".into())?;
    let (degs, values) = nonstrict_values(found[0], found[1], found[2], found[3]);
    for n in 1..=3 {
        for w in enumerate_words(s.basis(), n, None) {
            ensure(elem_of(&s.apply_word(&w, None)) == odd_derivation(&degs, &values, &w.0), || {
                format!("engine derivation differs from the oracle on {:?}", w.0)
            })?;
        }
    }
    ensure(validate_square_zero(&s, 8).pass(), || "m² ≠ 0 on the non-strict fixture".into())?;
    ensure(s.order_components(3).iter().any(|c| !c.is_zero()), || "fixture has no order-three part".into())?;
    ensure(check_cinfty(&s).map_err(|e| e.to_string())?.pass(), || "fixture is not C∞".into())?;
    for (name, s, cap) in [("dual", dual_numbers(), 6), ("cubic", truncated_cubic(), 5), ("nonstrict", nonstrict_cinf(), 5)] {
        for c in differential_identities(&s, cap, true).map_err(|e| e.to_string())? {
            ensure(c.holds, || format!("{name}: {} fails at weight {}", c.name, c.weight))?;
        }
    }
    let control = differential_identities(&noncommutative_strict(), 4, true).map_err(|e| e.to_string())?;
    let failing: Vec<usize> = control.iter().filter(|c| c.name == "s b' = b' s" && !c.holds).map(|c| c.weight).collect();
    ensure(failing.first() == Some(&2), || format!("control: s b' = b' s fails at {failing:?}, expected from weight 2"))?;
    Ok(format!("coefficients {found:?}; identities hold on three fixtures; control fails at weights {failing:?}"))
}

/// Hodge decompositions are direct sums matching the undecomposed theories.
fn criterion_4() -> Outcome {
    let fixtures: [(&str, InftyStructure, usize); 3] =
        [("dual", dual_numbers(), 7), ("cubic", truncated_cubic(), 6), ("nonstrict", nonstrict_cinf(), 6)];
    let (mut rows, mut compared) = (0, 0);
    for (name, s, cap) in &fixtures {
        let w = Window::new(*cap, 0, 5);
        for flavour in [HochschildFlavour::Bar, HochschildFlavour::Dual, HochschildFlavour::Adjoint] {
            let t = decompose_hochschild(s, w, flavour).map_err(|e| e.to_string())?;
            ensure(t.block_diagonal && t.spans_ambient && t.mismatches().is_empty(), || {
                format!("{name} {flavour:?}: block {} spans {} mismatches {:?}", t.block_diagonal, t.spans_ambient, t.mismatches())
            })?;
            rows += t.rows.len();
        }
        for model in [CyclicModel::Coinvariant, CyclicModel::Tsygan] {
            let t = decompose_cyclic(s, w, model).map_err(|e| e.to_string())?;
            ensure(t.block_diagonal && t.spans_ambient && t.mismatches().is_empty(), || {
                format!("{name} {model:?}: block {} spans {} mismatches {:?}", t.block_diagonal, t.spans_ambient, t.mismatches())
            })?;
            rows += t.rows.len();
        }
        let dual = decompose_hochschild(s, w, HochschildFlavour::Dual).map_err(|e| e.to_string())?;
        let harrison = harrison_window(s, w, Coefficients::Dual).map_err(|e| e.to_string())?;
        let cyc = decompose_cyclic(s, w, CyclicModel::Coinvariant).map_err(|e| e.to_string())?;
        let cyc_harrison = cyclic_harrison_window(s, w).map_err(|e| e.to_string())?;
        for n in 1..=5 {
            if harrison.is_exact(n) && dual.rows.iter().any(|r| r.degree == n && r.exact) {
                let h = harrison.cohomology(n).map_err(|e| e.to_string())?;
                ensure(dual.dim(n, 1) == h, || format!("{name}: HH_(1)^{n} = {} ≠ Harr^{n} = {h}", dual.dim(n, 1)))?;
                compared += 1;
            }
            if cyc_harrison.total.is_exact(n) && cyc.rows.iter().any(|r| r.degree == n && r.exact) {
                let h = cyc_harrison.total.cohomology(n).map_err(|e| e.to_string())?;
                ensure(cyc.dim(n, 1) == h, || format!("{name}: HC_(1)^{n} = {} ≠ cyclic Harr^{n} = {h}", cyc.dim(n, 1)))?;
                compared += 1;
            }
        }
    }
    ensure(compared > 0, || "no degree was complete for the Harrison comparison".into())?;
    Ok(format!("{rows} Hodge rows over degrees 0..5, summands add up, j = 1 equals Harrison at {compared} degrees"))
}

/// Hochschild cohomology of ℚ[x]/(x²) against the classical complex.
fn criterion_5() -> Outcome {
    let classical = classical_hh_dims(5);
    let hh = hochschild_window(&dual_numbers(), Window::new(7, 0, 5), Coefficients::Dual).map_err(|e| e.to_string())?;
    let engine = exact_dims(&hh, 0, 5)?;
    ensure(engine == classical, || format!("engine {engine:?} vs classical {classical:?}"))?;
    Ok(format!("HH^0..5 = {engine:?}"))
}

/// Unit-related comparisons: acyclic bar, contracting homotopy, cyclic
/// models, normalised Hochschild.
fn criterion_6() -> Outcome {
    for (name, s) in [("dual", dual_numbers()), ("cubic", truncated_cubic()), ("field", ground_field())] {
        let bar = bar_window(&s, Window::new(6, 0, 4)).map_err(|e| e.to_string())?;
        let dims = exact_dims(&bar, 0, 3)?;
        ensure(dims.iter().all(|&d| d == 0), || format!("{name}: bar cohomology {dims:?}"))?;
        let h = check_contracting_homotopy(&s, 5, 0, 4).map_err(|e| e.to_string())?;
        ensure(h.pass() && h.checked > 0, || format!("{name}: homotopy fails on {:?}", h.failures))?;
        let cap = if name == "cubic" { 5 } else { 6 };
        let rows = compare_cyclic_models(&s, Window::new(6, 0, 4)).map_err(|e| e.to_string())?;
        ensure(rows.len() == 5, || format!("{name}: {} model rows", rows.len()))?;
        for row in rows {
            ensure(row.exact && row.agrees(), || format!("{name}: cyclic models disagree {row:?}"))?;
        }
        let w = Window::new(cap, 0, 3);
        let full = exact_dims(&hochschild_window(&s, w, Coefficients::Dual).map_err(|e| e.to_string())?, 0, 3)?;
        let norm = exact_dims(&normalised_hochschild_window(&s, w).map_err(|e| e.to_string())?, 0, 3)?;
        ensure(full == norm, || format!("{name}: normalised {norm:?} vs full {full:?}"))?;
    }
    Ok("bar acyclic, homotopy holds, cyclic models agree, normalisation is a quasi-isomorphism".into())
}

/// Long exact sequences and the Harrison comparison on ℚ[x]/(x³).
fn criterion_7() -> Outcome {
    let s = dual_numbers();
    let les = periodicity_les(&s, Window::new(7, 0, 4), None).map_err(|e| e.to_string())?;
    ensure(les.pass(), || format!("periodicity sequence: {:?}", les.nodes.iter().find(|n| !(n.complete && n.exact()))))?;
    for kind in [LesKind::Periodicity, LesKind::Harrison, LesKind::Normalised] {
        let reports = verify_decomposed_les(&s, Window::new(6, 0, 3), kind).map_err(|e| e.to_string())?;
        let bad = failing_nodes(&reports);
        ensure(bad.is_empty(), || format!("{kind:?}: {bad:?}"))?;
    }
    let rows = harrison_comparison(&truncated_cubic(), Window::new(7, 1, 5)).map_err(|e| e.to_string())?;
    ensure(rows.len() == 5 && rows.iter().all(|r| r.exact && r.order == Some(r.degree)), || format!("{rows:?}"))?;
    ensure(rows[0].injective(), || format!("not injective at order 1: {:?}", rows[0]))?;
    ensure(rows[1].surjective(), || format!("not surjective at order 2: {:?}", rows[1]))?;
    for r in &rows[2..] {
        ensure(r.injective() && r.surjective(), || format!("not bijective: {r:?}"))?;
    }
    Ok(format!("{} periodicity nodes exact; comparison ranks {:?}", les.nodes.len(), rows.iter().map(|r| r.rank).collect::<Vec<_>>()))
}

/// Cyclic Harrison cohomology of the ground field.
fn criterion_8() -> Outcome {
    let w = cyclic_harrison_window(&ground_field(), Window::new(8, 0, 6)).map_err(|e| e.to_string())?;
    let dims = exact_dims(&w.total, 0, 6)?;
    ensure(dims == [0, 0, 1, 0, 0, 0, 0], || format!("dims {dims:?}"))?;
    let by_order = cohomology_by_order(&w.total, 2, 0).ok_or("degree 2 is not weight-graded")?;
    let nonzero: Vec<(i64, usize)> = by_order.into_iter().filter(|&(_, d)| d > 0).collect();
    ensure(nonzero == [(3, 1)], || format!("weight split at degree 2: {nonzero:?}"))?;
    Ok("one class, in weight 3 and degree 2".into())
}

fn random_field(calc: &FormCalculus, g: Geometry, order: usize, shift: i64, rng: &mut ChaCha8Rng) -> VectorField {
    let b = calc.basis();
    let values = (0..b.len())
        .map(|l| {
            let mut v = WordComb::zero();
            for w in enumerate_words(b, order + 1, Some(b.degree(l as Letter) + shift)) {
                v.add_term(w, q(rng.gen_range(-2i64..=2)));
            }
            v
        })
        .collect();
    calc.project_field(g, &VectorField { degree: shift, values }).unwrap()
}

/// Cartan calculus, Poincaré lemma, ζ and the comparison maps on forms.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut suites = 0;
    for degs in [vec![0i64, 0], vec![0, 1], vec![1, 2]] {
        let b = alphabet(&degs);
        let calc = FormCalculus::new(b.clone());
        for g in [Geometry::Ass, Geometry::Com, Geometry::Lie] {
            for _ in 0..2 {
                let (xo, go) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
                let xi = random_field(&calc, g, xo, if xo == 0 { 0 } else { degs[0] * xo as i64 }, &mut rng);
                let gamma = random_field(&calc, g, go, degs[degs.len() - 1] * go as i64, &mut rng);
                let phi_field = random_field(&calc, g, 1, 0, &mut rng);
                let phi = Substitution::unipotent(&b, phi_field.values).map_err(|e| e.to_string())?;
                for c in calc.cartan_suite(g, &xi, &gamma, &phi, 3).map_err(|e| e.to_string())? {
                    ensure(c.pass(), || format!("{degs:?} {g:?} orders ({xo},{go}): {c:?}"))?;
                }
                suites += 1;
            }
            let slices = calc.poincare(g, 6).map_err(|e| e.to_string())?;
            ensure(slices.len() == 7 && slices.iter().all(|p| p.pass()), || {
                format!("{degs:?} {g:?}: Poincaré fails {:?}", slices.iter().find(|p| !p.pass()))
            })?;
            for z in calc.zeta_slices(g, 4).map_err(|e| e.to_string())? {
                ensure(z.pass(), || format!("{degs:?}: ζ slice fails {z:?}"))?;
            }
        }
        for c in calc.comparison_checks(4).map_err(|e| e.to_string())? {
            ensure(c.pass(), || format!("{degs:?}: {c:?}"))?;
        }
        for n in 1..=4 {
            ensure(calc.l_injective(n).map_err(|e| e.to_string())?, || format!("{degs:?}: l not injective at weight {n}"))?;
        }
    }
    let u = alphabet(&[0, 0]);
    let omega = |a: [[i64; 2]; 2]| -> WordComb {
        let mut out = WordComb::zero();
        for (i, row) in a.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                out.add_term(Word(vec![i as Letter, j as Letter]), q(c));
            }
        }
        out
    };
    let sympl = bilinear_form(&u, &omega([[0, 1], [0, 0]])).map_err(|e| e.to_string())?;
    let expected = vec![vec![q(0), q(-1)], vec![q(1), q(0)]];
    ensure(sympl.matrix.to_dense() == expected, || format!("matrix {:?}", sympl.matrix.to_dense()))?;
    ensure(sympl.is_nondegenerate() && sympl.skew, || "symplectic form is degenerate".into())?;
    let mut a = [[0, 1], [0, 0]];
    a[0] = [0, 0];
    let zeroed = bilinear_form(&u, &omega(a)).map_err(|e| e.to_string())?;
    ensure(!zeroed.is_nondegenerate(), || "zero form is nondegenerate".into())?;
    let u3 = alphabet(&[0, 0, 0]);
    let partial = bilinear_form(&u3, &WordComb::basis(Word(vec![0, 1]))).map_err(|e| e.to_string())?;
    ensure(!partial.is_nondegenerate() && partial.matrix.rank() == 2, || "form supported on two letters".into())?;
    Ok(format!("{suites} Cartan suites, Poincaré to weight 6, ζ and comparisons to order 4, bilinear forms"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("cyclic operator identities and spectrum of s", criterion_1),
        ("e(1) image is the free graded Lie algebra", criterion_2),
        ("non-strict C∞ fixture and differential identities", criterion_3),
        ("Hodge decompositions", criterion_4),
        ("Hochschild cohomology of dual numbers", criterion_5),
        ("unital comparisons", criterion_6),
        ("long exact sequences and Harrison comparison", criterion_7),
        ("cyclic Harrison cohomology of the ground field", criterion_8),
        ("noncommutative forms", criterion_9),
    ];
    let mut failures = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {title}: {detail} ({:.1?})", k + 1, start.elapsed()),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {}: {title}: {detail} ({:.1?})", k + 1, start.elapsed());
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
