//! Bar, Hochschild, Harrison and Chevalley-Eilenberg complexes at a finite
//! window of cohomological degrees and weights, the contracting homotopy of
//! a unital bar complex, and the normalisation retraction.
//!
//! Grading: a word of W-degree `d` sits in cohomological degree `d - 1`. A
//! derivation cochain sending generator `g` to the word `w` has degree
//! `|w| - |g| + 1` and is stored as the key `g w` (value letters after the
//! generator). Every differential here is weight non-decreasing, so dropping
//! words above the weight cap yields a quotient complex.

use crate::cyclicshuffle::{
    act_n, act_one_minus_z, norm_terms, rotate_left, shuffle_s, CyclicError, CyclicOperatorTable, IdentityCheck,
    ShuffleVariant,
};
use crate::exactlin::{cohomology_dim, LinAlgError, Rational, RationalMatrix, SparseVec, SpanEchelon};
use crate::gradedspace::{
    derivation_on_word, parity_sign, sign_q, sym_words_of_degree, symmetrize_word, words_of_degree, GradedBasis, Letter,
    Word, WordComb,
};
use crate::inftystruct::{by_weight, check_cinfty, check_unital, InftyError, InftyKind, InftyStructure};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Coefficient module of a Hochschild-type theory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficients {
    /// Dual coefficients `V*`, realised as 1-forms in Θ-coordinates.
    Dual,
    /// Coefficients in `V`, realised as derivation cochains.
    Adjoint,
    /// Trivial coefficients (Chevalley-Eilenberg only).
    Trivial,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("the structure is not C∞: {0} generator values fail primitivity")]
    NotCinfty(usize),
    #[error("expected a structure of kind {expected}, got {found:?}")]
    WrongKind { expected: &'static str, found: InftyKind },
    #[error("the structure is not unital: {0}")]
    NotUnital(String),
    #[error("the structure is not minimal")]
    NotMinimal,
    #[error("the structure is not connective; bicomplex totalisation needs all letters in positive degree")]
    NotConnective,
    #[error("{theory} does not support {coefficients:?} coefficients")]
    UnsupportedCoefficients { theory: &'static str, coefficients: Coefficients },
    #[error("{theory}: the image of degree {degree} leaves the spanned subspace")]
    NotSubcomplex { theory: String, degree: i64 },
    #[error("degree window {lo}..={hi} is empty")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error(transparent)]
    Infty(#[from] InftyError),
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Cohomological degrees `lo..=hi` with every weight up to `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub cap: usize,
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(cap: usize, lo: i64, hi: i64) -> Self {
        Window { cap, lo, hi }
    }

    pub(crate) fn validate(&self) -> Result<(), ComplexError> {
        if self.lo > self.hi {
            return Err(ComplexError::EmptyWindow { lo: self.lo, hi: self.hi });
        }
        Ok(())
    }
}

/// A basis element of a window: its column (0 outside bicomplexes), the
/// Hodge summand it was drawn from, if any, and its value in the ambient word
/// coordinates of that column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub column: usize,
    pub summand: Option<usize>,
    pub value: WordComb,
}

impl Cochain {
    pub fn plain(value: WordComb) -> Self {
        Cochain { column: 0, summand: None, value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyRow {
    pub degree: i64,
    pub dim: usize,
    pub exact: bool,
}

/// A cochain complex restricted to a window: bases for degrees
/// `lo-1..=hi+1` and the differentials `d_n : C^n -> C^{n+1}` for
/// `n` in `lo-1..=hi`.
#[derive(Clone, Debug)]
pub struct ComplexWindow {
    pub theory: String,
    pub window: Window,
    cells: BTreeMap<i64, Vec<Cochain>>,
    diffs: BTreeMap<i64, RationalMatrix>,
    exact: BTreeMap<i64, bool>,
}

impl ComplexWindow {
    /// Assembles a window from prebuilt parts. Missing cells are empty.
    pub fn from_parts(
        theory: String,
        window: Window,
        cells: BTreeMap<i64, Vec<Cochain>>,
        diffs: BTreeMap<i64, RationalMatrix>,
        exact: BTreeMap<i64, bool>,
    ) -> Self {
        ComplexWindow { theory, window, cells, diffs, exact }
    }

    pub fn cell(&self, n: i64) -> &[Cochain] {
        self.cells.get(&n).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn dim(&self, n: i64) -> usize {
        self.cell(n).len()
    }

    /// `d_n : C^n -> C^{n+1}`; stored for `n` in `lo-1..=hi`.
    pub fn differential(&self, n: i64) -> Option<&RationalMatrix> {
        self.diffs.get(&n)
    }

    pub fn is_exact(&self, n: i64) -> bool {
        self.exact.get(&n).copied().unwrap_or(false)
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.window.lo..=self.window.hi
    }

    /// Cohomology dimension at `n`, after checking `d_n d_{n-1} = 0`.
    pub fn cohomology(&self, n: i64) -> Result<usize, LinAlgError> {
        let zero_in;
        let zero_out;
        let d_in = match self.diffs.get(&(n - 1)) {
            Some(d) => d,
            None => {
                zero_in = RationalMatrix::zero(self.dim(n), 0);
                &zero_in
            }
        };
        let d_out = match self.diffs.get(&n) {
            Some(d) => d,
            None => {
                zero_out = RationalMatrix::zero(0, self.dim(n));
                &zero_out
            }
        };
        cohomology_dim(d_in, d_out)
    }

    pub fn cohomology_rows(&self) -> Result<Vec<CohomologyRow>, LinAlgError> {
        self.degrees().map(|n| Ok(CohomologyRow { degree: n, dim: self.cohomology(n)?, exact: self.is_exact(n) })).collect()
    }

    /// Whether every stored pair of consecutive differentials composes to zero.
    pub fn square_zero(&self) -> bool {
        self.diffs.iter().all(|(n, d)| match self.diffs.get(&(n + 1)) {
            Some(next) => next.mul(d).map(|c| c.is_zero()).unwrap_or(false),
            None => true,
        })
    }

    /// Coordinates of a cochain of degree `n` (column 0) in the window basis.
    pub fn coordinates(&self, n: i64, x: &WordComb) -> Option<SparseVec> {
        let vals: Vec<WordComb> = self.cell(n).iter().map(|c| c.value.clone()).collect();
        Coordinates::new(&vals).and_then(|c| c.of(x))
    }
}

/// Coordinates with respect to a spanning list of independent vectors.
#[derive(Clone, Debug)]
pub(crate) enum Coordinates {
    Unit(HashMap<Word, usize>),
    Echelon { support: HashMap<Word, usize>, echelon: SpanEchelon },
}

impl Coordinates {
    pub(crate) fn new(vectors: &[WordComb]) -> Option<Coordinates> {
        let unit = vectors.iter().all(|v| v.len() == 1 && v.iter().next().map_or(false, |(_, c)| *c == Rational::from_integer(1.into())));
        if unit {
            let map = vectors.iter().enumerate().map(|(i, v)| (v.keys().next().unwrap().clone(), i)).collect();
            return Some(Coordinates::Unit(map));
        }
        let mut support = HashMap::new();
        for v in vectors {
            for w in v.keys() {
                let k = support.len();
                support.entry(w.clone()).or_insert(k);
            }
        }
        let mut echelon = SpanEchelon::new(support.len());
        for v in vectors {
            if !echelon.insert(&to_sparse(&support, v)?) {
                return None;
            }
        }
        Some(Coordinates::Echelon { support, echelon })
    }

    pub(crate) fn of(&self, x: &WordComb) -> Option<SparseVec> {
        match self {
            Coordinates::Unit(map) => {
                let mut pairs = Vec::with_capacity(x.len());
                for (w, c) in x.iter() {
                    pairs.push((*map.get(w)?, c.clone()));
                }
                Some(SparseVec::from_pairs(pairs))
            }
            Coordinates::Echelon { support, echelon } => echelon.coordinates(&to_sparse(support, x)?),
        }
    }
}

fn to_sparse(support: &HashMap<Word, usize>, x: &WordComb) -> Option<SparseVec> {
    let mut pairs = Vec::with_capacity(x.len());
    for (w, c) in x.iter() {
        pairs.push((*support.get(w)?, c.clone()));
    }
    Some(SparseVec::from_pairs(pairs))
}

/// Builds a window from spanning vectors per degree and a differential on
/// ambient combinations. The spans must be independent and the differential
/// must map each span into the next one.
pub fn assemble<S, D, E>(theory: &str, window: Window, spans: S, d: D, exact: E) -> Result<ComplexWindow, ComplexError>
where
    S: Fn(i64) -> Result<Vec<WordComb>, ComplexError>,
    D: Fn(&WordComb) -> WordComb + Sync,
    E: Fn(i64) -> bool,
{
    assemble_labelled(theory, window, |n| Ok(spans(n)?.into_iter().map(Cochain::plain).collect()), d, exact)
}

/// As [`assemble`], with basis cochains carrying their own labels.
pub fn assemble_labelled<S, D, E>(theory: &str, window: Window, spans: S, d: D, exact: E) -> Result<ComplexWindow, ComplexError>
where
    S: Fn(i64) -> Result<Vec<Cochain>, ComplexError>,
    D: Fn(&WordComb) -> WordComb + Sync,
    E: Fn(i64) -> bool,
{
    window.validate()?;
    let mut cells: BTreeMap<i64, Vec<Cochain>> = BTreeMap::new();
    for n in window.lo - 1..=window.hi + 1 {
        cells.insert(n, spans(n)?);
    }
    let mut diffs = BTreeMap::new();
    for n in window.lo - 1..=window.hi {
        let target: Vec<WordComb> = cells[&(n + 1)].iter().map(|c| c.value.clone()).collect();
        let coords = Coordinates::new(&target).ok_or_else(|| ComplexError::NotSubcomplex { theory: theory.to_string(), degree: n + 1 })?;
        let cols: Option<Vec<SparseVec>> = cells[&n].par_iter().map(|c| coords.of(&d(&c.value))).collect();
        let cols = cols.ok_or_else(|| ComplexError::NotSubcomplex { theory: theory.to_string(), degree: n })?;
        diffs.insert(n, RationalMatrix::from_columns(target.len(), cols));
    }
    let exact = (window.lo..=window.hi).map(|n| (n, exact(n))).collect();
    Ok(ComplexWindow { theory: theory.to_string(), window, cells, diffs, exact })
}

// ---------------------------------------------------------------------------
// Weight completeness.

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// For word models: degrees `n` and `n+1` only contain words of weight at
/// most `cap` when every letter has positive degree `≥ δ` and
/// `cap ≥ ⌊(n+2)/δ⌋`.
pub fn word_model_exact(basis: &GradedBasis, cap: usize, n: i64) -> bool {
    let delta = basis.min_w_degree();
    delta >= 1 && floor_div(n + 2, delta) <= cap as i64
}

/// For derivation cochains: values of degree `n - 1 + |g|` and `n + |g|`.
pub fn derivation_model_exact(basis: &GradedBasis, cap: usize, n: i64) -> bool {
    let delta = basis.min_w_degree();
    if delta < 1 {
        return false;
    }
    let max_g = (0..basis.len()).map(|g| basis.degree(g as Letter)).max().unwrap_or(0);
    floor_div(n + max_g, delta) <= cap as i64
}

// ---------------------------------------------------------------------------
// Spans.

fn unit_span(words: Vec<Word>) -> Vec<WordComb> {
    words.into_iter().map(WordComb::basis).collect()
}

/// Words of W-degree `n + 1` and weight `1..=cap`.
pub fn word_cell(basis: &GradedBasis, cap: usize, n: i64) -> Vec<Word> {
    words_of_degree(basis, n + 1, cap)
}

/// Value words of a given degree and weight `0..=cap`, tensor or symmetric.
fn value_words(basis: &GradedBasis, degree: i64, cap: usize, symmetric: bool) -> Vec<Word> {
    let mut out = Vec::new();
    if degree == 0 {
        out.push(Word::empty());
    }
    if symmetric {
        out.extend(sym_words_of_degree(basis, degree, 1, cap));
    } else {
        out.extend(words_of_degree(basis, degree, cap));
    }
    out
}

fn keyed(g: Letter, w: &Word) -> Word {
    let mut letters = Vec::with_capacity(w.weight() + 1);
    letters.push(g);
    letters.extend_from_slice(&w.0);
    Word(letters)
}

/// Derivation cochain keys of degree `n`, generator by generator.
pub fn derivation_cell(basis: &GradedBasis, cap: usize, n: i64, symmetric: bool) -> Vec<Word> {
    let mut out = Vec::new();
    for g in 0..basis.len() as Letter {
        for w in value_words(basis, n - 1 + basis.degree(g), cap, symmetric) {
            out.push(keyed(g, &w));
        }
    }
    out
}

/// Symmetric 1-form keys `x ⊗ y` of degree `n`: first letter, then a
/// sorted tail.
fn sym_form_cell(basis: &GradedBasis, cap: usize, n: i64) -> Vec<Word> {
    let mut out = Vec::new();
    for x in 0..basis.len() as Letter {
        for y in value_words(basis, n + 1 - basis.degree(x), cap.saturating_sub(1), true) {
            out.push(keyed(x, &y));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Differentials.

pub(crate) fn truncate(x: WordComb, cap: usize) -> WordComb {
    let mut x = x;
    x.retain(|w| w.weight() <= cap);
    x
}

pub(crate) fn require_tensor(s: &InftyStructure) -> Result<(), ComplexError> {
    if s.kind().is_symmetric() {
        return Err(ComplexError::WrongKind { expected: "A∞ or C∞", found: s.kind() });
    }
    Ok(())
}

fn require_symmetric(s: &InftyStructure) -> Result<(), ComplexError> {
    if !s.kind().is_symmetric() {
        return Err(ComplexError::WrongKind { expected: "L∞", found: s.kind() });
    }
    Ok(())
}

pub(crate) fn require_cinfty(s: &InftyStructure) -> Result<(), ComplexError> {
    let report = check_cinfty(s)?;
    if !report.pass() {
        return Err(ComplexError::NotCinfty(report.failures.len()));
    }
    Ok(())
}

/// The unit letter, after checking the unital normal form.
pub fn require_unital(s: &InftyStructure) -> Result<Letter, ComplexError> {
    let unit = s.unit().ok_or_else(|| ComplexError::NotUnital("no unit declared".into()))?;
    let report = check_unital(s)?;
    if !report.pass() {
        return Err(ComplexError::NotUnital(format!("{} monomials break the unital form", report.offending.len())));
    }
    Ok(unit)
}

/// The bar differential `b'`: `m` acting as a derivation on words.
pub fn bar_differential(s: &InftyStructure, x: &WordComb, cap: usize) -> WordComb {
    s.apply(x, Some(cap))
}

/// `Θ⁻¹(d(v)·y)` in the tensor picture: the rotations of `v y` that bring
/// each letter of `v` to the front.
fn theta_inv_dv_y(basis: &GradedBasis, v: &Word, y: &[Letter], c: &Rational, out: &mut WordComb) {
    let mut vy = v.0.clone();
    vy.extend_from_slice(y);
    let vy = Word(vy);
    for k in 0..v.weight() {
        let (r, sg) = rotate_left(basis, &vy, k);
        out.add_term(r, c * sign_q(sg));
    }
}

/// The Hochschild differential with dual coefficients on one Θ-word
/// `x y`: `b = Θ⁻¹ L_m Θ`, where
/// `L_m(dx·y) = -d(m(x))·y + (-1)^{|x|+1} dx·m(y)`.
pub fn hochschild_b_word(s: &InftyStructure, w: &Word, cap: usize) -> WordComb {
    let basis = s.basis();
    let mut out = WordComb::zero();
    let Some((&x, y)) = w.0.split_first() else {
        return out;
    };
    for (v, c) in s.component(x).iter() {
        if v.weight() + y.len() <= cap {
            theta_inv_dv_y(basis, v, y, &-c.clone(), &mut out);
        }
    }
    if !y.is_empty() && cap >= 1 {
        let my = s.apply_word(&Word::from_slice(y), Some(cap - 1));
        let sign = -sign_q(parity_sign(basis.degree(x)));
        for (u, c) in my.iter() {
            out.add_term(keyed(x, u), c * &sign);
        }
    }
    out
}

pub fn hochschild_b(s: &InftyStructure, x: &WordComb, cap: usize) -> WordComb {
    x.map_linear(|w| hochschild_b_word(s, w, cap))
}

/// The Chevalley-Eilenberg differential with dual coefficients on a key
/// `x ⊗ y` (sorted tail), the commutative analogue of [`hochschild_b_word`].
pub fn ce_dual_word(s: &InftyStructure, w: &Word, cap: usize) -> WordComb {
    let basis = s.basis();
    let mut out = WordComb::zero();
    let Some((&x, y)) = w.0.split_first() else {
        return out;
    };
    for (v, c) in s.component(x).iter() {
        if v.weight() + y.len() > cap {
            continue;
        }
        let mut prefix_deg = 0i64;
        for i in 0..v.weight() {
            let vi = v.0[i];
            let sg = parity_sign(prefix_deg * basis.degree(vi));
            prefix_deg += basis.degree(vi);
            let mut rest: Vec<Letter> = v.0[..i].to_vec();
            rest.extend_from_slice(&v.0[i + 1..]);
            rest.extend_from_slice(y);
            if let Some((sorted, sg2)) = symmetrize_word(basis, &Word(rest)) {
                out.add_term(keyed(vi, &sorted), -c * sign_q(sg * sg2));
            }
        }
    }
    if !y.is_empty() && cap >= 1 {
        let my = s.apply_word(&Word::from_slice(y), Some(cap - 1));
        let sign = -sign_q(parity_sign(basis.degree(x)));
        for (u, c) in my.iter() {
            out.add_term(keyed(x, u), c * &sign);
        }
    }
    out
}

/// Splits a key `g w` into generator and value.
fn split_key(w: &Word) -> (Letter, Word) {
    (w.0[0], Word::from_slice(&w.0[1..]))
}

/// `d(ξ) = [m, ξ] = m∘ξ - (-1)^{|ξ|} ξ∘m` on the cochain `w ∂_g`.
pub fn adjoint_d_key(s: &InftyStructure, key: &Word, cap: usize) -> WordComb {
    let basis = s.basis();
    let symmetric = s.kind().is_symmetric();
    let (g, w) = split_key(key);
    let xi_deg = basis.word_degree(&w) - basis.degree(g);
    let mut out = WordComb::zero();
    let mw = s.apply_word(&w, Some(cap));
    for (u, c) in mw.iter() {
        out.add_term(keyed(g, u), c.clone());
    }
    let mut values = vec![WordComb::zero(); basis.len()];
    values[g as usize] = WordComb::basis(w);
    let sign = -sign_q(parity_sign(xi_deg));
    for h in 0..basis.len() as Letter {
        for (v, c) in s.component(h).iter() {
            if !v.0.contains(&g) {
                continue;
            }
            let r = derivation_on_word(basis, &values, xi_deg, v, Some(cap));
            for (u, cu) in r.iter() {
                let coeff = c * cu * &sign;
                if symmetric {
                    if let Some((sorted, sg)) = symmetrize_word(basis, u) {
                        out.add_term(keyed(h, &sorted), coeff * sign_q(sg));
                    }
                } else {
                    out.add_term(keyed(h, u), coeff);
                }
            }
        }
    }
    out
}

pub fn adjoint_d(s: &InftyStructure, x: &WordComb, cap: usize) -> WordComb {
    x.map_linear(|k| adjoint_d_key(s, k, cap))
}

// ---------------------------------------------------------------------------
// Windows.

/// The bar complex `(Π W^{⊗i}, b')`.
pub fn bar_window(s: &InftyStructure, window: Window) -> Result<ComplexWindow, ComplexError> {
    require_tensor(s)?;
    let basis = s.basis().clone();
    let cap = window.cap;
    assemble(
        "bar",
        window,
        |n| Ok(unit_span(word_cell(&basis, cap, n))),
        |x| bar_differential(s, x, cap),
        |n| word_model_exact(&basis, cap, n),
    )
}

/// Hochschild complex with dual coefficients (Θ-words with `b`) or with
/// coefficients in `V` (derivation cochains with `[m, -]`).
pub fn hochschild_window(s: &InftyStructure, window: Window, coefficients: Coefficients) -> Result<ComplexWindow, ComplexError> {
    require_tensor(s)?;
    let basis = s.basis().clone();
    let cap = window.cap;
    match coefficients {
        Coefficients::Dual => assemble(
            "hochschild-dual",
            window,
            |n| Ok(unit_span(word_cell(&basis, cap, n))),
            |x| hochschild_b(s, x, cap),
            |n| word_model_exact(&basis, cap, n),
        ),
        Coefficients::Adjoint => assemble(
            "hochschild-adjoint",
            window,
            |n| Ok(unit_span(derivation_cell(&basis, cap, n, false))),
            |x| adjoint_d(s, x, cap),
            |n| derivation_model_exact(&basis, cap, n),
        ),
        Coefficients::Trivial => Err(ComplexError::UnsupportedCoefficients { theory: "hochschild", coefficients }),
    }
}

/// Image of `e(j)` (or `ẽ(j)`) on a list of words forming whole content blocks.
pub fn summand_span(table: &CyclicOperatorTable, words: &[Word], j: usize, variant: ShuffleVariant) -> Result<Vec<WordComb>, ComplexError> {
    Ok(table.summand_basis(words, j, variant)?)
}

/// Image of `e(j)` on the values of derivation cochain keys of degree `n`.
pub fn derivation_summand_span(
    table: &CyclicOperatorTable,
    cap: usize,
    n: i64,
    j: usize,
) -> Result<Vec<WordComb>, ComplexError> {
    let basis = table.basis();
    let mut out = Vec::new();
    for g in 0..basis.len() as Letter {
        let words = value_words(basis, n - 1 + basis.degree(g), cap, false);
        for v in table.summand_basis(&words, j, ShuffleVariant::Plain)? {
            out.push(v.map_linear(|w| WordComb::basis(keyed(g, w))));
        }
    }
    Ok(out)
}

/// Harrison complex of a C∞ structure: the `ẽ(1)` summand of the dual
/// Hochschild complex, or derivation cochains with Lie values.
pub fn harrison_window(s: &InftyStructure, window: Window, coefficients: Coefficients) -> Result<ComplexWindow, ComplexError> {
    require_tensor(s)?;
    require_cinfty(s)?;
    let basis = s.basis().clone();
    let cap = window.cap;
    let table = CyclicOperatorTable::new(&basis);
    match coefficients {
        Coefficients::Dual => assemble(
            "harrison-dual",
            window,
            |n| summand_span(&table, &word_cell(&basis, cap, n), 1, ShuffleVariant::Tilde),
            |x| hochschild_b(s, x, cap),
            |n| word_model_exact(&basis, cap, n),
        ),
        Coefficients::Adjoint => assemble(
            "harrison-adjoint",
            window,
            |n| derivation_summand_span(&table, cap, n, 1),
            |x| adjoint_d(s, x, cap),
            |n| derivation_model_exact(&basis, cap, n),
        ),
        Coefficients::Trivial => Err(ComplexError::UnsupportedCoefficients { theory: "harrison", coefficients }),
    }
}

/// Chevalley-Eilenberg complexes of an L∞ structure on symmetric words.
pub fn ce_window(s: &InftyStructure, window: Window, coefficients: Coefficients) -> Result<ComplexWindow, ComplexError> {
    require_symmetric(s)?;
    let basis = s.basis().clone();
    let cap = window.cap;
    match coefficients {
        Coefficients::Dual => assemble(
            "ce-dual",
            window,
            |n| Ok(unit_span(sym_form_cell(&basis, cap, n))),
            |x| x.map_linear(|w| ce_dual_word(s, w, cap)),
            |n| word_model_exact(&basis, cap, n),
        ),
        Coefficients::Adjoint => assemble(
            "ce-adjoint",
            window,
            |n| Ok(unit_span(derivation_cell(&basis, cap, n, true))),
            |x| adjoint_d(s, x, cap),
            |n| derivation_model_exact(&basis, cap, n),
        ),
        Coefficients::Trivial => assemble(
            "ce-trivial",
            window,
            |n| Ok(unit_span(sym_words_of_degree(&basis, n + 1, 1, cap))),
            |x| s.apply(x, Some(cap)),
            |n| word_model_exact(&basis, cap, n),
        ),
    }
}

/// Θ-words whose tail avoids the unit letter.
pub fn is_normalised_word(unit: Letter, w: &Word) -> bool {
    !w.0.iter().skip(1).any(|&l| l == unit)
}

/// The subcomplex of normalised 1-forms inside the dual Hochschild complex.
pub fn normalised_hochschild_window(s: &InftyStructure, window: Window) -> Result<ComplexWindow, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    let basis = s.basis().clone();
    let cap = window.cap;
    assemble(
        "hochschild-dual-normalised",
        window,
        |n| Ok(unit_span(word_cell(&basis, cap, n).into_iter().filter(|w| is_normalised_word(unit, w)).collect())),
        |x| hochschild_b(s, x, cap),
        |n| word_model_exact(&basis, cap, n),
    )
}

// ---------------------------------------------------------------------------
// Unital homotopies.

/// The contracting homotopy `h(τx) = x`, `h(t_i x) = 0` of a unital bar
/// complex. The empty word is dropped since the bar complex starts in weight one.
pub fn contracting_h(s: &InftyStructure, x: &WordComb) -> Result<WordComb, ComplexError> {
    let unit = s.unit().ok_or_else(|| ComplexError::NotUnital("no unit declared".into()))?;
    Ok(h_with_unit(unit, x))
}

pub(crate) fn h_with_unit(unit: Letter, x: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        if w.weight() >= 2 && w.0[0] == unit {
            out.add_term(Word::from_slice(&w.0[1..]), c.clone());
        }
    }
    out
}

/// `b'h + hb' - id` on one word, exact up to weight `cap`.
pub fn homotopy_defect(s: &InftyStructure, unit: Letter, w: &Word, cap: usize) -> WordComb {
    let x = WordComb::basis(w.clone());
    let bh = bar_differential(s, &h_with_unit(unit, &x), cap);
    let hb = h_with_unit(unit, &bar_differential(s, &x, cap + 1));
    truncate(bh.plus(&hb).minus(&x), cap)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyReport {
    pub cap: usize,
    pub checked: usize,
    pub failures: Vec<Word>,
}

impl HomotopyReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `b'h + hb' = id` on every word of weight at most `cap` and W-degree
/// in `min_degree..=max_degree`.
pub fn check_contracting_homotopy(s: &InftyStructure, cap: usize, lo: i64, hi: i64) -> Result<HomotopyReport, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    let words: Vec<Word> = (lo..=hi).flat_map(|n| word_cell(s.basis(), cap, n)).collect();
    let failures: Vec<Word> =
        words.par_iter().filter(|w| !homotopy_defect(s, unit, w, cap).is_zero()).cloned().collect();
    Ok(HomotopyReport { cap, checked: words.len(), failures })
}

/// `s_i` of the normalisation retraction on a Θ-word `x_0 x_1 … x_n`: removes
/// `x_{i+1}` when it is the unit letter.
fn s_i_word(basis: &GradedBasis, unit: Letter, i: usize, w: &Word) -> Option<(Word, Rational)> {
    if w.weight() < i + 2 || w.0[i + 1] != unit {
        return None;
    }
    let x0 = basis.degree(w.0[0]);
    let pre: i64 = w.0[1..=i].iter().map(|&l| basis.degree(l)).sum();
    let mut letters = w.0.clone();
    letters.remove(i + 1);
    Some((Word(letters), sign_q(parity_sign(x0 + 1 + pre))))
}

fn s_i(basis: &GradedBasis, unit: Letter, i: usize, x: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        if let Some((v, sg)) = s_i_word(basis, unit, i, w) {
            out.add_term(v, c * sg);
        }
    }
    out
}

/// The normalisation retraction `H = … ∘ h_1 ∘ h_0` with
/// `h_i = id + b s_i + s_i b`, applied to a 1-form in Θ-coordinates and
/// truncated at weight `cap`.
pub fn normalize_h(s: &InftyStructure, alpha: &WordComb, cap: usize) -> Result<WordComb, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    let basis = s.basis();
    let mut x = truncate(alpha.clone(), cap);
    for i in 0..cap.saturating_sub(1) {
        let bs = hochschild_b(s, &s_i(basis, unit, i, &x), cap);
        let sb = s_i(basis, unit, i, &hochschild_b(s, &x, cap + 1));
        x = truncate(x.plus(&bs).plus(&sb), cap);
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Operator identities between differentials and the cyclic and shuffle operators.

fn per_weight<F: Fn(&WordComb) -> Result<WordComb, CyclicError>>(x: &WordComb, f: F) -> Result<WordComb, CyclicError> {
    let mut out = WordComb::zero();
    for (_, part) in by_weight(x) {
        out.add_assign(&f(&part)?);
    }
    Ok(out)
}

fn lowest_weight(x: &WordComb) -> Option<usize> {
    x.keys().map(|w| w.weight()).min()
}

/// Records an identity `lhs(w) = rhs(w)` for every word up to `cap`; the
/// failing weight is the lowest output weight of a discrepancy.
fn identity_over_words<F>(name: &'static str, words: &[Word], cap: usize, f: F) -> Result<Vec<IdentityCheck>, CyclicError>
where
    F: Fn(&Word) -> Result<WordComb, CyclicError> + Sync,
{
    let defects: Result<Vec<Option<usize>>, CyclicError> =
        words.par_iter().map(|w| f(w).map(|d| lowest_weight(&truncate(d, cap)))).collect();
    let mut failing = vec![false; cap + 1];
    for d in defects?.into_iter().flatten() {
        failing[d] = true;
    }
    Ok((1..=cap).map(|weight| IdentityCheck { name, weight, holds: !failing[weight] }).collect())
}

/// The identities `bN = -Nb'` and `b'(1-z) = -(1-z)b`, and for C∞
/// structures `s b' = b' s`, `s̃ b = b s̃` and `s̄ [m,-] = [m,-] s̄`. Each is
/// reported per output weight up to `cap`.
pub fn differential_identities(s: &InftyStructure, cap: usize, shuffle: bool) -> Result<Vec<IdentityCheck>, ComplexError> {
    require_tensor(s)?;
    let basis = s.basis();
    let words: Vec<Word> = (1..=cap).flat_map(|n| crate::gradedspace::enumerate_words(basis, n, None)).collect();
    let mut out = Vec::new();
    out.extend(identity_over_words("bN = -Nb'", &words, cap, |w| {
        let x = WordComb::basis(w.clone());
        let lhs = hochschild_b(s, &act_n(basis, &x)?, cap);
        let rhs = per_weight(&bar_differential(s, &x, cap), |p| act_n(basis, p))?;
        Ok(lhs.plus(&rhs))
    })?);
    out.extend(identity_over_words("b'(1-z) = -(1-z)b", &words, cap, |w| {
        let x = WordComb::basis(w.clone());
        let lhs = bar_differential(s, &act_one_minus_z(basis, &x)?, cap);
        let rhs = per_weight(&hochschild_b(s, &x, cap), |p| act_one_minus_z(basis, p))?;
        Ok(lhs.plus(&rhs))
    })?);
    if shuffle {
        out.extend(shuffle_identities(s, &words, cap)?);
    }
    Ok(out)
}

fn shuffle_identities(s: &InftyStructure, words: &[Word], cap: usize) -> Result<Vec<IdentityCheck>, CyclicError> {
    let basis = s.basis();
    let sp = |x: &WordComb| per_weight(x, |p| shuffle_s(basis, p, ShuffleVariant::Plain));
    let st = |x: &WordComb| per_weight(x, |p| shuffle_s(basis, p, ShuffleVariant::Tilde));
    let mut out = Vec::new();
    out.extend(identity_over_words("s b' = b' s", words, cap, |w| {
        let x = WordComb::basis(w.clone());
        Ok(sp(&bar_differential(s, &x, cap))?.minus(&bar_differential(s, &sp(&x)?, cap)))
    })?);
    out.extend(identity_over_words("s~ b = b s~", words, cap, |w| {
        let x = WordComb::basis(w.clone());
        Ok(st(&hochschild_b(s, &x, cap))?.minus(&hochschild_b(s, &st(&x)?, cap)))
    })?);
    // Derivation cochains: keys g w with the value weight as the weight.
    let mut keys = Vec::new();
    for g in 0..basis.len() as Letter {
        keys.push(keyed(g, &Word::empty()));
        for w in words {
            keys.push(keyed(g, w));
        }
    }
    let s_bar = |x: &WordComb| -> Result<WordComb, CyclicError> {
        let mut out = WordComb::zero();
        for (k, c) in x.iter() {
            let (g, v) = split_key(k);
            let sv = if v.weight() == 0 { WordComb::basis(v) } else { shuffle_s(basis, &WordComb::basis(v), ShuffleVariant::Plain)? };
            for (u, cu) in sv.iter() {
                out.add_term(keyed(g, u), c * cu);
            }
        }
        Ok(out)
    };
    let defects: Result<Vec<Option<usize>>, CyclicError> = keys
        .par_iter()
        .map(|k| {
            let x = WordComb::basis(k.clone());
            let d = s_bar(&adjoint_d(s, &x, cap))?.minus(&adjoint_d(s, &s_bar(&x)?, cap));
            Ok(d.keys().map(|k| k.weight() - 1).min())
        })
        .collect();
    let mut failing = vec![false; cap + 1];
    for d in defects?.into_iter().flatten() {
        failing[d] = true;
    }
    out.extend((1..=cap).map(|weight| IdentityCheck { name: "s-bar d = d s-bar", weight, holds: !failing[weight] }));
    Ok(out)
}

/// `N` on a combination of mixed weights.
pub fn norm_mixed(basis: &GradedBasis, x: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        for (v, sg) in norm_terms(basis, w) {
            out.add_term(v, c * sign_q(sg));
        }
    }
    out
}

/// `1 - z` on a combination of mixed weights.
pub fn one_minus_z_mixed(basis: &GradedBasis, x: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        if w.weight() == 0 {
            continue;
        }
        out.add_term(w.clone(), c.clone());
        let (v, sg) = crate::cyclicshuffle::z_word(basis, w);
        out.add_term(v, -c * sign_q(sg));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::q;
    use crate::fixtures::*;
    use crate::inftystruct::convert;

    fn all_hold(checks: &[IdentityCheck]) -> bool {
        checks.iter().all(|c| c.holds)
    }

    #[test]
    fn windows_square_to_zero() {
        for s in [dual_numbers(), truncated_cubic(), nonstrict_cinf(), noncommutative_strict(), linear_differential()] {
            let w = Window::new(5, 0, 3);
            assert!(bar_window(&s, w).unwrap().square_zero());
            assert!(hochschild_window(&s, w, Coefficients::Dual).unwrap().square_zero());
            assert!(hochschild_window(&s, w, Coefficients::Adjoint).unwrap().square_zero());
        }
    }

    #[test]
    fn zero_structure_has_zero_differentials() {
        let s = InftyStructure::zero(InftyKind::Cinf, nonstrict_alphabet());
        let w = Window::new(3, 0, 3);
        for cx in [bar_window(&s, w).unwrap(), hochschild_window(&s, w, Coefficients::Dual).unwrap()] {
            for n in -1..=3 {
                assert!(cx.differential(n).unwrap().is_zero());
            }
        }
        let h = harrison_window(&s, w, Coefficients::Dual).unwrap();
        assert!((-1..=3).all(|n| h.differential(n).unwrap().is_zero()));
    }

    #[test]
    fn weight_one_dual_slice_is_transposed_linear_part() {
        // m(p) = q in W; b on weight one: b(p) = -q.
        let s = linear_differential();
        let p = s.basis().index_of("p").unwrap() as Letter;
        let qq = s.basis().index_of("q").unwrap() as Letter;
        let r = hochschild_b_word(&s, &Word::letter(p), 1);
        assert_eq!(r, WordComb::single(Word::letter(qq), q(-1)));
    }

    #[test]
    fn adjoint_cocycle_m_itself() {
        // d(m) = [m, m] = 2m² = 0 for a square-zero structure of odd degree.
        for s in [dual_numbers(), nonstrict_cinf()] {
            let mut m = WordComb::zero();
            for g in 0..s.basis().len() as Letter {
                for (w, c) in s.component(g).iter() {
                    m.add_term(keyed(g, w), c.clone());
                }
            }
            assert!(adjoint_d(&s, &m, 6).is_zero());
        }
    }

    #[test]
    fn operator_identities_hold_for_cinfty_fixtures() {
        for (s, cap) in [(dual_numbers(), 5), (truncated_cubic(), 4), (nonstrict_cinf(), 4)] {
            let checks = differential_identities(&s, cap, true).unwrap();
            assert!(all_hold(&checks), "{:?}", checks.iter().filter(|c| !c.holds).collect::<Vec<_>>());
        }
    }

    #[test]
    fn noncommutative_control_breaks_shuffle_commutation() {
        let s = noncommutative_strict();
        let checks = differential_identities(&s, 3, true).unwrap();
        let failing: Vec<_> = checks.iter().filter(|c| !c.holds && c.name == "s b' = b' s").map(|c| c.weight).collect();
        assert_eq!(failing.first(), Some(&2));
        assert!(checks.iter().filter(|c| c.name.starts_with('b')).all(|c| c.holds));
    }

    #[test]
    fn unital_bar_is_acyclic() {
        for s in [dual_numbers(), truncated_cubic(), ground_field()] {
            let cx = bar_window(&s, Window::new(6, 0, 4)).unwrap();
            for n in cx.degrees() {
                if cx.is_exact(n) {
                    assert_eq!(cx.cohomology(n).unwrap(), 0, "degree {n}");
                }
            }
            assert!(cx.is_exact(3));
        }
    }

    #[test]
    fn contracting_homotopy_examples() {
        let s = dual_numbers();
        let (u, x) = (0 as Letter, 1 as Letter);
        let h = contracting_h(&s, &WordComb::basis(Word(vec![u, x, x]))).unwrap();
        assert_eq!(h, WordComb::basis(Word(vec![x, x])));
        assert!(contracting_h(&s, &WordComb::basis(Word(vec![x, u]))).unwrap().is_zero());
        assert!(check_contracting_homotopy(&s, 4, 0, 4).unwrap().pass());
        assert!(check_contracting_homotopy(&truncated_cubic(), 4, 0, 3).unwrap().pass());
        assert!(matches!(contracting_h(&nonstrict_cinf(), &WordComb::zero()), Err(ComplexError::NotUnital(_))));
    }

    #[test]
    fn harrison_weight_two_slice() {
        // Weight two, degree one: the Lie part of the tail has dimension
        // r² - r(r+1)/2 inside the r² words when letters are odd.
        let s = dual_numbers();
        let cx = harrison_window(&s, Window::new(4, 1, 1), Coefficients::Dual).unwrap();
        // Tails of weight one are already Lie: every weight-two word survives.
        assert_eq!(cx.dim(1), 4);
        let table = CyclicOperatorTable::new(s.basis());
        let words = crate::gradedspace::enumerate_words(s.basis(), 2, None);
        assert_eq!(summand_span(&table, &words, 1, ShuffleVariant::Plain).unwrap().len(), 4 - 1);
        assert!(matches!(
            harrison_window(&noncommutative_strict(), Window::new(3, 0, 1), Coefficients::Dual),
            Err(ComplexError::NotCinfty(_))
        ));
    }

    #[test]
    fn harrison_adjoint_and_restrictions() {
        let s = truncated_cubic();
        let w = Window::new(4, 0, 2);
        let adj = harrison_window(&s, w, Coefficients::Adjoint).unwrap();
        assert!(adj.square_zero());
        let dual = harrison_window(&s, w, Coefficients::Dual).unwrap();
        assert!(dual.square_zero());
    }

    #[test]
    fn ce_windows() {
        let l = convert(&noncommutative_strict(), InftyKind::Linf).unwrap();
        let w = Window::new(4, 0, 3);
        for c in [Coefficients::Dual, Coefficients::Adjoint, Coefficients::Trivial] {
            assert!(ce_window(&l, w, c).unwrap().square_zero());
        }
        assert!(matches!(ce_window(&dual_numbers(), w, Coefficients::Trivial), Err(ComplexError::WrongKind { .. })));
        // One odd letter: symmetric slices have at most one word per weight.
        let odd = InftyStructure::zero(InftyKind::Linf, GradedBasis::uniform(1, 1));
        let cx = ce_window(&odd, Window::new(5, 0, 4), Coefficients::Trivial).unwrap();
        assert!((0..=4).all(|n| cx.dim(n) <= 1));
        // Abelian: zero differential.
        let ab = convert(&dual_numbers(), InftyKind::Linf).unwrap();
        let cx = ce_window(&ab, w, Coefficients::Trivial).unwrap();
        assert!((-1..=3).all(|n| cx.differential(n).unwrap().is_zero()));
    }

    #[test]
    fn normalisation_fixes_normalised_forms() {
        let s = truncated_cubic();
        let (x, x2) = (1 as Letter, 2 as Letter);
        let w = WordComb::basis(Word(vec![x, x2, x]));
        assert_eq!(normalize_h(&s, &w, 4).unwrap(), w);
        assert!(normalize_h(&s, &WordComb::zero(), 4).unwrap().is_zero());
    }

    #[test]
    fn normalisation_of_a_cocycle_is_cohomologous() {
        let s = dual_numbers();
        let unit = 0 as Letter;
        let cap = 5;
        let cx = hochschild_window(&s, Window::new(cap, 0, 3), Coefficients::Dual).unwrap();
        for n in 0..=2 {
            let d = cx.differential(n).unwrap();
            let (_, ker) = crate::exactlin::rank_and_kernel(d);
            for k in &ker.basis {
                let alpha: WordComb = k
                    .iter()
                    .map(|(i, c)| (cx.cell(n)[*i].value.keys().next().unwrap().clone(), c.clone()))
                    .collect::<WordComb>();
                let out = normalize_h(&s, &alpha, cap).unwrap();
                assert!(out.keys().all(|w| is_normalised_word(unit, w)), "{out:?}");
                assert!(hochschild_b(&s, &out, cap).is_zero());
                let diff = cx.coordinates(n, &alpha.minus(&out)).unwrap();
                let prev = cx.differential(n - 1).unwrap();
                let mut ech = SpanEchelon::new(prev.rows());
                for col in prev.columns() {
                    ech.insert(col);
                }
                assert!(ech.contains(&diff));
            }
        }
    }

    #[test]
    fn normalised_subcomplex_is_quasi_isomorphic() {
        for s in [dual_numbers(), truncated_cubic()] {
            let w = Window::new(5, 0, 3);
            let full = hochschild_window(&s, w, Coefficients::Dual).unwrap();
            let norm = normalised_hochschild_window(&s, w).unwrap();
            for n in w.lo..=w.hi {
                if full.is_exact(n) {
                    assert_eq!(full.cohomology(n).unwrap(), norm.cohomology(n).unwrap());
                }
            }
        }
    }
}
