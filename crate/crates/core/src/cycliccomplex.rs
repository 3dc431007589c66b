//! Cyclic cohomology in three models: cyclic coinvariants (necklaces), the
//! Tsygan bicomplex and the Connes bicomplex, together with the comparison
//! maps between them, the periodicity sequence `S`, `I`, `B` and the
//! comparison with normalised necklaces.
//!
//! A bicomplex column `i` at total degree `n` holds words of W-degree
//! `n - slope·i + 1`. Truncation keeps the words with
//! `weight + shift(i) ≤ cap`, where `shift` is chosen so that every component
//! of the total differential is filtration non-decreasing; the truncated
//! total complex is then a quotient complex.

use crate::cyclicshuffle::{enumerate_necklaces, necklace_project, CyclicOperatorTable, ShuffleVariant};
use crate::exactlin::{rank_and_kernel, span_rank, Rational, RationalMatrix, SparseVec};
use crate::gradedspace::{words_of_degree, GradedBasis, Generator, Letter, Side, Word, WordComb};
use crate::homcomplex::{
    bar_differential, h_with_unit, hochschild_b, is_normalised_word, norm_mixed, one_minus_z_mixed, require_cinfty,
    require_tensor, require_unital, truncate, Cochain, ComplexError, ComplexWindow, Coordinates, Window,
};
use crate::inftystruct::InftyStructure;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How far each column is shifted in the truncation filtration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filtration {
    /// Plain weight; single-column complexes.
    Weight,
    /// `weight + column`, for the Connes bicomplex.
    WeightPlusColumn,
    /// `weight + ⌈column/2⌉`, for the Tsygan bicomplex.
    WeightPlusHalfColumn,
}

impl Filtration {
    pub fn shift(self, column: usize) -> usize {
        match self {
            Filtration::Weight => 0,
            Filtration::WeightPlusColumn => column,
            Filtration::WeightPlusHalfColumn => column.div_ceil(2),
        }
    }
}

/// Position of one column inside a total-degree cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub column: usize,
    pub w_degree: i64,
    pub start: usize,
    pub len: usize,
}

/// A truncated total complex with its column decomposition.
#[derive(Clone, Debug)]
pub struct BicomplexWindow {
    pub total: ComplexWindow,
    pub filtration: Filtration,
    columns: usize,
    blocks: BTreeMap<i64, Vec<Block>>,
    coords: BTreeMap<(i64, usize), Coordinates>,
}

impl BicomplexWindow {
    pub fn theory(&self) -> &str {
        &self.total.theory
    }

    pub fn window(&self) -> Window {
        self.total.window
    }

    /// Largest weight kept in a column, `None` when the column is cut away.
    pub fn column_cap(&self, column: usize) -> Option<usize> {
        if column >= self.columns {
            return None;
        }
        self.window().cap.checked_sub(self.filtration.shift(column))
    }

    pub fn blocks(&self, n: i64) -> &[Block] {
        self.blocks.get(&n).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn block(&self, n: i64, column: usize) -> Option<&Block> {
        self.blocks(n).iter().find(|b| b.column == column)
    }

    /// Dimensions per `(total degree, column)`.
    pub fn column_dims(&self) -> Vec<(i64, usize, usize)> {
        self.blocks.iter().flat_map(|(n, bs)| bs.iter().map(move |b| (*n, b.column, b.len))).collect()
    }

    /// Total coordinates of a cochain given column by column. Parts landing
    /// in a truncated column, or above a column's weight cap, are dropped.
    pub fn coordinates(&self, n: i64, parts: &[(usize, WordComb)]) -> Option<SparseVec> {
        let mut by_column: BTreeMap<usize, WordComb> = BTreeMap::new();
        for (col, x) in parts {
            let Some(cap) = self.column_cap(*col) else { continue };
            let x = truncate(x.clone(), cap);
            if !x.is_zero() {
                by_column.entry(*col).or_default().add_assign(&x);
            }
        }
        let mut pairs = Vec::new();
        for (col, x) in by_column {
            if x.is_zero() {
                continue;
            }
            let block = self.block(n, col)?;
            let local = self.coords.get(&(n, col))?.of(&x)?;
            pairs.extend(local.iter().map(|(i, c)| (block.start + i, c.clone())));
        }
        Some(SparseVec::from_pairs(pairs))
    }
}

/// Basis vectors of one column, each with an optional Hodge label.
type Labelled = Vec<(Option<usize>, WordComb)>;
type SpanFn<'a> = Box<dyn Fn(usize, i64, usize) -> Result<Labelled, ComplexError> + Sync + 'a>;
type ColumnMap<'a> = Box<dyn Fn(usize, &WordComb, usize) -> WordComb + Sync + 'a>;

/// Description of a column-graded complex: spans per `(column, W-degree,
/// weight cap)`, a vertical map inside each column and a horizontal map to
/// the next column, both given the weight cap of their target column.
struct ColumnModel<'a> {
    theory: String,
    window: Window,
    basis: &'a GradedBasis,
    filtration: Filtration,
    columns: usize,
    slope: i64,
    span: SpanFn<'a>,
    vertical: ColumnMap<'a>,
    horizontal: ColumnMap<'a>,
}

impl<'a> ColumnModel<'a> {
    fn single(theory: String, window: Window, basis: &'a GradedBasis, span: SpanFn<'a>, vertical: ColumnMap<'a>) -> Self {
        ColumnModel {
            theory,
            window,
            basis,
            filtration: Filtration::Weight,
            columns: 1,
            slope: 0,
            span,
            vertical,
            horizontal: Box::new(|_, _, _| WordComb::zero()),
        }
    }

    fn column_cap(&self, column: usize) -> Option<usize> {
        if column >= self.columns {
            return None;
        }
        self.window.cap.checked_sub(self.filtration.shift(column))
    }

    fn w_degree(&self, column: usize, n: i64) -> i64 {
        n - self.slope * column as i64 + 1
    }

    /// Columns present at total degree `n` with their W-degree and cap.
    fn live_columns(&self, n: i64) -> Vec<(usize, i64, usize)> {
        let mut out = Vec::new();
        for i in 0..self.columns {
            let d = self.w_degree(i, n);
            if self.columns > 1 && d < 1 {
                break;
            }
            match self.column_cap(i) {
                Some(cap) => out.push((i, d, cap)),
                None => break,
            }
        }
        out
    }

    fn exact_at(&self, n: i64) -> bool {
        let delta = self.basis.min_w_degree();
        if delta < 1 {
            return false;
        }
        for m in [n, n + 1] {
            for i in 0..self.columns {
                let d = self.w_degree(i, m);
                if d < delta {
                    if self.columns > 1 {
                        break;
                    }
                    continue;
                }
                if !matches!(self.column_cap(i), Some(c) if (d / delta) as usize <= c) {
                    return false;
                }
            }
        }
        true
    }

    fn build(self) -> Result<BicomplexWindow, ComplexError> {
        self.window.validate()?;
        if self.columns > 1 && self.basis.min_w_degree() < 1 {
            return Err(ComplexError::NotConnective);
        }
        let lo = self.window.lo;
        let hi = self.window.hi;
        let mut vecs: BTreeMap<i64, Vec<Cochain>> = BTreeMap::new();
        let mut blocks: BTreeMap<i64, Vec<Block>> = BTreeMap::new();
        let mut coords = BTreeMap::new();
        for n in lo - 1..=hi + 1 {
            let mut cell = Vec::new();
            let mut bs = Vec::new();
            for (i, d, cap) in self.live_columns(n) {
                let span = (self.span)(i, d, cap)?;
                let values: Vec<WordComb> = span.iter().map(|(_, v)| v.clone()).collect();
                let c = Coordinates::new(&values)
                    .ok_or_else(|| ComplexError::NotSubcomplex { theory: self.theory.clone(), degree: n })?;
                coords.insert((n, i), c);
                bs.push(Block { column: i, w_degree: d, start: cell.len(), len: span.len() });
                cell.extend(span.into_iter().map(|(summand, value)| Cochain { column: i, summand, value }));
            }
            vecs.insert(n, cell);
            blocks.insert(n, bs);
        }
        let mut shell = BicomplexWindow {
            total: ComplexWindow::from_parts(self.theory.clone(), self.window, BTreeMap::new(), BTreeMap::new(), BTreeMap::new()),
            filtration: self.filtration,
            columns: self.columns,
            blocks,
            coords,
        };
        let mut diffs = BTreeMap::new();
        for n in lo - 1..=hi {
            let cols: Option<Vec<SparseVec>> = vecs[&n]
                .par_iter()
                .map(|c| {
                    let (i, v) = (&c.column, &c.value);
                    let mut parts = Vec::with_capacity(2);
                    if let Some(cap) = self.column_cap(*i) {
                        parts.push((*i, (self.vertical)(*i, v, cap)));
                    }
                    if let Some(cap) = self.column_cap(i + 1) {
                        parts.push((i + 1, (self.horizontal)(*i, v, cap)));
                    }
                    shell.coordinates(n + 1, &parts)
                })
                .collect();
            let cols = cols.ok_or_else(|| ComplexError::NotSubcomplex { theory: self.theory.clone(), degree: n })?;
            diffs.insert(n, RationalMatrix::from_columns(vecs[&(n + 1)].len(), cols));
        }
        let cells = vecs;
        let exact = (lo..=hi).map(|n| (n, self.exact_at(n))).collect();
        shell.total = ComplexWindow::from_parts(self.theory, self.window, cells, diffs, exact);
        Ok(shell)
    }
}

fn unit_span(words: Vec<Word>) -> Labelled {
    words.into_iter().map(|w| (None, WordComb::basis(w))).collect()
}

fn unlabelled(vectors: Vec<WordComb>) -> Labelled {
    vectors.into_iter().map(|v| (None, v)).collect()
}

/// Keeps a maximal independent prefix-greedy subfamily.
fn independent(vectors: Vec<WordComb>) -> Vec<WordComb> {
    let mut support = std::collections::HashMap::new();
    for v in &vectors {
        for w in v.keys() {
            let k = support.len();
            support.entry(w.clone()).or_insert(k);
        }
    }
    let mut ech = crate::exactlin::SpanEchelon::new(support.len());
    vectors
        .into_iter()
        .filter(|v| {
            let sv = SparseVec::from_pairs(v.iter().map(|(w, c)| (support[w], c.clone())));
            !v.is_zero() && ech.insert(&sv)
        })
        .collect()
}

fn necklaces_of_degree(basis: &GradedBasis, d: i64, cap: usize) -> Vec<Word> {
    (1..=cap).flat_map(|k| enumerate_necklaces(basis, k, Some(d))).collect()
}

/// Necklace projections of the `e(k)` image on words of W-degree `d`.
fn necklace_summand(table: &CyclicOperatorTable, words: &[Word], k: usize) -> Result<Vec<WordComb>, ComplexError> {
    let basis = table.basis();
    let images = table.summand_basis(words, k, ShuffleVariant::Plain)?;
    Ok(independent(images.iter().map(|v| necklace_project(basis, v)).collect()))
}

fn cyclic_d(s: &InftyStructure, x: &WordComb, cap: usize) -> WordComb {
    necklace_project(s.basis(), &bar_differential(s, x, cap))
}

/// `B' = N h (1 - z)`, of degree `-1`.
pub fn connes_b_prime(basis: &GradedBasis, unit: Letter, x: &WordComb) -> WordComb {
    norm_mixed(basis, &h_with_unit(unit, &one_minus_z_mixed(basis, x)))
}

/// `B̄' = N h`, which agrees with `B'` on normalised words.
pub fn connes_b_bar(basis: &GradedBasis, unit: Letter, x: &WordComb) -> WordComb {
    norm_mixed(basis, &h_with_unit(unit, x))
}

// ---------------------------------------------------------------------------
// Single-column models.

/// Cyclic coinvariants `(W^{⊗•}/(1-z), b')` on canonical necklaces.
pub fn cyclic_window(s: &InftyStructure, window: Window) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    let basis = s.basis();
    ColumnModel::single(
        "cyclic".into(),
        window,
        basis,
        Box::new(move |_, d, cap| Ok(unit_span(necklaces_of_degree(basis, d, cap)))),
        Box::new(move |_, x, cap| cyclic_d(s, x, cap)),
    )
    .build()
}

/// The `e(k)` summand of the cyclic coinvariants of a C∞ structure.
pub fn cyclic_summand_window(s: &InftyStructure, window: Window, k: usize) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    require_cinfty(s)?;
    let basis = s.basis();
    let table = CyclicOperatorTable::new(basis);
    ColumnModel::single(
        format!("cyclic-e{k}"),
        window,
        basis,
        Box::new(move |_, d, cap| Ok(unlabelled(necklace_summand(&table, &words_of_degree(basis, d, cap), k)?))),
        Box::new(move |_, x, cap| cyclic_d(s, x, cap)),
    )
    .build()
}

/// The coinvariants of a C∞ structure written in the basis of all `e(k)`
/// summands, each vector labelled by its Hodge index `k - 1`.
pub fn cyclic_hodge_window(s: &InftyStructure, window: Window) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    require_cinfty(s)?;
    let basis = s.basis();
    let table = CyclicOperatorTable::new(basis);
    ColumnModel::single(
        "cyclic-hodge".into(),
        window,
        basis,
        Box::new(move |_, d, cap| {
            let words = words_of_degree(basis, d, cap);
            let mut out = Vec::new();
            for k in 1..=cap {
                out.extend(necklace_summand(&table, &words, k)?.into_iter().map(|v| (Some(k - 1), v)));
            }
            Ok(out)
        }),
        Box::new(move |_, x, cap| cyclic_d(s, x, cap)),
    )
    .build()
}

/// Cyclic Harrison cohomology: the `e(2)` summand of the coinvariants.
pub fn cyclic_harrison_window(s: &InftyStructure, window: Window) -> Result<BicomplexWindow, ComplexError> {
    let mut w = cyclic_summand_window(s, window, 2)?;
    w.total.theory = "cyclic-harrison".into();
    Ok(w)
}

/// The dual Hochschild complex as a one-column window, optionally restricted
/// to the `ẽ(j)` summand.
pub fn hochschild_column(s: &InftyStructure, window: Window, summand: Option<usize>) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    if summand.is_some() {
        require_cinfty(s)?;
    }
    let basis = s.basis();
    let table = CyclicOperatorTable::new(basis);
    let theory = match summand {
        Some(j) => format!("hochschild-dual-e~{j}"),
        None => "hochschild-dual".into(),
    };
    ColumnModel::single(
        theory,
        window,
        basis,
        Box::new(move |_, d, cap| {
            let words = words_of_degree(basis, d, cap);
            match summand {
                Some(j) => Ok(unlabelled(table.summand_basis(&words, j, ShuffleVariant::Tilde)?)),
                None => Ok(unit_span(words)),
            }
        }),
        Box::new(move |_, x, cap| hochschild_b(s, x, cap)),
    )
    .build()
}

fn tau_free(unit: Letter, w: &Word) -> bool {
    !w.0.contains(&unit)
}

/// Necklaces avoiding the unit letter, optionally in the `e(k)` summand.
pub fn normalised_cyclic_window(s: &InftyStructure, window: Window, summand: Option<usize>) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    if summand.is_some() {
        require_cinfty(s)?;
    }
    let basis = s.basis();
    let table = CyclicOperatorTable::new(basis);
    let theory = match summand {
        Some(k) => format!("cyclic-normalised-e{k}"),
        None => "cyclic-normalised".into(),
    };
    ColumnModel::single(
        theory,
        window,
        basis,
        Box::new(move |_, d, cap| {
            let words: Vec<Word> = words_of_degree(basis, d, cap).into_iter().filter(|w| tau_free(unit, w)).collect();
            match summand {
                Some(k) => Ok(unlabelled(necklace_summand(&table, &words, k)?)),
                None => Ok(unit_span(words.into_iter().filter(|w| crate::cyclicshuffle::is_necklace_rep(basis, w)).collect())),
            }
        }),
        Box::new(move |_, x, cap| cyclic_d(s, x, cap)),
    )
    .build()
}

/// The ground field spanned by the unit: one letter `τ` with the `τ`-only
/// part of `m(τ)`.
pub fn unit_subalgebra(s: &InftyStructure) -> Result<InftyStructure, ComplexError> {
    let unit = require_unital(s)?;
    let basis = GradedBasis::new(
        vec![Generator { name: s.basis().name(unit as usize).to_string(), degree: s.basis().degree(unit) }],
        Side::W,
    )
    .expect("one generator");
    let comp: WordComb = s
        .component(unit)
        .iter()
        .filter(|(w, _)| w.0.iter().all(|&l| l == unit))
        .map(|(w, c)| (Word(vec![0; w.weight()]), c.clone()))
        .collect();
    Ok(InftyStructure::new(s.kind(), basis, vec![comp], Some(0))?)
}

// ---------------------------------------------------------------------------
// Bicomplexes.

/// The Tsygan bicomplex: even columns `(C, b)`, odd columns `(C, b')`,
/// horizontal maps `1 - z` and `N`.
pub fn tsygan_window(s: &InftyStructure, window: Window) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    let basis = s.basis();
    ColumnModel {
        theory: "cyclic-tsygan".into(),
        window,
        basis,
        filtration: Filtration::WeightPlusHalfColumn,
        columns: usize::MAX,
        slope: 1,
        span: Box::new(move |_, d, cap| Ok(unit_span(words_of_degree(basis, d, cap)))),
        vertical: Box::new(move |i, x, cap| tsygan_vertical(s, i, x, cap)),
        horizontal: Box::new(move |i, x, cap| truncate(tsygan_horizontal(basis, i, x), cap)),
    }
    .build()
}

fn tsygan_vertical(s: &InftyStructure, column: usize, x: &WordComb, cap: usize) -> WordComb {
    if column % 2 == 0 {
        hochschild_b(s, x, cap)
    } else {
        bar_differential(s, x, cap)
    }
}

fn tsygan_horizontal(basis: &GradedBasis, column: usize, x: &WordComb) -> WordComb {
    if column % 2 == 0 {
        one_minus_z_mixed(basis, x)
    } else {
        norm_mixed(basis, x)
    }
}

/// The Hodge strip `Γ_j` of the Tsygan bicomplex of a C∞ structure: column
/// `2k` is the `ẽ(j-k)` summand and column `2k+1` the `e(j-k)` summand, for
/// `k ≤ j`.
pub fn tsygan_strip(s: &InftyStructure, window: Window, j: usize) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    require_cinfty(s)?;
    let basis = s.basis();
    let table = CyclicOperatorTable::new(basis);
    ColumnModel {
        theory: format!("cyclic-tsygan-strip{j}"),
        window,
        basis,
        filtration: Filtration::WeightPlusHalfColumn,
        columns: strip_width(j),
        slope: 1,
        span: Box::new(move |i, d, cap| {
            let words = words_of_degree(basis, d, cap);
            let variant = if i % 2 == 0 { ShuffleVariant::Tilde } else { ShuffleVariant::Plain };
            Ok(table.summand_basis(&words, j - i / 2, variant)?.into_iter().map(|v| (Some(j), v)).collect())
        }),
        vertical: Box::new(move |i, x, cap| tsygan_vertical(s, i, x, cap)),
        horizontal: Box::new(move |i, x, cap| truncate(tsygan_horizontal(basis, i, x), cap)),
    }
    .build()
}

/// The Tsygan bicomplex of a C∞ structure in the eigenbasis of every column;
/// a vector of the `ẽ(l)` or `e(l)` summand of column `c` carries the strip
/// label `l + ⌊c/2⌋`.
pub fn tsygan_hodge_window(s: &InftyStructure, window: Window) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    require_cinfty(s)?;
    let basis = s.basis();
    let table = CyclicOperatorTable::new(basis);
    ColumnModel {
        theory: "cyclic-tsygan-hodge".into(),
        window,
        basis,
        filtration: Filtration::WeightPlusHalfColumn,
        columns: usize::MAX,
        slope: 1,
        span: Box::new(move |i, d, cap| {
            let words = words_of_degree(basis, d, cap);
            let variant = if i % 2 == 0 { ShuffleVariant::Tilde } else { ShuffleVariant::Plain };
            let mut out = Vec::new();
            for l in 0..=cap {
                out.extend(table.summand_basis(&words, l, variant)?.into_iter().map(|v| (Some(l + i / 2), v)));
            }
            Ok(out)
        }),
        vertical: Box::new(move |i, x, cap| tsygan_vertical(s, i, x, cap)),
        horizontal: Box::new(move |i, x, cap| truncate(tsygan_horizontal(basis, i, x), cap)),
    }
    .build()
}

/// Number of columns of the strip `Γ_j`: `ẽ(j), e(j), …, e(1), ẽ(0)`.
pub fn strip_width(j: usize) -> usize {
    2 * j + 1
}

/// The Connes bicomplex of a unital structure: every column is `(C, b)` and
/// the horizontal map is `B'` (or `B̄'` on normalised words).
pub fn connes_window(s: &InftyStructure, window: Window, normalised: bool) -> Result<BicomplexWindow, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    let basis = s.basis();
    ColumnModel {
        theory: if normalised { "cyclic-connes-normalised" } else { "cyclic-connes" }.into(),
        window,
        basis,
        filtration: Filtration::WeightPlusColumn,
        columns: usize::MAX,
        slope: 2,
        span: Box::new(move |_, d, cap| {
            let words = words_of_degree(basis, d, cap);
            Ok(unit_span(if normalised { words.into_iter().filter(|w| is_normalised_word(unit, w)).collect() } else { words }))
        }),
        vertical: Box::new(move |_, x, cap| hochschild_b(s, x, cap)),
        horizontal: Box::new(move |_, x, cap| {
            let y = if normalised { connes_b_bar(basis, unit, x) } else { connes_b_prime(basis, unit, x) };
            truncate(y, cap)
        }),
    }
    .build()
}

// ---------------------------------------------------------------------------
// Maps between windows.

/// Matrix of a cochain map `src^n -> tgt^m` given on basis cochains.
pub fn window_map<F>(src: &BicomplexWindow, n: i64, tgt: &BicomplexWindow, m: i64, f: F) -> Result<RationalMatrix, ComplexError>
where
    F: Fn(&Cochain) -> Vec<(usize, WordComb)> + Sync,
{
    let cols: Option<Vec<SparseVec>> = src.total.cell(n).par_iter().map(|c| tgt.coordinates(m, &f(c))).collect();
    let cols = cols.ok_or_else(|| ComplexError::NotSubcomplex { theory: format!("{} -> {}", src.theory(), tgt.theory()), degree: n })?;
    Ok(RationalMatrix::from_columns(tgt.total.dim(m), cols))
}

/// Rank of the map induced on cohomology by `f : src^n -> tgt^m`, which
/// must send cocycles to cocycles and coboundaries to coboundaries.
pub fn induced_rank(src: &ComplexWindow, n: i64, tgt: &ComplexWindow, m: i64, f: &RationalMatrix) -> usize {
    let cocycles = match src.differential(n) {
        Some(d) => rank_and_kernel(d).1.basis,
        None => (0..src.dim(n)).map(SparseVec::unit).collect(),
    };
    let boundaries: Vec<SparseVec> = tgt.differential(m - 1).map(|d| d.columns().to_vec()).unwrap_or_default();
    let mut all: Vec<SparseVec> = boundaries.clone();
    all.extend(cocycles.iter().map(|z| f.apply(z)));
    let dim = tgt.dim(m);
    span_rank(dim, &all) - span_rank(dim, &boundaries)
}

/// Sign `ε` with `d_tgt f_n = ε f_{n+1} d_src`, if any.
pub fn chain_sign(d_src: &RationalMatrix, d_tgt: &RationalMatrix, f_n: &RationalMatrix, f_next: &RationalMatrix) -> Option<i64> {
    let lhs = d_tgt.mul(f_n).ok()?;
    let rhs = f_next.mul(d_src).ok()?;
    if lhs.sub(&rhs).ok()?.is_zero() {
        Some(1)
    } else if lhs.add(&rhs).ok()?.is_zero() {
        Some(-1)
    } else {
        None
    }
}

/// Comparison from the Connes to the Tsygan bicomplex: column `i` goes to
/// columns `2i` and `2i+1` by `x ↦ (-1)^i x ⊕ (-1)^{i+1} h(1-z)x`.
pub fn connes_to_tsygan(s: &InftyStructure, connes: &BicomplexWindow, tsygan: &BicomplexWindow, n: i64) -> Result<RationalMatrix, ComplexError> {
    let unit = require_unital(s)?;
    let basis = s.basis();
    window_map(connes, n, tsygan, n, |c| {
        let sign = if c.column % 2 == 0 { Rational::from_integer(1.into()) } else { Rational::from_integer((-1).into()) };
        let hz = h_with_unit(unit, &one_minus_z_mixed(basis, &c.value));
        vec![(2 * c.column, c.value.scale(&sign)), (2 * c.column + 1, hz.scale(&-sign))]
    })
}

/// The norm map from necklaces into column 0 of the Tsygan bicomplex.
pub fn norm_to_tsygan(s: &InftyStructure, cyclic: &BicomplexWindow, tsygan: &BicomplexWindow, n: i64) -> Result<RationalMatrix, ComplexError> {
    let basis = s.basis();
    window_map(cyclic, n, tsygan, n, |c| vec![(0, norm_mixed(basis, &c.value))])
}

/// Summary row for one cyclic model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub degree: i64,
    pub coinvariants: usize,
    pub tsygan: usize,
    pub connes: Option<usize>,
    pub norm_rank: usize,
    pub comparison_rank: Option<usize>,
    pub exact: bool,
}

impl ModelComparison {
    /// Equal dimensions, and both comparison maps are isomorphisms.
    pub fn agrees(&self) -> bool {
        let d = self.coinvariants;
        self.tsygan == d
            && self.norm_rank == d
            && self.connes.map_or(true, |c| c == d)
            && self.comparison_rank.map_or(true, |r| r == d)
    }
}

/// Computes cyclic cohomology in every available model, with the ranks of
/// the comparison maps on cohomology. The Connes model is included when the
/// structure is unital.
pub fn compare_cyclic_models(s: &InftyStructure, window: Window) -> Result<Vec<ModelComparison>, ComplexError> {
    let coinv = cyclic_window(s, window)?;
    let tsy = tsygan_window(s, window)?;
    let connes = match s.unit() {
        Some(_) => Some(connes_window(s, window, false)?),
        None => None,
    };
    let mut rows = Vec::new();
    for n in window.lo..=window.hi {
        let nm = norm_to_tsygan(s, &coinv, &tsy, n)?;
        let (connes_dim, comparison_rank, connes_exact) = match &connes {
            Some(c) => {
                let f = connes_to_tsygan(s, c, &tsy, n)?;
                (Some(c.total.cohomology(n)?), Some(induced_rank(&c.total, n, &tsy.total, n, &f)), c.total.is_exact(n))
            }
            None => (None, None, true),
        };
        rows.push(ModelComparison {
            degree: n,
            coinvariants: coinv.total.cohomology(n)?,
            tsygan: tsy.total.cohomology(n)?,
            connes: connes_dim,
            norm_rank: induced_rank(&coinv.total, n, &tsy.total, n, &nm),
            comparison_rank,
            exact: coinv.total.is_exact(n) && tsy.total.is_exact(n) && connes_exact,
        });
    }
    Ok(rows)
}

/// The maps of the periodicity sequence on cochains: `S` shifts the Tsygan
/// bicomplex by two columns, `I = N` sends necklaces to Hochschild cochains
/// and `B = -h(1-z)` sends Hochschild cochains back to necklaces.
#[derive(Clone, Debug)]
pub struct PeriodicityMaps {
    pub cyclic: BicomplexWindow,
    pub hochschild: BicomplexWindow,
    pub tsygan: BicomplexWindow,
    /// `S : Tot^{n-2} -> Tot^n`, keyed by `n`.
    pub s_map: BTreeMap<i64, RationalMatrix>,
    /// `I : CC^n -> C^n`.
    pub i_map: BTreeMap<i64, RationalMatrix>,
    /// `B : C^n -> CC^{n-1}`.
    pub b_map: BTreeMap<i64, RationalMatrix>,
}

/// Chain-map signs (`d f = ε f d`) of the three maps at one degree and the
/// rank of `B ∘ I` on cohomology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicityCheck {
    pub degree: i64,
    pub s_sign: Option<i64>,
    pub i_sign: Option<i64>,
    pub b_sign: Option<i64>,
    pub b_after_i_rank: usize,
}

impl PeriodicityCheck {
    pub fn pass(&self) -> bool {
        self.s_sign.is_some() && self.i_sign.is_some() && self.b_sign.is_some() && self.b_after_i_rank == 0
    }
}

pub fn periodicity_maps(s: &InftyStructure, window: Window) -> Result<PeriodicityMaps, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    window.validate()?;
    let basis = s.basis();
    let outer = Window::new(window.cap, window.lo, window.hi + 1);
    let cyclic = cyclic_window(s, outer)?;
    let hochschild = hochschild_column(s, outer, None)?;
    let tsygan = tsygan_window(s, Window::new(window.cap, window.lo - 2, window.hi + 1))?;
    let minus_one = Rational::from_integer((-1).into());
    let (mut s_map, mut i_map, mut b_map) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for n in window.lo..=window.hi + 1 {
        s_map.insert(n, window_map(&tsygan, n - 2, &tsygan, n, |c| vec![(c.column + 2, c.value.clone())])?);
        i_map.insert(n, window_map(&cyclic, n, &hochschild, n, |c| vec![(0, norm_mixed(basis, &c.value))])?);
        b_map.insert(
            n,
            window_map(&hochschild, n, &cyclic, n - 1, |c| {
                let y = h_with_unit(unit, &one_minus_z_mixed(basis, &c.value)).scale(&minus_one);
                vec![(0, necklace_project(basis, &y))]
            })?,
        );
    }
    Ok(PeriodicityMaps { cyclic, hochschild, tsygan, s_map, i_map, b_map })
}

impl PeriodicityMaps {
    pub fn checks(&self) -> Result<Vec<PeriodicityCheck>, ComplexError> {
        let w = self.cyclic.window();
        let d = |x: &BicomplexWindow, n: i64| x.total.differential(n).cloned().unwrap_or_else(|| RationalMatrix::zero(x.total.dim(n + 1), x.total.dim(n)));
        let mut out = Vec::new();
        for n in w.lo..w.hi {
            let s_sign = chain_sign(&d(&self.tsygan, n - 2), &d(&self.tsygan, n), &self.s_map[&n], &self.s_map[&(n + 1)]);
            let i_sign = chain_sign(&d(&self.cyclic, n), &d(&self.hochschild, n), &self.i_map[&n], &self.i_map[&(n + 1)]);
            let b_sign = chain_sign(&d(&self.hochschild, n), &d(&self.cyclic, n - 1), &self.b_map[&n], &self.b_map[&(n + 1)]);
            let bi = self.b_map[&n].mul(&self.i_map[&n])?;
            let b_after_i_rank = induced_rank(&self.cyclic.total, n, &self.cyclic.total, n - 1, &bi);
            out.push(PeriodicityCheck { degree: n, s_sign, i_sign, b_sign, b_after_i_rank });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Long exact sequences.

/// One node of a long exact sequence: exactness holds when the ranks of the
/// incoming and outgoing maps on cohomology add up to its dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LesNode {
    pub label: String,
    pub degree: i64,
    pub dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    /// Whether every window involved is untruncated at this node.
    pub complete: bool,
}

impl LesNode {
    pub fn exact(&self) -> bool {
        self.rank_in + self.rank_out == self.dim
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LesReport {
    pub name: String,
    pub nodes: Vec<LesNode>,
}

impl LesReport {
    pub fn pass(&self) -> bool {
        !self.nodes.is_empty() && self.nodes.iter().all(|n| n.complete && n.exact())
    }
}

/// The periodicity sequence
/// `HC^{n-2} →S HC^n →I HH^n →B HC^{n-1}` for the degrees of `window`,
/// either undecomposed or in the Hodge summand pairing `HC_(j)`, `HC_(j+1)`
/// and `HH_(j+1)`. Cyclic cohomology is computed by the Tsygan bicomplex
/// (or its strips), `S` shifts by two columns, `I` projects to column 0 and
/// `B` is `x ↦ -N h (1-z) x` into column 0 (composed with `ẽ(j)`).
pub fn periodicity_les(s: &InftyStructure, window: Window, summand: Option<usize>) -> Result<LesReport, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    window.validate()?;
    let basis = s.basis();
    let wide = Window::new(window.cap, window.lo - 2, window.hi + 1);
    let (lower, upper, hh) = match summand {
        None => {
            let t = tsygan_window(s, wide)?;
            (t.clone(), t, hochschild_column(s, window, None)?)
        }
        Some(j) => (tsygan_strip(s, wide, j)?, tsygan_strip(s, wide, j + 1)?, hochschild_column(s, window, Some(j + 1))?),
    };
    let table = CyclicOperatorTable::new(basis);
    let shift = |src: &BicomplexWindow, n: i64, tgt: &BicomplexWindow| {
        window_map(src, n, tgt, n + 2, |c| vec![(c.column + 2, c.value.clone())])
    };
    let project = |n: i64| {
        window_map(&upper, n, &hh, n, |c| if c.column == 0 { vec![(0, c.value.clone())] } else { vec![] })
    };
    let connecting = |n: i64| -> Result<RationalMatrix, ComplexError> {
        let cols: Result<Vec<SparseVec>, ComplexError> = hh
            .total
            .cell(n)
            .iter()
            .map(|c| {
                let mut y = connes_b_prime(basis, unit, &c.value).scale(&Rational::from_integer((-1).into()));
                if let Some(j) = summand {
                    y = table.apply(&y, j, ShuffleVariant::Tilde)?;
                }
                lower.coordinates(n - 1, &[(0, y)]).ok_or_else(|| ComplexError::NotSubcomplex {
                    theory: format!("{} -> {}", hh.theory(), lower.theory()),
                    degree: n,
                })
            })
            .collect();
        Ok(RationalMatrix::from_columns(lower.total.dim(n - 1), cols?))
    };
    let (lo_label, up_label, hh_label) = match summand {
        None => ("HC".to_string(), "HC".to_string(), "HH".to_string()),
        Some(j) => (format!("HC_({j})"), format!("HC_({})", j + 1), format!("HH_({})", j + 1)),
    };
    let mut nodes = Vec::new();
    for n in window.lo..=window.hi {
        let s_in = shift(&lower, n - 2, &upper)?;
        let s_out = shift(&lower, n - 1, &upper)?;
        let i_n = project(n)?;
        let b_n = connecting(n)?;
        let r_s_in = induced_rank(&lower.total, n - 2, &upper.total, n, &s_in);
        let r_s_out = induced_rank(&lower.total, n - 1, &upper.total, n + 1, &s_out);
        let r_i = induced_rank(&upper.total, n, &hh.total, n, &i_n);
        let r_b = induced_rank(&hh.total, n, &lower.total, n - 1, &b_n);
        let ex = |w: &BicomplexWindow, m: i64| w.total.is_exact(m);
        nodes.push(LesNode {
            label: up_label.clone(),
            degree: n,
            dim: upper.total.cohomology(n)?,
            rank_in: r_s_in,
            rank_out: r_i,
            complete: ex(&lower, n - 2) && ex(&upper, n) && ex(&hh, n),
        });
        nodes.push(LesNode {
            label: hh_label.clone(),
            degree: n,
            dim: hh.total.cohomology(n)?,
            rank_in: r_i,
            rank_out: r_b,
            complete: ex(&upper, n) && ex(&hh, n) && ex(&lower, n - 1),
        });
        nodes.push(LesNode {
            label: lo_label.clone(),
            degree: n - 1,
            dim: lower.total.cohomology(n - 1)?,
            rank_in: r_b,
            rank_out: r_s_out,
            complete: ex(&hh, n) && ex(&lower, n - 1) && ex(&upper, n + 1),
        });
    }
    let name = match summand {
        None => "periodicity".to_string(),
        Some(j) => format!("periodicity-hodge-{j}"),
    };
    Ok(LesReport { name, nodes })
}

/// For a minimal unital C∞ structure, the sequence
/// `0 → HC_norm → HC → HC(𝕂) → 0` of necklace complexes, optionally in the
/// `e(k)` summand, is short exact in each degree.
pub fn normalised_cyclic_les(s: &InftyStructure, window: Window, summand: Option<usize>) -> Result<LesReport, ComplexError> {
    require_tensor(s)?;
    let unit = require_unital(s)?;
    require_cinfty(s)?;
    if !s.is_minimal() {
        return Err(ComplexError::NotMinimal);
    }
    let field = unit_subalgebra(s)?;
    let (full, field_w) = match summand {
        Some(k) => (cyclic_summand_window(s, window, k)?, cyclic_summand_window(&field, window, k)?),
        None => (cyclic_window(s, window)?, cyclic_window(&field, window)?),
    };
    let norm = normalised_cyclic_window(s, window, summand)?;
    let fbasis = field.basis();
    let mut nodes = Vec::new();
    for n in window.lo..=window.hi {
        let iota = window_map(&norm, n, &full, n, |c| vec![(0, c.value.clone())])?;
        let pi = window_map(&full, n, &field_w, n, |c| {
            let only_unit: WordComb = c
                .value
                .iter()
                .filter(|(w, _)| w.0.iter().all(|&l| l == unit))
                .map(|(w, c)| (Word(vec![0; w.weight()]), c.clone()))
                .collect();
            vec![(0, necklace_project(fbasis, &only_unit))]
        })?;
        let r_iota = induced_rank(&norm.total, n, &full.total, n, &iota);
        let r_pi = induced_rank(&full.total, n, &field_w.total, n, &pi);
        let complete = norm.total.is_exact(n) && full.total.is_exact(n) && field_w.total.is_exact(n);
        let label = |base: &str| match summand {
            Some(k) => format!("{base}_({})", k - 1),
            None => base.to_string(),
        };
        nodes.push(LesNode { label: label("HCnorm"), degree: n, dim: norm.total.cohomology(n)?, rank_in: 0, rank_out: r_iota, complete });
        nodes.push(LesNode { label: label("HC"), degree: n, dim: full.total.cohomology(n)?, rank_in: r_iota, rank_out: r_pi, complete });
        nodes.push(LesNode { label: label("HC(K)"), degree: n, dim: field_w.total.cohomology(n)?, rank_in: r_pi, rank_out: 0, complete });
    }
    let name = match summand {
        Some(k) => format!("normalised-cyclic-hodge-{}", k - 1),
        None => "normalised-cyclic".into(),
    };
    Ok(LesReport { name, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::homcomplex::hochschild_window;
    use crate::homcomplex::Coefficients;

    #[test]
    fn bicomplexes_square_to_zero() {
        let s = dual_numbers();
        let w = Window::new(6, 0, 4);
        for b in [tsygan_window(&s, w).unwrap(), connes_window(&s, w, false).unwrap(), connes_window(&s, w, true).unwrap(), cyclic_window(&s, w).unwrap()] {
            assert!(b.total.square_zero(), "{}", b.theory());
        }
        let c = truncated_cubic();
        for j in 0..3 {
            assert!(tsygan_strip(&c, Window::new(5, 0, 3), j).unwrap().total.square_zero());
        }
    }

    #[test]
    fn b_prime_squares_to_zero_and_anticommutes_with_b() {
        let s = truncated_cubic();
        let basis = s.basis();
        let unit = s.unit().unwrap();
        for k in 1..=4 {
            for w in crate::gradedspace::enumerate_words(basis, k, None) {
                let x = WordComb::basis(w.clone());
                let bb = connes_b_prime(basis, unit, &connes_b_prime(basis, unit, &x));
                assert!(bb.is_zero(), "B'^2 on {}", basis.render(&w));
                let lhs = connes_b_prime(basis, unit, &hochschild_b(&s, &x, 6));
                let rhs = hochschild_b(&s, &connes_b_prime(basis, unit, &x), 6);
                assert!(truncate(lhs.plus(&rhs), 5).is_zero());
                if is_normalised_word(unit, &w) {
                    assert_eq!(connes_b_prime(basis, unit, &x), connes_b_bar(basis, unit, &x));
                }
            }
        }
    }

    #[test]
    fn column_zero_of_tsygan_is_the_hochschild_complex() {
        let s = dual_numbers();
        let w = Window::new(6, 0, 3);
        let t = tsygan_window(&s, w).unwrap();
        let h = hochschild_window(&s, w, Coefficients::Dual).unwrap();
        for n in 0..=3 {
            assert_eq!(t.block(n, 0).unwrap().len, h.dim(n));
        }
    }

    #[test]
    fn three_models_agree_on_dual_numbers() {
        let s = dual_numbers();
        let rows = compare_cyclic_models(&s, Window::new(6, 0, 4)).unwrap();
        for r in &rows {
            assert!(r.exact, "{r:?}");
            assert!(r.agrees(), "{r:?}");
        }
        // Over ℚ, HC_n(k[x]/(x^m)) has dimension m in even degrees and 0 in odd ones.
        let dims: Vec<usize> = rows.iter().map(|r| r.coinvariants).collect();
        assert_eq!(dims, vec![2, 0, 2, 0, 2]);
    }

    #[test]
    fn models_agree_without_unit() {
        let s = nonstrict_cinf();
        let rows = compare_cyclic_models(&s, Window::new(5, 0, 3)).unwrap();
        for r in rows.iter().filter(|r| r.exact) {
            assert!(r.agrees(), "{r:?}");
        }
    }

    #[test]
    fn periodicity_is_exact_for_dual_numbers() {
        let s = dual_numbers();
        let report = periodicity_les(&s, Window::new(7, 0, 4), None).unwrap();
        for node in &report.nodes {
            assert!(node.complete && node.exact(), "{node:?}");
        }
    }

    #[test]
    fn periodicity_maps_are_chain_maps() {
        let s = dual_numbers();
        let maps = periodicity_maps(&s, Window::new(7, 0, 4)).unwrap();
        let checks = maps.checks().unwrap();
        assert_eq!(checks.len(), 5);
        for c in &checks {
            assert!(c.pass(), "{c:?}");
        }
    }

    #[test]
    fn b_on_normalised_cocycles_is_minus_h() {
        let s = truncated_cubic();
        let unit = s.unit().unwrap();
        let basis = s.basis();
        let w = crate::homcomplex::normalised_hochschild_window(&s, Window::new(5, 1, 3)).unwrap();
        for n in 1..=3 {
            let (_, kernel) = rank_and_kernel(w.differential(n).unwrap());
            for z in &kernel.basis {
                let mut x = WordComb::zero();
                for (i, c) in z.iter() {
                    x.add_scaled(&w.cell(n)[*i].value, c);
                }
                let b = h_with_unit(unit, &one_minus_z_mixed(basis, &x));
                assert_eq!(b, h_with_unit(unit, &x));
            }
        }
    }

    #[test]
    fn decomposed_periodicity_is_exact() {
        let s = dual_numbers();
        for j in 0..3 {
            let report = periodicity_les(&s, Window::new(6, 0, 3), Some(j)).unwrap();
            assert!(report.pass(), "{report:?}");
        }
    }

    #[test]
    fn cyclic_harrison_of_the_field() {
        let s = ground_field();
        let w = cyclic_harrison_window(&s, Window::new(6, 0, 4)).unwrap();
        let dims: Vec<usize> = (0..=4).map(|n| w.total.cohomology(n).unwrap()).collect();
        assert_eq!(dims, vec![0, 0, 1, 0, 0]);
        let cell = w.total.cell(2);
        assert!(cell.iter().all(|c| c.value.keys().all(|k| k.weight() == 3)));
    }

    #[test]
    fn normalised_sequence_splits_for_dual_numbers() {
        let s = dual_numbers();
        let w = Window::new(6, 0, 4);
        assert!(normalised_cyclic_les(&s, w, None).unwrap().pass());
        for k in 1..=4 {
            assert!(normalised_cyclic_les(&s, w, Some(k)).unwrap().pass());
        }
    }

    #[test]
    fn normalised_sequence_needs_minimality() {
        let s = linear_differential();
        let err = normalised_cyclic_les(&s, Window::new(3, 0, 1), None).unwrap_err();
        assert!(matches!(err, ComplexError::NotUnital(_) | ComplexError::NotMinimal));
    }

    #[test]
    fn connes_needs_a_unit() {
        let s = nonstrict_cinf();
        assert!(matches!(connes_window(&s, Window::new(3, 0, 1), false), Err(ComplexError::NotUnital(_))));
    }

    #[test]
    fn truncated_cubic_cyclic_dims() {
        let c = truncated_cubic();
        let w = Window::new(6, 0, 4);
        let total = cyclic_window(&c, w).unwrap();
        assert_eq!((0..=4).map(|n| total.total.cohomology(n).unwrap()).collect::<Vec<_>>(), vec![3, 0, 3, 0, 3]);
        for j in 0..3 {
            let part = cyclic_summand_window(&c, w, j + 1).unwrap();
            let dims: Vec<usize> = (0..=4).map(|n| part.total.cohomology(n).unwrap()).collect();
            let expected: Vec<usize> = (0..=4).map(|n| if n == 2 * j as i64 { 3 } else { 0 }).collect();
            assert_eq!(dims, expected, "summand {j}");
        }
    }

    #[test]
    fn necklace_example() {
        // Two letters of even W-degree, weight two: necklaces aa, ab, bb.
        let basis = GradedBasis::uniform(2, 2);
        let reps: Vec<String> = enumerate_necklaces(&basis, 2, None).iter().map(|w| basis.render(w)).collect();
        assert_eq!(reps.len(), 3);
    }
}
