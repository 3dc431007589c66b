//! Hodge decompositions of the bar, Hochschild and cyclic complexes of a C∞
//! structure, and the decomposed long exact sequences.
//!
//! Every complex is assembled once in a basis made of the eigenbases of all
//! summands, each vector labelled by its Hodge index. Block-diagonality is
//! then the literal statement that no differential entry joins two different
//! labels, and the summand complexes are the diagonal blocks.

use crate::cycliccomplex::{
    cyclic_hodge_window, cyclic_summand_window, cyclic_window, hochschild_column, induced_rank, normalised_cyclic_les,
    periodicity_les, tsygan_hodge_window, tsygan_strip, tsygan_window, window_map, LesNode, LesReport,
};
use crate::cyclicshuffle::{CyclicOperatorTable, ShuffleVariant};
use crate::exactlin::{rank, RationalMatrix, SparseVec};
use crate::gradedspace::WordComb;
use crate::homcomplex::{
    adjoint_d, assemble_labelled, bar_differential, bar_window, derivation_model_exact, derivation_summand_span,
    hochschild_b, hochschild_window, norm_mixed, require_cinfty, require_tensor, require_unital, word_cell,
    word_model_exact, Cochain, Coefficients, CohomologyRow, ComplexError, ComplexWindow, Window,
};
use crate::inftystruct::InftyStructure;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which Hochschild-type complex to decompose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HochschildFlavour {
    /// The bar complex, split by `e(j)`.
    Bar,
    /// Dual coefficients, split by `ẽ(j)`.
    Dual,
    /// Coefficients in `V`, split by `e(j)` on values.
    Adjoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CyclicModel {
    Coinvariant,
    Tsygan,
}

/// One cell of a Hodge table. `order` is set when the summand complex splits
/// by order in this degree; it is the weight for functions and bar words,
/// the weight minus one for 1-forms and the value weight minus one for
/// derivations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeRow {
    pub degree: i64,
    pub order: Option<i64>,
    pub j: usize,
    pub dim: usize,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeTable {
    pub theory: String,
    pub window: Window,
    pub rows: Vec<HodgeRow>,
    pub totals: Vec<CohomologyRow>,
    /// No differential entry joins two summands.
    pub block_diagonal: bool,
    /// The eigenbases span every cell of the undecomposed complex.
    pub spans_ambient: bool,
}

impl HodgeTable {
    /// `dim H^n_(j)`, summed over orders.
    pub fn dim(&self, degree: i64, j: usize) -> usize {
        self.rows.iter().filter(|r| r.degree == degree && r.j == j).map(|r| r.dim).sum()
    }

    /// `Σ_j dim H^n_(j)`.
    pub fn summed(&self, degree: i64) -> usize {
        self.rows.iter().filter(|r| r.degree == degree).map(|r| r.dim).sum()
    }

    /// Hodge indices present in the table.
    pub fn indices(&self) -> Vec<usize> {
        let mut js: Vec<usize> = self.rows.iter().map(|r| r.j).collect();
        js.sort_unstable();
        js.dedup();
        js
    }

    /// Degrees where the summands fail to add up to the total.
    pub fn mismatches(&self) -> Vec<i64> {
        self.totals.iter().filter(|t| t.exact && self.summed(t.degree) != t.dim).map(|t| t.degree).collect()
    }

    pub fn pass(&self) -> bool {
        self.block_diagonal && self.spans_ambient && self.mismatches().is_empty()
    }
}

/// Diagonal blocks of a labelled window.
#[derive(Clone, Debug)]
pub struct SummandSplit {
    pub block_diagonal: bool,
    pub summands: BTreeMap<usize, ComplexWindow>,
}

fn label(c: &Cochain) -> usize {
    c.summand.unwrap_or(0)
}

/// Splits a window whose cochains carry Hodge labels into its diagonal
/// blocks, recording whether any off-block entry is nonzero.
pub fn split_summands(w: &ComplexWindow) -> SummandSplit {
    let win = w.window;
    let degrees: Vec<i64> = (win.lo - 1..=win.hi + 1).collect();
    let mut labels: BTreeMap<usize, ()> = BTreeMap::new();
    // Position of each cochain inside its own summand.
    let mut local: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut counts: BTreeMap<(i64, usize), usize> = BTreeMap::new();
    for &n in &degrees {
        let pos = w
            .cell(n)
            .iter()
            .map(|c| {
                labels.insert(label(c), ());
                let k = counts.entry((n, label(c))).or_insert(0);
                *k += 1;
                *k - 1
            })
            .collect();
        local.insert(n, pos);
    }
    let mut block_diagonal = true;
    let mut summands = BTreeMap::new();
    for &j in labels.keys() {
        let cells: BTreeMap<i64, Vec<Cochain>> =
            degrees.iter().map(|&n| (n, w.cell(n).iter().filter(|c| label(c) == j).cloned().collect())).collect();
        let mut diffs = BTreeMap::new();
        for n in win.lo - 1..=win.hi {
            let Some(d) = w.differential(n) else { continue };
            let src = w.cell(n);
            let tgt = w.cell(n + 1);
            let mut cols = Vec::new();
            for (c, cochain) in src.iter().enumerate() {
                if label(cochain) != j {
                    continue;
                }
                let mut pairs = Vec::new();
                for (r, v) in d.column(c).iter() {
                    if label(&tgt[*r]) == j {
                        pairs.push((local[&(n + 1)][*r], v.clone()));
                    } else {
                        block_diagonal = false;
                    }
                }
                cols.push(SparseVec::from_pairs(pairs));
            }
            diffs.insert(n, RationalMatrix::from_columns(counts.get(&(n + 1, j)).copied().unwrap_or(0), cols));
        }
        let exact = (win.lo..=win.hi).map(|n| (n, w.is_exact(n))).collect();
        summands.insert(j, ComplexWindow::from_parts(format!("{}[{j}]", w.theory), win, cells, diffs, exact));
    }
    SummandSplit { block_diagonal, summands }
}

fn common_weight(c: &Cochain) -> Option<usize> {
    let mut ws = c.value.keys().map(|w| w.weight());
    let first = ws.next()?;
    ws.all(|w| w == first).then_some(first)
}

fn submatrix_columns(d: &RationalMatrix, cols: &[usize]) -> RationalMatrix {
    RationalMatrix::from_columns(d.rows(), cols.iter().map(|&c| d.column(c).clone()).collect())
}

/// Cohomology of a window at degree `n` split by order, when every cochain
/// involved has one weight and both differentials respect the split.
pub fn cohomology_by_order(w: &ComplexWindow, n: i64, offset: i64) -> Option<BTreeMap<i64, usize>> {
    let orders = |m: i64| -> Option<Vec<i64>> { w.cell(m).iter().map(|c| common_weight(c).map(|k| k as i64 - offset)).collect() };
    let (prev, here, next) = (orders(n - 1)?, orders(n)?, orders(n + 1)?);
    let zero_in = RationalMatrix::zero(here.len(), prev.len());
    let zero_out = RationalMatrix::zero(next.len(), here.len());
    let d_in = w.differential(n - 1).unwrap_or(&zero_in);
    let d_out = w.differential(n).unwrap_or(&zero_out);
    // Order of the image of each column, or None when it is zero.
    let image_order = |d: &RationalMatrix, rows: &[i64], c: usize| -> Result<Option<i64>, ()> {
        let mut o = None;
        for (r, _) in d.column(c).iter() {
            match o {
                None => o = Some(rows[*r]),
                Some(x) if x != rows[*r] => return Err(()),
                _ => {}
            }
        }
        Ok(o)
    };
    let mut in_by_order: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for c in 0..prev.len() {
        if let Some(o) = image_order(d_in, &here, c).ok()? {
            in_by_order.entry(o).or_default().push(c);
        }
    }
    for c in 0..here.len() {
        image_order(d_out, &next, c).ok()?;
    }
    let mut here_by_order: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, o) in here.iter().enumerate() {
        here_by_order.entry(*o).or_default().push(i);
    }
    let mut out = BTreeMap::new();
    for (o, cols) in here_by_order {
        let kernel = cols.len() - rank(&submatrix_columns(d_out, &cols));
        let image = in_by_order.get(&o).map_or(0, |cs| rank(&submatrix_columns(d_in, cs)));
        out.insert(o, kernel - image);
    }
    Some(out)
}

fn table_rows(split: &SummandSplit, window: Window, max_j: usize, offset: Option<i64>) -> Result<Vec<HodgeRow>, ComplexError> {
    let mut rows = Vec::new();
    for n in window.lo..=window.hi {
        for j in 0..=max_j {
            let Some(w) = split.summands.get(&j) else {
                rows.push(HodgeRow { degree: n, order: None, j, dim: 0, exact: true });
                continue;
            };
            let exact = w.is_exact(n);
            let by_order = offset.and_then(|off| cohomology_by_order(w, n, off));
            match by_order {
                Some(map) if map.values().any(|&d| d > 0) => {
                    rows.extend(map.into_iter().filter(|(_, d)| *d > 0).map(|(o, dim)| HodgeRow { degree: n, order: Some(o), j, dim, exact }));
                }
                _ => rows.push(HodgeRow { degree: n, order: None, j, dim: w.cohomology(n)?, exact }),
            }
        }
    }
    Ok(rows)
}

fn spans_ambient(eigen: &ComplexWindow, plain: &ComplexWindow) -> bool {
    let w = plain.window;
    (w.lo - 1..=w.hi + 1).all(|n| eigen.dim(n) == plain.dim(n))
}

fn finish(theory: String, eigen: &ComplexWindow, plain: &ComplexWindow, offset: Option<i64>) -> Result<HodgeTable, ComplexError> {
    let window = plain.window;
    let split = split_summands(eigen);
    Ok(HodgeTable {
        theory,
        window,
        rows: table_rows(&split, window, window.cap, offset)?,
        totals: plain.cohomology_rows()?,
        block_diagonal: split.block_diagonal,
        spans_ambient: spans_ambient(eigen, plain),
    })
}

/// The bar or Hochschild complex of a C∞ structure written in the
/// eigenbasis of all summands.
pub fn hochschild_hodge_window(s: &InftyStructure, window: Window, flavour: HochschildFlavour) -> Result<ComplexWindow, ComplexError> {
    require_tensor(s)?;
    require_cinfty(s)?;
    let basis = s.basis().clone();
    let cap = window.cap;
    let table = CyclicOperatorTable::new(&basis);
    let labelled = |n: i64| -> Result<Vec<Cochain>, ComplexError> {
        let mut out = Vec::new();
        for j in 0..=cap {
            let part = match flavour {
                HochschildFlavour::Bar => table.summand_basis(&word_cell(&basis, cap, n), j, ShuffleVariant::Plain)?,
                HochschildFlavour::Dual => table.summand_basis(&word_cell(&basis, cap, n), j, ShuffleVariant::Tilde)?,
                HochschildFlavour::Adjoint => derivation_summand_span(&table, cap, n, j)?,
            };
            out.extend(part.into_iter().map(|value| Cochain { column: 0, summand: Some(j), value }));
        }
        Ok(out)
    };
    let name = format!("{}-hodge", flavour_name(flavour));
    match flavour {
        HochschildFlavour::Bar => {
            assemble_labelled(&name, window, labelled, |x| bar_differential(s, x, cap), |n| word_model_exact(&basis, cap, n))
        }
        HochschildFlavour::Dual => {
            assemble_labelled(&name, window, labelled, |x| hochschild_b(s, x, cap), |n| word_model_exact(&basis, cap, n))
        }
        HochschildFlavour::Adjoint => {
            assemble_labelled(&name, window, labelled, |x| adjoint_d(s, x, cap), |n| derivation_model_exact(&basis, cap, n))
        }
    }
}

fn flavour_name(flavour: HochschildFlavour) -> &'static str {
    match flavour {
        HochschildFlavour::Bar => "bar",
        HochschildFlavour::Dual => "hochschild-dual",
        HochschildFlavour::Adjoint => "hochschild-adjoint",
    }
}

/// Hodge table of the bar complex (`e(j)`), the dual Hochschild complex
/// (`ẽ(j)`) or the adjoint Hochschild complex (`e(j)` on values).
pub fn decompose_hochschild(s: &InftyStructure, window: Window, flavour: HochschildFlavour) -> Result<HodgeTable, ComplexError> {
    let eigen = hochschild_hodge_window(s, window, flavour)?;
    let (plain, offset) = match flavour {
        HochschildFlavour::Bar => (bar_window(s, window)?, 0),
        HochschildFlavour::Dual => (hochschild_window(s, window, Coefficients::Dual)?, 1),
        HochschildFlavour::Adjoint => (hochschild_window(s, window, Coefficients::Adjoint)?, 2),
    };
    finish(flavour_name(flavour).to_string(), &eigen, &plain, Some(offset))
}

/// Hodge table of cyclic cohomology: `e(j+1)` summands of the coinvariants,
/// or the strips `Γ_j` of the Tsygan bicomplex.
pub fn decompose_cyclic(s: &InftyStructure, window: Window, model: CyclicModel) -> Result<HodgeTable, ComplexError> {
    match model {
        CyclicModel::Coinvariant => {
            let eigen = cyclic_hodge_window(s, window)?;
            let plain = cyclic_window(s, window)?;
            finish("cyclic".into(), &eigen.total, &plain.total, Some(0))
        }
        CyclicModel::Tsygan => {
            let eigen = tsygan_hodge_window(s, window)?;
            let plain = tsygan_window(s, window)?;
            finish("cyclic-tsygan".into(), &eigen.total, &plain.total, None)
        }
    }
}

/// Rank of `N` from the `e(j+1)` coinvariants into `Γ_j`, per degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormCompatibility {
    pub degree: i64,
    pub j: usize,
    pub coinvariant_dim: usize,
    pub strip_dim: usize,
    pub rank: usize,
}

impl NormCompatibility {
    pub fn pass(&self) -> bool {
        self.coinvariant_dim == self.strip_dim && self.rank == self.strip_dim
    }
}

/// Checks that `N` carries the `e(j+1)` necklace summand into the strip
/// `Γ_j` and is an isomorphism on cohomology there. A failure to land in
/// the strip surfaces as `NotSubcomplex`.
pub fn norm_respects_hodge(s: &InftyStructure, window: Window, max_j: usize) -> Result<Vec<NormCompatibility>, ComplexError> {
    let basis = s.basis();
    let mut out = Vec::new();
    for j in 0..=max_j {
        let coinv = cyclic_summand_window(s, window, j + 1)?;
        let strip = tsygan_strip(s, window, j)?;
        for n in window.lo..=window.hi {
            let f = window_map(&coinv, n, &strip, n, |c| vec![(0, norm_mixed(basis, &c.value))])?;
            out.push(NormCompatibility {
                degree: n,
                j,
                coinvariant_dim: coinv.total.cohomology(n)?,
                strip_dim: strip.total.cohomology(n)?,
                rank: induced_rank(&coinv.total, n, &strip.total, n, &f),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LesKind {
    Periodicity,
    Harrison,
    Normalised,
}

/// Verifies a Hodge-decomposed long exact sequence by rank bookkeeping.
///
/// * `periodicity`: `HC_(j)^{n-2} → HC_(j+1)^n → HH_(j+1)^n → HC_(j)^{n-1}`
///   for every `j` with `j + 1 ≤ cap`.
/// * `harrison`: the case `j = 0`, where `HC_(0)` is the cohomology of
///   `(V*, m₁)`, `HC_(1)` is cyclic Harrison and `HH_(1)` is Harrison.
/// * `normalised`: the split sequences `HC_norm,(j) → HC_(j) → HC_(j)(𝕂)`.
pub fn verify_decomposed_les(s: &InftyStructure, window: Window, kind: LesKind) -> Result<Vec<LesReport>, ComplexError> {
    require_tensor(s)?;
    require_cinfty(s)?;
    require_unital(s)?;
    match kind {
        LesKind::Periodicity => (0..window.cap).map(|j| periodicity_les(s, window, Some(j))).collect(),
        LesKind::Harrison => {
            let mut report = periodicity_les(s, window, Some(0))?;
            report.name = "harrison".into();
            for node in &mut report.nodes {
                node.label = match node.label.as_str() {
                    "HC_(0)" => "H(V*)".into(),
                    "HC_(1)" => "HCHarr".into(),
                    _ => "HHarr".into(),
                };
            }
            Ok(vec![report])
        }
        LesKind::Normalised => (1..=window.cap).map(|k| normalised_cyclic_les(s, window, Some(k))).collect(),
    }
}

/// `I = N` from cyclic Harrison to Harrison cohomology in one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarrisonComparison {
    pub degree: i64,
    /// Order of the Harrison classes; the cyclic classes have order one more.
    pub order: Option<i64>,
    pub cyclic_dim: usize,
    pub harrison_dim: usize,
    pub rank: usize,
    pub exact: bool,
}

impl HarrisonComparison {
    pub fn injective(&self) -> bool {
        self.rank == self.cyclic_dim
    }

    pub fn surjective(&self) -> bool {
        self.rank == self.harrison_dim
    }
}

/// Ranks of `I : HCHarr^n → HHarr^n`, computed with necklaces of the `e(2)`
/// summand and the `ẽ(1)` summand of the dual Hochschild complex.
pub fn harrison_comparison(s: &InftyStructure, window: Window) -> Result<Vec<HarrisonComparison>, ComplexError> {
    let cyc = cyclic_summand_window(s, window, 2)?;
    let harr = hochschild_column(s, window, Some(1))?;
    let basis = s.basis();
    let mut out = Vec::new();
    for n in window.lo..=window.hi {
        let f = window_map(&cyc, n, &harr, n, |c| vec![(0, norm_mixed(basis, &c.value))])?;
        let weights: Vec<usize> = harr.total.cell(n).iter().chain(cyc.total.cell(n)).filter_map(common_weight).collect();
        let order = match weights.split_first() {
            Some((w, rest)) if rest.iter().all(|x| x == w) => Some(*w as i64 - 1),
            _ => None,
        };
        out.push(HarrisonComparison {
            degree: n,
            order,
            cyclic_dim: cyc.total.cohomology(n)?,
            harrison_dim: harr.total.cohomology(n)?,
            rank: induced_rank(&cyc.total, n, &harr.total, n, &f),
            exact: cyc.total.is_exact(n) && harr.total.is_exact(n),
        });
    }
    Ok(out)
}

/// Nodes of a report that fail, for diagnostics.
pub fn failing_nodes(reports: &[LesReport]) -> Vec<(String, LesNode)> {
    reports
        .iter()
        .flat_map(|r| r.nodes.iter().filter(|n| !(n.complete && n.exact())).map(move |n| (r.name.clone(), n.clone())))
        .collect()
}

/// Combination of a cochain list with coefficients, for tests and reports.
pub fn combine(cells: &[Cochain], v: &SparseVec) -> WordComb {
    let mut out = WordComb::zero();
    for (i, c) in v.iter() {
        out.add_scaled(&cells[*i].value, c);
    }
    out
}
