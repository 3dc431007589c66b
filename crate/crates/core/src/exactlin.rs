//! Exact linear algebra over the rationals.
//!
//! Matrices are stored column-wise as sorted sparse vectors. Rank and kernel
//! computations run a fraction-free elimination over big integers; the pivot
//! for each column is the candidate entry of smallest bit-length.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

pub type Rational = BigRational;

/// Matrices at or below this size take the dense path.
pub const DENSE_CUTOFF: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("composition of consecutive differentials is nonzero ({nonzero} entries)")]
    CompositionNonzero { nonzero: usize },
    #[error("subspaces live in different ambient spaces ({0} vs {1})")]
    AmbientMismatch(usize, usize),
}

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Sorted sparse vector with nonzero rational entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Rational)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_map(map: BTreeMap<usize, Rational>) -> Self {
        SparseVec { entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    /// Entries need not be sorted or distinct; duplicates are summed.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Rational)>>(pairs: I) -> Self {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_insert_with(Rational::zero) += v;
        }
        Self::from_map(map)
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        SparseVec {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn unit(i: usize) -> Self {
        SparseVec { entries: vec![(i, Rational::one())] }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Rational)> {
        self.entries.iter()
    }

    pub fn get(&self, i: usize) -> Rational {
        match self.entries.binary_search_by_key(&i, |(k, _)| *k) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec { entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect() }
    }

    /// Returns `self + c * other`.
    pub fn axpy(&self, c: &Rational, other: &SparseVec) -> SparseVec {
        if c.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (0, 0);
        while a < self.entries.len() || b < other.entries.len() {
            let ia = self.entries.get(a).map(|e| e.0);
            let ib = other.entries.get(b).map(|e| e.0);
            match (ia, ib) {
                (Some(x), Some(y)) if x == y => {
                    let v = &self.entries[a].1 + c * &other.entries[b].1;
                    if !v.is_zero() {
                        out.push((x, v));
                    }
                    a += 1;
                    b += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    out.push(self.entries[a].clone());
                    a += 1;
                }
                (Some(_), None) => {
                    out.push(self.entries[a].clone());
                    a += 1;
                }
                (_, Some(y)) => {
                    out.push((y, c * &other.entries[b].1));
                    b += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SparseVec { entries: out }
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        self.axpy(&Rational::one(), other)
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.axpy(&-Rational::one(), other)
    }

    pub fn dot(&self, other: &SparseVec) -> Rational {
        let mut acc = Rational::zero();
        let (mut a, mut b) = (0, 0);
        while a < self.entries.len() && b < other.entries.len() {
            let (x, y) = (self.entries[a].0, other.entries[b].0);
            if x == y {
                acc += &self.entries[a].1 * &other.entries[b].1;
                a += 1;
                b += 1;
            } else if x < y {
                a += 1;
            } else {
                b += 1;
            }
        }
        acc
    }
}

/// Sparse rational matrix, stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: Vec<SparseVec>,
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols: vec![SparseVec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        RationalMatrix { rows: n, cols: (0..n).map(SparseVec::unit).collect() }
    }

    pub fn from_columns(rows: usize, cols: Vec<SparseVec>) -> Self {
        for c in &cols {
            if let Some(i) = c.max_index() {
                assert!(i < rows, "column entry {i} out of bounds for {rows} rows");
            }
        }
        RationalMatrix { rows, cols }
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut cols = vec![BTreeMap::new(); ncols];
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense matrix");
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    cols[j].insert(i, v.clone());
                }
            }
        }
        RationalMatrix { rows: nrows, cols: cols.into_iter().map(SparseVec::from_map).collect() }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let conv: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        Self::from_dense(&conv)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.cols[j].get(i)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.nnz()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    /// All stored entries as `((row, col), value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> {
        self.cols.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |(i, v)| ((*i, j), v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.cols()]; self.rows];
        for ((i, j), v) in self.entries() {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut cols = vec![Vec::new(); self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c.iter() {
                cols[*i].push((j, v.clone()));
            }
        }
        RationalMatrix {
            rows: self.cols(),
            cols: cols.into_iter().map(|entries| SparseVec { entries }).collect(),
        }
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (j, x) in v.iter() {
            for (i, a) in self.cols[*j].iter() {
                *acc.entry(*i).or_insert_with(Rational::zero) += a * x;
            }
        }
        SparseVec::from_map(acc)
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix, LinAlgError> {
        if self.cols() != other.rows {
            return Err(LinAlgError::DimMismatch(format!(
                "{}x{} times {}x{}",
                self.rows,
                self.cols(),
                other.rows,
                other.cols()
            )));
        }
        Ok(RationalMatrix { rows: self.rows, cols: other.cols.iter().map(|c| self.apply(c)).collect() })
    }

    fn same_shape(&self, other: &RationalMatrix) -> Result<(), LinAlgError> {
        if self.rows != other.rows || self.cols() != other.cols() {
            return Err(LinAlgError::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows,
                self.cols(),
                other.rows,
                other.cols()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &RationalMatrix) -> Result<RationalMatrix, LinAlgError> {
        self.same_shape(other)?;
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols.iter().zip(&other.cols).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, other: &RationalMatrix) -> Result<RationalMatrix, LinAlgError> {
        self.same_shape(other)?;
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols.iter().zip(&other.cols).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> RationalMatrix {
        RationalMatrix { rows: self.rows, cols: self.cols.iter().map(|v| v.scale(c)).collect() }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &RationalMatrix) -> Result<RationalMatrix, LinAlgError> {
        if self.rows != other.rows {
            return Err(LinAlgError::DimMismatch(format!("hcat rows {} vs {}", self.rows, other.rows)));
        }
        let mut cols = self.cols.clone();
        cols.extend(other.cols.iter().cloned());
        Ok(RationalMatrix { rows: self.rows, cols })
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }
}

/// Linear subspace of `Q^ambient_dim` with an independent basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub ambient_dim: usize,
    pub basis: Vec<SparseVec>,
}

impl Subspace {
    /// Spans the given vectors, discarding dependent ones.
    pub fn span(ambient_dim: usize, vectors: &[SparseVec]) -> Subspace {
        let mut ech = SpanEchelon::new(ambient_dim);
        let mut basis = Vec::new();
        for v in vectors {
            if ech.insert(v) {
                basis.push(v.clone());
            }
        }
        Subspace { ambient_dim, basis }
    }

    pub fn full(n: usize) -> Subspace {
        Subspace { ambient_dim: n, basis: (0..n).map(SparseVec::unit).collect() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn echelon(&self) -> SpanEchelon {
        let mut ech = SpanEchelon::new(self.ambient_dim);
        for v in &self.basis {
            ech.insert(v);
        }
        ech
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.echelon().contains(v)
    }
}

/// Whether two subspaces coincide, by mutual containment.
pub fn subspace_equal(a: &Subspace, b: &Subspace) -> Result<bool, LinAlgError> {
    if a.ambient_dim != b.ambient_dim {
        return Err(LinAlgError::AmbientMismatch(a.ambient_dim, b.ambient_dim));
    }
    let ea = a.echelon();
    let eb = b.echelon();
    Ok(a.basis.iter().all(|v| eb.contains(v)) && b.basis.iter().all(|v| ea.contains(v)))
}

// ---------------------------------------------------------------------------
// Integer vectors used by the fraction-free kernels.

type IntVec = Vec<(usize, BigInt)>;

fn bits(x: &BigInt) -> u64 {
    x.bits()
}

fn rational_bits(x: &Rational) -> u64 {
    x.numer().bits() + x.denom().bits()
}

/// Clears denominators: returns `(L * v, L)` with `L` the lcm of denominators.
fn to_int(v: &SparseVec) -> (IntVec, BigInt) {
    let mut l = BigInt::one();
    for (_, x) in v.iter() {
        l = l.lcm(x.denom());
    }
    let out = v.iter().map(|(i, x)| (*i, x.numer() * (&l / x.denom()))).collect();
    (out, l)
}

fn int_to_rational(v: &IntVec) -> SparseVec {
    SparseVec { entries: v.iter().map(|(i, x)| (*i, Rational::from_integer(x.clone()))).collect() }
}

fn int_get(v: &IntVec, i: usize) -> Option<&BigInt> {
    v.binary_search_by_key(&i, |e| e.0).ok().map(|p| &v[p].1)
}

/// Returns `a * x - b * y`.
fn int_comb(a: &BigInt, x: &IntVec, b: &BigInt, y: &IntVec) -> IntVec {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let ix = x.get(i).map(|e| e.0);
        let jy = y.get(j).map(|e| e.0);
        match (ix, jy) {
            (Some(p), Some(r)) if p == r => {
                let v = a * &x[i].1 - b * &y[j].1;
                if !v.is_zero() {
                    out.push((p, v));
                }
                i += 1;
                j += 1;
            }
            (Some(p), Some(r)) if p < r => {
                out.push((p, a * &x[i].1));
                i += 1;
            }
            (Some(p), None) => {
                out.push((p, a * &x[i].1));
                i += 1;
            }
            (_, Some(r)) => {
                out.push((r, -(b * &y[j].1)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn content(vs: &[&IntVec]) -> BigInt {
    let mut g = BigInt::zero();
    for v in vs {
        for (_, x) in v.iter() {
            g = g.gcd(x);
            if g.is_one() {
                return g;
            }
        }
    }
    g
}

fn divide_by(v: &mut IntVec, g: &BigInt) {
    for e in v.iter_mut() {
        e.1 = &e.1 / g;
    }
}

// ---------------------------------------------------------------------------
// Incremental span structure.

#[derive(Clone, Debug)]
struct EchRow {
    vec: IntVec,
    combo: IntVec,
}

/// Semi-echelon basis of a growing span. Each stored row has its pivot at its
/// lowest index; a reduced vector is zero at every pivot. Optionally tracks
/// how each row is combined from the inserted vectors.
#[derive(Clone, Debug)]
pub struct SpanEchelon {
    dim: usize,
    rows: Vec<EchRow>,
    pivot_of: BTreeMap<usize, usize>,
    inserted: usize,
}

impl SpanEchelon {
    pub fn new(dim: usize) -> Self {
        SpanEchelon { dim, rows: Vec::new(), pivot_of: BTreeMap::new(), inserted: 0 }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce_int(&self, mut r: IntVec, mut c: IntVec) -> (IntVec, IntVec) {
        let mut cursor = 0usize;
        loop {
            let next = r.iter().find(|(i, _)| *i >= cursor && self.pivot_of.contains_key(i)).map(|(i, x)| (*i, x.clone()));
            let Some((p, rp)) = next else { break };
            let row = &self.rows[self.pivot_of[&p]];
            let bp = &row.vec[0].1;
            let g = rp.gcd(bp);
            let a = bp / &g;
            let b = &rp / &g;
            r = int_comb(&a, &r, &b, &row.vec);
            c = int_comb(&a, &c, &b, &row.combo);
            let g2 = content(&[&r, &c]);
            if !g2.is_zero() && !g2.is_one() {
                divide_by(&mut r, &g2);
                divide_by(&mut c, &g2);
            }
            cursor = p + 1;
        }
        (r, c)
    }

    /// Reduces `v` against the span. Returns the residual (zero iff `v` lies in
    /// the span) together with the combination of inserted vectors such that
    /// `scale * v - combination = residual` after rescaling.
    fn reduce_tracked(&self, v: &SparseVec, tag: Option<usize>) -> (IntVec, IntVec) {
        let (iv, l) = to_int(v);
        let c = match tag {
            Some(t) => vec![(t, l)],
            None => Vec::new(),
        };
        self.reduce_int(iv, c)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce_tracked(v, None).0.is_empty()
    }

    /// Inserts `v`; returns whether the rank grew.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let tag = self.inserted;
        self.inserted += 1;
        let (r, c) = self.reduce_tracked(v, Some(tag));
        self.push_row(r, c)
    }

    fn push_row(&mut self, mut r: IntVec, mut c: IntVec) -> bool {
        if r.is_empty() {
            return false;
        }
        if r[0].1.is_negative() {
            for e in r.iter_mut() {
                e.1 = -e.1.clone();
            }
            for e in c.iter_mut() {
                e.1 = -e.1.clone();
            }
        }
        let p = r[0].0;
        self.pivot_of.insert(p, self.rows.len());
        self.rows.push(EchRow { vec: r, combo: c });
        true
    }

    /// Inserts `v`; when it is dependent, returns the relation among inserted
    /// vectors (indexed by insertion order, this one included) that it yields.
    pub fn insert_or_relation(&mut self, v: &SparseVec) -> Option<SparseVec> {
        let tag = self.inserted;
        self.inserted += 1;
        let (r, c) = self.reduce_tracked(v, Some(tag));
        if r.is_empty() {
            Some(int_to_rational(&c))
        } else {
            self.push_row(r, c);
            None
        }
    }

    /// Coordinates of `v` with respect to the inserted vectors (indexed by
    /// insertion order), provided `v` lies in the span and every inserted
    /// vector was independent.
    pub fn coordinates(&self, v: &SparseVec) -> Option<SparseVec> {
        let (iv, l) = to_int(v);
        // Track v itself under a sentinel tag beyond all insertions.
        let sentinel = usize::MAX;
        let (r, c) = self.reduce_int(iv, vec![(sentinel, l)]);
        if !r.is_empty() {
            return None;
        }
        // c = s * [v] - sum a_k [inserted_k] with s the sentinel coefficient;
        // residual zero means s * v = sum a_k inserted_k.
        let s = int_get(&c, sentinel).cloned()?;
        let s = Rational::from_integer(s);
        Some(SparseVec::from_pairs(
            c.iter().filter(|(i, _)| *i != sentinel).map(|(i, x)| (*i, -Rational::from_integer(x.clone()) / &s)),
        ))
    }
}

// ---------------------------------------------------------------------------
// Rank and kernel.

/// Rank of a matrix.
pub fn rank(m: &RationalMatrix) -> usize {
    if m.rows() <= DENSE_CUTOFF && m.cols() <= DENSE_CUTOFF {
        dense::rref(&m.to_dense()).1.len()
    } else {
        sparse_eliminate(m, false).0
    }
}

/// Rank and a kernel basis; `rank + dim(kernel) = cols`.
pub fn rank_and_kernel(m: &RationalMatrix) -> (usize, Subspace) {
    if m.rows() <= DENSE_CUTOFF && m.cols() <= DENSE_CUTOFF {
        let (r, kernel) = dense::rank_and_kernel(&m.to_dense(), m.cols());
        (r, Subspace { ambient_dim: m.cols(), basis: kernel })
    } else {
        let (r, kernel) = sparse_eliminate(m, true);
        (r, Subspace { ambient_dim: m.cols(), basis: kernel.unwrap_or_default() })
    }
}

/// Fraction-free elimination on the rows of `m`, column by column, pivoting on
/// the entry of smallest bit-length. Optionally back-substitutes for a kernel.
fn sparse_eliminate(m: &RationalMatrix, want_kernel: bool) -> (usize, Option<Vec<SparseVec>>) {
    let t = m.transpose();
    let mut rows: Vec<IntVec> = t
        .columns()
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| {
            let (mut iv, _) = to_int(v);
            let g = content(&[&iv]);
            if !g.is_one() && !g.is_zero() {
                divide_by(&mut iv, &g);
            }
            iv
        })
        .collect();
    // Column -> rows currently holding a nonzero there.
    let ncols = m.cols();
    let mut pivots: Vec<(usize, IntVec)> = Vec::new();
    let mut active: Vec<bool> = vec![true; rows.len()];
    for col in 0..ncols {
        let mut best: Option<(usize, u64)> = None;
        for (ri, row) in rows.iter().enumerate() {
            if !active[ri] {
                continue;
            }
            // Rows are kept with all indices < col eliminated, so the first
            // entry decides.
            if let Some((i, x)) = row.first() {
                if *i == col {
                    let b = bits(x);
                    if best.map_or(true, |(_, bb)| b < bb) {
                        best = Some((ri, b));
                    }
                }
            }
        }
        let Some((pr, _)) = best else { continue };
        active[pr] = false;
        let prow = rows[pr].clone();
        let pv = prow[0].1.clone();
        for ri in 0..rows.len() {
            if !active[ri] {
                continue;
            }
            let hit = rows[ri].first().map_or(false, |(i, _)| *i == col);
            if hit {
                let x = rows[ri][0].1.clone();
                let g = x.gcd(&pv);
                let mut nr = int_comb(&(&pv / &g), &rows[ri], &(&x / &g), &prow);
                let c = content(&[&nr]);
                if !c.is_zero() && !c.is_one() {
                    divide_by(&mut nr, &c);
                }
                rows[ri] = nr;
                if rows[ri].is_empty() {
                    active[ri] = false;
                }
            }
        }
        pivots.push((col, prow));
    }
    let r = pivots.len();
    if !want_kernel {
        return (r, None);
    }
    // Back-substitute to reduced form over the rationals.
    let mut reduced: Vec<(usize, SparseVec)> = Vec::with_capacity(r);
    for (col, row) in pivots.iter().rev() {
        let mut v = int_to_rational(row);
        let pv = v.get(*col);
        v = v.scale(&(Rational::one() / pv));
        for (pc, prow) in reduced.iter() {
            let x = v.get(*pc);
            if !x.is_zero() {
                v = v.axpy(&-x, prow);
            }
        }
        reduced.push((*col, v));
    }
    let pivot_cols: BTreeMap<usize, usize> = reduced.iter().enumerate().map(|(k, (c, _))| (*c, k)).collect();
    let mut kernel = Vec::new();
    for f in 0..ncols {
        if pivot_cols.contains_key(&f) {
            continue;
        }
        let mut entries = vec![(f, Rational::one())];
        for (c, row) in reduced.iter() {
            let x = row.get(f);
            if !x.is_zero() {
                entries.push((*c, -x));
            }
        }
        kernel.push(SparseVec::from_pairs(entries));
    }
    (r, Some(kernel))
}

/// Dimension of `ker(d_out) / im(d_in)` after checking `d_out * d_in = 0`.
pub fn cohomology_dim(d_in: &RationalMatrix, d_out: &RationalMatrix) -> Result<usize, LinAlgError> {
    if d_in.rows() != d_out.cols() {
        return Err(LinAlgError::DimMismatch(format!(
            "d_in has {} rows but d_out has {} columns",
            d_in.rows(),
            d_out.cols()
        )));
    }
    let comp = d_out.mul(d_in)?;
    if !comp.is_zero() {
        return Err(LinAlgError::CompositionNonzero { nonzero: comp.nnz() });
    }
    let n = d_out.cols();
    Ok(n - rank(d_out) - rank(d_in))
}

/// Rank of the span of a list of vectors.
pub fn span_rank(dim: usize, vectors: &[SparseVec]) -> usize {
    let mut e = SpanEchelon::new(dim);
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Small dense integer matrix with overflow-checked arithmetic, used for
/// operator blocks whose entries are provably bounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zero(n: usize) -> Self {
        IntMatrix { n, data: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.n + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: i128) {
        let x = &mut self.data[i * self.n + j];
        *x = x.checked_add(v).expect("integer block overflow");
    }

    pub fn column(&self, j: usize) -> Vec<i128> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        self.try_mul(other).expect("integer block overflow")
    }

    /// Product, or `None` on i128 overflow.
    pub fn try_mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = IntMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (x, &b) in dst.iter_mut().zip(row) {
                    if b != 0 {
                        *x = x.checked_add(a.checked_mul(b)?)?;
                    }
                }
            }
        }
        Some(out)
    }

    /// Scalar multiple, or `None` on overflow.
    pub fn try_scale(&self, c: i128) -> Option<IntMatrix> {
        let data = self.data.iter().map(|a| a.checked_mul(c)).collect::<Option<Vec<_>>>()?;
        Some(IntMatrix { n: self.n, data })
    }

    /// Sum, or `None` on overflow.
    pub fn try_add(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.checked_add(*b)).collect::<Option<Vec<_>>>()?;
        Some(IntMatrix { n: self.n, data })
    }

    pub fn trace(&self) -> i128 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// Nonzero entries `(row, value)` of column `j`.
    pub fn column_entries(&self, j: usize) -> impl Iterator<Item = (usize, i128)> + '_ {
        (0..self.n).filter_map(move |i| {
            let v = self.data[i * self.n + j];
            (v != 0).then_some((i, v))
        })
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        self.combine(other, -1)
    }

    fn combine(&self, other: &IntMatrix, sign: i128) -> IntMatrix {
        assert_eq!(self.n, other.n);
        IntMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.checked_add(sign * b).expect("integer block overflow"))
                .collect(),
        }
    }

    pub fn scale(&self, c: i128) -> IntMatrix {
        IntMatrix { n: self.n, data: self.data.iter().map(|a| a.checked_mul(c).expect("integer block overflow")).collect() }
    }

    /// `self - c * I`.
    pub fn shift(&self, c: i128) -> IntMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] -= c;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Greatest common divisor of all entries (zero for the zero matrix).
    pub fn content(&self) -> i128 {
        self.data.iter().fold(0i128, |g, &x| gcd_i128(g, x))
    }

    pub fn div_exact(&self, c: i128) -> IntMatrix {
        IntMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .map(|&x| {
                    debug_assert_eq!(x % c, 0);
                    x / c
                })
                .collect(),
        }
    }
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Dense rational routines for small matrices and for oracle cross-checks.
pub mod dense {
    use super::*;

    /// Reduced row echelon form, pivoting on the smallest bit-length entry in
    /// each column. Returns the reduced rows and the pivot columns.
    pub fn rref(a: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<usize>) {
        let mut m: Vec<Vec<Rational>> = a.to_vec();
        let nrows = m.len();
        let ncols = m.first().map_or(0, |r| r.len());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == nrows {
                break;
            }
            let mut best: Option<(usize, u64)> = None;
            for (i, row) in m.iter().enumerate().skip(r) {
                if !row[c].is_zero() {
                    let b = rational_bits(&row[c]);
                    if best.map_or(true, |(_, bb)| b < bb) {
                        best = Some((i, b));
                    }
                }
            }
            let Some((p, _)) = best else { continue };
            m.swap(r, p);
            let inv = Rational::one() / &m[r][c];
            for x in m[r].iter_mut() {
                *x = &*x * &inv;
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != r && !row[c].is_zero() {
                    let f = row[c].clone();
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        if !y.is_zero() {
                            *x = &*x - &f * y;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank_and_kernel(a: &[Vec<Rational>], ncols: usize) -> (usize, Vec<SparseVec>) {
        let (m, pivots) = rref(a);
        let mut kernel = Vec::new();
        for f in 0..ncols {
            if pivots.contains(&f) {
                continue;
            }
            let mut entries = vec![(f, Rational::one())];
            for (k, &c) in pivots.iter().enumerate() {
                let x = &m[k][f];
                if !x.is_zero() {
                    entries.push((c, -x.clone()));
                }
            }
            kernel.push(SparseVec::from_pairs(entries));
        }
        (pivots.len(), kernel)
    }

    pub fn rank(a: &[Vec<Rational>]) -> usize {
        rref(a).1.len()
    }

    pub fn mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let n = a.len();
        let k = b.len();
        let m = b.first().map_or(0, |r| r.len());
        let mut out = vec![vec![Rational::zero(); m]; n];
        for i in 0..n {
            for t in 0..k {
                if a[i][t].is_zero() {
                    continue;
                }
                for j in 0..m {
                    if !b[t][j].is_zero() {
                        out[i][j] += &a[i][t] * &b[t][j];
                    }
                }
            }
        }
        out
    }

    /// Inverse of a square matrix, or `None` if singular.
    pub fn inverse(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
        let n = a.len();
        let aug: Vec<Vec<Rational>> = a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                r
            })
            .collect();
        let (m, pivots) = rref(&aug);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> RationalMatrix {
        RationalMatrix::from_i64(rows)
    }

    #[test]
    fn identity_has_full_rank() {
        let (r, k) = rank_and_kernel(&RationalMatrix::identity(2));
        assert_eq!((r, k.dim()), (2, 0));
    }

    #[test]
    fn zero_map_kernel_is_everything() {
        let (r, k) = rank_and_kernel(&RationalMatrix::zero(3, 4));
        assert_eq!((r, k.dim()), (0, 4));
    }

    #[test]
    fn rank_one_kernel_direction() {
        let a = m(&[vec![1, 2], vec![2, 4]]);
        let (r, k) = rank_and_kernel(&a);
        assert_eq!(r, 1);
        assert_eq!(k.dim(), 1);
        let expected = Subspace::span(2, &[SparseVec::from_dense(&[q(2), q(-1)])]);
        assert!(subspace_equal(&k, &expected).unwrap());
        assert!(a.apply(&k.basis[0]).is_zero());
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        // 70x70 block matrix forces the sparse path.
        let n = 70;
        let mut cols = Vec::new();
        for j in 0..n {
            let mut pairs = vec![(j, q(1 + (j as i64 % 3)))];
            if j + 1 < n && j % 4 != 0 {
                pairs.push((j + 1, q_frac(1, 2)));
            }
            if j % 5 == 0 && j > 0 {
                pairs = cols.last().map(|c: &SparseVec| c.iter().map(|(i, v)| (*i, v * q(2))).collect()).unwrap();
            }
            cols.push(SparseVec::from_pairs(pairs));
        }
        let big = RationalMatrix::from_columns(n, cols);
        let (r, k) = rank_and_kernel(&big);
        assert_eq!(r + k.dim(), n);
        for v in &k.basis {
            assert!(big.apply(v).is_zero());
        }
        assert_eq!(r, dense::rank(&big.to_dense()));
        assert_eq!(r, span_rank(n, big.columns()));
    }

    #[test]
    fn cohomology_of_trivial_complexes() {
        let n = 3;
        assert_eq!(cohomology_dim(&RationalMatrix::zero(n, 0), &RationalMatrix::zero(0, n)).unwrap(), n);
        assert_eq!(cohomology_dim(&RationalMatrix::identity(n), &RationalMatrix::zero(0, n)).unwrap(), 0);
        let d1 = m(&[vec![1], vec![0]]);
        let d2 = m(&[vec![0, 1]]);
        assert_eq!(cohomology_dim(&d1, &d2).unwrap(), 0);
    }

    #[test]
    fn nonzero_composition_is_reported() {
        let d = RationalMatrix::identity(2);
        assert!(matches!(cohomology_dim(&d, &d), Err(LinAlgError::CompositionNonzero { .. })));
    }

    #[test]
    fn subspace_comparisons() {
        let e1 = Subspace::span(2, &[SparseVec::unit(0)]);
        let e1b = Subspace::span(2, &[SparseVec::from_dense(&[q(2), q(0)])]);
        let e2 = Subspace::span(2, &[SparseVec::unit(1)]);
        assert!(subspace_equal(&e1, &e1b).unwrap());
        assert!(!subspace_equal(&e1, &e2).unwrap());
        let diag = Subspace::span(
            2,
            &[SparseVec::from_dense(&[q(1), q(1)]), SparseVec::from_dense(&[q(1), q(-1)])],
        );
        assert!(subspace_equal(&diag, &Subspace::full(2)).unwrap());
        assert!(subspace_equal(&e1, &Subspace::full(3)).is_err());
    }

    #[test]
    fn coordinates_recover_combination() {
        let mut e = SpanEchelon::new(3);
        let a = SparseVec::from_dense(&[q(1), q(2), q(0)]);
        let b = SparseVec::from_dense(&[q(0), q(1), q_frac(1, 3)]);
        assert!(e.insert(&a));
        assert!(e.insert(&b));
        let v = a.scale(&q(3)).add(&b.scale(&q_frac(-1, 2)));
        let c = e.coordinates(&v).unwrap();
        assert_eq!(c.get(0), q(3));
        assert_eq!(c.get(1), q_frac(-1, 2));
        assert!(e.coordinates(&SparseVec::unit(0)).is_none());
    }

    #[test]
    fn int_matrix_arithmetic() {
        let mut a = IntMatrix::zero(2);
        a.set(0, 1, 3);
        a.set(1, 0, 2);
        let sq = a.mul(&a);
        assert_eq!(sq, IntMatrix::identity(2).scale(6));
        assert_eq!(sq.shift(6), IntMatrix::zero(2));
        assert_eq!(a.content(), 1);
        assert_eq!(sq.content(), 6);
    }

    #[test]
    fn dense_inverse_roundtrip() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(1)]];
        let inv = dense::inverse(&a).unwrap();
        let prod = dense::mul(&a, &inv);
        assert_eq!(prod, vec![vec![q(1), q(0)], vec![q(0), q(1)]]);
        assert!(dense::inverse(&[vec![q(1), q(2)], vec![q(2), q(4)]]).is_none());
    }
}
