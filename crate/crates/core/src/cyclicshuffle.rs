//! Cyclic rotation `z`, the norm `N`, cyclic coinvariants (necklaces), the
//! modified shuffle operator `s = μΔ` with its variants `s̃` and `s̄`, and the
//! spectral idempotents `e(j)`, `ẽ(j)`.
//!
//! Every operator here permutes letters, so it preserves the letter multiset
//! of a word. Matrices are therefore assembled per content block, with exact
//! `i128` entries and Lagrange numerators over a common denominator.

use crate::exactlin::{gcd_i128, IntMatrix, Rational, RationalMatrix, SparseVec, SpanEchelon};
use crate::gradedspace::{enumerate_words, parity_sign, GradedBasis, IndexedBasis, Letter, Word, WordComb};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};
use thiserror::Error;

/// Largest weight for which integer idempotent tables are built; beyond it
/// the Lagrange numerators can exceed `i128`.
pub const MAX_TABLE_WEIGHT: usize = 10;

/// Largest content block for which dense integer tables are built.
pub const MAX_BLOCK_SIZE: usize = 1200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclicError {
    #[error("input mixes weights {0} and {1}")]
    MixedWeight(usize, usize),
    #[error("the modified shuffle operator needs words of weight at least one")]
    EmptyWord,
    #[error("weight {0} is beyond the operator table limit")]
    WeightTooLarge(usize),
    #[error("content block of {0} words is beyond the operator table limit")]
    BlockTooLarge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShuffleVariant {
    /// `s` acting on the whole word.
    Plain,
    /// `s̃ = 1 ⊗ s`: the first letter stays in place.
    Tilde,
}

/// The eigenvalue `λ_j = 2^j`.
pub fn eigenvalue(j: usize) -> i64 {
    1i64 << j
}

fn degree_sum(basis: &GradedBasis, letters: &[Letter]) -> i64 {
    letters.iter().map(|&l| basis.degree(l)).sum()
}

/// Moves the first `k` letters to the end: `x_{k+1}…x_n x_1…x_k` with sign
/// `(-1)^{|x_1…x_k||x_{k+1}…x_n|}`.
pub fn rotate_left(basis: &GradedBasis, w: &Word, k: usize) -> (Word, i64) {
    let n = w.weight();
    if n == 0 {
        return (w.clone(), 1);
    }
    let (a, b) = w.0.split_at(k % n);
    let sign = parity_sign(degree_sum(basis, a) * degree_sum(basis, b));
    let mut letters = Vec::with_capacity(n);
    letters.extend_from_slice(b);
    letters.extend_from_slice(a);
    (Word(letters), sign)
}

/// `z` on a single word: the first letter moves to the end, so that
/// `(1 - z^i)` sends `x_1…x_n` to the graded commutator of its first `i`
/// letters with the rest.
pub fn z_word(basis: &GradedBasis, w: &Word) -> (Word, i64) {
    rotate_left(basis, w, 1)
}

fn check_homogeneous(x: &WordComb) -> Result<Option<usize>, CyclicError> {
    let mut weight = None;
    for w in x.keys() {
        match weight {
            None => weight = Some(w.weight()),
            Some(n) if n != w.weight() => return Err(CyclicError::MixedWeight(n, w.weight())),
            _ => {}
        }
    }
    Ok(weight)
}

fn signed_map<F: Fn(&Word) -> Vec<(Word, i64)>>(x: &WordComb, f: F) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        for (v, s) in f(w) {
            if s > 0 {
                out.add_term(v, c.clone());
            } else if s < 0 {
                out.add_term(v, -c.clone());
            }
        }
    }
    out
}

pub fn act_z(basis: &GradedBasis, x: &WordComb) -> Result<WordComb, CyclicError> {
    check_homogeneous(x)?;
    Ok(signed_map(x, |w| vec![z_word(basis, w)]))
}

/// Terms of `N_n w = Σ_{k<n} z^k w`; empty for the empty word.
pub fn norm_terms(basis: &GradedBasis, w: &Word) -> Vec<(Word, i64)> {
    (0..w.weight()).map(|k| rotate_left(basis, w, k)).collect()
}

pub fn act_n(basis: &GradedBasis, x: &WordComb) -> Result<WordComb, CyclicError> {
    check_homogeneous(x)?;
    Ok(signed_map(x, |w| norm_terms(basis, w)))
}

pub fn act_one_minus_z(basis: &GradedBasis, x: &WordComb) -> Result<WordComb, CyclicError> {
    check_homogeneous(x)?;
    Ok(signed_map(x, |w| {
        if w.weight() == 0 {
            return Vec::new();
        }
        let (v, s) = z_word(basis, w);
        vec![(w.clone(), 1), (v, -s)]
    }))
}

/// `μΔ` on a single word: the sum over subsets `S` of positions of the word
/// `w|_S w|_{S^c}` with its Koszul sign. The empty word is fixed.
pub fn shuffle_terms(basis: &GradedBasis, letters: &[Letter]) -> Vec<(Vec<Letter>, i64)> {
    let n = letters.len();
    assert!(n < 31, "shuffle of a word of weight {n} is out of range");
    let degs: Vec<i64> = letters.iter().map(|&l| basis.degree(l)).collect();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut front = Vec::with_capacity(n);
        let mut back = Vec::with_capacity(n);
        let mut exp = 0i64;
        let mut back_deg = 0i64;
        for k in 0..n {
            if mask & (1 << k) != 0 {
                front.push(letters[k]);
                exp += degs[k] * back_deg;
            } else {
                back.push(letters[k]);
                back_deg += degs[k];
            }
        }
        front.extend_from_slice(&back);
        out.push((front, parity_sign(exp)));
    }
    out
}

fn variant_terms(basis: &GradedBasis, w: &Word, variant: ShuffleVariant) -> Vec<(Word, i64)> {
    match variant {
        ShuffleVariant::Plain => shuffle_terms(basis, &w.0).into_iter().map(|(l, s)| (Word(l), s)).collect(),
        ShuffleVariant::Tilde => {
            let (head, tail) = w.0.split_at(1.min(w.0.len()));
            shuffle_terms(basis, tail)
                .into_iter()
                .map(|(l, s)| {
                    let mut v = head.to_vec();
                    v.extend_from_slice(&l);
                    (Word(v), s)
                })
                .collect()
        }
    }
}

/// `s` (or `s̃`) on a combination of words of a common weight `n ≥ 1`.
pub fn shuffle_s(basis: &GradedBasis, x: &WordComb, variant: ShuffleVariant) -> Result<WordComb, CyclicError> {
    if check_homogeneous(x)? == Some(0) {
        return Err(CyclicError::EmptyWord);
    }
    Ok(signed_map(x, |w| variant_terms(basis, w, variant)))
}

/// Range of Lagrange nodes for the given variant on weight `n`: `s` on weight
/// `n` uses `λ_0..λ_n`, `s̃` uses `λ_0..λ_{n-1}`.
fn node_count(n: usize, variant: ShuffleVariant) -> usize {
    match variant {
        ShuffleVariant::Plain => n + 1,
        ShuffleVariant::Tilde => n,
    }
}

/// Applies `e(j)` (or `ẽ(j)`) to a combination of arbitrary weights through
/// the Lagrange product, one weight at a time.
pub fn apply_idempotent(
    basis: &GradedBasis,
    x: &WordComb,
    j: usize,
    variant: ShuffleVariant,
) -> Result<WordComb, CyclicError> {
    let mut by_weight: BTreeMap<usize, WordComb> = BTreeMap::new();
    for (w, c) in x.iter() {
        by_weight.entry(w.weight()).or_default().add_term(w.clone(), c.clone());
    }
    let mut out = WordComb::zero();
    for (n, part) in by_weight {
        if n == 0 {
            if variant == ShuffleVariant::Tilde {
                return Err(CyclicError::EmptyWord);
            }
            if j == 0 {
                out.add_assign(&part);
            }
            continue;
        }
        let nodes = node_count(n, variant);
        if j >= nodes {
            continue;
        }
        let mut y = part;
        for r in (0..nodes).filter(|&r| r != j) {
            let sy = signed_map(&y, |w| variant_terms(basis, w, variant));
            let shifted = sy.minus(&y.scale(&Rational::from_integer(BigInt::from(eigenvalue(r)))));
            let den = eigenvalue(j) - eigenvalue(r);
            y = shifted.scale(&Rational::new(BigInt::one(), BigInt::from(den)));
        }
        out.add_assign(&y);
    }
    Ok(out)
}

/// `s̄`: applies `s` to every value of a derivation given by its values on
/// generators. Constant values are fixed.
pub fn s_bar(basis: &GradedBasis, values: &[WordComb]) -> Vec<WordComb> {
    values.iter().map(|v| signed_map(v, |w| variant_terms(basis, w, ShuffleVariant::Plain))).collect()
}

/// Canonical necklace representative: the least rotation, with `w ≡ sign·rep`
/// in the coinvariants. `None` when the orbit identifies `w` with `-w`.
pub fn necklace_canonical(basis: &GradedBasis, w: &Word) -> Option<(Word, i64)> {
    let n = w.weight();
    if n == 0 {
        return Some((w.clone(), 1));
    }
    let mut best: Option<(Word, i64)> = None;
    let mut conflict = false;
    for k in 0..n {
        let (r, s) = rotate_left(basis, w, k);
        match &best {
            None => best = Some((r, s)),
            Some((b, bs)) => {
                if r < *b {
                    best = Some((r, s));
                    conflict = false;
                } else if r == *b && s != *bs {
                    conflict = true;
                }
            }
        }
    }
    if conflict {
        None
    } else {
        best
    }
}

/// Projection to cyclic coinvariants in canonical representatives.
pub fn necklace_project(basis: &GradedBasis, x: &WordComb) -> WordComb {
    signed_map(x, |w| necklace_canonical(basis, w).into_iter().collect())
}

pub fn is_necklace_rep(basis: &GradedBasis, w: &Word) -> bool {
    matches!(necklace_canonical(basis, w), Some((r, _)) if r == *w)
}

/// Canonical necklace representatives of one weight, in lex order.
pub fn enumerate_necklaces(basis: &GradedBasis, weight: usize, degree: Option<i64>) -> Vec<Word> {
    enumerate_words(basis, weight, degree).into_iter().filter(|w| is_necklace_rep(basis, w)).collect()
}

/// All distinct arrangements of a sorted letter multiset, in lex order.
pub fn arrangements(content: &[Letter]) -> Vec<Word> {
    let mut cur = content.to_vec();
    cur.sort_unstable();
    let mut out = vec![Word(cur.clone())];
    loop {
        let n = cur.len();
        if n < 2 {
            return out;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(Word(cur.clone()));
    }
}

/// Spectral idempotent in integer form: the matrix is `num / den`.
#[derive(Clone, Debug)]
pub struct IntIdempotent {
    pub num: IntMatrix,
    pub den: i128,
}

impl IntIdempotent {
    /// Dimension of the image, `trace(num) / den`.
    pub fn rank(&self) -> usize {
        (self.num.trace() / self.den) as usize
    }
}

/// Operator matrices on the words with one fixed letter content. Columns
/// index inputs, rows outputs.
#[derive(Debug)]
pub struct ContentBlock {
    pub content: Vec<Letter>,
    pub words: IndexedBasis<Word>,
    pub z: IntMatrix,
    pub norm: IntMatrix,
    pub s: IntMatrix,
    pub s_tilde: IntMatrix,
    pub e: Vec<IntIdempotent>,
    pub e_tilde: Vec<IntIdempotent>,
}

fn word_operator<F: Fn(&Word) -> Vec<(Word, i64)>>(words: &IndexedBasis<Word>, f: F) -> IntMatrix {
    let mut m = IntMatrix::zero(words.len());
    for (col, w) in words.items().iter().enumerate() {
        for (v, s) in f(w) {
            let row = words.position(&v).expect("operator left its content block");
            m.add_at(row, col, s as i128);
        }
    }
    m
}

/// Lagrange numerators `Π_{r≠j}(op − λ_r)` for `j < nodes`, via prefix and
/// suffix products, each reduced against its denominator.
fn lagrange_idempotents(op: &IntMatrix, nodes: usize) -> Option<Vec<IntIdempotent>> {
    let size = op.size();
    let factors: Vec<IntMatrix> = (0..nodes).map(|r| op.shift(eigenvalue(r) as i128)).collect();
    let mut prefix = vec![IntMatrix::identity(size)];
    for f in &factors {
        prefix.push(prefix.last().unwrap().try_mul(f)?);
    }
    let mut suffix = vec![IntMatrix::identity(size); nodes + 1];
    for r in (0..nodes).rev() {
        suffix[r] = factors[r].try_mul(&suffix[r + 1])?;
    }
    let mut out = Vec::with_capacity(nodes);
    for j in 0..nodes {
        let num = prefix[j].try_mul(&suffix[j + 1])?;
        let mut den: i128 = 1;
        for r in (0..nodes).filter(|&r| r != j) {
            den = den.checked_mul((eigenvalue(j) - eigenvalue(r)) as i128)?;
        }
        let mut g = gcd_i128(num.content(), den);
        if den < 0 {
            g = -g;
        }
        out.push(IntIdempotent { num: num.div_exact(g), den: den / g });
    }
    Some(out)
}

impl ContentBlock {
    pub fn build(basis: &GradedBasis, content: &[Letter]) -> Result<ContentBlock, CyclicError> {
        let n = content.len();
        if n == 0 {
            return Err(CyclicError::EmptyWord);
        }
        if n > MAX_TABLE_WEIGHT {
            return Err(CyclicError::WeightTooLarge(n));
        }
        let words = IndexedBasis::new(arrangements(content));
        if words.len() > MAX_BLOCK_SIZE {
            return Err(CyclicError::BlockTooLarge(words.len()));
        }
        let z = word_operator(&words, |w| vec![z_word(basis, w)]);
        let norm = word_operator(&words, |w| norm_terms(basis, w));
        let s = word_operator(&words, |w| variant_terms(basis, w, ShuffleVariant::Plain));
        let s_tilde = word_operator(&words, |w| variant_terms(basis, w, ShuffleVariant::Tilde));
        let e = lagrange_idempotents(&s, n + 1).ok_or(CyclicError::WeightTooLarge(n))?;
        let e_tilde = lagrange_idempotents(&s_tilde, n).ok_or(CyclicError::WeightTooLarge(n))?;
        let mut content = content.to_vec();
        content.sort_unstable();
        Ok(ContentBlock { content, words, z, norm, s, s_tilde, e, e_tilde })
    }

    pub fn weight(&self) -> usize {
        self.content.len()
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    /// `e(j)` or `ẽ(j)`; `None` when `j` is past the last eigenvalue.
    pub fn idempotent(&self, j: usize, variant: ShuffleVariant) -> Option<&IntIdempotent> {
        match variant {
            ShuffleVariant::Plain => self.e.get(j),
            ShuffleVariant::Tilde => self.e_tilde.get(j),
        }
    }

    /// Independent columns of the idempotent: a basis of its image, each
    /// vector scaled to integer entries.
    pub fn eigenbasis(&self, j: usize, variant: ShuffleVariant) -> Vec<WordComb> {
        let Some(idem) = self.idempotent(j, variant) else {
            return Vec::new();
        };
        let target = idem.rank();
        let mut ech = SpanEchelon::new(self.size());
        let mut out = Vec::with_capacity(target);
        for col in 0..self.size() {
            if out.len() == target {
                break;
            }
            let v = SparseVec::from_pairs(idem.num.column_entries(col).map(|(r, x)| (r, int_q(x))));
            if ech.insert(&v) {
                out.push(self.words.from_vec(&v));
            }
        }
        out
    }
}

fn int_q(x: i128) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// Lazily built cache of content blocks for one alphabet. Blocks are
/// immutable once built and shared between threads.
#[derive(Debug)]
pub struct CyclicOperatorTable {
    basis: GradedBasis,
    blocks: RwLock<HashMap<Vec<Letter>, Arc<ContentBlock>>>,
}

impl CyclicOperatorTable {
    pub fn new(basis: &GradedBasis) -> Self {
        CyclicOperatorTable { basis: basis.clone(), blocks: RwLock::new(HashMap::new()) }
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn block(&self, content: &[Letter]) -> Result<Arc<ContentBlock>, CyclicError> {
        let mut key = content.to_vec();
        key.sort_unstable();
        if let Some(b) = self.blocks.read().expect("table lock").get(&key) {
            return Ok(b.clone());
        }
        let built = Arc::new(ContentBlock::build(&self.basis, &key)?);
        let mut guard = self.blocks.write().expect("table lock");
        Ok(guard.entry(key).or_insert(built).clone())
    }

    /// `e(j)x` or `ẽ(j)x` through the block tables. Weight-0 terms follow the
    /// convention `e_0(0) = 1`.
    pub fn apply(&self, x: &WordComb, j: usize, variant: ShuffleVariant) -> Result<WordComb, CyclicError> {
        let mut by_content: BTreeMap<Vec<Letter>, Vec<(&Word, &Rational)>> = BTreeMap::new();
        for (w, c) in x.iter() {
            by_content.entry(w.content()).or_default().push((w, c));
        }
        let mut out = WordComb::zero();
        for (content, terms) in by_content {
            if content.is_empty() {
                if variant == ShuffleVariant::Tilde {
                    return Err(CyclicError::EmptyWord);
                }
                if j == 0 {
                    for (w, c) in terms {
                        out.add_term(w.clone(), c.clone());
                    }
                }
                continue;
            }
            let block = self.block(&content)?;
            let Some(idem) = block.idempotent(j, variant) else {
                continue;
            };
            let inv_den = Rational::new(BigInt::one(), BigInt::from(idem.den));
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (w, c) in terms {
                let col = block.words.position(w).expect("word in its own content block");
                for (row, v) in idem.num.column_entries(col) {
                    *acc.entry(row).or_insert_with(Rational::zero) += c * int_q(v);
                }
            }
            for (row, v) in acc {
                out.add_term(block.words.get(row).clone(), v * &inv_den);
            }
        }
        Ok(out)
    }

    /// Basis of the image of `e(j)` (or `ẽ(j)`) inside the span of `words`,
    /// which must be a union of whole content blocks.
    pub fn summand_basis(&self, words: &[Word], j: usize, variant: ShuffleVariant) -> Result<Vec<WordComb>, CyclicError> {
        let mut contents: BTreeMap<Vec<Letter>, usize> = BTreeMap::new();
        for w in words {
            *contents.entry(w.content()).or_default() += 1;
        }
        let mut out = Vec::new();
        for (content, count) in contents {
            if content.is_empty() {
                if variant == ShuffleVariant::Plain && j == 0 {
                    out.push(WordComb::basis(Word::empty()));
                }
                continue;
            }
            let block = self.block(&content)?;
            assert_eq!(block.size(), count, "word list is not a union of content blocks");
            out.extend(block.eigenbasis(j, variant));
        }
        Ok(out)
    }

    /// Matrix of an operator on all words of one weight, in lex order.
    pub fn weight_matrix(&self, weight: usize, op: TableOp) -> Result<RationalMatrix, CyclicError> {
        let words = IndexedBasis::new(enumerate_words(&self.basis, weight, None));
        let mut cols = Vec::with_capacity(words.len());
        for w in words.items() {
            let block = self.block(&w.content())?;
            let col = block.words.position(w).unwrap();
            let (m, den): (&IntMatrix, i128) = match op {
                TableOp::Z => (&block.z, 1),
                TableOp::N => (&block.norm, 1),
                TableOp::S => (&block.s, 1),
                TableOp::STilde => (&block.s_tilde, 1),
                TableOp::E(j) | TableOp::ETilde(j) => {
                    let variant = if matches!(op, TableOp::E(_)) { ShuffleVariant::Plain } else { ShuffleVariant::Tilde };
                    match block.idempotent(j, variant) {
                        Some(i) => (&i.num, i.den),
                        None => {
                            cols.push(SparseVec::new());
                            continue;
                        }
                    }
                }
            };
            let den_q = int_q(den);
            cols.push(SparseVec::from_pairs(
                m.column_entries(col).map(|(r, v)| (words.position(block.words.get(r)).unwrap(), int_q(v) / &den_q)),
            ));
        }
        Ok(RationalMatrix::from_columns(words.len(), cols))
    }

    /// Checks the spectral and cyclic identities on every content block of
    /// the given weight.
    pub fn check_identities(&self, weight: usize) -> Result<Vec<IdentityCheck>, CyclicError> {
        let mut results: BTreeMap<&'static str, bool> = BTreeMap::new();
        let contents = content_multisets(self.basis.len(), weight);
        for content in contents {
            let block = self.block(&content)?;
            for (name, ok) in block_identities(&block).ok_or(CyclicError::WeightTooLarge(weight))? {
                *results.entry(name).or_insert(true) &= ok;
            }
        }
        Ok(results.into_iter().map(|(name, holds)| IdentityCheck { name, weight, holds }).collect())
    }
}

/// Operators available from [`CyclicOperatorTable::weight_matrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableOp {
    Z,
    N,
    S,
    STilde,
    E(usize),
    ETilde(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub weight: usize,
    pub holds: bool,
}

/// Sorted letter multisets of the given size over `r` letters.
pub fn content_multisets(r: usize, weight: usize) -> Vec<Vec<Letter>> {
    fn rec(r: usize, remaining: usize, start: usize, cur: &mut Vec<Letter>, out: &mut Vec<Vec<Letter>>) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        for l in start..r {
            cur.push(l as Letter);
            rec(r, remaining - 1, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, weight, 0, &mut Vec::new(), &mut out);
    out
}

/// `a * ca == b * cb` with overflow reported as `None`.
fn cross_eq(a: &IntMatrix, ca: i128, b: &IntMatrix, cb: i128) -> Option<bool> {
    Some(a.try_scale(ca)? == b.try_scale(cb)?)
}

fn block_identities(b: &ContentBlock) -> Option<Vec<(&'static str, bool)>> {
    let n = b.weight();
    let size = b.size();
    let id = IntMatrix::identity(size);
    let one_minus_z = id.sub(&b.z);
    let mut out = Vec::new();

    let mut nu = id.clone();
    for i in 0..=n {
        nu = nu.try_mul(&b.s.shift(eigenvalue(i) as i128))?;
    }
    out.push(("minimal polynomial of s vanishes", nu.is_zero()));

    let mut zpow = id.clone();
    let mut zsum = IntMatrix::zero(size);
    for _ in 0..n {
        zsum = zsum.try_add(&zpow)?;
        zpow = zpow.try_mul(&b.z)?;
    }
    out.push(("z^n = id", zpow == id));
    out.push(("N = sum of powers of z", zsum == b.norm));

    for (name_sum, name_s, name_orth, idems, op) in [
        ("e(j) sum to id", "s = sum of eigenvalue-weighted e(j)", "e(i)e(j) = delta_ij e(i)", &b.e, &b.s),
        ("tilde e(j) sum to id", "tilde s = sum of eigenvalue-weighted tilde e(j)", "tilde e(i) tilde e(j) = delta_ij tilde e(i)", &b.e_tilde, &b.s_tilde),
    ] {
        let l = idems.iter().fold(1i128, |acc, e| acc / gcd_i128(acc, e.den) * e.den);
        let mut sum = IntMatrix::zero(size);
        let mut weighted = IntMatrix::zero(size);
        for (j, e) in idems.iter().enumerate() {
            let scaled = e.num.try_scale(l / e.den)?;
            sum = sum.try_add(&scaled)?;
            weighted = weighted.try_add(&scaled.try_scale(eigenvalue(j) as i128)?)?;
        }
        out.push((name_sum, sum == id.try_scale(l)?));
        out.push((name_s, weighted == op.try_scale(l)?));
        let mut orth = true;
        for (i, ei) in idems.iter().enumerate() {
            for (j, ej) in idems.iter().enumerate() {
                let prod = ei.num.try_mul(&ej.num)?;
                orth &= if i == j { cross_eq(&prod, 1, &ei.num, ei.den)? } else { prod.is_zero() };
            }
        }
        out.push((name_orth, orth));
    }

    out.push(("2 tilde s N = N s", b.s_tilde.try_mul(&b.norm)?.try_scale(2)? == b.norm.try_mul(&b.s)?));
    out.push(("s (1 - z) = (1 - z) tilde s", b.s.try_mul(&one_minus_z)? == one_minus_z.try_mul(&b.s_tilde)?));

    let mut tilde_norm = true;
    let mut plain_cyc = true;
    for j in 0..=n {
        // ẽ(j) N = N e(j+1), with ẽ(n) = 0.
        let lhs = b.e_tilde.get(j);
        let rhs = b.e.get(j + 1);
        tilde_norm &= match (lhs, rhs) {
            (Some(t), Some(e)) => cross_eq(&t.num.try_mul(&b.norm)?, e.den, &b.norm.try_mul(&e.num)?, t.den)?,
            (None, Some(e)) => b.norm.try_mul(&e.num)?.is_zero(),
            (Some(t), None) => t.num.try_mul(&b.norm)?.is_zero(),
            (None, None) => true,
        };
        // e(j)(1 - z) = (1 - z) ẽ(j).
        let e = &b.e[j];
        plain_cyc &= match b.e_tilde.get(j) {
            Some(t) => cross_eq(&e.num.try_mul(&one_minus_z)?, t.den, &one_minus_z.try_mul(&t.num)?, e.den)?,
            None => e.num.try_mul(&one_minus_z)?.is_zero(),
        };
    }
    out.push(("tilde e(j) N = N e(j+1)", tilde_norm));
    out.push(("e(j) (1 - z) = (1 - z) tilde e(j)", plain_cyc));
    Some(out)
}

/// Matrix of `e_n(j)` (or `ẽ_{n-1}(j)`) on all words of weight `n` in lex order.
pub fn idempotent_e(basis: &GradedBasis, j: usize, weight: usize, variant: ShuffleVariant) -> Result<RationalMatrix, CyclicError> {
    if weight == 0 {
        return Err(CyclicError::EmptyWord);
    }
    CyclicOperatorTable::new(basis).weight_matrix(
        weight,
        match variant {
            ShuffleVariant::Plain => TableOp::E(j),
            ShuffleVariant::Tilde => TableOp::ETilde(j),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::{q, q_frac, rank_and_kernel, Subspace};
    use crate::gradedspace::Side;
    use proptest::prelude::*;

    fn ab(da: i64, db: i64) -> GradedBasis {
        GradedBasis::from_pairs(&[("a", da), ("b", db)], Side::W).unwrap()
    }

    fn w(ls: &[Letter]) -> Word {
        Word::from_slice(ls)
    }

    fn wc(terms: &[(&[Letter], i64)]) -> WordComb {
        terms.iter().map(|(l, c)| (w(l), q(*c))).collect()
    }

    #[test]
    fn z_examples() {
        let odd = ab(1, 1);
        assert_eq!(act_z(&odd, &wc(&[(&[0], 1)])).unwrap(), wc(&[(&[0], 1)]));
        assert_eq!(act_z(&odd, &wc(&[(&[0, 1], 1)])).unwrap(), wc(&[(&[1, 0], -1)]));
        let even = GradedBasis::from_pairs(&[("a", 2), ("b", 2), ("c", 2)], Side::W).unwrap();
        assert_eq!(act_z(&even, &wc(&[(&[0, 1, 2], 1)])).unwrap(), wc(&[(&[1, 2, 0], 1)]));
        let mixed_deg = GradedBasis::from_pairs(&[("a", 1), ("b", 1), ("c", 2)], Side::W).unwrap();
        assert_eq!(act_z(&mixed_deg, &wc(&[(&[0, 1, 2], 1)])).unwrap(), wc(&[(&[1, 2, 0], -1)]));
        let mixed = wc(&[(&[0], 1), (&[0, 1], 1)]);
        assert_eq!(act_z(&odd, &mixed), Err(CyclicError::MixedWeight(1, 2)));
    }

    #[test]
    fn norm_examples() {
        let odd = ab(1, 1);
        let even = ab(2, 2);
        assert_eq!(act_n(&odd, &wc(&[(&[0], 1)])).unwrap(), wc(&[(&[0], 1)]));
        assert_eq!(act_n(&odd, &wc(&[(&[0, 1], 1)])).unwrap(), wc(&[(&[0, 1], 1), (&[1, 0], -1)]));
        assert_eq!(act_n(&even, &wc(&[(&[0, 1], 1)])).unwrap(), wc(&[(&[0, 1], 1), (&[1, 0], 1)]));
    }

    #[test]
    fn shuffle_examples() {
        let odd = ab(1, 1);
        let s = |x: &WordComb| shuffle_s(&odd, x, ShuffleVariant::Plain).unwrap();
        assert_eq!(s(&wc(&[(&[0], 1)])), wc(&[(&[0], 2)]));
        assert_eq!(s(&wc(&[(&[0, 1], 1)])), wc(&[(&[0, 1], 3), (&[1, 0], -1)]));
        let bracket = wc(&[(&[0, 1], 1), (&[1, 0], 1)]);
        assert_eq!(s(&bracket), bracket.scale(&q(2)));
        assert_eq!(shuffle_s(&odd, &wc(&[(&[], 1)]), ShuffleVariant::Plain), Err(CyclicError::EmptyWord));
    }

    #[test]
    fn idempotent_examples() {
        let odd = ab(1, 1);
        let e11 = idempotent_e(&odd, 1, 1, ShuffleVariant::Plain).unwrap();
        assert_eq!(e11, RationalMatrix::identity(2));
        assert!(idempotent_e(&odd, 0, 1, ShuffleVariant::Plain).unwrap().is_zero());
        let x = wc(&[(&[0, 1], 1)]);
        let half = q_frac(1, 2);
        let expected: WordComb = [(w(&[0, 1]), half.clone()), (w(&[1, 0]), half)].into_iter().collect();
        assert_eq!(apply_idempotent(&odd, &x, 1, ShuffleVariant::Plain).unwrap(), expected);
        let table = CyclicOperatorTable::new(&odd);
        assert_eq!(table.apply(&x, 1, ShuffleVariant::Plain).unwrap(), expected);
        // Past the top eigenvalue the idempotent vanishes.
        assert!(idempotent_e(&odd, 5, 2, ShuffleVariant::Plain).unwrap().is_zero());
    }

    #[test]
    fn idempotents_sum_to_identity() {
        let basis = GradedBasis::from_pairs(&[("a", 1), ("b", 2)], Side::W).unwrap();
        for n in 1..=6 {
            let mut sum = RationalMatrix::zero(1 << n, 1 << n);
            for j in 0..=n {
                sum = sum.add(&idempotent_e(&basis, j, n, ShuffleVariant::Plain).unwrap()).unwrap();
            }
            assert_eq!(sum, RationalMatrix::identity(1 << n), "weight {n}");
        }
    }

    #[test]
    fn table_identities_hold() {
        let basis = GradedBasis::from_pairs(&[("a", 1), ("b", 2), ("c", 3)], Side::W).unwrap();
        let table = CyclicOperatorTable::new(&basis);
        for n in 1..=5 {
            for check in table.check_identities(n).unwrap() {
                assert!(check.holds, "{} fails at weight {n}", check.name);
            }
        }
    }

    #[test]
    fn table_matches_vector_lagrange() {
        let basis = GradedBasis::from_pairs(&[("a", 1), ("b", 2)], Side::W).unwrap();
        let table = CyclicOperatorTable::new(&basis);
        let x = wc(&[(&[0, 1, 0, 1], 3), (&[1, 1, 0, 0], -2), (&[0, 0, 1], 5)]);
        for variant in [ShuffleVariant::Plain, ShuffleVariant::Tilde] {
            for j in 0..5 {
                assert_eq!(table.apply(&x, j, variant).unwrap(), apply_idempotent(&basis, &x, j, variant).unwrap());
            }
        }
    }

    #[test]
    fn necklace_examples() {
        let even = ab(2, 2);
        let odd = ab(1, 1);
        assert!(necklace_project(&even, &wc(&[(&[0, 1], 1), (&[0, 1], -1)])).is_zero());
        assert_eq!(necklace_project(&even, &wc(&[(&[1, 0], 1)])), wc(&[(&[0, 1], 1)]));
        assert!(necklace_project(&odd, &wc(&[(&[0, 0], 1)])).is_zero());
        assert_eq!(enumerate_necklaces(&even, 2, None), vec![w(&[0, 0]), w(&[0, 1]), w(&[1, 1])]);
    }

    #[test]
    fn necklace_kernel_is_image_of_one_minus_z() {
        let basis = GradedBasis::from_pairs(&[("a", 1), ("b", 2)], Side::W).unwrap();
        for n in 1..=5 {
            let words = IndexedBasis::new(enumerate_words(&basis, n, None));
            let necks = IndexedBasis::new(enumerate_necklaces(&basis, n, None));
            let proj = words.matrix_of(&necks, |x| necklace_project(&basis, &WordComb::basis(x.clone())));
            let (_, kernel) = rank_and_kernel(&proj);
            let images: Vec<SparseVec> = words
                .items()
                .iter()
                .map(|x| words.to_vec(&act_one_minus_z(&basis, &WordComb::basis(x.clone())).unwrap()))
                .collect();
            let image = Subspace::span(words.len(), &images);
            assert!(crate::exactlin::subspace_equal(&kernel, &image).unwrap(), "weight {n}");
        }
    }

    #[test]
    fn s_bar_examples() {
        let odd = ab(1, 1);
        let values = vec![wc(&[(&[1], 1)]), WordComb::zero()];
        assert_eq!(s_bar(&odd, &values), vec![wc(&[(&[1], 2)]), WordComb::zero()]);
        let bracket = vec![wc(&[(&[0, 1], 1), (&[1, 0], 1)])];
        assert_eq!(s_bar(&odd, &bracket)[0], bracket[0].scale(&q(2)));
    }

    #[test]
    fn eigenbasis_ranks_partition_block() {
        let basis = GradedBasis::from_pairs(&[("a", 1), ("b", 2), ("c", 1)], Side::W).unwrap();
        let table = CyclicOperatorTable::new(&basis);
        let block = table.block(&[0, 0, 1, 2]).unwrap();
        for variant in [ShuffleVariant::Plain, ShuffleVariant::Tilde] {
            let total: usize = (0..=4).map(|j| block.eigenbasis(j, variant).len()).sum();
            assert_eq!(total, block.size());
            for j in 0..=4 {
                for v in block.eigenbasis(j, variant) {
                    assert_eq!(table.apply(&v, j, variant).unwrap(), v);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn z_has_order_n(letters in proptest::collection::vec(0u16..3, 1..7)) {
            let basis = GradedBasis::from_pairs(&[("a", 1), ("b", 2), ("c", 3)], Side::W).unwrap();
            let mut x = WordComb::basis(Word(letters.clone()));
            for _ in 0..letters.len() {
                x = act_z(&basis, &x).unwrap();
            }
            prop_assert_eq!(x, WordComb::basis(Word(letters)));
        }

        #[test]
        fn one_minus_z_after_norm_vanishes(letters in proptest::collection::vec(0u16..3, 1..7)) {
            let basis = GradedBasis::from_pairs(&[("a", 1), ("b", 2), ("c", 3)], Side::W).unwrap();
            let x = WordComb::basis(Word(letters));
            let nx = act_n(&basis, &x).unwrap();
            prop_assert!(act_one_minus_z(&basis, &nx).unwrap().is_zero());
            prop_assert!(act_n(&basis, &act_one_minus_z(&basis, &x).unwrap()).unwrap().is_zero());
        }
    }
}
