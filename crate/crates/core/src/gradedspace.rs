//! Graded generators, words over them, Koszul signs, and the passage from
//! structure maps on `V` to components of a derivation on the dual alphabet.

use crate::exactlin::{Rational, RationalMatrix, SparseVec};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;
use std::fmt;
use thiserror::Error;

pub type Letter = u16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradedError {
    #[error("generator name `{0}` declared twice")]
    DuplicateName(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("structure map of arity {arity}: expected output degree {expected}, got {found} (`{output}`)")]
    DegreeMismatch { arity: usize, expected: i64, found: i64, output: String },
    #[error("letter index {0} out of range")]
    UnknownLetter(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
}

/// Whether degrees are those of `V` or of the suspended dual alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    V,
    W,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedBasis {
    generators: Vec<Generator>,
    side: Side,
}

impl GradedBasis {
    pub fn new(generators: Vec<Generator>, side: Side) -> Result<Self, GradedError> {
        let mut seen = HashSet::new();
        for g in &generators {
            if !seen.insert(g.name.clone()) {
                return Err(GradedError::DuplicateName(g.name.clone()));
            }
        }
        Ok(GradedBasis { generators, side })
    }

    /// Convenience constructor from `(name, degree)` pairs.
    pub fn from_pairs(pairs: &[(&str, i64)], side: Side) -> Result<Self, GradedError> {
        Self::new(pairs.iter().map(|(n, d)| Generator { name: n.to_string(), degree: *d }).collect(), side)
    }

    /// Alphabet of `n` letters all of W-degree `deg`, named `x0, x1, ...`.
    pub fn uniform(n: usize, deg: i64) -> Self {
        GradedBasis {
            generators: (0..n).map(|i| Generator { name: format!("x{i}"), degree: deg }).collect(),
            side: Side::W,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// The suspended dual alphabet: same names, degree raised by one.
    pub fn dual(&self) -> GradedBasis {
        match self.side {
            Side::W => self.clone(),
            Side::V => GradedBasis {
                generators: self
                    .generators
                    .iter()
                    .map(|g| Generator { name: g.name.clone(), degree: g.degree + 1 })
                    .collect(),
                side: Side::W,
            },
        }
    }

    /// Back from the dual alphabet to `V`.
    pub fn undual(&self) -> GradedBasis {
        match self.side {
            Side::V => self.clone(),
            Side::W => GradedBasis {
                generators: self
                    .generators
                    .iter()
                    .map(|g| Generator { name: g.name.clone(), degree: g.degree - 1 })
                    .collect(),
                side: Side::V,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn name(&self, i: usize) -> &str {
        &self.generators[i].name
    }

    pub fn degree(&self, letter: Letter) -> i64 {
        self.generators[letter as usize].degree
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn word_degree(&self, w: &Word) -> i64 {
        w.0.iter().map(|&l| self.degree(l)).sum()
    }

    /// All V-degrees nonnegative, i.e. all W-degrees at least one.
    pub fn is_connective(&self) -> bool {
        let shift = if self.side == Side::V { 0 } else { 1 };
        self.generators.iter().all(|g| g.degree >= shift)
    }

    /// Smallest W-degree among the letters.
    pub fn min_w_degree(&self) -> i64 {
        let shift = if self.side == Side::V { 1 } else { 0 };
        self.generators.iter().map(|g| g.degree + shift).min().unwrap_or(1)
    }

    pub fn is_odd(&self, letter: Letter) -> bool {
        self.degree(letter).rem_euclid(2) == 1
    }

    pub fn render(&self, w: &Word) -> String {
        if w.0.is_empty() {
            return "1".to_string();
        }
        w.0.iter().map(|&l| self.name(l as usize)).collect::<Vec<_>>().join(" ")
    }
}

/// Ordered sequence of letters. Weight is the length.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn from_slice(ls: &[Letter]) -> Self {
        Word(ls.to_vec())
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Sorted letter multiset; operators preserving it act block-wise.
    pub fn content(&self) -> Vec<Letter> {
        let mut c = self.0.clone();
        c.sort_unstable();
        c
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub fn parity_sign(exp: i64) -> i64 {
    if exp.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn sign_q(s: i64) -> Rational {
    if s >= 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Finite formal rational combination of keys; zero coefficients are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinComb<K: Ord> {
    terms: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for LinComb<K> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> LinComb<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(k: K, c: Rational) -> Self {
        let mut l = Self::zero();
        l.add_term(k, c);
        l
    }

    pub fn basis(k: K) -> Self {
        Self::single(k, Rational::one())
    }

    pub fn add_term(&mut self, k: K, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &LinComb<K>, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn add_assign(&mut self, other: &LinComb<K>) {
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v.clone());
        }
    }

    pub fn plus(&self, other: &LinComb<K>) -> LinComb<K> {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn minus(&self, other: &LinComb<K>) -> LinComb<K> {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn scale(&self, c: &Rational) -> LinComb<K> {
        let mut out = Self::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &K) -> Rational {
        self.terms.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    /// Applies a linear map given on keys.
    pub fn map_linear<K2: Ord + Clone, F: FnMut(&K) -> LinComb<K2>>(&self, mut f: F) -> LinComb<K2> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_scaled(&f(k), c);
        }
        out
    }

    pub fn retain<F: FnMut(&K) -> bool>(&mut self, mut f: F) {
        self.terms.retain(|k, _| f(k));
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rational)> for LinComb<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rational)>>(iter: I) -> Self {
        let mut l = LinComb::zero();
        for (k, c) in iter {
            l.add_term(k, c);
        }
        l
    }
}

pub type WordComb = LinComb<Word>;

/// Ordered list of keys with a reverse index, used to move between formal
/// combinations and coordinate vectors.
#[derive(Clone, Debug, Default)]
pub struct IndexedBasis<K: Ord + Clone + Hash + Eq> {
    items: Vec<K>,
    index: HashMap<K, usize>,
}

impl<K: Ord + Clone + Hash + Eq> IndexedBasis<K> {
    pub fn new(items: Vec<K>) -> Self {
        let index = items.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        IndexedBasis { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[K] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &K {
        &self.items[i]
    }

    pub fn position(&self, k: &K) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Coordinates of `x`; panics if `x` leaves the span of the basis keys.
    pub fn to_vec(&self, x: &LinComb<K>) -> SparseVec {
        SparseVec::from_pairs(x.iter().map(|(k, c)| {
            let i = self.index.get(k).unwrap_or_else(|| panic!("key outside the indexed basis"));
            (*i, c.clone())
        }))
    }

    /// Coordinates of `x`, or `None` if some key is not in the basis.
    pub fn try_to_vec(&self, x: &LinComb<K>) -> Option<SparseVec> {
        let mut pairs = Vec::with_capacity(x.len());
        for (k, c) in x.iter() {
            pairs.push((*self.index.get(k)?, c.clone()));
        }
        Some(SparseVec::from_pairs(pairs))
    }

    pub fn from_vec(&self, v: &SparseVec) -> LinComb<K> {
        v.iter().map(|(i, c)| (self.items[*i].clone(), c.clone())).collect()
    }

    /// Matrix whose column `j` holds the coordinates of `f(self[j])` in `target`.
    pub fn matrix_of<K2, F>(&self, target: &IndexedBasis<K2>, mut f: F) -> RationalMatrix
    where
        K2: Ord + Clone + Hash + Eq,
        F: FnMut(&K) -> LinComb<K2>,
    {
        let cols = self.items.iter().map(|k| target.to_vec(&f(k))).collect();
        RationalMatrix::from_columns(target.len(), cols)
    }
}

/// Concatenation product of two combinations of words.
pub fn concat_product(a: &WordComb, b: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (u, x) in a.iter() {
        for (v, y) in b.iter() {
            out.add_term(u.concat(v), x * y);
        }
    }
    out
}

/// Graded commutator `ab - (-1)^{|a||b|} ba` of homogeneous combinations.
pub fn graded_commutator(basis: &GradedBasis, a: &WordComb, b: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (u, x) in a.iter() {
        for (v, y) in b.iter() {
            let s = parity_sign(basis.word_degree(u) * basis.word_degree(v));
            out.add_term(u.concat(v), x * y);
            out.add_term(v.concat(u), -(x * y) * sign_q(s));
        }
    }
    out
}

/// Sign of rearranging letters: output slot `k` receives input `perm[k]`
/// (0-based). Each inverted pair contributes the product of its degrees.
pub fn koszul_sign(perm: &[usize], degrees: &[i64]) -> Result<i64, GradedError> {
    if perm.len() != degrees.len() {
        return Err(GradedError::LengthMismatch(perm.len(), degrees.len()));
    }
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(GradedError::NotAPermutation(n));
        }
        seen[p] = true;
    }
    let mut exp = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            if perm[i] > perm[j] {
                exp += degrees[perm[i]] * degrees[perm[j]];
            }
        }
    }
    Ok(parity_sign(exp))
}

/// Words of a given weight in lexicographic order, optionally filtered by
/// total degree.
pub fn enumerate_words(basis: &GradedBasis, weight: usize, degree: Option<i64>) -> Vec<Word> {
    let r = basis.len();
    let mut out = Vec::new();
    if weight == 0 {
        if degree.map_or(true, |d| d == 0) {
            out.push(Word::empty());
        }
        return out;
    }
    if r == 0 {
        return out;
    }
    let mut idx = vec![0usize; weight];
    loop {
        let w = Word(idx.iter().map(|&i| i as Letter).collect());
        if degree.map_or(true, |d| basis.word_degree(&w) == d) {
            out.push(w);
        }
        let mut k = weight;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < r {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Words of total degree `degree` with weight in `1..=max_weight`, ordered by
/// weight and then lexicographically.
pub fn words_of_degree(basis: &GradedBasis, degree: i64, max_weight: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for n in 1..=max_weight {
        words_rec(basis, n, degree, &mut Vec::new(), &mut out);
    }
    out
}

fn words_rec(basis: &GradedBasis, remaining: usize, degree: i64, prefix: &mut Vec<Letter>, out: &mut Vec<Word>) {
    if remaining == 0 {
        if degree == 0 {
            out.push(Word(prefix.clone()));
        }
        return;
    }
    let min = basis.generators().iter().map(|g| g.degree).min().unwrap_or(0);
    let max = basis.generators().iter().map(|g| g.degree).max().unwrap_or(0);
    let rem = remaining as i64;
    if degree < min * rem || degree > max * rem {
        return;
    }
    for l in 0..basis.len() {
        let d = basis.degree(l as Letter);
        prefix.push(l as Letter);
        words_rec(basis, remaining - 1, degree - d, prefix, out);
        prefix.pop();
    }
}

/// Canonical sorted form of a word in the symmetric algebra with its Koszul
/// sign, or `None` when an odd letter repeats.
pub fn symmetrize_word(basis: &GradedBasis, w: &Word) -> Option<(Word, i64)> {
    let mut letters = w.0.clone();
    let mut sign = 1i64;
    // Insertion sort, tracking the sign of each adjacent swap.
    for i in 1..letters.len() {
        let mut j = i;
        while j > 0 && letters[j - 1] > letters[j] {
            let (a, b) = (letters[j - 1], letters[j]);
            sign *= parity_sign(basis.degree(a) * basis.degree(b));
            letters.swap(j - 1, j);
            j -= 1;
        }
    }
    for k in 1..letters.len() {
        if letters[k] == letters[k - 1] && basis.is_odd(letters[k]) {
            return None;
        }
    }
    Some((Word(letters), sign))
}

/// Projects a tensor combination to the symmetric algebra.
pub fn symmetrize(basis: &GradedBasis, x: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        if let Some((s, sg)) = symmetrize_word(basis, w) {
            out.add_term(s, c * sign_q(sg));
        }
    }
    out
}

/// Sorted symmetric words of a given degree and weight range (odd letters at
/// most once).
pub fn sym_words_of_degree(basis: &GradedBasis, degree: i64, min_weight: usize, max_weight: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for n in min_weight.max(1)..=max_weight {
        sym_rec(basis, n, degree, 0, &mut Vec::new(), &mut out);
    }
    out
}

fn sym_rec(basis: &GradedBasis, remaining: usize, degree: i64, start: usize, prefix: &mut Vec<Letter>, out: &mut Vec<Word>) {
    if remaining == 0 {
        if degree == 0 {
            out.push(Word(prefix.clone()));
        }
        return;
    }
    for l in start..basis.len() {
        let letter = l as Letter;
        if basis.is_odd(letter) && prefix.last() == Some(&letter) {
            continue;
        }
        prefix.push(letter);
        let next = if basis.is_odd(letter) { l + 1 } else { l };
        sym_rec(basis, remaining - 1, degree - basis.degree(letter), next, prefix, out);
        prefix.pop();
    }
}

/// A structure map `V^{⊗i} -> V`: entry `(inputs, output, c)` means the value
/// on `v_inputs` has coefficient `c` on `v_output`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureMap {
    pub arity: usize,
    pub entries: Vec<(Vec<usize>, usize, Rational)>,
}

/// Suspension sign `(-1)^{Σ_k (i-k)|v_k|}` for inputs of V-degrees `degs`.
pub fn suspension_sign(v_degrees: &[i64]) -> i64 {
    let i = v_degrees.len() as i64;
    let exp: i64 = v_degrees.iter().enumerate().map(|(k, d)| (i - (k as i64 + 1)) * d).sum();
    parity_sign(exp)
}

/// Components of the derivation on the dual alphabet determined by the maps
/// `V^{⊗i} -> V`: the output generator receives the input word with the
/// suspension sign. `v_basis` carries V-degrees. Since a letter has degree one
/// more than its V-generator, the derivation has degree one exactly when each
/// arity-`i` map raises the total V-degree by `i - 2`.
pub fn dualize_structure(maps: &[StructureMap], v_basis: &GradedBasis) -> Result<Vec<WordComb>, GradedError> {
    let vb = v_basis.undual();
    let mut comps = vec![WordComb::zero(); vb.len()];
    for m in maps {
        for (inputs, output, c) in &m.entries {
            if *output >= vb.len() {
                return Err(GradedError::UnknownLetter(*output));
            }
            if let Some(bad) = inputs.iter().find(|&&i| i >= vb.len()) {
                return Err(GradedError::UnknownLetter(*bad));
            }
            let in_degs: Vec<i64> = inputs.iter().map(|&i| vb.generators()[i].degree).collect();
            let expected = in_degs.iter().sum::<i64>() + m.arity as i64 - 2;
            let found = vb.generators()[*output].degree;
            if inputs.len() != m.arity || expected != found {
                return Err(GradedError::DegreeMismatch {
                    arity: m.arity,
                    expected,
                    found,
                    output: vb.name(*output).to_string(),
                });
            }
            let s = suspension_sign(&in_degs);
            let w = Word(inputs.iter().map(|&i| i as Letter).collect());
            comps[*output].add_term(w, c * sign_q(s));
        }
    }
    Ok(comps)
}

/// Inverse of [`dualize_structure`]: recovers the structure maps by arity.
pub fn undualize_structure(components: &[WordComb], v_basis: &GradedBasis) -> Vec<StructureMap> {
    let vb = v_basis.undual();
    let mut by_arity: BTreeMap<usize, Vec<(Vec<usize>, usize, Rational)>> = BTreeMap::new();
    for (out, comp) in components.iter().enumerate() {
        for (w, c) in comp.iter() {
            let inputs: Vec<usize> = w.0.iter().map(|&l| l as usize).collect();
            let degs: Vec<i64> = inputs.iter().map(|&i| vb.generators()[i].degree).collect();
            let s = suspension_sign(&degs);
            by_arity.entry(w.weight()).or_default().push((inputs, out, c * sign_q(s)));
        }
    }
    by_arity.into_iter().map(|(arity, mut entries)| {
        entries.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        StructureMap { arity, entries }
    }).collect()
}

/// Applies the derivation with the given generator values and degree to a
/// word via the graded Leibniz rule. Terms beyond `max_weight` are dropped.
pub fn derivation_on_word(
    basis: &GradedBasis,
    values: &[WordComb],
    xi_degree: i64,
    w: &Word,
    max_weight: Option<usize>,
) -> WordComb {
    let mut out = WordComb::zero();
    let mut prefix_deg = 0i64;
    let n = w.weight();
    for k in 0..n {
        let letter = w.0[k];
        let s = sign_q(parity_sign(xi_degree * prefix_deg));
        for (v, c) in values[letter as usize].iter() {
            let new_weight = n - 1 + v.weight();
            if max_weight.map_or(false, |mw| new_weight > mw) {
                continue;
            }
            let mut letters = Vec::with_capacity(new_weight);
            letters.extend_from_slice(&w.0[..k]);
            letters.extend_from_slice(&v.0);
            letters.extend_from_slice(&w.0[k + 1..]);
            out.add_term(Word(letters), c * &s);
        }
        prefix_deg += basis.degree(letter);
    }
    out
}

pub fn derivation_on(
    basis: &GradedBasis,
    values: &[WordComb],
    xi_degree: i64,
    x: &WordComb,
    max_weight: Option<usize>,
) -> WordComb {
    x.map_linear(|w| derivation_on_word(basis, values, xi_degree, w, max_weight))
}
