//! Formal differential forms on the free commutative, associative and Lie
//! algebras over an alphabet `W`.
//!
//! 0-forms are cyclic words (associative), sorted words (commutative) or
//! their image under `l` (Lie). 1-forms are kept in the coordinates
//! `W ⊗ T̂W`: the word `x y_1…y_k` stands for `dx · y_1…y_k`. Closed 2-forms
//! are never expanded; a closed 2-form `dα` is carried by a representative
//! `α` of its class in `DR¹ / d(DR⁰)`.
//!
//! Operators act on the whole de Rham complex with its total grading, so `d`
//! has degree one, `L_ξ` degree `|ξ|` and `i_ξ` degree `|ξ| - 1`. Moving a
//! 0-form `a` past a 1-form `dl · b` costs `(-1)^{|a|(|l|+1+|b|)}`.

use crate::cyclicshuffle::{necklace_project, norm_terms, rotate_left, CyclicError, CyclicOperatorTable, ShuffleVariant};
use crate::exactlin::{span_rank, Rational, RationalMatrix, SparseVec};
use crate::gradedspace::{
    derivation_on, derivation_on_word, enumerate_words, graded_commutator, koszul_sign, parity_sign, sign_q,
    sym_words_of_degree, symmetrize, symmetrize_word, GradedBasis, IndexedBasis, Letter, Word, WordComb,
};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Com,
    Ass,
    Lie,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormDegree {
    Zero,
    One,
    /// A closed 2-form `dα`, stored as `α`.
    Closed2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonMap {
    /// Lie forms into associative forms.
    L,
    /// Associative forms onto commutative forms.
    P,
    /// Commutative 1-forms into associative 1-forms, `1 ⊗ i` on coordinates.
    J,
    /// Commutative 0-forms to cyclic words through the symmetriser.
    I,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormsError {
    #[error("form is not homogeneous in weight and degree")]
    NotHomogeneous,
    #[error("payload is not in canonical {0:?} coordinates")]
    NotCanonical(Geometry),
    #[error("payload is not in the image of the {0:?} forms")]
    NotInGeometryImage(Geometry),
    #[error("map {map:?} is not defined on {geometry:?} forms of degree {degree:?}")]
    IllegalPair { map: ComparisonMap, geometry: Geometry, degree: FormDegree },
    #[error("operation needs a form of degree {expected:?}, got {found:?}")]
    WrongFormDegree { expected: FormDegree, found: FormDegree },
    #[error("2-form has order {0}; only order zero is supported")]
    NonzeroOrder(i64),
    #[error("substitution must be the identity plus terms of weight at least two, of degree zero")]
    NotUnipotent,
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
}

/// A homogeneous form in the coordinates described at the top of the module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormRep {
    pub geometry: Geometry,
    pub form_degree: FormDegree,
    pub payload: WordComb,
}

impl FormRep {
    /// Number of letters in the payload words, `None` for the zero form.
    pub fn weight(&self) -> Option<usize> {
        self.payload.keys().next().map(|w| w.weight())
    }

    /// Order in the grading where `x dy` has order `ord x + ord y - 1`.
    pub fn order(&self) -> Option<i64> {
        let shift = match self.form_degree {
            FormDegree::Zero => 0,
            FormDegree::One => 1,
            FormDegree::Closed2 => 2,
        };
        self.weight().map(|w| w as i64 - shift)
    }

    pub fn is_zero(&self) -> bool {
        self.payload.is_zero()
    }
}

/// A derivation of the free algebra, given by its values on the letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub degree: i64,
    pub values: Vec<WordComb>,
}

impl VectorField {
    pub fn zero(basis: &GradedBasis, degree: i64) -> Self {
        VectorField { degree, values: vec![WordComb::zero(); basis.len()] }
    }

    /// `Σ x_i ∂_{x_i}`, which multiplies a word by its length.
    pub fn euler(basis: &GradedBasis) -> Self {
        VectorField { degree: 0, values: (0..basis.len()).map(|l| WordComb::basis(Word::letter(l as Letter))).collect() }
    }

    pub fn apply(&self, basis: &GradedBasis, x: &WordComb) -> WordComb {
        derivation_on(basis, &self.values, self.degree, x, None)
    }

    /// Graded commutator `ξγ - (-1)^{|ξ||γ|} γξ`.
    pub fn bracket(&self, basis: &GradedBasis, other: &VectorField) -> VectorField {
        let s = sign_q(parity_sign(self.degree * other.degree));
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| self.apply(basis, b).minus(&other.apply(basis, a).scale(&s)))
            .collect();
        VectorField { degree: self.degree + other.degree, values }
    }

    /// Order `k` when every value has weight `k + 1`.
    pub fn order(&self) -> Option<i64> {
        let mut weights = self.values.iter().flat_map(|v| v.keys().map(|w| w.weight()));
        let first = weights.next()?;
        weights.all(|w| w == first).then_some(first as i64 - 1)
    }
}

/// A degree-zero algebra automorphism `x ↦ x + (higher terms)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    values: Vec<WordComb>,
}

impl Substitution {
    pub fn identity(basis: &GradedBasis) -> Self {
        Substitution { values: VectorField::euler(basis).values }
    }

    /// The automorphism `x_l ↦ x_l + higher[l]`.
    pub fn unipotent(basis: &GradedBasis, higher: Vec<WordComb>) -> Result<Self, FormsError> {
        if higher.len() != basis.len() {
            return Err(FormsError::NotUnipotent);
        }
        let mut values = Vec::with_capacity(higher.len());
        for (l, h) in higher.into_iter().enumerate() {
            let d = basis.degree(l as Letter);
            if h.keys().any(|w| w.weight() < 2 || basis.word_degree(w) != d) {
                return Err(FormsError::NotUnipotent);
            }
            values.push(h.plus(&WordComb::basis(Word::letter(l as Letter))));
        }
        Ok(Substitution { values })
    }

    pub fn values(&self) -> &[WordComb] {
        &self.values
    }

    /// Image of a combination, dropping words longer than `cap`.
    pub fn apply(&self, x: &WordComb, cap: usize) -> WordComb {
        let mut out = WordComb::zero();
        for (w, c) in x.iter() {
            let mut acc = WordComb::basis(Word::empty());
            for &l in &w.0 {
                let mut next = WordComb::zero();
                for (u, a) in acc.iter() {
                    for (v, b) in self.values[l as usize].iter() {
                        if u.weight() + v.weight() <= cap {
                            next.add_term(u.concat(v), a * b);
                        }
                    }
                }
                acc = next;
            }
            out.add_scaled(&acc, c);
        }
        out
    }

    /// The inverse automorphism, exact through weight `cap`.
    pub fn inverse(&self, cap: usize) -> Substitution {
        let mut inv: Vec<WordComb> = (0..self.values.len()).map(|l| WordComb::basis(Word::letter(l as Letter))).collect();
        for _ in 0..cap {
            inv = inv
                .iter()
                .enumerate()
                .map(|(l, v)| {
                    let err = self.apply(v, cap).minus(&WordComb::basis(Word::letter(l as Letter)));
                    v.minus(&err)
                })
                .collect();
        }
        Substitution { values: inv }
    }

    /// `φ ξ φ⁻¹`, exact through weight `cap`.
    pub fn conjugate(&self, basis: &GradedBasis, xi: &VectorField, cap: usize) -> VectorField {
        let inv = self.inverse(cap);
        let values = inv
            .values
            .iter()
            .map(|v| self.apply(&truncate(&derivation_on(basis, &xi.values, xi.degree, v, Some(cap)), cap), cap))
            .collect();
        VectorField { degree: xi.degree, values }
    }
}

fn truncate(x: &WordComb, cap: usize) -> WordComb {
    let mut y = x.clone();
    y.retain(|w| w.weight() <= cap);
    y
}

fn letters_degree(basis: &GradedBasis, letters: &[Letter]) -> i64 {
    letters.iter().map(|&l| basis.degree(l)).sum()
}

/// Adds `c · a · dl · rest` in coordinates: the word `l rest a`.
fn push_theta(basis: &GradedBasis, out: &mut WordComb, a: &[Letter], l: Letter, rest: &[Letter], c: &Rational) {
    let da = letters_degree(basis, a);
    let s = parity_sign(da * (basis.degree(l) + 1 + letters_degree(basis, rest)));
    let mut letters = Vec::with_capacity(a.len() + rest.len() + 1);
    letters.push(l);
    letters.extend_from_slice(rest);
    letters.extend_from_slice(a);
    out.add_term(Word(letters), c * sign_q(s));
}

/// Adds `c · a · d(u) · rest` in coordinates.
fn push_d_between(basis: &GradedBasis, out: &mut WordComb, a: &[Letter], u: &[Letter], rest: &[Letter], c: &Rational) {
    let mut prefix_deg = 0i64;
    for i in 0..u.len() {
        let mut left = a.to_vec();
        left.extend_from_slice(&u[..i]);
        let mut right = u[i + 1..].to_vec();
        right.extend_from_slice(rest);
        push_theta(basis, out, &left, u[i], &right, &(c * sign_q(parity_sign(prefix_deg))));
        prefix_deg += basis.degree(u[i]);
    }
}

/// Full symmetriser `Σ_σ σ · y` with Koszul signs.
pub fn symmetriser(basis: &GradedBasis, y: &Word) -> WordComb {
    let n = y.weight();
    let degrees: Vec<i64> = y.0.iter().map(|&l| basis.degree(l)).collect();
    let mut out = WordComb::zero();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let s = koszul_sign(&perm, &degrees).expect("permutation of matching length");
        out.add_term(Word(perm.iter().map(|&i| y.0[i]).collect()), sign_q(s));
        if !next_permutation(&mut perm) {
            return out;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn factorial(n: usize) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * Rational::from_integer((k as i64).into()))
}

/// One identity of the Cartan calculus checked on a spanning set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CartanCheck {
    pub identity: String,
    pub form_degree: u8,
    pub checked: usize,
    pub failures: usize,
}

impl CartanCheck {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Ranks of `DR⁰ → DR¹ → DR²` at one weight. Closedness of a 1-form is
/// decided through `i_E d`, which has the same kernel as `d` away from
/// weight zero because `L_E = [i_E, d]` is invertible there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoincareSlice {
    pub geometry: Geometry,
    pub weight: usize,
    pub dim0: usize,
    pub dim1: usize,
    pub rank_d0: usize,
    pub rank_contracted_d1: usize,
    pub h0: usize,
    pub h1: usize,
    pub euler_scales: bool,
}

impl PoincareSlice {
    /// Expected cohomology: the constants in weight zero for the commutative
    /// and associative geometries, nothing otherwise.
    pub fn pass(&self) -> bool {
        let h0 = usize::from(self.weight == 0 && self.geometry != Geometry::Lie);
        self.h0 == h0 && self.h1 == 0 && self.euler_scales
    }
}

/// Closed 2-forms of one order and degree against the commutators they
/// correspond to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaSlice {
    pub geometry: Geometry,
    pub order: usize,
    pub degree: i64,
    pub closed_dim: usize,
    pub commutator_dim: usize,
    pub image_rank: usize,
    pub image_inside: bool,
}

impl ZetaSlice {
    pub fn pass(&self) -> bool {
        self.image_inside && self.closed_dim == self.commutator_dim && self.image_rank == self.closed_dim
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonCheck {
    pub identity: String,
    pub order: usize,
    pub checked: usize,
    pub failures: usize,
}

impl ComparisonCheck {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Matrix `G[k][l] = ⟨x_k, x_l⟩` of the bilinear form of an order-zero
/// 2-form on a basis of `U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearFormMatrix {
    pub degrees: Vec<i64>,
    pub matrix: RationalMatrix,
    /// The form lies in `(Λ²U)*`, the image of `1 - z` on two letters.
    pub skew: bool,
}

impl BilinearFormMatrix {
    pub fn is_nondegenerate(&self) -> bool {
        self.matrix.rank() == self.degrees.len()
    }
}

/// Bilinear form of `ω = Σ a_ij dx_i* dx_j*`, given as the combination of
/// two-letter words `[i, j]` with coefficients `a_ij`. `u` carries the
/// degrees of the basis of `U`; the dual letters have the same parity.
pub fn bilinear_form(u: &GradedBasis, omega: &WordComb) -> Result<BilinearFormMatrix, FormsError> {
    if let Some(w) = omega.keys().find(|w| w.weight() != 2) {
        return Err(FormsError::NonzeroOrder(w.weight() as i64 - 2));
    }
    let n = u.len();
    let dual = GradedBasis::new(
        u.generators()
            .iter()
            .map(|g| crate::gradedspace::Generator { name: g.name.clone(), degree: -g.degree })
            .collect(),
        u.side(),
    )
    .expect("names already distinct");
    // α = Σ a_ij x_i* dx_j* is closed-2 representative of ω.
    let mut alpha = WordComb::zero();
    for (w, a) in omega.iter() {
        let (i, j) = (w.0[0], w.0[1]);
        push_theta(&dual, &mut alpha, &[i], j, &[], a);
    }
    let zeta = one_minus_z(&dual, &alpha);
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for (w, c) in zeta.iter() {
        rows[w.0[0] as usize][w.0[1] as usize] = c.clone();
    }
    let z_zeta = {
        let mut out = WordComb::zero();
        for (w, c) in zeta.iter() {
            let (v, s) = rotate_left(&dual, w, 1);
            out.add_term(v, c * sign_q(s));
        }
        out
    };
    Ok(BilinearFormMatrix {
        degrees: u.generators().iter().map(|g| g.degree).collect(),
        matrix: RationalMatrix::from_dense(&rows),
        skew: z_zeta.plus(&zeta).is_zero(),
    })
}

fn one_minus_z(basis: &GradedBasis, x: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        out.add_term(w.clone(), c.clone());
        let (v, s) = rotate_left(basis, w, 1);
        out.add_term(v, -(c * sign_q(s)));
    }
    out
}

fn norm(basis: &GradedBasis, x: &WordComb) -> WordComb {
    let mut out = WordComb::zero();
    for (w, c) in x.iter() {
        for (v, s) in norm_terms(basis, w) {
            out.add_term(v, c * sign_q(s));
        }
    }
    out
}

/// Forms over one alphabet, with the shuffle tables used to cut out the
/// Lie geometry.
pub struct FormCalculus {
    basis: GradedBasis,
    table: CyclicOperatorTable,
}

impl FormCalculus {
    pub fn new(basis: GradedBasis) -> Self {
        let table = CyclicOperatorTable::new(&basis);
        FormCalculus { basis, table }
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    // ---- coordinates -------------------------------------------------

    fn canon0(&self, g: Geometry, x: &WordComb) -> WordComb {
        match g {
            Geometry::Com => symmetrize(&self.basis, x),
            Geometry::Ass | Geometry::Lie => necklace_project(&self.basis, x),
        }
    }

    fn canon1(&self, g: Geometry, x: &WordComb) -> WordComb {
        match g {
            Geometry::Com => {
                let mut out = WordComb::zero();
                for (w, c) in x.iter() {
                    if let Some((rest, s)) = symmetrize_word(&self.basis, &Word::from_slice(&w.0[1..])) {
                        let mut letters = vec![w.0[0]];
                        letters.extend(rest.0);
                        out.add_term(Word(letters), c * sign_q(s));
                    }
                }
                out
            }
            Geometry::Ass | Geometry::Lie => x.clone(),
        }
    }

    fn canon(&self, g: Geometry, fd: FormDegree, x: &WordComb) -> WordComb {
        match fd {
            FormDegree::Zero => self.canon0(g, x),
            FormDegree::One | FormDegree::Closed2 => self.canon1(g, x),
        }
    }

    fn in_lie_one(&self, x: &WordComb) -> Result<bool, FormsError> {
        if x.keys().any(|w| w.weight() == 0) {
            return Ok(false);
        }
        Ok(self.table.apply(x, 1, ShuffleVariant::Tilde)? == *x)
    }

    fn in_lie_zero(&self, x: &WordComb) -> Result<bool, FormsError> {
        if x.keys().any(|w| w.weight() == 0) {
            return Ok(false);
        }
        // A cyclic word lies in the image of W ⊗ Lie exactly when its norm does.
        self.in_lie_one(&norm(&self.basis, x))
    }

    fn is_lie_value(&self, x: &WordComb) -> Result<bool, FormsError> {
        if x.keys().any(|w| w.weight() == 0) {
            return Ok(false);
        }
        Ok(self.table.apply(x, 1, ShuffleVariant::Plain)? == *x)
    }

    /// Validates a payload and wraps it as a form.
    pub fn form(&self, geometry: Geometry, form_degree: FormDegree, payload: WordComb) -> Result<FormRep, FormsError> {
        let mut shape = None;
        for w in payload.keys() {
            let key = (w.weight(), self.basis.word_degree(w));
            if *shape.get_or_insert(key) != key {
                return Err(FormsError::NotHomogeneous);
            }
        }
        if form_degree != FormDegree::Zero && payload.keys().any(|w| w.weight() == 0) {
            return Err(FormsError::NotCanonical(geometry));
        }
        if self.canon(geometry, form_degree, &payload) != payload {
            return Err(FormsError::NotCanonical(geometry));
        }
        if geometry == Geometry::Lie && !payload.is_zero() {
            let inside = match form_degree {
                FormDegree::Zero => self.in_lie_zero(&payload)?,
                FormDegree::One | FormDegree::Closed2 => self.in_lie_one(&payload)?,
            };
            if !inside {
                return Err(FormsError::NotInGeometryImage(Geometry::Lie));
            }
        }
        Ok(FormRep { geometry, form_degree, payload })
    }

    /// Brings an arbitrary combination to canonical coordinates; for the Lie
    /// geometry the 1-form part is projected by `ẽ(1)`.
    pub fn project(&self, geometry: Geometry, form_degree: FormDegree, x: &WordComb) -> Result<FormRep, FormsError> {
        let mut y = x.clone();
        if geometry == Geometry::Lie {
            y.retain(|w| w.weight() > 0);
            y = self.table.apply(&y, 1, ShuffleVariant::Tilde)?;
            if form_degree == FormDegree::Zero {
                y = necklace_project(&self.basis, &y);
            }
        }
        self.form(geometry, form_degree, self.canon(geometry, form_degree, &y))
    }

    /// Projects the values of a vector field into the geometry: symmetrised
    /// for `Com`, by `e(1)` for `Lie`.
    pub fn project_field(&self, geometry: Geometry, xi: &VectorField) -> Result<VectorField, FormsError> {
        let values = xi
            .values
            .iter()
            .map(|v| match geometry {
                Geometry::Com => Ok(symmetrize(&self.basis, v)),
                Geometry::Ass => Ok(v.clone()),
                Geometry::Lie => {
                    let mut v = v.clone();
                    v.retain(|w| w.weight() > 0);
                    self.table.apply(&v, 1, ShuffleVariant::Plain).map_err(FormsError::from)
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(VectorField { degree: xi.degree, values })
    }

    fn check_field(&self, geometry: Geometry, xi: &VectorField) -> Result<(), FormsError> {
        if geometry == Geometry::Lie {
            for v in &xi.values {
                if !v.is_zero() && !self.is_lie_value(v)? {
                    return Err(FormsError::NotInGeometryImage(Geometry::Lie));
                }
            }
        }
        Ok(())
    }

    // ---- raw operators in associative coordinates ----------------------

    fn raw_d0(&self, x: &WordComb) -> WordComb {
        norm(&self.basis, x)
    }

    fn raw_lie1(&self, xi: &VectorField, alpha: &WordComb) -> WordComb {
        let b = &self.basis;
        let mut out = WordComb::zero();
        let s1 = sign_q(parity_sign(xi.degree));
        for (w, c) in alpha.iter() {
            let (x, y) = (w.0[0], &w.0[1..]);
            // L_ξ(dx) = (-1)^{|ξ|} d ξ(x).
            for (u, cu) in xi.values[x as usize].iter() {
                push_d_between(b, &mut out, &[], &u.0, y, &(c * cu * &s1));
            }
            let s2 = sign_q(parity_sign(xi.degree * (b.degree(x) + 1)));
            for (v, cv) in derivation_on_word(b, &xi.values, xi.degree, &Word::from_slice(y), None).iter() {
                let mut letters = vec![x];
                letters.extend_from_slice(&v.0);
                out.add_term(Word(letters), c * cv * &s2);
            }
        }
        out
    }

    fn raw_contract1(&self, xi: &VectorField, alpha: &WordComb) -> WordComb {
        let mut out = WordComb::zero();
        for (w, c) in alpha.iter() {
            let (x, y) = (w.0[0], &w.0[1..]);
            for (u, cu) in xi.values[x as usize].iter() {
                let mut letters = u.0.clone();
                letters.extend_from_slice(y);
                out.add_term(Word(letters), c * cu);
            }
        }
        out
    }

    /// `i_ξ d α` for a 1-form `α`, computed without a basis of 2-forms:
    /// `d(dx·y) = (-1)^{|x|+1} dx·dy` and
    /// `i_ξ(dx·dy) = ξ(x)·dy + (-1)^{(|ξ|-1)(|x|+1)} dx·ξ(y)`.
    fn raw_contract_d1(&self, xi: &VectorField, alpha: &WordComb) -> WordComb {
        let b = &self.basis;
        let mut out = WordComb::zero();
        for (w, c) in alpha.iter() {
            let (x, y) = (w.0[0], &w.0[1..]);
            let s0 = parity_sign(b.degree(x) + 1);
            for (u, cu) in xi.values[x as usize].iter() {
                push_d_between(b, &mut out, &u.0, y, &[], &(c * cu * sign_q(s0)));
            }
            let s2 = sign_q(s0 * parity_sign((xi.degree - 1) * (b.degree(x) + 1)));
            for (v, cv) in derivation_on_word(b, &xi.values, xi.degree, &Word::from_slice(y), None).iter() {
                let mut letters = vec![x];
                letters.extend_from_slice(&v.0);
                out.add_term(Word(letters), c * cv * &s2);
            }
        }
        out
    }

    fn raw_pullback1(&self, phi: &Substitution, alpha: &WordComb, cap: usize) -> WordComb {
        let mut out = WordComb::zero();
        for (w, c) in alpha.iter() {
            let (x, y) = (w.0[0], &w.0[1..]);
            let py = phi.apply(&WordComb::basis(Word::from_slice(y)), cap);
            for (u, cu) in phi.values[x as usize].iter() {
                for (v, cv) in py.iter() {
                    if u.weight() + v.weight() <= cap {
                        push_d_between(&self.basis, &mut out, &[], &u.0, &v.0, &(c * cu * cv));
                    }
                }
            }
        }
        out
    }

    // ---- operators on forms ---------------------------------------------

    fn wrap(&self, g: Geometry, fd: FormDegree, raw: &WordComb) -> FormRep {
        FormRep { geometry: g, form_degree: fd, payload: self.canon(g, fd, raw) }
    }

    /// `d` on 0-forms: in coordinates the norm of any representative word.
    pub fn d0(&self, x: &FormRep) -> Result<FormRep, FormsError> {
        if x.form_degree != FormDegree::Zero {
            return Err(FormsError::WrongFormDegree { expected: FormDegree::Zero, found: x.form_degree });
        }
        Ok(self.wrap(x.geometry, FormDegree::One, &self.raw_d0(&x.payload)))
    }

    /// The class of `dα` for a 1-form `α`.
    pub fn closed_of(&self, alpha: &FormRep) -> Result<FormRep, FormsError> {
        if alpha.form_degree != FormDegree::One {
            return Err(FormsError::WrongFormDegree { expected: FormDegree::One, found: alpha.form_degree });
        }
        Ok(FormRep { form_degree: FormDegree::Closed2, ..alpha.clone() })
    }

    /// Lie derivative; preserves form degree.
    pub fn lie(&self, xi: &VectorField, x: &FormRep) -> Result<FormRep, FormsError> {
        self.check_field(x.geometry, xi)?;
        let g = x.geometry;
        Ok(match x.form_degree {
            FormDegree::Zero => self.wrap(g, FormDegree::Zero, &xi.apply(&self.basis, &x.payload)),
            FormDegree::One => self.wrap(g, FormDegree::One, &self.raw_lie1(xi, &x.payload)),
            // L_ξ dα = (-1)^{|ξ|} d L_ξ α.
            FormDegree::Closed2 => {
                let s = sign_q(parity_sign(xi.degree));
                self.wrap(g, FormDegree::Closed2, &self.raw_lie1(xi, &x.payload).scale(&s))
            }
        })
    }

    /// Contraction; lowers form degree by one and vanishes on 0-forms, where
    /// the zero 0-form is returned.
    pub fn contraction(&self, xi: &VectorField, x: &FormRep) -> Result<FormRep, FormsError> {
        self.check_field(x.geometry, xi)?;
        let g = x.geometry;
        Ok(match x.form_degree {
            FormDegree::Zero => FormRep { geometry: g, form_degree: FormDegree::Zero, payload: WordComb::zero() },
            FormDegree::One => self.wrap(g, FormDegree::Zero, &self.raw_contract1(xi, &x.payload)),
            FormDegree::Closed2 => self.wrap(g, FormDegree::One, &self.raw_contract_d1(xi, &x.payload)),
        })
    }

    /// `φ*`, exact through weight `cap`.
    pub fn pullback(&self, phi: &Substitution, x: &FormRep, cap: usize) -> Result<FormRep, FormsError> {
        let g = x.geometry;
        Ok(match x.form_degree {
            FormDegree::Zero => self.wrap(g, FormDegree::Zero, &phi.apply(&x.payload, cap)),
            fd => self.wrap(g, fd, &self.raw_pullback1(phi, &x.payload, cap)),
        })
    }

    /// The comparison maps between the three geometries.
    pub fn compare(&self, x: &FormRep, map: ComparisonMap) -> Result<FormRep, FormsError> {
        let illegal = FormsError::IllegalPair { map, geometry: x.geometry, degree: x.form_degree };
        let fd = x.form_degree;
        match (map, x.geometry, fd) {
            (ComparisonMap::L, Geometry::Lie, _) => Ok(FormRep { geometry: Geometry::Ass, ..x.clone() }),
            (ComparisonMap::P, Geometry::Ass, _) => Ok(self.wrap(Geometry::Com, fd, &x.payload)),
            (ComparisonMap::J, Geometry::Com, FormDegree::One | FormDegree::Closed2) => {
                let mut out = WordComb::zero();
                for (w, c) in x.payload.iter() {
                    let tail = symmetriser(&self.basis, &Word::from_slice(&w.0[1..]));
                    for (v, cv) in tail.iter() {
                        let mut letters = vec![w.0[0]];
                        letters.extend_from_slice(&v.0);
                        out.add_term(Word(letters), c * cv);
                    }
                }
                Ok(FormRep { geometry: Geometry::Ass, form_degree: fd, payload: out })
            }
            (ComparisonMap::I, Geometry::Com, FormDegree::Zero) => {
                let mut out = WordComb::zero();
                for (w, c) in x.payload.iter() {
                    out.add_scaled(&symmetriser(&self.basis, w), c);
                }
                Ok(self.wrap(Geometry::Ass, FormDegree::Zero, &out))
            }
            _ => Err(illegal),
        }
    }

    /// `ζ(dα) = (1 - z) α` for the associative picture of `α`.
    pub fn zeta(&self, omega: &FormRep) -> Result<WordComb, FormsError> {
        if omega.form_degree != FormDegree::Closed2 {
            return Err(FormsError::WrongFormDegree { expected: FormDegree::Closed2, found: omega.form_degree });
        }
        let ass = match omega.geometry {
            Geometry::Ass => omega.clone(),
            Geometry::Lie => {
                if !self.in_lie_one(&omega.payload)? && !omega.payload.is_zero() {
                    return Err(FormsError::NotInGeometryImage(Geometry::Lie));
                }
                self.compare(omega, ComparisonMap::L)?
            }
            Geometry::Com => {
                if self.canon1(Geometry::Com, &omega.payload) != omega.payload {
                    return Err(FormsError::NotInGeometryImage(Geometry::Com));
                }
                self.compare(omega, ComparisonMap::J)?
            }
        };
        Ok(one_minus_z(&self.basis, &ass.payload))
    }

    // ---- spanning sets ----------------------------------------------------

    /// Spanning set of the 0-forms of one weight.
    pub fn span0(&self, g: Geometry, weight: usize) -> Result<Vec<WordComb>, FormsError> {
        Ok(match g {
            Geometry::Ass => crate::cyclicshuffle::enumerate_necklaces(&self.basis, weight, None)
                .into_iter()
                .map(WordComb::basis)
                .collect(),
            Geometry::Com => self.sym_words(weight).into_iter().map(WordComb::basis).collect(),
            Geometry::Lie => self
                .span1(Geometry::Lie, weight)?
                .iter()
                .map(|v| necklace_project(&self.basis, v))
                .filter(|v| !v.is_zero())
                .collect(),
        })
    }

    /// Basis of the 1-forms of one weight.
    pub fn span1(&self, g: Geometry, weight: usize) -> Result<Vec<WordComb>, FormsError> {
        if weight == 0 {
            return Ok(Vec::new());
        }
        Ok(match g {
            Geometry::Ass => enumerate_words(&self.basis, weight, None).into_iter().map(WordComb::basis).collect(),
            Geometry::Com => {
                let mut out = Vec::new();
                for l in 0..self.basis.len() {
                    for rest in self.sym_words(weight - 1) {
                        let mut letters = vec![l as Letter];
                        letters.extend(rest.0);
                        out.push(WordComb::basis(Word(letters)));
                    }
                }
                out
            }
            Geometry::Lie => {
                let words = enumerate_words(&self.basis, weight, None);
                self.table.summand_basis(&words, 1, ShuffleVariant::Tilde)?
            }
        })
    }

    fn sym_words(&self, weight: usize) -> Vec<Word> {
        if weight == 0 {
            return vec![Word::empty()];
        }
        let mut degrees: Vec<i64> = enumerate_words(&self.basis, weight, None)
            .iter()
            .map(|w| self.basis.word_degree(w))
            .collect();
        degrees.sort_unstable();
        degrees.dedup();
        degrees.into_iter().flat_map(|d| sym_words_of_degree(&self.basis, d, weight, weight)).collect()
    }

    fn rank_of(&self, vectors: &[WordComb]) -> usize {
        let mut words: Vec<Word> = vectors.iter().flat_map(|v| v.keys().cloned()).collect();
        words.sort();
        words.dedup();
        let index = IndexedBasis::new(words);
        let cols: Vec<SparseVec> = vectors.iter().map(|v| index.to_vec(v)).collect();
        span_rank(index.len(), &cols)
    }

    // ---- checks -------------------------------------------------------------

    /// The identities of the Cartan calculus for `ξ`, `γ` and the automorphism
    /// `φ`, on every spanning element of form degree at most one and weight
    /// at most `max_weight`. `[i_ξ, i_γ] = 0` is checked on exact 2-forms,
    /// `[L_ξ, d] = 0` on 0-forms.
    pub fn cartan_suite(
        &self,
        g: Geometry,
        xi: &VectorField,
        gamma: &VectorField,
        phi: &Substitution,
        max_weight: usize,
    ) -> Result<Vec<CartanCheck>, FormsError> {
        self.check_field(g, xi)?;
        self.check_field(g, gamma)?;
        let b = &self.basis;
        let bracket = xi.bracket(b, gamma);
        let order_room = [xi, gamma]
            .iter()
            .flat_map(|v| v.values.iter().flat_map(|c| c.keys().map(|w| w.weight())))
            .max()
            .unwrap_or(1);
        let cap = max_weight + order_room.saturating_sub(1) + 1;
        let xi_conj = phi.conjugate(b, xi, cap);
        let sx = sign_q(parity_sign(xi.degree));
        let mut checks: BTreeMap<(&str, u8), (usize, usize)> = BTreeMap::new();
        let mut record = |name: &'static str, fd: u8, ok: bool| {
            let e = checks.entry((name, fd)).or_insert((0, 0));
            e.0 += 1;
            if !ok {
                e.1 += 1;
            }
        };
        let c0 = |x: &WordComb| self.canon0(g, x);
        let c1 = |x: &WordComb| self.canon1(g, x);
        let lie0 = |v: &VectorField, x: &WordComb| c0(&v.apply(b, x));
        let lie1 = |v: &VectorField, x: &WordComb| c1(&self.raw_lie1(v, x));
        let con1 = |v: &VectorField, x: &WordComb| c0(&self.raw_contract1(v, x));
        let cond = |v: &VectorField, x: &WordComb| c1(&self.raw_contract_d1(v, x));
        let d0 = |x: &WordComb| c1(&self.raw_d0(x));
        let sgn = |e: i64| sign_q(parity_sign(e));
        for n in 0..=max_weight {
            for x in self.span0(g, n)? {
                // (i) L_ξ = i_ξ d on 0-forms.
                record("L = [i, d]", 0, lie0(xi, &x) == c0(&self.raw_contract1(xi, &d0(&x))));
                // (iii)
                let lhs = lie0(xi, &lie0(gamma, &x)).minus(&lie0(gamma, &lie0(xi, &x)).scale(&sgn(xi.degree * gamma.degree)));
                record("L[ξ,γ] = [Lξ, Lγ]", 0, lhs == lie0(&bracket, &x));
                // (v)
                let lhs = lie1(xi, &d0(&x)).minus(&d0(&lie0(xi, &x)).scale(&sx));
                record("[L, d] = 0", 0, lhs.is_zero());
                // (vi)
                let lhs = truncate(&lie0(&xi_conj, &c0(&phi.apply(&x, cap))), cap);
                let rhs = truncate(&c0(&phi.apply(&lie0(xi, &x), cap)), cap);
                record("L conjugated = φ* L φ*⁻¹", 0, lhs == rhs);
                // (ii), (vii) hold trivially on 0-forms since i vanishes there.
                record("[L, i] = i[ξ,γ]", 0, true);
                record("i conjugated = φ* i φ*⁻¹", 0, true);
            }
            for a in self.span1(g, n)? {
                let a = c1(&a);
                // (i)
                let rhs = cond(xi, &a).plus(&d0(&con1(xi, &a)).scale(&sx));
                record("L = [i, d]", 1, lie1(xi, &a) == rhs);
                // (ii)
                let lhs = lie0(xi, &con1(gamma, &a))
                    .minus(&con1(gamma, &lie1(xi, &a)).scale(&sgn(xi.degree * (gamma.degree - 1))));
                record("[L, i] = i[ξ,γ]", 1, lhs == con1(&bracket, &a));
                // (iii)
                let lhs = lie1(xi, &lie1(gamma, &a)).minus(&lie1(gamma, &lie1(xi, &a)).scale(&sgn(xi.degree * gamma.degree)));
                record("L[ξ,γ] = [Lξ, Lγ]", 1, lhs == lie1(&bracket, &a));
                // (iv) on the exact 2-form dα.
                let lhs = con1(xi, &cond(gamma, &a))
                    .minus(&con1(gamma, &cond(xi, &a)).scale(&sgn((xi.degree - 1) * (gamma.degree - 1))));
                record("[i, i] = 0", 2, lhs.is_zero());
                // (vi)
                let pa = c1(&self.raw_pullback1(phi, &a, cap));
                let lhs = truncate(&lie1(&xi_conj, &pa), cap);
                let rhs = truncate(&c1(&self.raw_pullback1(phi, &lie1(xi, &a), cap)), cap);
                record("L conjugated = φ* L φ*⁻¹", 1, lhs == rhs);
                // (vii)
                let lhs = truncate(&con1(&xi_conj, &pa), cap);
                let rhs = truncate(&c0(&phi.apply(&con1(xi, &a), cap)), cap);
                record("i conjugated = φ* i φ*⁻¹", 1, lhs == rhs);
            }
        }
        Ok(checks
            .into_iter()
            .map(|((identity, form_degree), (checked, failures))| CartanCheck {
                identity: identity.to_string(),
                form_degree,
                checked,
                failures,
            })
            .collect())
    }

    /// Ranks of the de Rham complex at each weight up to `max_weight`.
    pub fn poincare(&self, g: Geometry, max_weight: usize) -> Result<Vec<PoincareSlice>, FormsError> {
        let euler = VectorField::euler(&self.basis);
        let mut out = Vec::new();
        for n in 0..=max_weight {
            let zero = self.span0(g, n)?;
            let one: Vec<WordComb> = self.span1(g, n)?.iter().map(|a| self.canon1(g, a)).collect();
            let dim0 = self.rank_of(&zero);
            let dim1 = self.rank_of(&one);
            let d_images: Vec<WordComb> = zero.iter().map(|x| self.canon1(g, &self.raw_d0(x))).collect();
            let rank_d0 = self.rank_of(&d_images);
            let contracted: Vec<WordComb> = one.iter().map(|a| self.canon1(g, &self.raw_contract_d1(&euler, a))).collect();
            let rank_contracted_d1 = self.rank_of(&contracted);
            let scale = Rational::from_integer((n as i64).into());
            let scales0 = zero.iter().all(|x| self.canon0(g, &euler.apply(&self.basis, x)) == x.scale(&scale));
            let scales1 = one.iter().zip(&contracted).all(|(a, ida)| {
                let homotopy = ida.plus(&self.canon1(g, &self.raw_d0(&self.raw_contract1(&euler, a))));
                homotopy == a.scale(&scale) && self.canon1(g, &self.raw_lie1(&euler, a)) == homotopy
            });
            out.push(PoincareSlice {
                geometry: g,
                weight: n,
                dim0,
                dim1,
                rank_d0,
                rank_contracted_d1,
                h0: dim0 - rank_d0,
                h1: (dim1 - rank_contracted_d1).saturating_sub(rank_d0),
                euler_scales: scales0 && scales1,
            });
        }
        Ok(out)
    }

    /// Closed 2-forms of order `n ≤ max_order` against the commutators of
    /// weight `n + 2`, one slice per degree.
    pub fn zeta_slices(&self, g: Geometry, max_order: usize) -> Result<Vec<ZetaSlice>, FormsError> {
        let b = &self.basis;
        let mut out = Vec::new();
        for order in 0..=max_order {
            let m = order + 2;
            let mut by_degree: BTreeMap<i64, (Vec<WordComb>, Vec<WordComb>)> = BTreeMap::new();
            for x in self.span0(g, m)? {
                let d = x.keys().next().map(|w| b.word_degree(w)).unwrap_or(0);
                by_degree.entry(d).or_default().0.push(x);
            }
            for a in self.span1(g, m)? {
                let d = a.keys().next().map(|w| b.word_degree(w)).unwrap_or(0);
                by_degree.entry(d).or_default().1.push(self.canon1(g, &a));
            }
            let targets = self.commutators(g, m)?;
            for (degree, (zero, one)) in by_degree {
                let d_images: Vec<WordComb> = zero.iter().map(|x| self.canon1(g, &self.raw_d0(x))).collect();
                let closed_dim = self.rank_of(&one) - self.rank_of(&d_images);
                let target: Vec<WordComb> =
                    targets.iter().filter(|t| t.keys().next().map(|w| b.word_degree(w)) == Some(degree)).cloned().collect();
                let mut images = Vec::with_capacity(one.len());
                for a in &one {
                    let omega = FormRep { geometry: g, form_degree: FormDegree::Closed2, payload: a.clone() };
                    images.push(self.zeta(&omega)?);
                }
                let commutator_dim = self.rank_of(&target);
                let image_rank = self.rank_of(&images);
                let mut joint = target.clone();
                joint.extend(images.iter().cloned());
                out.push(ZetaSlice {
                    geometry: g,
                    order,
                    degree,
                    closed_dim,
                    commutator_dim,
                    image_rank,
                    image_inside: self.rank_of(&joint) == commutator_dim,
                });
            }
        }
        Ok(out)
    }

    /// Spanning set of `[T̂W, T̂W]`, `[W, invariants]` or `[L̂W, L̂W]` in weight `m`.
    fn commutators(&self, g: Geometry, m: usize) -> Result<Vec<WordComb>, FormsError> {
        let b = &self.basis;
        let mut out = Vec::new();
        match g {
            Geometry::Ass => {
                for w in enumerate_words(b, m, None) {
                    for k in 1..m {
                        let (u, v) = w.0.split_at(k);
                        out.push(graded_commutator(b, &WordComb::basis(Word::from_slice(u)), &WordComb::basis(Word::from_slice(v))));
                    }
                }
            }
            Geometry::Com => {
                for l in 0..b.len() {
                    for y in self.sym_words(m - 1) {
                        out.push(graded_commutator(b, &WordComb::basis(Word::letter(l as Letter)), &symmetriser(b, &y)));
                    }
                }
            }
            Geometry::Lie => {
                let lie_basis = |k: usize| -> Result<Vec<WordComb>, FormsError> {
                    Ok(self.table.summand_basis(&enumerate_words(b, k, None), 1, ShuffleVariant::Plain)?)
                };
                for k in 1..m {
                    let left = lie_basis(k)?;
                    let right = lie_basis(m - k)?;
                    for u in &left {
                        for v in &right {
                            out.push(graded_commutator(b, u, v));
                        }
                    }
                }
            }
        }
        out.retain(|c| !c.is_zero());
        Ok(out)
    }

    /// `p ∘ j = n!` on commutative 1-forms of order `n`, and `j ∘ d = d ∘ i`
    /// on commutative 0-forms of weight `n + 1`, where on coordinates `j d`
    /// is the full symmetriser and `d` of the partial symmetriser fixing the
    /// first letter.
    pub fn comparison_checks(&self, max_order: usize) -> Result<Vec<ComparisonCheck>, FormsError> {
        let mut out = Vec::new();
        for n in 0..=max_order {
            let mut pj = ComparisonCheck { identity: "p∘j = n!".into(), order: n, checked: 0, failures: 0 };
            for a in self.span1(Geometry::Com, n + 1)? {
                let a = self.wrap(Geometry::Com, FormDegree::One, &a);
                let back = self.compare(&self.compare(&a, ComparisonMap::J)?, ComparisonMap::P)?;
                pj.checked += 1;
                if back.payload != a.payload.scale(&factorial(n)) {
                    pj.failures += 1;
                }
            }
            out.push(pj);
            let mut jd = ComparisonCheck { identity: "j∘d = d∘sym".into(), order: n + 1, checked: 0, failures: 0 };
            for x in self.span0(Geometry::Com, n + 1)? {
                let form = FormRep { geometry: Geometry::Com, form_degree: FormDegree::Zero, payload: x.clone() };
                let lhs = self.compare(&self.d0(&form)?, ComparisonMap::J)?.payload;
                let mut full = WordComb::zero();
                let mut partial = WordComb::zero();
                for (w, c) in x.iter() {
                    full.add_scaled(&symmetriser(&self.basis, w), c);
                    for (v, cv) in symmetriser(&self.basis, &Word::from_slice(&w.0[1..])).iter() {
                        let mut letters = vec![w.0[0]];
                        letters.extend_from_slice(&v.0);
                        partial.add_term(Word(letters), c * cv);
                    }
                }
                jd.checked += 1;
                if lhs != full || lhs != self.raw_d0(&partial) {
                    jd.failures += 1;
                }
            }
            out.push(jd);
        }
        Ok(out)
    }

    /// `l` is injective on 1-forms and on 1-forms modulo exact ones, per weight.
    pub fn l_injective(&self, weight: usize) -> Result<bool, FormsError> {
        let lie1 = self.span1(Geometry::Lie, weight)?;
        let lie0 = self.span0(Geometry::Lie, weight)?;
        let ass0 = self.span0(Geometry::Ass, weight)?;
        let exact_lie: Vec<WordComb> = lie0.iter().map(|x| self.raw_d0(x)).collect();
        let exact_ass: Vec<WordComb> = ass0.iter().map(|x| self.raw_d0(x)).collect();
        let mut joint = exact_ass.clone();
        joint.extend(lie1.iter().cloned());
        let quotient_rank = self.rank_of(&joint) - self.rank_of(&exact_ass);
        let own_quotient = self.rank_of(&lie1) - self.rank_of(&exact_lie);
        Ok(self.rank_of(&lie1) == lie1.len() && quotient_rank == own_quotient)
    }
}
