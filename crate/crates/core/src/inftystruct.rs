//! A∞, C∞ and L∞ structures as square-zero degree-one derivations on the
//! completed tensor (or symmetric) algebra of the dual alphabet, together with
//! their validation, unitality, conversion and ∞-morphisms.

use crate::cyclicshuffle::{CyclicError, CyclicOperatorTable, ShuffleVariant};
use crate::exactlin::Rational;
use crate::gradedspace::{
    derivation_on_word, dualize_structure, graded_commutator, symmetrize, symmetrize_word, undualize_structure, GradedBasis,
    GradedError, Letter, Side, StructureMap, Word, WordComb,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InftyKind {
    #[serde(rename = "ainf")]
    Ainf,
    #[serde(rename = "cinf")]
    Cinf,
    #[serde(rename = "linf")]
    Linf,
}

impl InftyKind {
    /// Whether components live in the symmetric rather than the tensor algebra.
    pub fn is_symmetric(self) -> bool {
        self == InftyKind::Linf
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InftyError {
    #[error("component of `{generator}` contains `{word}` of degree {found}, expected {expected}")]
    DegreeMismatch { generator: String, word: String, expected: i64, found: i64 },
    #[error("{0} components given for {1} generators")]
    ComponentCount(usize, usize),
    #[error("the structure has no unit declared")]
    NoUnitDeclared,
    #[error("cannot convert {from:?} into {to:?}")]
    IllegalDirection { from: InftyKind, to: InftyKind },
    #[error("conversion to {0:?} broke the square-zero condition")]
    ConversionBroke(InftyKind),
    #[error("component contains the empty word; derivations vanish at zero")]
    ConstantTerm,
    #[error("expected a structure of kind {expected:?}, got {found:?}")]
    WrongKind { expected: &'static str, found: InftyKind },
    #[error("symmetric component of `{0}` is not in canonical sorted form")]
    NotSymmetricForm(String),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
}

/// A square-zero derivation `m` given by its values on the generators of the
/// dual alphabet. Values are stored across all orders at once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InftyStructure {
    kind: InftyKind,
    basis: GradedBasis,
    components: Vec<WordComb>,
    unit: Option<Letter>,
}

/// Applies a derivation with given generator values to `x`, in the tensor or
/// symmetric algebra, dropping terms of weight above `cap`.
pub fn apply_derivation(
    basis: &GradedBasis,
    values: &[WordComb],
    degree: i64,
    symmetric: bool,
    x: &WordComb,
    cap: Option<usize>,
) -> WordComb {
    let raw = x.map_linear(|w| derivation_on_word(basis, values, degree, w, cap));
    if symmetric {
        symmetrize(basis, &raw)
    } else {
        raw
    }
}

/// Product in the tensor or symmetric algebra.
pub fn algebra_product(basis: &GradedBasis, a: &WordComb, b: &WordComb, symmetric: bool, cap: Option<usize>) -> WordComb {
    let mut out = WordComb::zero();
    for (u, cu) in a.iter() {
        for (v, cv) in b.iter() {
            if cap.map_or(false, |c| u.weight() + v.weight() > c) {
                continue;
            }
            let w = u.concat(v);
            if symmetric {
                if let Some((s, sg)) = symmetrize_word(basis, &w) {
                    out.add_term(s, cu * cv * crate::gradedspace::sign_q(sg));
                }
            } else {
                out.add_term(w, cu * cv);
            }
        }
    }
    out
}

/// Weight-`k` part of a combination.
pub fn weight_part(x: &WordComb, k: usize) -> WordComb {
    x.iter().filter(|(w, _)| w.weight() == k).map(|(w, c)| (w.clone(), c.clone())).collect()
}

impl InftyStructure {
    /// Builds a structure from its values on generators. Each value must have
    /// degree one more than its generator and no constant term; symmetric
    /// values must already be in sorted form.
    pub fn new(
        kind: InftyKind,
        basis: GradedBasis,
        components: Vec<WordComb>,
        unit: Option<Letter>,
    ) -> Result<InftyStructure, InftyError> {
        if components.len() != basis.len() {
            return Err(InftyError::ComponentCount(components.len(), basis.len()));
        }
        for (g, comp) in components.iter().enumerate() {
            let expected = basis.degree(g as Letter) + 1;
            for (w, _) in comp.iter() {
                if w.weight() == 0 {
                    return Err(InftyError::ConstantTerm);
                }
                let found = basis.word_degree(w);
                if found != expected {
                    return Err(InftyError::DegreeMismatch {
                        generator: basis.name(g).to_string(),
                        word: basis.render(w),
                        expected,
                        found,
                    });
                }
                if kind.is_symmetric() && symmetrize_word(&basis, w).map(|(s, sg)| s != *w || sg != 1).unwrap_or(true) {
                    return Err(InftyError::NotSymmetricForm(basis.name(g).to_string()));
                }
            }
        }
        Ok(InftyStructure { kind, basis, components, unit })
    }

    /// Builds a structure from maps `V^{⊗i} -> V` given on the V side. For
    /// L∞ the dualized values are projected to the symmetric algebra.
    pub fn from_maps(
        kind: InftyKind,
        v_basis: &GradedBasis,
        maps: &[StructureMap],
        unit: Option<Letter>,
    ) -> Result<InftyStructure, InftyError> {
        let w_basis = match v_basis.side() {
            Side::V => v_basis.dual(),
            Side::W => v_basis.clone(),
        };
        let mut comps = dualize_structure(maps, v_basis)?;
        if kind.is_symmetric() {
            comps = comps.iter().map(|c| symmetrize(&w_basis, c)).collect();
        }
        InftyStructure::new(kind, w_basis, comps, unit)
    }

    /// The zero structure on an alphabet.
    pub fn zero(kind: InftyKind, basis: GradedBasis) -> InftyStructure {
        let n = basis.len();
        InftyStructure { kind, basis, components: vec![WordComb::zero(); n], unit: None }
    }

    pub fn kind(&self) -> InftyKind {
        self.kind
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn components(&self) -> &[WordComb] {
        &self.components
    }

    pub fn component(&self, g: Letter) -> &WordComb {
        &self.components[g as usize]
    }

    pub fn unit(&self) -> Option<Letter> {
        self.unit
    }

    pub fn with_unit(mut self, unit: Option<Letter>) -> Self {
        self.unit = unit;
        self
    }

    pub fn with_kind(mut self, kind: InftyKind) -> Self {
        self.kind = kind;
        self
    }

    /// Largest order with a nonzero component (0 for the zero structure).
    pub fn max_arity(&self) -> usize {
        self.components.iter().flat_map(|c| c.keys().map(|w| w.weight())).max().unwrap_or(0)
    }

    /// True when there is no order-one component.
    pub fn is_minimal(&self) -> bool {
        self.components.iter().all(|c| c.keys().all(|w| w.weight() != 1))
    }

    /// Order-`k` parts of all components.
    pub fn order_components(&self, k: usize) -> Vec<WordComb> {
        self.components.iter().map(|c| weight_part(c, k)).collect()
    }

    /// `m(x)` extended as a derivation, truncated above weight `cap`.
    pub fn apply(&self, x: &WordComb, cap: Option<usize>) -> WordComb {
        apply_derivation(&self.basis, &self.components, 1, self.kind.is_symmetric(), x, cap)
    }

    pub fn apply_word(&self, w: &Word, cap: Option<usize>) -> WordComb {
        self.apply(&WordComb::basis(w.clone()), cap)
    }

    /// The structure maps on the V side, grouped by arity.
    pub fn structure_maps(&self) -> Vec<StructureMap> {
        undualize_structure(&self.components, &self.basis)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub generator: String,
    pub weight: usize,
    pub witness: Word,
    pub coeff: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareZeroReport {
    pub cap: usize,
    /// `(weight, holds)` for every weight `1..=cap`.
    pub per_weight: Vec<(usize, bool)>,
    pub violations: Vec<Violation>,
}

impl SquareZeroReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    /// Lowest weight at which `m²` is nonzero.
    pub fn first_failing_weight(&self) -> Option<usize> {
        self.violations.iter().map(|v| v.weight).min()
    }
}

/// Checks `m(m(g)) = 0` for every generator and every output weight up to `cap`.
pub fn validate_square_zero(s: &InftyStructure, cap: usize) -> SquareZeroReport {
    let mut violations = Vec::new();
    for g in 0..s.basis.len() {
        let mg = s.component(g as Letter);
        let mmg = s.apply(mg, Some(cap));
        for (w, c) in mmg.iter() {
            violations.push(Violation {
                generator: s.basis.name(g).to_string(),
                weight: w.weight(),
                witness: w.clone(),
                coeff: c.clone(),
            });
        }
    }
    violations.sort_by(|a, b| (a.weight, &a.generator, &a.witness).cmp(&(b.weight, &b.generator, &b.witness)));
    let per_weight = (1..=cap).map(|k| (k, violations.iter().all(|v| v.weight != k))).collect();
    SquareZeroReport { cap, per_weight, violations }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CinftyReport {
    /// `(generator, weight)` pairs whose value is not a Lie element.
    pub failures: Vec<(String, usize)>,
}

impl CinftyReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that every value of `m` is fixed by `e(1)`, i.e. is a Lie element.
pub fn check_cinfty(s: &InftyStructure) -> Result<CinftyReport, InftyError> {
    if s.kind.is_symmetric() {
        return Err(InftyError::WrongKind { expected: "ainf or cinf", found: s.kind });
    }
    let table = CyclicOperatorTable::new(&s.basis);
    let mut failures = Vec::new();
    for g in 0..s.basis.len() {
        for k in 1..=s.max_arity() {
            let part = weight_part(s.component(g as Letter), k);
            if part.is_zero() {
                continue;
            }
            if table.apply(&part, 1, ShuffleVariant::Plain)? != part {
                failures.push((s.basis.name(g).to_string(), k));
            }
        }
    }
    Ok(CinftyReport { failures })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitalReport {
    /// `(generator, monomial)` terms containing the unit letter that are not
    /// accounted for by `ad τ − τ²∂_τ`.
    pub offending: Vec<(String, Word)>,
}

impl UnitalReport {
    pub fn pass(&self) -> bool {
        self.offending.is_empty()
    }
}

/// The part of `m(g)` forced by the unit: `[τ, g]` for `g ≠ τ` and `ττ` for `g = τ`.
pub fn unit_part(basis: &GradedBasis, unit: Letter, g: Letter) -> WordComb {
    let tau = WordComb::basis(Word::letter(unit));
    if g == unit {
        WordComb::basis(Word(vec![unit, unit]))
    } else {
        graded_commutator(basis, &tau, &WordComb::basis(Word::letter(g)))
    }
}

/// Checks the unital normal form: after removing the forced unit part, no
/// value of `m` mentions the unit letter.
pub fn check_unital(s: &InftyStructure) -> Result<UnitalReport, InftyError> {
    let unit = s.unit.ok_or(InftyError::NoUnitDeclared)?;
    let mut offending = Vec::new();
    for g in 0..s.basis.len() as Letter {
        let mut forced = unit_part(&s.basis, unit, g);
        if s.kind.is_symmetric() {
            forced = symmetrize(&s.basis, &forced);
        }
        let rest = s.component(g).minus(&forced);
        for (w, _) in rest.iter() {
            if w.0.contains(&unit) {
                offending.push((s.basis.name(g as usize).to_string(), w.clone()));
            }
        }
    }
    Ok(UnitalReport { offending })
}

/// C∞ → A∞ relabels; A∞ (or C∞) → L∞ projects every value to the symmetric
/// algebra. The result is checked to square to zero wherever the input does.
pub fn convert(s: &InftyStructure, target: InftyKind) -> Result<InftyStructure, InftyError> {
    let converted = match (s.kind, target) {
        (InftyKind::Cinf, InftyKind::Ainf) => s.clone().with_kind(InftyKind::Ainf),
        (InftyKind::Ainf | InftyKind::Cinf, InftyKind::Linf) => {
            let comps = s.components.iter().map(|c| symmetrize(&s.basis, c)).collect();
            InftyStructure::new(InftyKind::Linf, s.basis.clone(), comps, s.unit)?
        }
        (from, to) if from == to => s.clone(),
        (from, to) => return Err(InftyError::IllegalDirection { from, to }),
    };
    let cap = (2 * s.max_arity()).saturating_sub(1).max(1);
    if validate_square_zero(s, cap).pass() && !validate_square_zero(&converted, cap).pass() {
        return Err(InftyError::ConversionBroke(target));
    }
    Ok(converted)
}

/// A continuous algebra homomorphism given by its values on the generators
/// of the domain alphabet, as combinations of codomain words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InftyMorphism {
    pub domain: GradedBasis,
    pub codomain: GradedBasis,
    pub components: Vec<WordComb>,
    pub symmetric: bool,
}

impl InftyMorphism {
    pub fn identity(basis: &GradedBasis, symmetric: bool) -> Self {
        InftyMorphism {
            domain: basis.clone(),
            codomain: basis.clone(),
            components: (0..basis.len()).map(|g| WordComb::basis(Word::letter(g as Letter))).collect(),
            symmetric,
        }
    }

    /// `φ(x_1…x_n) = φ(x_1)…φ(x_n)`, truncated above weight `cap`.
    pub fn apply(&self, x: &WordComb, cap: Option<usize>) -> WordComb {
        let mut out = WordComb::zero();
        for (w, c) in x.iter() {
            let mut acc = WordComb::basis(Word::empty());
            for &l in &w.0 {
                acc = algebra_product(&self.codomain, &acc, &self.components[l as usize], self.symmetric, cap);
            }
            out.add_scaled(&acc, c);
        }
        out
    }

    /// Weight-one part of each value.
    pub fn linear_part(&self) -> InftyMorphism {
        InftyMorphism { components: self.components.iter().map(|c| weight_part(c, 1)).collect(), ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismReport {
    pub cap: usize,
    pub violations: Vec<Violation>,
    /// Whether the weight-one part intertwines the order-one components.
    pub linear_part_is_chain_map: bool,
}

impl MorphismReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `φ ∘ m_domain = m_codomain ∘ φ` on every domain generator up to `cap`.
pub fn check_morphism(
    phi: &InftyMorphism,
    domain: &InftyStructure,
    codomain: &InftyStructure,
    cap: usize,
) -> MorphismReport {
    let mut violations = Vec::new();
    let mut chain = true;
    let phi1 = phi.linear_part();
    let m1_dom = domain.order_components(1);
    let m1_cod = codomain.order_components(1);
    let sym = phi.symmetric;
    for g in 0..phi.domain.len() {
        let lhs = phi.apply(domain.component(g as Letter), Some(cap));
        let rhs = codomain.apply(&phi.components[g], Some(cap));
        for (w, c) in lhs.minus(&rhs).iter() {
            violations.push(Violation {
                generator: phi.domain.name(g).to_string(),
                weight: w.weight(),
                witness: w.clone(),
                coeff: c.clone(),
            });
        }
        let l1 = phi1.apply(&m1_dom[g], Some(1));
        let r1 = apply_derivation(&phi.codomain, &m1_cod, 1, sym, &phi1.components[g], Some(1));
        chain &= l1 == r1;
    }
    violations.sort_by(|a, b| (a.weight, &a.generator, &a.witness).cmp(&(b.weight, &b.generator, &b.witness)));
    MorphismReport { cap, violations, linear_part_is_chain_map: chain }
}

/// Splits a combination by weight.
pub fn by_weight(x: &WordComb) -> BTreeMap<usize, WordComb> {
    let mut out: BTreeMap<usize, WordComb> = BTreeMap::new();
    for (w, c) in x.iter() {
        out.entry(w.weight()).or_default().add_term(w.clone(), c.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::q;
    use crate::fixtures;

    #[test]
    fn dual_numbers_square_zero() {
        let s = fixtures::dual_numbers();
        for cap in 1..=6 {
            assert!(validate_square_zero(&s, cap).pass(), "cap {cap}");
        }
    }

    #[test]
    fn magma_fails_at_weight_three() {
        let s = fixtures::nonassociative_magma();
        let report = validate_square_zero(&s, 4);
        assert!(!report.pass());
        assert_eq!(report.first_failing_weight(), Some(3));
    }

    #[test]
    fn zero_structure_passes_everything() {
        let s = InftyStructure::zero(InftyKind::Ainf, GradedBasis::uniform(2, 1));
        assert!(validate_square_zero(&s, 5).pass());
        assert!(check_cinfty(&s).unwrap().pass());
    }

    #[test]
    fn cinfty_checks() {
        assert!(check_cinfty(&fixtures::dual_numbers()).unwrap().pass());
        assert!(check_cinfty(&fixtures::truncated_cubic()).unwrap().pass());
        let free = fixtures::noncommutative_strict();
        let report = check_cinfty(&free).unwrap();
        assert!(!report.pass());
        assert!(report.failures.iter().all(|(_, w)| *w == 2));
        let only_m1 = fixtures::linear_differential();
        assert!(check_cinfty(&only_m1).unwrap().pass());
    }

    #[test]
    fn unital_checks() {
        assert!(check_unital(&fixtures::dual_numbers()).unwrap().pass());
        let wrong = fixtures::dual_numbers().with_unit(Some(1));
        assert!(!check_unital(&wrong).unwrap().pass());
        let zero = InftyStructure::zero(InftyKind::Ainf, GradedBasis::uniform(2, 1)).with_unit(Some(0));
        // The zero structure lacks the forced unit terms; they show up as
        // offending monomials once the forced part is subtracted.
        assert!(!check_unital(&zero).unwrap().pass());
        let bare = InftyStructure::zero(InftyKind::Ainf, GradedBasis::uniform(1, 1));
        assert_eq!(check_unital(&bare), Err(InftyError::NoUnitDeclared));
    }

    #[test]
    fn conversions() {
        let m1 = fixtures::linear_differential();
        let a = convert(&m1, InftyKind::Ainf).unwrap();
        assert_eq!(a.components(), m1.components());
        assert_eq!(a.kind(), InftyKind::Ainf);

        let minimal = fixtures::dual_numbers();
        assert!(minimal.is_minimal());
        let l = convert(&minimal, InftyKind::Linf).unwrap();
        assert!(l.components().iter().all(|c| c.is_zero()));

        let nc = fixtures::noncommutative_strict();
        let l = convert(&nc, InftyKind::Linf).unwrap();
        assert!(validate_square_zero(&l, 5).pass());
        assert!(l.components().iter().any(|c| !c.is_zero()));

        assert!(matches!(convert(&l, InftyKind::Ainf), Err(InftyError::IllegalDirection { .. })));
        assert!(matches!(convert(&nc, InftyKind::Cinf), Err(InftyError::IllegalDirection { .. })));
    }

    #[test]
    fn degree_mismatch_rejected() {
        let basis = GradedBasis::uniform(1, 1);
        let bad = vec![WordComb::basis(Word(vec![0]))];
        assert!(matches!(
            InftyStructure::new(InftyKind::Ainf, basis, bad, None),
            Err(InftyError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn identity_morphism_passes() {
        let s = fixtures::dual_numbers();
        let id = InftyMorphism::identity(s.basis(), false);
        let report = check_morphism(&id, &s, &s, 5);
        assert!(report.pass());
        assert!(report.linear_part_is_chain_map);
    }

    #[test]
    fn non_multiplicative_linear_iso_fails_at_weight_two() {
        let s = fixtures::dual_numbers();
        // Shearing the unit letter is a linear isomorphism that does not
        // intertwine the multiplication.
        let basis = s.basis().clone();
        let sheared: WordComb = [(Word::letter(0), q(1)), (Word::letter(1), q(1))].into_iter().collect();
        let phi = InftyMorphism {
            domain: basis.clone(),
            codomain: basis.clone(),
            components: vec![sheared, WordComb::basis(Word::letter(1))],
            symmetric: false,
        };
        let report = check_morphism(&phi, &s, &s, 4);
        assert!(!report.pass());
        assert_eq!(report.violations[0].weight, 2);
        assert!(report.linear_part_is_chain_map);
    }
}
