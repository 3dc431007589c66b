//! Exact-arithmetic engine for A∞, C∞ and L∞ algebras: their bar, Hochschild,
//! Harrison, Chevalley-Eilenberg and cyclic complexes at finite windows, the
//! Hodge decomposition by spectral idempotents of the shuffle operator, and
//! formal noncommutative differential forms.

pub mod exactlin;
pub mod gradedspace;
pub mod cyclicshuffle;
pub mod fixtures;
pub mod inftystruct;
pub mod homcomplex;
pub mod cycliccomplex;
pub mod hodge;
pub mod ncforms;

pub use exactlin::{IntMatrix, Rational, RationalMatrix, SparseVec, Subspace};
pub use gradedspace::{GradedBasis, LinComb, Word, WordComb};
