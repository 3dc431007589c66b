//! Algebra description files: JSON documents describing a finite-dimensional
//! homotopy algebra by its structure maps on V.

use infty_core::gradedspace::{GradedBasis, Generator, Letter, Side, StructureMap};
use infty_core::inftystruct::{InftyKind, InftyStructure};
use infty_core::Rational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

pub const SPEC_SCHEMA: &str = "infty-algebra/1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("ParseError: cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("ParseError at {at}: {message}")]
    Parse { at: String, message: String },
    #[error("ValidationError: {0}")]
    Validation(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub inputs: Vec<String>,
    pub output: String,
    /// Exact rational written as `"p/q"` or `"p"`.
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationSpec {
    pub arity: usize,
    pub entries: Vec<EntrySpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    pub weight: usize,
    /// Inclusive cohomological degree range `[lo, hi]`.
    pub degrees: [i64; 2],
}

impl Default for Caps {
    fn default() -> Self {
        Caps { weight: 8, degrees: [0, 6] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub schema: String,
    pub name: String,
    pub kind: InftyKind,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default)]
    pub operations: Vec<OperationSpec>,
    #[serde(default)]
    pub caps: Caps,
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty coefficient".into());
    }
    t.parse::<Rational>().map_err(|e| format!("`{text}` is not a rational: {e}"))
}

/// Always `"p/q"` with `q > 0` and `gcd(p, q) = 1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_spec(path: &Path) -> Result<AlgebraSpec, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_str(&text)
}

/// Parses, validates and canonicalises a spec document.
pub fn parse_str(text: &str) -> Result<AlgebraSpec, SpecError> {
    let mut spec: AlgebraSpec = serde_json::from_str(text).map_err(|e| SpecError::Parse {
        at: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    spec.canonicalise()?;
    spec.validate()?;
    Ok(spec)
}

impl AlgebraSpec {
    fn canonicalise(&mut self) -> Result<(), SpecError> {
        for (i, op) in self.operations.iter_mut().enumerate() {
            for (k, e) in op.entries.iter_mut().enumerate() {
                let r = parse_rational(&e.coeff)
                    .map_err(|m| SpecError::Parse { at: format!("operations[{i}].entries[{k}].coeff"), message: m })?;
                e.coeff = format_rational(&r);
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), SpecError> {
        if self.schema != SPEC_SCHEMA {
            return Err(SpecError::Validation(format!("schema `{}` is not `{SPEC_SCHEMA}`", self.schema)));
        }
        let mut seen = BTreeSet::new();
        for g in &self.generators {
            if !seen.insert(g.name.as_str()) {
                return Err(SpecError::Validation(format!("generator `{}` declared twice", g.name)));
            }
        }
        if let Some(u) = &self.unit {
            self.index(u, "unit")?;
        }
        for (i, op) in self.operations.iter().enumerate() {
            if op.arity == 0 {
                return Err(SpecError::Validation(format!("operations[{i}] has arity 0")));
            }
            for (k, e) in op.entries.iter().enumerate() {
                let at = format!("operations[{i}].entries[{k}]");
                if e.inputs.len() != op.arity {
                    return Err(SpecError::Validation(format!(
                        "{at}: {} inputs for an operation of arity {}",
                        e.inputs.len(),
                        op.arity
                    )));
                }
                for name in &e.inputs {
                    self.index(name, &format!("{at}.inputs"))?;
                }
                self.index(&e.output, &format!("{at}.output"))?;
            }
        }
        let [lo, hi] = self.caps.degrees;
        if lo > hi {
            return Err(SpecError::Validation(format!("caps.degrees [{lo}, {hi}] is empty")));
        }
        // Degree consistency is decided by building the structure.
        self.structure().map(|_| ())
    }

    fn index(&self, name: &str, at: &str) -> Result<usize, SpecError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| SpecError::Validation(format!("unknown generator `{name}` in {at}")))
    }

    pub fn v_basis(&self) -> GradedBasis {
        let gens = self.generators.iter().map(|g| Generator { name: g.name.clone(), degree: g.degree }).collect();
        GradedBasis::new(gens, Side::V).expect("names checked distinct")
    }

    pub fn structure_maps(&self) -> Result<Vec<StructureMap>, SpecError> {
        let mut maps = Vec::new();
        for op in &self.operations {
            let mut entries = Vec::new();
            for e in &op.entries {
                let inputs = e.inputs.iter().map(|n| self.index(n, "inputs")).collect::<Result<Vec<_>, _>>()?;
                let coeff = parse_rational(&e.coeff).map_err(SpecError::Validation)?;
                entries.push((inputs, self.index(&e.output, "output")?, coeff));
            }
            maps.push(StructureMap { arity: op.arity, entries });
        }
        Ok(maps)
    }

    /// The structure on the dual side, with the declared unit.
    pub fn structure(&self) -> Result<InftyStructure, SpecError> {
        let unit = match &self.unit {
            Some(u) => Some(self.index(u, "unit")? as Letter),
            None => None,
        };
        InftyStructure::from_maps(self.kind, &self.v_basis(), &self.structure_maps()?, unit)
            .map_err(|e| SpecError::Validation(e.to_string()))
    }

    /// Compact JSON with fixed field order and canonical coefficients.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialises")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    /// Hex SHA-256 of [`AlgebraSpec::canonical_json`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use infty_core::exactlin::q_frac;

    const DUAL: &str = r#"{
      "schema": "infty-algebra/1", "name": "dual numbers", "kind": "cinf",
      "generators": [{"name": "u", "degree": 0}, {"name": "x", "degree": 0}],
      "unit": "u",
      "operations": [{"arity": 2, "entries": [
        {"inputs": ["u", "u"], "output": "u", "coeff": "1"},
        {"inputs": ["u", "x"], "output": "x", "coeff": "2/2"},
        {"inputs": ["x", "u"], "output": "x", "coeff": "1/1"}]}]
    }"#;

    #[test]
    fn loads_and_canonicalises() {
        let spec = parse_str(DUAL).unwrap();
        assert_eq!(spec.caps, Caps::default());
        assert!(spec.operations[0].entries.iter().all(|e| e.coeff == "1/1"));
        let s = spec.structure().unwrap();
        assert_eq!(s.basis().len(), 2);
        assert_eq!(s.unit(), Some(0));
    }

    #[test]
    fn rationals_are_exact() {
        assert_eq!(parse_rational("1/3").unwrap(), q_frac(1, 3));
        assert_eq!(parse_rational("-4/6").unwrap(), q_frac(-2, 3));
        assert_eq!(format_rational(&q_frac(-4, 6)), "-2/3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("one").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn errors_name_the_problem() {
        let unknown = DUAL.replace(r#""output": "x", "coeff": "2/2""#, r#""output": "y", "coeff": "2/2""#);
        match parse_str(&unknown) {
            Err(SpecError::Validation(m)) => assert!(m.contains("`y`"), "{m}"),
            other => panic!("{other:?}"),
        }
        let bad_coeff = DUAL.replace("\"2/2\"", "\"2/0\"");
        assert!(matches!(parse_str(&bad_coeff), Err(SpecError::Parse { at, .. }) if at.contains("entries[1].coeff")));
        match parse_str("{\n  \"schema\": 3,\n}") {
            Err(SpecError::Parse { at, .. }) => assert!(at.starts_with("line 2"), "{at}"),
            other => panic!("{other:?}"),
        }
        let shifted = DUAL.replace(r#"{"name": "u", "degree": 0}"#, r#"{"name": "u", "degree": 1}"#);
        assert!(matches!(parse_str(&shifted), Err(SpecError::Validation(m)) if m.contains("degree")));
    }

    #[test]
    fn round_trip_and_hash() {
        let spec = parse_str(DUAL).unwrap();
        let again = parse_str(&spec.to_pretty_json()).unwrap();
        assert_eq!(again, spec);
        assert_eq!(again.hash(), spec.hash());
        assert_eq!(spec.hash().len(), 64);
    }
}
