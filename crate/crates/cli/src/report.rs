//! Machine-readable command reports and their JSON/CSV emitters.

use crate::spec::{AlgebraSpec, Caps};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

pub const REPORT_SCHEMA: &str = "infty-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: BTreeMap<String, String>,
}

/// A rectangular result table. Cells are JSON scalars; rationals appear as
/// `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    /// Column values of one row by name.
    pub fn get(&self, row: usize, column: &str) -> Option<&Value> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.rows.get(row)?.get(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: CommandEcho,
    pub spec: Option<AlgebraSpec>,
    pub spec_hash: Option<String>,
    pub caps: Caps,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub failures: usize,
    pub pass: bool,
    pub timing_ms: u64,
}

impl Report {
    pub fn new(command: CommandEcho, spec: Option<&AlgebraSpec>, caps: Caps) -> Self {
        Report {
            schema: REPORT_SCHEMA.into(),
            command,
            spec: spec.cloned(),
            spec_hash: spec.map(|s| s.hash()),
            caps,
            tables: Vec::new(),
            checks: Vec::new(),
            failures: 0,
            pass: true,
            timing_ms: 0,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
        if !pass {
            self.failures += 1;
            self.pass = false;
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// One table gives its own columns. Several tables are stacked under
    /// the union of their columns, prefixed by a `section` column holding the
    /// table name. Checks are emitted as a table only when there are no
    /// others; the JSON form always carries them.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut sections: Vec<Table> = self.tables.clone();
        if sections.is_empty() && !self.checks.is_empty() {
            let mut t = Table::new("checks", &["name", "pass", "detail"]);
            for c in &self.checks {
                t.push(vec![c.name.clone().into(), c.pass.into(), c.detail.clone().into()]);
            }
            sections.push(t);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        match sections.as_slice() {
            [] => {}
            [only] => {
                w.write_record(&only.columns)?;
                for r in &only.rows {
                    w.write_record(r.iter().map(cell))?;
                }
            }
            many => {
                let mut columns: Vec<String> = Vec::new();
                for t in many {
                    for c in &t.columns {
                        if !columns.contains(c) {
                            columns.push(c.clone());
                        }
                    }
                }
                let mut header = vec!["section".to_string()];
                header.extend(columns.iter().cloned());
                w.write_record(&header)?;
                for t in many {
                    for r in &t.rows {
                        let mut rec = vec![t.name.clone()];
                        rec.extend(columns.iter().map(|c| t.columns.iter().position(|x| x == c).map(|i| cell(&r[i])).unwrap_or_default()));
                        w.write_record(&rec)?;
                    }
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv of UTF-8 cells"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn echo() -> CommandEcho {
        CommandEcho { name: "hodge".into(), args: BTreeMap::new() }
    }

    #[test]
    fn empty_report_is_a_valid_document() {
        let r = Report::new(echo(), None, Caps::default());
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["tables"], json!([]));
        assert_eq!(v["pass"], json!(true));
        assert_eq!(r.to_csv().unwrap(), "");
    }

    #[test]
    fn single_table_keeps_its_columns() {
        let mut r = Report::new(echo(), None, Caps::default());
        let mut t = Table::new("hodge", &["degree", "order", "j", "dim", "exact"]);
        t.push(vec![json!(2), Value::Null, json!(1), json!(3), json!(true)]);
        r.tables.push(t);
        assert_eq!(r.to_csv().unwrap(), "degree,order,j,dim,exact\n2,,1,3,true\n");
    }

    #[test]
    fn several_sections_share_a_header() {
        let mut r = Report::new(echo(), None, Caps::default());
        r.check("c", false, "witness");
        assert_eq!(r.failures, 1);
        assert!(!r.pass);
        assert_eq!(r.to_csv().unwrap(), "name,pass,detail\nc,false,witness\n");
        let mut a = Table::new("a", &["x"]);
        a.push(vec![json!("1/2")]);
        let mut b = Table::new("b", &["y", "x"]);
        b.push(vec![json!(3), json!("-1/1")]);
        r.tables = vec![a, b];
        assert_eq!(r.to_csv().unwrap(), "section,x,y\na,1/2,\nb,-1/1,3\n");
    }
}
