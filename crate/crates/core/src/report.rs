//! Scenario reports and their JSON / CSV / tree renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::branching::WorldTree;
use crate::numfmt::{format_g, round12};
use crate::observers::Assertion;

/// Tolerance on the total weight of an emitted branch table.
pub const TABLE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchRow {
    pub label: String,
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_rational: Option<String>,
}

impl BranchRow {
    pub fn new(label: impl Into<String>, weight: f64) -> Self {
        Self { label: label.into(), weight, weight_rational: None }
    }

    pub fn exact(label: impl Into<String>, weight: f64, rational: String) -> Self {
        Self { label: label.into(), weight, weight_rational: Some(rational) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub scenario: String,
    pub params: BTreeMap<String, Value>,
    pub branches: Vec<BranchRow>,
    pub quantities: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
    pub tree: Option<WorldTree>,
    /// Header of the label column in CSV output.
    pub csv_key: String,
}

/// Float rounded to 12 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else {
        json!(format!("{x}"))
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

impl ScenarioReport {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            params: BTreeMap::new(),
            branches: vec![],
            quantities: BTreeMap::new(),
            assertions: vec![],
            tree: None,
            csv_key: "label".into(),
        }
    }

    pub fn param(&mut self, key: &str, v: Value) -> &mut Self {
        self.params.insert(key.to_string(), v);
        self
    }

    pub fn quantity(&mut self, key: &str, v: Value) -> &mut Self {
        self.quantities.insert(key.to_string(), v);
        self
    }

    pub fn assert(&mut self, name: &str, pass: bool) -> &mut Self {
        self.assertions.push(Assertion::new(name, pass));
        self
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn failed_assertions(&self) -> Vec<&str> {
        self.assertions.iter().filter(|a| !a.pass).map(|a| a.name.as_str()).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    /// Appends the table-level weight check; called once before serialization.
    pub fn seal(mut self) -> Self {
        if !self.branches.is_empty() && !self.assertions.iter().any(|a| a.name == "branch_weights_sum_to_one") {
            let ok = (self.total_weight() - 1.0).abs() <= TABLE_TOL;
            self.assert("branch_weights_sum_to_one", ok);
        }
        self
    }

    pub fn to_value(&self) -> Value {
        let branches: Vec<Value> = self
            .branches
            .iter()
            .map(|b| {
                let mut m = serde_json::Map::new();
                m.insert("label".into(), json!(b.label));
                m.insert("weight".into(), num(b.weight));
                if let Some(r) = &b.weight_rational {
                    m.insert("weight_rational".into(), json!(r));
                }
                Value::Object(m)
            })
            .collect();
        let mut m = serde_json::Map::new();
        m.insert("scenario".into(), json!(self.scenario));
        m.insert("params".into(), json!(self.params));
        m.insert("branches".into(), Value::Array(branches));
        m.insert("quantities".into(), json!(self.quantities));
        m.insert("assertions".into(), json!(self.assertions));
        if let Some(t) = &self.tree {
            m.insert("tree".into(), serde_json::to_value(t.rounded()).expect("tree serializes"));
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    /// RFC-4180 table of branches with a header row.
    pub fn to_csv(&self) -> String {
        let exact = self.branches.iter().any(|b| b.weight_rational.is_some());
        let mut out = String::new();
        let _ = write!(out, "{},weight", csv_field(&self.csv_key));
        out.push_str(if exact { ",weight_rational\r\n" } else { "\r\n" });
        for b in &self.branches {
            let _ = write!(out, "{},{}", csv_field(&b.label), format_g(b.weight, 12));
            if exact {
                let _ = write!(out, ",{}", csv_field(b.weight_rational.as_deref().unwrap_or("")));
            }
            out.push_str("\r\n");
        }
        out
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_fields() {
        let mut r = ScenarioReport::new("x");
        r.branches.push(BranchRow::new("a=1,b=0", 1.0));
        assert_eq!(r.to_csv(), "label,weight\r\n\"a=1,b=0\",1\r\n");
    }

    #[test]
    fn seal_checks_total() {
        let mut r = ScenarioReport::new("x");
        r.branches.push(BranchRow::new("a", 0.5));
        let r = r.seal();
        assert!(!r.passed());
        assert_eq!(r.failed_assertions(), vec!["branch_weights_sum_to_one"]);
    }
}
