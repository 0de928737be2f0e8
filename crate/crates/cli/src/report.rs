//! Reports: JSON with sorted keys, CSV check tables.

use serde_json::{json, Map, Value};

use crate::scenario::{Analysis, Scenario, SCHEMA};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: Option<f64>,
}

impl Check {
    pub fn new(name: &str, pass: bool, residual: Option<f64>) -> Self {
        Check { name: name.to_string(), pass, residual }
    }
}

#[derive(Clone, Debug)]
pub struct Section {
    pub values: Map<String, Value>,
    pub checks: Vec<Check>,
    /// False when an optimizer ran out of budget.
    pub complete: bool,
}

impl Default for Section {
    fn default() -> Self {
        Section { values: Map::new(), checks: Vec::new(), complete: true }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub precision: u32,
    pub mode: String,
    pub field: Option<String>,
    pub fallback: Option<String>,
    pub sections: Vec<(Analysis, Section)>,
    /// Milliseconds per stage; the only nondeterministic part of a report.
    pub timing: Vec<(String, f64)>,
}

impl Outcome {
    pub fn new(sc: &Scenario, seed: u64, precision: u32) -> Self {
        Outcome {
            scenario: sc.id.clone(),
            kind: sc.kind.name().to_string(),
            seed,
            precision,
            mode: String::new(),
            field: None,
            fallback: None,
            sections: Vec::new(),
            timing: Vec::new(),
        }
    }

    pub fn complete(&self) -> bool {
        self.sections.iter().all(|(_, s)| s.complete)
    }

    pub fn passed(&self) -> bool {
        self.sections.iter().all(|(_, s)| s.checks.iter().all(|c| c.pass))
    }

    /// `0` all checks pass, `1` a check fails, `4` an optimizer did not converge.
    pub fn exit_code(&self) -> i32 {
        if !self.complete() {
            4
        } else if !self.passed() {
            1
        } else {
            0
        }
    }

    pub fn section(&self, a: Analysis) -> Option<&Section> {
        self.sections.iter().find(|(x, _)| *x == a).map(|(_, s)| s)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (a, s) in &self.sections {
            for c in s.checks.iter().filter(|c| !c.pass) {
                out.push(format!("{}: {}", a.name(), c.name));
            }
        }
        out
    }

    pub fn to_json(&self, timing: bool) -> Value {
        let mut analyses = Map::new();
        let mut checks = Vec::new();
        for (a, s) in &self.sections {
            let mut v = s.values.clone();
            v.insert("complete".into(), json!(s.complete));
            analyses.insert(a.name().into(), Value::Object(v));
            for c in &s.checks {
                checks.push(json!({ "analysis": a.name(), "check": c.name, "pass": c.pass, "residual": c.residual }));
            }
        }
        let mut out = json!({
            "schema": SCHEMA,
            "scenario": self.scenario,
            "type": self.kind,
            "seed": self.seed,
            "precision": self.precision,
            "mode": self.mode,
            "field": self.field,
            "fallback": self.fallback,
            "complete": self.complete(),
            "pass": self.passed(),
            "analyses": analyses,
            "checks": checks,
        });
        if timing {
            let t: Map<String, Value> = self.timing.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            out["timing_ms"] = Value::Object(t);
        }
        out
    }

    pub fn to_json_string(&self, timing: bool) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json(timing)).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per check.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scenario", "seed", "mode", "analysis", "check", "pass", "residual"])?;
        for (a, s) in &self.sections {
            for c in &s.checks {
                let residual = c.residual.map(|r| format!("{r:e}")).unwrap_or_default();
                w.write_record([
                    self.scenario.as_str(),
                    &self.seed.to_string(),
                    &self.mode,
                    a.name(),
                    &c.name,
                    if c.pass { "true" } else { "false" },
                    &residual,
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}
