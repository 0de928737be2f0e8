//! Scenario files, schema `subfactor-lab/1`.

use std::fmt;

use serde::Deserialize;

pub const SCHEMA: &str = "subfactor-lab/1";

#[derive(Clone, Debug, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    GroupInclusion,
    MatrixInclusion,
    TensorInclusion,
    Quadrilateral,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::GroupInclusion => "group_inclusion",
            Kind::MatrixInclusion => "matrix_inclusion",
            Kind::TensorInclusion => "tensor_inclusion",
            Kind::Quadrilateral => "quadrilateral",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub enum Analysis {
    #[serde(rename = "index")]
    Index,
    #[serde(rename = "basis")]
    Basis,
    #[serde(rename = "wahp")]
    Wahp,
    #[serde(rename = "singularity")]
    Singularity,
    #[serde(rename = "angle")]
    Angle,
    #[serde(rename = "landau")]
    Landau,
    #[serde(rename = "tl-eval")]
    TlEval,
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Index => "index",
            Analysis::Basis => "basis",
            Analysis::Wahp => "wahp",
            Analysis::Singularity => "singularity",
            Analysis::Angle => "angle",
            Analysis::Landau => "landau",
            Analysis::TlEval => "tl-eval",
        }
    }
}

/// A matrix entry: a string literal such as `"1/2"` or `"3-2√2"`, or an integer.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Text(String),
}

impl Literal {
    pub fn text(&self) -> String {
        match self {
            Literal::Int(n) => n.to_string(),
            Literal::Text(s) => s.clone(),
        }
    }
}

pub type MatrixLiteral = Vec<Vec<Literal>>;

/// Subgroup generator words, or the named algebras of a quadrilateral.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subgroups {
    #[serde(default)]
    pub n: Vec<String>,
    pub p: Option<Vec<String>>,
    pub q: Option<Vec<String>>,
    /// Optional third intermediate algebra for the vanishing check.
    pub r: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generators {
    /// Defaults to all of `M_size`.
    pub m: Option<Vec<MatrixLiteral>>,
    pub n: Option<Vec<MatrixLiteral>>,
    pub p: Option<Vec<MatrixLiteral>>,
    pub q: Option<Vec<MatrixLiteral>>,
    pub r: Option<Vec<MatrixLiteral>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSpec {
    pub restarts: usize,
    pub iterations: usize,
    /// Random unitaries of `M` for the normalizer scan and the singularity reports.
    pub samples: usize,
    /// Random unitaries of `N` for the WAHP sum.
    pub unitaries: usize,
    /// Random unitaries of `M` for the minimal-element identities.
    pub minimal: usize,
}

impl Default for BudgetSpec {
    fn default() -> Self {
        BudgetSpec { restarts: 32, iterations: 400, samples: 4, unitaries: 100, minimal: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub id: String,
    #[serde(rename = "type")]
    pub kind: Kind,
    pub group: Option<String>,
    pub subgroups: Option<Subgroups>,
    pub size: Option<usize>,
    pub blocks: Option<Vec<usize>>,
    pub generators: Option<Generators>,
    /// `τ` of a minimal projection per block of `M`.
    pub trace: Option<Vec<Literal>>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budget: BudgetSpec,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub expressions: Vec<String>,
    pub delta: Option<String>,
}

fn default_precision() -> u32 {
    128
}

/// Parses and validates; errors carry the offending field path.
pub fn parse_scenario(text: &str) -> Result<Scenario, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = if path.is_empty() || path == "." { "(root)".to_string() } else { path };
        SchemaError::new(path, format!("{inner}"))
    })?;
    sc.validate()?;
    Ok(sc)
}

impl Scenario {
    fn validate(&self) -> Result<(), SchemaError> {
        if self.schema != SCHEMA {
            return Err(SchemaError::new("schema", format!("expected `{SCHEMA}`, found `{}`", self.schema)));
        }
        if self.id.trim().is_empty() {
            return Err(SchemaError::new("id", "must not be empty"));
        }
        if self.analyses.is_empty() {
            return Err(SchemaError::new("analyses", "at least one analysis is required"));
        }
        if !(53..=4096).contains(&self.precision) {
            return Err(SchemaError::new("precision", "must lie in 53..=4096 bits"));
        }
        match self.kind {
            Kind::GroupInclusion => {
                self.require_group()?;
                if self.subgroups.is_none() {
                    return Err(SchemaError::new("subgroups", "required for group_inclusion"));
                }
            }
            Kind::Quadrilateral => {
                if self.group.is_some() {
                    let s = self.subgroups.as_ref().ok_or_else(|| SchemaError::new("subgroups", "required"))?;
                    if s.p.is_none() {
                        return Err(SchemaError::new("subgroups.p", "required for quadrilateral"));
                    }
                    if s.q.is_none() {
                        return Err(SchemaError::new("subgroups.q", "required for quadrilateral"));
                    }
                } else {
                    self.require_size()?;
                    let g = self.generators.as_ref().ok_or_else(|| SchemaError::new("generators", "required"))?;
                    if g.p.is_none() {
                        return Err(SchemaError::new("generators.p", "required for quadrilateral"));
                    }
                    if g.q.is_none() {
                        return Err(SchemaError::new("generators.q", "required for quadrilateral"));
                    }
                }
            }
            Kind::MatrixInclusion => {
                let size = self.require_size()?;
                let has_n = self.generators.as_ref().is_some_and(|g| g.n.is_some());
                match (&self.blocks, has_n) {
                    (Some(_), true) => {
                        return Err(SchemaError::new("blocks", "give either blocks or generators.n, not both"))
                    }
                    (None, false) => return Err(SchemaError::new("generators.n", "required without blocks")),
                    (Some(b), false) => {
                        if b.is_empty() || b.contains(&0) || b.iter().sum::<usize>() != size {
                            return Err(SchemaError::new("blocks", format!("block sizes must be positive and sum to {size}")));
                        }
                    }
                    _ => {}
                }
            }
            Kind::TensorInclusion => match &self.blocks {
                Some(b) if b.len() == 2 && b.iter().all(|&x| x > 0) => {}
                _ => return Err(SchemaError::new("blocks", "tensor_inclusion needs two positive factors [n, k]")),
            },
        }
        if let Some(g) = &self.generators {
            let size = self.size.unwrap_or(0);
            for (name, list) in [("m", &g.m), ("n", &g.n), ("p", &g.p), ("q", &g.q), ("r", &g.r)] {
                for (i, mat) in list.iter().flatten().enumerate() {
                    let path = format!("generators.{name}[{i}]");
                    if mat.len() != size || mat.iter().any(|row| row.len() != size) {
                        return Err(SchemaError::new(path, format!("expected a {size}x{size} matrix")));
                    }
                }
            }
        }
        if let Some(d) = &self.delta {
            d.parse::<subfactor_core::tl::DeltaValue>()
                .map_err(|e| SchemaError::new("delta", e.to_string()))?;
        }
        if self.analyses.contains(&Analysis::TlEval) && self.expressions.is_empty() {
            return Err(SchemaError::new("expressions", "tl-eval needs at least one expression"));
        }
        for a in [Analysis::Angle, Analysis::Landau] {
            if self.analyses.contains(&a) && self.kind != Kind::Quadrilateral {
                return Err(SchemaError::new("analyses", format!("`{}` needs a quadrilateral", a.name())));
            }
        }
        Ok(())
    }

    fn require_group(&self) -> Result<&str, SchemaError> {
        let g = self.group.as_deref().ok_or_else(|| SchemaError::new("group", "required"))?;
        if !["S3", "Z2xZ2", "D4"].contains(&g) {
            return Err(SchemaError::new("group", format!("unknown group `{g}`; expected S3, Z2xZ2 or D4")));
        }
        Ok(g)
    }

    fn require_size(&self) -> Result<usize, SchemaError> {
        match self.size {
            Some(s) if s > 0 => Ok(s),
            _ => Err(SchemaError::new("size", "a positive matrix size is required")),
        }
    }

    /// Requested analyses in execution order, without repeats.
    pub fn ordered_analyses(&self) -> Vec<Analysis> {
        let mut a = self.analyses.clone();
        a.sort();
        a.dedup();
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": "subfactor-lab/1", "id": "t", "type": "group_inclusion",
        "group": "S3", "subgroups": {"n": ["(12)"]}, "analyses": ["index"]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let sc = parse_scenario(MINIMAL).unwrap();
        assert_eq!(sc.mode, Mode::Exact);
        assert_eq!(sc.precision, 128);
        assert_eq!(sc.budget, BudgetSpec::default());
    }

    #[test]
    fn field_path_is_reported() {
        let bad = MINIMAL.replace(r#""n": ["(12)"]"#, r#""n": [12]"#);
        let e = parse_scenario(&bad).unwrap_err();
        assert_eq!(e.path, "subgroups.n[0]");
        let bad = MINIMAL.replace("\"index\"", "\"volume\"");
        assert_eq!(parse_scenario(&bad).unwrap_err().path, "analyses[0]");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let bad = MINIMAL.replace("\"S3\"", "\"A5\"");
        assert_eq!(parse_scenario(&bad).unwrap_err().path, "group");
        let bad = MINIMAL.replace("\"index\"", "\"angle\"");
        assert_eq!(parse_scenario(&bad).unwrap_err().path, "analyses");
    }

    #[test]
    fn analyses_run_in_dependency_order() {
        let text = MINIMAL.replace(r#"["index"]"#, r#"["wahp", "index", "basis", "index"]"#);
        let sc = parse_scenario(&text).unwrap();
        assert_eq!(sc.ordered_analyses(), vec![Analysis::Index, Analysis::Basis, Analysis::Wahp]);
    }
}
