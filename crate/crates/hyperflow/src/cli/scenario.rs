//! Scenario files: JSON descriptions of a system, its initial conditions and
//! what to compute. The published schema lives in `schema/scenario.schema.json`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::hamiltonian::{FrequencyProfile, HamiltonianTriple, ScalarExpression};
use crate::structures::{
    assemble_block_structure, matrix_from_rows, ComplexStructureTriple, Orientation,
};

/// A validation failure pinned to a field of the scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationError {}

/// One coefficient: an expression string or a plain number.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Term {
    Number(f64),
    Text(String),
}

impl Term {
    fn text(&self) -> String {
        match self {
            Term::Number(v) => format!("{v:?}"),
            Term::Text(s) => s.clone(),
        }
    }
}

/// A triple written either as `"(a, b, c)"` or as a three-element array.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Triple {
    List([Term; 3]),
    Text(String),
}

impl Triple {
    pub fn parts(&self) -> Result<[String; 3], String> {
        match self {
            Triple::List(items) => Ok(items.clone().map(|t| t.text())),
            Triple::Text(s) => {
                let inner = s.trim();
                let inner = inner
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| format!("expected `(a, b, c)`, got `{s}`"))?;
                let parts = split_top_level(inner);
                let n = parts.len();
                parts
                    .try_into()
                    .map_err(|_| format!("expected three components, got {n}"))
            }
        }
    }
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur.trim().to_string());
    out
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub c: Triple,
    #[serde(default)]
    pub c_hat: Option<Triple>,
    /// Radial damping term `f0(r1)` of the asymptotic system.
    #[serde(default)]
    pub f0: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "one")]
    pub sample_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    /// Block radii at which the coefficients are frozen; defaults to all ones.
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectSpec {
    #[serde(default)]
    pub radii: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub samples_per_radius: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: usize,
    pub signature: Vec<Orientation>,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub hamiltonians: Option<[String; 3]>,
    #[serde(default)]
    pub initial_conditions: Vec<Vec<f64>>,
    #[serde(default)]
    pub time: Option<TimeSpec>,
    /// Explicit matrices `L_1, L_2, L_3` as arrays of rows.
    #[serde(default)]
    pub structure: Option<[Vec<Vec<f64>>; 3]>,
    #[serde(default)]
    pub symmetry: SymmetrySpec,
    #[serde(default)]
    pub detect: DetectSpec,
    /// Components of a vector field to test with `detect`.
    #[serde(default)]
    pub field: Option<Vec<String>>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ValidationError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "$".to_string() } else { path };
            ValidationError::new(field, e.into_inner())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ValidationError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ValidationError::new("scenario", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    fn validate(&self) -> Result<(), ValidationError> {
        if self.n == 0 {
            return Err(ValidationError::new("n", "must be at least 1"));
        }
        if self.signature.len() != self.n {
            return Err(ValidationError::new(
                "signature",
                format!("has {} entries, expected n = {}", self.signature.len(), self.n),
            ));
        }
        for (i, x) in self.initial_conditions.iter().enumerate() {
            if x.len() != self.dim() {
                return Err(ValidationError::new(
                    format!("initial_conditions[{i}]"),
                    format!("has {} entries, expected {}", x.len(), self.dim()),
                ));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(ValidationError::new(
                    format!("initial_conditions[{i}]"),
                    "entries must be finite",
                ));
            }
        }
        if let Some(t) = &self.time {
            if !(t.t_end > 0.0 && t.t_end.is_finite()) {
                return Err(ValidationError::new("time.t_end", "must be positive"));
            }
            if !(t.dt > 0.0 && t.dt.is_finite()) {
                return Err(ValidationError::new("time.dt", "must be positive"));
            }
            if t.sample_stride == 0 {
                return Err(ValidationError::new("time.sample_stride", "must be at least 1"));
            }
        }
        if let Some(p) = &self.profile {
            self.parse_triple(&p.c, "profile.c")?;
            if let Some(h) = &p.c_hat {
                self.parse_triple(h, "profile.c_hat")?;
            }
            if let Some(f0) = &p.f0 {
                if self.n != 1 {
                    return Err(ValidationError::new("profile.f0", "only supported for n = 1"));
                }
                self.parse_expr(f0, "profile.f0")?;
            }
            self.profile()?;
        }
        if let Some(h) = &self.hamiltonians {
            for (a, text) in h.iter().enumerate() {
                self.parse_expr(text, &format!("hamiltonians[{a}]"))?;
            }
        }
        if self.structure.is_some() {
            self.structure()?;
        }
        if let Some(rho) = &self.symmetry.rho {
            if rho.len() != self.n || rho.iter().any(|r| r.is_nan() || *r < 0.0) {
                return Err(ValidationError::new(
                    "symmetry.rho",
                    format!("expected {} nonnegative radii", self.n),
                ));
            }
        }
        if let Some(radii) = &self.detect.radii {
            for (i, r) in radii.iter().enumerate() {
                if r.len() != self.n || r.iter().any(|v| v.is_nan() || *v <= 0.0) {
                    return Err(ValidationError::new(
                        format!("detect.radii[{i}]"),
                        format!("expected {} positive radii", self.n),
                    ));
                }
            }
        }
        if let Some(f) = &self.field {
            if f.len() != self.dim() {
                return Err(ValidationError::new(
                    "field",
                    format!("has {} components, expected {}", f.len(), self.dim()),
                ));
            }
            for (i, text) in f.iter().enumerate() {
                self.parse_expr(text, &format!("field[{i}]"))?;
            }
        }
        Ok(())
    }

    fn parse_expr(&self, text: &str, field: &str) -> Result<ScalarExpression, ValidationError> {
        ScalarExpression::parse(text, self.dim()).map_err(|e| ValidationError::new(field, e))
    }

    fn parse_triple(
        &self,
        t: &Triple,
        field: &str,
    ) -> Result<[ScalarExpression; 3], ValidationError> {
        let parts = t.parts().map_err(|e| ValidationError::new(field, e))?;
        let mut out = Vec::with_capacity(3);
        for (a, text) in parts.iter().enumerate() {
            let e = self.parse_expr(text, &format!("{field}[{a}]"))?;
            if !e.is_radial() {
                return Err(ValidationError::new(
                    format!("{field}[{a}]"),
                    "coefficients may depend on r1..rn only",
                ));
            }
            out.push(e);
        }
        Ok(out.try_into().expect("three parts"))
    }

    /// The frequency profile, when the scenario has one.
    pub fn profile(&self) -> Result<Option<FrequencyProfile>, ValidationError> {
        let Some(p) = &self.profile else {
            return Ok(None);
        };
        let c = self.parse_triple(&p.c, "profile.c")?;
        let hatted = p
            .c_hat
            .as_ref()
            .map(|h| self.parse_triple(h, "profile.c_hat"))
            .transpose()?;
        FrequencyProfile::new(c, hatted, self.signature.clone())
            .map(Some)
            .map_err(|e| ValidationError::new("profile", e))
    }

    pub fn f0(&self) -> Result<Option<ScalarExpression>, ValidationError> {
        self.profile
            .as_ref()
            .and_then(|p| p.f0.as_ref())
            .map(|f| self.parse_expr(f, "profile.f0"))
            .transpose()
    }

    pub fn hamiltonians(&self) -> Result<Option<HamiltonianTriple>, ValidationError> {
        let Some(h) = &self.hamiltonians else {
            return Ok(None);
        };
        HamiltonianTriple::parse([&h[0], &h[1], &h[2]], self.dim())
            .map(Some)
            .map_err(|e| ValidationError::new("hamiltonians", e))
    }

    /// The explicit structure if given, else the block structure of the signature.
    pub fn structure(&self) -> Result<ComplexStructureTriple, ValidationError> {
        match &self.structure {
            Some(rows) => {
                let mut mats = Vec::with_capacity(3);
                for (a, r) in rows.iter().enumerate() {
                    let m = matrix_from_rows(r)
                        .map_err(|e| ValidationError::new(format!("structure[{a}]"), e))?;
                    if m.nrows() != self.dim() {
                        return Err(ValidationError::new(
                            format!("structure[{a}]"),
                            format!("is {0}x{0}, expected {1}x{1}", m.nrows(), self.dim()),
                        ));
                    }
                    mats.push(m);
                }
                let [a, b, c]: [_; 3] = mats.try_into().expect("three matrices");
                ComplexStructureTriple::new([a, b, c])
                    .map_err(|e| ValidationError::new("structure", e))
            }
            None => assemble_block_structure(&self.signature)
                .map_err(|e| ValidationError::new("signature", e)),
        }
    }

    pub fn vector_field(&self) -> Result<Option<Vec<ScalarExpression>>, ValidationError> {
        let Some(f) = &self.field else {
            return Ok(None);
        };
        f.iter()
            .enumerate()
            .map(|(i, t)| self.parse_expr(t, &format!("field[{i}]")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "n": 1,
        "signature": ["positive"],
        "profile": {"c": "(r1*(1 - r1), 0, 1)"},
        "initial_conditions": [[1, 0, 0, 0]],
        "time": {"t_end": 1.0, "dt": 0.01}
    }"#;

    #[test]
    fn parses_a_minimal_scenario() {
        let s = Scenario::from_json(BASE).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.time.as_ref().unwrap().sample_stride, 1);
        let p = s.profile().unwrap().unwrap();
        assert_eq!(p.coefficients(&[0.5]), [0.25, 0.0, 1.0]);
    }

    #[test]
    fn triple_forms() {
        let list: Triple = serde_json::from_str(r#"["r1", 0.5, "1"]"#).unwrap();
        assert_eq!(list.parts().unwrap(), ["r1", "0.5", "1"]);
        let text = Triple::Text("(a(b,c), d, e)".into());
        assert_eq!(text.parts().unwrap(), ["a(b,c)", "d", "e"]);
        assert!(Triple::Text("(1, 2)".into()).parts().is_err());
        assert!(Triple::Text("1, 2, 3".into()).parts().is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let bad = BASE.replace("\"dt\": 0.01", "\"dt\": \"fast\"");
        assert_eq!(Scenario::from_json(&bad).unwrap_err().field, "time.dt");

        let bad = BASE.replace("[[1, 0, 0, 0]]", "[[1, 0, 0]]");
        assert_eq!(
            Scenario::from_json(&bad).unwrap_err().field,
            "initial_conditions[0]"
        );

        let bad = BASE.replace("(r1*(1 - r1), 0, 1)", "(r1, x1 +, 1)");
        assert_eq!(Scenario::from_json(&bad).unwrap_err().field, "profile.c[1]");

        let bad = BASE.replace("(r1*(1 - r1), 0, 1)", "(r1, x1, 1)");
        assert_eq!(Scenario::from_json(&bad).unwrap_err().field, "profile.c[1]");

        let bad = BASE.replace("\"positive\"", "\"sideways\"");
        assert_eq!(Scenario::from_json(&bad).unwrap_err().field, "signature[0]");

        let bad = BASE.replace("\"n\": 1", "\"n\": 1, \"bogus\": 3");
        assert!(Scenario::from_json(&bad).is_err());
    }

    #[test]
    fn explicit_structure_is_checked_for_size() {
        let s = BASE.replace(
            "\"n\": 1,",
            r#""n": 1, "structure": [[[0,1],[-1,0]], [[0,1],[-1,0]], [[0,1],[-1,0]]],"#,
        );
        assert_eq!(Scenario::from_json(&s).unwrap_err().field, "structure[0]");
    }
}
