//! Differentiable multiobjective programs
//!
//! ```text
//! minimize (f_1(x), ..., f_n(x))  subject to  g_j(x) <= 0,  x in box
//! ```
//!
//! The box is the sampling region; analyses only visit its interior, inset by
//! [`INTERIOR_INSET`], standing in for the open set the problem lives on.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expr, ExprError};
use crate::linalg::Matrix;
use crate::tol::ToleranceConfig;

pub const INTERIOR_INSET: f64 = 1e-9;

pub const FIXTURE_NAMES: &[&str] = &[
    "paper-example-2.1",
    "cube",
    "convex-pair",
    "kt-linear-quad",
    "two-var-convex",
];

/// On-disk problem definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub variables: Vec<String>,
    pub objectives: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub variables: Vec<String>,
    pub objectives: Vec<Expr>,
    pub constraints: Vec<Expr>,
    pub bounds: Vec<(f64, f64)>,
    source: ProblemFile,
}

#[derive(Debug, thiserror::Error)]
#[error("{field}: {source}")]
pub struct FieldError {
    pub field: String,
    #[source]
    pub source: ExprError,
}

impl Problem {
    pub fn from_file(file: ProblemFile) -> Result<Self> {
        if file.objectives.is_empty() {
            return Err(Error::InvalidProblem("at least one objective is required".into()));
        }
        if file.bounds.len() != file.variables.len() {
            return Err(Error::InvalidProblem(format!(
                "{} variables but {} box intervals",
                file.variables.len(),
                file.bounds.len()
            )));
        }
        for (i, name) in file.variables.iter().enumerate() {
            let valid = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || expr::RESERVED.contains(&name.as_str()) {
                return Err(Error::InvalidProblem(format!("invalid variable name `{name}`")));
            }
            if file.variables[..i].contains(name) {
                return Err(Error::InvalidProblem(format!("duplicate variable `{name}`")));
            }
        }
        for (name, [lo, hi]) in file.variables.iter().zip(&file.bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidProblem(format!(
                    "box for `{name}` must satisfy lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        let parse_all = |field: &str, texts: &[String]| -> Result<Vec<Expr>> {
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    expr::parse(t, &file.variables).map_err(|source| {
                        Error::InvalidProblem(
                            FieldError {
                                field: format!("{field}[{i}]"),
                                source,
                            }
                            .to_string(),
                        )
                    })
                })
                .collect()
        };
        let objectives = parse_all("objectives", &file.objectives)?;
        let constraints = parse_all("constraints", &file.constraints)?;
        Ok(Self {
            name: file.name.clone(),
            variables: file.variables.clone(),
            objectives,
            constraints,
            bounds: file.bounds.iter().map(|b| (b[0], b[1])).collect(),
            source: file,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "problem file".into(),
            source,
        })?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            context: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                context: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn source(&self) -> &ProblemFile {
        &self.source
    }

    /// Dimension `s` of the decision space.
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Number of objectives `n`.
    pub fn objective_count(&self) -> usize {
        self.objectives.len()
    }

    /// Number of constraints `m`.
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Interior grid: nodes `lo + k * step` per axis, pulled inside the box by
    /// [`INTERIOR_INSET`]. Nodes are ordered with the first variable slowest.
    pub fn grid(&self, step: f64) -> Result<Vec<Vec<f64>>> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGridStep(step));
        }
        let axes: Vec<Vec<f64>> = self
            .bounds
            .iter()
            .map(|&(lo, hi)| {
                let count = ((hi - lo) / step + 1e-9).floor() as usize;
                (0..=count)
                    .map(|k| snap(lo + k as f64 * step).clamp(lo + INTERIOR_INSET, hi - INTERIOR_INSET))
                    .collect()
            })
            .collect();
        let mut nodes = vec![Vec::with_capacity(self.dim())];
        for axis in &axes {
            nodes = nodes
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        Ok(nodes)
    }

    /// Objective values only, skipping gradients.
    pub fn objective_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.objectives
            .iter()
            .map(|e| expr::eval(e, x).map_err(Error::from))
            .collect()
    }

    pub fn constraint_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.constraints
            .iter()
            .map(|e| expr::eval(e, x).map_err(Error::from))
            .collect()
    }

    pub fn is_feasible(&self, x: &[f64], tol: &ToleranceConfig) -> Result<bool> {
        Ok(self
            .constraint_values(x)?
            .iter()
            .all(|g| *g <= tol.feasibility))
    }
}

/// Rounds to twelve decimals so grid nodes print as their decimal values.
fn snap(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedPoint {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    /// Rows are objective gradients.
    pub jacobian_f: Matrix,
    pub g: Vec<f64>,
    pub jacobian_g: Matrix,
    /// Zero-based indices of constraints with `|g_j(x)| <= tol.active`.
    pub active_set: Vec<usize>,
    pub feasible: bool,
}

impl EvaluatedPoint {
    /// Rows of the constraint Jacobian restricted to the active set.
    pub fn active_jacobian(&self) -> Matrix {
        self.active_set
            .iter()
            .map(|&j| self.jacobian_g[j].clone())
            .collect()
    }

    pub fn max_violation(&self) -> f64 {
        self.g.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }
}

pub fn evaluate(problem: &Problem, x: &[f64], tol: &ToleranceConfig) -> Result<EvaluatedPoint> {
    if x.len() != problem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, problem has {} variables",
            x.len(),
            problem.dim()
        )));
    }
    if !problem.in_box(x) {
        return Err(Error::OutOfBox { point: x.to_vec() });
    }
    let mut f = Vec::with_capacity(problem.objective_count());
    let mut jacobian_f = Vec::with_capacity(problem.objective_count());
    for e in &problem.objectives {
        let (v, grad) = expr::eval_with_gradient(e, x)?;
        f.push(v);
        jacobian_f.push(grad);
    }
    let mut g = Vec::with_capacity(problem.constraint_count());
    let mut jacobian_g = Vec::with_capacity(problem.constraint_count());
    for e in &problem.constraints {
        let (v, grad) = expr::eval_with_gradient(e, x)?;
        g.push(v);
        jacobian_g.push(grad);
    }
    let active_set = g
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= tol.active)
        .map(|(j, _)| j)
        .collect();
    let feasible = g.iter().all(|v| *v <= tol.feasibility);
    Ok(EvaluatedPoint {
        x: x.to_vec(),
        f,
        jacobian_f,
        g,
        jacobian_g,
        active_set,
        feasible,
    })
}

/// Classification of `a` against `b` under the componentwise orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorOrder {
    /// `a_i < b_i` for every `i`.
    StrictlyLess,
    /// `a_i <= b_i` for every `i` and `a != b`, but not strictly everywhere.
    LeqNotEqual,
    /// `a == b`.
    LeqAll,
    /// `a_i > b_i` for some `i`.
    Incomparable,
}

impl VectorOrder {
    /// `a < b`
    pub fn strictly_less(self) -> bool {
        self == VectorOrder::StrictlyLess
    }

    /// `a ≤ b`: componentwise and not equal.
    pub fn leq_not_equal(self) -> bool {
        matches!(self, VectorOrder::StrictlyLess | VectorOrder::LeqNotEqual)
    }

    /// `a ≦ b`: componentwise.
    pub fn leq_all(self) -> bool {
        self != VectorOrder::Incomparable
    }
}

pub fn compare(a: &[f64], b: &[f64]) -> Result<VectorOrder> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().zip(b).any(|(x, y)| x > y) {
        return Ok(VectorOrder::Incomparable);
    }
    if a == b {
        return Ok(VectorOrder::LeqAll);
    }
    if a.iter().zip(b).all(|(x, y)| x < y) {
        Ok(VectorOrder::StrictlyLess)
    } else {
        Ok(VectorOrder::LeqNotEqual)
    }
}

pub fn fixture(name: &str) -> Result<Problem> {
    let text = match name {
        "paper-example-2.1" => include_str!("../fixtures/paper-example-2.1.json"),
        "cube" => include_str!("../fixtures/cube.json"),
        "convex-pair" => include_str!("../fixtures/convex-pair.json"),
        "kt-linear-quad" => include_str!("../fixtures/kt-linear-quad.json"),
        "two-var-convex" => include_str!("../fixtures/two-var-convex.json"),
        _ => return Err(Error::UnknownFixture(name.to_string())),
    };
    Problem::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn fixtures_load() {
        for name in FIXTURE_NAMES {
            let p = fixture(name).unwrap();
            assert_eq!(p.name, *name);
        }
        let p = fixture("paper-example-2.1").unwrap();
        assert_eq!((p.objective_count(), p.constraint_count()), (2, 0));
        assert_eq!(fixture("cube").unwrap().objective_count(), 1);
        assert!(matches!(fixture("nope"), Err(Error::UnknownFixture(_))));
    }

    #[test]
    fn evaluate_counterexample() {
        let p = fixture("paper-example-2.1").unwrap();
        let ep = evaluate(&p, &[0.0], &tol()).unwrap();
        assert_eq!(ep.f, vec![0.0, 0.0]);
        assert_eq!(ep.jacobian_f, vec![vec![0.0], vec![0.0]]);
        assert!(ep.g.is_empty() && ep.feasible);
        let ep = evaluate(&p, &[2.0], &tol()).unwrap();
        assert_eq!(ep.f, vec![1.0, 1.0]);
        assert_eq!(ep.jacobian_f, vec![vec![2.0], vec![4.0]]);
    }

    #[test]
    fn evaluate_active_constraint() {
        let p = fixture("kt-linear-quad").unwrap();
        let ep = evaluate(&p, &[0.0], &tol()).unwrap();
        assert_eq!(ep.f, vec![0.0, 0.0]);
        assert_eq!(ep.jacobian_f, vec![vec![1.0], vec![0.0]]);
        assert_eq!(ep.g, vec![0.0]);
        assert_eq!(ep.active_set, vec![0]);
        assert!(ep.feasible);
        let ep = evaluate(&p, &[-0.5], &tol()).unwrap();
        assert!(!ep.feasible && ep.active_set.is_empty());
        assert!(matches!(evaluate(&p, &[2.5], &tol()), Err(Error::OutOfBox { .. })));
    }

    #[test]
    fn vector_orders() {
        assert_eq!(compare(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), VectorOrder::LeqAll);
        assert_eq!(compare(&[1.0, 1.0], &[2.0, 2.0]).unwrap(), VectorOrder::StrictlyLess);
        assert_eq!(compare(&[1.0, 3.0], &[2.0, 2.0]).unwrap(), VectorOrder::Incomparable);
        assert_eq!(compare(&[1.0, 2.0], &[1.0, 3.0]).unwrap(), VectorOrder::LeqNotEqual);
        let eq = compare(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(eq.leq_all() && !eq.leq_not_equal() && !eq.strictly_less());
        assert!(compare(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn counterexample_zero_set() {
        let p = fixture("paper-example-2.1").unwrap();
        for x in p.grid(0.01).unwrap() {
            let f = p.objective_values(&x).unwrap();
            assert!(f.iter().all(|v| *v >= 0.0));
            let inside = x[0] >= -1.0 - 1e-12 && x[0] <= 1.0 + 1e-12;
            assert_eq!(f.iter().all(|v| *v == 0.0), inside, "x = {}", x[0]);
        }
    }

    #[test]
    fn grid_nodes() {
        let p = fixture("paper-example-2.1").unwrap();
        let g = p.grid(0.25).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0][0], -3.0 + INTERIOR_INSET);
        assert_eq!(g[12][0], 0.0);
        assert_eq!(g[24][0], 3.0 - INTERIOR_INSET);
        let p = fixture("two-var-convex").unwrap();
        assert_eq!(p.grid(0.5).unwrap().len(), 81);
        assert!(p.grid(0.0).is_err());
    }

    #[test]
    fn invalid_files() {
        let bad = [
            r#"{"name":"a","variables":["x"],"objectives":[],"box":[[0,1]]}"#,
            r#"{"name":"a","variables":["x"],"objectives":["x"],"box":[[1,0]]}"#,
            r#"{"name":"a","variables":["exp"],"objectives":["1"],"box":[[0,1]]}"#,
            r#"{"name":"a","variables":["x"],"objectives":["y"],"box":[[0,1]]}"#,
            r#"{"name":"a","variables":["x","x"],"objectives":["x"],"box":[[0,1],[0,1]]}"#,
            r#"{"name":"a","variables":["x"],"objectives":["x"]}"#,
        ];
        for text in bad {
            assert!(Problem::from_json(text).is_err(), "{text}");
        }
        let err = Problem::from_json(r#"{"name":"a","variables":["x"],"objectives":["x +"],"box":[[0,1]]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("objectives[0]") && err.contains("byte 3"), "{err}");
    }
}
