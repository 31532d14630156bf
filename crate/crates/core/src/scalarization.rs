//! Weighting scalar problems `minimize lambda . f(x)` over the feasible set,
//! certified at grid resolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{evaluate, Problem, INTERIOR_INSET};
use crate::tol::ToleranceConfig;

/// Minimizers closer than this are the same point.
pub const CLUSTER_RADIUS: f64 = 1e-6;

const ARMIJO: f64 = 1e-4;
const POLISH_ITERATIONS: usize = 500;
const POLISH_GRADIENT_NORM: f64 = 1e-8;

/// A point of the weight simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        const SLACK: f64 = 1e-9;
        if lambda.is_empty() || lambda.iter().any(|v| !v.is_finite() || *v < -SLACK) {
            return Err(Error::InvalidWeight(format!("{lambda:?} is not nonnegative")));
        }
        let total: f64 = lambda.iter().sum();
        if (total - 1.0).abs() > SLACK {
            return Err(Error::InvalidWeight(format!("{lambda:?} sums to {total}")));
        }
        Ok(Self(lambda))
    }

    /// Scales a nonnegative, nonzero vector onto the simplex.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) || total <= 0.0 {
            return Err(Error::InvalidWeight(format!("{raw:?} cannot be normalized")));
        }
        Ok(Self(raw.iter().map(|v| v / total).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn apply(&self, f: &[f64]) -> f64 {
        linalg::dot(&self.0, f)
    }
}

/// Every weight vector on the simplex whose components are multiples of `step`.
pub fn simplex_grid(n: usize, step: f64) -> Result<Vec<WeightVector>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidGridStep(step));
    }
    let parts = (1.0 / step).round() as usize;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    compositions(n, parts, &mut current, &mut out);
    out.into_iter()
        .map(|c| WeightVector::new(c.iter().map(|&k| k as f64 / parts as f64).collect()))
        .collect()
}

fn compositions(n: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() + 1 == n {
        current.push(remaining);
        out.push(current.clone());
        current.pop();
        return;
    }
    for k in (0..=remaining).rev() {
        current.push(k);
        compositions(n, remaining - k, current, out);
        current.pop();
    }
}

/// Feasible grid nodes with their objective vectors, reused across checks.
pub struct FeasibleGrid {
    pub step: f64,
    pub nodes: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl FeasibleGrid {
    pub fn new(problem: &Problem, step: f64, tol: &ToleranceConfig) -> Result<Self> {
        let evaluated: Vec<Option<(Vec<f64>, Vec<f64>)>> = problem
            .grid(step)?
            .into_par_iter()
            .map(|x| {
                let feasible = problem.is_feasible(&x, tol).ok()?;
                if !feasible {
                    return None;
                }
                let f = problem.objective_values(&x).ok()?;
                Some((x, f))
            })
            .collect();
        let (nodes, values): (Vec<_>, Vec<_>) = evaluated.into_iter().flatten().unzip();
        if nodes.is_empty() {
            return Err(Error::EmptyFeasibleSet);
        }
        Ok(Self { step, nodes, values })
    }

    fn weighted(&self, w: &WeightVector) -> Vec<f64> {
        self.values.iter().map(|f| w.apply(f)).collect()
    }

    /// Compares the weighted value at `x` against every node.
    pub fn global_status(&self, w: &WeightVector, x: &[f64], fx: &[f64], tol: &ToleranceConfig) -> GlobalStatus {
        let value = w.apply(fx);
        let weighted = self.weighted(w);
        let mut best: Option<(usize, f64)> = None;
        let mut tie: Option<usize> = None;
        for (i, v) in weighted.iter().enumerate() {
            if *v < value - tol.value && best.is_none_or(|(_, b)| *v < b) {
                best = Some((i, *v));
            }
            if tie.is_none()
                && (*v - value).abs() <= tol.value
                && linalg::distance(&self.nodes[i], x) > CLUSTER_RADIUS
            {
                tie = Some(i);
            }
        }
        match (best, tie) {
            (Some((i, v)), _) => GlobalStatus::NotGlobal {
                value,
                witness: self.nodes[i].clone(),
                witness_value: v,
            },
            (None, Some(i)) => GlobalStatus::Global {
                value,
                tie: self.nodes[i].clone(),
            },
            (None, None) => GlobalStatus::UniqueGlobal { value },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum GlobalStatus {
    /// No node is better, and every node of equal value lies within [`CLUSTER_RADIUS`].
    UniqueGlobal { value: f64 },
    /// No node is better, but `tie` attains the same value elsewhere.
    Global { value: f64, tie: Vec<f64> },
    NotGlobal {
        value: f64,
        witness: Vec<f64>,
        witness_value: f64,
    },
}

impl GlobalStatus {
    pub fn is_global(&self) -> bool {
        !matches!(self, GlobalStatus::NotGlobal { .. })
    }

    pub fn is_unique(&self) -> bool {
        matches!(self, GlobalStatus::UniqueGlobal { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightingSolution {
    pub weights: WeightVector,
    pub minimizers: Vec<Vec<f64>>,
    pub value: f64,
    /// Always true: the minimum is certified over the grid, not the continuum.
    pub certified: bool,
    pub grid_step: f64,
}

pub fn solve_weighting(
    problem: &Problem,
    w: &WeightVector,
    grid_step: f64,
    tol: &ToleranceConfig,
) -> Result<WeightingSolution> {
    let grid = FeasibleGrid::new(problem, grid_step, tol)?;
    solve_weighting_on(problem, &grid, w, tol)
}

pub fn solve_weighting_on(
    problem: &Problem,
    grid: &FeasibleGrid,
    w: &WeightVector,
    tol: &ToleranceConfig,
) -> Result<WeightingSolution> {
    check_arity(problem, w)?;
    let weighted = grid.weighted(w);
    let best = weighted.iter().copied().fold(f64::INFINITY, f64::min);
    let starts: Vec<&Vec<f64>> = grid
        .nodes
        .iter()
        .zip(&weighted)
        .filter(|(_, v)| **v <= best + tol.value)
        .map(|(x, _)| x)
        .collect();

    let polished: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|x| polish(problem, w, x, tol))
        .collect();

    let value = polished.iter().map(|(_, v)| *v).fold(best, f64::min);
    let mut minimizers: Vec<Vec<f64>> = Vec::new();
    for (x, v) in polished {
        if v <= value + tol.value && minimizers.iter().all(|m| linalg::distance(m, &x) > CLUSTER_RADIUS) {
            minimizers.push(x);
        }
    }
    Ok(WeightingSolution {
        weights: w.clone(),
        minimizers,
        value,
        certified: true,
        grid_step: grid.step,
    })
}

fn check_arity(problem: &Problem, w: &WeightVector) -> Result<()> {
    if w.as_slice().len() != problem.objective_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} objectives",
            w.as_slice().len(),
            problem.objective_count()
        )));
    }
    Ok(())
}

/// Projected gradient descent with Armijo backtracking. Trial points must
/// satisfy every constraint exactly, without the feasibility band.
fn polish(problem: &Problem, w: &WeightVector, start: &[f64], tol: &ToleranceConfig) -> (Vec<f64>, f64) {
    let weighted = |x: &[f64]| -> Option<(f64, Vec<f64>)> {
        let ep = evaluate(problem, x, tol).ok()?;
        if ep.g.iter().any(|g| *g > 0.0) {
            return None;
        }
        let value = w.apply(&ep.f);
        let grad = linalg::vec_mat(w.as_slice(), &ep.jacobian_f, x.len());
        Some((value, grad))
    };
    let mut x = start.to_vec();
    let Some((mut value, mut grad)) = weighted(&x) else {
        let v = problem.objective_values(start).map_or(f64::INFINITY, |f| w.apply(&f));
        return (x, v);
    };
    for _ in 0..POLISH_ITERATIONS {
        if linalg::norm_inf(&grad) <= POLISH_GRADIENT_NORM {
            break;
        }
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-20 {
            let trial: Vec<f64> = x
                .iter()
                .zip(&grad)
                .zip(&problem.bounds)
                .map(|((xi, gi), (lo, hi))| (xi - alpha * gi).clamp(lo + INTERIOR_INSET, hi - INTERIOR_INSET))
                .collect();
            let step = linalg::sub(&trial, &x);
            if let Some((v, g)) = weighted(&trial) {
                if v <= value + ARMIJO * linalg::dot(&grad, &step) && v < value {
                    x = trial;
                    value = v;
                    grad = g;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, value)
}

pub fn is_global_weighting_solution(
    problem: &Problem,
    w: &WeightVector,
    x: &[f64],
    grid_step: f64,
    tol: &ToleranceConfig,
) -> Result<GlobalStatus> {
    check_arity(problem, w)?;
    let ep = evaluate(problem, x, tol)?;
    if !ep.feasible {
        return Err(Error::InfeasiblePoint {
            point: x.to_vec(),
            max_violation: ep.max_violation(),
        });
    }
    let grid = FeasibleGrid::new(problem, grid_step, tol)?;
    Ok(grid.global_status(w, x, &ep.f, tol))
}

/// Feasible nodes not strictly dominated in every objective by another node.
pub fn weakly_efficient_scan(problem: &Problem, grid_step: f64, tol: &ToleranceConfig) -> Result<Vec<Vec<f64>>> {
    let grid = FeasibleGrid::new(problem, grid_step, tol)?;
    Ok(weakly_efficient_on(&grid))
}

pub fn weakly_efficient_on(grid: &FeasibleGrid) -> Vec<Vec<f64>> {
    let keep: Vec<bool> = grid
        .values
        .par_iter()
        .map(|fbar| {
            !grid
                .values
                .iter()
                .any(|f| f.iter().zip(fbar).all(|(a, b)| a < b))
        })
        .collect();
    grid.nodes
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(x, _)| x.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fixture;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.5, 1.5]).is_err());
        assert_eq!(WeightVector::normalized(&[2.0, 2.0]).unwrap(), w(&[0.5, 0.5]));
        assert!(WeightVector::normalized(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(2, 0.1).unwrap().len(), 11);
        assert_eq!(simplex_grid(3, 0.5).unwrap().len(), 6);
        assert_eq!(simplex_grid(1, 0.1).unwrap(), vec![w(&[1.0])]);
    }

    #[test]
    fn counterexample_weighting_interval() {
        let p = fixture("paper-example-2.1").unwrap();
        let sol = solve_weighting(&p, &w(&[0.5, 0.5]), 0.01, &tol()).unwrap();
        assert_eq!(sol.value, 0.0);
        let xs: Vec<f64> = sol.minimizers.iter().map(|m| m[0]).collect();
        assert!(xs.iter().all(|x| (-1.0 - 1e-9..=1.0 + 1e-9).contains(x)));
        assert_eq!(xs.len(), 201);
    }

    #[test]
    fn boundary_minimizers() {
        let p = fixture("kt-linear-quad").unwrap();
        let sol = solve_weighting(&p, &w(&[1.0, 0.0]), 0.01, &tol()).unwrap();
        assert_eq!(sol.minimizers, vec![vec![0.0]]);
        assert_eq!(sol.value, 0.0);

        let p = fixture("convex-pair").unwrap();
        let sol = solve_weighting(&p, &w(&[1.0, 0.0]), 0.01, &tol()).unwrap();
        assert_eq!(sol.minimizers.len(), 1);
        assert!(sol.minimizers[0][0].abs() < 1e-8 && sol.value < 1e-15);
    }

    #[test]
    fn polish_sharpens_off_grid_minimum() {
        let p = Problem::from_json(
            r#"{"name":"q","variables":["x"],"objectives":["(x-0.123)^2"],"box":[[-1,1]]}"#,
        )
        .unwrap();
        let sol = solve_weighting(&p, &w(&[1.0]), 0.1, &tol()).unwrap();
        assert_eq!(sol.minimizers.len(), 1);
        assert!((sol.minimizers[0][0] - 0.123).abs() < 1e-6);
    }

    #[test]
    fn global_status_examples() {
        let t = tol();
        let p = fixture("paper-example-2.1").unwrap();
        match is_global_weighting_solution(&p, &w(&[0.5, 0.5]), &[0.0], 0.01, &t).unwrap() {
            GlobalStatus::Global { tie, .. } => assert!(tie[0].abs() <= 1.0 + 1e-9),
            other => panic!("{other:?}"),
        }
        let p = fixture("kt-linear-quad").unwrap();
        assert!(is_global_weighting_solution(&p, &w(&[1.0, 0.0]), &[0.0], 0.01, &t)
            .unwrap()
            .is_unique());
        match is_global_weighting_solution(&p, &w(&[1.0, 0.0]), &[1.0], 0.01, &t).unwrap() {
            GlobalStatus::NotGlobal { witness, .. } => assert_eq!(witness, vec![0.0]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            is_global_weighting_solution(&p, &w(&[1.0, 0.0]), &[-1.0], 0.01, &t),
            Err(Error::InfeasiblePoint { .. })
        ));
    }

    #[test]
    fn weakly_efficient_sets() {
        let t = tol();
        let p = fixture("paper-example-2.1").unwrap();
        let xs: Vec<f64> = weakly_efficient_scan(&p, 0.01, &t).unwrap().iter().map(|x| x[0]).collect();
        assert_eq!(xs.len(), 201);
        assert!(xs.iter().all(|x| (-1.0..=1.0).contains(x)));

        let p = fixture("cube").unwrap();
        let xs = weakly_efficient_scan(&p, 0.01, &t).unwrap();
        assert_eq!(xs, vec![vec![-2.0 + INTERIOR_INSET]]);

        let p = fixture("convex-pair").unwrap();
        let xs: Vec<f64> = weakly_efficient_scan(&p, 0.01, &t).unwrap().iter().map(|x| x[0]).collect();
        let oracle: Vec<f64> = p
            .grid(0.01)
            .unwrap()
            .iter()
            .map(|x| x[0])
            .filter(|x| (0.0..=1.0).contains(x))
            .collect();
        assert_eq!(xs, oracle);
    }

    #[test]
    fn infeasible_everywhere() {
        let p = Problem::from_json(
            r#"{"name":"e","variables":["x"],"objectives":["x"],"constraints":["1"],"box":[[0,1]]}"#,
        )
        .unwrap();
        assert!(matches!(
            solve_weighting(&p, &w(&[1.0]), 0.1, &tol()),
            Err(Error::EmptyFeasibleSet)
        ));
    }
}
