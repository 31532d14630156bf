//! Vector critical points and Kuhn-Tucker stationary points.
//!
//! Multipliers are recovered by linear programming with `sum(lambda) = 1`.
//! Among all valid multipliers the canonical representative maximizes the
//! smallest weight (for KT points: after minimizing `sum(mu)`). The extreme
//! values of each `lambda_i` over the multiplier set are reported too; the
//! set of weights for which a point solves its weighting problem is convex,
//! so checking the extremes covers the whole multiplier set when `n <= 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lp::{self, LpOutcome, LpProblem, RowKind, VarBound};
use crate::problem::{evaluate, EvaluatedPoint, Problem};
use crate::tol::ToleranceConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalMultipliers {
    pub lambda: Vec<f64>,
    /// `||lambda Jf(x)||_inf`
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KtMultipliers {
    pub lambda: Vec<f64>,
    /// One entry per index of `active_set`; zero on every inactive constraint.
    pub mu: Vec<f64>,
    pub active_set: Vec<usize>,
    /// `||lambda Jf(x) + mu Jg_I(x)||_inf`
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationarityKind {
    Vector,
    Kt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub x: Vec<f64>,
    pub kind: StationarityKind,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub active_set: Vec<usize>,
    pub residual: f64,
    /// Multipliers attaining the smallest and largest value of each `lambda_i`.
    pub extreme_lambdas: Vec<Vec<f64>>,
}

impl StationaryPoint {
    /// Canonical multiplier followed by the extremes, deduplicated.
    pub fn all_lambdas(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.lambda.clone()];
        for l in &self.extreme_lambdas {
            if out.iter().all(|o| linalg::distance(o, l) > 1e-9) {
                out.push(l.clone());
            }
        }
        out
    }
}

/// Stationarity system in LP form: variables `(lambda, mu)`, both nonnegative,
/// rows `Jf^T lambda + Jg_I^T mu = 0` and `sum(lambda) = 1`.
struct MultiplierSystem {
    n: usize,
    k: usize,
    matrix: Matrix,
    rhs: Vec<f64>,
    kinds: Vec<RowKind>,
}

impl MultiplierSystem {
    fn new(jf: &[Vec<f64>], jg_active: &[Vec<f64>], dim: usize) -> Self {
        let (n, k) = (jf.len(), jg_active.len());
        let mut matrix = Vec::with_capacity(dim + 1);
        for c in 0..dim {
            let mut row: Vec<f64> = jf.iter().map(|g| g[c]).collect();
            row.extend(jg_active.iter().map(|g| g[c]));
            matrix.push(row);
        }
        let mut simplex = vec![1.0; n];
        simplex.extend(std::iter::repeat_n(0.0, k));
        matrix.push(simplex);
        let mut rhs = vec![0.0; dim];
        rhs.push(1.0);
        Self {
            n,
            k,
            matrix,
            rhs,
            kinds: vec![RowKind::Eq; dim + 1],
        }
    }

    fn width(&self) -> usize {
        self.n + self.k
    }

    fn lp(&self, objective: Vec<f64>) -> LpProblem {
        LpProblem {
            objective,
            matrix: self.matrix.clone(),
            rhs: self.rhs.clone(),
            row_kinds: self.kinds.clone(),
            bounds: vec![VarBound::NonNegative; self.width()],
        }
    }

    /// Appends a free variable `t` with rows `t - lambda_i <= 0` and maximizes it.
    fn max_min_lambda(&self, extra: Option<(Vec<f64>, f64)>, tol: &ToleranceConfig) -> Result<Option<Vec<f64>>> {
        let w = self.width();
        let mut lp = self.lp(vec![0.0; w]);
        for row in lp.matrix.iter_mut() {
            row.push(0.0);
        }
        lp.bounds.push(VarBound::Free);
        lp.objective.push(-1.0);
        for i in 0..self.n {
            let mut row = vec![0.0; w + 1];
            row[i] = -1.0;
            row[w] = 1.0;
            lp.matrix.push(row);
            lp.rhs.push(0.0);
            lp.row_kinds.push(RowKind::Le);
        }
        if let Some((mut coeffs, bound)) = extra {
            coeffs.push(0.0);
            lp.matrix.push(coeffs);
            lp.rhs.push(bound);
            lp.row_kinds.push(RowKind::Le);
        }
        Ok(match lp::solve_lp(&lp, tol)? {
            LpOutcome::Optimal { x, .. } => Some(x[..w].to_vec()),
            _ => None,
        })
    }

    fn extremes(&self, tol: &ToleranceConfig) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; self.width()];
                c[i] = sign;
                if let LpOutcome::Optimal { x, .. } = lp::solve_lp(&self.lp(c), tol)? {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }
}

fn normalize(lambda: &mut [f64]) {
    lambda.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = lambda.iter().sum();
    if total > 0.0 {
        lambda.iter_mut().for_each(|v| *v /= total);
    }
}

pub fn stationarity_residual(jf: &[Vec<f64>], lambda: &[f64], jg_active: &[Vec<f64>], mu: &[f64]) -> f64 {
    let dim = jf.first().or(jg_active.first()).map_or(0, Vec::len);
    let mut r = linalg::vec_mat(lambda, jf, dim);
    for (ri, v) in r.iter_mut().zip(linalg::vec_mat(mu, jg_active, dim)) {
        *ri += v;
    }
    linalg::norm_inf(&r)
}

/// `lambda >= 0`, `sum(lambda) = 1`, `lambda Jf(x) = 0`, ignoring constraints.
pub fn critical_multipliers(ep: &EvaluatedPoint, tol: &ToleranceConfig) -> Result<Option<CriticalMultipliers>> {
    let sys = MultiplierSystem::new(&ep.jacobian_f, &[], ep.x.len());
    let Some(mut lambda) = sys.max_min_lambda(None, tol)? else {
        return Ok(None);
    };
    normalize(&mut lambda);
    let residual = stationarity_residual(&ep.jacobian_f, &lambda, &[], &[]);
    if residual > tol.stationary {
        return Ok(None);
    }
    Ok(Some(CriticalMultipliers { lambda, residual }))
}

/// Kuhn-Tucker multipliers on the active set with minimal `sum(mu)`.
pub fn kt_multipliers(ep: &EvaluatedPoint, tol: &ToleranceConfig) -> Result<Option<KtMultipliers>> {
    if !ep.feasible {
        return Err(Error::InfeasiblePoint {
            point: ep.x.clone(),
            max_violation: ep.max_violation(),
        });
    }
    let jg = ep.active_jacobian();
    let sys = MultiplierSystem::new(&ep.jacobian_f, &jg, ep.x.len());
    let (n, k) = (sys.n, sys.k);

    let mut sum_mu = vec![0.0; n];
    sum_mu.extend(std::iter::repeat_n(1.0, k));
    let first = match lp::solve_lp(&sys.lp(sum_mu.clone()), tol)? {
        LpOutcome::Optimal { x, value, .. } => (x, value),
        _ => return Ok(None),
    };
    let bound = first.1 + 1e-12 * first.1.abs().max(1.0);
    let mut sol = sys
        .max_min_lambda(Some((sum_mu, bound)), tol)?
        .unwrap_or(first.0);

    let mut mu = sol.split_off(n);
    let mut lambda = sol;
    let total: f64 = lambda.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return Ok(None);
    }
    normalize(&mut lambda);
    mu.iter_mut().for_each(|v| *v = v.max(0.0) / total);
    let residual = stationarity_residual(&ep.jacobian_f, &lambda, &jg, &mu);
    if residual > tol.stationary {
        return Ok(None);
    }
    Ok(Some(KtMultipliers {
        lambda,
        mu,
        active_set: ep.active_set.clone(),
        residual,
    }))
}

fn extreme_lambdas(ep: &EvaluatedPoint, kind: StationarityKind, tol: &ToleranceConfig) -> Result<Vec<Vec<f64>>> {
    let jg = match kind {
        StationarityKind::Vector => Vec::new(),
        StationarityKind::Kt => ep.active_jacobian(),
    };
    let sys = MultiplierSystem::new(&ep.jacobian_f, &jg, ep.x.len());
    let n = sys.n;
    let mut out: Vec<Vec<f64>> = Vec::new();
    for sol in sys.extremes(tol)? {
        let mut lambda = sol[..n].to_vec();
        let mu: Vec<f64> = sol[n..].to_vec();
        let total: f64 = lambda.iter().map(|v| v.max(0.0)).sum();
        if total <= 0.0 {
            continue;
        }
        normalize(&mut lambda);
        let mu: Vec<f64> = mu.iter().map(|v| v.max(0.0) / total).collect();
        if stationarity_residual(&ep.jacobian_f, &lambda, &jg, &mu) > tol.stationary {
            continue;
        }
        if out.iter().all(|o| linalg::distance(o, &lambda) > 1e-9) {
            out.push(lambda);
        }
    }
    Ok(out)
}

/// Stationary point at `ep`, if multipliers of the requested kind exist.
pub fn stationary_point(
    ep: &EvaluatedPoint,
    kind: StationarityKind,
    tol: &ToleranceConfig,
) -> Result<Option<StationaryPoint>> {
    let found = match kind {
        StationarityKind::Vector => critical_multipliers(ep, tol)?.map(|m| (m.lambda, Vec::new(), Vec::new(), m.residual)),
        StationarityKind::Kt => {
            if !ep.feasible {
                return Ok(None);
            }
            kt_multipliers(ep, tol)?.map(|m| (m.lambda, m.mu, m.active_set, m.residual))
        }
    };
    let Some((lambda, mu, active_set, residual)) = found else {
        return Ok(None);
    };
    Ok(Some(StationaryPoint {
        x: ep.x.clone(),
        kind,
        lambda,
        mu,
        active_set,
        residual,
        extreme_lambdas: extreme_lambdas(ep, kind, tol)?,
    }))
}

/// Every grid node (feasible ones for the KT kind) admitting multipliers.
pub fn scan_critical_points(
    problem: &Problem,
    grid_step: f64,
    kind: StationarityKind,
    tol: &ToleranceConfig,
) -> Result<Vec<StationaryPoint>> {
    let nodes = problem.grid(grid_step)?;
    let found: Vec<Option<StationaryPoint>> = nodes
        .par_iter()
        .map(|x| {
            let ep = evaluate(problem, x, tol).ok()?;
            stationary_point(&ep, kind, tol).ok().flatten()
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fixture;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn at(name: &str, x: &[f64]) -> EvaluatedPoint {
        evaluate(&fixture(name).unwrap(), x, &tol()).unwrap()
    }

    #[test]
    fn counterexample_interval_is_critical() {
        let m = critical_multipliers(&at("paper-example-2.1", &[0.5]), &tol())
            .unwrap()
            .unwrap();
        assert!((m.lambda[0] - 0.5).abs() < 1e-12 && (m.lambda[1] - 0.5).abs() < 1e-12);
        assert!(critical_multipliers(&at("paper-example-2.1", &[2.0]), &tol())
            .unwrap()
            .is_none());
    }

    #[test]
    fn cube_origin() {
        let m = critical_multipliers(&at("cube", &[0.0]), &tol()).unwrap().unwrap();
        assert_eq!(m.lambda, vec![1.0]);
    }

    #[test]
    fn kt_boundary_point() {
        let m = kt_multipliers(&at("kt-linear-quad", &[0.0]), &tol()).unwrap().unwrap();
        // lambda_1 = mu; minimizing sum(mu) drives both to zero.
        assert!(m.lambda[0].abs() < 1e-9 && (m.lambda[1] - 1.0).abs() < 1e-9);
        assert_eq!(m.active_set, vec![0]);
        assert!(m.mu[0].abs() < 1e-9);
        assert!(m.residual <= 1e-12);
        assert!(kt_multipliers(&at("kt-linear-quad", &[1.0]), &tol()).unwrap().is_none());
    }

    #[test]
    fn kt_requires_feasible_point() {
        assert!(matches!(
            kt_multipliers(&at("kt-linear-quad", &[-1.0]), &tol()),
            Err(Error::InfeasiblePoint { .. })
        ));
    }

    #[test]
    fn kt_extremes_cover_multiplier_segment() {
        let ep = at("kt-linear-quad", &[0.0]);
        let sp = stationary_point(&ep, StationarityKind::Kt, &tol()).unwrap().unwrap();
        let all = sp.all_lambdas();
        assert!(all.iter().any(|l| (l[0] - 1.0).abs() < 1e-9));
        assert!(all.iter().any(|l| (l[1] - 1.0).abs() < 1e-9));
    }

    #[test]
    fn zero_jacobian_gives_uniform_weights() {
        let p = Problem::from_json(
            r#"{"name":"flat","variables":["x"],"objectives":["1","2","x-x"],"box":[[0,1]]}"#,
        )
        .unwrap();
        let ep = evaluate(&p, &[0.5], &tol()).unwrap();
        let m = critical_multipliers(&ep, &tol()).unwrap().unwrap();
        for l in m.lambda {
            assert!((l - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scans() {
        let t = tol();
        let p = fixture("paper-example-2.1").unwrap();
        let pts = scan_critical_points(&p, 0.01, StationarityKind::Vector, &t).unwrap();
        assert!(pts.iter().all(|s| s.x[0] >= -1.0 - 0.01 && s.x[0] <= 1.0 + 0.01));
        assert!(pts.len() >= 201 && pts.len() <= 203, "{}", pts.len());

        let p = fixture("kt-linear-quad").unwrap();
        let pts = scan_critical_points(&p, 0.01, StationarityKind::Kt, &t).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].x, vec![0.0]);

        // Brute-force oracle: lambda (2x, 2(x-1)) = 0 is solvable iff 0 <= x <= 1.
        let p = fixture("convex-pair").unwrap();
        let pts = scan_critical_points(&p, 0.01, StationarityKind::Vector, &t).unwrap();
        let expected: Vec<f64> = p
            .grid(0.01)
            .unwrap()
            .into_iter()
            .map(|x| x[0])
            .filter(|x| (0.0..=1.0).contains(x))
            .collect();
        let got: Vec<f64> = pts.iter().map(|s| s.x[0]).collect();
        assert_eq!(got, expected);
    }
}
