//! Generators and independent certificate checkers shared by the property
//! and acceptance tests.

#![allow(dead_code)]

use invex_core::alternative::{Branch, GordanOutcome, MotzkinOutcome};
use invex_core::invexity::{PairKind, PairOutcome, PairVerdict};
use invex_core::linalg::{dot, mat_vec, vec_mat};
use invex_core::lp::{check_feasibility, FeasibilityOutcome, LpOutcome, LpProblem, RowKind, VarBound};
use invex_core::problem::EvaluatedPoint;
use invex_core::ToleranceConfig;
use rand::Rng;

pub const REPLAY_TOL: f64 = 1e-7;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-5.0..=5.0)).collect())
        .collect()
}

pub fn random_lp<R: Rng>(rng: &mut R) -> LpProblem {
    let rows = rng.gen_range(1..=6);
    let cols = rng.gen_range(1..=6);
    LpProblem {
        objective: (0..cols).map(|_| rng.gen_range(-5.0..=5.0)).collect(),
        matrix: random_matrix(rng, rows, cols),
        rhs: (0..rows).map(|_| rng.gen_range(-5.0..=5.0)).collect(),
        row_kinds: (0..rows)
            .map(|_| if rng.gen_bool(0.8) { RowKind::Le } else { RowKind::Eq })
            .collect(),
        bounds: (0..cols)
            .map(|_| if rng.gen_bool(0.7) { VarBound::NonNegative } else { VarBound::Free })
            .collect(),
    }
}

fn scale(lp: &LpProblem) -> f64 {
    lp.matrix
        .iter()
        .flatten()
        .chain(&lp.rhs)
        .chain(&lp.objective)
        .fold(1.0_f64, |m, v| m.max(v.abs()))
}

fn primal_feasible(lp: &LpProblem, x: &[f64], eps: f64) -> Result<(), String> {
    let ax = mat_vec(&lp.matrix, x);
    for (i, (v, b)) in ax.iter().zip(&lp.rhs).enumerate() {
        let bad = match lp.row_kinds[i] {
            RowKind::Le => *v > b + eps,
            RowKind::Eq => (v - b).abs() > eps,
        };
        if bad {
            return Err(format!("row {i}: {v} vs {b}"));
        }
    }
    for (j, (v, bound)) in x.iter().zip(&lp.bounds).enumerate() {
        if *bound == VarBound::NonNegative && *v < -eps {
            return Err(format!("x[{j}] = {v} < 0"));
        }
    }
    Ok(())
}

/// Checks an LP outcome against its certificate conditions only.
pub fn check_lp_outcome(lp: &LpProblem, out: &LpOutcome) -> Result<(), String> {
    let s = scale(lp);
    let eps = REPLAY_TOL * s;
    let cols = lp.cols();
    match out {
        LpOutcome::Optimal { x, value, duals } => {
            primal_feasible(lp, x, eps)?;
            for (i, y) in duals.iter().enumerate() {
                if lp.row_kinds[i] == RowKind::Le && *y > eps {
                    return Err(format!("dual {i} = {y} has the wrong sign"));
                }
            }
            let aty = vec_mat(duals, &lp.matrix, cols);
            for (j, (c, bound)) in lp.objective.iter().zip(&lp.bounds).enumerate() {
                let reduced = c - aty[j];
                let bad = match bound {
                    VarBound::NonNegative => reduced < -eps,
                    VarBound::Free => reduced.abs() > eps,
                };
                if bad {
                    return Err(format!("reduced cost {j} = {reduced}"));
                }
            }
            let primal = dot(&lp.objective, x);
            let dual = dot(&lp.rhs, duals);
            if (primal - value).abs() > eps || (primal - dual).abs() > REPLAY_TOL * s.max(primal.abs()) {
                return Err(format!("duality gap: primal {primal}, dual {dual}, value {value}"));
            }
            Ok(())
        }
        LpOutcome::Infeasible { farkas } => {
            let norm = farkas.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if norm == 0.0 {
                return Err("zero Farkas vector".into());
            }
            let y: Vec<f64> = farkas.iter().map(|v| v / norm).collect();
            for (i, v) in y.iter().enumerate() {
                if lp.row_kinds[i] == RowKind::Le && *v < -eps {
                    return Err(format!("farkas[{i}] = {v} < 0"));
                }
            }
            let yta = vec_mat(&y, &lp.matrix, cols);
            for (j, (v, bound)) in yta.iter().zip(&lp.bounds).enumerate() {
                let bad = match bound {
                    VarBound::NonNegative => *v < -eps,
                    VarBound::Free => v.abs() > eps,
                };
                if bad {
                    return Err(format!("(y^T A)[{j}] = {}", yta[j]));
                }
            }
            let ytb = dot(&y, &lp.rhs);
            if ytb >= -REPLAY_TOL {
                return Err(format!("y^T b = {ytb} is not negative"));
            }
            Ok(())
        }
        LpOutcome::Unbounded { x, ray } => {
            primal_feasible(lp, x, eps)?;
            let norm = ray.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let r: Vec<f64> = ray.iter().map(|v| v / norm).collect();
            let ar = mat_vec(&lp.matrix, &r);
            for (i, v) in ar.iter().enumerate() {
                let bad = match lp.row_kinds[i] {
                    RowKind::Le => *v > eps,
                    RowKind::Eq => v.abs() > eps,
                };
                if bad {
                    return Err(format!("ray leaves row {i}: {v}"));
                }
            }
            for (j, v) in r.iter().enumerate() {
                if lp.bounds[j] == VarBound::NonNegative && *v < -eps {
                    return Err(format!("ray[{j}] = {v} < 0"));
                }
            }
            let cr = dot(&lp.objective, &r);
            if cr >= -REPLAY_TOL {
                return Err(format!("ray does not improve: c^T r = {cr}"));
            }
            Ok(())
        }
    }
}

/// Checks a Motzkin outcome by substitution, then confirms that the other
/// branch is infeasible with an independent feasibility LP.
pub fn check_motzkin(a: &[Vec<f64>], b: &[Vec<f64>], out: &MotzkinOutcome, tol: &ToleranceConfig) -> Result<(), String> {
    let cols = a[0].len();
    match out.branch {
        Branch::PrimalHolds => {
            let x = out.primal_witness.as_ref().ok_or("missing primal witness")?;
            let margin = out.strict_margin.ok_or("missing margin")?;
            if margin <= 0.0 {
                return Err(format!("margin {margin} is not positive"));
            }
            for v in mat_vec(a, x) {
                if v > -margin + REPLAY_TOL {
                    return Err(format!("A x = {v} exceeds -margin"));
                }
            }
            for v in mat_vec(b, x) {
                if v > REPLAY_TOL {
                    return Err(format!("B x = {v} > 0"));
                }
            }
            if dual_system_feasible(a, b, tol) {
                return Err("dual system is also feasible".into());
            }
        }
        Branch::DualHolds => {
            let (y, z) = out.dual_witness.as_ref().ok_or("missing dual witness")?;
            if y.iter().chain(z).any(|v| *v < -REPLAY_TOL) {
                return Err("negative multiplier".into());
            }
            let total: f64 = y.iter().sum();
            if (total - 1.0).abs() > REPLAY_TOL {
                return Err(format!("sum(y) = {total}"));
            }
            let mut r = vec_mat(y, a, cols);
            for (ri, bi) in r.iter_mut().zip(vec_mat(z, b, cols)) {
                *ri += bi;
            }
            if r.iter().any(|v| v.abs() > REPLAY_TOL) {
                return Err(format!("A^T y + B^T z = {r:?}"));
            }
            if primal_system_feasible(a, b, tol) {
                return Err("primal system is also feasible".into());
            }
        }
    }
    Ok(())
}

pub fn check_gordan(a: &[Vec<f64>], out: &GordanOutcome, tol: &ToleranceConfig) -> Result<(), String> {
    let m = MotzkinOutcome {
        branch: out.branch,
        primal_witness: out.primal_witness.clone(),
        dual_witness: out.dual_witness.clone().map(|y| (y, Vec::new())),
        strict_margin: out.strict_margin,
    };
    check_motzkin(a, &[], &m, tol)
}

/// `A x <= -1, B x <= 0` (the strict system up to scaling).
fn primal_system_feasible(a: &[Vec<f64>], b: &[Vec<f64>], tol: &ToleranceConfig) -> bool {
    let cols = a[0].len();
    let matrix: Vec<Vec<f64>> = a.iter().chain(b).cloned().collect();
    let rhs: Vec<f64> = a.iter().map(|_| -1.0).chain(b.iter().map(|_| 0.0)).collect();
    let kinds = vec![RowKind::Le; matrix.len()];
    matches!(
        check_feasibility(&matrix, &rhs, &kinds, &vec![VarBound::Free; cols], tol),
        Ok(FeasibilityOutcome::Feasible(_))
    )
}

/// `A^T y + B^T z = 0, sum(y) = 1, y, z >= 0`.
fn dual_system_feasible(a: &[Vec<f64>], b: &[Vec<f64>], tol: &ToleranceConfig) -> bool {
    let cols = a[0].len();
    let (ma, mb) = (a.len(), b.len());
    let mut matrix: Vec<Vec<f64>> = (0..cols)
        .map(|c| a.iter().map(|r| r[c]).chain(b.iter().map(|r| r[c])).collect())
        .collect();
    matrix.push((0..ma + mb).map(|i| if i < ma { 1.0 } else { 0.0 }).collect());
    let mut rhs = vec![0.0; cols];
    rhs.push(1.0);
    let kinds = vec![RowKind::Eq; cols + 1];
    matches!(
        check_feasibility(&matrix, &rhs, &kinds, &vec![VarBound::NonNegative; ma + mb], tol),
        Ok(FeasibilityOutcome::Feasible(_))
    )
}

/// Kernel inequalities by direct substitution; `margin_floor` is the strict
/// lower bound required on every objective slack.
pub fn kernel_holds(kind: PairKind, pbar: &EvaluatedPoint, p: &EvaluatedPoint, eta: &[f64], margin_floor: f64) -> bool {
    let objective_ok = pbar
        .jacobian_f
        .iter()
        .zip(p.f.iter().zip(&pbar.f))
        .all(|(row, (fx, fb))| fx - fb - dot(row, eta) >= margin_floor - REPLAY_TOL);
    let constraints_ok = !kind.is_kt()
        || pbar
            .active_set
            .iter()
            .all(|&j| dot(&pbar.jacobian_g[j], eta) <= REPLAY_TOL);
    objective_ok && constraints_ok
}

/// Criterion-style replay of a verdict, independent of the library's own
/// replay module.
pub fn replay(v: &PairVerdict, pbar: &EvaluatedPoint, p: &EvaluatedPoint) -> Result<(), String> {
    match &v.outcome {
        PairOutcome::Kernel(k) => {
            if v.kind.is_strict() && k.margin <= 0.0 {
                return Err("strict kernel with zero margin".into());
            }
            if kernel_holds(v.kind, pbar, p, &k.eta, k.margin) {
                Ok(())
            } else {
                Err(format!("kernel {:?} fails substitution", k.eta))
            }
        }
        PairOutcome::Certificate(c) => {
            let cols = pbar.x.len();
            let mut r = vec_mat(&c.lambda, &pbar.jacobian_f, cols);
            for (mu, &j) in c.mu.iter().zip(&c.active_set) {
                for (ri, g) in r.iter_mut().zip(&pbar.jacobian_g[j]) {
                    *ri += mu * g;
                }
            }
            let residual = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if residual > REPLAY_TOL {
                return Err(format!("stationarity residual {residual:e}"));
            }
            if c.lambda.iter().chain(&c.mu).any(|v| *v < -REPLAY_TOL) {
                return Err("negative multiplier".into());
            }
            let violation: f64 = c.lambda.iter().zip(p.f.iter().zip(&pbar.f)).map(|(l, (a, b))| l * (a - b)).sum();
            let limit = if v.kind.is_strict() { REPLAY_TOL } else { -REPLAY_TOL };
            let ok = if v.kind.is_strict() { violation <= limit } else { violation < limit };
            if ok {
                Ok(())
            } else {
                Err(format!("violation {violation:e}"))
            }
        }
    }
}

/// Attempts the opposite construction with a direct LP: a certificate system
/// for a kernel verdict, a kernel system for a certificate verdict. Returns
/// true when that attempt is infeasible, i.e. the verdicts are exclusive.
pub fn opposite_infeasible(v: &PairVerdict, pbar: &EvaluatedPoint, p: &EvaluatedPoint, tol: &ToleranceConfig) -> bool {
    let s = pbar.x.len();
    let n = pbar.f.len();
    let jg: Vec<Vec<f64>> = if v.kind.is_kt() {
        pbar.active_set.iter().map(|&j| pbar.jacobian_g[j].clone()).collect()
    } else {
        Vec::new()
    };
    let d: Vec<f64> = p.f.iter().zip(&pbar.f).map(|(a, b)| a - b).collect();
    let strict = v.kind.is_strict();
    match v.outcome {
        PairOutcome::Kernel(_) => {
            // lambda Jf + mu Jg = 0, sum(lambda) = 1, lambda . d <= -gap.
            let k = jg.len();
            let mut matrix: Vec<Vec<f64>> = (0..s)
                .map(|c| pbar.jacobian_f.iter().map(|r| r[c]).chain(jg.iter().map(|r| r[c])).collect())
                .collect();
            let mut kinds = vec![RowKind::Eq; s];
            let mut rhs = vec![0.0; s];
            matrix.push((0..n + k).map(|i| if i < n { 1.0 } else { 0.0 }).collect());
            kinds.push(RowKind::Eq);
            rhs.push(1.0);
            matrix.push((0..n + k).map(|i| if i < n { d[i] } else { 0.0 }).collect());
            kinds.push(RowKind::Le);
            rhs.push(if strict { 0.0 } else { -10.0 * REPLAY_TOL });
            let out = check_feasibility(&matrix, &rhs, &kinds, &vec![VarBound::NonNegative; n + k], tol);
            // A strict kernel has positive slack, so even lambda . d <= 0 must fail.
            matches!(out, Ok(FeasibilityOutcome::Infeasible(_)))
        }
        PairOutcome::Certificate(_) => {
            // Jf eta <= d (- gap for strict), Jg eta <= 0.
            let gap = if strict { 10.0 * REPLAY_TOL } else { 0.0 };
            let matrix: Vec<Vec<f64>> = pbar.jacobian_f.iter().chain(&jg).cloned().collect();
            let rhs: Vec<f64> = d.iter().map(|di| di - gap).chain(jg.iter().map(|_| 0.0)).collect();
            let kinds = vec![RowKind::Le; matrix.len()];
            let out = check_feasibility(&matrix, &rhs, &kinds, &vec![VarBound::Free; s], tol);
            matches!(out, Ok(FeasibilityOutcome::Infeasible(_)))
        }
    }
}
