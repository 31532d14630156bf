use crate::alternative::{motzkin, Branch};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lp::{self, LpError, LpOutcome, LpProblem};
use crate::problem::EvaluatedPoint;
use crate::tol::ToleranceConfig;

use super::replay::replay_tolerance;
use super::{Certificate, Kernel, PairKind, PairOutcome, PairVerdict};

/// Pairs closer than this are rejected by the strict certifiers.
pub const DEGENERATE_DISTANCE: f64 = 1e-9;

pub fn certify_pair(kind: PairKind, pbar: &EvaluatedPoint, p: &EvaluatedPoint, tol: &ToleranceConfig) -> Result<PairVerdict> {
    match kind {
        PairKind::Invex => invex_pair(pbar, p, tol),
        PairKind::StrictInvex => strict_invex_pair(pbar, p, tol),
        PairKind::KtInvex => kt_invex_pair(pbar, p, tol),
        PairKind::StrictKtInvex => strict_kt_invex_pair(pbar, p, tol),
    }
}

/// Solves `Jf(xbar) eta <= f(x) - f(xbar)` for a kernel, or returns the
/// multipliers of a weighted-sum contradiction.
pub fn invex_pair(pbar: &EvaluatedPoint, p: &EvaluatedPoint, tol: &ToleranceConfig) -> Result<PairVerdict> {
    check_pair(pbar, p)?;
    let outcome = nonstrict(pbar, p, &[], &[], tol)?;
    Ok(verdict(PairKind::Invex, pbar, p, outcome))
}

/// Adds `Jg_I(xbar) eta <= 0` on the constraints active at `xbar`.
pub fn kt_invex_pair(pbar: &EvaluatedPoint, p: &EvaluatedPoint, tol: &ToleranceConfig) -> Result<PairVerdict> {
    check_pair(pbar, p)?;
    check_feasible(pbar)?;
    check_feasible(p)?;
    let outcome = nonstrict(pbar, p, &pbar.active_jacobian(), &pbar.active_set, tol)?;
    Ok(verdict(PairKind::KtInvex, pbar, p, outcome))
}

/// Strict objective rows via Gordan's alternative.
pub fn strict_invex_pair(pbar: &EvaluatedPoint, p: &EvaluatedPoint, tol: &ToleranceConfig) -> Result<PairVerdict> {
    check_pair(pbar, p)?;
    check_distinct(pbar, p)?;
    let outcome = strict(pbar, p, &[], &[], tol)?;
    Ok(verdict(PairKind::StrictInvex, pbar, p, outcome))
}

/// Strict objective rows plus weak active-constraint rows via Motzkin's
/// alternative.
pub fn strict_kt_invex_pair(pbar: &EvaluatedPoint, p: &EvaluatedPoint, tol: &ToleranceConfig) -> Result<PairVerdict> {
    check_pair(pbar, p)?;
    check_feasible(pbar)?;
    check_feasible(p)?;
    check_distinct(pbar, p)?;
    let outcome = strict(pbar, p, &pbar.active_jacobian(), &pbar.active_set, tol)?;
    Ok(verdict(PairKind::StrictKtInvex, pbar, p, outcome))
}

fn verdict(kind: PairKind, pbar: &EvaluatedPoint, p: &EvaluatedPoint, outcome: PairOutcome) -> PairVerdict {
    PairVerdict {
        kind,
        x: p.x.clone(),
        xbar: pbar.x.clone(),
        outcome,
    }
}

fn check_pair(pbar: &EvaluatedPoint, p: &EvaluatedPoint) -> Result<()> {
    if pbar.x.len() != p.x.len() || pbar.f.len() != p.f.len() || pbar.g.len() != p.g.len() {
        return Err(Error::DimensionMismatch("x and xbar come from different problems".into()));
    }
    Ok(())
}

fn check_feasible(ep: &EvaluatedPoint) -> Result<()> {
    if ep.feasible {
        Ok(())
    } else {
        Err(Error::InfeasiblePoint {
            point: ep.x.clone(),
            max_violation: ep.max_violation(),
        })
    }
}

fn check_distinct(pbar: &EvaluatedPoint, p: &EvaluatedPoint) -> Result<()> {
    let distance = linalg::distance(&pbar.x, &p.x);
    if distance <= DEGENERATE_DISTANCE {
        return Err(Error::DegeneratePair { distance });
    }
    Ok(())
}

/// Smallest objective slack `f_i(x) - f_i(xbar) - grad f_i(xbar) . eta`.
pub(super) fn min_slack(jf: &[Vec<f64>], d: &[f64], eta: &[f64]) -> f64 {
    jf.iter()
        .zip(d)
        .map(|(row, di)| di - linalg::dot(row, eta))
        .fold(f64::INFINITY, f64::min)
}

/// Max-margin form of the kernel system:
///
/// ```text
/// maximize t  s.t.  Jf eta + t e <= d,  Jg_I eta <= 0,  t <= 1,  eta, t free
/// ```
///
/// `t* >= 0` yields a kernel. Otherwise the LP duals on the objective rows
/// already sum to one and give `lambda . d = t* < 0`.
fn nonstrict(
    pbar: &EvaluatedPoint,
    p: &EvaluatedPoint,
    jg: &[Vec<f64>],
    active: &[usize],
    tol: &ToleranceConfig,
) -> Result<PairOutcome> {
    let s = pbar.x.len();
    let n = pbar.f.len();
    let d = linalg::sub(&p.f, &pbar.f);

    let mut matrix: Matrix = Vec::with_capacity(n + jg.len() + 1);
    for row in &pbar.jacobian_f {
        let mut r = row.clone();
        r.push(1.0);
        matrix.push(r);
    }
    for row in jg {
        let mut r = row.clone();
        r.push(0.0);
        matrix.push(r);
    }
    let mut cap = vec![0.0; s];
    cap.push(1.0);
    matrix.push(cap);
    let mut rhs = d.clone();
    rhs.extend(std::iter::repeat_n(0.0, jg.len()));
    rhs.push(1.0);
    let mut objective = vec![0.0; s];
    objective.push(-1.0);

    match lp::solve_lp(&LpProblem::free_le(objective, matrix, rhs), tol)? {
        LpOutcome::Optimal { x, value, duals } => {
            let t = -value;
            let eta = x[..s].to_vec();
            // Same band the replay checks use, so both outcomes replay.
            if t >= -replay_tolerance(tol) {
                let margin = min_slack(&pbar.jacobian_f, &d, &eta).max(0.0);
                return Ok(PairOutcome::Kernel(Kernel { eta, margin }));
            }
            let lambda: Vec<f64> = duals[..n].iter().map(|y| (-y).max(0.0)).collect();
            let mu: Vec<f64> = duals[n..n + jg.len()].iter().map(|y| (-y).max(0.0)).collect();
            Ok(PairOutcome::Certificate(certificate(lambda, mu, active, &d)?))
        }
        // The cap row and free variables keep the LP feasible and bounded.
        _ => Err(LpError::NumericalBreakdown("kernel LP lost feasibility or boundedness".into()).into()),
    }
}

/// The alternative system with rows `[0 | 1]` and `[Jf | d]` (strict) and
/// `[Jg_I | 0]` (weak). A strict solution `(zeta, xi)` gives the kernel
/// `eta = -zeta / xi`; the dual branch gives `(nu, lambda, mu)` with
/// `nu + lambda . d = 0`.
fn strict(
    pbar: &EvaluatedPoint,
    p: &EvaluatedPoint,
    jg: &[Vec<f64>],
    active: &[usize],
    tol: &ToleranceConfig,
) -> Result<PairOutcome> {
    let s = pbar.x.len();
    let d = linalg::sub(&p.f, &pbar.f);

    let mut a: Matrix = Vec::with_capacity(d.len() + 1);
    let mut head = vec![0.0; s];
    head.push(1.0);
    a.push(head);
    for (row, di) in pbar.jacobian_f.iter().zip(&d) {
        let mut r = row.clone();
        r.push(*di);
        a.push(r);
    }
    let b: Matrix = jg
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.push(0.0);
            r
        })
        .collect();

    let out = motzkin(&a, &b, tol)?;
    match out.branch {
        Branch::PrimalHolds => {
            let w = out
                .primal_witness
                .ok_or_else(|| LpError::NumericalBreakdown("missing primal witness".into()))?;
            let xi = w[s];
            if xi >= 0.0 {
                return Err(LpError::NumericalBreakdown("primal witness has xi >= 0".into()).into());
            }
            let eta: Vec<f64> = w[..s].iter().map(|z| -z / xi).collect();
            let delta = out.strict_margin.unwrap_or(0.0);
            let margin = (delta / xi.abs()).min(min_slack(&pbar.jacobian_f, &d, &eta));
            Ok(PairOutcome::Kernel(Kernel { eta, margin }))
        }
        Branch::DualHolds => {
            let (y, z) = out
                .dual_witness
                .ok_or_else(|| LpError::NumericalBreakdown("missing dual witness".into()))?;
            Ok(PairOutcome::Certificate(certificate(y[1..].to_vec(), z, active, &d)?))
        }
    }
}

/// Normalizes `lambda` to the unit simplex (scaling `mu` alike).
fn certificate(lambda: Vec<f64>, mu: Vec<f64>, active: &[usize], d: &[f64]) -> Result<Certificate> {
    let total: f64 = lambda.iter().sum();
    if total <= 1e-12 {
        return Err(LpError::NumericalBreakdown("certificate has a vanishing lambda block".into()).into());
    }
    let lambda: Vec<f64> = lambda.iter().map(|l| l / total).collect();
    let mu: Vec<f64> = mu.iter().map(|m| m / total).collect();
    let violation = linalg::dot(&lambda, d);
    Ok(Certificate {
        lambda,
        mu,
        active_set: active.to_vec(),
        violation,
    })
}
