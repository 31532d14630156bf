//! Independent substitution checks for kernels and certificates.

use thiserror::Error;

use crate::linalg;
use crate::problem::EvaluatedPoint;
use crate::stationarity::stationarity_residual;
use crate::tol::ToleranceConfig;

use super::pair::min_slack;
use super::{Certificate, Kernel, PairKind, PairOutcome, PairVerdict};

#[derive(Clone, Debug, Error, PartialEq)]
#[error("{0}")]
pub struct ReplayFailure(pub String);

fn fail<T>(msg: String) -> Result<T, ReplayFailure> {
    Err(ReplayFailure(msg))
}

/// Tolerance used by every replay check.
pub fn replay_tolerance(tol: &ToleranceConfig) -> f64 {
    tol.feasibility.max(tol.stationary)
}

/// Checks the defining inequalities of `kernel` for the pair by substitution.
pub fn replay_kernel(
    kind: PairKind,
    pbar: &EvaluatedPoint,
    p: &EvaluatedPoint,
    kernel: &Kernel,
    tol: &ToleranceConfig,
) -> Result<(), ReplayFailure> {
    let eps = replay_tolerance(tol);
    if kernel.eta.len() != pbar.x.len() {
        return fail(format!("eta has {} entries, expected {}", kernel.eta.len(), pbar.x.len()));
    }
    if kernel.eta.iter().any(|v| !v.is_finite()) {
        return fail("eta is not finite".into());
    }
    let d = linalg::sub(&p.f, &pbar.f);
    let slack = min_slack(&pbar.jacobian_f, &d, &kernel.eta);
    if kernel.margin < 0.0 {
        return fail(format!("negative margin {:e}", kernel.margin));
    }
    if slack < kernel.margin - eps {
        return fail(format!("objective slack {slack:e} below margin {:e}", kernel.margin));
    }
    if kind.is_strict() && kernel.margin <= 0.0 {
        return fail("strict kernel without a positive margin".into());
    }
    if kind.is_kt() {
        for &j in &pbar.active_set {
            let v = linalg::dot(&pbar.jacobian_g[j], &kernel.eta);
            if v > eps {
                return fail(format!("active constraint {j}: grad g . eta = {v:e} > 0"));
            }
        }
    }
    Ok(())
}

/// Checks multiplier signs, normalization, stationarity at `xbar` and the
/// sign of `lambda . (f(x) - f(xbar))` (negative; nonpositive for strict kinds).
pub fn replay_certificate(
    kind: PairKind,
    pbar: &EvaluatedPoint,
    p: &EvaluatedPoint,
    cert: &Certificate,
    tol: &ToleranceConfig,
) -> Result<(), ReplayFailure> {
    let eps = replay_tolerance(tol);
    if cert.lambda.len() != pbar.f.len() {
        return fail(format!("lambda has {} entries, expected {}", cert.lambda.len(), pbar.f.len()));
    }
    if cert.mu.len() != cert.active_set.len() {
        return fail("mu and active_set lengths differ".into());
    }
    if !kind.is_kt() && !cert.mu.is_empty() {
        return fail("unconstrained certificate carries constraint multipliers".into());
    }
    if let Some(l) = cert.lambda.iter().find(|l| **l < -eps) {
        return fail(format!("negative lambda entry {l:e}"));
    }
    if let Some(m) = cert.mu.iter().find(|m| **m < -eps) {
        return fail(format!("negative mu entry {m:e}"));
    }
    let total: f64 = cert.lambda.iter().sum();
    if (total - 1.0).abs() > eps {
        return fail(format!("lambda sums to {total}"));
    }
    let mut jg = Vec::with_capacity(cert.active_set.len());
    for &j in &cert.active_set {
        if j >= pbar.g.len() {
            return fail(format!("active index {j} out of range"));
        }
        if pbar.g[j].abs() > tol.active {
            return fail(format!("constraint {j} is not active at xbar"));
        }
        jg.push(pbar.jacobian_g[j].clone());
    }
    let residual = stationarity_residual(&pbar.jacobian_f, &cert.lambda, &jg, &cert.mu);
    if residual > eps {
        return fail(format!("stationarity residual {residual:e}"));
    }
    let violation = linalg::dot(&cert.lambda, &linalg::sub(&p.f, &pbar.f));
    if (violation - cert.violation).abs() > eps * violation.abs().max(1.0) {
        return fail(format!("recorded violation {:e} differs from {violation:e}", cert.violation));
    }
    if kind.is_strict() {
        if violation > eps {
            return fail(format!("strict certificate with positive violation {violation:e}"));
        }
    } else if violation >= -eps {
        return fail(format!("violation {violation:e} is not negative"));
    }
    Ok(())
}

pub fn replay_verdict(
    verdict: &PairVerdict,
    pbar: &EvaluatedPoint,
    p: &EvaluatedPoint,
    tol: &ToleranceConfig,
) -> Result<(), ReplayFailure> {
    match &verdict.outcome {
        PairOutcome::Kernel(k) => replay_kernel(verdict.kind, pbar, p, k, tol),
        PairOutcome::Certificate(c) => replay_certificate(verdict.kind, pbar, p, c, tol),
    }
}
