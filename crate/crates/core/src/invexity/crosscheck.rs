//! Grid-level consistency checks between stationary points that solve their
//! weighting problems (side L) and pairwise invexity certification (side R).
//!
//! | check            | stationary points | L requires     | R kind          |
//! |------------------|-------------------|----------------|-----------------|
//! | `invex`          | vector critical   | `Global`       | `Invex`         |
//! | `strict_invex`   | vector critical   | `UniqueGlobal` | `StrictInvex`   |
//! | `kt_invex`       | Kuhn-Tucker       | `Global`       | `KtInvex`       |
//! | `strict_kt_invex`| Kuhn-Tucker       | `UniqueGlobal` | `StrictKtInvex` |
//!
//! Every stationary point is tested with its canonical multiplier and the
//! extreme multipliers of its multiplier set. Both sides are restricted to
//! feasible grid nodes; the KT checks run only for constrained problems.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::Problem;
use crate::scalarization::{FeasibleGrid, GlobalStatus, WeightVector};
use crate::stationarity::{scan_critical_points, StationarityKind, StationaryPoint};
use crate::tol::ToleranceConfig;

use super::{certify_points, sample_points, PairKind, PairVerdict, Sampler};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckConfig {
    /// Grid for stationary points and global-optimality checks.
    pub grid_step: f64,
    pub pair_sampler: Sampler,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self {
            grid_step: 0.05,
            pair_sampler: Sampler::Grid { step: 0.25 },
        }
    }
}

/// A stationary point that does not (uniquely) solve the weighting problem
/// for one of its multipliers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightingFailure {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub status: GlobalStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub stationarity: StationarityKind,
    pub kind: PairKind,
    pub stationary_points: usize,
    pub multipliers_checked: usize,
    pub pairs_checked: usize,
    pub lhs: bool,
    pub rhs: bool,
    pub agreement: bool,
    pub weighting_failures: Vec<WeightingFailure>,
    pub pair_failures: Vec<PairVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub config: CrosscheckConfig,
    pub invex: TheoremCheck,
    pub strict_invex: TheoremCheck,
    pub kt_invex: Option<TheoremCheck>,
    pub strict_kt_invex: Option<TheoremCheck>,
    pub agreement: bool,
}

impl CrosscheckReport {
    pub fn checks(&self) -> impl Iterator<Item = &TheoremCheck> {
        [Some(&self.invex), Some(&self.strict_invex), self.kt_invex.as_ref(), self.strict_kt_invex.as_ref()]
            .into_iter()
            .flatten()
    }
}

pub fn theorem_crosscheck(problem: &Problem, config: CrosscheckConfig, tol: &ToleranceConfig) -> Result<CrosscheckReport> {
    let grid = FeasibleGrid::new(problem, config.grid_step, tol)?;
    let samples: Vec<Vec<f64>> = sample_points(problem, config.pair_sampler)?
        .into_iter()
        .filter(|x| problem.is_feasible(x, tol).unwrap_or(false))
        .collect();

    let critical: Vec<StationaryPoint> = scan_critical_points(problem, config.grid_step, StationarityKind::Vector, tol)?
        .into_iter()
        .filter(|p| problem.is_feasible(&p.x, tol).unwrap_or(false))
        .collect();
    let run = |points: &[StationaryPoint], kind: PairKind| -> Result<TheoremCheck> {
        let (multipliers_checked, weighting_failures) = weighting_side(problem, &grid, points, kind.is_strict(), tol)?;
        let domain = certify_points(problem, kind, config.pair_sampler, &samples, true, tol)?;
        let lhs = weighting_failures.is_empty();
        let rhs = domain.all_pairs_kernel();
        Ok(TheoremCheck {
            stationarity: points.first().map_or(
                if kind.is_kt() { StationarityKind::Kt } else { StationarityKind::Vector },
                |p| p.kind,
            ),
            kind,
            stationary_points: points.len(),
            multipliers_checked,
            pairs_checked: domain.pairs,
            lhs,
            rhs,
            agreement: lhs == rhs,
            weighting_failures,
            pair_failures: domain.failures().cloned().collect(),
        })
    };

    let invex = run(&critical, PairKind::Invex)?;
    let strict_invex = run(&critical, PairKind::StrictInvex)?;
    let (kt_invex, strict_kt_invex) = if problem.constraint_count() > 0 {
        let kt = scan_critical_points(problem, config.grid_step, StationarityKind::Kt, tol)?;
        (Some(run(&kt, PairKind::KtInvex)?), Some(run(&kt, PairKind::StrictKtInvex)?))
    } else {
        (None, None)
    };
    let mut report = CrosscheckReport {
        config,
        invex,
        strict_invex,
        kt_invex,
        strict_kt_invex,
        agreement: false,
    };
    let agreement = report.checks().all(|c| c.agreement);
    report.agreement = agreement;
    Ok(report)
}

fn weighting_side(
    problem: &Problem,
    grid: &FeasibleGrid,
    points: &[StationaryPoint],
    unique: bool,
    tol: &ToleranceConfig,
) -> Result<(usize, Vec<WeightingFailure>)> {
    let mut checked = 0;
    let mut failures = Vec::new();
    for p in points {
        let fx = problem.objective_values(&p.x)?;
        for lambda in p.all_lambdas() {
            let clamped: Vec<f64> = lambda.iter().map(|l| l.max(0.0)).collect();
            let w = WeightVector::normalized(&clamped)?;
            let status = grid.global_status(&w, &p.x, &fx, tol);
            checked += 1;
            let ok = if unique { status.is_unique() } else { status.is_global() };
            if !ok {
                failures.push(WeightingFailure {
                    x: p.x.clone(),
                    lambda: w.as_slice().to_vec(),
                    status,
                });
            }
        }
    }
    Ok((checked, failures))
}
