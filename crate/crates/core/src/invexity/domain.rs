use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{evaluate, EvaluatedPoint, Problem, INTERIOR_INSET};
use crate::tol::ToleranceConfig;

use super::{certify_pair, PairKind, PairVerdict};

/// How the domain is discretized before pairs are formed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "kebab-case")]
pub enum Sampler {
    Grid { step: f64 },
    Random { count: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainOutcome {
    AllPairsKernel,
    FailureWitnesses,
}

/// Sample-bounded verdict: it covers exactly the sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainVerdict {
    pub kind: PairKind,
    pub sampler: Sampler,
    /// Whether infeasible samples were discarded.
    pub feasible_only: bool,
    pub points: usize,
    /// Samples at which some expression could not be evaluated.
    pub skipped: usize,
    pub pairs: usize,
    pub outcome: DomainOutcome,
    /// One verdict per ordered pair, `xbar`-major in sample order.
    pub verdicts: Vec<PairVerdict>,
}

impl DomainVerdict {
    pub fn all_pairs_kernel(&self) -> bool {
        self.outcome == DomainOutcome::AllPairsKernel
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairVerdict> {
        self.verdicts.iter().filter(|v| !v.is_kernel())
    }

    pub fn kernels(&self) -> impl Iterator<Item = &PairVerdict> {
        self.verdicts.iter().filter(|v| v.is_kernel())
    }
}

/// Sample points inside the box (interior-inset for the random sampler).
pub fn sample_points(problem: &Problem, sampler: Sampler) -> Result<Vec<Vec<f64>>> {
    match sampler {
        Sampler::Grid { step } => problem.grid(step),
        Sampler::Random { count, seed } => {
            if count == 0 {
                return Err(Error::InvalidProblem("random sampler needs a positive count".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count)
                .map(|_| {
                    problem
                        .bounds
                        .iter()
                        .map(|&(lo, hi)| rng.gen_range(lo + INTERIOR_INSET..=hi - INTERIOR_INSET))
                        .collect()
                })
                .collect())
        }
    }
}

/// Runs the pairwise certifier of `kind` over every ordered sampled pair.
/// Samples are restricted to the feasible set for the KT kinds; the strict
/// kinds skip `x = xbar`.
pub fn certify_domain(problem: &Problem, kind: PairKind, sampler: Sampler, tol: &ToleranceConfig) -> Result<DomainVerdict> {
    let points = sample_points(problem, sampler)?;
    certify_points(problem, kind, sampler, &points, kind.is_kt(), tol)
}

/// As [`certify_domain`] on explicit sample points.
pub fn certify_points(
    problem: &Problem,
    kind: PairKind,
    sampler: Sampler,
    points: &[Vec<f64>],
    feasible_only: bool,
    tol: &ToleranceConfig,
) -> Result<DomainVerdict> {
    let evaluated: Vec<Option<EvaluatedPoint>> = points
        .par_iter()
        .map(|x| match evaluate(problem, x, tol) {
            Ok(ep) => Ok(Some(ep)),
            Err(Error::Expr(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let skipped = evaluated.iter().filter(|e| e.is_none()).count();
    let feasible_only = feasible_only || kind.is_kt();
    let eps: Vec<EvaluatedPoint> = evaluated
        .into_iter()
        .flatten()
        .filter(|ep| !feasible_only || ep.feasible)
        .collect();
    if eps.is_empty() {
        return Err(Error::EmptyFeasibleSet);
    }

    let n = eps.len();
    let verdicts: Vec<PairVerdict> = (0..n * n)
        .into_par_iter()
        .filter(|k| !(kind.is_strict() && k / n == k % n))
        .map(|k| certify_pair(kind, &eps[k / n], &eps[k % n], tol))
        .collect::<Result<_>>()?;
    let outcome = if verdicts.iter().all(PairVerdict::is_kernel) {
        DomainOutcome::AllPairsKernel
    } else {
        DomainOutcome::FailureWitnesses
    };
    Ok(DomainVerdict {
        kind,
        sampler,
        feasible_only,
        points: n,
        skipped,
        pairs: verdicts.len(),
        outcome,
        verdicts,
    })
}
