//! Pairwise certifiers for invexity, strict invexity, KT-invexity and strict
//! KT-invexity.
//!
//! For a pair `(xbar, x)` every certifier returns either a kernel `eta` with
//!
//! ```text
//! f(x) - f(xbar) - Jf(xbar) eta >= 0    (> 0 for the strict kinds)
//! Jg_I(xbar) eta <= 0                    (KT kinds, active constraints at xbar)
//! ```
//!
//! or multipliers `lambda >= 0, sum(lambda) = 1, mu >= 0` with
//! `lambda Jf(xbar) + mu Jg_I(xbar) = 0` and `lambda . (f(x) - f(xbar)) < 0`
//! (`<= 0` for the strict kinds): a stationary point that does not solve its
//! own weighting problem.

mod crosscheck;
mod domain;
mod pair;
pub mod replay;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crosscheck::{theorem_crosscheck, CrosscheckConfig, CrosscheckReport, TheoremCheck, WeightingFailure};
pub use domain::{certify_domain, certify_points, sample_points, DomainVerdict, Sampler};
pub use pair::{certify_pair, invex_pair, kt_invex_pair, strict_invex_pair, strict_kt_invex_pair, DEGENERATE_DISTANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Invex,
    StrictInvex,
    KtInvex,
    StrictKtInvex,
}

impl PairKind {
    pub const ALL: [PairKind; 4] = [
        PairKind::Invex,
        PairKind::StrictInvex,
        PairKind::KtInvex,
        PairKind::StrictKtInvex,
    ];

    pub fn is_strict(self) -> bool {
        matches!(self, PairKind::StrictInvex | PairKind::StrictKtInvex)
    }

    pub fn is_kt(self) -> bool {
        matches!(self, PairKind::KtInvex | PairKind::StrictKtInvex)
    }

    pub fn name(self) -> &'static str {
        match self {
            PairKind::Invex => "invex",
            PairKind::StrictInvex => "strict-invex",
            PairKind::KtInvex => "kt-invex",
            PairKind::StrictKtInvex => "strict-kt-invex",
        }
    }

    /// The non-strict counterpart.
    pub fn relaxed(self) -> PairKind {
        match self {
            PairKind::StrictInvex => PairKind::Invex,
            PairKind::StrictKtInvex => PairKind::KtInvex,
            k => k,
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PairKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown kind `{s}` (expected invex, strict-invex, kt-invex or strict-kt-invex)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub eta: Vec<f64>,
    /// Lower bound on every objective slack `f_i(x) - f_i(xbar) - grad f_i(xbar) . eta`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Normalized to `sum(lambda) = 1`.
    pub lambda: Vec<f64>,
    /// Multipliers of the active constraints at `xbar`, aligned with `active_set`.
    pub mu: Vec<f64>,
    pub active_set: Vec<usize>,
    /// `lambda . (f(x) - f(xbar))`
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum PairOutcome {
    Kernel(Kernel),
    Certificate(Certificate),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub kind: PairKind,
    pub x: Vec<f64>,
    pub xbar: Vec<f64>,
    #[serde(flatten)]
    pub outcome: PairOutcome,
}

impl PairVerdict {
    pub fn kernel(&self) -> Option<&Kernel> {
        match &self.outcome {
            PairOutcome::Kernel(k) => Some(k),
            PairOutcome::Certificate(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.outcome {
            PairOutcome::Certificate(c) => Some(c),
            PairOutcome::Kernel(_) => None,
        }
    }

    pub fn is_kernel(&self) -> bool {
        self.kernel().is_some()
    }
}
