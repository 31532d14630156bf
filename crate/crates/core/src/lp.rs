//! Dense two-phase simplex.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c^T x
//! subject to  A_i x <= b_i   (RowKind::Le)
//!             A_i x  = b_i   (RowKind::Eq)
//!             x_j >= 0 or x_j free
//! ```
//!
//! Every outcome carries a certificate: optimal solves report dual values
//! `y` (with `y_i <= 0` on `Le` rows, so that `b^T y` equals the optimum),
//! infeasible solves report a Farkas vector read from the phase-1 duals, and
//! unbounded solves report a feasible point together with an improving ray.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::tol::ToleranceConfig;

/// Pivot budget across both phases.
pub const MAX_PIVOTS: usize = 10_000;

/// Consecutive degenerate pivots before Bland's rule takes over.
pub const DEGENERACY_STREAK: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowKind {
    Le,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
    pub row_kinds: Vec<RowKind>,
    pub bounds: Vec<VarBound>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
        duals: Vec<f64>,
    },
    Infeasible {
        farkas: Vec<f64>,
    },
    Unbounded {
        x: Vec<f64>,
        ray: Vec<f64>,
    },
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible { .. } => LpStatus::Infeasible,
            LpOutcome::Unbounded { .. } => LpStatus::Unbounded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeasibilityOutcome {
    Feasible(Vec<f64>),
    Infeasible(Vec<f64>),
}

impl LpProblem {
    /// Problem with all-`Le` rows and free variables.
    pub fn free_le(objective: Vec<f64>, matrix: Matrix, rhs: Vec<f64>) -> Self {
        let rows = rhs.len();
        let cols = objective.len();
        Self {
            objective,
            matrix,
            rhs,
            row_kinds: vec![RowKind::Le; rows],
            bounds: vec![VarBound::Free; cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let (m, n) = (self.rows(), self.cols());
        if self.matrix.len() != m || self.row_kinds.len() != m {
            return Err(LpError::DimensionMismatch(format!(
                "{} matrix rows, {} rhs entries, {} row kinds",
                self.matrix.len(),
                m,
                self.row_kinds.len()
            )));
        }
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "{} objective coefficients but {} variable bounds",
                n,
                self.bounds.len()
            )));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(LpError::DimensionMismatch(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let finite = self.objective.iter().chain(&self.rhs).all(|v| v.is_finite())
            && self.matrix.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(LpError::NumericalBreakdown("non-finite input entry".into()));
        }
        Ok(())
    }
}

/// Solves `lp`, returning exactly one of optimal / infeasible / unbounded.
pub fn solve_lp(lp: &LpProblem, tol: &ToleranceConfig) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    Tableau::build(lp, tol).solve(lp)
}

/// Phase-1 only: a point satisfying every row, or a Farkas certificate.
pub fn check_feasibility(
    matrix: &[Vec<f64>],
    rhs: &[f64],
    row_kinds: &[RowKind],
    bounds: &[VarBound],
    tol: &ToleranceConfig,
) -> Result<FeasibilityOutcome, LpError> {
    let lp = LpProblem {
        objective: vec![0.0; bounds.len()],
        matrix: matrix.to_vec(),
        rhs: rhs.to_vec(),
        row_kinds: row_kinds.to_vec(),
        bounds: bounds.to_vec(),
    };
    match solve_lp(&lp, tol)? {
        LpOutcome::Optimal { x, .. } => Ok(FeasibilityOutcome::Feasible(x)),
        LpOutcome::Infeasible { farkas } => Ok(FeasibilityOutcome::Infeasible(farkas)),
        LpOutcome::Unbounded { .. } => Err(LpError::NumericalBreakdown(
            "zero objective reported unbounded".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColumnKind {
    /// Original variable `orig`, entering with coefficient `sign`.
    Structural { orig: usize, sign: i8 },
    Slack,
    Artificial,
}

struct Tableau {
    /// `rows x (cols + 1)`; the last entry of each row is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
    /// Column forming the initial identity for each row.
    init_col: Vec<usize>,
    /// `-1` for rows negated to make the right-hand side nonnegative.
    flip: Vec<f64>,
    pivots: usize,
    tol: ToleranceConfig,
}

enum PhaseEnd {
    Optimal,
    Unbounded { entering: usize },
}

impl Tableau {
    fn build(lp: &LpProblem, tol: &ToleranceConfig) -> Self {
        let m = lp.rows();
        let mut kinds = Vec::new();
        for (j, b) in lp.bounds.iter().enumerate() {
            kinds.push(ColumnKind::Structural { orig: j, sign: 1 });
            if *b == VarBound::Free {
                kinds.push(ColumnKind::Structural { orig: j, sign: -1 });
            }
        }
        let flip: Vec<f64> = lp
            .rhs
            .iter()
            .map(|b| if *b < 0.0 { -1.0 } else { 1.0 })
            .collect();

        let mut slack_of = vec![None; m];
        for (slot, kind) in slack_of.iter_mut().zip(&lp.row_kinds) {
            if *kind == RowKind::Le {
                *slot = Some(kinds.len());
                kinds.push(ColumnKind::Slack);
            }
        }
        let mut init_col = vec![0; m];
        for i in 0..m {
            match slack_of[i] {
                Some(s) if flip[i] > 0.0 => init_col[i] = s,
                _ => {
                    init_col[i] = kinds.len();
                    kinds.push(ColumnKind::Artificial);
                }
            }
        }

        let width = kinds.len();
        let mut t = vec![vec![0.0; width + 1]; m];
        for i in 0..m {
            let row = &mut t[i];
            for (c, kind) in kinds.iter().enumerate() {
                if let ColumnKind::Structural { orig, sign } = *kind {
                    row[c] = flip[i] * f64::from(sign) * lp.matrix[i][orig];
                }
            }
            if let Some(s) = slack_of[i] {
                row[s] = flip[i];
            }
            row[init_col[i]] = 1.0;
            row[width] = flip[i] * lp.rhs[i];
        }

        Self {
            t,
            basis: init_col.clone(),
            kinds,
            init_col,
            flip,
            pivots: 0,
            tol: *tol,
        }
    }

    fn width(&self) -> usize {
        self.kinds.len()
    }

    fn solve(mut self, lp: &LpProblem) -> Result<LpOutcome, LpError> {
        let width = self.width();
        let has_artificial = self.kinds.contains(&ColumnKind::Artificial);

        if has_artificial {
            let phase1: Vec<f64> = self
                .kinds
                .iter()
                .map(|k| if *k == ColumnKind::Artificial { 1.0 } else { 0.0 })
                .collect();
            let mut d = self.reduced_costs(&phase1);
            match self.run(&mut d, &phase1, true)? {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded { .. } => {
                    return Err(LpError::NumericalBreakdown(
                        "phase 1 objective reported unbounded".into(),
                    ))
                }
            }
            let infeasibility: f64 = self
                .basis
                .iter()
                .enumerate()
                .map(|(i, &b)| phase1[b] * self.t[i][width])
                .sum();
            if infeasibility > self.tol.feasibility {
                let farkas = self.row_duals(&phase1, &d).iter().map(|y| -y).collect();
                return Ok(LpOutcome::Infeasible { farkas });
            }
            self.drive_out_artificials();
        }

        let costs: Vec<f64> = self
            .kinds
            .iter()
            .map(|k| match *k {
                ColumnKind::Structural { orig, sign } => f64::from(sign) * lp.objective[orig],
                _ => 0.0,
            })
            .collect();
        let mut d = self.reduced_costs(&costs);
        let end = self.run(&mut d, &costs, false)?;
        let x = self.primal(lp.cols());
        match end {
            PhaseEnd::Optimal => {
                let value = linalg::dot(&lp.objective, &x);
                let duals = self.row_duals(&costs, &d);
                Ok(LpOutcome::Optimal { x, value, duals })
            }
            PhaseEnd::Unbounded { entering } => {
                let mut ray_std = vec![0.0; width];
                ray_std[entering] = 1.0;
                for (i, &b) in self.basis.iter().enumerate() {
                    ray_std[b] = -self.t[i][entering];
                }
                Ok(LpOutcome::Unbounded {
                    x,
                    ray: self.to_original(&ray_std, lp.cols()),
                })
            }
        }
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let width = self.width();
        let mut d: Vec<f64> = costs.to_vec();
        d.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(&self.t[i]) {
                    *dj -= cb * tij;
                }
            }
        }
        debug_assert_eq!(d.len(), width + 1);
        d
    }

    /// Dual values per original row, recovered from the reduced costs of the
    /// columns that formed the initial identity.
    fn row_duals(&self, costs: &[f64], d: &[f64]) -> Vec<f64> {
        self.init_col
            .iter()
            .zip(&self.flip)
            .map(|(&k, &s)| s * (costs[k] - d[k]))
            .collect()
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let width = self.width();
        let mut std = vec![0.0; width];
        for (i, &b) in self.basis.iter().enumerate() {
            std[b] = self.t[i][width];
        }
        self.to_original(&std, n)
    }

    fn to_original(&self, std: &[f64], n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (c, kind) in self.kinds.iter().enumerate() {
            if let ColumnKind::Structural { orig, sign } = *kind {
                x[orig] += f64::from(sign) * std[c];
            }
        }
        x
    }

    /// Simplex iterations on the current basis. `d` holds reduced costs with
    /// the negated objective value in its last slot.
    fn run(&mut self, d: &mut [f64], costs: &[f64], phase1: bool) -> Result<PhaseEnd, LpError> {
        let width = self.width();
        let mut streak = 0usize;
        let cost_tol = self.tol.pivot * (1.0 + linalg::norm_inf(costs));
        loop {
            let bland = streak >= DEGENERACY_STREAK;
            let allowed = |c: usize| phase1 || self.kinds[c] != ColumnKind::Artificial;

            let mut entering = None;
            let mut best = -cost_tol;
            for c in (0..width).filter(|&c| allowed(c)) {
                if d[c] < best {
                    entering = Some(c);
                    if bland {
                        break;
                    }
                    best = d[c];
                }
            }
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let leave = self.ratio_test(q, bland);
            let Some((r, ratio)) = leave else {
                return Ok(PhaseEnd::Unbounded { entering: q });
            };

            if ratio <= self.tol.feasibility {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, q, d)?;
        }
    }

    /// Leaving row for entering column `q`. Outside Bland mode this is a
    /// two-pass Harris test: the step is bounded with every row relaxed by
    /// the feasibility tolerance, then the largest pivot within the bound wins.
    fn ratio_test(&self, q: usize, bland: bool) -> Option<(usize, f64)> {
        let width = self.width();
        let rows = || (0..self.t.len()).filter(move |&i| self.t[i][q] > self.tol.pivot);
        let ratio = |i: usize| self.t[i][width].max(0.0) / self.t[i][q];
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in rows() {
                let r = ratio(i);
                best = match best {
                    Some((b, br))
                        if r > br + 1e-12 * br.max(1.0)
                            || (r >= br - 1e-12 * br.max(1.0) && self.basis[i] > self.basis[b]) =>
                    {
                        Some((b, br))
                    }
                    _ => Some((i, r)),
                };
            }
            return best;
        }
        let bound = rows()
            .map(|i| (self.t[i][width].max(0.0) + self.tol.feasibility) / self.t[i][q])
            .fold(f64::INFINITY, f64::min);
        rows()
            .filter(|&i| ratio(i) <= bound)
            .max_by(|&a, &b| self.t[a][q].total_cmp(&self.t[b][q]))
            .map(|i| (i, ratio(i)))
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > MAX_PIVOTS {
            return Err(LpError::NumericalBreakdown(format!(
                "pivot budget of {MAX_PIVOTS} exhausted"
            )));
        }
        let p = self.t[r][q];
        if p.abs() <= self.tol.pivot {
            return Err(LpError::NumericalBreakdown(format!(
                "pivot magnitude {p:e} below tolerance"
            )));
        }
        let pivot_row: Vec<f64> = self.t[r].iter().map(|v| v / p).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let f = d[q];
        if f != 0.0 {
            for (v, pr) in d.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            d[q] = 0.0;
        }
        self.t[r] = pivot_row;
        self.t[r][q] = 1.0;
        self.basis[r] = q;
        Ok(())
    }

    /// After a feasible phase 1, swap zero-level artificials for real columns.
    /// Rows with no usable column are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self) {
        let width = self.width();
        let mut scratch = vec![0.0; width + 1];
        for r in 0..self.t.len() {
            if self.kinds[self.basis[r]] != ColumnKind::Artificial {
                continue;
            }
            let candidate = (0..width)
                .filter(|&c| self.kinds[c] != ColumnKind::Artificial)
                .filter(|&c| self.t[r][c].abs() > self.tol.pivot)
                .max_by(|&a, &b| self.t[r][a].abs().total_cmp(&self.t[r][b].abs()));
            if let Some(c) = candidate {
                // The phase-2 objective row is rebuilt afterwards.
                let _ = self.pivot(r, c, &mut scratch);
                scratch.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
}
