//! Gordan's and Motzkin's theorems of the alternative as decision procedures.
//!
//! Both reduce to one bounded LP:
//!
//! ```text
//! maximize delta  s.t.  A x + delta e <= 0,  B x <= 0,  delta <= 1,  x free
//! ```
//!
//! A positive optimum gives a strict solution of `A x < 0, B x <= 0`; an
//! optimum at zero leaves the LP duals as the alternative multipliers
//! `A^T y + B^T z = 0`, `y >= 0`, `sum(y) = 1`, `z >= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lp::{self, LpOutcome, LpProblem, RowKind, VarBound};
use crate::tol::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    PrimalHolds,
    DualHolds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GordanOutcome {
    pub branch: Branch,
    /// `x` with `A x <= -strict_margin < 0`.
    pub primal_witness: Option<Vec<f64>>,
    /// `y >= 0`, `sum(y) = 1`, `A^T y = 0`.
    pub dual_witness: Option<Vec<f64>>,
    pub strict_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotzkinOutcome {
    pub branch: Branch,
    /// `x` with `A x <= -strict_margin < 0` and `B x <= 0`.
    pub primal_witness: Option<Vec<f64>>,
    /// `(y, z)` with `y >= 0`, `sum(y) = 1`, `z >= 0`, `A^T y + B^T z = 0`.
    pub dual_witness: Option<(Vec<f64>, Vec<f64>)>,
    pub strict_margin: Option<f64>,
}

pub fn gordan(a: &[Vec<f64>], tol: &ToleranceConfig) -> Result<GordanOutcome> {
    let out = motzkin(a, &[], tol)?;
    Ok(GordanOutcome {
        branch: out.branch,
        primal_witness: out.primal_witness,
        dual_witness: out.dual_witness.map(|(y, _)| y),
        strict_margin: out.strict_margin,
    })
}

pub fn motzkin(a: &[Vec<f64>], b: &[Vec<f64>], tol: &ToleranceConfig) -> Result<MotzkinOutcome> {
    let cols = check_shapes(a, b)?;
    let (ma, mb) = (a.len(), b.len());

    // Variables: x (free, `cols`), delta (free).
    let mut matrix: Matrix = Vec::with_capacity(ma + mb + 1);
    for row in a {
        let mut r = row.clone();
        r.push(1.0);
        matrix.push(r);
    }
    for row in b {
        let mut r = row.clone();
        r.push(0.0);
        matrix.push(r);
    }
    let mut cap = vec![0.0; cols];
    cap.push(1.0);
    matrix.push(cap);

    let mut rhs = vec![0.0; ma + mb];
    rhs.push(1.0);
    let mut objective = vec![0.0; cols];
    objective.push(-1.0);

    let lp = LpProblem {
        objective,
        matrix,
        rhs,
        row_kinds: vec![RowKind::Le; ma + mb + 1],
        bounds: vec![VarBound::Free; cols + 1],
    };
    let LpOutcome::Optimal { x, value, duals } = lp::solve_lp(&lp, tol)? else {
        return Err(lp::LpError::NumericalBreakdown(
            "alternative LP is feasible and bounded by construction".into(),
        )
        .into());
    };

    let delta = -value;
    if delta > tol.strict {
        let witness = x[..cols].to_vec();
        let margin = -linalg::mat_vec(a, &witness)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(MotzkinOutcome {
            branch: Branch::PrimalHolds,
            primal_witness: Some(witness),
            dual_witness: None,
            strict_margin: Some(margin),
        });
    }

    // Dual values are <= 0 on these Le rows; negate and normalize the A block.
    let mut y: Vec<f64> = duals[..ma].iter().map(|v| (-v).max(0.0)).collect();
    let mut z: Vec<f64> = duals[ma..ma + mb].iter().map(|v| (-v).max(0.0)).collect();
    let total: f64 = y.iter().sum();
    if total <= tol.pivot {
        return Err(lp::LpError::NumericalBreakdown(format!(
            "alternative multipliers vanish (sum {total:e})"
        ))
        .into());
    }
    y.iter_mut().for_each(|v| *v /= total);
    z.iter_mut().for_each(|v| *v /= total);
    Ok(MotzkinOutcome {
        branch: Branch::DualHolds,
        primal_witness: None,
        dual_witness: Some((y, z)),
        strict_margin: None,
    })
}

fn check_shapes(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize> {
    if a.is_empty() {
        return Err(Error::DimensionMismatch(
            "the strict block A must have at least one row".into(),
        ));
    }
    let cols = linalg::column_count(a)
        .ok_or_else(|| Error::DimensionMismatch("A has rows of different lengths".into()))?;
    if b.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "B rows must have {cols} columns like A"
        )));
    }
    Ok(cols)
}

/// Residuals used when replaying a witness: `||A^T y + B^T z||_inf`.
pub fn dual_residual(a: &[Vec<f64>], b: &[Vec<f64>], y: &[f64], z: &[f64]) -> f64 {
    let cols = a.first().map_or(0, Vec::len);
    let mut r = linalg::vec_mat(y, a, cols);
    for (ri, v) in r.iter_mut().zip(linalg::vec_mat(z, b, cols)) {
        *ri += v;
    }
    linalg::norm_inf(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn scalar_strict_inequality() {
        let out = gordan(&[vec![1.0]], &tol()).unwrap();
        assert_eq!(out.branch, Branch::PrimalHolds);
        let x = out.primal_witness.unwrap();
        assert!(x[0] < 0.0);
        assert!((out.strict_margin.unwrap() - 1.0).abs() < 1e-12);
        assert!((x[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_rows_force_dual() {
        let out = gordan(&[vec![1.0], vec![-1.0]], &tol()).unwrap();
        assert_eq!(out.branch, Branch::DualHolds);
        let y = out.dual_witness.unwrap();
        assert!((y[0] - 0.5).abs() < 1e-12 && (y[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn counterexample_system_has_no_strict_solution() {
        // [[0, 1], [Jf(0), f(0.5) - f(0)]] with Jf(0) = 0 and equal values.
        let a = vec![vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]];
        let out = gordan(&a, &tol()).unwrap();
        assert_eq!(out.branch, Branch::DualHolds);
        let y = out.dual_witness.unwrap();
        assert!(y[0].abs() < 1e-12);
        assert!(dual_residual(&a, &[], &y, &[]) < 1e-12);
        assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn motzkin_examples() {
        let t = tol();
        let out = motzkin(&[vec![1.0]], &[vec![1.0]], &t).unwrap();
        assert_eq!(out.branch, Branch::PrimalHolds);
        assert!((out.primal_witness.unwrap()[0] + 1.0).abs() < 1e-12);

        for (a, b) in [(1.0, -1.0), (-1.0, 1.0)] {
            let out = motzkin(&[vec![a]], &[vec![b]], &t).unwrap();
            assert_eq!(out.branch, Branch::DualHolds);
            let (y, z) = out.dual_witness.unwrap();
            assert!((y[0] - 1.0).abs() < 1e-12 && (z[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_errors() {
        let t = tol();
        assert!(matches!(motzkin(&[], &[], &t), Err(Error::DimensionMismatch(_))));
        assert!(matches!(
            motzkin(&[vec![1.0]], &[vec![1.0, 2.0]], &t),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
