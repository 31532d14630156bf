use serde::{Deserialize, Serialize};

use super::{eval, eval_with_gradient, Expr, Func};

/// Finite-difference step used for gradient comparisons.
pub const FD_STEP: f64 = 1e-6;
/// Relative AD/finite-difference gap that counts as a smoothness violation.
pub const VIOLATION_THRESHOLD: f64 = 1e-4;
/// Offset of the extra samples placed on either side of a seam.
pub const SEAM_OFFSET: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessViolation {
    pub point: Vec<f64>,
    pub variable: usize,
    pub ad: f64,
    pub finite_difference: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub points_checked: usize,
    pub seams_found: usize,
    /// Points where the expression could not be evaluated.
    pub skipped: usize,
    pub violations: Vec<SmoothnessViolation>,
}

impl SmoothnessReport {
    pub fn is_smooth(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Central difference gradient with step `h`.
pub fn central_difference(e: &Expr, x: &[f64], h: f64) -> Result<Vec<f64>, super::ExprError> {
    let mut p = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let up = eval(e, &p)?;
        p[i] = x[i] - h;
        let down = eval(e, &p)?;
        p[i] = x[i];
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}

/// Compares AD gradients with central differences over a regular grid on
/// `bounds`, adding samples on and around every seam (piecewise condition
/// boundary or `abs` kink) crossed between neighbouring grid nodes.
pub fn validate_smoothness(e: &Expr, bounds: &[(f64, f64)], samples: usize) -> SmoothnessReport {
    let dim = bounds.len();
    let mut report = SmoothnessReport::default();
    if dim == 0 || samples == 0 {
        return report;
    }
    let per_axis = if dim == 1 {
        samples
    } else {
        ((samples as f64).powf(1.0 / dim as f64).ceil() as usize).max(2)
    };
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| axis_nodes(lo, hi, per_axis))
        .collect();
    let seams = seam_functions(e);

    let mut points = Vec::new();
    let mut index = vec![0usize; dim];
    loop {
        let node: Vec<f64> = index.iter().enumerate().map(|(a, &k)| axes[a][k]).collect();
        for a in 0..dim {
            if index[a] + 1 < per_axis {
                let mut next = node.clone();
                next[a] = axes[a][index[a] + 1];
                for h in &seams {
                    if let Some(t) = locate_seam(h, &node, &next, a) {
                        report.seams_found += 1;
                        for off in [0.0, -SEAM_OFFSET, SEAM_OFFSET] {
                            let v = t + off;
                            if v >= bounds[a].0 && v <= bounds[a].1 {
                                let mut p = node.clone();
                                p[a] = v;
                                points.push(p);
                            }
                        }
                    }
                }
            }
        }
        points.push(node);
        if !advance(&mut index, per_axis) {
            break;
        }
    }

    for p in points {
        let (Ok((_, ad)), Ok(fd)) = (eval_with_gradient(e, &p), central_difference(e, &p, FD_STEP))
        else {
            report.skipped += 1;
            continue;
        };
        report.points_checked += 1;
        for (variable, (a, f)) in ad.iter().zip(&fd).enumerate() {
            if (a - f).abs() > VIOLATION_THRESHOLD * f.abs().max(1.0) {
                report.violations.push(SmoothnessViolation {
                    point: p.clone(),
                    variable,
                    ad: *a,
                    finite_difference: *f,
                });
            }
        }
    }
    report
}

fn axis_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { hi } else { lo + k as f64 * step })
        .collect()
}

fn advance(index: &mut [usize], per_axis: usize) -> bool {
    for k in index.iter_mut() {
        *k += 1;
        if *k < per_axis {
            return true;
        }
        *k = 0;
    }
    false
}

/// Functions whose zero set marks a potential derivative jump.
fn seam_functions(e: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    e.visit(&mut |node| match node {
        Expr::Piecewise { branches, .. } => {
            for (c, _) in branches {
                out.push(Expr::binary(super::BinOp::Sub, c.lhs.clone(), c.rhs.clone()));
            }
        }
        Expr::Call(Func::Abs, arg) => out.push((**arg).clone()),
        _ => {}
    });
    out
}

/// Zero of `h` on the segment `from -> to` (which differ only along `axis`),
/// located by bisection on a sign change.
fn locate_seam(h: &Expr, from: &[f64], to: &[f64], axis: usize) -> Option<f64> {
    let at = |t: f64| {
        let mut p = from.to_vec();
        p[axis] = t;
        eval(h, &p).ok()
    };
    let (mut lo, mut hi) = (from[axis], to[axis]);
    let (mut hlo, hhi) = (at(lo)?, at(hi)?);
    if hlo == 0.0 {
        return Some(lo);
    }
    if hhi == 0.0 || hlo.signum() == hhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = at(mid)?;
        if hm == 0.0 {
            return Some(mid);
        }
        if hm.signum() == hlo.signum() {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
