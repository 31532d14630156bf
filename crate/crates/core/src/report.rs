//! Full analysis runs, the JSON report format, CSV matrices, and report
//! replay.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::invexity::replay::{replay_tolerance, replay_verdict};
use crate::invexity::{
    certify_domain, theorem_crosscheck, CrosscheckConfig, CrosscheckReport, DomainVerdict, PairKind, PairVerdict,
    Sampler,
};
use crate::linalg::{self, Matrix};
use crate::problem::{evaluate, Problem, ProblemFile};
use crate::scalarization::{simplex_grid, solve_weighting_on, weakly_efficient_on, FeasibleGrid, GlobalStatus, WeightingSolution};
use crate::stationarity::{scan_critical_points, stationarity_residual, StationarityKind, StationaryPoint};
use crate::tol::ToleranceConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub grid_step: f64,
    pub pair_sampler: Sampler,
    pub lambda_grid_step: f64,
    pub seed: u64,
    /// Kernels kept per domain verdict; failures are always kept in full.
    pub kernel_cap: usize,
    /// Measure per-phase wall time. Off by default so reports are reproducible.
    pub record_timings: bool,
    pub tolerances: ToleranceConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            grid_step: 0.05,
            pair_sampler: Sampler::Grid { step: 0.25 },
            lambda_grid_step: 0.1,
            seed: 42,
            kernel_cap: 200,
            record_timings: false,
            tolerances: ToleranceConfig::default(),
        }
    }
}

/// Domain verdict with the kernel table truncated to `kernel_cap` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub kind: PairKind,
    pub sampler: Sampler,
    pub feasible_only: bool,
    pub points: usize,
    pub skipped: usize,
    pub pairs: usize,
    pub all_pairs_kernel: bool,
    pub failures: Vec<PairVerdict>,
    pub kernels: Vec<PairVerdict>,
    pub kernels_omitted: usize,
}

impl DomainSummary {
    pub fn new(v: &DomainVerdict, kernel_cap: usize) -> Self {
        let kernel_count = v.kernels().count();
        Self {
            kind: v.kind,
            sampler: v.sampler,
            feasible_only: v.feasible_only,
            points: v.points,
            skipped: v.skipped,
            pairs: v.pairs,
            all_pairs_kernel: v.all_pairs_kernel(),
            failures: v.failures().cloned().collect(),
            kernels: v.kernels().take(kernel_cap).cloned().collect(),
            kernels_omitted: kernel_count.saturating_sub(kernel_cap),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub problem_name: String,
    /// The analyzed problem, so the report can be replayed on its own.
    pub problem: ProblemFile,
    pub config: AnalysisConfig,
    pub critical_points: Vec<StationaryPoint>,
    pub kt_points: Vec<StationaryPoint>,
    pub weighting_runs: Vec<WeightingSolution>,
    pub weakly_efficient_nodes: Vec<Vec<f64>>,
    pub pair_verdicts: Vec<DomainSummary>,
    pub crosscheck: CrosscheckReport,
    /// Milliseconds per phase; `None` unless `record_timings` is set.
    pub timings: Option<BTreeMap<String, u64>>,
}

struct Clock {
    enabled: bool,
    phases: BTreeMap<String, u64>,
    last: Instant,
}

impl Clock {
    fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        if self.enabled {
            let ms = now.duration_since(self.last).as_millis() as u64;
            self.phases.insert(phase.to_string(), ms);
        }
        self.last = now;
    }
}

pub fn analyze(problem: &Problem, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let tol = &config.tolerances;
    let mut clock = Clock {
        enabled: config.record_timings,
        phases: BTreeMap::new(),
        last: Instant::now(),
    };

    let critical_points = scan_critical_points(problem, config.grid_step, StationarityKind::Vector, tol)?;
    clock.lap("critical_points");
    let kt_points = scan_critical_points(problem, config.grid_step, StationarityKind::Kt, tol)?;
    clock.lap("kt_points");

    let grid = FeasibleGrid::new(problem, config.grid_step, tol)?;
    let weakly_efficient_nodes = weakly_efficient_on(&grid);
    clock.lap("weakly_efficient");

    let weighting_runs = simplex_grid(problem.objective_count(), config.lambda_grid_step)?
        .iter()
        .map(|w| solve_weighting_on(problem, &grid, w, tol))
        .collect::<Result<Vec<_>>>()?;
    clock.lap("weighting");

    let pair_verdicts = PairKind::ALL
        .iter()
        .map(|&kind| certify_domain(problem, kind, config.pair_sampler, tol).map(|v| DomainSummary::new(&v, config.kernel_cap)))
        .collect::<Result<Vec<_>>>()?;
    clock.lap("pair_certification");

    let crosscheck = theorem_crosscheck(
        problem,
        CrosscheckConfig {
            grid_step: config.grid_step,
            pair_sampler: config.pair_sampler,
        },
        tol,
    )?;
    clock.lap("crosscheck");

    Ok(AnalysisReport {
        problem_name: problem.name.clone(),
        problem: problem.source().clone(),
        config: config.clone(),
        critical_points,
        kt_points,
        weighting_runs,
        weakly_efficient_nodes,
        pair_verdicts,
        crosscheck,
        timings: config.record_timings.then_some(clock.phases),
    })
}

/// Pretty JSON with sorted keys and every float printed with 17 significant
/// digits, so equal values always serialize to equal bytes.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|source| Error::Json {
        context: "serializing report".into(),
        source,
    })?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let f = n.as_f64().unwrap_or(f64::NAN);
                let _ = write!(out, "{f:.16e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(item, indent, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn write_report(report: &AnalysisReport, path: &Path) -> Result<()> {
    std::fs::write(path, to_stable_json(report)?).map_err(|source| Error::Io {
        context: path.display().to_string(),
        source,
    })
}

pub fn read_report(path: &Path) -> Result<AnalysisReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        context: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })
}

/// Matrix from CSV text: one row per line, comma-separated decimals, no
/// header. Positions in errors are 1-based.
pub fn parse_matrix(text: &str, name: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Matrix = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Csv {
            path: name.to_string(),
            row,
            column: 0,
            message: e.to_string(),
        })?;
        let mut values = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                path: name.to_string(),
                row,
                column: c + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    path: name.to_string(),
                    row,
                    column: c + 1,
                    message: format!("`{field}` is not finite"),
                });
            }
            values.push(v);
        }
        if let Some(first) = rows.first() {
            if values.len() != first.len() {
                return Err(Error::Csv {
                    path: name.to_string(),
                    row,
                    column: values.len().min(first.len()) + 1,
                    message: format!("expected {} columns, found {}", first.len(), values.len()),
                });
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            path: name.to_string(),
            row: 0,
            column: 0,
            message: "matrix has no rows".into(),
        });
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        context: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text, &path.display().to_string())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Re-derives every multiplier, kernel, certificate and optimality witness in
/// `report` from its embedded problem, within the recorded tolerances.
pub fn verify_report(report: &AnalysisReport) -> Result<VerifyOutcome> {
    let problem = Problem::from_file(report.problem.clone())?;
    let tol = &report.config.tolerances;
    let mut out = VerifyOutcome::default();

    for p in report.critical_points.iter().chain(&report.kt_points) {
        verify_stationary(&problem, p, tol, &mut out)?;
    }

    for run in &report.weighting_runs {
        let w = run.weights.as_slice();
        for m in &run.minimizers {
            let ep = evaluate(&problem, m, tol)?;
            let v = linalg::dot(w, &ep.f);
            out.check(ep.feasible && (v - run.value).abs() <= tol.value + 1e-12 * v.abs(), || {
                format!("weighting minimizer {m:?} for {w:?}: value {v:e}, recorded {:e}", run.value)
            });
        }
    }

    let summaries = report.pair_verdicts.iter().flat_map(|s| s.failures.iter().chain(&s.kernels));
    let crosscheck_pairs = report.crosscheck.checks().flat_map(|c| c.pair_failures.iter());
    for v in summaries.chain(crosscheck_pairs) {
        let pbar = evaluate(&problem, &v.xbar, tol)?;
        let p = evaluate(&problem, &v.x, tol)?;
        let replay = replay_verdict(v, &pbar, &p, tol);
        out.check(replay.is_ok(), || {
            format!("{} pair xbar={:?} x={:?}: {}", v.kind, v.xbar, v.x, replay.unwrap_err())
        });
    }

    for check in report.crosscheck.checks() {
        for f in &check.weighting_failures {
            let fx = problem.objective_values(&f.x)?;
            let value = linalg::dot(&f.lambda, &fx);
            match &f.status {
                GlobalStatus::NotGlobal { witness, .. } => {
                    let ew = evaluate(&problem, witness, tol)?;
                    let wv = linalg::dot(&f.lambda, &ew.f);
                    out.check(ew.feasible && wv < value - tol.value, || {
                        format!("{}: witness {witness:?} does not beat {:?} for {:?}", check.kind, f.x, f.lambda)
                    });
                }
                GlobalStatus::Global { tie, .. } => {
                    let et = evaluate(&problem, tie, tol)?;
                    let tv = linalg::dot(&f.lambda, &et.f);
                    out.check(et.feasible && (tv - value).abs() <= tol.value, || {
                        format!("{}: tie {tie:?} does not match {:?}", check.kind, f.x)
                    });
                }
                GlobalStatus::UniqueGlobal { .. } => {
                    out.check(false, || format!("{}: unique global point listed as failure", check.kind));
                }
            }
        }
        out.check(check.lhs == check.weighting_failures.is_empty(), || {
            format!("{}: side L does not match its witnesses", check.kind)
        });
        out.check(check.rhs == check.pair_failures.is_empty(), || {
            format!("{}: side R does not match its witnesses", check.kind)
        });
        out.check(check.agreement == (check.lhs == check.rhs), || {
            format!("{}: agreement flag is inconsistent", check.kind)
        });
        out.check(check.agreement, || {
            format!("{}: L = {}, R = {} disagree", check.kind, check.lhs, check.rhs)
        });
    }
    out.check(report.crosscheck.agreement == report.crosscheck.checks().all(|c| c.agreement), || {
        "crosscheck agreement flag is inconsistent".into()
    });
    Ok(out)
}

fn verify_stationary(problem: &Problem, p: &StationaryPoint, tol: &ToleranceConfig, out: &mut VerifyOutcome) -> Result<()> {
    let eps = replay_tolerance(tol);
    let ep = evaluate(problem, &p.x, tol)?;
    let jg: Matrix = p.active_set.iter().filter_map(|&j| ep.jacobian_g.get(j).cloned()).collect();
    let mu_ok = p.mu.len() == p.active_set.len() && p.mu.iter().all(|m| *m >= -eps);
    if p.kind == StationarityKind::Kt {
        out.check(ep.feasible && ep.active_set == p.active_set && mu_ok, || {
            format!("KT point {:?}: feasibility, active set or mu signs do not replay", p.x)
        });
    }
    for lambda in p.all_lambdas() {
        let total: f64 = lambda.iter().sum();
        let signs = lambda.iter().all(|l| *l >= -eps) && (total - 1.0).abs() <= eps;
        let residual = if lambda == p.lambda {
            stationarity_residual(&ep.jacobian_f, &lambda, &jg, &p.mu)
        } else {
            // Extreme multipliers carry no mu of their own; only their
            // existence in the multiplier set matters.
            lp_residual(&ep.jacobian_f, &lambda, &jg, tol)?
        };
        out.check(signs && residual <= eps, || {
            format!("stationary point {:?}: multiplier {lambda:?} has residual {residual:e}", p.x)
        });
    }
    Ok(())
}

/// Smallest `||lambda Jf + mu Jg||_inf` over `mu >= 0` (exact zero when
/// `Jg` is empty), computed by least absolute deviation LP.
fn lp_residual(jf: &[Vec<f64>], lambda: &[f64], jg: &[Vec<f64>], tol: &ToleranceConfig) -> Result<f64> {
    let base = linalg::vec_mat(lambda, jf, jf.first().map_or(0, Vec::len));
    if jg.is_empty() {
        return Ok(linalg::norm_inf(&base));
    }
    // minimize r  s.t.  -r <= base_c + sum_j mu_j Jg_jc <= r,  mu >= 0, r >= 0
    let k = jg.len();
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for (c, b) in base.iter().enumerate() {
        let col: Vec<f64> = jg.iter().map(|row| row[c]).collect();
        let mut up = col.clone();
        up.push(-1.0);
        matrix.push(up);
        rhs.push(-b);
        let mut down: Vec<f64> = col.iter().map(|v| -v).collect();
        down.push(-1.0);
        matrix.push(down);
        rhs.push(*b);
    }
    let mut objective = vec![0.0; k];
    objective.push(1.0);
    let lp = crate::lp::LpProblem {
        objective,
        row_kinds: vec![crate::lp::RowKind::Le; matrix.len()],
        bounds: vec![crate::lp::VarBound::NonNegative; k + 1],
        matrix,
        rhs,
    };
    match crate::lp::solve_lp(&lp, tol)? {
        crate::lp::LpOutcome::Optimal { value, .. } => Ok(value),
        _ => Ok(f64::INFINITY),
    }
}
