use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use toc::bivariate::{combination_rows, sweep_rows, RowReport, TableRow};
use toc::pde::{PdeError, PdeSystem};
use toc::sampling::random_tensor_polynomial;
use toc::scalar::linspace;
use toc::tensor::{assemble_with, AssembleOptions, CompatibilityPolicy, TensorError};
use toc::ConstrainedExpression;

use crate::config::{Config, ConfigError};

pub const DEFAULT_SEED: u64 = 20190101;
pub const VERIFY_SAMPLES: usize = 100;
pub const RANDOM_FREE_FUNCTIONS: usize = 3;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("{0}")]
    Usage(String),
}

/// Grid resolution: one count for every axis or one per axis, each ≥ 2.
pub fn parse_grid(spec: &str, dim: usize) -> Result<Vec<usize>, CommandError> {
    let counts: Vec<usize> = spec
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CommandError::Usage(format!("bad grid `{spec}`"))))
        .collect::<Result<_, _>>()?;
    let counts = match counts.len() {
        1 => vec![counts[0]; dim],
        n if n == dim => counts,
        n => return Err(CommandError::Usage(format!("grid has {n} entries for a {dim}-dimensional domain"))),
    };
    if counts.iter().any(|&c| c < 2) {
        return Err(CommandError::Usage("grid resolution must be at least 2 per axis".into()));
    }
    Ok(counts)
}

/// Derivative multi-index such as `0,1`.
pub fn parse_partial(spec: &str, dim: usize) -> Result<Vec<u32>, CommandError> {
    let delta: Vec<u32> = spec
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| CommandError::Usage(format!("bad partial `{spec}`"))))
        .collect::<Result<_, _>>()?;
    if delta.len() != dim {
        return Err(CommandError::Usage(format!("partial `{spec}` needs {dim} entries")));
    }
    Ok(delta)
}

fn column_name(names: &[String], delta: &[u32]) -> String {
    let mut s = String::from("f_");
    for (k, &d) in delta.iter().enumerate() {
        for _ in 0..d {
            s.push_str(&names[k]);
        }
    }
    s
}

/// Grid nodes in output order: axis 1 varies fastest.
pub fn grid_points(config: &Config, counts: &[usize]) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = (0..config.domain.dim())
        .map(|k| {
            let (lo, hi) = config.domain.interval(k);
            linspace(lo, hi, counts[k])
        })
        .collect();
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut flat| {
            axes.iter()
                .map(|a| {
                    let v = a[flat % a.len()];
                    flat /= a.len();
                    v
                })
                .collect()
        })
        .collect()
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV of `f` and the requested partials on a uniform grid.
pub fn eval_csv(config: &Config, counts: &[usize], partials: &[Vec<u32>]) -> Result<String, CommandError> {
    let ce = assemble_with(
        &config.constraints,
        config.free_function.clone(),
        AssembleOptions { tol: config.tolerances.compatibility, ..AssembleOptions::default() },
    )?;
    let names = config.domain.names();
    let mut out = String::new();
    let mut header: Vec<String> = names.to_vec();
    header.push("f".into());
    header.extend(partials.iter().map(|d| column_name(names, d)));
    out.push_str(&header.join(","));
    out.push('\n');
    let zero = vec![0; config.domain.dim()];
    for p in grid_points(config, counts) {
        let mut row: Vec<String> = p.iter().map(|&v| num(v)).collect();
        row.push(num(ce.eval_f_partial(&p, &zero)?));
        for d in partials {
            row.push(num(ce.eval_f_partial(&p, d)?));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintResult {
    pub axis: String,
    pub point: f64,
    pub order: u32,
    pub slice: String,
    pub samples: usize,
    pub max_residual: f64,
    /// Coordinates of the worst sample.
    pub worst_at: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairResult {
    pub first: String,
    pub second: String,
    pub max_mismatch: Option<f64>,
    pub worst_at: Vec<f64>,
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub seed: u64,
    pub tolerance: f64,
    pub compatibility_tolerance: f64,
    pub free_functions: Vec<String>,
    pub constraints: Vec<ConstraintResult>,
    pub compatibility: Vec<PairResult>,
}

fn describe(names: &[String], axis: usize, point: f64, order: u32) -> String {
    match order {
        0 => format!("{} = {point}", names[axis]),
        d => format!("d^{d}/d{}^{d} at {} = {point}", names[axis], names[axis]),
    }
}

/// Samples every constraint functional of `f` for the configured `g` and
/// random polynomial free functions.
pub fn verify(config: &Config, seed: u64, tol: Option<f64>) -> Result<VerifyReport, CommandError> {
    let tol = tol.unwrap_or(config.tolerances.residual);
    let dim = config.domain.dim();
    let names = config.domain.names();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frees = vec![config.free_function.clone()];
    for _ in 0..RANDOM_FREE_FUNCTIONS {
        frees.push(random_tensor_polynomial::<f64, _>(&mut rng, dim, 4));
    }
    let base = assemble_with(
        &config.constraints,
        frees[0].clone(),
        AssembleOptions {
            policy: CompatibilityPolicy::Flag,
            tol: config.tolerances.compatibility,
            ..AssembleOptions::default()
        },
    )?;
    let ces: Vec<ConstrainedExpression> =
        std::iter::once(base.clone()).chain(frees[1..].iter().map(|g| base.with_free_function(g.clone()))).collect();

    let mut constraints = Vec::new();
    for axis in 0..dim {
        for s in config.constraints.axis(axis) {
            let c = &s.constraint;
            let mut delta = vec![0; dim];
            delta[axis] = c.order;
            let mut worst: (f64, Vec<f64>) = (0.0, Vec::new());
            for _ in 0..VERIFY_SAMPLES {
                let p: Vec<f64> = (0..dim)
                    .map(|k| {
                        let (lo, hi) = config.domain.interval(k);
                        if k == axis {
                            c.point
                        } else {
                            rng.gen_range(lo..=hi)
                        }
                    })
                    .collect();
                let target = s.slice.eval(&p).unwrap_or(f64::NAN);
                for ce in &ces {
                    let r = (ce.eval_f_partial(&p, &delta)? - target).abs();
                    let r = if r.is_nan() { f64::INFINITY } else { r };
                    if r > worst.0 || worst.1.is_empty() {
                        worst = (r, p.clone());
                    }
                }
            }
            constraints.push(ConstraintResult {
                axis: names[axis].clone(),
                point: c.point,
                order: c.order,
                slice: s.slice.to_string(),
                samples: VERIFY_SAMPLES * ces.len(),
                max_residual: worst.0,
                worst_at: worst.1,
                passed: worst.0 <= tol,
            });
        }
    }

    let mut compatibility: Vec<PairResult> = Vec::new();
    let report = config.constraints.validate_compatibility(config.tolerances.compatibility);
    for check in &report.checks {
        let first = describe(names, check.first.axis, check.first.point, check.first.order);
        let second = describe(names, check.second.axis, check.second.point, check.second.order);
        let idx = match compatibility.iter().position(|r| r.first == first && r.second == second) {
            Some(i) => i,
            None => {
                compatibility.push(PairResult {
                    first,
                    second,
                    max_mismatch: Some(0.0),
                    worst_at: check.point.clone(),
                    error: None,
                    passed: true,
                });
                compatibility.len() - 1
            }
        };
        let entry = &mut compatibility[idx];
        match &check.mismatch {
            Ok(m) => {
                if entry.max_mismatch.is_some_and(|old| *m > old) {
                    entry.max_mismatch = Some(*m);
                    entry.worst_at = check.point.clone();
                }
                if *m > report.tol {
                    entry.passed = false;
                }
            }
            Err(e) => {
                entry.max_mismatch = None;
                entry.error = Some(e.clone());
                entry.worst_at = check.point.clone();
                entry.passed = false;
            }
        }
    }

    let passed = constraints.iter().all(|c| c.passed) && compatibility.iter().all(|c| c.passed);
    Ok(VerifyReport {
        passed,
        seed,
        tolerance: tol,
        compatibility_tolerance: config.tolerances.compatibility,
        free_functions: frees.iter().map(|g| g.to_string()).collect(),
        constraints,
        compatibility,
    })
}

#[derive(Debug, Clone)]
pub struct PdeOutput {
    pub csv: String,
    pub summary: String,
}

/// Solves the `[pde]` problem and tabulates `(x, y, f, residual)`.
pub fn solve_pde(config: &Config, counts: &[usize]) -> Result<PdeOutput, CommandError> {
    let problem = config.pde_problem()?;
    let system = PdeSystem::new(problem)?;
    let xi = system.solve()?;
    let ce = system.constrained(&xi);
    let names = config.domain.names();
    let mut csv = format!("{},{},f,residual\n", names[0], names[1]);
    let mut max_res: f64 = 0.0;
    for p in grid_points(config, counts) {
        let at = [p[0], p[1]];
        let f = ce.eval_f(&p)?;
        let r = system.pde_residual_at(&ce, &at)?;
        max_res = max_res.max(r.abs());
        writeln!(csv, "{},{},{},{}", num(p[0]), num(p[1]), num(f), num(r)).expect("write to string");
    }
    let collocation: f64 = system.residuals(&xi)?.iter().map(|r| r * r).sum::<f64>().sqrt();
    let boundary = toc::pde::boundary_residual(&ce)?;
    let summary = format!(
        "degree {}\nbasis functions {} ({} pruned)\ncollocation points {}\ncollocation residual norm {:.6e}\nmax grid residual {:.6e}\nmax boundary residual {:.6e}\n",
        config.pde.as_ref().map_or(0, |p| p.degree),
        system.basis.len(),
        system.pruned.len(),
        system.points.len(),
        collocation,
        max_res,
        boundary
    );
    Ok(PdeOutput { csv, summary })
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub reports: Vec<RowReport>,
    pub text: String,
    pub passed: bool,
}

/// Runs the combination-table sweep over `rows` (1-based indices into the table; all
/// rows when empty).
pub fn table_sweep(only: &[usize], seed: u64) -> Result<SweepOutput, CommandError> {
    let all = combination_rows();
    let picked: Vec<(usize, TableRow)> = if only.is_empty() {
        all.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect()
    } else {
        only.iter()
            .map(|&i| {
                all.get(i.wrapping_sub(1))
                    .cloned()
                    .map(|r| (i, r))
                    .ok_or_else(|| CommandError::Usage(format!("row {i} outside 1..={}", all.len())))
            })
            .collect::<Result<_, _>>()?
    };
    let (indices, rows): (Vec<usize>, Vec<TableRow>) = picked.into_iter().unzip();
    Ok(sweep_output(&indices, &rows, seed))
}

/// Formats a sweep over arbitrary rows; `indices` label them.
pub fn sweep_output(indices: &[usize], rows: &[TableRow], seed: u64) -> SweepOutput {
    let reports = sweep_rows(rows, seed);
    let mut text =
        format!("{:>3}  {:<8}  {:>10}  {:>10}  result  constraints\n", "row", "flags", "residual", "g-change");
    for (i, (rep, row)) in indices.iter().zip(reports.iter().zip(rows)) {
        let change = rep.min_free_change.map_or("-".to_string(), |c| format!("{c:.3e}"));
        let status = if rep.passed { "pass" } else { "FAIL" };
        writeln!(
            text,
            "{i:>3}  {}  {:>10.3e}  {change:>10}  {status:<6}  {}{}",
            rep.flags,
            rep.max_residual,
            row.flags.names().join(" "),
            rep.error.as_ref().map(|e| format!("  ({e})")).unwrap_or_default()
        )
        .expect("write to string");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    writeln!(text, "{} rows, {} passed, {} failed", reports.len(), reports.len() - failed, failed)
        .expect("write to string");
    SweepOutput { passed: failed == 0, reports, text }
}
