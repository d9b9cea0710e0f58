//! Deterministic CSV artifacts. Every writer emits a fixed header, rows in
//! lexicographic order of the leading key columns, and floats with 12
//! significant digits, so identical inputs produce byte-identical files.

use std::path::Path;

use hjbhomog_core::cell_solver::{CellSolution, PeriodicGrid, ValueField};
use hjbhomog_core::control_model::{Region, Variant};
use hjbhomog_core::effective_hamiltonian::{HBarTable, Method};
use hjbhomog_core::homogenized_solver::ConvergenceReport;
use hjbhomog_core::trajectory::{SegmentControl, Trajectory};
use hjbhomog_core::{Error, Result};

use crate::acceptance::Check;

/// 12 significant digits; enough to reproduce an f64 for plotting purposes
/// while keeping files diffable. Negative zero is folded into zero so the
/// sign of a rounding artifact cannot flip a byte in the output.
pub fn fmt_f(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

fn region_tag(r: Region) -> &'static str {
    match r {
        Region::Omega1 => "omega1",
        Region::Omega2 => "omega2",
        Region::Interface => "interface",
    }
}

fn open(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    csv::Writer::from_path(path).map_err(csv_err)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Invalid {
        what: "output",
        why: e.to_string(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid {
        what: "output",
        why: e.to_string(),
    }
}

/// `variant,x,p,hbar,method,h,param`; `param` is the smallest discount of
/// the schedule for the discount method and the horizon otherwise.
pub fn write_hbar_tables(path: &Path, tables: &[HBarTable]) -> Result<()> {
    let mut w = open(path)?;
    w.write_record(["variant", "x", "p", "hbar", "method", "h", "param"])
        .map_err(csv_err)?;
    let mut sorted: Vec<&HBarTable> = tables.iter().collect();
    sorted.sort_by_key(|t| t.variant.tag());
    for t in sorted {
        let param = match t.method {
            Method::Discount => *t.meta.rho_schedule.last().unwrap(),
            Method::Horizon | Method::Crossing => t.meta.horizon_t,
        };
        for (xi, &x) in t.x_samples.iter().enumerate() {
            for (pi, &p) in t.p_samples.iter().enumerate() {
                w.write_record([
                    t.variant.tag().to_string(),
                    fmt_f(x),
                    fmt_f(p),
                    fmt_f(t.value(xi, pi)),
                    t.method.tag().to_string(),
                    fmt_f(t.meta.h),
                    fmt_f(param),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

/// `variant,eps,sup_error`, eps ascending within each variant.
pub fn write_convergence(path: &Path, reports: &[ConvergenceReport]) -> Result<()> {
    let mut rows: Vec<(&str, f64, f64)> = Vec::new();
    for r in reports {
        for (&eps, &err) in r.eps_list.iter().zip(&r.sup_errors) {
            rows.push((r.variant.tag(), eps, err));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    let mut w = open(path)?;
    w.write_record(["variant", "eps", "sup_error"])
        .map_err(csv_err)?;
    for (variant, eps, err) in rows {
        w.write_record([variant.to_string(), fmt_f(eps), fmt_f(err)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// `t,y,region,alpha1,alpha2,mu,cost_accum,regular_flag`. One-sided controls
/// leave the other side's column empty and report `mu` as 1 or 0;
/// `regular_flag` is empty off interface segments.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut flags: Vec<&'static str> = vec![""; traj.samples.len()];
    for seg in &traj.interface_segments {
        for f in flags[seg.first..=seg.last].iter_mut() {
            *f = if seg.regular { "true" } else { "false" };
        }
    }
    let mut w = open(path)?;
    w.write_record([
        "t",
        "y",
        "region",
        "alpha1",
        "alpha2",
        "mu",
        "cost_accum",
        "regular_flag",
    ])
    .map_err(csv_err)?;
    for (s, flag) in traj.samples.iter().zip(&flags) {
        let (a1, a2, mu) = match s.applied {
            SegmentControl::Side { side, alpha } => match side.index() {
                0 => (fmt_f(alpha), String::new(), fmt_f(1.0)),
                _ => (String::new(), fmt_f(alpha), fmt_f(0.0)),
            },
            SegmentControl::Mixed(a) => (fmt_f(a.alpha1), fmt_f(a.alpha2), fmt_f(a.mu)),
        };
        w.write_record([
            fmt_f(s.t),
            fmt_f(s.x),
            region_tag(s.region).to_string(),
            a1,
            a2,
            mu,
            fmt_f(s.cost_accum),
            flag.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// `variant,x,p,hbar,residual` for the solved cell problems.
pub fn write_cell_summary(path: &Path, rows: &[(&CellSolution, f64)]) -> Result<()> {
    let mut sorted: Vec<&(&CellSolution, f64)> = rows.iter().collect();
    sorted.sort_by_key(|(s, _)| s.variant.tag());
    let mut w = open(path)?;
    w.write_record(["variant", "x", "p", "hbar", "residual"])
        .map_err(csv_err)?;
    for (sol, residual) in sorted {
        w.write_record([
            sol.variant.tag().to_string(),
            fmt_f(sol.x),
            fmt_f(sol.p),
            fmt_f(sol.hbar),
            fmt_f(*residual),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// `variant,y,v`: the periodic corrector per variant.
pub fn write_correctors(path: &Path, rows: &[&CellSolution]) -> Result<()> {
    let mut sorted: Vec<&&CellSolution> = rows.iter().collect();
    sorted.sort_by_key(|s| s.variant.tag());
    let mut w = open(path)?;
    w.write_record(["variant", "y", "v"]).map_err(csv_err)?;
    for sol in sorted {
        for i in 0..sol.corrector.n() {
            w.write_record([
                sol.variant.tag().to_string(),
                fmt_f(i as f64 * sol.corrector.h()),
                fmt_f(sol.corrector.node_value(i)),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// `variant,rho,lambda_rho,sweeps,final_change` per discount stage.
pub fn write_diagnostics(path: &Path, rows: &[&CellSolution]) -> Result<()> {
    let mut sorted: Vec<&&CellSolution> = rows.iter().collect();
    sorted.sort_by_key(|s| s.variant.tag());
    let mut w = open(path)?;
    w.write_record(["variant", "rho", "lambda_rho", "sweeps", "final_change"])
        .map_err(csv_err)?;
    for sol in sorted {
        for d in &sol.diagnostics {
            w.write_record([
                sol.variant.tag().to_string(),
                fmt_f(d.rho),
                fmt_f(d.lambda_rho),
                d.sweeps.to_string(),
                fmt_f(d.final_change),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// `variant,x,p,estimator,value,aux` rows from the ergodic oracles.
pub fn write_oracle(
    path: &Path,
    rows: &[(Variant, f64, f64, &'static str, f64, f64)],
) -> Result<()> {
    let mut sorted: Vec<_> = rows.to_vec();
    sorted.sort_by(|a, b| (a.0.tag(), a.3).cmp(&(b.0.tag(), b.3)));
    let mut w = open(path)?;
    w.write_record(["variant", "x", "p", "estimator", "value", "aux"])
        .map_err(csv_err)?;
    for (variant, x, p, estimator, value, aux) in sorted {
        w.write_record([
            variant.tag().to_string(),
            fmt_f(x),
            fmt_f(p),
            estimator.to_string(),
            fmt_f(value),
            fmt_f(aux),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// `variant,eps,x,u` for the rescaled value functions.
pub fn write_u_eps(path: &Path, rows: &[(Variant, f64, &PeriodicGrid, &ValueField)]) -> Result<()> {
    let mut sorted: Vec<_> = rows.iter().collect();
    sorted.sort_by(|a, b| (a.0.tag(), a.1).partial_cmp(&(b.0.tag(), b.1)).unwrap());
    let mut w = open(path)?;
    w.write_record(["variant", "eps", "x", "u"])
        .map_err(csv_err)?;
    for (variant, eps, grid, field) in sorted {
        for i in 0..grid.n() {
            w.write_record([
                variant.tag().to_string(),
                fmt_f(*eps),
                fmt_f(grid.node(i)),
                fmt_f(field.node_value(i)),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// `variant,x,u` for the homogenized fields.
pub fn write_u_effective(
    path: &Path,
    rows: &[(Variant, &PeriodicGrid, &ValueField)],
) -> Result<()> {
    let mut sorted: Vec<_> = rows.iter().collect();
    sorted.sort_by_key(|r| r.0.tag());
    let mut w = open(path)?;
    w.write_record(["variant", "x", "u"]).map_err(csv_err)?;
    for (variant, grid, field) in sorted {
        for i in 0..grid.n() {
            w.write_record([
                variant.tag().to_string(),
                fmt_f(grid.node(i)),
                fmt_f(field.node_value(i)),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// `check,status,detail` in suite order.
pub fn write_checks(path: &Path, checks: &[Check]) -> Result<()> {
    let mut w = open(path)?;
    w.write_record(["check", "status", "detail"])
        .map_err(csv_err)?;
    for c in checks {
        w.write_record([
            c.id.to_string(),
            c.status.tag().to_string(),
            c.detail.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}
