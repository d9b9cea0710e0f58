//! One function per CLI command: build the configured experiment, run it,
//! print a short summary, and persist the CSV artifacts.

use std::path::Path;

use hjbhomog_core::cell_solver::{cell_residual, extract_ergodic, CellSolution, PeriodicGrid};
use hjbhomog_core::control_model::Variant;
use hjbhomog_core::effective_hamiltonian::tabulate;
use hjbhomog_core::ergodic_oracle::{crossing_estimate, long_time_average};
use hjbhomog_core::homogenized_solver::{
    convergence_study, macro_grid, solve_effective, solve_epsilon, EpsSolution,
    EFFECTIVE_MAX_ITERS, MACRO_PERIOD, MIN_NODES_PER_SCALED_PERIOD,
};
use hjbhomog_core::trajectory::{discounted_cost, integrate, named_signal};
use hjbhomog_core::Result;

use crate::acceptance;
use crate::config::RunConfig;
use crate::csv_out;

/// Tabulate the effective Hamiltonian over the configured momentum grid.
pub fn effective(cfg: &RunConfig, out: &Path) -> Result<()> {
    let problem = cfg.problem()?;
    let grid = PeriodicGrid::cell(&problem, cfg.cell_n)?;
    let solver = cfg.solver();
    let p_grid = cfg.p_grid();
    let mut tables = Vec::new();
    for variant in cfg.variant.list() {
        let table = tabulate(
            &problem,
            &grid,
            &[cfg.x],
            &p_grid,
            variant,
            cfg.method,
            &solver,
            cfg.horizon_t,
        )?;
        if cfg.p >= p_grid[0] && cfg.p <= *p_grid.last().unwrap() {
            println!(
                "{}: hbar({}, {}) = {:.6} [{}]",
                variant.tag(),
                cfg.x,
                cfg.p,
                table.interp(cfg.x, cfg.p)?,
                cfg.method.tag()
            );
        }
        tables.push(table);
    }
    let path = out.join("hbar_table.csv");
    csv_out::write_hbar_tables(&path, &tables)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Solve the cell problem at the configured (x, p) and persist corrector,
/// diagnostics, and summary.
pub fn cell(cfg: &RunConfig, out: &Path) -> Result<()> {
    let problem = cfg.problem()?;
    let grid = PeriodicGrid::cell(&problem, cfg.cell_n)?;
    let solver = cfg.solver();
    let mut solutions: Vec<(CellSolution, f64)> = Vec::new();
    for variant in cfg.variant.list() {
        let sol = extract_ergodic(&problem, &grid, cfg.x, cfg.p, variant, &solver)?;
        let residual = cell_residual(
            &problem,
            &grid,
            cfg.x,
            cfg.p,
            variant,
            &sol.corrector,
            sol.hbar,
        )?;
        println!(
            "{}: hbar({}, {}) = {:.6}, stationary residual {:.3e}",
            variant.tag(),
            cfg.x,
            cfg.p,
            sol.hbar,
            residual
        );
        solutions.push((sol, residual));
    }
    let summary: Vec<(&CellSolution, f64)> = solutions.iter().map(|(s, r)| (s, *r)).collect();
    let sols: Vec<&CellSolution> = solutions.iter().map(|(s, _)| s).collect();
    csv_out::write_cell_summary(&out.join("cell_summary.csv"), &summary)?;
    csv_out::write_correctors(&out.join("cell_corrector.csv"), &sols)?;
    csv_out::write_diagnostics(&out.join("cell_diagnostics.csv"), &sols)?;
    println!(
        "wrote {}, {}, {}",
        out.join("cell_summary.csv").display(),
        out.join("cell_corrector.csv").display(),
        out.join("cell_diagnostics.csv").display()
    );
    Ok(())
}

/// Independent ergodic estimates: long-time averages per variant plus the
/// crossing analysis of the unrestricted problem.
pub fn horizon(cfg: &RunConfig, out: &Path) -> Result<()> {
    let problem = cfg.problem()?;
    let grid = PeriodicGrid::cell(&problem, cfg.cell_n)?;
    let mut rows: Vec<(Variant, f64, f64, &'static str, f64, f64)> = Vec::new();
    for variant in cfg.variant.list() {
        let avg = long_time_average(&problem, &grid, cfg.x, cfg.p, cfg.horizon_t, variant)?;
        println!(
            "{}: horizon estimate {:.6} (half-horizon {:.6}{})",
            variant.tag(),
            avg.hbar,
            avg.half_horizon_hbar,
            if avg.horizon_warning {
                ", UNSETTLED"
            } else {
                ""
            }
        );
        rows.push((
            variant,
            cfg.x,
            cfg.p,
            "horizon",
            avg.hbar,
            avg.half_horizon_hbar,
        ));
    }
    // The crossing analysis bounds the unrestricted (minus) constant only.
    let cross = crossing_estimate(&problem, &grid, cfg.x, cfg.p, cfg.horizon_t)?;
    println!(
        "crossing estimate {:.6} ({})",
        cross.hbar,
        if cross.crossing {
            "crossing wins"
        } else {
            "confined wins"
        }
    );
    rows.push((
        Variant::Minus,
        cfg.x,
        cfg.p,
        "crossing",
        cross.hbar,
        cross.t_opt.unwrap_or(f64::NAN),
    ));
    rows.push((
        Variant::Minus,
        cfg.x,
        cfg.p,
        "stationary",
        cross.stationary,
        0.0,
    ));
    let path = out.join("oracle_estimates.csv");
    csv_out::write_oracle(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Integrate the configured named control signal and persist the samples.
pub fn trajectory(cfg: &RunConfig, out: &Path) -> Result<()> {
    let problem = cfg.problem()?;
    let (signal, variant) = named_signal(&problem, &cfg.traj_signal, cfg.traj_t)?;
    let traj = integrate(
        &problem,
        cfg.traj_eps,
        cfg.traj_x0,
        &signal,
        cfg.traj_t,
        cfg.traj_dt,
    )?;
    let cost = discounted_cost(&problem, &traj, cfg.lambda, cfg.traj_eps)?;
    println!(
        "{} [{}]: J = {:.6} (+tail <= {:.2e}), final state {:.6}, {} interface segment(s)",
        cfg.traj_signal,
        variant.tag(),
        cost.value,
        cost.tail_bound,
        traj.final_state(),
        traj.interface_segments.len()
    );
    let path = out.join("trajectory.csv");
    csv_out::write_trajectory(&path, &traj)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Grid sizes for one rescaled solve: at least
/// [`MIN_NODES_PER_SCALED_PERIOD`] nodes per scaled period.
fn adaptive_n(problem: &hjbhomog_core::ControlProblem, eps: f64, n_request: usize) -> usize {
    let copies = (MACRO_PERIOD / (eps * problem.partition.period())).round() as usize;
    n_request.max(MIN_NODES_PER_SCALED_PERIOD * copies)
}

/// Solve the rescaled problems on the configured eps list together with the
/// homogenized limit equation.
pub fn homogenize(cfg: &RunConfig, out: &Path) -> Result<()> {
    let problem = cfg.problem()?;
    let cell_grid = PeriodicGrid::cell(&problem, cfg.cell_n)?;
    let solver = cfg.solver();
    let reference = PeriodicGrid::with_interfaces(cfg.macro_n, MACRO_PERIOD, Vec::new())?;
    let mut eps_solutions: Vec<EpsSolution> = Vec::new();
    let mut effective_fields = Vec::new();
    for variant in cfg.variant.list() {
        let table = tabulate(
            &problem,
            &cell_grid,
            &[cfg.x],
            &cfg.p_grid(),
            variant,
            cfg.method,
            &solver,
            cfg.horizon_t,
        )?;
        let field = solve_effective(&table, cfg.lambda, &reference, EFFECTIVE_MAX_ITERS)?;
        println!(
            "{}: homogenized field range [{:.6}, {:.6}]",
            variant.tag(),
            field.values().iter().cloned().fold(f64::INFINITY, f64::min),
            field
                .values()
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
        );
        effective_fields.push((variant, field));
        for &eps in &cfg.eps_list {
            let grid = macro_grid(&problem, eps, adaptive_n(&problem, eps, cfg.macro_n))?;
            let sol = solve_epsilon(&problem, eps, &grid, variant, cfg.max_sweeps)?;
            println!(
                "{}: eps = {} solved on {} nodes in {} sweeps",
                variant.tag(),
                eps,
                grid.n(),
                sol.sweeps
            );
            eps_solutions.push(sol);
        }
    }
    let u_rows: Vec<_> = eps_solutions
        .iter()
        .map(|s| (s.variant, s.eps, &s.grid, &s.field))
        .collect();
    let e_rows: Vec<_> = effective_fields
        .iter()
        .map(|(v, f)| (*v, &reference, f))
        .collect();
    csv_out::write_u_eps(&out.join("u_eps.csv"), &u_rows)?;
    csv_out::write_u_effective(&out.join("u_effective.csv"), &e_rows)?;
    println!(
        "wrote {} and {}",
        out.join("u_eps.csv").display(),
        out.join("u_effective.csv").display()
    );
    Ok(())
}

/// Run the vanishing-eps convergence experiment per variant.
pub fn converge(cfg: &RunConfig, out: &Path) -> Result<()> {
    let problem = cfg.problem()?;
    let solver = cfg.solver();
    let mut reports = Vec::new();
    for variant in cfg.variant.list() {
        let report = convergence_study(
            &problem,
            &cfg.eps_list,
            cfg.macro_n,
            variant,
            &solver,
            cfg.horizon_t,
        )?;
        let errs: Vec<String> = report
            .sup_errors
            .iter()
            .map(|e| format!("{e:.6}"))
            .collect();
        println!(
            "{}: sup errors [{}], {}",
            variant.tag(),
            errs.join(", "),
            if report.monotone {
                "nonincreasing"
            } else {
                "NOT nonincreasing"
            }
        );
        reports.push(report);
    }
    let path = out.join("convergence.csv");
    csv_out::write_convergence(&path, &reports)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Run the full acceptance suite, print one line per check, and persist the
/// report. Returns true when no check failed.
pub fn verify(out: &Path) -> Result<bool> {
    let checks = acceptance::run_all()?;
    for c in &checks {
        println!("[{}] {}: {}", c.status.tag().to_uppercase(), c.id, c.detail);
    }
    let path = out.join("verify_report.csv");
    csv_out::write_checks(&path, &checks)?;
    println!("wrote {}", path.display());
    Ok(!checks
        .iter()
        .any(|c| c.status == crate::acceptance::Status::Fail))
}
