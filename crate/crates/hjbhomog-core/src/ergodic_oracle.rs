//! Finite-horizon dynamic programming as an independent route to the ergodic
//! constants.
//!
//! The discounted cell solver and this module approximate the same limits
//! from different directions: here the augmented cost is accumulated over a
//! long undiscounted horizon and divided by time, or concentrated on a single
//! period traversal. Agreement between the two is one of the structural
//! checks of the crate.

use crate::cell_solver::{build_sweep_options, lower_hull, PeriodicGrid, ValueField};
use crate::control_model::{ControlProblem, Region, Side, Variant};
use crate::error::{Error, Result};

/// Backward-in-time value surface `W(y, T)` of the finite-horizon problem.
#[derive(Clone, Debug)]
pub struct HorizonField {
    pub variant: Variant,
    pub x: f64,
    pub p: f64,
    /// Effective horizon actually integrated (`steps * h_t`).
    pub t: f64,
    pub steps: usize,
    pub values: ValueField,
}

/// Finite-horizon value: `W(y, t) = min over strategies of the integrated
/// augmented cost plus the terminal value at the endpoint`. Computed by
/// backward dynamic programming with the same option tables as the discounted
/// solver, substep `h_t = h / M_b`, exact step weight `h_t`.
pub fn finite_horizon_field(
    problem: &ControlProblem,
    grid: &PeriodicGrid,
    x: f64,
    p: f64,
    t: f64,
    terminal: Option<&ValueField>,
    variant: Variant,
) -> Result<HorizonField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Invalid {
            what: "horizon",
            why: format!("must be nonnegative, got {t}"),
        });
    }
    if let Some(f) = terminal {
        if f.n() != grid.n() || (f.period() - grid.period()).abs() > 1e-12 {
            return Err(Error::GridMismatch {
                why: "terminal field does not live on the given grid".into(),
            });
        }
    }
    let opts = build_sweep_options(problem, grid, |i| (x, grid.node(i)), p, variant)?;
    let steps = (t / opts.h_t).round() as usize;
    let zero = vec![0.0; grid.n()];
    let start = terminal.map_or(zero.as_slice(), |f| f.values());
    let values = opts.horizon_dp(steps, start, 0.0);
    Ok(HorizonField {
        variant,
        x,
        p,
        t: steps as f64 * opts.h_t,
        steps,
        values: ValueField::new(grid, values)?,
    })
}

/// Long-time-average estimate of the ergodic constant.
#[derive(Clone, Copy, Debug)]
pub struct LongTimeAverage {
    /// `-min over start nodes of W(y, T) / T`.
    pub hbar: f64,
    /// Same estimate at half the horizon.
    pub half_horizon_hbar: f64,
    /// Set when the two estimates differ by more than 0.2: the horizon is too
    /// short for the average to have settled.
    pub horizon_warning: bool,
}

/// Estimate the ergodic constant from a zero-terminal horizon run. Requires
/// `t >= 10 period / delta` so every point can reach every other many times
/// over.
pub fn long_time_average(
    problem: &ControlProblem,
    grid: &PeriodicGrid,
    x: f64,
    p: f64,
    t: f64,
    variant: Variant,
) -> Result<LongTimeAverage> {
    let needed = 10.0 * problem.partition.period() / problem.bounds.delta;
    if !(t >= needed) {
        return Err(Error::Precondition {
            op: "long_time_average",
            why: format!("horizon {t} below 10 period / delta = {needed}"),
        });
    }
    let opts = build_sweep_options(problem, grid, |i| (x, grid.node(i)), p, variant)?;
    let steps = (t / opts.h_t).round() as usize;
    let half = steps / 2;
    let zero = vec![0.0; grid.n()];
    let w_half = opts.horizon_dp(half, &zero, 0.0);
    let w_full = opts.horizon_dp(steps - half, &w_half, 0.0);
    let est = |w: &[f64], k: usize| -> f64 {
        let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
        -min / (k as f64 * opts.h_t)
    };
    let hbar = est(&w_full, steps);
    let half_hbar = est(&w_half, half);
    Ok(LongTimeAverage {
        hbar,
        half_horizon_hbar: half_hbar,
        horizon_warning: (hbar - half_hbar).abs() > 0.2,
    })
}

/// Result of the one-period traversal estimate.
#[derive(Clone, Copy, Debug)]
pub struct CrossingEstimate {
    /// Best of the traversal and confined estimates.
    pub hbar: f64,
    /// Optimal traversal time when crossing wins.
    pub t_opt: Option<f64>,
    /// True when traversing a period strictly beats staying confined.
    pub crossing: bool,
    /// The confined (stationary) alternative `-min stay-or-hover rate`.
    pub stationary: f64,
}

/// Displacement-form estimate of the ergodic constant in one dimension.
///
/// A traversal of one period against the momentum direction harvests
/// `period |p|` while paying the plain running cost of the trip; the estimate
/// maximizes `(period |p| - cost(t)) / t` over the time grid, where `cost` is
/// computed by backward dynamic programming on a non-periodic extension of
/// the grid with a terminal indicator at the displaced copy of the start
/// node. Interface stay options are admitted with all-strategy semantics (the
/// traversal estimate is variant-independent because crossing options are).
/// The confined alternative is the best stationary rate: the cheapest
/// interface stay or interior two-point hover cycle. When the traversal does
/// not strictly beat staying put, `crossing` is false and the stationary
/// value is returned.
pub fn crossing_estimate(
    problem: &ControlProblem,
    grid: &PeriodicGrid,
    x: f64,
    p: f64,
    t_max: f64,
) -> Result<CrossingEstimate> {
    if problem.partition.dimension() != 1 {
        return Err(Error::Precondition {
            op: "crossing_estimate",
            why: "only defined in dimension 1".into(),
        });
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::Invalid {
            what: "t_max",
            why: format!("must be positive, got {t_max}"),
        });
    }
    let period = problem.partition.period();
    let h = grid.h();
    let h_t = h / problem.bounds.m_b;
    let direction = if p > 0.0 { -1.0 } else { 1.0 };
    let target = direction * period;

    // Non-periodic span with one period of margin on both sides.
    let lo = target.min(0.0) - period;
    let hi = target.max(0.0) + period;
    let j_lo = (lo / h).round() as i64;
    let j_hi = (hi / h).round() as i64;
    let m = (j_hi - j_lo + 1) as usize;
    let coord = |k: usize| (j_lo + k as i64) as f64 * h;
    let at = |j: i64| (j - j_lo) as usize;

    struct Entry {
        rate: f64,
        left: usize,
        frac: f64,
    }
    let mut starts = vec![0u32];
    let mut entries: Vec<Entry> = Vec::new();
    let mut stay = vec![f64::NAN; m];
    let mut group: Vec<(f64, f64)> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for k in 0..m {
        let y = coord(k);
        let mut raw: Vec<(f64, f64)> = Vec::new();
        match problem.partition.classify_point(y) {
            Region::Interface => {
                let n1 = problem.partition.interface_normal(y)?;
                for side in [Side::One, Side::Two] {
                    let n_i = if side == Side::One { n1 } else { -n1 };
                    for &a in problem.controls[side.index()].values() {
                        let b = problem.b(side, x, y, a);
                        if b * n_i <= 0.0 {
                            raw.push((b, problem.l(side, x, y, a)));
                        }
                    }
                }
                stay[k] = problem.stay_cost(x, y, Variant::Minus)?;
            }
            region => {
                let side = region.side().unwrap();
                for &a in problem.controls[side.index()].values() {
                    raw.push((problem.b(side, x, y, a), problem.l(side, x, y, a)));
                }
            }
        }
        // Group by foot cell, prune to the lower hull, drop feet outside the
        // span (the margin keeps them irrelevant to optimal traversals).
        let mut by_left: std::collections::BTreeMap<i64, Vec<(f64, f64)>> = Default::default();
        for (b, l) in raw {
            let pos = k as f64 + (h_t * b) / h;
            let left = pos.floor();
            by_left
                .entry(left as i64)
                .or_default()
                .push((pos - left, l));
        }
        for (left, pts) in by_left.iter_mut() {
            if *left < 0 || *left + 1 >= m as i64 {
                continue;
            }
            group.clone_from(pts);
            lower_hull(&mut group);
            for &(frac, rate) in &group {
                entries.push(Entry {
                    rate,
                    left: *left as usize,
                    frac,
                });
            }
        }
        starts.push(entries.len() as u32);
    }

    const BIG: f64 = 1e12;
    let mut w = vec![BIG; m];
    w[at((target / h).round() as i64)] = 0.0;
    let mut next = vec![0.0; m];
    let steps = (t_max / h_t).round() as usize;
    let harvest = period * p.abs();
    let mut best: Option<(f64, f64)> = None;
    let start_idx = at(0);
    for k in 1..=steps {
        for i in 0..m {
            let s = starts[i] as usize;
            let e = starts[i + 1] as usize;
            let mut acc = f64::INFINITY;
            for ent in &entries[s..e] {
                let interp = w[ent.left] + ent.frac * (w[ent.left + 1] - w[ent.left]);
                let val = h_t * ent.rate + interp;
                if val < acc {
                    acc = val;
                }
            }
            let st = stay[i];
            if !st.is_nan() {
                let val = h_t * st + w[i];
                if val < acc {
                    acc = val;
                }
            }
            next[i] = acc;
        }
        std::mem::swap(&mut w, &mut next);
        let cost = w[start_idx];
        if cost < BIG / 2.0 {
            let t = k as f64 * h_t;
            let est = (harvest - cost) / t;
            if best.map_or(true, |(b, _)| est > b) {
                best = Some((est, t));
            }
        }
    }

    let stationary = -confined_stationary_rate(problem, grid, x)?;
    match best {
        Some((est, t_opt)) if est > stationary + 1e-9 => Ok(CrossingEstimate {
            hbar: est,
            t_opt: Some(t_opt),
            crossing: true,
            stationary,
        }),
        _ => Ok(CrossingEstimate {
            hbar: stationary,
            t_opt: None,
            crossing: false,
            stationary,
        }),
    }
}

/// Cheapest plain-cost rate of staying put: interface stays (all-strategy
/// semantics) and, at interior nodes, zero-velocity controls or two-point
/// hover cycles alternating a forward and a backward control.
fn confined_stationary_rate(problem: &ControlProblem, grid: &PeriodicGrid, x: f64) -> Result<f64> {
    let ztol = 1e-9;
    let mut best = f64::INFINITY;
    for i in 0..grid.n() {
        let y = grid.node(i);
        if grid.is_interface(i) {
            best = best.min(problem.stay_cost(x, y, Variant::Minus)?);
            continue;
        }
        let side = match problem.partition.classify_point(y) {
            Region::Interface => continue,
            region => region.side().unwrap(),
        };
        let pairs: Vec<(f64, f64)> = problem.controls[side.index()]
            .values()
            .iter()
            .map(|&a| (problem.b(side, x, y, a), problem.l(side, x, y, a)))
            .collect();
        for &(b, l) in &pairs {
            if b.abs() <= ztol {
                best = best.min(l);
            }
        }
        for &(bf, lf) in pairs.iter().filter(|(b, _)| *b > ztol) {
            for &(bb, lb) in pairs.iter().filter(|(b, _)| *b < -ztol) {
                best = best.min((lf * bb.abs() + lb * bf) / (bf + bb.abs()));
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Precondition {
            op: "crossing_estimate",
            why: "no confined strategy exists on this grid".into(),
        })
    }
}
