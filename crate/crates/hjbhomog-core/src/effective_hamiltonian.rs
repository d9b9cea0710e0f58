//! Tables of the effective Hamiltonian over momenta and slow positions, and
//! the structural checks they must satisfy.

use rayon::prelude::*;

use crate::cell_solver::{extract_ergodic, PeriodicGrid, SolverParams};
use crate::control_model::{ControlProblem, ProblemBounds, Variant};
use crate::ergodic_oracle::{crossing_estimate, long_time_average};
use crate::error::{Error, Result};

/// How a table entry is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Vanishing-discount extrapolation of cell problems.
    Discount,
    /// Long-time average of the finite-horizon value.
    Horizon,
    /// One-period traversal (displacement form), falling back to the
    /// confined estimate where crossing does not pay.
    Crossing,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Discount => "discount",
            Method::Horizon => "horizon",
            Method::Crossing => "crossing",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "discount" => Ok(Method::Discount),
            "horizon" => Ok(Method::Horizon),
            "crossing" => Ok(Method::Crossing),
            other => Err(Error::Invalid {
                what: "method",
                why: format!("unknown method '{other}' (discount | horizon | crossing)"),
            }),
        }
    }
}

/// Provenance of a table: grid step, schedule or horizon, control
/// resolutions, and the dynamics bound used by downstream solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct TableMeta {
    pub h: f64,
    pub rho_schedule: Vec<f64>,
    pub horizon_t: f64,
    pub control_samples: usize,
    pub mu_samples: usize,
    pub m_b: f64,
}

/// Effective Hamiltonian sampled on an `x_samples` x `p_samples` grid,
/// stored row-major with `x` as the slow index.
#[derive(Clone, Debug)]
pub struct HBarTable {
    pub variant: Variant,
    pub x_samples: Vec<f64>,
    pub p_samples: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
    pub meta: TableMeta,
}

impl HBarTable {
    pub fn value(&self, xi: usize, pi: usize) -> f64 {
        self.values[xi * self.p_samples.len() + pi]
    }

    /// Bilinear lookup: constant extension in `x` outside the sampled range
    /// (exact for the single-sample tables of slow-invariant problems),
    /// linear in `p`, erroring when `p` leaves the tabulated range.
    pub fn interp(&self, x: f64, p: f64) -> Result<f64> {
        let ps = &self.p_samples;
        let lo = ps[0];
        let hi = *ps.last().unwrap();
        if p < lo - 1e-12 || p > hi + 1e-12 {
            return Err(Error::PGridExceeded { slope: p, lo, hi });
        }
        let row = |xi: usize| -> f64 {
            let p = p.clamp(lo, hi);
            let k = ps.partition_point(|q| *q <= p).min(ps.len() - 1).max(1) - 1;
            let t = (p - ps[k]) / (ps[k + 1] - ps[k]);
            self.value(xi, k) + t * (self.value(xi, k + 1) - self.value(xi, k))
        };
        let xs = &self.x_samples;
        if xs.len() == 1 || x <= xs[0] {
            return Ok(row(0));
        }
        if x >= *xs.last().unwrap() {
            return Ok(row(xs.len() - 1));
        }
        let k = xs.partition_point(|q| *q <= x) - 1;
        let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
        Ok(row(k) + t * (row(k + 1) - row(k)))
    }

    /// Largest absolute slope of the table in `p` (used to size the
    /// artificial viscosity of the effective equation solver).
    pub fn max_p_slope(&self) -> f64 {
        let mut m = 0.0f64;
        for xi in 0..self.x_samples.len() {
            for pi in 1..self.p_samples.len() {
                let dp = self.p_samples[pi] - self.p_samples[pi - 1];
                m = m.max((self.value(xi, pi) - self.value(xi, pi - 1)).abs() / dp);
            }
        }
        m
    }
}

/// The default momentum grid: `[-6, 6]` in steps of `0.25`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=48).map(|k| -6.0 + 0.25 * k as f64).collect()
}

/// Additive slack of the structural checks.
pub const DEFAULT_SLACK: f64 = 0.05;

/// Tabulate the effective Hamiltonian. Entries are independent and computed
/// in parallel; the result is deterministic because each entry's solve is
/// sequential and entries are written by index.
#[allow(clippy::too_many_arguments)]
pub fn tabulate(
    problem: &ControlProblem,
    grid: &PeriodicGrid,
    x_samples: &[f64],
    p_samples: &[f64],
    variant: Variant,
    method: Method,
    solver: &SolverParams,
    horizon_t: f64,
) -> Result<HBarTable> {
    if x_samples.is_empty() || p_samples.is_empty() {
        return Err(Error::Invalid {
            what: "table axes",
            why: "x and p sample sets must be nonempty".into(),
        });
    }
    for w in p_samples.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Invalid {
                what: "table axes",
                why: "p samples must be strictly increasing".into(),
            });
        }
    }
    solver.validate()?;
    let np = p_samples.len();
    let values: Vec<f64> = (0..x_samples.len() * np)
        .into_par_iter()
        .map(|idx| -> Result<f64> {
            let x = x_samples[idx / np];
            let p = p_samples[idx % np];
            match method {
                Method::Discount => Ok(extract_ergodic(problem, grid, x, p, variant, solver)?.hbar),
                Method::Horizon => {
                    Ok(long_time_average(problem, grid, x, p, horizon_t, variant)?.hbar)
                }
                Method::Crossing => Ok(crossing_estimate(problem, grid, x, p, horizon_t)?.hbar),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(HBarTable {
        variant,
        x_samples: x_samples.to_vec(),
        p_samples: p_samples.to_vec(),
        values,
        method,
        meta: TableMeta {
            h: grid.h(),
            rho_schedule: solver.rho_schedule.clone(),
            horizon_t,
            control_samples: problem.controls[0].resolution(),
            mu_samples: problem.mu_samples,
            m_b: problem.bounds.m_b,
        },
    })
}

/// Worst margin of a pointwise table check and where it happens.
#[derive(Clone, Copy, Debug)]
pub struct CheckReport {
    pub ok: bool,
    /// Most violating signed margin (negative means violated by that much).
    pub worst: f64,
    pub at_x: f64,
    pub at_p: f64,
}

/// Coercivity from normal controllability: every entry must satisfy
/// `hbar >= -M_l + delta |p| - slack`.
pub fn verify_coercivity(table: &HBarTable, bounds: &ProblemBounds, slack: f64) -> CheckReport {
    let mut report = CheckReport {
        ok: true,
        worst: f64::INFINITY,
        at_x: table.x_samples[0],
        at_p: table.p_samples[0],
    };
    for (xi, &x) in table.x_samples.iter().enumerate() {
        for (pi, &p) in table.p_samples.iter().enumerate() {
            let margin = table.value(xi, pi) - (-bounds.m_l + bounds.delta * p.abs() - slack);
            if margin < report.worst {
                report.worst = margin;
                report.at_x = x;
                report.at_p = p;
            }
        }
    }
    report.ok = report.worst >= 0.0;
    report
}

/// Lipschitz bound in the momentum: `|hbar(x, p) - hbar(x, q)| <= M_b |p - q|
/// + slack` for every sampled pair.
pub fn verify_lipschitz_p(table: &HBarTable, bounds: &ProblemBounds, slack: f64) -> CheckReport {
    let mut report = CheckReport {
        ok: true,
        worst: f64::INFINITY,
        at_x: table.x_samples[0],
        at_p: table.p_samples[0],
    };
    for (xi, &x) in table.x_samples.iter().enumerate() {
        for pi in 0..table.p_samples.len() {
            for qi in pi + 1..table.p_samples.len() {
                let p = table.p_samples[pi];
                let q = table.p_samples[qi];
                let diff = (table.value(xi, pi) - table.value(xi, qi)).abs();
                let margin = bounds.m_b * (q - p) + slack - diff;
                if margin < report.worst {
                    report.worst = margin;
                    report.at_x = x;
                    report.at_p = q;
                }
            }
        }
    }
    report.ok = report.worst >= 0.0;
    report
}

/// Ordering of the two strategy classes: restricting to regular controls can
/// only raise costs, so `hbar_plus <= hbar_minus + slack` entrywise. Returns
/// the largest gap `hbar_minus - hbar_plus` and its location as well.
#[derive(Clone, Copy, Debug)]
pub struct OrderReport {
    pub ok: bool,
    /// Most violating signed margin of `minus + slack - plus`.
    pub worst: f64,
    /// Largest `minus - plus` over the table.
    pub max_gap: f64,
    pub max_gap_x: f64,
    pub max_gap_p: f64,
}

pub fn verify_variant_order(
    minus: &HBarTable,
    plus: &HBarTable,
    slack: f64,
) -> Result<OrderReport> {
    if minus.x_samples != plus.x_samples || minus.p_samples != plus.p_samples {
        return Err(Error::GridMismatch {
            why: "variant tables sample different (x, p) grids".into(),
        });
    }
    let mut report = OrderReport {
        ok: true,
        worst: f64::INFINITY,
        max_gap: f64::NEG_INFINITY,
        max_gap_x: minus.x_samples[0],
        max_gap_p: minus.p_samples[0],
    };
    for (xi, &x) in minus.x_samples.iter().enumerate() {
        for (pi, &p) in minus.p_samples.iter().enumerate() {
            let m = minus.value(xi, pi);
            let pl = plus.value(xi, pi);
            report.worst = report.worst.min(m + slack - pl);
            let gap = m - pl;
            if gap > report.max_gap {
                report.max_gap = gap;
                report.max_gap_x = x;
                report.max_gap_p = p;
            }
        }
    }
    report.ok = report.worst >= 0.0;
    Ok(report)
}
