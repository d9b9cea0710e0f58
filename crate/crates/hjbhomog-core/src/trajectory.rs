//! Explicit controlled trajectories of the rescaled problem.
//!
//! States move in the slow variable `x`; the environment oscillates on the
//! fast variable `x / eps`. The integrator is an explicit Euler scheme with
//! event handling at the scaled interface points: steps are split at control
//! breakpoints and at interface crossings (located by bisection and snapped),
//! and a blended control whose normal velocity vanishes holds the state on
//! the interface.

use crate::control_model::{ControlProblem, MixedControl, Region, Side, Variant, TANGENTIAL_TOL};
use crate::error::{Error, Result};

/// Velocity threshold below which an interface state holds still.
pub const HOLD_TOL: f64 = 1e-9;

/// Control applied on one time segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentControl {
    /// One-sided control; in the opposite region the occupied region's field
    /// is applied to the same control value (indicator semantics).
    Side { side: Side, alpha: f64 },
    /// Blended interface control.
    Mixed(MixedControl),
}

/// Piecewise-constant control signal on `[0, total_time]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSignal {
    breakpoints: Vec<f64>,
    segments: Vec<SegmentControl>,
}

impl ControlSignal {
    /// `breakpoints` must start at 0, increase strictly, and delimit exactly
    /// `segments.len()` pieces.
    pub fn new(breakpoints: Vec<f64>, segments: Vec<SegmentControl>) -> Result<Self> {
        if breakpoints.len() != segments.len() + 1 {
            return Err(Error::Invalid {
                what: "control signal",
                why: format!(
                    "{} breakpoints for {} segments",
                    breakpoints.len(),
                    segments.len()
                ),
            });
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::Invalid {
                what: "control signal",
                why: "first breakpoint must be 0".into(),
            });
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Invalid {
                    what: "control signal",
                    why: "breakpoints must increase strictly".into(),
                });
            }
        }
        Ok(ControlSignal {
            breakpoints,
            segments,
        })
    }

    /// Single control over `[0, t_end]`.
    pub fn constant(ctl: SegmentControl, t_end: f64) -> Result<Self> {
        ControlSignal::new(vec![0.0, t_end], vec![ctl])
    }

    pub fn total_time(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn at(&self, t: f64) -> SegmentControl {
        let k = self.breakpoints.partition_point(|b| *b <= t);
        self.segments[k.saturating_sub(1).min(self.segments.len() - 1)]
    }

    /// First breakpoint strictly after `t`, if any.
    fn next_breakpoint(&self, t: f64) -> Option<f64> {
        let k = self.breakpoints.partition_point(|b| *b <= t + 1e-15);
        self.breakpoints.get(k).copied()
    }
}

/// One recorded instant of an integrated trajectory. `rate` is the running
/// cost applied on the step starting here.
#[derive(Clone, Copy, Debug)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub region: Region,
    pub rate: f64,
    pub applied: SegmentControl,
    /// Normal component `b . n1` of the applied velocity at interface
    /// samples.
    pub normal_velocity: Option<f64>,
    /// Discounted cost accumulated up to `t` at the problem's own rate.
    pub cost_accum: f64,
}

/// Maximal positive-duration run of interface samples.
#[derive(Clone, Copy, Debug)]
pub struct InterfaceSegment {
    pub first: usize,
    pub last: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// True when every control applied during the segment keeps
    /// `b_i . n_i >= -tol` on both sides.
    pub regular: bool,
    pub max_abs_normal_velocity: f64,
}

/// Integrated trajectory with per-sample records and interface segments.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub eps: f64,
    pub samples: Vec<Sample>,
    pub interface_segments: Vec<InterfaceSegment>,
}

impl Trajectory {
    pub fn final_state(&self) -> f64 {
        self.samples.last().unwrap().x
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().unwrap().t
    }
}

/// Discounted cost of a trajectory and the tail bound beyond its horizon.
#[derive(Clone, Copy, Debug)]
pub struct CostEstimate {
    /// Trapezoidal integral of `exp(-lambda t) rate(t)` over the samples.
    pub value: f64,
    /// `M_l exp(-lambda T) / lambda`: everything after the horizon.
    pub tail_bound: f64,
    /// `value + tail_bound`.
    pub upper: f64,
}

fn scaled_classify(problem: &ControlProblem, eps: f64, x: f64) -> Region {
    problem.partition.classify_point(x / eps)
}

/// Velocity, cost rate, and bookkeeping of the control applied at one state.
fn effective_motion(
    problem: &ControlProblem,
    eps: f64,
    x: f64,
    ctl: SegmentControl,
) -> Result<(f64, f64, Option<f64>)> {
    let y = x / eps;
    match scaled_classify(problem, eps, x) {
        Region::Interface => {
            let n1 = problem.partition.interface_normal(y)?;
            match ctl {
                SegmentControl::Mixed(a) => {
                    let (bh, lh) = problem.mixed_dynamics_cost(x, y, a);
                    let normal = bh * n1;
                    if normal.abs() <= HOLD_TOL {
                        Ok((0.0, lh, Some(normal)))
                    } else {
                        Ok((bh, lh, Some(normal)))
                    }
                }
                SegmentControl::Side { side, alpha } => {
                    let b = problem.b(side, x, y, alpha);
                    let l = problem.l(side, x, y, alpha);
                    if b.abs() <= HOLD_TOL {
                        Ok((0.0, l, Some(b * n1)))
                    } else {
                        Ok((b, l, Some(b * n1)))
                    }
                }
            }
        }
        region => {
            let side = region.side().unwrap();
            let alpha = match ctl {
                SegmentControl::Side { alpha, .. } => alpha,
                SegmentControl::Mixed(a) => match side {
                    Side::One => a.alpha1,
                    Side::Two => a.alpha2,
                },
            };
            Ok((
                problem.b(side, x, y, alpha),
                problem.l(side, x, y, alpha),
                None,
            ))
        }
    }
}

/// Earliest scaled interface point crossed by the linear motion
/// `s -> x + b s`, `s in (0, dt]`. Returns `(s, interface coordinate)`.
fn first_crossing(
    problem: &ControlProblem,
    eps: f64,
    x: f64,
    b: f64,
    dt: f64,
) -> Option<(f64, f64)> {
    if b == 0.0 {
        return None;
    }
    let period = eps * problem.partition.period();
    let x_end = x + b * dt;
    let snap = 1e-12 * period;
    let mut best: Option<(f64, f64)> = None;
    for &c in problem.partition.interface_points() {
        let base = eps * c;
        let k = ((x - base) / period).round();
        for shift in [-1.0, 0.0, 1.0] {
            let ci = base + (k + shift) * period;
            if (ci - x).abs() <= snap {
                continue;
            }
            let inside = (x - ci) * (x_end - ci) < 0.0 || (x_end - ci).abs() <= snap;
            if !inside {
                continue;
            }
            // Bisection on the signed distance, then snap onto the point.
            let (mut s_lo, mut s_hi) = (0.0f64, dt);
            for _ in 0..200 {
                if s_hi - s_lo <= 1e-12 {
                    break;
                }
                let s = 0.5 * (s_lo + s_hi);
                if ((x + b * s) - ci) * ((x) - ci) > 0.0 {
                    s_lo = s;
                } else {
                    s_hi = s;
                }
            }
            let s = s_hi;
            if best.map_or(true, |(bs, _)| s < bs) {
                best = Some((s, ci));
            }
        }
    }
    best
}

/// Integrate the rescaled problem under a control signal.
///
/// Explicit Euler with steps split at control breakpoints and interface
/// crossings; the step must resolve the fast scale
/// (`dt M_b <= eps g / 2` with `g` the smallest interface gap). A control
/// declared for one region but applied in another is resolved by the region
/// actually occupied. States on an interface hold still when the applied
/// normal velocity is below [`HOLD_TOL`].
pub fn integrate(
    problem: &ControlProblem,
    eps: f64,
    x0: f64,
    signal: &ControlSignal,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Invalid {
            what: "eps",
            why: format!("must be positive, got {eps}"),
        });
    }
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(Error::Invalid {
            what: "integration window",
            why: format!("need positive t_end and dt, got {t_end}, {dt}"),
        });
    }
    let gap = eps * problem.partition.min_interface_gap();
    if dt * problem.bounds.m_b > gap / 2.0 {
        return Err(Error::Precondition {
            op: "integrate",
            why: format!(
                "dt M_b = {} does not resolve the fast scale (limit {})",
                dt * problem.bounds.m_b,
                gap / 2.0
            ),
        });
    }
    if signal.total_time() < t_end - 1e-12 {
        return Err(Error::Invalid {
            what: "control signal",
            why: format!(
                "signal ends at {} before t_end = {t_end}",
                signal.total_time()
            ),
        });
    }

    let lambda = problem.lambda;
    let mut t = 0.0f64;
    let mut x = x0;
    let mut cost_accum = 0.0f64;
    let mut samples: Vec<Sample> = Vec::new();

    let push = |samples: &mut Vec<Sample>, t: f64, x: f64, rate, applied, nv, cost| {
        samples.push(Sample {
            t,
            x,
            region: scaled_classify(problem, eps, x),
            rate,
            applied,
            normal_velocity: nv,
            cost_accum: cost,
        });
    };

    loop {
        let ctl = signal.at(t);
        let (b, rate, nv) = effective_motion(problem, eps, x, ctl)?;
        if samples.is_empty() {
            push(&mut samples, t, x, rate, ctl, nv, cost_accum);
        }

        // Remainders far below the step size are accumulated rounding of
        // `t`, not real motion; integrating them would smear a duplicate
        // sample over an event instant. Skip to the next event instead.
        let dust = 1e-9 * dt;
        if t >= t_end - dust {
            break;
        }
        let mut step = (t_end - t).min(dt);
        if let Some(bp) = signal.next_breakpoint(t) {
            let to_bp = bp - t;
            if to_bp <= dust {
                t = bp;
                continue;
            }
            step = step.min(to_bp);
        }

        let (advance, x_new) = match first_crossing(problem, eps, x, b, step) {
            Some((s, ci)) => (s, ci),
            None => (step, x + b * step),
        };

        let t_new = t + advance;
        // Trapezoid piece of the discounted cost at the problem's own rate;
        // the applied rate is constant on the substep.
        cost_accum += rate * 0.5 * ((-lambda * t).exp() + (-lambda * t_new).exp()) * advance;
        t = t_new;
        x = x_new;
        let ctl_next = signal.at(t);
        let (_, rate_next, nv_next) = effective_motion(problem, eps, x, ctl_next)?;
        push(&mut samples, t, x, rate_next, ctl_next, nv_next, cost_accum);

        if t >= t_end - dust {
            break;
        }
    }

    let interface_segments = segment_scan(problem, eps, &samples)?;
    Ok(Trajectory {
        eps,
        samples,
        interface_segments,
    })
}

fn segment_scan(
    problem: &ControlProblem,
    eps: f64,
    samples: &[Sample],
) -> Result<Vec<InterfaceSegment>> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while k < samples.len() {
        if samples[k].region != Region::Interface {
            k += 1;
            continue;
        }
        let mut m = k;
        while m + 1 < samples.len() && samples[m + 1].region == Region::Interface {
            m += 1;
        }
        let duration = samples[m].t - samples[k].t;
        if duration > 0.0 {
            let mut regular = true;
            let mut max_nv = 0.0f64;
            for s in &samples[k..=m] {
                if let Some(nv) = s.normal_velocity {
                    max_nv = max_nv.max(nv.abs());
                }
            }
            // Regularity depends on the controls applied while the state
            // stays on the interface, i.e. on [t_k, t_m).
            for s in &samples[k..m] {
                let y = s.x / eps;
                let n1 = problem.partition.interface_normal(y)?;
                let ok = match s.applied {
                    SegmentControl::Mixed(a) => {
                        let b1 = problem.b(Side::One, s.x, y, a.alpha1);
                        let b2 = problem.b(Side::Two, s.x, y, a.alpha2);
                        b1 * n1 >= -TANGENTIAL_TOL && b2 * (-n1) >= -TANGENTIAL_TOL
                    }
                    SegmentControl::Side { side, alpha } => {
                        let b = problem.b(side, s.x, y, alpha);
                        let n_i = if side == Side::One { n1 } else { -n1 };
                        b * n_i >= -TANGENTIAL_TOL
                    }
                };
                if !ok {
                    regular = false;
                }
            }
            out.push(InterfaceSegment {
                first: k,
                last: m,
                t_start: samples[k].t,
                t_end: samples[m].t,
                regular,
                max_abs_normal_velocity: max_nv,
            });
        }
        k = m + 1;
    }
    Ok(out)
}

/// Recompute the interface segments and their regularity flags.
pub fn classify_regularity(
    problem: &ControlProblem,
    traj: &Trajectory,
) -> Result<Vec<InterfaceSegment>> {
    segment_scan(problem, traj.eps, &traj.samples)
}

/// Discounted cost of a trajectory at rate `lambda` (trapezoidal rule on the
/// sample grid) with the tail bound `M_l exp(-lambda T) / lambda` reported
/// for the upper estimate.
pub fn discounted_cost(
    problem: &ControlProblem,
    traj: &Trajectory,
    lambda: f64,
    eps: f64,
) -> Result<CostEstimate> {
    if (traj.eps - eps).abs() > 1e-15 {
        return Err(Error::GridMismatch {
            why: format!("trajectory was integrated at eps = {}, not {eps}", traj.eps),
        });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Invalid {
            what: "lambda",
            why: format!("must be positive, got {lambda}"),
        });
    }
    let mut value = 0.0f64;
    for w in traj.samples.windows(2) {
        let f0 = (-lambda * w[0].t).exp() * w[0].rate;
        let f1 = (-lambda * w[1].t).exp() * w[1].rate;
        value += 0.5 * (f0 + f1) * (w[1].t - w[0].t);
    }
    let t_final = traj.duration();
    let tail_bound = problem.bounds.m_l * (-lambda * t_final).exp() / lambda;
    Ok(CostEstimate {
        value,
        tail_bound,
        upper: value + tail_bound,
    })
}

/// Named example signals used by the command-line tool and the checks.
pub fn named_signal(
    problem: &ControlProblem,
    name: &str,
    t_end: f64,
) -> Result<(ControlSignal, Variant)> {
    match name {
        // Opposed unit pushes: zero blended velocity, each side pointing
        // into its own region.
        "singular_stay" => Ok((
            ControlSignal::constant(
                SegmentControl::Mixed(MixedControl::new(1.0, -1.0, 0.5)?),
                t_end,
            )?,
            Variant::Minus,
        )),
        // Zero velocities on both sides: tangential and regular.
        "regular_stay" => Ok((
            ControlSignal::constant(
                SegmentControl::Mixed(MixedControl::new(0.0, 0.0, 0.5)?),
                t_end,
            )?,
            Variant::Plus,
        )),
        // Constant push to the right across the structure.
        "crossing" => Ok((
            ControlSignal::constant(
                SegmentControl::Side {
                    side: Side::One,
                    alpha: problem.controls[0].max(),
                },
                t_end,
            )?,
            Variant::Minus,
        )),
        other => Err(Error::Invalid {
            what: "trajectory signal",
            why: format!("unknown signal '{other}' (singular_stay | regular_stay | crossing)"),
        }),
    }
}
