//! Control data for a periodic environment split into two alternating
//! domains by interface points.
//!
//! The fast axis carries a period `P` cut by an even number of interface
//! points into intervals that alternate between region 1 and region 2. Each
//! region has its own controlled dynamics `b_i(x, y, alpha)` and running cost
//! `l_i(x, y, alpha)`, sampled control sets, and global bounds. On an
//! interface the two sides may be blended: a [`MixedControl`] `(a1, a2, mu)`
//! produces `b_H = mu b_1 + (1-mu) b_2` and `l_H = mu l_1 + (1-mu) l_2`.
//! Blends with zero normal velocity are the tangential controls; the regular
//! ones among them are those whose one-sided velocities do not push away from
//! the interface on either side.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative tolerance (times the period) for snapping a coordinate onto an
/// interface point.
pub const SNAP_REL_TOL: f64 = 1e-12;

/// Normal-velocity tolerance under which a blended control counts as
/// tangential, and inside which regularity comparisons are slack.
pub const TANGENTIAL_TOL: f64 = 1e-9;

/// Default number of sampled control values per side.
pub const DEFAULT_CONTROL_SAMPLES: usize = 41;

/// Default number of sampled mixing weights; exact zero-velocity roots in mu
/// are added on top of the uniform grid.
pub const DEFAULT_MU_SAMPLES: usize = 21;

/// Which side of the partition a control or region index refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    pub fn label(self) -> u8 {
        match self {
            Side::One => 1,
            Side::Two => 2,
        }
    }
}

/// Classification of a point of the fast axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Omega1,
    Omega2,
    Interface,
}

impl Region {
    pub fn side(self) -> Option<Side> {
        match self {
            Region::Omega1 => Some(Side::One),
            Region::Omega2 => Some(Side::Two),
            Region::Interface => None,
        }
    }

    pub fn of(side: Side) -> Region {
        match side {
            Side::One => Region::Omega1,
            Side::Two => Region::Omega2,
        }
    }
}

/// Strategy class: `Minus` admits every tangential blend at the interface,
/// `Plus` only the regular ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Minus,
    Plus,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::Minus => "minus",
            Variant::Plus => "plus",
        }
    }
}

/// Periodic partition of the fast axis into alternating regions.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainPartition {
    dimension: usize,
    period: f64,
    interface_points: Vec<f64>,
    first_region: Side,
}

impl DomainPartition {
    /// `interface_points` must be strictly increasing, lie in `[0, period)`,
    /// and come in an even count (so regions alternate consistently across
    /// the periodic wrap). `first_region` labels the interval that starts at
    /// the first interface point.
    pub fn new(
        dimension: usize,
        period: f64,
        interface_points: Vec<f64>,
        first_region: Side,
    ) -> Result<Self> {
        if dimension != 1 {
            return Err(Error::Invalid {
                what: "partition dimension",
                why: format!("only dimension 1 is supported, got {dimension}"),
            });
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Invalid {
                what: "partition period",
                why: format!("period must be positive, got {period}"),
            });
        }
        if interface_points.len() < 2 || interface_points.len() % 2 != 0 {
            return Err(Error::Invalid {
                what: "interface points",
                why: format!(
                    "need an even count of at least 2, got {}",
                    interface_points.len()
                ),
            });
        }
        for w in interface_points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Invalid {
                    what: "interface points",
                    why: format!("not strictly increasing: {} then {}", w[0], w[1]),
                });
            }
        }
        let lo = interface_points[0];
        let hi = *interface_points.last().unwrap();
        if lo < 0.0 || hi >= period {
            return Err(Error::Invalid {
                what: "interface points",
                why: format!("must lie in [0, {period}), got range [{lo}, {hi}]"),
            });
        }
        Ok(DomainPartition {
            dimension,
            period,
            interface_points,
            first_region,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn interface_points(&self) -> &[f64] {
        &self.interface_points
    }

    pub fn first_region(&self) -> Side {
        self.first_region
    }

    /// Absolute snap tolerance used by [`Self::classify_point`].
    pub fn snap_tol(&self) -> f64 {
        SNAP_REL_TOL * self.period
    }

    /// Smallest gap between consecutive interface points (cyclically).
    pub fn min_interface_gap(&self) -> f64 {
        let pts = &self.interface_points;
        let mut gap = pts[0] + self.period - pts[pts.len() - 1];
        for w in pts.windows(2) {
            gap = gap.min(w[1] - w[0]);
        }
        gap
    }

    /// Index of the interface point that `y` snaps onto, if any.
    pub fn interface_index(&self, y: f64) -> Option<usize> {
        let p = self.period;
        let ym = y.rem_euclid(p);
        let tol = self.snap_tol();
        for (k, &c) in self.interface_points.iter().enumerate() {
            let d = (ym - c)
                .abs()
                .min((ym - c - p).abs())
                .min((ym - c + p).abs());
            if d <= tol {
                return Some(k);
            }
        }
        None
    }

    /// Region of the interval that starts at interface point `k`.
    fn interval_region(&self, k: usize) -> Side {
        if k % 2 == 0 {
            self.first_region
        } else {
            self.first_region.other()
        }
    }

    /// Classify a point of the fast axis as region 1, region 2, or interface.
    /// Total: coordinates within the snap tolerance of an interface point are
    /// classified as interface, everything else by its interval.
    pub fn classify_point(&self, y: f64) -> Region {
        if self.interface_index(y).is_some() {
            return Region::Interface;
        }
        let ym = y.rem_euclid(self.period);
        let idx = self.interface_points.partition_point(|c| *c <= ym);
        let j = if idx == 0 {
            self.interface_points.len() - 1
        } else {
            idx - 1
        };
        Region::of(self.interval_region(j))
    }

    /// Exterior normal of region 1 at an interface point: `-1` when region 1
    /// lies to the right of `y`, `+1` when it lies to the left.
    pub fn interface_normal(&self, y: f64) -> Result<f64> {
        let k = self
            .interface_index(y)
            .ok_or(Error::NotInterfacePoint { y })?;
        Ok(match self.interval_region(k) {
            Side::One => -1.0,
            Side::Two => 1.0,
        })
    }
}

/// Sampled, sorted control values of one side.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSample {
    values: Vec<f64>,
}

impl ControlSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid {
                what: "control sample",
                why: "no values".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid {
                what: "control sample",
                why: "non-finite value".into(),
            });
        }
        for w in values.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Invalid {
                    what: "control sample",
                    why: format!("values not strictly increasing: {} then {}", w[0], w[1]),
                });
            }
        }
        Ok(ControlSample { values })
    }

    /// Uniform sample of `count >= 2` values on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(lo < hi) {
            return Err(Error::Invalid {
                what: "control sample",
                why: format!("need count >= 2 and lo < hi, got count = {count}, [{lo}, {hi}]"),
            });
        }
        let step = (hi - lo) / (count - 1) as f64;
        let values = (0..count)
            .map(|k| {
                if k + 1 == count {
                    hi
                } else {
                    lo + step * k as f64
                }
            })
            .collect();
        ControlSample::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// True when `a` lies inside the sampled bounds (not necessarily on the
    /// lattice; blended and regularized controls may take any value here).
    pub fn contains(&self, a: f64) -> bool {
        a >= self.min() - 1e-12 && a <= self.max() + 1e-12
    }
}

/// Blended interface control: side controls `alpha1`, `alpha2` and a mixing
/// weight `mu` in `[0, 1]` applied to side 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedControl {
    pub alpha1: f64,
    pub alpha2: f64,
    pub mu: f64,
}

impl MixedControl {
    pub fn new(alpha1: f64, alpha2: f64, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) || !mu.is_finite() {
            return Err(Error::Invalid {
                what: "mixed control",
                why: format!("mu must be in [0, 1], got {mu}"),
            });
        }
        if !alpha1.is_finite() || !alpha2.is_finite() {
            return Err(Error::Invalid {
                what: "mixed control",
                why: "non-finite side control".into(),
            });
        }
        Ok(MixedControl { alpha1, alpha2, mu })
    }
}

/// Global bounds and moduli of the model data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemBounds {
    /// Sup norm of both dynamics.
    pub m_b: f64,
    /// Sup norm of both running costs.
    pub m_l: f64,
    /// Normal controllability margin at interfaces.
    pub delta: f64,
    /// Lipschitz constant of the dynamics in the fast variable.
    pub lip_b_y: f64,
    /// Lipschitz constant of the costs in the fast variable.
    pub lip_l_y: f64,
}

impl ProblemBounds {
    pub fn new(m_b: f64, m_l: f64, delta: f64, lip_b_y: f64, lip_l_y: f64) -> Result<Self> {
        let pos = |what: &'static str, v: f64| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid {
                    what,
                    why: format!("must be positive, got {v}"),
                });
            }
            Ok(())
        };
        pos("M_b", m_b)?;
        pos("M_l", m_l)?;
        pos("delta", delta)?;
        if delta > m_b {
            return Err(Error::Invalid {
                what: "delta",
                why: format!("controllability margin {delta} exceeds M_b = {m_b}"),
            });
        }
        for (what, v) in [("lip_b_y", lip_b_y), ("lip_l_y", lip_l_y)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Invalid {
                    what: "Lipschitz bound",
                    why: format!("{what} must be nonnegative, got {v}"),
                });
            }
        }
        Ok(ProblemBounds {
            m_b,
            m_l,
            delta,
            lip_b_y,
            lip_l_y,
        })
    }
}

/// Evaluator of a per-side field `(side, x, y, alpha) -> value`. `x` is the
/// frozen slow variable, `y` the fast one.
pub type FieldEval = Arc<dyn Fn(Side, f64, f64, f64) -> f64 + Send + Sync>;

/// Full problem data: partition, per-side dynamics and cost, sampled control
/// sets, bounds, and the discount rate of the rescaled problem.
#[derive(Clone)]
pub struct ControlProblem {
    pub partition: DomainPartition,
    dynamics: FieldEval,
    cost: FieldEval,
    pub controls: [ControlSample; 2],
    pub bounds: ProblemBounds,
    pub lambda: f64,
    pub preset_id: String,
    /// Mixing-weight sample count for tangential set enumeration.
    pub mu_samples: usize,
}

impl std::fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ControlProblem")
            .field("preset_id", &self.preset_id)
            .field("partition", &self.partition)
            .field("bounds", &self.bounds)
            .field("lambda", &self.lambda)
            .field("mu_samples", &self.mu_samples)
            .finish_non_exhaustive()
    }
}

impl ControlProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        partition: DomainPartition,
        dynamics: FieldEval,
        cost: FieldEval,
        controls: [ControlSample; 2],
        bounds: ProblemBounds,
        lambda: f64,
        preset_id: impl Into<String>,
        mu_samples: usize,
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Invalid {
                what: "lambda",
                why: format!("must be positive, got {lambda}"),
            });
        }
        if mu_samples < 2 {
            return Err(Error::Invalid {
                what: "mu_samples",
                why: format!("need at least 2, got {mu_samples}"),
            });
        }
        let problem = ControlProblem {
            partition,
            dynamics,
            cost,
            controls,
            bounds,
            lambda,
            preset_id: preset_id.into(),
            mu_samples,
        };
        problem.check_controllability()?;
        Ok(problem)
    }

    /// Sampled normal controllability: at every interface point each side
    /// must reach normal velocities `>= delta` and `<= -delta`.
    fn check_controllability(&self) -> Result<()> {
        let delta = self.bounds.delta;
        let pts: Vec<f64> = self.partition.interface_points().to_vec();
        for c in pts {
            for side in [Side::One, Side::Two] {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &a in self.controls[side.index()].values() {
                    let b = self.b(side, 0.0, c, a);
                    lo = lo.min(b);
                    hi = hi.max(b);
                }
                if lo > -delta + 1e-9 || hi < delta - 1e-9 {
                    return Err(Error::Invalid {
                        what: "controllability",
                        why: format!(
                            "side {} at y = {c}: sampled normal velocities [{lo}, {hi}] \
                             do not cover [-{delta}, {delta}]",
                            side.label()
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Dynamics of one side.
    pub fn b(&self, side: Side, x: f64, y: f64, alpha: f64) -> f64 {
        (self.dynamics)(side, x, y, alpha)
    }

    /// Running cost of one side.
    pub fn l(&self, side: Side, x: f64, y: f64, alpha: f64) -> f64 {
        (self.cost)(side, x, y, alpha)
    }

    /// Blended dynamics and cost of a mixed control. Meaningful at interface
    /// points; evaluates the plain convex blend anywhere.
    pub fn mixed_dynamics_cost(&self, x: f64, y: f64, a: MixedControl) -> (f64, f64) {
        let b1 = self.b(Side::One, x, y, a.alpha1);
        let b2 = self.b(Side::Two, x, y, a.alpha2);
        let l1 = self.l(Side::One, x, y, a.alpha1);
        let l2 = self.l(Side::Two, x, y, a.alpha2);
        (a.mu * b1 + (1.0 - a.mu) * b2, a.mu * l1 + (1.0 - a.mu) * l2)
    }

    /// Enumerate blended controls with `|b_H . n1| <= tol` at the interface
    /// point `y`. The mixing weight runs over a uniform grid of
    /// `self.mu_samples` values; for every side pair whose velocities
    /// straddle zero the exact root `mu* = b2 / (b2 - b1)` is appended as
    /// well. Enumeration order (alpha1 outer, alpha2 middle, mu inner, root
    /// last) is the tie-break order used by every extremum over this set.
    pub fn tangential_control_set(&self, x: f64, y: f64, tol: f64) -> Result<Vec<MixedControl>> {
        self.partition.interface_normal(y)?;
        let m = self.mu_samples;
        let mut out = Vec::new();
        for &a1 in self.controls[0].values() {
            let b1 = self.b(Side::One, x, y, a1);
            for &a2 in self.controls[1].values() {
                let b2 = self.b(Side::Two, x, y, a2);
                let mut root_hit_grid = false;
                let root = if (b1 - b2).abs() > 0.0 {
                    let mu = b2 / (b2 - b1);
                    (0.0..=1.0).contains(&mu).then_some(mu)
                } else {
                    None
                };
                for k in 0..m {
                    let mu = k as f64 / (m - 1) as f64;
                    if (mu * b1 + (1.0 - mu) * b2).abs() <= tol {
                        out.push(MixedControl {
                            alpha1: a1,
                            alpha2: a2,
                            mu,
                        });
                        if let Some(r) = root {
                            if (r - mu).abs() <= 1e-12 {
                                root_hit_grid = true;
                            }
                        }
                    }
                }
                if let Some(r) = root {
                    if !root_hit_grid {
                        out.push(MixedControl {
                            alpha1: a1,
                            alpha2: a2,
                            mu: r,
                        });
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyTangentialSet { y });
        }
        Ok(out)
    }

    /// Keep the controls whose one-sided velocities do not push away from the
    /// interface: `b_1 . n_1 >= -tol` and `b_2 . n_2 >= -tol` with `n_2 = -n_1`.
    /// May be empty; emptiness means the plus-variant stay option is absent,
    /// not that the input is invalid.
    pub fn regular_filter(
        &self,
        x: f64,
        y: f64,
        set: &[MixedControl],
    ) -> Result<Vec<MixedControl>> {
        let n1 = self.partition.interface_normal(y)?;
        Ok(set
            .iter()
            .copied()
            .filter(|a| {
                let b1 = self.b(Side::One, x, y, a.alpha1);
                let b2 = self.b(Side::Two, x, y, a.alpha2);
                b1 * n1 >= -TANGENTIAL_TOL && b2 * (-n1) >= -TANGENTIAL_TOL
            })
            .collect())
    }

    /// One-sided Hamiltonian `max_alpha { -b_i p - l_i }` over the sampled
    /// control set. Ties keep the earliest sample.
    pub fn hamiltonian(&self, side: Side, x: f64, y: f64, p: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for &a in self.controls[side.index()].values() {
            let v = -self.b(side, x, y, a) * p - self.l(side, x, y, a);
            if v > best {
                best = v;
            }
        }
        best
    }

    /// Tangential Hamiltonian `max { -b_H p_t - l_H }` over the tangential
    /// set (`Minus`) or its regular subset (`Plus`). In dimension 1 the
    /// tangential momentum is trivial; `p_t` is kept for the general formula.
    pub fn tangential_hamiltonian(
        &self,
        x: f64,
        y: f64,
        p_t: f64,
        variant: Variant,
    ) -> Result<f64> {
        let set = self.tangential_control_set(x, y, TANGENTIAL_TOL)?;
        let set = match variant {
            Variant::Minus => set,
            Variant::Plus => {
                let filtered = self.regular_filter(x, y, &set)?;
                if filtered.is_empty() {
                    return Err(Error::EmptyRegularSet { y });
                }
                filtered
            }
        };
        let mut best = f64::NEG_INFINITY;
        for a in set {
            let (bh, lh) = self.mixed_dynamics_cost(x, y, a);
            let v = -bh * p_t - lh;
            if v > best {
                best = v;
            }
        }
        Ok(best)
    }

    /// Cheapest stay rate at an interface point for a strategy class:
    /// `min l_H` over the tangential (resp. regular tangential) controls.
    pub fn stay_cost(&self, x: f64, y: f64, variant: Variant) -> Result<f64> {
        Ok(-self.tangential_hamiltonian(x, y, 0.0, variant)?)
    }

    /// Perturbation constant of the interface regularization: any control
    /// with normal velocity `q` away from the interface is matched by a
    /// tangential control whose dynamics and cost move by at most `C |q|`.
    pub fn lemma_constant(&self) -> f64 {
        2.0 * self.bounds.m_b.max(self.bounds.m_l) / self.bounds.delta
    }

    /// Replace a non-tangential blended control by a tangential one.
    ///
    /// `a` must have nonzero normal velocity `q = b_H(a) . n1`; `a_push` must
    /// push back with normal velocity exactly `-sign(q) * delta` (within
    /// 1e-9). With `mu_bar = delta / (|q| + delta)` the target pair is the
    /// blend `mu_bar (b,l)(a) + (1-mu_bar) (b,l)(a_push)`, whose normal
    /// velocity vanishes; the returned control realizes that pair's cost as
    /// an actual zero-normal-velocity [`MixedControl`]. Both signs of `q` are
    /// accepted (the mirrored case reflects every sign).
    pub fn regularize_control(
        &self,
        x: f64,
        y: f64,
        a: MixedControl,
        a_push: MixedControl,
    ) -> Result<MixedControl> {
        const OP: &str = "regularize_control";
        let n1 = self.partition.interface_normal(y)?;
        let (b_a, l_a) = self.mixed_dynamics_cost(x, y, a);
        let q = b_a * n1;
        if q.abs() <= TANGENTIAL_TOL {
            return Err(Error::Precondition {
                op: OP,
                why: format!("control is already tangential (b_H . n1 = {q:.3e})"),
            });
        }
        let (b_p, l_p) = self.mixed_dynamics_cost(x, y, a_push);
        let want = -q.signum() * self.bounds.delta;
        if (b_p * n1 - want).abs() > 1e-9 {
            return Err(Error::Precondition {
                op: OP,
                why: format!(
                    "push control must have normal velocity {want:.6}, got {:.6e}",
                    b_p * n1
                ),
            });
        }
        let mu_bar = self.bounds.delta / (q.abs() + self.bounds.delta);
        let l_bar = mu_bar * l_a + (1.0 - mu_bar) * l_p;
        let out = self.realize_tangential_cost(x, y, l_bar)?;
        let (bh, _) = self.mixed_dynamics_cost(x, y, out);
        if bh.abs() > TANGENTIAL_TOL {
            return Err(Error::Precondition {
                op: OP,
                why: format!("realization left the tangential set (b_H = {bh:.3e})"),
            });
        }
        Ok(out)
    }

    /// Find a tangential control at `(x, y)` whose blended cost equals
    /// `target` to high accuracy. Candidates are side pairs with an exact
    /// zero-velocity mixing root plus one- and two-sided zero-velocity
    /// controls; a bisection between bracketing candidates of the same sign
    /// orientation refines the match. Assumes the side fields are continuous
    /// in the control value.
    fn realize_tangential_cost(&self, x: f64, y: f64, target: f64) -> Result<MixedControl> {
        const OP: &str = "regularize_control";
        let ztol = TANGENTIAL_TOL;

        // Orientation: +1 for b1 >= 0 >= b2, -1 for b1 <= 0 <= b2, 0 when
        // both velocities vanish (cost then spans an interval in mu).
        struct Cand {
            ctl: MixedControl,
            cost: f64,
            a1: f64,
            a2: f64,
            plus_ok: bool,
            minus_ok: bool,
        }
        let mut cands: Vec<Cand> = Vec::new();

        for &a1 in self.controls[0].values() {
            let b1 = self.b(Side::One, x, y, a1);
            let l1 = self.l(Side::One, x, y, a1);
            for &a2 in self.controls[1].values() {
                let b2 = self.b(Side::Two, x, y, a2);
                let l2 = self.l(Side::Two, x, y, a2);
                if b1.abs() <= ztol && b2.abs() <= ztol {
                    // Any mu is tangential: cost interpolates [l1, l2].
                    let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
                    if target >= lo - 1e-12 && target <= hi + 1e-12 {
                        let mu = if (l1 - l2).abs() <= 1e-15 {
                            0.5
                        } else {
                            ((target - l2) / (l1 - l2)).clamp(0.0, 1.0)
                        };
                        return MixedControl::new(a1, a2, mu);
                    }
                    for (mu, cost) in [(1.0, l1), (0.0, l2)] {
                        cands.push(Cand {
                            ctl: MixedControl {
                                alpha1: a1,
                                alpha2: a2,
                                mu,
                            },
                            cost,
                            a1,
                            a2,
                            plus_ok: true,
                            minus_ok: true,
                        });
                    }
                } else if b1.abs() <= ztol {
                    cands.push(Cand {
                        ctl: MixedControl {
                            alpha1: a1,
                            alpha2: a2,
                            mu: 1.0,
                        },
                        cost: l1,
                        a1,
                        a2,
                        plus_ok: b2 <= ztol,
                        minus_ok: b2 >= -ztol,
                    });
                } else if b2.abs() <= ztol {
                    cands.push(Cand {
                        ctl: MixedControl {
                            alpha1: a1,
                            alpha2: a2,
                            mu: 0.0,
                        },
                        cost: l2,
                        a1,
                        a2,
                        plus_ok: b1 >= -ztol,
                        minus_ok: b1 <= ztol,
                    });
                } else if b1 * b2 < 0.0 {
                    let mu = b2 / (b2 - b1);
                    cands.push(Cand {
                        ctl: MixedControl {
                            alpha1: a1,
                            alpha2: a2,
                            mu,
                        },
                        cost: mu * l1 + (1.0 - mu) * l2,
                        a1,
                        a2,
                        plus_ok: b1 > 0.0,
                        minus_ok: b1 < 0.0,
                    });
                }
            }
        }

        if cands.is_empty() {
            return Err(Error::EmptyTangentialSet { y });
        }
        for c in &cands {
            if (c.cost - target).abs() <= 1e-10 {
                return Ok(c.ctl);
            }
        }

        // Bracket within one orientation and bisect along the straight pair
        // path, solving the exact mixing root at every step.
        for orientation in [true, false] {
            let pick = |c: &Cand| if orientation { c.plus_ok } else { c.minus_ok };
            let mut lo: Option<&Cand> = None;
            let mut hi: Option<&Cand> = None;
            for c in cands.iter().filter(|c| pick(c)) {
                if c.cost <= target && lo.map_or(true, |b| c.cost > b.cost) {
                    lo = Some(c);
                }
                if c.cost >= target && hi.map_or(true, |b| c.cost < b.cost) {
                    hi = Some(c);
                }
            }
            let (lo, hi) = match (lo, hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => continue,
            };
            let eval = |s: f64| -> Option<(MixedControl, f64)> {
                let a1 = lo.a1 + s * (hi.a1 - lo.a1);
                let a2 = lo.a2 + s * (hi.a2 - lo.a2);
                let b1 = self.b(Side::One, x, y, a1);
                let b2 = self.b(Side::Two, x, y, a2);
                let l1 = self.l(Side::One, x, y, a1);
                let l2 = self.l(Side::Two, x, y, a2);
                let mu = if b1.abs() <= ztol && b2.abs() <= ztol {
                    0.5
                } else if (b1 - b2).abs() > 0.0 {
                    let mu = b2 / (b2 - b1);
                    if !(-1e-9..=1.0 + 1e-9).contains(&mu) {
                        return None;
                    }
                    mu.clamp(0.0, 1.0)
                } else {
                    return None;
                };
                if (mu * b1 + (1.0 - mu) * b2).abs() > ztol {
                    return None;
                }
                Some((
                    MixedControl {
                        alpha1: a1,
                        alpha2: a2,
                        mu,
                    },
                    mu * l1 + (1.0 - mu) * l2,
                ))
            };
            // Invariant: cost(s_lo) <= target <= cost(s_hi).
            let (mut s_lo, mut s_hi) = (0.0f64, 1.0f64);
            let mut best = (lo.ctl, lo.cost);
            let mut valid = true;
            for _ in 0..200 {
                let s = 0.5 * (s_lo + s_hi);
                let Some((ctl, cost)) = eval(s) else {
                    valid = false;
                    break;
                };
                if (cost - target).abs() < (best.1 - target).abs() {
                    best = (ctl, cost);
                }
                if (cost - target).abs() <= 1e-12 {
                    return Ok(ctl);
                }
                if cost < target {
                    s_lo = s;
                } else {
                    s_hi = s;
                }
            }
            if valid && (best.1 - target).abs() <= 1e-9 {
                return Ok(best.0);
            }
        }

        Err(Error::Precondition {
            op: OP,
            why: format!("could not realize tangential cost {target:.6} at y = {y}"),
        })
    }
}

/// Construction parameters shared by the presets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetParams {
    pub control_samples: usize,
    pub mu_samples: usize,
    /// Constant running cost of the `identical_sides_offset` preset.
    pub offset_cost: f64,
    pub lambda: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            control_samples: DEFAULT_CONTROL_SAMPLES,
            mu_samples: DEFAULT_MU_SAMPLES,
            offset_cost: 1.0,
            lambda: 1.0,
        }
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &["oned_example", "identical_sides", "identical_sides_offset"];

/// Build one of the bundled problems.
///
/// All presets share the period-2 partition with interfaces at 0 and 1
/// (region 1 on (0, 1), region 2 on (1, 2)) and dynamics `b_i = alpha` with
/// controls in `[-1, 1]`.
///
/// * `oned_example`: costs `l_1 = |alpha - cos(pi y)| + 1 - |cos(pi y)|` and
///   `l_2 = |alpha + cos(pi y)| + 1 - |cos(pi y)|`. Holding still anywhere
///   costs rate 1, except that opposed unit pushes at the interface point 0
///   (and matching blends at 1) cost nothing; this is the preset whose two
///   strategy classes give different effective Hamiltonians.
/// * `identical_sides`: both costs identically 1; the two regions are
///   indistinguishable and the effective Hamiltonian is `|p| - 1`.
/// * `identical_sides_offset`: both costs identically `offset_cost`.
pub fn preset(name: &str, params: &PresetParams) -> Result<ControlProblem> {
    let partition = DomainPartition::new(1, 2.0, vec![0.0, 1.0], Side::One)?;
    let sample = ControlSample::uniform(-1.0, 1.0, params.control_samples)?;
    let controls = [sample.clone(), sample];
    let dynamics: FieldEval = Arc::new(|_side, _x, _y, alpha| alpha);

    match name {
        "oned_example" => {
            let cost: FieldEval = Arc::new(|side, _x, y, alpha| {
                let c = (PI * y).cos();
                match side {
                    Side::One => (alpha - c).abs() + 1.0 - c.abs(),
                    Side::Two => (alpha + c).abs() + 1.0 - c.abs(),
                }
            });
            ControlProblem::new(
                partition,
                dynamics,
                cost,
                controls,
                ProblemBounds::new(1.0, 2.0, 1.0, 0.0, 2.0 * PI)?,
                params.lambda,
                name,
                params.mu_samples,
            )
        }
        "identical_sides" => {
            let cost: FieldEval = Arc::new(|_side, _x, _y, _alpha| 1.0);
            ControlProblem::new(
                partition,
                dynamics,
                cost,
                controls,
                ProblemBounds::new(1.0, 1.0, 1.0, 0.0, 0.0)?,
                params.lambda,
                name,
                params.mu_samples,
            )
        }
        "identical_sides_offset" => {
            let c = params.offset_cost;
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Invalid {
                    what: "offset_cost",
                    why: format!("must be positive, got {c}"),
                });
            }
            let cost: FieldEval = Arc::new(move |_side, _x, _y, _alpha| c);
            ControlProblem::new(
                partition,
                dynamics,
                cost,
                controls,
                ProblemBounds::new(1.0, c, 1.0, 0.0, 0.0)?,
                params.lambda,
                name,
                params.mu_samples,
            )
        }
        other => Err(Error::Invalid {
            what: "preset",
            why: format!("unknown preset '{other}' (known: {PRESET_NAMES:?})"),
        }),
    }
}
