//! Plain-text run configuration: line-based `key = value` with `#` comments,
//! defaults for absent keys, and strict rejection of unknown or duplicate
//! keys. `render` emits a canonical form that parses back to the same
//! config.

use hjbhomog_core::cell_solver::SolverParams;
use hjbhomog_core::control_model::{preset, PresetParams, Variant};
use hjbhomog_core::effective_hamiltonian::Method;
use hjbhomog_core::homogenized_solver::MACRO_PERIOD;
use hjbhomog_core::{ControlProblem, Error, Result};

/// Which variants a command should run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantSel {
    Minus,
    Plus,
    Both,
}

impl VariantSel {
    pub fn tag(self) -> &'static str {
        match self {
            VariantSel::Minus => "minus",
            VariantSel::Plus => "plus",
            VariantSel::Both => "both",
        }
    }

    pub fn list(self) -> Vec<Variant> {
        match self {
            VariantSel::Minus => vec![Variant::Minus],
            VariantSel::Plus => vec![Variant::Plus],
            VariantSel::Both => vec![Variant::Minus, Variant::Plus],
        }
    }
}

/// One experiment description; every command reads the subset it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub offset_cost: f64,
    pub lambda: f64,
    pub cell_n: usize,
    pub macro_n: usize,
    pub control_samples: usize,
    pub mu_samples: usize,
    pub rho_schedule: Vec<f64>,
    pub horizon_t: f64,
    pub max_sweeps: usize,
    pub x: f64,
    pub p: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub p_step: f64,
    pub eps_list: Vec<f64>,
    pub variant: VariantSel,
    pub method: Method,
    pub traj_signal: String,
    pub traj_eps: f64,
    pub traj_t: f64,
    pub traj_dt: f64,
    pub traj_x0: f64,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: "oned_example".into(),
            offset_cost: 1.0,
            lambda: 1.0,
            cell_n: 400,
            macro_n: 400,
            control_samples: 41,
            mu_samples: 21,
            rho_schedule: vec![0.08, 0.04, 0.02, 0.01],
            horizon_t: 50.0,
            max_sweeps: 400_000,
            x: 0.0,
            p: 0.0,
            p_min: -6.0,
            p_max: 6.0,
            p_step: 0.25,
            eps_list: vec![0.25, 0.125, 0.0625],
            variant: VariantSel::Both,
            method: Method::Discount,
            traj_signal: "singular_stay".into(),
            traj_eps: 0.1,
            traj_t: 20.0,
            traj_dt: 1e-3,
            traj_x0: 0.0,
            out_dir: "out".into(),
        }
    }
}

fn bad(line: usize, why: String) -> Error {
    Error::Invalid {
        what: "config",
        why: format!("line {line}: {why}"),
    }
}

fn field(name: &str, why: String) -> Error {
    Error::Invalid {
        what: "config",
        why: format!("field `{name}`: {why}"),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| bad(line, format!("key `{key}`: cannot parse `{value}`")))
}

fn num_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| bad(line, format!("key `{key}`: cannot parse `{}`", s.trim())))
        })
        .collect()
}

/// Parse a config text, apply defaults, and validate the result.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let no = idx + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(no, "expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(bad(no, format!("duplicate key `{key}`")));
        }
        match key {
            "preset" => cfg.preset = value.to_string(),
            "offset_cost" => cfg.offset_cost = num(no, key, value)?,
            "lambda" => cfg.lambda = num(no, key, value)?,
            "cell_n" => cfg.cell_n = num(no, key, value)?,
            "macro_n" => cfg.macro_n = num(no, key, value)?,
            "control_samples" => cfg.control_samples = num(no, key, value)?,
            "mu_samples" => cfg.mu_samples = num(no, key, value)?,
            "rho_schedule" => cfg.rho_schedule = num_list(no, key, value)?,
            "horizon_t" => cfg.horizon_t = num(no, key, value)?,
            "max_sweeps" => cfg.max_sweeps = num(no, key, value)?,
            "x" => cfg.x = num(no, key, value)?,
            "p" => cfg.p = num(no, key, value)?,
            "p_min" => cfg.p_min = num(no, key, value)?,
            "p_max" => cfg.p_max = num(no, key, value)?,
            "p_step" => cfg.p_step = num(no, key, value)?,
            "eps_list" => cfg.eps_list = num_list(no, key, value)?,
            "variant" => {
                cfg.variant = match value {
                    "minus" => VariantSel::Minus,
                    "plus" => VariantSel::Plus,
                    "both" => VariantSel::Both,
                    _ => return Err(bad(no, format!("unknown variant `{value}`"))),
                }
            }
            "method" => {
                cfg.method = value
                    .parse()
                    .map_err(|_| bad(no, format!("unknown method `{value}`")))?
            }
            "traj_signal" => cfg.traj_signal = value.to_string(),
            "traj_eps" => cfg.traj_eps = num(no, key, value)?,
            "traj_t" => cfg.traj_t = num(no, key, value)?,
            "traj_dt" => cfg.traj_dt = num(no, key, value)?,
            "traj_x0" => cfg.traj_x0 = num(no, key, value)?,
            "out_dir" => cfg.out_dir = value.to_string(),
            _ => return Err(bad(no, format!("unknown key `{key}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Build the configured control problem.
    pub fn problem(&self) -> Result<ControlProblem> {
        preset(
            &self.preset,
            &PresetParams {
                control_samples: self.control_samples,
                mu_samples: self.mu_samples,
                offset_cost: self.offset_cost,
                lambda: self.lambda,
            },
        )
    }

    pub fn solver(&self) -> SolverParams {
        SolverParams {
            rho_schedule: self.rho_schedule.clone(),
            max_sweeps: self.max_sweeps,
        }
    }

    /// Momentum grid `p_min, p_min + p_step, ...` capped at `p_max`.
    pub fn p_grid(&self) -> Vec<f64> {
        let count = ((self.p_max - self.p_min) / self.p_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.p_min + i as f64 * self.p_step)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let problem = self.problem().map_err(|e| field("preset", e.to_string()))?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(field(
                "lambda",
                format!("must be positive, got {}", self.lambda),
            ));
        }
        if self.cell_n < 4 || self.macro_n < 4 {
            return Err(field(
                "cell_n/macro_n",
                "grids need at least 4 nodes".into(),
            ));
        }
        if self.control_samples < 2 || self.mu_samples < 2 {
            return Err(field(
                "control_samples/mu_samples",
                "need at least 2 samples".into(),
            ));
        }
        self.solver()
            .validate()
            .map_err(|e| field("rho_schedule", e.to_string()))?;
        if !(self.horizon_t.is_finite() && self.horizon_t > 0.0) {
            return Err(field("horizon_t", "must be positive".into()));
        }
        if !(self.p_step.is_finite() && self.p_step > 0.0) {
            return Err(field("p_step", "must be positive".into()));
        }
        if !(self.p_min.is_finite() && self.p_max.is_finite() && self.p_min <= self.p_max) {
            return Err(field("p_min/p_max", "need finite p_min <= p_max".into()));
        }
        if self.eps_list.is_empty() {
            return Err(field("eps_list", "empty".into()));
        }
        let period = problem.partition.period();
        for &eps in &self.eps_list {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(field("eps_list", format!("nonpositive entry {eps}")));
            }
            let ratio = MACRO_PERIOD / (eps * period);
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio < 0.5 {
                return Err(field(
                    "eps_list",
                    format!(
                        "eps = {eps} is not commensurate with the macro period \
                         ({MACRO_PERIOD} / {} = {ratio})",
                        eps * period
                    ),
                ));
            }
        }
        for w in self.eps_list.windows(2) {
            if w[1] >= w[0] {
                return Err(field(
                    "eps_list",
                    format!("not strictly decreasing: {} then {}", w[0], w[1]),
                ));
            }
        }
        for (name, v) in [
            ("traj_eps", self.traj_eps),
            ("traj_t", self.traj_t),
            ("traj_dt", self.traj_dt),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Canonical text form: every key, fixed order, round-trips through
    /// [`parse_config`].
    pub fn render(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("preset", self.preset.clone());
        kv("offset_cost", self.offset_cost.to_string());
        kv("lambda", self.lambda.to_string());
        kv("cell_n", self.cell_n.to_string());
        kv("macro_n", self.macro_n.to_string());
        kv("control_samples", self.control_samples.to_string());
        kv("mu_samples", self.mu_samples.to_string());
        kv("rho_schedule", list(&self.rho_schedule));
        kv("horizon_t", self.horizon_t.to_string());
        kv("max_sweeps", self.max_sweeps.to_string());
        kv("x", self.x.to_string());
        kv("p", self.p.to_string());
        kv("p_min", self.p_min.to_string());
        kv("p_max", self.p_max.to_string());
        kv("p_step", self.p_step.to_string());
        kv("eps_list", list(&self.eps_list));
        kv("variant", self.variant.tag().into());
        kv("method", self.method.tag().into());
        kv("traj_signal", self.traj_signal.clone());
        kv("traj_eps", self.traj_eps.to_string());
        kv("traj_t", self.traj_t.to_string());
        kv("traj_dt", self.traj_dt.to_string());
        kv("traj_x0", self.traj_x0.to_string());
        kv("out_dir", self.out_dir.clone());
        s
    }
}
