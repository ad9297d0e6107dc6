//! Job configuration: the JSON document every command reads.

use crate::CliError;
use jetmech::hamjac::{AffineOrder, CheckOptions, ClosedOneForm, DEFAULT_TOL, RELATEDNESS_TOL};
use jetmech::symexpr::{parse_simplified, SampleBox};
use jetmech::{Binding, ChartSpec, Expr, Symbol};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ostrogradsky,
    Schmidt2,
    Schmidt3,
    Schmidt2deg,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ostrogradsky => "ostrogradsky",
            Method::Schmidt2 => "schmidt2",
            Method::Schmidt3 => "schmidt3",
            Method::Schmidt2deg => "schmidt2deg",
        }
    }
}

/// Where the initial state of a simulation comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// `initial` holds a jet `q{A}_j`; momenta follow from the method.
    #[default]
    Jet,
    /// `initial` holds every state coordinate.
    State,
    /// `initial` holds the positions; momenta are read off the configured one-form.
    Gamma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    #[serde(default)]
    pub initial: BTreeMap<String, f64>,
    #[serde(default)]
    pub start: Start,
    /// Parameter values substituted into the one-form for a second
    /// relatedness run that is expected to fail.
    #[serde(default)]
    pub perturb: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub hj: Option<f64>,
    pub relatedness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Guard {
    pub expr: String,
    pub min: f64,
}

/// Sampling box for residual checks. Parameters are always pinned to their
/// configured values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
    #[serde(default)]
    pub ranges: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub guards: Vec<Guard>,
    pub points: Option<usize>,
}

fn default_lo() -> f64 {
    -1.0
}

fn default_hi() -> f64 {
    1.0
}

impl Default for Region {
    fn default() -> Self {
        Region {
            lo: -1.0,
            hi: 1.0,
            ranges: BTreeMap::new(),
            guards: Vec::new(),
            points: None,
        }
    }
}

/// `L = sum_A f_A q{A}_k + g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Affine {
    pub order: AffineOrder,
    pub f: Vec<String>,
    pub g: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub problem: String,
    pub n: u32,
    pub k: u32,
    #[serde(default)]
    pub lagrangian: Option<String>,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Gauge function `F`.
    #[serde(default)]
    pub gauge: Option<String>,
    /// Generating function `W`.
    #[serde(default)]
    pub potential: Option<String>,
    /// Components of `gamma`, one per base position.
    #[serde(default)]
    pub gamma: Option<Vec<String>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub simulation: Option<Simulation>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub region: Region,
    #[serde(default)]
    pub affine: Option<Affine>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_method() -> Method {
    Method::Ostrogradsky
}

pub fn expr(field: &str, text: &str) -> Result<Expr, CliError> {
    parse_simplified(text).map_err(|e| CliError::config(format!("{field}: {e}")))
}

fn symbol(name: &str) -> Result<Symbol, CliError> {
    match Symbol::parse_name(name) {
        Ok(Some(s)) => Ok(s),
        Ok(None) => Ok(Symbol::param(name)),
        Err(()) => Err(CliError::config(format!(
            "malformed coordinate name `{name}`"
        ))),
    }
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field presence and basic ranges. Expression syntax is checked when used.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 || self.k == 0 {
            return Err(CliError::config("n and k must be at least 1"));
        }
        let need_gauge = |what: &str| {
            if self.gauge.is_none() {
                Err(CliError::config(format!(
                    "method {what} requires a gauge function over (q_0, q_1, a_0, m_0)"
                )))
            } else {
                Ok(())
            }
        };
        match self.method {
            Method::Ostrogradsky => {}
            Method::Schmidt2 if self.k != 2 => {
                return Err(CliError::config("method schmidt2 requires k = 2"))
            }
            Method::Schmidt2 => {}
            Method::Schmidt3 if self.k != 3 => {
                return Err(CliError::config("method schmidt3 requires k = 3"))
            }
            Method::Schmidt3 => need_gauge("schmidt3")?,
            Method::Schmidt2deg if self.k != 2 => {
                return Err(CliError::config("method schmidt2deg requires k = 2"))
            }
            Method::Schmidt2deg => need_gauge("schmidt2deg")?,
        }
        for name in self.params.keys() {
            if !symbol(name)?.is_param() {
                return Err(CliError::config(format!(
                    "parameter `{name}` is a coordinate name"
                )));
            }
        }
        if let Some(sim) = &self.simulation {
            if !(sim.h > 0.0 && sim.h.is_finite()) {
                return Err(CliError::config(format!(
                    "simulation.h must be positive, got {}",
                    sim.h
                )));
            }
            if !(sim.t1 >= sim.t0) {
                return Err(CliError::config("simulation.t1 must not precede t0"));
            }
        }
        if self.potential.is_some() && self.gamma.is_some() {
            return Err(CliError::config("give either potential or gamma, not both"));
        }
        Ok(())
    }

    pub fn lagrangian_text(&self) -> Result<&str, CliError> {
        self.lagrangian
            .as_deref()
            .ok_or_else(|| CliError::config("lagrangian is required"))
    }

    pub fn gauge_expr(&self) -> Result<Option<Expr>, CliError> {
        self.gauge.as_deref().map(|t| expr("gauge", t)).transpose()
    }

    pub fn params(&self) -> Binding {
        self.params
            .iter()
            .map(|(k, v)| (Symbol::param(k), *v))
            .collect()
    }

    pub fn seed_or(&self, cli: Option<u64>) -> u64 {
        cli.or(self.seed).unwrap_or(DEFAULT_SEED)
    }

    /// Sampling options with parameters pinned.
    pub fn check_options(&self, seed: u64, tol: Option<f64>) -> Result<CheckOptions, CliError> {
        let r = &self.region;
        let mut b = SampleBox::uniform(r.lo, r.hi);
        for (name, [lo, hi]) in &r.ranges {
            b = b.with_range(symbol(name)?, *lo, *hi);
        }
        for g in &r.guards {
            b = b.with_guard(expr("region.guards", &g.expr)?, g.min);
        }
        for (s, v) in self.params().iter() {
            b = b.with_fixed(s.clone(), *v);
        }
        let mut opts = CheckOptions::default().with_region(b);
        opts.seed = seed;
        opts.tol = tol.or(self.tolerances.hj).unwrap_or(DEFAULT_TOL);
        if let Some(n) = r.points {
            opts.points = n;
        }
        Ok(opts)
    }

    pub fn relatedness_tol(&self) -> f64 {
        self.tolerances.relatedness.unwrap_or(RELATEDNESS_TOL)
    }

    pub fn has_one_form(&self) -> bool {
        self.potential.is_some() || self.gamma.is_some()
    }

    /// The configured one-form on `chart`, checked for closure.
    pub fn one_form(
        &self,
        chart: &ChartSpec,
        opts: &CheckOptions,
    ) -> Result<ClosedOneForm, CliError> {
        if let Some(w) = &self.potential {
            return Ok(ClosedOneForm::from_potential(
                chart.clone(),
                expr("potential", w)?,
            )?);
        }
        let comps = self
            .gamma
            .as_ref()
            .ok_or_else(|| CliError::config("potential or gamma is required"))?;
        let comps = comps
            .iter()
            .map(|c| expr("gamma", c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ClosedOneForm::from_components_in(
            chart.clone(),
            comps,
            &opts.region,
        )?)
    }

    /// Initial values as a binding, parameters included.
    pub fn initial(&self) -> Result<Binding, CliError> {
        let sim = self
            .simulation
            .as_ref()
            .ok_or_else(|| CliError::config("simulation block is required"))?;
        let mut b = self.params();
        for (name, v) in &sim.initial {
            b.set(symbol(name)?, *v);
        }
        Ok(b)
    }
}
