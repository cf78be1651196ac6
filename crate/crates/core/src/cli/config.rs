//! Flat `key = value` experiment configuration.
//!
//! Files hold one assignment per line; `#` starts a comment. Command-line
//! flags are applied after the file, so they win. Unknown keys are errors.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::born::{BornSchemes, CutoffSpec, Q3Config};
use crate::dispersion::{RadialQuad, S3Quad};
use crate::error::{Error, Result};
use crate::fields::GridSpec1D;
use crate::pv::{NearScheme, PVScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialChoice {
    /// q^ = <rho>^{-n/2-beta}
    Bessel,
    /// q^ = exp(-a rho^2)
    Gaussian,
}

impl FromStr for PotentialChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bessel" => Ok(Self::Bessel),
            "gaussian" => Ok(Self::Gaussian),
            o => Err(Error::InvalidInput(format!("unknown potential {o:?} (bessel, gaussian)"))),
        }
    }
}

impl PotentialChoice {
    fn as_str(self) -> &'static str {
        match self {
            Self::Bessel => "bessel",
            Self::Gaussian => "gaussian",
        }
    }
}

/// Every knob of every subcommand. Keys absent from a run keep their
/// defaults; `n` and `beta` have none and are checked by the subcommands
/// that need them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub beta: Option<f64>,
    pub order: usize,
    pub potential: PotentialChoice,
    pub gaussian_a: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub points: usize,
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,
    pub c0: f64,
    pub pv: PVScheme,
    pub radial_rel_tol: f64,
    pub radial_max_panels: usize,
    pub q3_orders: [usize; 3],
    pub q3_budget: f64,
    pub q3_allow_3d: bool,
    pub out: PathBuf,
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub threads: Option<usize>,
    pub serial: bool,
    pub seed: u64,
    pub suite: Option<String>,
    /// Test hook: perturb sphere quadrature weights inside `verify`.
    pub corrupt_weights: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: None,
            beta: None,
            order: 2,
            potential: PotentialChoice::Bessel,
            gaussian_a: 1.0,
            eta_min: 8.0,
            eta_max: 512.0,
            points: 48,
            fit_min: None,
            fit_max: None,
            c0: 4.0,
            pv: PVScheme::default(),
            radial_rel_tol: RadialQuad::default().rel_tol,
            radial_max_panels: RadialQuad::default().max_panels,
            q3_orders: S3Quad::default_for(2).orders,
            q3_budget: Q3Config::default().budget,
            q3_allow_3d: false,
            out: PathBuf::from("."),
            input: None,
            column: None,
            threads: None,
            serial: false,
            seed: 20240607,
            suite: None,
            corrupt_weights: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| Error::InvalidInput(format!("{key} = {v:?}: {e}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidInput(format!("{key} = {v:?}: expected true or false"))),
    }
}

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl ExperimentConfig {
    /// Keys in the order [`Self::to_text`] writes them.
    pub const KEYS: &'static [&'static str] = &[
        "n",
        "beta",
        "order",
        "potential",
        "gaussian_a",
        "eta_min",
        "eta_max",
        "points",
        "fit_min",
        "fit_max",
        "c0",
        "pv.delta",
        "pv.panel_order",
        "pv.r_max",
        "pv.tail_tol",
        "pv.near_scheme",
        "pv.panel_width",
        "pv.near_levels",
        "radial.rel_tol",
        "radial.max_panels",
        "q3.orders",
        "q3.budget",
        "q3.allow_3d",
        "out",
        "input",
        "column",
        "threads",
        "serial",
        "seed",
        "suite",
        "verify.corrupt_weights",
    ];

    /// Assigns one key. Dashes in keys are read as underscores so flag
    /// spellings work too. An empty value clears optional keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        let k = key.as_str();
        match k {
            "n" => self.n = (!v.is_empty()).then(|| parse(k, v)).transpose()?,
            "beta" => self.beta = (!v.is_empty()).then(|| parse(k, v)).transpose()?,
            "order" | "j" => self.order = parse(k, v)?,
            "potential" => self.potential = v.parse()?,
            "gaussian_a" => self.gaussian_a = parse(k, v)?,
            "eta_min" => self.eta_min = parse(k, v)?,
            "eta_max" => self.eta_max = parse(k, v)?,
            "points" => self.points = parse(k, v)?,
            "fit_min" => self.fit_min = (!v.is_empty()).then(|| parse(k, v)).transpose()?,
            "fit_max" => self.fit_max = (!v.is_empty()).then(|| parse(k, v)).transpose()?,
            "c0" => self.c0 = parse(k, v)?,
            "pv.delta" => self.pv.delta = parse(k, v)?,
            "pv.panel_order" => self.pv.panel_order = parse(k, v)?,
            "pv.r_max" => self.pv.r_max = parse(k, v)?,
            "pv.tail_tol" => self.pv.tail_tol = parse(k, v)?,
            "pv.near_scheme" => self.pv.near_scheme = v.parse::<NearScheme>()?,
            "pv.panel_width" => self.pv.panel_width = parse(k, v)?,
            "pv.near_levels" => self.pv.near_levels = parse(k, v)?,
            "radial.rel_tol" => self.radial_rel_tol = parse(k, v)?,
            "radial.max_panels" => self.radial_max_panels = parse(k, v)?,
            "q3.orders" => {
                let parts: Vec<usize> = v
                    .split(',')
                    .map(|s| parse(k, s.trim()))
                    .collect::<Result<_>>()?;
                self.q3_orders = parts
                    .try_into()
                    .map_err(|_| Error::InvalidInput(format!("{k} = {v:?}: expected three orders")))?;
            }
            "q3.budget" => self.q3_budget = parse(k, v)?,
            "q3.allow_3d" => self.q3_allow_3d = parse_bool(k, v)?,
            "out" => self.out = PathBuf::from(v),
            "input" => self.input = (!v.is_empty()).then(|| PathBuf::from(v)),
            "column" => self.column = (!v.is_empty()).then(|| v.to_string()),
            "threads" => self.threads = (!v.is_empty()).then(|| parse(k, v)).transpose()?,
            "serial" => self.serial = parse_bool(k, v)?,
            "seed" => self.seed = parse(k, v)?,
            "suite" => self.suite = (!v.is_empty()).then(|| v.to_string()),
            "verify.corrupt_weights" => self.corrupt_weights = parse_bool(k, v)?,
            _ => return Err(Error::InvalidInput(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "n" => opt_str(&self.n),
            "beta" => opt_str(&self.beta),
            "order" => self.order.to_string(),
            "potential" => self.potential.as_str().into(),
            "gaussian_a" => self.gaussian_a.to_string(),
            "eta_min" => self.eta_min.to_string(),
            "eta_max" => self.eta_max.to_string(),
            "points" => self.points.to_string(),
            "fit_min" => opt_str(&self.fit_min),
            "fit_max" => opt_str(&self.fit_max),
            "c0" => self.c0.to_string(),
            "pv.delta" => self.pv.delta.to_string(),
            "pv.panel_order" => self.pv.panel_order.to_string(),
            "pv.r_max" => self.pv.r_max.to_string(),
            "pv.tail_tol" => self.pv.tail_tol.to_string(),
            "pv.near_scheme" => match self.pv.near_scheme {
                NearScheme::SymmetricReflection => "symmetric_reflection".into(),
                NearScheme::TaylorSubtraction => "taylor_subtraction".into(),
            },
            "pv.panel_width" => self.pv.panel_width.to_string(),
            "pv.near_levels" => self.pv.near_levels.to_string(),
            "radial.rel_tol" => self.radial_rel_tol.to_string(),
            "radial.max_panels" => self.radial_max_panels.to_string(),
            "q3.orders" => {
                let [a, b, c] = self.q3_orders;
                format!("{a},{b},{c}")
            }
            "q3.budget" => self.q3_budget.to_string(),
            "q3.allow_3d" => self.q3_allow_3d.to_string(),
            "out" => self.out.display().to_string(),
            "input" => opt_str(&self.input.as_ref().map(|p| p.display())),
            "column" => opt_str(&self.column),
            "threads" => opt_str(&self.threads),
            "serial" => self.serial.to_string(),
            "seed" => self.seed.to_string(),
            "suite" => opt_str(&self.suite),
            "verify.corrupt_weights" => self.corrupt_weights.to_string(),
            _ => unreachable!("key list and value_of disagree on {key}"),
        }
    }

    /// Every key with its resolved value; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for k in Self::KEYS {
            let _ = writeln!(s, "{k} = {}", self.value_of(k));
        }
        s
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::InvalidInput("missing required key n (--n)".into()))
    }

    pub fn require_beta(&self) -> Result<f64> {
        self.beta
            .ok_or_else(|| Error::InvalidInput("missing required key beta (--beta)".into()))
    }

    pub fn eta_grid(&self) -> Result<GridSpec1D> {
        if !(self.eta_min > 0.0 && self.eta_max > self.eta_min) {
            return Err(Error::InvalidInput(format!(
                "eta range [{}, {}] must satisfy 0 < eta_min < eta_max",
                self.eta_min, self.eta_max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidInput(format!("points = {} must be >= 2", self.points)));
        }
        GridSpec1D::logarithmic(self.eta_min, self.eta_max, self.points)
    }

    /// Fit window; defaults to the eta range clipped below at 2 c0 so that
    /// only nodes with chi = 1 enter.
    pub fn window(&self) -> [f64; 2] {
        let lo = self.fit_min.unwrap_or_else(|| self.eta_min.max(2.0 * self.c0));
        [lo, self.fit_max.unwrap_or(self.eta_max)]
    }

    pub fn radial(&self) -> RadialQuad {
        RadialQuad {
            rel_tol: self.radial_rel_tol,
            max_panels: self.radial_max_panels,
        }
    }

    pub fn cutoff(&self) -> Result<CutoffSpec> {
        CutoffSpec::new(self.c0)
    }

    pub fn born_schemes(&self) -> BornSchemes {
        BornSchemes {
            pv: self.pv,
            radial: self.radial(),
            q3: Q3Config {
                s3: S3Quad { orders: self.q3_orders },
                budget: self.q3_budget,
                allow_3d: self.q3_allow_3d,
                ..Q3Config::default()
            },
            parallel: !self.serial,
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn file_then_flags() {
        let mut c = ExperimentConfig::from_text("n = 3\nbeta=0.5 # comment\n\npv.near_scheme = taylor\n").unwrap();
        assert_eq!(c.n, Some(3));
        assert_eq!(c.pv.near_scheme, NearScheme::TaylorSubtraction);
        c.set("beta", "1.5").unwrap();
        c.set("eta-min", "4").unwrap();
        assert_eq!(c.beta, Some(1.5));
        assert_eq!(c.eta_min, 4.0);
        let again = ExperimentConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_text(), c.to_text());
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ExperimentConfig::from_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_text("n 3").is_err());
        assert!(ExperimentConfig::from_text("n = three").is_err());
        assert!(ExperimentConfig::from_text("q3.orders = 1,2").is_err());
        assert!(ExperimentConfig::from_text("serial = maybe").is_err());
    }

    #[test]
    fn required_keys() {
        let c = ExperimentConfig::default();
        assert!(c.require_n().is_err());
        assert!(c.require_beta().is_err());
    }

    #[test]
    fn default_window_skips_the_ramp() {
        let mut c = ExperimentConfig {
            eta_min: 4.0,
            ..ExperimentConfig::default()
        };
        assert_eq!(c.window(), [8.0, 512.0]);
        c.fit_min = Some(16.0);
        assert_eq!(c.window(), [16.0, 512.0]);
    }
}
