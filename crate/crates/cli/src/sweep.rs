//! One-dimensional parameter sweeps.

use std::str::FromStr;

use dce_core::indicators::{evaluate, IndicatorReport};
use dce_core::model::{CircuitConfig, ConfigFile};
use dce_core::{Method, ModePair, MomentSet};
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::table::{Cell, Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Epsilon,
    Temperature,
    Detuning,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::Temperature => "temperature",
            SweepVariable::Detuning => "detuning",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "epsilon" => Ok(SweepVariable::Epsilon),
            "temperature" => Ok(SweepVariable::Temperature),
            "detuning" => Ok(SweepVariable::Detuning),
            other => Err(format!("unknown sweep variable '{other}' (expected epsilon, temperature or detuning)")),
        }
    }
}

/// A linear grid over one parameter; the others come from `config` and
/// `detuning_frac` (`δω/ω_d`).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub config: CircuitConfig,
    pub detuning_frac: f64,
    pub method: Method,
    pub format: Format,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, points: usize) -> Self {
        Self {
            variable,
            start,
            stop,
            points,
            config: CircuitConfig::default(),
            detuning_frac: 0.15,
            method: Method::Numeric,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(CliError::Spec(format!("need at least 2 points, got {}", self.points)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(CliError::Spec(format!("need start < stop, got {} .. {}", self.start, self.stop)));
        }
        let (lo, hi_open) = match self.variable {
            SweepVariable::Epsilon => (0.0, 1.0),
            SweepVariable::Temperature => (0.0, f64::INFINITY),
            SweepVariable::Detuning => (0.0, 0.5),
        };
        if self.start < lo || self.stop >= hi_open {
            return Err(CliError::Spec(format!(
                "{} range {} .. {} leaves [{lo}, {hi_open})",
                self.variable.name(),
                self.start,
                self.stop
            )));
        }
        self.config.validate()?;
        ModePair::from_fraction(self.config.drive_angular_frequency, self.detuning_frac)?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + k as f64 * step })
            .collect()
    }

    /// Config and mode pair at one grid value.
    pub fn point(&self, value: f64) -> dce_core::Result<(CircuitConfig, ModePair)> {
        let mut cfg = self.config.clone();
        let mut frac = self.detuning_frac;
        match self.variable {
            SweepVariable::Epsilon => cfg.epsilon = value,
            SweepVariable::Temperature => cfg.temperature = value,
            SweepVariable::Detuning => frac = value,
        }
        cfg.validate()?;
        let pair = ModePair::from_fraction(cfg.drive_angular_frequency, frac)?;
        Ok((cfg, pair))
    }
}

pub const SWEEP_COLUMNS: [&str; 23] = [
    "index",
    "epsilon",
    "temperature_k",
    "detuning_frac",
    "n_plus",
    "n_minus",
    "w_re",
    "w_im",
    "s_plus_re",
    "s_plus_im",
    "s_minus_re",
    "s_minus_im",
    "x_re",
    "x_im",
    "fdf_min",
    "theta_opt",
    "sigma2",
    "phi",
    "sigma2_threshold",
    "logneg",
    "nonclassical_by_fdf",
    "nonclassical_by_sigma2",
    "entangled",
];

pub fn sweep_row(index: usize, cfg: &CircuitConfig, pair: &ModePair, m: &MomentSet, r: &IndicatorReport) -> Vec<Cell> {
    vec![
        index.into(),
        cfg.epsilon.into(),
        cfg.temperature.into(),
        (pair.detuning() / pair.drive()).into(),
        m.n_plus.into(),
        m.n_minus.into(),
        m.w.re.into(),
        m.w.im.into(),
        m.s_plus.re.into(),
        m.s_plus.im.into(),
        m.s_minus.re.into(),
        m.s_minus.im.into(),
        m.x.re.into(),
        m.x.im.into(),
        r.fdf_min.into(),
        r.theta_opt.into(),
        r.sigma2.into(),
        r.phi.into(),
        r.sigma2_threshold.into(),
        r.logneg.into(),
        r.nonclassical_by_fdf.into(),
        r.nonclassical_by_sigma2.into(),
        r.entangled.into(),
    ]
}

pub fn method_name(method: Method) -> &'static str {
    match method {
        Method::Perturbative => "perturbative",
        Method::Numeric => "numeric",
    }
}

/// Metadata shared by every emitted table.
pub fn base_metadata(table: &mut Table, config: &CircuitConfig, method: Method) {
    table.meta("generator", format!("dce {}", env!("CARGO_PKG_VERSION")));
    table.meta(
        "config",
        serde_json::to_value(ConfigFile::from_config(config)).unwrap_or(Value::Null),
    );
    table.meta("method", method_name(method));
    table.meta("phi_convention", "phi maximizes sigma2");
    table.meta("logneg_base", "natural");
}

/// Evaluate every grid point in parallel and assemble the rows in grid order.
/// The first failing point (lowest index) aborts the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let grid = spec.grid();
    let results: Vec<_> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &value)| {
            spec.point(value).and_then(|(cfg, pair)| {
                let (m, r) = evaluate(&cfg, &pair, spec.method)?;
                Ok(sweep_row(k, &cfg, &pair, &m, &r))
            })
        })
        .collect();

    let mut table = Table::new(&SWEEP_COLUMNS);
    base_metadata(&mut table, &spec.config, spec.method);
    table.meta("variable", spec.variable.name());
    table.meta("start", spec.start);
    table.meta("stop", spec.stop);
    table.meta("points", spec.points);
    table.meta("detuning_frac", spec.detuning_frac);
    table.meta("grid_order", "ascending");
    for (k, res) in results.into_iter().enumerate() {
        match res {
            Ok(row) => table.push(row),
            Err(source) => {
                return Err(CliError::Point {
                    index: k,
                    variable: spec.variable.name().into(),
                    value: format!("{}", grid[k]),
                    source,
                })
            }
        }
    }
    Ok(table)
}
