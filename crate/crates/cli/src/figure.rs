//! Datasets behind the paper-style figures.
//!
//! * `fig1a`: `⟨:f_θ†f_θ:⟩` over ε on a θ grid covering `[0, 2π]`, plus the
//!   θ = 0 trace and the minimum over θ.
//! * `fig1b`: σ₂ and the classical boundary over ε.
//! * `fig2`: 𝒩 over ε, plus the covariance matrix at ε = 0.5.
//! * `fig3`: a (T, δω) grid at fixed ε of −fdf_min and 𝒩, with the one-σ flags
//!   of both indicators under uncorrelated detector noise.

use std::f64::consts::PI;
use std::str::FromStr;

use dce_core::estimator::{indicator_standard_errors, inject_detector_noise};
use dce_core::indicators::{evaluate, fdf_min, fdf_theta, transposed_symplectic_min, IndicatorReport};
use dce_core::moments::covariance_matrix;
use dce_core::{CircuitConfig, Method, ModePair};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::sweep::base_metadata;
use crate::table::{Cell, Table};

pub const FIG1_EPSILON_MAX: f64 = 0.5;
pub const FIG1_POINTS: usize = 51;
pub const THETA_POINTS: usize = 37;
pub const FIG2_COVARIANCE_EPSILON: f64 = 0.5;
pub const FIG3_EPSILON: f64 = 0.15;
pub const FIG3_POINTS: usize = 20;
pub const FIG3_TEMPERATURE_MAX: f64 = 0.15;
pub const FIG3_DETUNING_MIN: f64 = 0.02;
pub const FIG3_DETUNING_MAX: f64 = 0.45;
pub const FIG3_NOISE_N_DET: f64 = 0.005;
pub const FIG3_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1a => "fig1a",
            FigureId::Fig1b => "fig1b",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
        }
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1a" => Ok(FigureId::Fig1a),
            "fig1b" => Ok(FigureId::Fig1b),
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            other => Err(CliError::UnknownFigure(other.to_string())),
        }
    }
}

/// Overrides for [`reproduce_figure`]. `None` selects the figure default.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    /// Temperature, drive and circuit values; ε is swept (fig1, fig2) or fixed
    /// by `epsilon` (fig3).
    pub config: CircuitConfig,
    pub detuning_frac: f64,
    pub method: Method,
    pub points: Option<usize>,
    pub epsilon: Option<f64>,
    pub noise_n_det: Option<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            config: CircuitConfig::default(),
            detuning_frac: 0.15,
            method: Method::Numeric,
            points: None,
            epsilon: None,
            noise_n_det: None,
            samples: None,
            seed: 0,
        }
    }
}

/// A named table; figure files are written as `<name>.<ext>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub table: Table,
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let step = (stop - start) / (points - 1) as f64;
    (0..points)
        .map(|k| if k + 1 == points { stop } else { start + k as f64 * step })
        .collect()
}

fn point_error(index: usize, variable: &str, value: f64, source: dce_core::DceError) -> CliError {
    CliError::Point {
        index,
        variable: variable.into(),
        value: format!("{value}"),
        source,
    }
}

/// Evaluate ε grid points in parallel, returning the results in grid order.
fn epsilon_sweep(
    opts: &FigureOptions,
    grid: &[f64],
) -> Result<Vec<(dce_core::MomentSet, IndicatorReport)>> {
    let pair = ModePair::from_fraction(opts.config.drive_angular_frequency, opts.detuning_frac)?;
    let results: Vec<_> = grid
        .par_iter()
        .map(|&eps| evaluate(&opts.config.with_epsilon(eps), &pair, opts.method))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(k, r)| r.map_err(|e| point_error(k, "epsilon", grid[k], e)))
        .collect()
}

fn header(opts: &FigureOptions, id: FigureId, table: &mut Table) {
    base_metadata(table, &opts.config, opts.method);
    table.meta("figure", id.name());
    table.meta("detuning_frac", opts.detuning_frac);
}

fn fig1a(opts: &FigureOptions) -> Result<Vec<Dataset>> {
    let grid = linspace(0.0, FIG1_EPSILON_MAX, opts.points.unwrap_or(FIG1_POINTS));
    let thetas = linspace(0.0, 2.0 * PI, THETA_POINTS);
    let results = epsilon_sweep(opts, &grid)?;

    let mut range = Table::new(&["epsilon", "theta", "fdf"]);
    header(opts, FigureId::Fig1a, &mut range);
    range.meta("grid_order", "epsilon slowest, theta fastest");
    let mut trace = Table::new(&["epsilon", "fdf_theta0", "fdf_min", "theta_opt"]);
    header(opts, FigureId::Fig1a, &mut trace);
    for (&eps, (m, r)) in grid.iter().zip(&results) {
        for &theta in &thetas {
            range.push(vec![eps.into(), theta.into(), fdf_theta(m, theta).into()]);
        }
        trace.push(vec![eps.into(), fdf_theta(m, 0.0).into(), r.fdf_min.into(), r.theta_opt.into()]);
    }
    Ok(vec![
        Dataset {
            name: "fig1a".into(),
            table: range,
        },
        Dataset {
            name: "fig1a_theta0".into(),
            table: trace,
        },
    ])
}

fn fig1b(opts: &FigureOptions) -> Result<Vec<Dataset>> {
    let grid = linspace(0.0, FIG1_EPSILON_MAX, opts.points.unwrap_or(FIG1_POINTS));
    let results = epsilon_sweep(opts, &grid)?;
    let mut t = Table::new(&["epsilon", "sigma2", "phi", "sigma2_threshold", "nonclassical_by_sigma2"]);
    header(opts, FigureId::Fig1b, &mut t);
    for (&eps, (_, r)) in grid.iter().zip(&results) {
        t.push(vec![
            eps.into(),
            r.sigma2.into(),
            r.phi.into(),
            r.sigma2_threshold.into(),
            r.nonclassical_by_sigma2.into(),
        ]);
    }
    Ok(vec![Dataset {
        name: "fig1b".into(),
        table: t,
    }])
}

fn fig2(opts: &FigureOptions) -> Result<Vec<Dataset>> {
    let grid = linspace(0.0, FIG1_EPSILON_MAX, opts.points.unwrap_or(FIG1_POINTS));
    let results = epsilon_sweep(opts, &grid)?;
    let mut t = Table::new(&["epsilon", "logneg", "entangled"]);
    header(opts, FigureId::Fig2, &mut t);
    for (&eps, (_, r)) in grid.iter().zip(&results) {
        t.push(vec![eps.into(), r.logneg.into(), r.entangled.into()]);
    }

    let pair = ModePair::from_fraction(opts.config.drive_angular_frequency, opts.detuning_frac)?;
    let (m, _) = evaluate(&opts.config.with_epsilon(FIG2_COVARIANCE_EPSILON), &pair, opts.method)
        .map_err(|e| point_error(0, "epsilon", FIG2_COVARIANCE_EPSILON, e))?;
    let v = covariance_matrix(&m);
    let labels = ["q_minus", "p_minus", "q_plus", "p_plus"];
    let mut cov = Table::new(&["row", "q_minus", "p_minus", "q_plus", "p_plus"]);
    header(opts, FigureId::Fig2, &mut cov);
    cov.meta("epsilon", FIG2_COVARIANCE_EPSILON);
    for (i, label) in labels.iter().enumerate() {
        let mut row = vec![Cell::from(*label)];
        row.extend((0..4).map(|j| Cell::Num(v.get(i, j))));
        cov.push(row);
    }
    Ok(vec![
        Dataset {
            name: "fig2".into(),
            table: t,
        },
        Dataset {
            name: "fig2_covariance".into(),
            table: cov,
        },
    ])
}

pub const FIG3_COLUMNS: [&str; 12] = [
    "temperature_k",
    "detuning_frac",
    "neg_fdf_min",
    "logneg",
    "nonclassical_by_fdf",
    "entangled",
    "noisy_neg_fdf_min",
    "noisy_raw_logneg",
    "se_fdf_min",
    "se_logneg",
    "fdf_one_sigma",
    "logneg_one_sigma",
];

fn fig3(opts: &FigureOptions) -> Result<Vec<Dataset>> {
    let n = opts.points.unwrap_or(FIG3_POINTS);
    let eps = opts.epsilon.unwrap_or(FIG3_EPSILON);
    let n_det = opts.noise_n_det.unwrap_or(FIG3_NOISE_N_DET);
    let samples = opts.samples.unwrap_or(FIG3_SAMPLES);
    let temps = linspace(0.0, FIG3_TEMPERATURE_MAX, n);
    let detunings = linspace(FIG3_DETUNING_MIN, FIG3_DETUNING_MAX, n);
    let cells: Vec<(f64, f64)> = temps
        .iter()
        .flat_map(|&t| detunings.iter().map(move |&d| (t, d)))
        .collect();
    let base = opts.config.with_epsilon(eps);

    let rows: Vec<_> = cells
        .par_iter()
        .map(|&(t, d)| -> dce_core::Result<Vec<Cell>> {
            let cfg = base.with_temperature(t);
            let pair = ModePair::from_fraction(cfg.drive_angular_frequency, d)?;
            let (m, r) = evaluate(&cfg, &pair, opts.method)?;
            let noisy = inject_detector_noise(&covariance_matrix(&m), n_det)?;
            let noisy_fdf = fdf_min(&noisy.to_moments()).1;
            let noisy_logneg = -(2.0 * transposed_symplectic_min(&noisy)?).ln();
            let (se_f, se_l) = indicator_standard_errors(&noisy, samples)?;
            Ok(vec![
                t.into(),
                d.into(),
                (-r.fdf_min).into(),
                r.logneg.into(),
                r.nonclassical_by_fdf.into(),
                r.entangled.into(),
                (-noisy_fdf).into(),
                noisy_logneg.into(),
                se_f.into(),
                se_l.into(),
                (noisy_fdf + se_f < 0.0).into(),
                (noisy_logneg - se_l > 0.0).into(),
            ])
        })
        .collect();

    let mut t = Table::new(&FIG3_COLUMNS);
    header(opts, FigureId::Fig3, &mut t);
    t.meta("epsilon", eps);
    t.meta("grid_order", "temperature slowest, detuning fastest");
    t.meta("noise_n_det", n_det);
    t.meta("samples", samples);
    t.meta(
        "one_sigma_model",
        "indicator of V + n_det*I beyond one delta-method standard error for the given sample count",
    );
    for (k, row) in rows.into_iter().enumerate() {
        match row {
            Ok(row) => t.push(row),
            Err(e) => {
                return Err(CliError::Point {
                    index: k,
                    variable: "(temperature_k, detuning_frac)".into(),
                    value: format!("({}, {})", cells[k].0, cells[k].1),
                    source: e,
                })
            }
        }
    }
    Ok(vec![Dataset {
        name: "fig3".into(),
        table: t,
    }])
}

pub fn reproduce_figure(id: FigureId, opts: &FigureOptions) -> Result<Vec<Dataset>> {
    opts.config.validate()?;
    if let Some(p) = opts.points {
        if p < 2 {
            return Err(CliError::Spec(format!("need at least 2 points, got {p}")));
        }
    }
    let mut sets = match id {
        FigureId::Fig1a => fig1a(opts)?,
        FigureId::Fig1b => fig1b(opts)?,
        FigureId::Fig2 => fig2(opts)?,
        FigureId::Fig3 => fig3(opts)?,
    };
    for s in &mut sets {
        s.table.meta("seed", opts.seed);
    }
    Ok(sets)
}
