//! Acceptance suite. Run with `cargo test -p dce-cli --test acceptance`.
//!
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::time::Instant;

use dce_cli::sweep::{run_sweep, SweepSpec, SweepVariable};
use dce_cli::{reproduce_figure, FigureId, FigureOptions, Table};
use dce_core::estimator::{bootstrap_indicators, sample_gaussian};
use dce_core::indicators::{fdf_min, logarithmic_negativity, onset_estimates};
use dce_core::model::modulation_parameter;
use dce_core::moments::{covariance_matrix, output_moments};
use dce_core::scattering::solve_pair;
use dce_core::{CircuitConfig, CovarianceMatrix, IndicatorReport, Method, ModePair, MomentSet};

// Criterion 1
const ONSET_WINDOW: (f64, f64) = (0.05, 0.07);
const ONSET_STEP: f64 = 0.001;
// Criterion 2
const SLOPE_TARGET: f64 = 0.28;
const SLOPE_REL_TOL: f64 = 0.05;
const SLOPE_DETUNING: f64 = 0.05;
// Criterion 3
const THRESHOLD_WINDOW: (f64, f64) = (0.03, 0.05);
const OPERATING_EPSILON: (f64, f64) = (0.1, 0.5);
// Criterion 4
const CROSSING_REL_TOL: f64 = 0.20;
// Criterion 5
const DEFECT_TOL: f64 = 1e-9;
const UNITARITY_EPSILON: [f64; 3] = [0.1, 0.3, 0.5];
const UNITARITY_DETUNING: [f64; 3] = [0.05, 0.15, 0.3];
// Criterion 6
const ORACLE_EPSILON: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
const ORACLE_LAMBDA2_FACTOR: f64 = 3.0;
const ORACLE_MIN_ORDER: f64 = 1.8;
const ORACLE_FLOOR: f64 = 1e-300;
// Criterion 7
const TMSV_TOL: f64 = 1e-10;
const TMSV_R: [f64; 3] = [0.1, 0.5, 1.0];
// Criterion 9
const ROUND_TRIP_EPSILON: f64 = 0.3;
const ROUND_TRIP_SAMPLES: usize = 100_000;
const ROUND_TRIP_REPS: u64 = 20;
const ROUND_TRIP_RESAMPLES: usize = 200;
const ROUND_TRIP_COVERAGE: f64 = 0.60;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fig_config() -> CircuitConfig {
    CircuitConfig::default()
}

fn fig_pair(cfg: &CircuitConfig, frac: f64) -> ModePair {
    ModePair::from_fraction(cfg.drive_angular_frequency, frac).unwrap()
}

fn column(t: &Table, name: &str) -> Vec<f64> {
    t.column(name).unwrap_or_else(|| panic!("missing column {name}"))
}

/// Linear interpolation of the first sign change of `y` from `+` to `−`.
fn first_crossing(x: &[f64], y: &[f64]) -> Option<f64> {
    (1..x.len())
        .find(|&k| y[k - 1] > 0.0 && y[k] <= 0.0)
        .map(|k| x[k - 1] + (x[k] - x[k - 1]) * y[k - 1] / (y[k - 1] - y[k]))
}

fn entanglement_onset() -> Outcome {
    let points = (0.1 / ONSET_STEP).round() as usize + 1;
    let spec = SweepSpec::new(SweepVariable::Epsilon, 0.0, 0.1, points);
    let t = run_sweep(&spec).unwrap();
    let eps = column(&t, "epsilon");
    let logneg = column(&t, "logneg");
    match eps.iter().zip(&logneg).find(|(_, &n)| n > 0.0) {
        Some((&e, _)) => outcome(
            (ONSET_WINDOW.0..=ONSET_WINDOW.1).contains(&e),
            format!("first eps with N > 0: {e:.3} (window [{}, {}])", ONSET_WINDOW.0, ONSET_WINDOW.1),
        ),
        None => outcome(false, "N stays zero up to eps = 0.1".into()),
    }
}

fn logneg_slope() -> Outcome {
    let mut opts = FigureOptions::default();
    opts.config = fig_config().with_temperature(0.0);
    opts.detuning_frac = SLOPE_DETUNING;
    let sets = reproduce_figure(FigureId::Fig2, &opts).unwrap();
    let t = &sets[0].table;
    let eps = column(t, "epsilon");
    let n = column(t, "logneg");
    // fig2 grid has step 0.01: slopes over [0, 0.01] and at 0.005 by halving.
    let coarse = (n[1] - n[0]) / (eps[1] - eps[0]);
    let cfg = fig_config().with_temperature(0.0).with_epsilon(0.005);
    let pair = fig_pair(&cfg, SLOPE_DETUNING);
    let m = output_moments(&cfg, &pair, Method::Numeric).unwrap();
    let fine = logarithmic_negativity(&covariance_matrix(&m)).unwrap() / 0.005;
    let rel = |s: f64| (s - SLOPE_TARGET).abs() / SLOPE_TARGET;
    outcome(
        rel(coarse) <= SLOPE_REL_TOL && rel(fine) <= SLOPE_REL_TOL,
        format!(
            "dN/deps = {coarse:.4} (eps <= 0.01), {fine:.4} (eps <= 0.005) at T = 0, detuning {SLOPE_DETUNING}; target {SLOPE_TARGET} +/- {:.0}%",
            SLOPE_REL_TOL * 100.0
        ),
    )
}

fn sigma2_boundary() -> Outcome {
    let sets = reproduce_figure(FigureId::Fig1b, &FigureOptions::default()).unwrap();
    let t = &sets[0].table;
    let eps = column(t, "epsilon");
    let thr = column(t, "sigma2_threshold");
    let region: Vec<f64> = eps
        .iter()
        .zip(&thr)
        .filter(|(e, _)| (OPERATING_EPSILON.0..=OPERATING_EPSILON.1).contains(*e))
        .map(|(_, &v)| v)
        .collect();
    let lo = region.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = region.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        !region.is_empty() && lo >= THRESHOLD_WINDOW.0 && hi <= THRESHOLD_WINDOW.1,
        format!(
            "threshold over eps in [{}, {}]: {lo:.4} .. {hi:.4} (window [{}, {}])",
            OPERATING_EPSILON.0, OPERATING_EPSILON.1, THRESHOLD_WINDOW.0, THRESHOLD_WINDOW.1
        ),
    )
}

fn nonclassicality_crossing() -> Outcome {
    let spec = SweepSpec::new(SweepVariable::Epsilon, 0.0, 0.3, 301);
    let t = run_sweep(&spec).unwrap();
    let cfg = fig_config();
    let (eps_star, _) = onset_estimates(&cfg, &fig_pair(&cfg, 0.15));
    match first_crossing(&column(&t, "epsilon"), &column(&t, "fdf_min")) {
        Some(x) => {
            let rel = (x - eps_star).abs() / eps_star;
            outcome(
                rel <= CROSSING_REL_TOL,
                format!("numeric crossing {x:.4} vs closed form {eps_star:.4}: rel. diff {rel:.3} (tol {CROSSING_REL_TOL})"),
            )
        }
        None => outcome(false, "fdf_min does not cross zero for eps <= 0.3".into()),
    }
}

fn unitarity_suite() -> Outcome {
    let mut worst = 0.0f64;
    for &eps in &UNITARITY_EPSILON {
        for &frac in &UNITARITY_DETUNING {
            let cfg = fig_config().with_epsilon(eps);
            let (p, m) = match solve_pair(&cfg, &fig_pair(&cfg, frac)) {
                Ok(rows) => rows,
                Err(e) => return outcome(false, format!("eps {eps}, detuning {frac}: {e}")),
            };
            worst = worst.max(p.defect).max(m.defect);
        }
    }
    outcome(worst < DEFECT_TOL, format!("max commutator defect {worst:.2e} on 3x3 grid (tol {DEFECT_TOL:.0e})"))
}

fn oracle_equivalence() -> Outcome {
    let cfg = fig_config();
    let pair = fig_pair(&cfg, 0.15);
    let mut devs = Vec::new();
    let mut within = true;
    let mut worst_ratio = 0.0f64;
    for &eps in &ORACLE_EPSILON {
        let c = cfg.with_epsilon(eps);
        let num = output_moments(&c, &pair, Method::Numeric).unwrap();
        let pert = output_moments(&c, &pair, Method::Perturbative).unwrap();
        let lambda = modulation_parameter(&c, &pair);
        let dev = num.max_relative_difference(&pert, ORACLE_FLOOR);
        let bound = ORACLE_LAMBDA2_FACTOR * lambda * lambda;
        within &= dev <= bound;
        worst_ratio = worst_ratio.max(dev / bound);
        devs.push(dev);
    }
    let orders: Vec<f64> = devs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        within && min_order >= ORACLE_MIN_ORDER,
        format!(
            "rel. deviation {:.3e} .. {:.3e}, worst dev/(3 lambda^2) = {worst_ratio:.3e}, min order {min_order:.2} (need <= 1 and >= {ORACLE_MIN_ORDER})",
            devs.iter().copied().fold(f64::INFINITY, f64::min),
            devs.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn gaussian_oracles() -> Outcome {
    let mut worst = 0.0f64;
    for &r in &TMSV_R {
        let n = logarithmic_negativity(&CovarianceMatrix::two_mode_squeezed(r)).unwrap();
        worst = worst.max((n - 2.0 * r).abs());
    }
    let vac = logarithmic_negativity(&CovarianceMatrix::vacuum()).unwrap();
    let thermal_min = [(0.0, 0.0), (0.01, 0.5), (1.0, 3.0), (10.0, 0.2)]
        .iter()
        .map(|&(a, b)| fdf_min(&MomentSet::thermal(a, b)).1)
        .fold(f64::INFINITY, f64::min);
    outcome(
        worst <= TMSV_TOL && vac == 0.0 && thermal_min >= 0.0,
        format!("max |N(TMSV) - 2r| = {worst:.1e}, N(vacuum) = {vac}, min thermal fdf_min = {thermal_min:.3e}"),
    )
}

fn region_containment() -> Outcome {
    let sets = reproduce_figure(FigureId::Fig3, &FigureOptions::default()).unwrap();
    let t = &sets[0].table;
    let fdf = column(t, "nonclassical_by_fdf");
    let ent = column(t, "entangled");
    let n_fdf = fdf.iter().filter(|&&f| f == 1.0).count();
    let n_ent = ent.iter().filter(|&&e| e == 1.0).count();
    let violations = fdf.iter().zip(&ent).filter(|(&f, &e)| f == 1.0 && e == 0.0).count();
    outcome(
        violations == 0 && n_ent > n_fdf,
        format!(
            "{} cells: fdf < 0 in {n_fdf}, N > 0 in {n_ent}, fdf-only cells {violations}",
            fdf.len()
        ),
    )
}

fn estimator_round_trip() -> Outcome {
    let cfg = fig_config().with_epsilon(ROUND_TRIP_EPSILON);
    let pair = fig_pair(&cfg, 0.15);
    let m = output_moments(&cfg, &pair, Method::Numeric).unwrap();
    let v = covariance_matrix(&m);
    let model = IndicatorReport::from_covariance(&v, &pair).unwrap();
    let mut hits = [0usize; 4];
    for rep in 0..ROUND_TRIP_REPS {
        let data = sample_gaussian(&v, ROUND_TRIP_SAMPLES, 1000 + rep).unwrap();
        let e = bootstrap_indicators(&data, &pair, ROUND_TRIP_RESAMPLES, rep).unwrap();
        for (k, (est, truth)) in [
            (e.fdf_min, model.fdf_min),
            (e.sigma2, model.sigma2),
            (e.sigma2_threshold, model.sigma2_threshold),
            (e.logneg, model.logneg),
        ]
        .iter()
        .enumerate()
        {
            hits[k] += usize::from(est.contains(*truth));
        }
    }
    let reps = ROUND_TRIP_REPS as f64;
    let coverage: Vec<f64> = hits.iter().map(|&h| h as f64 / reps).collect();
    let pass = coverage.iter().all(|&c| c >= ROUND_TRIP_COVERAGE);
    outcome(
        pass,
        format!(
            "one-sigma coverage over {ROUND_TRIP_REPS} reps (M = {ROUND_TRIP_SAMPLES}, B = {ROUND_TRIP_RESAMPLES}): fdf_min {:.2}, sigma2 {:.2}, threshold {:.2}, N {:.2} (need >= {ROUND_TRIP_COVERAGE})",
            coverage[0], coverage[1], coverage[2], coverage[3]
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("entanglement onset", entanglement_onset),
        ("log-negativity slope", logneg_slope),
        ("sigma2 boundary", sigma2_boundary),
        ("nonclassicality crossing", nonclassicality_crossing),
        ("Bogoliubov unitarity", unitarity_suite),
        ("perturbative-oracle equivalence", oracle_equivalence),
        ("analytic Gaussian oracles", gaussian_oracles),
        ("Fig. 3 region containment", region_containment),
        ("estimator round trip", estimator_round_trip),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{status}] {name}: {} ({:.1}s)",
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
