//! Indicators from quadrature sample records.
//!
//! Records hold the four calibrated quadratures `(i₋, q₋, i₊, q₊)`, in units
//! where the vacuum variance is ½, so they map directly onto `(q₋, p₋, q₊, p₊)`
//! of [`CovarianceMatrix`]. Uncertainties come from a row-resampling bootstrap
//! whose resample `k` draws from a ChaCha stream keyed by `(seed, k)`; results
//! are reduced in index order and are therefore independent of scheduling.

use std::io::Write;
use std::path::Path;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DceError, Result};
use crate::indicators::{fdf_min, logarithmic_negativity, transposed_symplectic_min, IndicatorReport};
use crate::model::ModePair;
use crate::moments::CovarianceMatrix;

pub const CSV_HEADER: [&str; 4] = ["i_minus", "q_minus", "i_plus", "q_plus"];
pub const DEFAULT_RESAMPLES: usize = 1000;
pub const MIN_RESAMPLES: usize = 100;

/// Per-channel affine calibration: `calibrated = (raw − offset) / gain`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub gain: [f64; 4],
    pub offset: [f64; 4],
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            gain: [1.0; 4],
            offset: [0.0; 4],
        }
    }
}

impl Calibration {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| DceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cal: Self = serde_json::from_str(&text)?;
        if cal.gain.iter().any(|g| !g.is_finite() || *g == 0.0) || cal.offset.iter().any(|o| !o.is_finite()) {
            return Err(DceError::Config(format!("{}: gains must be finite and nonzero", path.display())));
        }
        Ok(cal)
    }
}

/// Calibrated quadrature samples.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRecordSet {
    pub samples: Vec<[f64; 4]>,
    pub calibration: Calibration,
}

impl QuadratureRecordSet {
    pub fn new(samples: Vec<[f64; 4]>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(DceError::DegenerateData(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().flatten().any(|x| !x.is_finite()) {
            return Err(DceError::DegenerateData("non-finite sample".into()));
        }
        Ok(Self {
            samples,
            calibration: Calibration::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Write the samples as CSV in the load format.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| DceError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "{}", CSV_HEADER.join(",")).map_err(io_err)?;
        for s in &self.samples {
            writeln!(out, "{:e},{:e},{:e},{:e}", s[0], s[1], s[2], s[3]).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

/// Parse a quadrature CSV file, applying `calibration` when given.
pub fn load_quadrature_records(path: &Path, calibration: Option<Calibration>) -> Result<QuadratureRecordSet> {
    let file = std::fs::File::open(path).map_err(|source| DceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_quadrature_records(file, calibration)
}

pub fn parse_quadrature_records<R: std::io::Read>(reader: R, calibration: Option<Calibration>) -> Result<QuadratureRecordSet> {
    let cal = calibration.unwrap_or_default();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header_line = rdr.position().line();
    let headers = rdr.headers().map_err(|e| DceError::Parse {
        line: header_line,
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(DceError::Parse {
            line: 1,
            message: format!("expected header '{}'", CSV_HEADER.join(",")),
        });
    }

    let mut samples = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(|e| DceError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 4 {
            return Err(DceError::Parse {
                line,
                message: format!("expected 4 columns, found {}", record.len()),
            });
        }
        let mut row = [0.0; 4];
        for (k, field) in record.iter().enumerate() {
            let x: f64 = field.parse().map_err(|_| DceError::Parse {
                line,
                message: format!("'{field}' is not a number"),
            })?;
            if !x.is_finite() {
                return Err(DceError::Parse {
                    line,
                    message: format!("non-finite value '{field}'"),
                });
            }
            row[k] = (x - cal.offset[k]) / cal.gain[k];
        }
        samples.push(row);
    }
    let mut set = QuadratureRecordSet::new(samples)?;
    set.calibration = cal;
    Ok(set)
}

/// Sample covariance and its Gaussian standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub covariance: CovarianceMatrix,
    /// `√((V_ii V_jj + V_ij²)/(M−1))`, the Gaussian-data standard error of each entry.
    pub standard_errors: [[f64; 4]; 4],
    pub sample_count: usize,
}

#[derive(Clone, Copy, Default)]
struct Accumulator {
    sum: [f64; 4],
    prod: [[f64; 4]; 4],
    count: usize,
}

impl Accumulator {
    fn push(&mut self, s: &[f64; 4]) {
        for i in 0..4 {
            self.sum[i] += s[i];
            for j in i..4 {
                self.prod[i][j] += s[i] * s[j];
            }
        }
        self.count += 1;
    }

    fn covariance(&self) -> Result<[[f64; 4]; 4]> {
        let m = self.count as f64;
        let mut v = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let c = (self.prod[i][j] - self.sum[i] * self.sum[j] / m) / (m - 1.0);
                v[i][j] = c;
                v[j][i] = c;
            }
        }
        for (k, row) in v.iter().enumerate() {
            if !(row[k] > 0.0) {
                return Err(DceError::DegenerateData(format!(
                    "channel {} ({}) has zero variance",
                    k, CSV_HEADER[k]
                )));
            }
        }
        Ok(v)
    }
}

/// Symmetrized sample covariance of the four channels.
pub fn estimate_covariance(records: &QuadratureRecordSet) -> Result<CovarianceEstimate> {
    let m = records.len();
    if m < 2 {
        return Err(DceError::DegenerateData("need at least 2 samples".into()));
    }
    // Centre first: the raw-moment formula loses precision for large offsets.
    let mut mean = [0.0; 4];
    for s in &records.samples {
        for k in 0..4 {
            mean[k] += s[k];
        }
    }
    mean.iter_mut().for_each(|x| *x /= m as f64);
    let mut acc = Accumulator::default();
    for s in &records.samples {
        acc.push(&[s[0] - mean[0], s[1] - mean[1], s[2] - mean[2], s[3] - mean[3]]);
    }
    let v = acc.covariance()?;
    let mut se = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            se[i][j] = ((v[i][i] * v[j][j] + v[i][j] * v[i][j]) / (m as f64 - 1.0)).sqrt();
        }
    }
    Ok(CovarianceEstimate {
        covariance: CovarianceMatrix::from_array(v),
        standard_errors: se,
        sample_count: m,
    })
}

/// Point estimate with bootstrap spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorEstimate {
    pub point: f64,
    pub mean: f64,
    pub std_error: f64,
    /// `point − std_error`
    pub lower: f64,
    /// `point + std_error`
    pub upper: f64,
}

impl IndicatorEstimate {
    fn from_samples(point: f64, values: &[f64]) -> Self {
        let b = values.len() as f64;
        let mean = values.iter().sum::<f64>() / b;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
        let sd = var.sqrt();
        Self {
            point,
            mean,
            std_error: sd,
            lower: point - sd,
            upper: point + sd,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub point: IndicatorReport,
    pub covariance: CovarianceMatrix,
    pub fdf_min: IndicatorEstimate,
    pub sigma2: IndicatorEstimate,
    pub sigma2_threshold: IndicatorEstimate,
    pub logneg: IndicatorEstimate,
    pub sample_count: usize,
    pub resamples: usize,
    pub seed: u64,
}

/// Random stream of bootstrap resample `index` under `seed`.
pub fn resample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Nonparametric row bootstrap of all indicators.
pub fn bootstrap_indicators(records: &QuadratureRecordSet, pair: &ModePair, resamples: usize, seed: u64) -> Result<EstimateReport> {
    if resamples < MIN_RESAMPLES {
        return Err(DceError::Domain(format!(
            "at least {MIN_RESAMPLES} bootstrap resamples are required, got {resamples}"
        )));
    }
    let estimate = estimate_covariance(records)?;
    let point = IndicatorReport::from_covariance(&estimate.covariance, pair)?;
    let m = records.len();

    let draws: Vec<[f64; 4]> = (0..resamples)
        .into_par_iter()
        .map(|k| -> Result<[f64; 4]> {
            let mut rng = resample_rng(seed, k as u64);
            let mut acc = Accumulator::default();
            for _ in 0..m {
                acc.push(&records.samples[rng.gen_range(0..m)]);
            }
            let v = CovarianceMatrix::from_array(acc.covariance()?);
            let r = IndicatorReport::from_covariance(&v, pair)?;
            Ok([r.fdf_min, r.sigma2, r.sigma2_threshold, r.logneg])
        })
        .collect::<Result<Vec<_>>>()?;

    let column = |c: usize| draws.iter().map(|d| d[c]).collect::<Vec<_>>();
    Ok(EstimateReport {
        point,
        covariance: estimate.covariance,
        fdf_min: IndicatorEstimate::from_samples(point.fdf_min, &column(0)),
        sigma2: IndicatorEstimate::from_samples(point.sigma2, &column(1)),
        sigma2_threshold: IndicatorEstimate::from_samples(point.sigma2_threshold, &column(2)),
        logneg: IndicatorEstimate::from_samples(point.logneg, &column(3)),
        sample_count: m,
        resamples,
        seed,
    })
}

/// `V + n_det·I`: equal, uncorrelated classical noise on every quadrature.
pub fn inject_detector_noise(v: &CovarianceMatrix, n_det: f64) -> Result<CovarianceMatrix> {
    inject_channel_noise(v, [n_det; 4])
}

/// Per-quadrature variant of [`inject_detector_noise`].
pub fn inject_channel_noise(v: &CovarianceMatrix, noise: [f64; 4]) -> Result<CovarianceMatrix> {
    if noise.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
        return Err(DceError::Domain(format!("detector noise must be >= 0, got {noise:?}")));
    }
    Ok(v.add_diagonal(noise))
}

/// Draw `count` zero-mean Gaussian samples with covariance `v`, using its
/// symmetric square root.
pub fn sample_gaussian(v: &CovarianceMatrix, count: usize, seed: u64) -> Result<QuadratureRecordSet> {
    let mat = Matrix4::from_fn(|i, j| v.get(i, j));
    let eig = SymmetricEigen::new(mat);
    if eig.eigenvalues.iter().any(|&l| l < -1e-12) {
        return Err(DceError::InvalidCovariance("covariance is not positive semidefinite".into()));
    }
    let root = eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt())) * eig.eigenvectors.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..count)
        .map(|_| {
            let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            let x = root * z;
            [x[0], x[1], x[2], x[3]]
        })
        .collect();
    QuadratureRecordSet::new(samples)
}

/// Delta-method standard errors `(fdf_min, 𝒩)` of the indicators estimated
/// from `count` Gaussian samples of `v`, using
/// `Cov(V̂_ij, V̂_kl) = (V_ik V_jl + V_il V_jk) / count`.
///
/// The 𝒩 error is that of the unclamped `−ln(2ν₋)`.
pub fn indicator_standard_errors(v: &CovarianceMatrix, count: usize) -> Result<(f64, f64)> {
    let idx: Vec<(usize, usize)> = (0..4).flat_map(|i| (i..4).map(move |j| (i, j))).collect();
    let base = *v.as_array();
    let fdf = |a: &[[f64; 4]; 4]| fdf_min(&CovarianceMatrix::from_array(*a).to_moments()).1;
    let raw_logneg = |a: &[[f64; 4]; 4]| -> Result<f64> {
        Ok(-(2.0 * transposed_symplectic_min(&CovarianceMatrix::from_array(*a))?).ln())
    };

    let h = 1e-6;
    let mut grad_f = Vec::with_capacity(idx.len());
    let mut grad_l = Vec::with_capacity(idx.len());
    for &(i, j) in &idx {
        let mut up = base;
        let mut dn = base;
        up[i][j] += h;
        dn[i][j] -= h;
        if i != j {
            up[j][i] += h;
            dn[j][i] -= h;
        }
        grad_f.push((fdf(&up) - fdf(&dn)) / (2.0 * h));
        grad_l.push((raw_logneg(&up)? - raw_logneg(&dn)?) / (2.0 * h));
    }
    let cov = |(i, j): (usize, usize), (k, l): (usize, usize)| (base[i][k] * base[j][l] + base[i][l] * base[j][k]) / count as f64;
    let mut var_f = 0.0;
    let mut var_l = 0.0;
    for (a, &pa) in idx.iter().enumerate() {
        for (b, &pb) in idx.iter().enumerate() {
            let c = cov(pa, pb);
            var_f += grad_f[a] * grad_f[b] * c;
            var_l += grad_l[a] * grad_l[b] * c;
        }
    }
    Ok((var_f.max(0.0).sqrt(), var_l.max(0.0).sqrt()))
}

/// Smallest `n_det` with `𝒩(V + n_det·I) = 0`, by bisection.
pub fn noise_to_separability(v: &CovarianceMatrix) -> Result<f64> {
    if logarithmic_negativity(v)? == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while logarithmic_negativity(&v.add_identity(hi))? > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if logarithmic_negativity(&v.add_identity(mid))? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(hi)
}
