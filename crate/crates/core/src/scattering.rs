//! Linear input/output map of the modulated boundary.
//!
//! # Ladder equations
//!
//! Writing the field at the boundary as a superposition of incoming `a(ω)` and
//! outgoing `b(ω)` waves (flux normalization, `a(−ω) = a†(ω)`), the boundary
//! condition `(1 + ε cos ω_d t) Φ(0,t) + L_eff0 ∂ₓΦ(0,t) = 0` couples each
//! frequency `ω_n = ω₀ + n ω_d` to its two neighbours:
//!
//! ```text
//! (1 + iκ_n) a_n + (1 − iκ_n) b_n
//!     + (ε/2) √|ω_n| [ (a+b)_{n+1} / √|ω_{n+1}| + (a+b)_{n−1} / √|ω_{n−1}| ] = 0
//! ```
//!
//! with `κ_n = L_eff0 ω_n / v`. For the linear effective-length form
//! `L_eff(t) = L_eff0 (1 − ε cos ω_d t)` the neighbour terms read
//! `−(ε/2) iκ_{n±1} √|ω_n| (a−b)_{n±1} / √|ω_{n±1}|` instead.
//!
//! The system is tridiagonal in `n`. It is truncated at `|n| ≤ N` by dropping
//! couplings that leave the ladder, factored once, and solved for one unit
//! input per column. The `n = 0` component of each solution is the coefficient
//! of that input in `b(ω₀)`; inputs at negative ladder frequencies are
//! creation operators and give the anomalous amplitudes.
//!
//! # Reference planes
//!
//! The static boundary reflects with `−(1 + iκ)/(1 − iκ) = −e^{2i atan κ}`.
//! Amplitudes are reported with input and output modes referred to the
//! effective mirror plane, i.e. every mode at `ω` is rotated by `e^{i atan κ(ω)}`.
//! This is a local phase convention: the static mirror becomes `b = −a` and no
//! indicator depends on it.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::TridiagonalLu;
use crate::error::{DceError, Result};
use crate::model::{modulation_parameter, BoundaryForm, CircuitConfig, ModePair, MAX_TRUNCATION};

/// Ladder frequencies closer to zero than this fraction of ω_d are rejected.
pub const ZERO_FREQUENCY_TOL: f64 = 1e-9;

/// One entry of a scattering row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    /// Positive input frequency ν, rad/s.
    pub frequency: f64,
    pub value: Complex64,
}

/// `b(ω₀) = Σ_ν α(ν) a(ν) + Σ_ν β(ν) a†(ν)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringRow {
    /// Output frequency ω₀, rad/s.
    pub frequency: f64,
    /// Normal amplitudes α, coefficients of `a(ν)`.
    pub normal: Vec<Amplitude>,
    /// Anomalous amplitudes β, coefficients of `a†(ν)`.
    pub anomalous: Vec<Amplitude>,
    /// Ladder half-width the row was computed with.
    pub truncation: usize,
    /// `|Σ|α|² − Σ|β|² − 1|`.
    pub defect: f64,
}

impl ScatteringRow {
    /// Row of a perfect static mirror, `b(ω₀) = −a(ω₀)`.
    pub fn mirror(frequency: f64, truncation: usize) -> Self {
        Self {
            frequency,
            normal: vec![Amplitude {
                frequency,
                value: Complex64::new(-1.0, 0.0),
            }],
            anomalous: Vec::new(),
            truncation,
            defect: 0.0,
        }
    }

    /// Normal amplitude at `frequency` (matched to `tol`), zero if absent.
    pub fn alpha(&self, frequency: f64, tol: f64) -> Complex64 {
        lookup(&self.normal, frequency, tol)
    }

    /// Anomalous amplitude at `frequency` (matched to `tol`), zero if absent.
    pub fn beta(&self, frequency: f64, tol: f64) -> Complex64 {
        lookup(&self.anomalous, frequency, tol)
    }

    /// Photon number of the output mode for vacuum input, `Σ|β|²`.
    pub fn vacuum_flux(&self) -> f64 {
        self.anomalous.iter().map(|a| a.value.norm_sqr()).sum()
    }
}

fn lookup(entries: &[Amplitude], frequency: f64, tol: f64) -> Complex64 {
    entries
        .iter()
        .find(|a| (a.frequency - frequency).abs() <= tol)
        .map(|a| a.value)
        .unwrap_or_default()
}

/// `|Σ|α|² − Σ|β|² − 1|`; zero for a row that preserves `[b, b†] = 1`.
pub fn commutator_defect(row: &ScatteringRow) -> f64 {
    let normal: f64 = row.normal.iter().map(|a| a.value.norm_sqr()).sum();
    let anomalous: f64 = row.anomalous.iter().map(|a| a.value.norm_sqr()).sum();
    (normal - anomalous - 1.0).abs()
}

/// First-order rows `b± = −a± − iλ a†∓` for the two modes of `pair`,
/// returned as `(row at ω₊, row at ω₋)`.
pub fn perturbative_amplitudes(config: &CircuitConfig, pair: &ModePair) -> (ScatteringRow, ScatteringRow) {
    let lambda = modulation_parameter(config, pair);
    let row = |own: f64, partner: f64| {
        let mut r = ScatteringRow::mirror(own, 1);
        if lambda != 0.0 {
            r.anomalous.push(Amplitude {
                frequency: partner,
                value: Complex64::new(0.0, -lambda),
            });
        }
        r.defect = commutator_defect(&r);
        r
    };
    (row(pair.plus(), pair.minus()), row(pair.minus(), pair.plus()))
}

/// Frequencies `ω₀ + n ω_d`, `n ∈ [−N, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderIndexSet {
    base: f64,
    drive: f64,
    half_width: usize,
}

impl LadderIndexSet {
    pub fn new(base: f64, drive: f64, half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(DceError::Domain("ladder half-width must be at least 1".into()));
        }
        if !(base.is_finite() && drive.is_finite() && drive > 0.0) {
            return Err(DceError::Domain(format!("bad ladder base {base} / drive {drive}")));
        }
        // ω_n ≈ 0 can only happen for the n nearest to −base/ω_d.
        let nearest = (-base / drive).round();
        if nearest.abs() <= half_width as f64 {
            let w = base + nearest * drive;
            if w.abs() < ZERO_FREQUENCY_TOL * drive {
                return Err(DceError::Domain(format!(
                    "ladder frequency {w:.3e} rad/s at n = {nearest} collides with zero"
                )));
            }
        }
        Ok(Self {
            base,
            drive,
            half_width,
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn len(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `ω_n` for ladder index `n`.
    pub fn frequency(&self, n: i64) -> f64 {
        self.base + n as f64 * self.drive
    }

    /// Frequencies in storage order (n = −N first).
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.half_width as i64;
        (-n..=n).map(|k| self.frequency(k)).collect()
    }
}

/// The truncated ladder system `M b = −P a`.
#[derive(Debug, Clone)]
pub struct LadderSystem {
    pub ladder: LadderIndexSet,
    /// Tridiagonal coefficients of the outgoing amplitudes (sub, diag, sup).
    pub outgoing: [Vec<Complex64>; 3],
    /// Tridiagonal coefficients of the incoming amplitudes (sub, diag, sup).
    pub incoming: [Vec<Complex64>; 3],
}

impl LadderSystem {
    pub fn assemble(config: &CircuitConfig, ladder: LadderIndexSet) -> Self {
        let freqs = ladder.frequencies();
        let dim = freqs.len();
        let eps = config.epsilon;
        let i = Complex64::i();

        let mut m = [
            vec![Complex64::default(); dim - 1],
            vec![Complex64::default(); dim],
            vec![Complex64::default(); dim - 1],
        ];
        let mut p = m.clone();

        for (k, &w) in freqs.iter().enumerate() {
            let kappa = config.kappa(w);
            m[1][k] = Complex64::new(1.0, -kappa);
            p[1][k] = Complex64::new(1.0, kappa);
        }
        // Row k couples to column j = k ± 1.
        let coupling = |k: usize, j: usize| -> (Complex64, Complex64) {
            let ratio = (freqs[k].abs() / freqs[j].abs()).sqrt();
            match config.boundary_form {
                BoundaryForm::JosephsonExact => {
                    let c = Complex64::new(0.5 * eps * ratio, 0.0);
                    (c, c)
                }
                BoundaryForm::LinearLength => {
                    let c = 0.5 * eps * ratio * config.kappa(freqs[j]) * i;
                    (c, -c)
                }
            }
        };
        for k in 0..dim - 1 {
            let (mb, pa) = coupling(k, k + 1);
            m[2][k] = mb;
            p[2][k] = pa;
            let (mb, pa) = coupling(k + 1, k);
            m[0][k] = mb;
            p[0][k] = pa;
        }
        Self {
            ladder,
            outgoing: m,
            incoming: p,
        }
    }

    /// Write the outgoing-amplitude matrix in MatrixMarket coordinate format.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let dim = self.ladder.len();
        let nnz = dim + 2 * (dim - 1);
        writeln!(out, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(out, "% ladder base {:.12e} rad/s, half-width {}", self.ladder.base(), self.ladder.half_width())?;
        for (k, w) in self.ladder.frequencies().iter().enumerate() {
            writeln!(out, "% index {} omega {:.12e}", k + 1, w)?;
        }
        writeln!(out, "{dim} {dim} {nnz}")?;
        let [sub, diag, sup] = &self.outgoing;
        for k in 0..dim {
            if k > 0 {
                writeln!(out, "{} {} {:.17e} {:.17e}", k + 1, k, sub[k - 1].re, sub[k - 1].im)?;
            }
            writeln!(out, "{} {} {:.17e} {:.17e}", k + 1, k + 1, diag[k].re, diag[k].im)?;
            if k + 1 < dim {
                writeln!(out, "{} {} {:.17e} {:.17e}", k + 1, k + 2, sup[k].re, sup[k].im)?;
            }
        }
        Ok(())
    }
}

/// Coefficients of `b(ω₀)` on every incoming ladder operator `a(ω_n)`,
/// referred to the effective mirror plane.
#[derive(Debug, Clone)]
pub struct LadderSolution {
    pub frequencies: Vec<f64>,
    pub gains: Vec<Complex64>,
}

/// Solve the truncated ladder of half-width `half_width` around `base` without
/// any convergence control. `base` may be negative (the row of `b†(|base|)`).
pub fn solve_ladder(config: &CircuitConfig, base: f64, half_width: usize) -> Result<LadderSolution> {
    let ladder = LadderIndexSet::new(base, config.drive_angular_frequency, half_width)?;
    let system = LadderSystem::assemble(config, ladder);
    let [m_sub, m_diag, m_sup] = &system.outgoing;
    let lu = TridiagonalLu::factor(m_sub, m_diag, m_sup)?;
    let [p_sub, p_diag, p_sup] = &system.incoming;

    let freqs = system.ladder.frequencies();
    let dim = freqs.len();
    let centre = half_width;
    let plane = |w: f64| {
        let psi = config.kappa(w).atan();
        Complex64::from_polar(1.0, -psi)
    };
    let out_phase = plane(base);

    let mut gains = Vec::with_capacity(dim);
    let mut rhs = vec![Complex64::default(); dim];
    for col in 0..dim {
        rhs.iter_mut().for_each(|z| *z = Complex64::default());
        rhs[col] = -p_diag[col];
        if col > 0 {
            rhs[col - 1] = -p_sup[col - 1];
        }
        if col + 1 < dim {
            rhs[col + 1] = -p_sub[col];
        }
        lu.solve_in_place(&mut rhs);
        gains.push(rhs[centre] * out_phase * plane(freqs[col]));
    }
    Ok(LadderSolution {
        frequencies: freqs,
        gains,
    })
}

/// Scattering row of `b(ω₀)` at a fixed truncation, no adaptation.
pub fn solve_fixed(config: &CircuitConfig, omega0: f64, half_width: usize) -> Result<ScatteringRow> {
    check_output_frequency(config, omega0)?;
    if config.epsilon == 0.0 {
        return Ok(ScatteringRow::mirror(omega0, half_width));
    }
    let sol = solve_ladder(config, omega0, half_width)?;
    let mut row = ScatteringRow {
        frequency: omega0,
        normal: Vec::new(),
        anomalous: Vec::new(),
        truncation: half_width,
        defect: 0.0,
    };
    for (&w, &g) in sol.frequencies.iter().zip(&sol.gains) {
        if g == Complex64::default() {
            continue;
        }
        let entry = Amplitude {
            frequency: w.abs(),
            value: g,
        };
        if w > 0.0 {
            row.normal.push(entry);
        } else {
            row.anomalous.push(entry);
        }
    }
    row.defect = commutator_defect(&row);
    Ok(row)
}

fn check_output_frequency(config: &CircuitConfig, omega0: f64) -> Result<()> {
    config.validate()?;
    let wd = config.drive_angular_frequency;
    let tol = ZERO_FREQUENCY_TOL * wd;
    if !(omega0 > tol && omega0 < wd - tol) {
        return Err(DceError::Domain(format!(
            "output frequency {omega0:.6e} rad/s must lie inside (0, ω_d = {wd:.6e})"
        )));
    }
    Ok(())
}

fn max_change(a: &ScatteringRow, b: &ScatteringRow, tol: f64) -> f64 {
    let side = |x: &[Amplitude], y: &[Amplitude]| {
        let forward = x
            .iter()
            .map(|e| (e.value - lookup(y, e.frequency, tol)).norm())
            .fold(0.0, f64::max);
        let backward = y
            .iter()
            .map(|e| (e.value - lookup(x, e.frequency, tol)).norm())
            .fold(0.0, f64::max);
        forward.max(backward)
    };
    side(&a.normal, &b.normal).max(side(&a.anomalous, &b.anomalous))
}

/// Converged scattering row of `b(ω₀)`.
///
/// Starts at `config.truncation` and doubles the ladder half-width until both
/// the commutator defect and every amplitude change fall below
/// `config.convergence_tol`. The returned row records the final half-width.
pub fn solve_scattering(config: &CircuitConfig, omega0: f64) -> Result<ScatteringRow> {
    check_output_frequency(config, omega0)?;
    let tol = config.convergence_tol;
    let match_tol = ZERO_FREQUENCY_TOL * config.drive_angular_frequency;
    let mut n = config.truncation;
    let mut previous = solve_fixed(config, omega0, n)?;
    let mut history = vec![previous.defect];
    if config.epsilon == 0.0 {
        return Ok(previous);
    }
    while 2 * n <= MAX_TRUNCATION {
        n *= 2;
        let row = solve_fixed(config, omega0, n)?;
        history.push(row.defect);
        if row.defect < tol && max_change(&previous, &row, match_tol) < tol {
            return Ok(row);
        }
        previous = row;
    }
    Err(DceError::NotConverged {
        omega: omega0,
        truncation: n,
        defects: history,
    })
}

/// Converged rows `(ω₊, ω₋)` for a mode pair.
pub fn solve_pair(config: &CircuitConfig, pair: &ModePair) -> Result<(ScatteringRow, ScatteringRow)> {
    let plus = solve_scattering(config, pair.plus())?;
    let minus = solve_scattering(config, pair.minus())?;
    Ok((plus, minus))
}
