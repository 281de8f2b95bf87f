//! Output second moments for a thermal input and the two-mode quadrature
//! covariance matrix.
//!
//! A row `b(ω₀) = Σ α(ν) a(ν) + β(ν) a†(ν)` is contracted against the thermal
//! input `⟨a†(ν)a(ν')⟩ = n̄(ν) δ`, `⟨a(ν)a†(ν')⟩ = (n̄(ν)+1) δ`, `⟨aa⟩ = 0`.
//! Frequencies of the two rows are matched to `1e-9 ω_d`, so the degenerate
//! pair `δω = 0` produces the single-mode terms `S±` and `X` automatically.
//!
//! The continuum flux densities at the analysis frequencies are treated as
//! single-mode occupations; every indicator built on them is a ratio in which
//! the detection bandwidth cancels.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CircuitConfig, ModePair, ThermalInput};
use crate::scattering::{perturbative_amplitudes, solve_pair, Amplitude, ScatteringRow, ZERO_FREQUENCY_TOL};

/// Which input/output map feeds the moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// First-order rows `b± = −a± − iλ a†∓`.
    Perturbative,
    /// Converged Floquet ladder rows.
    #[default]
    Numeric,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "perturbative" => Ok(Method::Perturbative),
            "numeric" => Ok(Method::Numeric),
            other => Err(format!("unknown method '{other}' (expected perturbative or numeric)")),
        }
    }
}

/// All second moments of the output modes `b₊ = b(ω₊)`, `b₋ = b(ω₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "MomentFields", into = "MomentFields")]
pub struct MomentSet {
    /// `⟨b₊†b₊⟩`
    pub n_plus: f64,
    /// `⟨b₋†b₋⟩`
    pub n_minus: f64,
    /// `⟨b₊b₋⟩`
    pub w: Complex64,
    /// `⟨b₊b₊⟩`
    pub s_plus: Complex64,
    /// `⟨b₋b₋⟩`
    pub s_minus: Complex64,
    /// `⟨b₊†b₋⟩`
    pub x: Complex64,
}

#[derive(Serialize, Deserialize)]
struct MomentFields {
    n_plus: f64,
    n_minus: f64,
    w_re: f64,
    w_im: f64,
    s_plus_re: f64,
    s_plus_im: f64,
    s_minus_re: f64,
    s_minus_im: f64,
    x_re: f64,
    x_im: f64,
}

impl From<MomentFields> for MomentSet {
    fn from(f: MomentFields) -> Self {
        Self {
            n_plus: f.n_plus,
            n_minus: f.n_minus,
            w: Complex64::new(f.w_re, f.w_im),
            s_plus: Complex64::new(f.s_plus_re, f.s_plus_im),
            s_minus: Complex64::new(f.s_minus_re, f.s_minus_im),
            x: Complex64::new(f.x_re, f.x_im),
        }
    }
}

impl From<MomentSet> for MomentFields {
    fn from(m: MomentSet) -> Self {
        Self {
            n_plus: m.n_plus,
            n_minus: m.n_minus,
            w_re: m.w.re,
            w_im: m.w.im,
            s_plus_re: m.s_plus.re,
            s_plus_im: m.s_plus.im,
            s_minus_re: m.s_minus.re,
            s_minus_im: m.s_minus.im,
            x_re: m.x.re,
            x_im: m.x.im,
        }
    }
}

impl MomentSet {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Uncorrelated thermal modes.
    pub fn thermal(n_plus: f64, n_minus: f64) -> Self {
        Self {
            n_plus,
            n_minus,
            ..Self::default()
        }
    }

    /// Contract a pair of scattering rows against a thermal input.
    pub fn from_rows(plus: &ScatteringRow, minus: &ScatteringRow, input: &ThermalInput, match_tol: f64) -> Self {
        Self {
            n_plus: normal_moment(plus, plus, input, match_tol).re,
            n_minus: normal_moment(minus, minus, input, match_tol).re,
            w: anomalous_moment(plus, minus, input, match_tol),
            s_plus: anomalous_moment(plus, plus, input, match_tol),
            s_minus: anomalous_moment(minus, minus, input, match_tol),
            x: normal_moment(plus, minus, input, match_tol),
        }
    }

    /// Per-entry maximum of `|self − other| / max(|other|, floor)`.
    pub fn max_relative_difference(&self, other: &MomentSet, floor: f64) -> f64 {
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(floor);
        [
            rel(self.n_plus.into(), other.n_plus.into()),
            rel(self.n_minus.into(), other.n_minus.into()),
            rel(self.w, other.w),
            rel(self.s_plus, other.s_plus),
            rel(self.s_minus, other.s_minus),
            rel(self.x, other.x),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn pairs<'a>(
    left: &'a [Amplitude],
    right: &'a [Amplitude],
    tol: f64,
) -> impl Iterator<Item = (f64, Complex64, Complex64)> + 'a {
    left.iter().flat_map(move |l| {
        right
            .iter()
            .filter(move |r| (r.frequency - l.frequency).abs() <= tol)
            .map(move |r| (l.frequency, l.value, r.value))
    })
}

/// `⟨b_r† b_s⟩`.
fn normal_moment(r: &ScatteringRow, s: &ScatteringRow, input: &ThermalInput, tol: f64) -> Complex64 {
    let from_normal: Complex64 = pairs(&r.normal, &s.normal, tol)
        .map(|(nu, a, b)| a.conj() * b * input.occupation(nu))
        .sum();
    let from_anomalous: Complex64 = pairs(&r.anomalous, &s.anomalous, tol)
        .map(|(nu, a, b)| a.conj() * b * (input.occupation(nu) + 1.0))
        .sum();
    from_normal + from_anomalous
}

/// `⟨b_r b_s⟩`.
fn anomalous_moment(r: &ScatteringRow, s: &ScatteringRow, input: &ThermalInput, tol: f64) -> Complex64 {
    let aa_dag: Complex64 = pairs(&r.normal, &s.anomalous, tol)
        .map(|(nu, a, b)| a * b * (input.occupation(nu) + 1.0))
        .sum();
    let a_dag_a: Complex64 = pairs(&r.anomalous, &s.normal, tol)
        .map(|(nu, a, b)| a * b * input.occupation(nu))
        .sum();
    aa_dag + a_dag_a
}

/// Output moments of the mode pair for the thermal input of `config`.
pub fn output_moments(config: &CircuitConfig, pair: &ModePair, method: Method) -> Result<MomentSet> {
    config.validate()?;
    let (plus, minus) = match method {
        Method::Perturbative => perturbative_amplitudes(config, pair),
        Method::Numeric => solve_pair(config, pair)?,
    };
    let tol = ZERO_FREQUENCY_TOL * config.drive_angular_frequency;
    Ok(MomentSet::from_rows(&plus, &minus, &config.thermal(), tol))
}

/// Joint photon number `⟨b₊†b₊ b₋†b₋⟩` of a Gaussian state (Wick expansion).
pub fn pair_statistics(m: &MomentSet) -> f64 {
    m.n_plus * m.n_minus + m.w.norm_sqr() + m.x.norm_sqr()
}

/// Symmetrized quadrature covariance in the ordering `(q₋, p₋, q₊, p₊)` with
/// `q = (b + b†)/√2` and `p = −i(b − b†)/√2`. Vacuum is `diag(½, ½, ½, ½)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "CovarianceFields", into = "CovarianceFields")]
pub struct CovarianceMatrix {
    v: [[f64; 4]; 4],
}

#[derive(Serialize, Deserialize)]
struct CovarianceFields {
    v: Vec<f64>,
}

impl From<CovarianceFields> for CovarianceMatrix {
    fn from(f: CovarianceFields) -> Self {
        let mut v = [[0.0; 4]; 4];
        for (k, x) in f.v.iter().take(16).enumerate() {
            v[k / 4][k % 4] = *x;
        }
        Self::from_array(v)
    }
}

impl From<CovarianceMatrix> for CovarianceFields {
    fn from(c: CovarianceMatrix) -> Self {
        Self {
            v: c.v.iter().flatten().copied().collect(),
        }
    }
}

impl CovarianceMatrix {
    /// Symmetrize and store.
    pub fn from_array(v: [[f64; 4]; 4]) -> Self {
        let mut s = v;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let avg = 0.5 * (v[i][j] + v[j][i]);
                s[i][j] = avg;
                s[j][i] = avg;
            }
        }
        Self { v: s }
    }

    pub fn vacuum() -> Self {
        Self::from_array(diag4(0.5))
    }

    /// Two-mode squeezed vacuum with squeeze parameter `r` in standard form.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let a = 0.5 * (2.0 * r).cosh();
        let c = 0.5 * (2.0 * r).sinh();
        Self::from_array([
            [a, 0.0, c, 0.0],
            [0.0, a, 0.0, -c],
            [c, 0.0, a, 0.0],
            [0.0, -c, 0.0, a],
        ])
    }

    pub fn from_moments(m: &MomentSet) -> Self {
        let local = |n: f64, s: Complex64| [[n + 0.5 + s.re, s.im], [s.im, n + 0.5 - s.re]];
        let a = local(m.n_minus, m.s_minus);
        let b = local(m.n_plus, m.s_plus);
        let (w, x) = (m.w, m.x);
        // rows (q₋, p₋), columns (q₊, p₊)
        let c = [[w.re + x.re, w.im - x.im], [w.im + x.im, x.re - w.re]];
        let mut v = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                v[i][j] = a[i][j];
                v[i + 2][j + 2] = b[i][j];
                v[i][j + 2] = c[i][j];
                v[j + 2][i] = c[i][j];
            }
        }
        Self { v }
    }

    /// Inverse of [`from_moments`](Self::from_moments).
    pub fn to_moments(&self) -> MomentSet {
        let v = &self.v;
        let local = |o: usize| {
            let n = 0.5 * (v[o][o] + v[o + 1][o + 1]) - 0.5;
            let s = Complex64::new(0.5 * (v[o][o] - v[o + 1][o + 1]), v[o][o + 1]);
            (n, s)
        };
        let (n_minus, s_minus) = local(0);
        let (n_plus, s_plus) = local(2);
        let c = self.off_diagonal_block();
        MomentSet {
            n_plus,
            n_minus,
            w: Complex64::new(0.5 * (c[0][0] - c[1][1]), 0.5 * (c[0][1] + c[1][0])),
            s_plus,
            s_minus,
            x: Complex64::new(0.5 * (c[0][0] + c[1][1]), 0.5 * (c[1][0] - c[0][1])),
        }
    }

    pub fn as_array(&self) -> &[[f64; 4]; 4] {
        &self.v
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[i][j]
    }

    fn block(&self, r: usize, c: usize) -> [[f64; 2]; 2] {
        [
            [self.v[r][c], self.v[r][c + 1]],
            [self.v[r + 1][c], self.v[r + 1][c + 1]],
        ]
    }

    /// Block `A` of mode `−`.
    pub fn block_minus(&self) -> [[f64; 2]; 2] {
        self.block(0, 0)
    }

    /// Block `B` of mode `+`.
    pub fn block_plus(&self) -> [[f64; 2]; 2] {
        self.block(2, 2)
    }

    /// Correlation block `C`.
    pub fn off_diagonal_block(&self) -> [[f64; 2]; 2] {
        self.block(0, 2)
    }

    pub fn determinant(&self) -> f64 {
        Matrix4::from_fn(|i, j| self.v[i][j]).determinant()
    }

    /// `V + n·I`.
    pub fn add_identity(&self, n: f64) -> Self {
        let mut v = self.v;
        for (i, row) in v.iter_mut().enumerate() {
            row[i] += n;
        }
        Self { v }
    }

    /// Add `noise[k]` to the variance of quadrature `k`.
    pub fn add_diagonal(&self, noise: [f64; 4]) -> Self {
        let mut v = self.v;
        for (i, row) in v.iter_mut().enumerate() {
            row[i] += noise[i];
        }
        Self { v }
    }

    /// Symplectic eigenvalues `(ν₋, ν₊)` of the state, from the invariants
    /// `Δ = det A + det B + 2 det C` and `det V`.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let delta = det2(&self.block_minus()) + det2(&self.block_plus()) + 2.0 * det2(&self.off_diagonal_block());
        eigen_pair(delta, self.determinant())
    }

    /// Uncertainty relation `V + (i/2)Ω ⪰ 0`, checked through `ν₋ ≥ ½ − tol`
    /// and positivity of the local blocks.
    pub fn is_physical(&self, tol: f64) -> bool {
        let (nu_minus, _) = self.symplectic_eigenvalues();
        let a = self.block_minus();
        let b = self.block_plus();
        nu_minus >= 0.5 - tol && a[0][0] > 0.0 && b[0][0] > 0.0 && det2(&a) >= 0.25 - tol && det2(&b) >= 0.25 - tol
    }
}

pub(crate) fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Roots of `ν⁴ − Δ ν² + det = 0` as `(ν₋, ν₊)`, tiny negative radicands clamped.
pub(crate) fn eigen_pair(delta: f64, det: f64) -> (f64, f64) {
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let lo = (0.5 * (delta - disc)).max(0.0).sqrt();
    let hi = (0.5 * (delta + disc)).max(0.0).sqrt();
    (lo, hi)
}

fn diag4(x: f64) -> [[f64; 4]; 4] {
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = x;
    }
    v
}

/// Build the covariance matrix of a moment set.
pub fn covariance_matrix(m: &MomentSet) -> CovarianceMatrix {
    CovarianceMatrix::from_moments(m)
}
