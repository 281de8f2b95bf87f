//! Nonclassicality and entanglement indicators of the two output modes.
//!
//! * `⟨:f_θ†f_θ:⟩` with `f_θ = e^{iθ}b₋ + e^{−iθ}b₋† + i(e^{iθ}b₊ − e^{−iθ}b₊†)`.
//!   Writing `f_θ = A + A†` with `A = e^{iθ}(b₋ + i b₊)` gives
//!   `⟨:f_θ†f_θ:⟩ = 2⟨A†A⟩ + 2 Re⟨A²⟩
//!              = 2(n₋+n₊) + 4 Im X + Re[e^{2iθ} (2(S₋−S₊) + 4iW)]`.
//!   Any state with a non-negative P function keeps it `≥ 0`.
//! * Two-mode squeezing `σ₂` of the voltage quadratures `I±`, `Q±` at phase φ,
//!   and the threshold above which `σ₂` certifies `⟨:f†f:⟩ < 0` (θ = φ + π/4).
//! * Logarithmic negativity `𝒩 = max[0, −ln(2ν₋)]` of the covariance matrix.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DceError, Result};
use crate::model::{CircuitConfig, ModePair};
use crate::moments::{covariance_matrix, det2, output_moments, CovarianceMatrix, Method, MomentSet};

/// Radicands of `ν₋` above `−RADICAND_TOL` are clamped to zero.
pub const RADICAND_TOL: f64 = 1e-12;

/// All indicators at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub fdf_min: f64,
    /// Minimizing angle, in `[0, π)`.
    pub theta_opt: f64,
    pub sigma2: f64,
    /// Quadrature phase used for `sigma2` (the maximizing one).
    pub phi: f64,
    pub sigma2_threshold: f64,
    pub logneg: f64,
    pub nonclassical_by_fdf: bool,
    pub nonclassical_by_sigma2: bool,
    pub entangled: bool,
}

impl IndicatorReport {
    pub fn from_covariance(v: &CovarianceMatrix, pair: &ModePair) -> Result<Self> {
        let m = v.to_moments();
        let (theta_opt, fdf) = fdf_min(&m);
        let (sigma2, phi) = two_mode_squeezing(&m, pair, SqueezingPhase::Optimize);
        let threshold = sigma2_threshold(&m, pair);
        let logneg = logarithmic_negativity(v)?;
        Ok(Self {
            fdf_min: fdf,
            theta_opt,
            sigma2,
            phi,
            sigma2_threshold: threshold,
            logneg,
            nonclassical_by_fdf: fdf < 0.0,
            nonclassical_by_sigma2: sigma2 > threshold,
            entangled: logneg > 0.0,
        })
    }

    pub fn from_moments(m: &MomentSet, pair: &ModePair) -> Result<Self> {
        Self::from_covariance(&covariance_matrix(m), pair)
    }
}

/// Moments and indicators for one configuration.
pub fn evaluate(config: &CircuitConfig, pair: &ModePair, method: Method) -> Result<(MomentSet, IndicatorReport)> {
    let m = output_moments(config, pair, method)?;
    let report = IndicatorReport::from_moments(&m, pair)?;
    Ok((m, report))
}

fn fdf_parts(m: &MomentSet) -> (f64, Complex64) {
    let base = 2.0 * (m.n_minus + m.n_plus) + 4.0 * m.x.im;
    let z = 2.0 * (m.s_minus - m.s_plus) + 4.0 * Complex64::i() * m.w;
    (base, z)
}

/// `⟨:f_θ†f_θ:⟩`.
pub fn fdf_theta(m: &MomentSet, theta: f64) -> f64 {
    let (base, z) = fdf_parts(m);
    base + (Complex64::from_polar(1.0, 2.0 * theta) * z).re
}

/// `min_θ ⟨:f_θ†f_θ:⟩` in closed form, returned as `(θ_opt, value)`.
pub fn fdf_min(m: &MomentSet) -> (f64, f64) {
    let (base, z) = fdf_parts(m);
    let theta = if z.norm() == 0.0 {
        0.0
    } else {
        wrap_half_turn(0.5 * (PI - z.arg()))
    };
    (theta, base - z.norm())
}

fn wrap_half_turn(x: f64) -> f64 {
    let w = x.rem_euclid(PI);
    if w >= PI - 1e-15 {
        0.0
    } else {
        w
    }
}

/// Phase of the voltage quadratures used for σ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezingPhase {
    Fixed(f64),
    Optimize,
}

/// Two-mode squeezing `σ₂ = (⟨I₋I₊⟩ − ⟨Q₋Q₊⟩) / ((⟨I₋²⟩+⟨I₊²⟩+⟨Q₋²⟩+⟨Q₊²⟩)/2)`.
///
/// With `I± ∝ √ω± (e^{iφ}b± + h.c.)` the impedance prefactors cancel and
/// `σ₂ = 4√(ω₊ω₋) Re[e^{2iφ}W] / (ω₊(2n₊+1) + ω₋(2n₋+1))`. Returns `(σ₂, φ)`.
pub fn two_mode_squeezing(m: &MomentSet, pair: &ModePair, phase: SqueezingPhase) -> (f64, f64) {
    let denom = pair.plus() * (2.0 * m.n_plus + 1.0) + pair.minus() * (2.0 * m.n_minus + 1.0);
    let scale = 4.0 * pair.geometric_mean() / denom;
    match phase {
        SqueezingPhase::Fixed(phi) => (scale * (Complex64::from_polar(1.0, 2.0 * phi) * m.w).re, phi),
        SqueezingPhase::Optimize => {
            let phi = if m.w.norm() == 0.0 {
                0.0
            } else {
                wrap_half_turn(-0.5 * m.w.arg())
            };
            (scale * m.w.norm(), phi)
        }
    }
}

/// Right-hand side of the σ₂ nonclassicality inequality,
/// `2√(ω₊ω₋)(n₊+n₋) / (ω₊(2n₊+1) + ω₋(2n₋+1))`.
pub fn sigma2_threshold(m: &MomentSet, pair: &ModePair) -> f64 {
    let denom = pair.plus() * (2.0 * m.n_plus + 1.0) + pair.minus() * (2.0 * m.n_minus + 1.0);
    2.0 * pair.geometric_mean() * (m.n_plus + m.n_minus) / denom
}

/// Smallest symplectic eigenvalue of the partially transposed covariance,
/// `ν₋ = (σ/2 − √(σ² − 4 det V)/2)^{1/2}` with `σ = det A + det B − 2 det C`.
pub fn transposed_symplectic_min(v: &CovarianceMatrix) -> Result<f64> {
    let sigma = det2(&v.block_minus()) + det2(&v.block_plus()) - 2.0 * det2(&v.off_diagonal_block());
    let det = v.determinant();
    let mut disc = sigma * sigma - 4.0 * det;
    let scale = sigma.abs().max(1.0);
    if disc < 0.0 {
        if disc < -RADICAND_TOL * scale * scale {
            return Err(DceError::InvalidCovariance(format!(
                "σ² − 4 det V = {disc:.3e} is negative"
            )));
        }
        disc = 0.0;
    }
    let mut radicand = 0.5 * sigma - 0.5 * disc.sqrt();
    if radicand < 0.0 {
        if radicand < -RADICAND_TOL * scale {
            return Err(DceError::InvalidCovariance(format!("ν₋² = {radicand:.3e} is negative")));
        }
        radicand = 0.0;
    }
    Ok(radicand.sqrt())
}

/// `𝒩 = max[0, −ln(2ν₋)]` (natural logarithm).
pub fn logarithmic_negativity(v: &CovarianceMatrix) -> Result<f64> {
    let nu = transposed_symplectic_min(v)?;
    if nu == 0.0 {
        return Err(DceError::InvalidCovariance("ν₋ vanishes".into()));
    }
    Ok((-(2.0 * nu).ln()).max(0.0))
}

/// Perturbative onsets `(ε*, ε₀)` for the input occupations of `config`.
///
/// * `ε*`: `⟨:f†f:⟩` turns negative once `λ ≳ (n̄₊ + n̄₋)/2`.
/// * `ε₀`: `𝒩` turns positive at `ε₀ ≈ 2v/(L_eff0 ω_d) √(n̄₊ n̄₋)`.
pub fn onset_estimates(config: &CircuitConfig, pair: &ModePair) -> (f64, f64) {
    let input = config.thermal();
    let np = input.occupation(pair.plus());
    let nm = input.occupation(pair.minus());
    let lambda_per_eps = config.effective_length / config.line_speed * pair.geometric_mean();
    let eps_star = 0.5 * (np + nm) / lambda_per_eps;
    let eps_zero = 2.0 / config.strength() * (np * nm).sqrt();
    (eps_star, eps_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{modulation_parameter, thermal_occupation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig_cfg(eps: f64, t: f64) -> (CircuitConfig, ModePair) {
        let cfg = CircuitConfig::default().with_epsilon(eps).with_temperature(t);
        let pair = ModePair::from_fraction(cfg.drive_angular_frequency, 0.15).unwrap();
        (cfg, pair)
    }

    /// Brute-force oracle: 1024-point grid then golden-section refinement.
    fn grid_min(m: &MomentSet) -> f64 {
        let n = 1024;
        let step = PI / n as f64;
        let (k, _) = (0..n)
            .map(|k| (k, fdf_theta(m, k as f64 * step)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let (mut lo, mut hi) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if fdf_theta(m, a) < fdf_theta(m, b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        fdf_theta(m, 0.5 * (lo + hi))
    }

    fn random_moments(rng: &mut ChaCha8Rng) -> MomentSet {
        let np: f64 = rng.gen_range(0.0..0.5);
        let nm: f64 = rng.gen_range(0.0..0.5);
        let wmax = (np * (nm + 1.0)).min(nm * (np + 1.0)).sqrt();
        let c = |rng: &mut ChaCha8Rng, r: f64| Complex64::from_polar(rng.gen_range(0.0..r), rng.gen_range(0.0..2.0 * PI));
        MomentSet {
            n_plus: np,
            n_minus: nm,
            w: c(rng, wmax),
            s_plus: c(rng, 0.1 * np),
            s_minus: c(rng, 0.1 * nm),
            x: c(rng, 0.1 * (np * nm).sqrt()),
        }
    }

    #[test]
    fn thermal_state_passes_fdf_test() {
        let (cfg, pair) = fig_cfg(0.0, 0.05);
        let (m, r) = evaluate(&cfg, &pair, Method::Numeric).unwrap();
        for k in 0..64 {
            let th = k as f64 * 2.0 * PI / 64.0;
            assert!((fdf_theta(&m, th) - 2.0 * (m.n_plus + m.n_minus)).abs() < 1e-15);
        }
        assert!(r.fdf_min >= 0.0 && r.sigma2 == 0.0 && r.logneg == 0.0);
        assert!(!r.nonclassical_by_fdf && !r.nonclassical_by_sigma2 && !r.entangled);
    }

    #[test]
    fn vacuum_value_at_theta_zero() {
        let (cfg, pair) = fig_cfg(0.1, 0.0);
        let (m, _) = evaluate(&cfg, &pair, Method::Perturbative).unwrap();
        let lam = modulation_parameter(&cfg, &pair);
        // Eq. (6) with n̄ = 0 drops the O(λ²) flux; the contraction keeps it.
        assert!((fdf_theta(&m, 0.0) - (-4.0 * lam + 4.0 * lam * lam)).abs() < 1e-15);
        assert!((fdf_theta(&m, 0.0) + 0.0534).abs() < 1e-3);
    }

    #[test]
    fn perturbative_reduces_to_eq6() {
        let (cfg, pair) = fig_cfg(0.1, 0.05);
        let (m, _) = evaluate(&cfg, &pair, Method::Perturbative).unwrap();
        let lam = modulation_parameter(&cfg, &pair);
        let np = thermal_occupation(pair.plus(), 0.05).unwrap();
        let nm = thermal_occupation(pair.minus(), 0.05).unwrap();
        let flux = 2.0 * lam * lam * (2.0 + np + nm);
        for k in 0..16 {
            let th = k as f64 * PI / 16.0;
            let eq6 = 2.0 * (np + nm) - 4.0 * (2.0 * th).cos() * lam * (1.0 + np + nm);
            assert!((fdf_theta(&m, th) - flux - eq6).abs() < 1e-15);
        }
        assert!((fdf_theta(&m, PI / 4.0) - flux - 2.0 * (np + nm)).abs() < 1e-15);
        let (theta, value) = fdf_min(&m);
        assert!(theta.abs() < 1e-12);
        assert!((value - flux - (2.0 * (np + nm) - 4.0 * lam * (1.0 + np + nm))).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let m = random_moments(&mut rng);
            let (theta, v) = fdf_min(&m);
            worst = worst.max((v - grid_min(&m)).abs());
            assert!((fdf_theta(&m, theta) - v).abs() < 1e-14);
            assert!((0.0..PI).contains(&theta));
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn sigma2_and_fdf_tests_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pair = ModePair::from_fraction(1.0, 0.15).unwrap();
        for _ in 0..50 {
            let mut m = random_moments(&mut rng);
            m.s_plus = Complex64::default();
            m.s_minus = Complex64::default();
            m.x = Complex64::default();
            let threshold = sigma2_threshold(&m, &pair);
            for k in 0..64 {
                let phi = k as f64 * PI / 32.0;
                let (s2, _) = two_mode_squeezing(&m, &pair, SqueezingPhase::Fixed(phi));
                let f = fdf_theta(&m, phi + PI / 4.0);
                if f.abs() > 1e-12 {
                    assert_eq!(f < 0.0, s2 > threshold, "phi {phi}: fdf {f}, σ₂ {s2}, thr {threshold}");
                }
            }
        }
    }

    #[test]
    fn sigma2_examples() {
        let (cfg, pair) = fig_cfg(0.0, 0.05);
        let (m, _) = evaluate(&cfg, &pair, Method::Perturbative).unwrap();
        assert_eq!(two_mode_squeezing(&m, &pair, SqueezingPhase::Optimize).0, 0.0);

        let (cfg, pair) = fig_cfg(0.1, 0.0);
        let (m, _) = evaluate(&cfg, &pair, Method::Perturbative).unwrap();
        let (s2, phi) = two_mode_squeezing(&m, &pair, SqueezingPhase::Optimize);
        assert!((s2 - 0.0255).abs() < 1e-4, "{s2}");
        let (s2_fixed, _) = two_mode_squeezing(&m, &pair, SqueezingPhase::Fixed(phi));
        assert!((s2 - s2_fixed).abs() < 1e-15);
        // θ = φ + π/4 lands on the fdf minimum θ = 0.
        assert!(wrap_half_turn(phi + PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_examples() {
        let pair = ModePair::from_fraction(1.0, 0.15).unwrap();
        assert_eq!(sigma2_threshold(&MomentSet::vacuum(), &pair), 0.0);
        let sym = ModePair::from_fraction(1.0, 0.0).unwrap();
        let n = 0.3;
        let t = sigma2_threshold(&MomentSet::thermal(n, n), &sym);
        assert!((t - 2.0 * n / (2.0 * n + 1.0)).abs() < 1e-15);

        let (cfg, pair) = fig_cfg(0.0, 0.05);
        let (m, r) = evaluate(&cfg, &pair, Method::Perturbative).unwrap();
        assert!((sigma2_threshold(&m, &pair) - 0.0353).abs() < 2e-4, "{}", r.sigma2_threshold);
    }

    #[test]
    fn log_negativity_gaussian_oracles() {
        let vac = CovarianceMatrix::vacuum();
        assert!((transposed_symplectic_min(&vac).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(logarithmic_negativity(&vac).unwrap(), 0.0);
        let tmsv = CovarianceMatrix::two_mode_squeezed(0.5);
        let nu = transposed_symplectic_min(&tmsv).unwrap();
        assert!((nu - (-1.0f64).exp() / 2.0).abs() < 1e-12);
        assert!((nu - 0.18394).abs() < 1e-5);
        assert!((logarithmic_negativity(&tmsv).unwrap() - 1.0).abs() < 1e-10);
        for r in [0.1, 0.5, 1.0] {
            let l = logarithmic_negativity(&CovarianceMatrix::two_mode_squeezed(r)).unwrap();
            assert!((l - 2.0 * r).abs() < 1e-10);
        }
    }

    #[test]
    fn unphysical_covariance_is_rejected() {
        let bad = CovarianceMatrix::from_array([
            [0.5, 0.0, 2.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [2.0, 0.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.5],
        ]);
        assert!(logarithmic_negativity(&bad).is_err());
    }

    #[test]
    fn small_drive_slope_at_zero_temperature() {
        let cfg = CircuitConfig::default().with_temperature(0.0);
        let pair = ModePair::from_fraction(cfg.drive_angular_frequency, 0.05).unwrap();
        let (_, r) = evaluate(&cfg.with_epsilon(0.005), &pair, Method::Numeric).unwrap();
        let slope = r.logneg / 0.005;
        assert!((slope - 0.28).abs() / 0.28 < 0.05, "{slope}");
    }

    #[test]
    fn onsets() {
        let (cfg, pair) = fig_cfg(0.1, 0.0);
        assert_eq!(onset_estimates(&cfg, &pair), (0.0, 0.0));
        let (cfg, pair) = fig_cfg(0.1, 0.05);
        let (eps_star, eps_zero) = onset_estimates(&cfg, &pair);
        assert!((eps_zero - 0.060).abs() < 1e-3, "{eps_zero}");
        assert!((eps_star - 0.142).abs() < 2e-3, "{eps_star}");
        // the perturbative fdf closed form changes sign at ε*
        let lam_per_eps = modulation_parameter(&cfg.with_epsilon(1.0), &pair);
        let np = thermal_occupation(pair.plus(), 0.05).unwrap();
        let nm = thermal_occupation(pair.minus(), 0.05).unwrap();
        assert!((2.0 * (np + nm) - 4.0 * lam_per_eps * eps_star).abs() < 1e-15);
    }
}
