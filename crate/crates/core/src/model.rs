//! Physical parameters, mode bookkeeping and thermal inputs.
//!
//! The waveguide is terminated by a SQUID whose Josephson energy is modulated
//! as `E_J(t) = E_J0 [1 + ε cos(ω_d t)]`. In the small-phase limit the SQUID acts
//! as a boundary condition `Φ(0,t) + L_eff(t) ∂ₓΦ(0,t) = 0` with an effective
//! length `L_eff(t) = L_eff0 / (1 + ε cos ω_d t)`. The time origin is placed at a
//! maximum of `E_J`; any other drive phase is a pure time translation and only
//! rotates the phase of the pair correlation.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DceError, Result};

/// Reduced Planck constant (CODATA 2018), J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (CODATA 2018), J/K.
pub const K_B: f64 = 1.380_649_000e-23;

/// Largest ladder half-width the adaptive solver will try.
pub const MAX_TRUNCATION: usize = 1 << 10;

/// Dimensionless static strength `L_eff0 ω_d / v` of the shipped default.
pub const DEFAULT_STRENGTH: f64 = 0.28;
pub const DEFAULT_DRIVE_FREQUENCY_HZ: f64 = 10.0e9;
pub const DEFAULT_LINE_SPEED: f64 = 1.2e8;
pub const DEFAULT_TEMPERATURE_K: f64 = 0.05;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_IMPEDANCE: f64 = 50.0;
pub const DEFAULT_TRUNCATION: usize = 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// How the modulated Josephson energy enters the effective length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryForm {
    /// `L_eff(t) = L_eff0 / (1 + ε cos ω_d t)`, exact for the modulated `E_J`.
    #[default]
    JosephsonExact,
    /// `L_eff(t) = L_eff0 (1 − ε cos ω_d t)`, the first-order expansion of the above.
    LinearLength,
}

/// Parameters of the driven waveguide / SQUID system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    /// ω_d, rad/s.
    pub drive_angular_frequency: f64,
    /// Normalized modulation amplitude ε of the Josephson energy.
    pub epsilon: f64,
    /// Input-field temperature, K.
    pub temperature: f64,
    /// Speed of light in the line, m/s.
    pub line_speed: f64,
    /// Static effective length L_eff0, m.
    pub effective_length: f64,
    /// Characteristic impedance Z₀, Ω. Only sets the voltage-quadrature scale,
    /// which cancels in every reported indicator.
    pub impedance: f64,
    /// Initial sideband ladder half-width N.
    pub truncation: usize,
    pub convergence_tol: f64,
    #[serde(default)]
    pub boundary_form: BoundaryForm,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        let omega_d = 2.0 * PI * DEFAULT_DRIVE_FREQUENCY_HZ;
        Self {
            drive_angular_frequency: omega_d,
            epsilon: DEFAULT_EPSILON,
            temperature: DEFAULT_TEMPERATURE_K,
            line_speed: DEFAULT_LINE_SPEED,
            effective_length: DEFAULT_STRENGTH * DEFAULT_LINE_SPEED / omega_d,
            impedance: DEFAULT_IMPEDANCE,
            truncation: DEFAULT_TRUNCATION,
            convergence_tol: DEFAULT_TOLERANCE,
            boundary_form: BoundaryForm::JosephsonExact,
        }
    }
}

impl CircuitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DceError::Config(msg));
        if !(self.drive_angular_frequency.is_finite() && self.drive_angular_frequency > 0.0) {
            return bad(format!("drive frequency must be positive, got {}", self.drive_angular_frequency));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1), got {}", self.epsilon));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !(self.line_speed.is_finite() && self.line_speed > 0.0) {
            return bad(format!("line speed must be positive, got {}", self.line_speed));
        }
        if !(self.effective_length.is_finite() && self.effective_length > 0.0) {
            return bad(format!("effective length must be positive, got {}", self.effective_length));
        }
        if !(self.impedance.is_finite() && self.impedance > 0.0) {
            return bad(format!("impedance must be positive, got {}", self.impedance));
        }
        if self.truncation == 0 {
            return bad("truncation must be at least 1".into());
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.convergence_tol));
        }
        if !self.strength().is_finite() {
            return bad("L_eff0 ω_d / v is not finite".into());
        }
        Ok(())
    }

    /// Dimensionless static strength `L_eff0 ω_d / v`.
    pub fn strength(&self) -> f64 {
        self.effective_length * self.drive_angular_frequency / self.line_speed
    }

    /// `L_eff0 ω / v` at an arbitrary (signed) frequency.
    pub fn kappa(&self, omega: f64) -> f64 {
        self.effective_length * omega / self.line_speed
    }

    /// Amplitude of the effective-length modulation, `δL_eff = ε L_eff0`.
    pub fn delta_l_eff(&self) -> f64 {
        self.epsilon * self.effective_length
    }

    pub fn thermal(&self) -> ThermalInput {
        ThermalInput {
            temperature: self.temperature,
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self.clone()
        }
    }

    /// Rescale L_eff0 so that `L_eff0 ω_d / v` equals `strength`.
    pub fn with_strength(&self, strength: f64) -> Self {
        Self {
            effective_length: strength * self.line_speed / self.drive_angular_frequency,
            ..self.clone()
        }
    }
}

/// On-disk configuration: a flat JSON object. Missing keys take the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub drive_frequency_hz: Option<f64>,
    pub epsilon: Option<f64>,
    pub temperature_k: Option<f64>,
    pub line_speed_m_per_s: Option<f64>,
    pub effective_length_m: Option<f64>,
    pub impedance_ohm: Option<f64>,
    pub truncation: Option<usize>,
    pub tolerance: Option<f64>,
    pub boundary_form: Option<BoundaryForm>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| DceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Build a validated config. When the drive or line speed is overridden but
    /// the effective length is not, the default strength `L_eff0 ω_d / v` is kept.
    pub fn into_config(self) -> Result<CircuitConfig> {
        let base = CircuitConfig::default();
        let omega_d = self
            .drive_frequency_hz
            .map(|f| 2.0 * PI * f)
            .unwrap_or(base.drive_angular_frequency);
        let line_speed = self.line_speed_m_per_s.unwrap_or(base.line_speed);
        let cfg = CircuitConfig {
            drive_angular_frequency: omega_d,
            epsilon: self.epsilon.unwrap_or(base.epsilon),
            temperature: self.temperature_k.unwrap_or(base.temperature),
            line_speed,
            effective_length: self
                .effective_length_m
                .unwrap_or(DEFAULT_STRENGTH * line_speed / omega_d),
            impedance: self.impedance_ohm.unwrap_or(base.impedance),
            truncation: self.truncation.unwrap_or(base.truncation),
            convergence_tol: self.tolerance.unwrap_or(base.convergence_tol),
            boundary_form: self.boundary_form.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The file form of a config (used to echo the effective parameters).
    pub fn from_config(cfg: &CircuitConfig) -> Self {
        Self {
            drive_frequency_hz: Some(cfg.drive_angular_frequency / (2.0 * PI)),
            epsilon: Some(cfg.epsilon),
            temperature_k: Some(cfg.temperature),
            line_speed_m_per_s: Some(cfg.line_speed),
            effective_length_m: Some(cfg.effective_length),
            impedance_ohm: Some(cfg.impedance),
            truncation: Some(cfg.truncation),
            tolerance: Some(cfg.convergence_tol),
            boundary_form: Some(cfg.boundary_form),
        }
    }
}

/// Two analysis frequencies placed symmetrically about half the drive.
///
/// Only `ω₊` is stored; `ω₋ = ω_d − ω₊` is exact in floating point because
/// `ω_d/2 ≤ ω₊ < ω_d`, so `ω₊ + ω₋ == ω_d` holds bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePair {
    drive: f64,
    plus: f64,
    minus: f64,
    detuning: f64,
}

impl ModePair {
    pub fn new(drive_angular_frequency: f64, detuning: f64) -> Result<Self> {
        if !(drive_angular_frequency.is_finite() && drive_angular_frequency > 0.0) {
            return Err(DceError::Domain(format!(
                "drive frequency must be positive, got {drive_angular_frequency}"
            )));
        }
        if !(detuning.is_finite() && detuning >= 0.0 && detuning < 0.5 * drive_angular_frequency) {
            return Err(DceError::Domain(format!(
                "detuning must lie in [0, ω_d/2), got {detuning} for ω_d = {drive_angular_frequency}"
            )));
        }
        let plus = 0.5 * drive_angular_frequency + detuning;
        let minus = drive_angular_frequency - plus;
        if !(minus > 0.0) {
            return Err(DceError::Domain("ω₋ is not positive".into()));
        }
        Ok(Self {
            drive: drive_angular_frequency,
            plus,
            minus,
            detuning,
        })
    }

    /// Pair with detuning given as a fraction of ω_d.
    pub fn from_fraction(drive_angular_frequency: f64, detuning_frac: f64) -> Result<Self> {
        Self::new(drive_angular_frequency, detuning_frac * drive_angular_frequency)
    }

    pub fn plus(&self) -> f64 {
        self.plus
    }

    pub fn minus(&self) -> f64 {
        self.minus
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn drive(&self) -> f64 {
        self.drive
    }

    /// `√(ω₊ ω₋)`.
    pub fn geometric_mean(&self) -> f64 {
        (self.plus * self.minus).sqrt()
    }
}

/// Shorthand for [`ModePair::new`].
pub fn mode_pair(drive_angular_frequency: f64, detuning: f64) -> Result<ModePair> {
    ModePair::new(drive_angular_frequency, detuning)
}

/// Bose-Einstein occupation `(exp(ħω/k_BT) − 1)⁻¹`. Exactly zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(DceError::Domain(format!("frequency must be positive, got {omega}")));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(DceError::Domain(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    // expm1 overflows to +inf for large x, giving exactly 0.
    Ok(1.0 / x.exp_m1())
}

/// Thermal input state of the incoming field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalInput {
    pub temperature: f64,
}

impl ThermalInput {
    /// Occupation of the input mode at `|omega|`.
    pub fn occupation(&self, omega: f64) -> f64 {
        thermal_occupation(omega.abs(), self.temperature).unwrap_or(0.0)
    }
}

/// Small parameter `λ = ε (L_eff0/v) √(ω₊ω₋)` of the perturbative treatment.
pub fn modulation_parameter(config: &CircuitConfig, pair: &ModePair) -> f64 {
    config.delta_l_eff() / config.line_speed * pair.geometric_mean()
}
