//! JSON run configuration and load-time validation.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use udw_core::acceptance::SuiteOptions;
use udw_core::coherence::{CorrelationDensity, Regime, Source};
use udw_core::quadrature::QuadratureSpec;
use udw_core::response::{Coupling, DetectorModel, Method};
use udw_core::worldlines::{acceleration_switch, acceleration_tanh_ramp, Event, ScalarFn, SingleAxis, Worldline};

pub const EPS_SCALE_ENV: &str = "UDW_EPS_SCALE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    G2,
    CompareThermal,
    TrajectoryScan,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    Uniform {
        a: f64,
    },
    Static,
    /// Acceleration a0 → a1 over [start, end].
    Switch {
        a0: f64,
        a1: f64,
        start: f64,
        end: f64,
        #[serde(default)]
        window: Option<(f64, f64)>,
    },
    /// a0·(1 + ε·tanh(τ/T)).
    TanhRamp {
        a0: f64,
        epsilon: f64,
        timescale: f64,
        #[serde(default)]
        window: Option<(f64, f64)>,
    },
    /// Single-axis form of uniform acceleration, evaluated by residues.
    ExponentialAxis {
        a: f64,
        #[serde(default = "default_km")]
        km: usize,
    },
}

fn default_km() -> usize {
    4
}

impl TrajectoryConfig {
    /// Proper acceleration a(τ), when the trajectory defines one.
    pub fn acceleration(&self) -> ScalarFn {
        match *self {
            TrajectoryConfig::Uniform { a } | TrajectoryConfig::ExponentialAxis { a, .. } => {
                std::sync::Arc::new(move |_| a)
            }
            TrajectoryConfig::Static => std::sync::Arc::new(|_| 0.0),
            TrajectoryConfig::Switch { a0, a1, start, end, .. } => acceleration_switch(a0, a1, start, end),
            TrajectoryConfig::TanhRamp { a0, epsilon, timescale, .. } => {
                acceleration_tanh_ramp(a0, epsilon, timescale)
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            TrajectoryConfig::Uniform { .. } => "uniform",
            TrajectoryConfig::Static => "static",
            TrajectoryConfig::Switch { .. } => "switch",
            TrajectoryConfig::TanhRamp { .. } => "tanh_ramp",
            TrajectoryConfig::ExponentialAxis { .. } => "exponential_axis",
        }
    }

    /// The worldline for quadrature, with a window covering `taus` ± 1.5·reach.
    pub fn worldline(&self, taus: (f64, f64), reach: f64) -> Result<Worldline, CliError> {
        let default_window = (taus.0 - 1.5 * reach, taus.1 + 1.5 * reach);
        let w = match self {
            TrajectoryConfig::Uniform { a } => Worldline::uniform(*a)?,
            TrajectoryConfig::Static => Worldline::stationary(Event::default()),
            TrajectoryConfig::Switch { window, .. } | TrajectoryConfig::TanhRamp { window, .. } => {
                let window = window.unwrap_or(default_window);
                if window.0 > taus.0 - reach || window.1 < taus.1 + reach {
                    return Err(CliError::config(format!(
                        "trajectory.window: [{}, {}] must cover the evaluation times ± {reach} (W·σ)",
                        window.0, window.1
                    )));
                }
                Worldline::variable(self.acceleration(), window)?
            }
            TrajectoryConfig::ExponentialAxis { .. } => {
                return Err(CliError::config(
                    "trajectory: exponential_axis is evaluated by residues only (method \"residue\")",
                ))
            }
        };
        Ok(w)
    }

    pub fn single_axis(&self) -> Result<(SingleAxis, usize), CliError> {
        match self {
            TrajectoryConfig::ExponentialAxis { a, km } => Ok((SingleAxis::exponential(*a)?, *km)),
            other => Err(CliError::config(format!(
                "method: \"residue\" needs trajectory.kind = exponential_axis, got {}",
                other.name()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingConfig {
    Constant { alpha: f64 },
    TwoLevel { e0: f64, delta_e: f64 },
    Tabulated { energies: Vec<f64>, values: Vec<f64> },
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig::Constant { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub sigma: f64,
    #[serde(default)]
    pub coupling: CouplingConfig,
}

impl DetectorConfig {
    pub fn model(&self) -> Result<DetectorModel, CliError> {
        let coupling = match &self.coupling {
            CouplingConfig::Constant { alpha } => Coupling::Constant(*alpha),
            CouplingConfig::TwoLevel { e0, delta_e } => Coupling::TwoLevel { e0: *e0, delta_e: *delta_e },
            CouplingConfig::Tabulated { energies, values } => {
                Coupling::Tabulated { energies: energies.clone(), values: values.clone() }
            }
        };
        DetectorModel::new(self.sigma, coupling).map_err(|e| CliError::config(format!("detector: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(CliError::config(format!(
                "scan: grid must be strictly increasing, got min = {}, max = {}",
                self.min, self.max
            )));
        }
        if self.points < 2 {
            return Err(CliError::config(format!("scan.points: need at least 2, got {}", self.points)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|k| self.min + (self.max - self.min) * k as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// One run of the tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub trajectory: Option<TrajectoryConfig>,
    #[serde(default)]
    pub detector: Option<DetectorConfig>,
    /// Energies for spectrum/compare-thermal, Δτ for g2, τ for trajectory-scan.
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub tau: f64,
    /// Fixed energy of a trajectory scan.
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub method: Option<Method>,
    /// Bath inverse temperature (thermal method, compare-thermal).
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub source: Option<Source>,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub validate: SuiteOptions,
}

impl RunConfig {
    pub fn for_mode(mode: Mode) -> Self {
        RunConfig {
            mode,
            trajectory: None,
            detector: None,
            scan: None,
            tau: 0.0,
            energy: None,
            method: None,
            beta: None,
            source: None,
            regime: None,
            quadrature: QuadratureSpec::default(),
            output: OutputConfig::default(),
            validate: SuiteOptions::default(),
        }
    }

    pub fn from_json(text: &str, path: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|source| CliError::Parse { path: path.to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Applies UDW_EPS_SCALE when set.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(v) = std::env::var(EPS_SCALE_ENV) {
            let scale: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("{EPS_SCALE_ENV}: not a number: {v:?}")))?;
            self.quadrature.eps_scale = scale;
        }
        Ok(())
    }

    pub fn trajectory(&self) -> Result<&TrajectoryConfig, CliError> {
        self.trajectory.as_ref().ok_or_else(|| CliError::config("trajectory: required for this mode"))
    }

    pub fn detector(&self) -> Result<DetectorModel, CliError> {
        self.detector.as_ref().ok_or_else(|| CliError::config("detector: required for this mode"))?.model()
    }

    pub fn scan(&self) -> Result<ScanConfig, CliError> {
        let scan = self.scan.ok_or_else(|| CliError::config("scan: required for this mode"))?;
        scan.validate()?;
        Ok(scan)
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or(match self.trajectory {
            Some(TrajectoryConfig::ExponentialAxis { .. }) => Method::Residue,
            _ => Method::Quadrature,
        })
    }

    /// Bath β: the configured value, or 2π/a for a uniform trajectory.
    pub fn beta(&self) -> Result<f64, CliError> {
        match (self.beta, &self.trajectory) {
            (Some(b), _) => Ok(b),
            (None, Some(TrajectoryConfig::Uniform { a })) => Ok(2.0 * PI / a),
            _ => Err(CliError::config("beta: required (or use a uniform trajectory to default to 2π/a)")),
        }
    }

    /// Checks everything the selected mode needs, with field paths.
    pub fn validate(&self) -> Result<(), CliError> {
        self.quadrature.validate().map_err(|e| CliError::config(format!("quadrature: {e}")))?;
        match self.mode {
            Mode::Validate => {
                self.validate.quadrature.validate().map_err(|e| CliError::config(format!("validate.quadrature: {e}")))
            }
            Mode::Spectrum => self.validate_spectrum(),
            Mode::CompareThermal => {
                let scan = self.scan()?;
                positive_energies(&scan)?;
                self.detector()?;
                match self.trajectory()? {
                    TrajectoryConfig::Uniform { .. } => {}
                    other => {
                        return Err(CliError::config(format!(
                            "trajectory.kind: compare-thermal needs uniform, got {}",
                            other.name()
                        )))
                    }
                }
                require_positive("beta", self.beta()?)
            }
            Mode::TrajectoryScan => {
                self.scan()?;
                self.detector()?;
                let e = self.energy.ok_or_else(|| CliError::config("energy: required for trajectory-scan"))?;
                require_positive("energy", e)?;
                if let TrajectoryConfig::ExponentialAxis { .. } = self.trajectory()? {
                    return Err(CliError::config("trajectory.kind: exponential_axis cannot be scanned in τ"));
                }
                Ok(())
            }
            Mode::G2 => {
                self.scan()?;
                let det = self.detector()?;
                let source = self.source.ok_or_else(|| CliError::config("source: required for g2"))?;
                CorrelationDensity::new(source, det, self.regime, self.quadrature)
                    .map_err(|e| CliError::config(format!("regime: {e}")))?;
                Ok(())
            }
        }
    }

    fn validate_spectrum(&self) -> Result<(), CliError> {
        let scan = self.scan()?;
        positive_energies(&scan)?;
        let det = self.detector()?;
        let traj = self.trajectory()?;
        let wrong = |need: &str| {
            Err(CliError::config(format!(
                "method: \"{}\" needs trajectory.kind = {need}, got {}",
                self.method().as_str(),
                traj.name()
            )))
        };
        match (self.method(), traj) {
            (Method::Quadrature, TrajectoryConfig::ExponentialAxis { .. }) => {
                wrong("uniform, static, switch or tanh_ramp")
            }
            (Method::Quadrature, _) => Ok(()),
            (Method::Planck, TrajectoryConfig::Uniform { .. }) => Ok(()),
            (Method::PlanckEta, TrajectoryConfig::Uniform { a }) => {
                udw_core::response::planck_with_correction(scan.min, *a, &det)
                    .map(|_| ())
                    .map_err(|e| CliError::config(format!("method: {e}")))
            }
            (Method::Planck | Method::PlanckEta, _) => wrong("uniform"),
            (Method::Thermal, TrajectoryConfig::Static) => require_positive("beta", self.beta()?),
            (Method::Thermal, _) => wrong("static"),
            (Method::Residue, TrajectoryConfig::ExponentialAxis { .. }) => Ok(()),
            (Method::Residue, _) => wrong("exponential_axis"),
            (Method::Adiabatic, TrajectoryConfig::Static | TrajectoryConfig::ExponentialAxis { .. }) => {
                wrong("uniform, switch or tanh_ramp")
            }
            (Method::Adiabatic, t) => {
                let accel = t.acceleration();
                udw_core::response::adiabatic_response(scan.min, self.tau, &*accel, &det)
                    .map(|_| ())
                    .map_err(|e| CliError::config(format!("method: {e}")))
            }
        }
    }
}

fn positive_energies(scan: &ScanConfig) -> Result<(), CliError> {
    if scan.min > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("scan.min: energies must be positive, got {}", scan.min)))
    }
}

fn require_positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!("{field}: must be positive and finite, got {v}")))
    }
}
