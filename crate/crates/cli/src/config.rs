//! Scenario configuration: a versioned TOML schema with unknown keys
//! rejected and physical bounds enforced at parse time.

use anyhow::{anyhow, bail, Context, Result};
use biphoton_core::coincidence::{EfficiencyChain, ExperimentScenario};
use biphoton_core::optics::{dephased_two_path_density, two_path_state, Circular, SfwmPathConfig};
use biphoton_core::phaselock::{ControllerParams, DriftModel, PhaseLink};
use biphoton_core::quantum::{bell_state, BellKind, PairState};
use biphoton_core::spectrum::{
    model_waveform, FrequencyGrid, PowerCalibration, SpectralModelParams, TemporalWaveform,
};
use biphoton_core::tomography::reference_density_matrix;
use serde::Deserialize;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub seed: u64,
    pub state: StateConfig,
    pub waveform: WaveformConfig,
    pub rates: RatesConfig,
    pub detection: DetectionConfig,
    #[serde(default)]
    pub analyzers: Option<AnalyzersConfig>,
    pub run: RunConfig,
    #[serde(default)]
    pub lock: Option<LockConfig>,
    #[serde(default)]
    pub tomography: Option<TomographyConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub kind: StateKind,
    #[serde(default)]
    pub bell: Option<String>,
    /// Interference coherence in [0, 1]; below 1 the state dephases.
    #[serde(default)]
    pub coherence: Option<f64>,
    #[serde(default)]
    pub pump_1: Option<CircularLabel>,
    #[serde(default)]
    pub coupling_1: Option<CircularLabel>,
    #[serde(default)]
    pub pump_2: Option<CircularLabel>,
    #[serde(default)]
    pub coupling_2: Option<CircularLabel>,
    #[serde(default)]
    pub phase_rad: Option<f64>,
    #[serde(default)]
    pub weight_1: Option<f64>,
    #[serde(default)]
    pub weight_2: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Bell,
    TwoPath,
    Fixture,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
pub enum CircularLabel {
    Plus,
    Minus,
}

impl From<CircularLabel> for Circular {
    fn from(c: CircularLabel) -> Self {
        match c {
            CircularLabel::Plus => Circular::Plus,
            CircularLabel::Minus => Circular::Minus,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub mode: WaveformMode,
    #[serde(default)]
    pub coupling_power_mw: Option<f64>,
    #[serde(default)]
    pub window_fwhm_mhz: Option<f64>,
    #[serde(default)]
    pub group_delay_ns: Option<f64>,
    #[serde(default)]
    pub rise_time_ns: Option<f64>,
    #[serde(default)]
    pub broad_weight: Option<f64>,
    #[serde(default)]
    pub broad_fwhm_mhz: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum WaveformMode {
    /// Shape solved from the coupling power through the reference power law.
    Calibrated,
    /// The correlation-reproduction shape.
    CorrelationReference,
    /// Explicit spectral parameters.
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub pair_hz: f64,
    pub singles_hz: [f64; 2],
    #[serde(default)]
    pub leakage_pair_hz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub fiber: [f64; 2],
    pub filter: [f64; 2],
    pub detector: [f64; 2],
    pub duty_cycle: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzersConfig {
    pub stokes: biphoton_core::io::AnalyzerSettings,
    pub anti_stokes: biphoton_core::io::AnalyzerSettings,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub duration_s: f64,
    #[serde(default)]
    pub event_cap: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockConfig {
    pub drift_std_rad: f64,
    pub step_interval_ms: f64,
    pub proportional_gain: f64,
    pub integral_gain: f64,
    pub actuation_limit_rad: f64,
    pub setpoint_rad: f64,
    pub duration_ms: f64,
    #[serde(default)]
    pub offset_phase_rad: f64,
    #[serde(default = "default_lambda_p")]
    pub lambda_p_nm: f64,
    #[serde(default = "default_lambda_c")]
    pub lambda_c_nm: f64,
    #[serde(default = "default_lambda_c")]
    pub lambda_lock_nm: f64,
    #[serde(default)]
    pub setpoints_rad: Option<Vec<f64>>,
}

fn default_lambda_p() -> f64 {
    780.0
}

fn default_lambda_c() -> f64 {
    795.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub intensity: f64,
    #[serde(default)]
    pub background_per_setting: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_resamples: usize,
    #[serde(default)]
    pub target: Option<String>,
}

fn default_bootstrap() -> usize {
    250
}

/// Pieces of the phase-lock simulation extracted from the config.
pub struct LockParts {
    pub drift: DriftModel<f64>,
    pub controller: ControllerParams<f64>,
    pub link: PhaseLink<f64>,
    pub duration_ms: f64,
    pub setpoints_rad: Vec<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ScenarioConfig =
            toml::from_str(&text).map_err(|e| anyhow!("config {}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!(
                "config schema version {} is not supported (expected {})",
                self.schema,
                SCHEMA_VERSION
            );
        }
        if let Some(c) = self.state.coherence {
            if !(0.0..=1.0).contains(&c) {
                bail!("state.coherence must be in [0, 1], got {c}");
            }
        }
        if self.rates.pair_hz < 0.0
            || self.rates.leakage_pair_hz < 0.0
            || self.rates.singles_hz.iter().any(|r| *r < 0.0)
        {
            bail!("rates must be non-negative");
        }
        for (name, pair) in [
            ("fiber", &self.detection.fiber),
            ("filter", &self.detection.filter),
            ("detector", &self.detection.detector),
        ] {
            if pair.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
                bail!("detection.{name} efficiencies must be in (0, 1]");
            }
        }
        if !(self.detection.duty_cycle > 0.0 && self.detection.duty_cycle <= 1.0) {
            bail!(
                "detection.duty_cycle must be in (0, 1], got {}",
                self.detection.duty_cycle
            );
        }
        if self.run.duration_s <= 0.0 {
            bail!(
                "run.duration_s must be positive, got {}",
                self.run.duration_s
            );
        }
        Ok(())
    }

    fn bell_kind(&self) -> Result<BellKind> {
        let name = self
            .state
            .bell
            .as_deref()
            .ok_or_else(|| anyhow!("state.bell is required for kind = \"bell\"/\"fixture\""))?;
        name.parse::<BellKind>()
            .map_err(|e| anyhow!("state.bell: {e}"))
    }

    fn two_path_config(&self) -> Result<SfwmPathConfig<f64>> {
        let s = &self.state;
        let missing = || anyhow!("two_path state needs pump_1/coupling_1/pump_2/coupling_2");
        let mut cfg = SfwmPathConfig::balanced(
            s.pump_1.ok_or_else(missing)?.into(),
            s.coupling_1.ok_or_else(missing)?.into(),
            s.pump_2.ok_or_else(missing)?.into(),
            s.coupling_2.ok_or_else(missing)?.into(),
            s.phase_rad.unwrap_or(0.0),
        );
        if let (Some(w1), Some(w2)) = (s.weight_1, s.weight_2) {
            cfg = cfg
                .with_weights(w1, w2)
                .map_err(|e| anyhow!("state weights: {e}"))?;
        }
        Ok(cfg)
    }

    /// The polarization state of the pair, with optional dephasing.
    pub fn pair_state(&self) -> Result<PairState<f64>> {
        let coherence = self.state.coherence.unwrap_or(1.0);
        match self.state.kind {
            StateKind::Bell => {
                let kind = self.bell_kind()?;
                if (coherence - 1.0).abs() < f64::EPSILON {
                    Ok(PairState::Pure(bell_state(kind)))
                } else {
                    let cfg = SfwmPathConfig::<f64>::bell(kind);
                    Ok(PairState::Mixed(dephased_two_path_density(&cfg, coherence)))
                }
            }
            StateKind::TwoPath => {
                let cfg = self.two_path_config()?;
                if (coherence - 1.0).abs() < f64::EPSILON {
                    let out = two_path_state(&cfg);
                    if out.degenerate {
                        eprintln!("note: both paths emit the same product state; no entanglement");
                    }
                    Ok(PairState::Pure(out.state))
                } else {
                    Ok(PairState::Mixed(dephased_two_path_density(&cfg, coherence)))
                }
            }
            StateKind::Fixture => {
                let kind = self.bell_kind()?;
                let (rho, diag) = reference_density_matrix(kind);
                if !diag.is_physical() {
                    eprintln!(
                        "note: fixture {} is flagged unphysical (min eigenvalue {:.3})",
                        kind.name(),
                        diag.min_eigenvalue
                    );
                }
                Ok(PairState::Mixed(rho.physical_projection()))
            }
        }
    }

    pub fn waveform(&self) -> Result<TemporalWaveform<f64>> {
        match self.waveform.mode {
            WaveformMode::Calibrated => {
                let p = self
                    .waveform
                    .coupling_power_mw
                    .ok_or_else(|| anyhow!("waveform.coupling_power_mw required"))?;
                let cal = PowerCalibration::<f64>::reference();
                let grid = FrequencyGrid::default_analysis();
                let params = cal.params_for_power(p, &grid)?;
                Ok(model_waveform(&params, &grid)?)
            }
            WaveformMode::CorrelationReference => {
                Ok(biphoton_core::presets::correlation_reference_waveform()?)
            }
            WaveformMode::Explicit => {
                let w = self
                    .waveform
                    .window_fwhm_mhz
                    .ok_or_else(|| anyhow!("waveform.window_fwhm_mhz required"))?;
                let mut params = SpectralModelParams::new(
                    self.waveform.coupling_power_mw.unwrap_or(2.0),
                    w,
                    self.waveform.group_delay_ns.unwrap_or(0.0),
                );
                if let Some(r) = self.waveform.rise_time_ns {
                    params.rise_time_ns = r;
                }
                if let Some(b) = self.waveform.broad_weight {
                    params.broad_weight = b;
                }
                if let Some(b) = self.waveform.broad_fwhm_mhz {
                    params.broad_fwhm_mhz = b;
                }
                let grid = FrequencyGrid::fine_time();
                Ok(model_waveform(&params, &grid)?)
            }
        }
    }

    /// Assemble the full synthetic-acquisition scenario.
    pub fn scenario(&self, seed_override: Option<u64>) -> Result<ExperimentScenario> {
        let mut scenario = ExperimentScenario::new(
            self.pair_state()?,
            self.waveform()?,
            self.rates.pair_hz,
            self.run.duration_s,
            seed_override.unwrap_or(self.seed),
        );
        scenario.singles_rate_hz = self.rates.singles_hz;
        scenario.leakage_pair_rate_hz = self.rates.leakage_pair_hz;
        scenario.efficiencies = [
            EfficiencyChain {
                fiber: self.detection.fiber[0],
                filter: self.detection.filter[0],
                detector: self.detection.detector[0],
            },
            EfficiencyChain {
                fiber: self.detection.fiber[1],
                filter: self.detection.filter[1],
                detector: self.detection.detector[1],
            },
        ];
        scenario.duty_cycle = self.detection.duty_cycle;
        if let Some(a) = &self.analyzers {
            use biphoton_core::optics::analyzer_projector;
            scenario.analyzers = Some((
                analyzer_projector(&a.stokes.chain()),
                analyzer_projector(&a.anti_stokes.chain()),
            ));
        }
        if let Some(cap) = self.run.event_cap {
            scenario.event_cap = cap;
        }
        Ok(scenario)
    }

    pub fn lock_parts(&self, seed_override: Option<u64>) -> Result<LockParts> {
        let lock = self
            .lock
            .as_ref()
            .ok_or_else(|| anyhow!("config has no [lock] section"))?;
        let drift = DriftModel::new(
            lock.drift_std_rad,
            lock.step_interval_ms,
            seed_override.unwrap_or(self.seed),
        );
        let controller = ControllerParams {
            proportional_gain: lock.proportional_gain,
            integral_gain: lock.integral_gain,
            actuation_limit_rad: lock.actuation_limit_rad,
            setpoint_rad: lock.setpoint_rad,
        };
        let link = PhaseLink::from_wavelengths(
            lock.lambda_p_nm * 1e-9,
            lock.lambda_c_nm * 1e-9,
            lock.lambda_lock_nm * 1e-9,
            lock.offset_phase_rad,
        );
        let pi = std::f64::consts::PI;
        let setpoints_rad = lock
            .setpoints_rad
            .clone()
            .unwrap_or_else(|| vec![0.0, pi / 3.0, 2.0 * pi / 3.0, pi]);
        Ok(LockParts {
            drift,
            controller,
            link,
            duration_ms: lock.duration_ms,
            setpoints_rad,
        })
    }
}
