//! Experiment configuration: defaults, presets, config files and flag
//! overrides, resolved into the block embedded in every output file.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use t1echo::{NoiseModel, NoiseRates, PulseMode, SystemParams};

/// Partial configuration as read from a TOML/JSON file or a preset.
/// Unknown keys are rejected so typos are reported by name.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub preset: Option<String>,
    pub v_perp: Option<f64>,
    pub delta_omega: Option<Vec<f64>>,
    pub gamma1_q: Option<f64>,
    pub gamma1_m: Option<f64>,
    pub gammaphi_q: Option<f64>,
    pub gammaphi_m: Option<f64>,
    pub clamp_factor: Option<f64>,
    pub epsilon: Option<f64>,
    pub model: Option<String>,
    pub pulses: Option<String>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub recovery: Option<bool>,
    pub format: Option<String>,
    pub output: Option<String>,
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let is_json = path.extension().and_then(|e| e.to_str()) == Some("json");
        let cfg: RawConfig = if is_json {
            serde_json::from_str(&text)
                .with_context(|| format!("invalid JSON config {}", path.display()))?
        } else {
            toml::from_str(&text)
                .with_context(|| format!("invalid TOML config {}", path.display()))?
        };
        Ok(cfg)
    }

    /// Overlay `other` on top of `self` (fields set in `other` win).
    pub fn merged_with(mut self, other: RawConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            experiment,
            preset,
            v_perp,
            delta_omega,
            gamma1_q,
            gamma1_m,
            gammaphi_q,
            gammaphi_m,
            clamp_factor,
            epsilon,
            model,
            pulses,
            t_max,
            points,
            recovery,
            format,
            output
        );
        self
    }
}

/// Fully resolved configuration; serialized verbatim into every artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub preset: Option<String>,
    pub v_perp: f64,
    pub delta_omega: Vec<f64>,
    pub gamma1_q: f64,
    pub gamma1_m: f64,
    pub gammaphi_q: f64,
    pub gammaphi_m: f64,
    pub clamp_factor: f64,
    pub epsilon: Option<f64>,
    pub model: String,
    pub pulses: String,
    pub t_max: f64,
    pub points: usize,
    pub recovery: bool,
    pub format: String,
    pub output: Option<String>,
}

/// Named parameter presets pinning the reference scenarios shipped with the
/// simulator (see README for the full table).
pub fn preset(name: &str) -> Result<RawConfig> {
    let mut cfg = RawConfig {
        v_perp: Some(5.0),
        gamma1_q: Some(1.0),
        gamma1_m: Some(0.0),
        gammaphi_q: Some(0.0),
        gammaphi_m: Some(0.0),
        ..RawConfig::default()
    };
    match name {
        // Resonant echo on the one-excitation Bloch sphere, recovery pulse
        // omitted (the pre-recovery state already equals the start state up
        // to a phase); T = 2 pi / (3 omega0).
        "fig2" => {
            cfg.experiment = Some("trajectory".into());
            cfg.delta_omega = Some(vec![0.0]);
            cfg.gamma1_q = Some(0.0);
            cfg.pulses = Some("ideal".into());
            cfg.t_max = Some(2.0 * std::f64::consts::PI / (3.0 * 5.0));
            cfg.points = Some(600);
            cfg.recovery = Some(false);
        }
        // Full sequence at delta_omega = -v_perp (xi0 = 3 pi/4),
        // T = 2 pi / omega0.
        "fig3" => {
            cfg.experiment = Some("trajectory".into());
            cfg.delta_omega = Some(vec![-5.0]);
            cfg.gamma1_q = Some(0.0);
            cfg.pulses = Some("ideal".into());
            cfg.t_max = Some(2.0 * std::f64::consts::PI / 50f64.sqrt());
            cfg.points = Some(600);
            cfg.recovery = Some(true);
        }
        // Ideal-pulse decay comparison, relaxation on the qubit only,
        // three detuning panels.
        "fig5" => {
            cfg.experiment = Some("decay".into());
            cfg.delta_omega = Some(vec![0.0, 5.0, 15.0]);
            cfg.pulses = Some("ideal".into());
            cfg.model = Some("secular".into());
            cfg.t_max = Some(4.0);
            cfg.points = Some(401);
        }
        // Hamiltonian-pulse decay with qubit dephasing, small detunings.
        "fig6" => {
            cfg.experiment = Some("decay".into());
            cfg.delta_omega = Some(vec![0.0, 1.0, 2.0]);
            cfg.gammaphi_q = Some(0.5);
            cfg.pulses = Some("hamiltonian".into());
            cfg.model = Some("lindblad".into());
            cfg.t_max = Some(4.0);
            cfg.points = Some(401);
        }
        // Pulse-only loss sweep over the initial detuning.
        "fig7" => {
            cfg.experiment = Some("pulse-loss".into());
            cfg.delta_omega = Some((0..=200).map(|i| 0.1 * i as f64).collect());
            cfg.gammaphi_q = Some(0.5);
            cfg.pulses = Some("hamiltonian".into());
            cfg.model = Some("lindblad".into());
        }
        other => bail!("unknown preset '{other}' (available: fig2, fig3, fig5, fig6, fig7)"),
    }
    cfg.preset = Some(name.to_string());
    Ok(cfg)
}

pub fn resolve(experiment: &str, raw: RawConfig) -> Result<ExperimentConfig> {
    // `derive` is a pure parameter report and accepts any preset/config;
    // artifact-producing commands must match the configured experiment.
    if experiment != "derive" {
        if let Some(exp) = &raw.experiment {
            if exp != experiment {
                bail!(
                    "config key experiment = '{exp}' does not match the '{experiment}' subcommand"
                );
            }
        }
    }
    let cfg = ExperimentConfig {
        experiment: experiment.to_string(),
        preset: raw.preset,
        v_perp: raw.v_perp.unwrap_or(5.0),
        delta_omega: raw.delta_omega.unwrap_or_else(|| vec![0.0]),
        gamma1_q: raw.gamma1_q.unwrap_or(1.0),
        gamma1_m: raw.gamma1_m.unwrap_or(0.0),
        gammaphi_q: raw.gammaphi_q.unwrap_or(0.0),
        gammaphi_m: raw.gammaphi_m.unwrap_or(0.0),
        clamp_factor: raw.clamp_factor.unwrap_or(50.0),
        epsilon: raw.epsilon,
        model: raw.model.unwrap_or_else(|| "lindblad".into()),
        pulses: raw.pulses.unwrap_or_else(|| "ideal".into()),
        t_max: raw.t_max.unwrap_or(4.0),
        points: raw.points.unwrap_or(201),
        recovery: raw.recovery.unwrap_or(true),
        format: raw.format.unwrap_or_else(|| {
            if experiment == "tomography" {
                "json".into()
            } else {
                "csv".into()
            }
        }),
        output: raw.output,
    };
    // Validate the enumerated keys up front so errors name the key.
    cfg.noise_model()?;
    cfg.pulse_mode()?;
    match cfg.format.as_str() {
        "csv" | "json" => {}
        other => bail!("invalid value for format: '{other}' (expected csv or json)"),
    }
    if cfg.delta_omega.is_empty() {
        bail!("invalid value for delta_omega: the list must not be empty");
    }
    if cfg.points < 1 {
        bail!(
            "invalid value for points: must be at least 1, got {}",
            cfg.points
        );
    }
    if !cfg.t_max.is_finite() || cfg.t_max < 0.0 {
        bail!(
            "invalid value for t_max: must be non-negative, got {}",
            cfg.t_max
        );
    }
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn noise_model(&self) -> Result<NoiseModel> {
        match self.model.as_str() {
            "lindblad" => Ok(NoiseModel::LindbladLocal),
            "secular" => Ok(NoiseModel::SecularDressed),
            other => Err(anyhow!(
                "invalid value for model: '{other}' (expected lindblad or secular)"
            )),
        }
    }

    pub fn pulse_mode(&self) -> Result<PulseMode> {
        match self.pulses.as_str() {
            "ideal" => Ok(PulseMode::Ideal),
            "hamiltonian" => Ok(PulseMode::Hamiltonian),
            "none" => Ok(PulseMode::None),
            other => Err(anyhow!(
                "invalid value for pulses: '{other}' (expected ideal, hamiltonian or none)"
            )),
        }
    }

    pub fn noise(&self) -> Result<NoiseRates> {
        NoiseRates::new(
            self.gamma1_q,
            self.gamma1_m,
            self.gammaphi_q,
            self.gammaphi_m,
        )
        .map_err(|e| anyhow!("invalid value for gamma1_q/gamma1_m/gammaphi_q/gammaphi_m: {e}"))
    }

    pub fn params_at(&self, delta_omega: f64) -> Result<SystemParams> {
        let mut p = SystemParams::new(self.v_perp, delta_omega)
            .map_err(|e| anyhow!("invalid value for v_perp or delta_omega: {e}"))?
            .with_clamp_factor(self.clamp_factor)
            .map_err(|e| anyhow!("invalid value for clamp_factor: {e}"))?;
        if let Some(eps) = self.epsilon {
            p = p
                .with_epsilon(eps)
                .map_err(|e| anyhow!("invalid value for epsilon: {e}"))?;
        }
        Ok(p)
    }

    /// The single detuning required by derive/trajectory/tomography.
    pub fn single_detuning(&self) -> Result<f64> {
        if self.delta_omega.len() != 1 {
            bail!(
                "invalid value for delta_omega: the {} experiment takes exactly one value, got {}",
                self.experiment,
                self.delta_omega.len()
            );
        }
        Ok(self.delta_omega[0])
    }

    pub fn t_grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_max];
        }
        (0..self.points)
            .map(|i| self.t_max * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}
