//! Command-line front end: reproduces the reference scenarios and emits
//! CSV/JSON artifacts with the full resolved configuration embedded.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{preset, resolve, RawConfig};

#[derive(Parser)]
#[command(
    name = "t1echo",
    version,
    about = "Simulator of the T1-echo sequence for a qubit coupled to a two-level memory",
    after_help = "Frequencies and rates are in units of gamma_1q; times in 1/gamma_1q.\n\
                  Presets: fig2, fig3 (trajectory), fig5, fig6 (decay), fig7 (pulse-loss)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived working-point quantities (omega0, xi0, t_pi, ...).
    Derive(CommonArgs),
    /// Bloch-sphere trajectory of the closed-system sequence.
    Trajectory(CommonArgs),
    /// Qubit excited-state population against evolution time.
    Decay(CommonArgs),
    /// Population loss after the two pulses alone, swept over detuning.
    PulseLoss(CommonArgs),
    /// Process tomography of the sequence viewed as a qubit channel.
    Tomography(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (TOML key-value schema, or a JSON block as embedded in
    /// emitted artifacts). Flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter preset; individual keys can be overridden.
    #[arg(long)]
    preset: Option<String>,
    /// Coupling strength (vacuum-Rabi splitting at resonance).
    #[arg(long, allow_hyphen_values = true)]
    v_perp: Option<f64>,
    /// Qubit-memory detuning; comma-separated list for multi-panel decay
    /// runs and pulse-loss sweeps.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta_omega: Option<Vec<f64>>,
    /// Qubit relaxation rate (1 = the unit of rate).
    #[arg(long, allow_hyphen_values = true)]
    gamma1_q: Option<f64>,
    /// Memory relaxation rate.
    #[arg(long, allow_hyphen_values = true)]
    gamma1_m: Option<f64>,
    /// Qubit pure dephasing rate.
    #[arg(long, allow_hyphen_values = true)]
    gammaphi_q: Option<f64>,
    /// Memory pure dephasing rate.
    #[arg(long, allow_hyphen_values = true)]
    gammaphi_m: Option<f64>,
    /// Pulse-detuning clamp factor K: |delta_omega_1| <= K v_perp.
    #[arg(long, allow_hyphen_values = true)]
    clamp_factor: Option<f64>,
    /// Lab-frame splitting; enables the RWA check and lab-frame tomography.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Master equation: lindblad | secular.
    #[arg(long)]
    model: Option<String>,
    /// Pulse realization: ideal | hamiltonian | none.
    #[arg(long)]
    pulses: Option<String>,
    /// Free evolution time span (trajectory/tomography: the single T).
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<f64>,
    /// Grid points (decay) or trajectory samples.
    #[arg(long)]
    points: Option<usize>,
    /// Apply the trailing recovery pulse (trajectory only).
    #[arg(long)]
    recovery: Option<bool>,
    /// Output file path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Artifact format: csv | json.
    #[arg(long)]
    format: Option<String>,
}

impl CommonArgs {
    fn into_raw(self) -> Result<RawConfig> {
        let mut cfg = RawConfig::default();
        if let Some(name) = &self.preset {
            cfg = cfg.merged_with(preset(name)?);
        }
        if let Some(path) = &self.config {
            cfg = cfg.merged_with(RawConfig::from_file(path)?);
        }
        let flags = RawConfig {
            experiment: None,
            preset: self.preset,
            v_perp: self.v_perp,
            delta_omega: self.delta_omega,
            gamma1_q: self.gamma1_q,
            gamma1_m: self.gamma1_m,
            gammaphi_q: self.gammaphi_q,
            gammaphi_m: self.gammaphi_m,
            clamp_factor: self.clamp_factor,
            epsilon: self.epsilon,
            model: self.model,
            pulses: self.pulses,
            t_max: self.t_max,
            points: self.points,
            recovery: self.recovery,
            format: self.format,
            output: self.output.map(|p| p.display().to_string()),
        };
        Ok(cfg.merged_with(flags))
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Derive(args) => commands::cmd_derive(resolve("derive", args.into_raw()?)?),
        Command::Trajectory(args) => {
            commands::cmd_trajectory(resolve("trajectory", args.into_raw()?)?)
        }
        Command::Decay(args) => commands::cmd_decay(resolve("decay", args.into_raw()?)?),
        Command::PulseLoss(args) => {
            commands::cmd_pulse_loss(resolve("pulse-loss", args.into_raw()?)?)
        }
        Command::Tomography(args) => {
            commands::cmd_tomography(resolve("tomography", args.into_raw()?)?)
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
