//! The experiment subcommands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use t1echo::{
    chi_analytic, chi_reconstruct, compose_phase_rotation, decay_curve, derive, echo_schedule,
    process_fidelity, pulse_loss_curve, trajectory, ChiMatrix, PulseMode, PureState,
};

use crate::config::ExperimentConfig;
use crate::output::{write_json, Table};

fn output_path(cfg: &ExperimentConfig) -> Result<&Path> {
    match &cfg.output {
        Some(p) => Ok(Path::new(p)),
        None => bail!("missing output path: pass --output FILE"),
    }
}

fn warn_rwa(cfg: &ExperimentConfig) -> Result<()> {
    let d = cfg
        .delta_omega
        .iter()
        .cloned()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    if let Some(w) = cfg.params_at(d)?.rwa_warning() {
        eprintln!("warning: {w}");
    }
    Ok(())
}

#[derive(Serialize)]
struct DerivedReport {
    config: ExperimentConfig,
    omega0: f64,
    xi0: f64,
    delta_omega_1: f64,
    xi1: f64,
    omega1: f64,
    t_pi: f64,
    t_swap: f64,
    pulse_pair_vs_full_swap: f64,
    gamma_plus: f64,
    gamma2_q: f64,
    gamma2_m: f64,
    clamp_engaged: bool,
}

/// Print (and optionally write) the derived working-point quantities.
pub fn cmd_derive(cfg: ExperimentConfig) -> Result<()> {
    warn_rwa(&cfg)?;
    let d = cfg.single_detuning()?;
    let params = cfg.params_at(d)?;
    let noise = cfg.noise()?;
    let dp = derive(&params, &noise);
    let report = DerivedReport {
        omega0: dp.omega0,
        xi0: dp.xi0,
        delta_omega_1: dp.delta_omega_1,
        xi1: dp.xi1,
        omega1: dp.omega1,
        t_pi: dp.t_pi,
        t_swap: dp.t_swap,
        pulse_pair_vs_full_swap: dp.t_pi / dp.t_swap,
        gamma_plus: dp.gamma_plus,
        gamma2_q: noise.gamma2_q(),
        gamma2_m: noise.gamma2_m(),
        clamp_engaged: dp.clamp_engaged,
        config: cfg.clone(),
    };
    if cfg.format == "json" {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{:<24}value", "quantity");
        println!("{:<24}{}", "omega0", report.omega0);
        println!("{:<24}{}", "xi0", report.xi0);
        println!("{:<24}{}", "delta_omega_1", report.delta_omega_1);
        println!("{:<24}{}", "xi1", report.xi1);
        println!("{:<24}{}", "omega1", report.omega1);
        println!("{:<24}{}", "t_pi", report.t_pi);
        println!("{:<24}{}", "t_swap", report.t_swap);
        println!(
            "{:<24}{}",
            "2t_pi / 2t_swap", report.pulse_pair_vs_full_swap
        );
        println!("{:<24}{}", "gamma_plus", report.gamma_plus);
        println!("{:<24}{}", "gamma2_q", report.gamma2_q);
        println!("{:<24}{}", "gamma2_m", report.gamma2_m);
        println!("{:<24}{}", "clamp_engaged", report.clamp_engaged);
        if report.clamp_engaged {
            println!(
                "note: pulse detuning clamped to {} (axis error ~{:.3} deg)",
                report.delta_omega_1,
                (1.0 / cfg.clamp_factor).atan().to_degrees()
            );
        }
    }
    if cfg.output.is_some() {
        write_json(output_path(&cfg)?, &report)?;
    }
    Ok(())
}

/// Bloch-sphere trajectory of the closed-system sequence.
pub fn cmd_trajectory(cfg: ExperimentConfig) -> Result<()> {
    warn_rwa(&cfg)?;
    let d = cfg.single_detuning()?;
    let params = cfg.params_at(d)?;
    let mode = cfg.pulse_mode()?;
    let schedule = echo_schedule(&params, mode, cfg.t_max, cfg.recovery)?;
    let total = schedule.total_duration();
    let sample_dt = if total > 0.0 {
        total / cfg.points as f64
    } else {
        1.0
    };
    let points = trajectory(&schedule, &PureState::excited_qubit(), &params, sample_dt)?;
    let mut table = Table::new(cfg.clone(), &["time", "x", "y", "z", "p_excited_qubit"]);
    for pt in points {
        table.push(vec![
            pt.time,
            pt.bloch.x,
            pt.bloch.y,
            pt.bloch.z,
            pt.p_excited_qubit,
        ]);
    }
    table.write(output_path(&cfg)?, &cfg.format)?;
    Ok(())
}

/// Decay comparison: with the sequence, without it, and the two analytic
/// references, one panel per detuning.
pub fn cmd_decay(cfg: ExperimentConfig) -> Result<()> {
    warn_rwa(&cfg)?;
    let noise = cfg.noise()?;
    let model = cfg.noise_model()?;
    let mode = cfg.pulse_mode()?;
    let gamma_plus = noise.gamma_plus();
    let t_grid = cfg.t_grid();
    let mut table = Table::new(
        cfg.clone(),
        &[
            "delta_omega",
            "time",
            "p1q_simulated",
            "p1q_free",
            "p1q_reference_qubit",
            "p1q_reference_gammaplus",
        ],
    );
    for &d in &cfg.delta_omega {
        let params = cfg.params_at(d)?;
        let seq = decay_curve(&params, &noise, mode, model, &t_grid)?;
        // The pulse-free comparison curve, evaluated at the same reported
        // times (they differ from the grid when pulses cost 2 t_pi).
        let times: Vec<f64> = seq.iter().map(|pt| pt.time).collect();
        let free = decay_curve(&params, &noise, PulseMode::None, model, &times)?;
        for (s, f) in seq.iter().zip(free.iter()) {
            table.push(vec![
                d,
                s.time,
                s.p1q,
                f.p1q,
                (-noise.gamma1_q() * s.time).exp(),
                (-gamma_plus * s.time).exp(),
            ]);
        }
    }
    table.write(output_path(&cfg)?, &cfg.format)?;
    Ok(())
}

/// Pulse-only loss sweep over the initial detuning.
pub fn cmd_pulse_loss(cfg: ExperimentConfig) -> Result<()> {
    warn_rwa(&cfg)?;
    let noise = cfg.noise()?;
    let model = cfg.noise_model()?;
    let base = cfg.params_at(cfg.delta_omega[0])?;
    let points = pulse_loss_curve(&base, &noise, model, &cfg.delta_omega)?;
    let mut table = Table::new(
        cfg.clone(),
        &[
            "delta_omega",
            "p1q_simulated",
            "p1q_reference_qubit",
            "p1q_reference_gammaplus",
        ],
    );
    for pt in points {
        table.push(vec![
            pt.delta_omega,
            pt.p1q,
            pt.reference_qubit,
            pt.reference_gamma_plus,
        ]);
    }
    table.write(output_path(&cfg)?, &cfg.format)?;
    Ok(())
}

fn chi_entries(chi: &ChiMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..4)
        .map(|m| {
            (0..4)
                .map(|n| {
                    let z = chi.entry(m, n);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct TomographyReport {
    config: ExperimentConfig,
    basis: [&'static str; 4],
    time: f64,
    /// Lab-frame precession angle epsilon * t composed into the channel
    /// (0 when epsilon is not supplied).
    lab_frame_angle: f64,
    chi_reconstructed: Vec<Vec<[f64; 2]>>,
    chi_analytic: Vec<Vec<[f64; 2]>>,
    process_fidelity: f64,
}

/// Process tomography of the full sequence at T = t_max, compared against
/// the closed-form channel.
pub fn cmd_tomography(cfg: ExperimentConfig) -> Result<()> {
    if cfg.format != "json" {
        bail!("invalid value for format: tomography artifacts are JSON only");
    }
    warn_rwa(&cfg)?;
    let d = cfg.single_detuning()?;
    let params = cfg.params_at(d)?;
    let noise = cfg.noise()?;
    let model = cfg.noise_model()?;
    let mode = cfg.pulse_mode()?;
    let t = cfg.t_max;

    let mut rec = chi_reconstruct(&params, &noise, model, mode, t)
        .context("tomography reconstruction failed")?;
    let lab_angle = cfg.epsilon.map_or(0.0, |eps| eps * t);
    if lab_angle != 0.0 {
        rec = compose_phase_rotation(&rec, lab_angle)?;
    }
    let ana = chi_analytic(noise.gamma_plus(), cfg.epsilon.unwrap_or(0.0), t)?;
    let fidelity = process_fidelity(&ana, &rec);

    let report = TomographyReport {
        basis: ["I", "X", "Y", "Z"],
        time: t,
        lab_frame_angle: lab_angle,
        chi_reconstructed: chi_entries(&rec),
        chi_analytic: chi_entries(&ana),
        process_fidelity: fidelity,
        config: cfg.clone(),
    };
    write_json(output_path(&cfg)?, &report)?;
    println!("process fidelity vs analytic channel: {fidelity}");
    Ok(())
}
