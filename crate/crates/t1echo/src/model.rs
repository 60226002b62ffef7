//! Physical parameters of the coupled qubit-memory pair and the closed-form
//! quantities derived from them.
//!
//! Unit convention: the qubit relaxation rate gamma_1q defines the unit of
//! rate, so all frequencies and rates are quoted in units of gamma_1q and
//! all times in 1/gamma_1q.

use crate::error::{Error, Result};

/// Default clamp factor K for the singular pulse detuning at resonance:
/// |delta_omega_1| <= K * v_perp, giving an axis error of arctan(1/K).
pub const DEFAULT_CLAMP_FACTOR: f64 = 50.0;

/// Coupling, detuning and (optionally) the lab-frame splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    v_perp: f64,
    delta_omega: f64,
    epsilon: Option<f64>,
    clamp_factor: f64,
}

impl SystemParams {
    /// `v_perp` is the full vacuum-Rabi splitting at resonance (must be > 0);
    /// `delta_omega` is the qubit-memory detuning eps_q - eps_m.
    pub fn new(v_perp: f64, delta_omega: f64) -> Result<Self> {
        if !v_perp.is_finite() || v_perp <= 0.0 {
            return Err(Error::InvalidCoupling(v_perp));
        }
        if !delta_omega.is_finite() {
            return Err(Error::NonFinite {
                name: "delta_omega",
                value: delta_omega,
            });
        }
        Ok(Self {
            v_perp,
            delta_omega,
            epsilon: None,
            clamp_factor: DEFAULT_CLAMP_FACTOR,
        })
    }

    /// Lab-frame splitting eps ~ eps_q ~ eps_m, used only to reinstate
    /// lab-frame phases in process tomography.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        self.epsilon = Some(epsilon);
        Ok(self)
    }

    pub fn with_clamp_factor(mut self, k: f64) -> Result<Self> {
        if !k.is_finite() || k < 1.0 {
            return Err(Error::InvalidClampFactor(k));
        }
        self.clamp_factor = k;
        Ok(self)
    }

    /// Same coupling and clamp, different detuning (used by sweeps).
    pub fn at_detuning(&self, delta_omega: f64) -> Result<Self> {
        let mut p = Self::new(self.v_perp, delta_omega)?;
        p.epsilon = self.epsilon;
        p.clamp_factor = self.clamp_factor;
        Ok(p)
    }

    pub fn v_perp(&self) -> f64 {
        self.v_perp
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn clamp_factor(&self) -> f64 {
        self.clamp_factor
    }

    /// Rotating-wave validity check: warns (never errors) when the coupling
    /// or detuning exceeds a tenth of the lab-frame splitting.
    pub fn rwa_warning(&self) -> Option<String> {
        let eps = self.epsilon?;
        if self.v_perp > 0.1 * eps || self.delta_omega.abs() > 0.1 * eps {
            Some(format!(
                "rotating-wave approximation is questionable: v_perp = {} and \
                 |delta_omega| = {} should stay below 0.1 * epsilon = {}",
                self.v_perp,
                self.delta_omega.abs(),
                0.1 * eps
            ))
        } else {
            None
        }
    }
}

/// Relaxation and pure-dephasing rates for qubit and memory, all >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRates {
    gamma1_q: f64,
    gamma1_m: f64,
    gammaphi_q: f64,
    gammaphi_m: f64,
}

impl NoiseRates {
    pub fn new(gamma1_q: f64, gamma1_m: f64, gammaphi_q: f64, gammaphi_m: f64) -> Result<Self> {
        for (name, value) in [
            ("gamma1_q", gamma1_q),
            ("gamma1_m", gamma1_m),
            ("gammaphi_q", gammaphi_q),
            ("gammaphi_m", gammaphi_m),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeRate { name, value });
            }
        }
        Ok(Self {
            gamma1_q,
            gamma1_m,
            gammaphi_q,
            gammaphi_m,
        })
    }

    /// All rates zero (closed system).
    pub fn none() -> Self {
        Self {
            gamma1_q: 0.0,
            gamma1_m: 0.0,
            gammaphi_q: 0.0,
            gammaphi_m: 0.0,
        }
    }

    pub fn gamma1_q(&self) -> f64 {
        self.gamma1_q
    }

    pub fn gamma1_m(&self) -> f64 {
        self.gamma1_m
    }

    pub fn gammaphi_q(&self) -> f64 {
        self.gammaphi_q
    }

    pub fn gammaphi_m(&self) -> f64 {
        self.gammaphi_m
    }

    /// Total qubit dephasing gamma_2 = gamma_1/2 + gamma_phi (derived,
    /// never stored).
    pub fn gamma2_q(&self) -> f64 {
        0.5 * self.gamma1_q + self.gammaphi_q
    }

    pub fn gamma2_m(&self) -> f64 {
        0.5 * self.gamma1_m + self.gammaphi_m
    }

    pub fn gamma_plus(&self) -> f64 {
        gamma_plus(self)
    }
}

/// Mean of the individual relaxation rates, the effective decay rate of the
/// echoed qubit population.
pub fn gamma_plus(noise: &NoiseRates) -> f64 {
    0.5 * (noise.gamma1_q + noise.gamma1_m)
}

/// Pulse working point: the detuning delta_omega_1 = -v_perp^2 / delta_omega
/// that makes the detuned precession axis perpendicular to the free one,
/// clamped to |delta_omega_1| <= K * v_perp near resonance.
///
/// Returns `(delta_omega_1, clamp_engaged)`. At delta_omega = 0 exactly the
/// clamp value -K * v_perp is used.
pub fn pulse_detuning(params: &SystemParams) -> (f64, bool) {
    let v = params.v_perp;
    let d = params.delta_omega;
    let k = params.clamp_factor;
    if d == 0.0 {
        return (-k * v, true);
    }
    let raw = -v * v / d;
    if raw.abs() > k * v {
        (raw.signum() * k * v, true)
    } else {
        (raw, false)
    }
}

/// Closed-form quantities derived from [`SystemParams`] and [`NoiseRates`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Free precession frequency omega_0 = sqrt(v_perp^2 + delta_omega^2).
    pub omega0: f64,
    /// Detuning angle xi_0 = atan2(v_perp, delta_omega), in (0, pi).
    pub xi0: f64,
    /// Pulse detuning (clamped near resonance, see [`pulse_detuning`]).
    pub delta_omega_1: f64,
    /// Pulse-segment detuning angle xi_1 = atan2(v_perp, delta_omega_1).
    pub xi1: f64,
    /// Precession frequency at the pulse working point.
    pub omega1: f64,
    /// Pulse duration t_pi = pi / omega_1.
    pub t_pi: f64,
    /// Full-SWAP duration t_swap = pi / v_perp.
    pub t_swap: f64,
    /// Mean relaxation rate (gamma_1q + gamma_1m) / 2.
    pub gamma_plus: f64,
    /// Whether the pulse detuning hit the clamp.
    pub clamp_engaged: bool,
}

/// Populate every derived quantity. Pure: identical inputs give bit-identical
/// outputs.
pub fn derive(params: &SystemParams, noise: &NoiseRates) -> DerivedParams {
    let v = params.v_perp;
    let d = params.delta_omega;
    let omega0 = (v * v + d * d).sqrt();
    let xi0 = f64::atan2(v, d);
    let (delta_omega_1, clamp_engaged) = pulse_detuning(params);
    let xi1 = f64::atan2(v, delta_omega_1);
    let omega1 = (v * v + delta_omega_1 * delta_omega_1).sqrt();
    let t_pi = std::f64::consts::PI / omega1;
    let t_swap = std::f64::consts::PI / v;
    DerivedParams {
        omega0,
        xi0,
        delta_omega_1,
        xi1,
        omega1,
        t_pi,
        t_swap,
        gamma_plus: gamma_plus(noise),
        clamp_engaged,
    }
}
