//! Deterministic simulator of the T1-echo pulse sequence for a qubit
//! coherently coupled to a two-level memory.
//!
//! The crate covers the closed-system unitaries on the effective
//! one-excitation Bloch sphere, open-system evolution under a local Lindblad
//! and a secular dressed-basis master equation, and single-qubit process
//! tomography of the full sequence.
//!
//! Rates and frequencies are quoted in units of the qubit relaxation rate
//! gamma_1q; times in 1/gamma_1q.

pub mod error;
pub mod linalg;
pub mod model;
pub mod open;
pub mod tomography;
pub mod unitary;

pub use error::{Error, Result};
pub use linalg::{CMat, DensityMatrix, PureState, C64};
pub use model::{derive, gamma_plus, DerivedParams, NoiseRates, SystemParams};
pub use open::{
    decay_curve, excited_population, propagate, propagate_ode, pulse_loss_curve, DecayPoint,
    NoiseModel, PropagatorCache, PulseLossPoint,
};
pub use tomography::{
    chi_analytic, chi_reconstruct, compose_phase_rotation, process_fidelity, ChiMatrix,
};
pub use unitary::{
    echo_pulse, echo_schedule, free_propagator, hamiltonian, pulse_via_detuning, run_schedule,
    state_to_bloch, trajectory, BlochVector, PulseMode, PulseSchedule, Segment, SubspaceUnitary,
    TrajectoryPoint,
};
