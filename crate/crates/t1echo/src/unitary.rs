//! Closed-system evolution: the rotating-frame Hamiltonian, free precession
//! and echo pulses on the one-excitation Bloch sphere, pulse schedules and
//! trajectories.
//!
//! The printed matrices
//!
//! ```text
//! U1(t, xi) = cos(w t/2) 1 - i sin(w t/2) [[-cos xi,  sin xi],
//!                                          [ sin xi,  cos xi]]
//!
//! U_perp(xi) = i [[sin xi,  cos xi],
//!                 [cos xi, -sin xi]]
//! ```
//!
//! are adopted verbatim as definitions in subspace order (|1q0m>, |0q1m>).

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{c, cr, eye, frobenius_norm, CMat, PureState, IDX_MEM, IDX_QUBIT};
use crate::model::{derive, pulse_detuning, NoiseRates, SystemParams};

const UNITARY_TOL: f64 = 1e-12;

/// 2x2 unitary acting on the one-excitation subspace; |0q0m> and |1q1m> are
/// left untouched by the embedded 4x4 operator (their rotating-frame
/// energies are pinned to zero, so no phases accumulate there).
#[derive(Debug, Clone)]
pub struct SubspaceUnitary {
    m: CMat,
}

impl SubspaceUnitary {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: m.nrows(),
            });
        }
        let dev = unitarity_deviation(&m);
        if !dev.is_finite() || dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self { m: eye(2) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    /// Embed into the full space: identity on |0q0m> and |1q1m>, the 2x2
    /// block on (|1q0m>, |0q1m>).
    pub fn embed(&self) -> CMat {
        let mut u = eye(4);
        u[[IDX_QUBIT, IDX_QUBIT]] = self.m[[0, 0]];
        u[[IDX_QUBIT, IDX_MEM]] = self.m[[0, 1]];
        u[[IDX_MEM, IDX_QUBIT]] = self.m[[1, 0]];
        u[[IDX_MEM, IDX_MEM]] = self.m[[1, 1]];
        u
    }

    pub fn dot(&self, other: &SubspaceUnitary) -> SubspaceUnitary {
        SubspaceUnitary {
            m: self.m.dot(&other.m),
        }
    }
}

fn unitarity_deviation(m: &CMat) -> f64 {
    let prod = crate::linalg::dagger(m).dot(m);
    crate::linalg::max_abs_diff(&prod, &eye(m.nrows()))
}

/// Frobenius distance minimized over a global phase:
/// min_phi ||a - e^{i phi} b||. The optimal phase is arg tr(b^dag a); the
/// difference is formed entrywise to avoid cancellation near zero.
pub fn phase_distance(a: &CMat, b: &CMat) -> f64 {
    let overlap: crate::linalg::C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / cr(overlap.norm())
    } else {
        cr(1.0)
    };
    frobenius_norm(&(a - &(b * phase)))
}

/// Point on the effective one-excitation Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Map a one-excitation state to Bloch coordinates with (a, b) the
/// (|1q0m>, |0q1m>) amplitudes: x = 2 Re(a b*), y = 2 Im(b a*),
/// z = |a|^2 - |b|^2.  |1q0m> sits at the north pole.
pub fn state_to_bloch(psi: &PureState) -> Result<BlochVector> {
    let leak = psi.subspace_leakage();
    if leak > 1e-9 {
        return Err(Error::SubspaceLeakage(leak));
    }
    let (a, b) = psi.subspace_amplitudes();
    Ok(BlochVector {
        x: 2.0 * (a * b.conj()).re,
        y: 2.0 * (b * a.conj()).im,
        z: a.norm_sqr() - b.norm_sqr(),
    })
}

// ---------------------------------------------------------------------------
// Hamiltonian and propagators
// ---------------------------------------------------------------------------

/// Rotating-frame Hamiltonian of the coupled pair.
///
/// The one-excitation block in subspace order (|1q0m>, |0q1m>) is
/// `[[-d/2, v/2], [v/2, +d/2]]` with `d` the detuning and `v` the coupling;
/// |0q0m> and |1q1m> are eigenstates pinned at zero energy (a trace shift
/// relative to the lab frame that keeps their phases trivial).
pub fn hamiltonian(params: &SystemParams, detuning_override: Option<f64>) -> CMat {
    let v = params.v_perp();
    let d = detuning_override.unwrap_or_else(|| params.delta_omega());
    let mut h: CMat = Array2::zeros((4, 4));
    h[[IDX_QUBIT, IDX_QUBIT]] = cr(-0.5 * d);
    h[[IDX_MEM, IDX_MEM]] = cr(0.5 * d);
    h[[IDX_QUBIT, IDX_MEM]] = cr(0.5 * v);
    h[[IDX_MEM, IDX_QUBIT]] = cr(0.5 * v);
    h
}

/// Closed-form propagator of the one-excitation block at coupling `v` and
/// detuning `d`, evolved for time `t`.
fn rotation_propagator(t: f64, v: f64, d: f64) -> SubspaceUnitary {
    let omega = (v * v + d * d).sqrt();
    let xi = f64::atan2(v, d);
    let half = 0.5 * omega * t;
    let cos_h = cr(half.cos());
    let sin_h = c(0.0, -half.sin());
    let (sx, cx) = (xi.sin(), xi.cos());
    let m = Array2::from_shape_vec(
        (2, 2),
        vec![
            cos_h + sin_h * cr(-cx),
            sin_h * cr(sx),
            sin_h * cr(sx),
            cos_h + sin_h * cr(cx),
        ],
    )
    .unwrap();
    SubspaceUnitary { m }
}

/// Free precession U1(t, xi_0) at the system's own detuning.
pub fn free_propagator(t: f64, params: &SystemParams) -> Result<SubspaceUnitary> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidDuration(t));
    }
    Ok(rotation_propagator(
        t,
        params.v_perp(),
        params.delta_omega(),
    ))
}

/// The echo pulse U_perp(xi_0): a pi rotation about the in-plane axis
/// perpendicular to the free precession axis.
pub fn echo_pulse(params: &SystemParams) -> SubspaceUnitary {
    let xi0 = f64::atan2(params.v_perp(), params.delta_omega());
    let (s, co) = (xi0.sin(), xi0.cos());
    let i = c(0.0, 1.0);
    let m = Array2::from_shape_vec((2, 2), vec![i * cr(s), i * cr(co), i * cr(co), i * cr(-s)])
        .unwrap();
    SubspaceUnitary { m }
}

/// The echo pulse realized by Hamiltonian evolution only: free precession at
/// the pulse detuning delta_omega_1 for time t_pi. Equals [`echo_pulse`] up
/// to a global phase, exactly for unclamped detunings and within the clamp
/// axis error arctan(1/K) at resonance.
pub fn pulse_via_detuning(params: &SystemParams) -> SubspaceUnitary {
    let v = params.v_perp();
    let (d1, _) = pulse_detuning(params);
    let omega1 = (v * v + d1 * d1).sqrt();
    let t_pi = std::f64::consts::PI / omega1;
    rotation_propagator(t_pi, v, d1)
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

/// How the echo and recovery pulses are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseMode {
    /// Instantaneous ideal gates U_perp.
    Ideal,
    /// Detuned Hamiltonian evolution segments of length t_pi.
    Hamiltonian,
    /// No pulses: free evolution only.
    None,
}

/// One piecewise-constant evolution segment.
#[derive(Debug, Clone)]
pub enum Segment {
    /// Free evolution at the given detuning.
    Free { duration: f64, detuning: f64 },
    /// Pulse realized as detuned evolution (duration = t_pi, detuning =
    /// delta_omega_1 for the canonical schedule).
    DetunedPulse { duration: f64, detuning: f64 },
    /// Instantaneous gate on the one-excitation subspace.
    IdealGate(SubspaceUnitary),
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Free { duration, .. } | Segment::DetunedPulse { duration, .. } => *duration,
            Segment::IdealGate(_) => 0.0,
        }
    }
}

/// Ordered list of evolution segments. The canonical echo schedule has the
/// shape [Free(T/2), pulse, Free(T/2), pulse].
#[derive(Debug, Clone)]
pub struct PulseSchedule {
    segments: Vec<Segment>,
}

impl PulseSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for seg in &segments {
            match seg {
                Segment::Free { duration, detuning }
                | Segment::DetunedPulse { duration, detuning } => {
                    if !duration.is_finite() || *duration < 0.0 {
                        return Err(Error::InvalidDuration(*duration));
                    }
                    if !detuning.is_finite() {
                        return Err(Error::NonFinite {
                            name: "segment detuning",
                            value: *detuning,
                        });
                    }
                }
                Segment::IdealGate(_) => {}
            }
        }
        Ok(Self { segments })
    }

    pub fn empty() -> Self {
        Self {
            segments: Vec::new(),
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }
}

/// Build the echo sequence for free evolution time `t_free`:
/// [Free(T/2), pulse, Free(T/2), pulse] with the pulse realization chosen by
/// `mode` (`PulseMode::None` gives a single free segment). The trailing
/// recovery pulse is dropped when `include_recovery` is false.
pub fn echo_schedule(
    params: &SystemParams,
    mode: PulseMode,
    t_free: f64,
    include_recovery: bool,
) -> Result<PulseSchedule> {
    if !t_free.is_finite() || t_free < 0.0 {
        return Err(Error::InvalidDuration(t_free));
    }
    let d = params.delta_omega();
    let half = Segment::Free {
        duration: 0.5 * t_free,
        detuning: d,
    };
    let pulse = || -> Segment {
        match mode {
            PulseMode::Ideal => Segment::IdealGate(echo_pulse(params)),
            PulseMode::Hamiltonian => {
                let dp = derive(params, &NoiseRates::none());
                Segment::DetunedPulse {
                    duration: dp.t_pi,
                    detuning: dp.delta_omega_1,
                }
            }
            PulseMode::None => unreachable!(),
        }
    };
    let segments = match mode {
        PulseMode::None => vec![Segment::Free {
            duration: t_free,
            detuning: d,
        }],
        _ => {
            let mut s = vec![half.clone(), pulse(), half];
            if include_recovery {
                s.push(pulse());
            }
            s
        }
    };
    PulseSchedule::new(segments)
}

/// Closed-system propagator of one segment, embedded in the full space.
pub fn segment_unitary(segment: &Segment, params: &SystemParams) -> CMat {
    match segment {
        Segment::Free { duration, detuning } | Segment::DetunedPulse { duration, detuning } => {
            rotation_propagator(*duration, params.v_perp(), *detuning).embed()
        }
        Segment::IdealGate(u) => u.embed(),
    }
}

/// Apply the schedule's propagators to `psi0` in order.
pub fn run_schedule(
    schedule: &PulseSchedule,
    psi0: &PureState,
    params: &SystemParams,
) -> Result<PureState> {
    let mut psi = psi0.clone();
    for seg in schedule.segments() {
        psi = psi.apply(&segment_unitary(seg, params))?;
    }
    Ok(psi)
}

/// One sample of a closed-system trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub bloch: BlochVector,
    pub p_excited_qubit: f64,
}

/// Densely sample the state along the schedule, including inside detuned
/// pulses. Ideal gates are zero-duration events: the pre- and post-gate
/// states are recorded at the same timestamp.
pub fn trajectory(
    schedule: &PulseSchedule,
    psi0: &PureState,
    params: &SystemParams,
    sample_dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if !sample_dt.is_finite() || sample_dt <= 0.0 {
        return Err(Error::InvalidSampleStep(sample_dt));
    }
    let point = |time: f64, psi: &PureState| -> Result<TrajectoryPoint> {
        Ok(TrajectoryPoint {
            time,
            bloch: state_to_bloch(psi)?,
            p_excited_qubit: psi.excited_qubit_population(),
        })
    };
    let mut out = vec![point(0.0, psi0)?];
    let mut psi = psi0.clone();
    let mut t_abs = 0.0;
    for seg in schedule.segments() {
        match seg {
            Segment::Free { duration, detuning } | Segment::DetunedPulse { duration, detuning } => {
                let steps = (duration / sample_dt).ceil() as usize;
                for k in 1..=steps {
                    let t_loc = (k as f64 * sample_dt).min(*duration);
                    let u = rotation_propagator(t_loc, params.v_perp(), *detuning).embed();
                    out.push(point(t_abs + t_loc, &psi.apply(&u)?)?);
                    if t_loc >= *duration {
                        break;
                    }
                }
                psi =
                    psi.apply(&rotation_propagator(*duration, params.v_perp(), *detuning).embed())?;
                t_abs += duration;
            }
            Segment::IdealGate(u) => {
                psi = psi.apply(&u.embed())?;
                out.push(point(t_abs, &psi)?);
            }
        }
    }
    Ok(out)
}
