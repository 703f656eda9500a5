//! Time evolution of the density matrix over a sweep.
//!
//! [`evolve`] integrates `dρ/dt = Γ(t) ρ` with an adaptive Dormand–Prince
//! 5(4) pair. Output samples are spaced evenly over `[0, T + tail]` and the
//! integrator lands exactly on each of them, so every sample is a genuine
//! integrator state rather than an interpolant. Nothing is renormalized.
//!
//! [`unitary_oracle`] propagates the Schrödinger equation for the same
//! Hamiltonian with a fixed-step fourth-order Magnus scheme. It exists to
//! cross-check [`evolve`] in the closed-system limit.

use num_complex::Complex64;

use crate::dopri::Dopri5;
use crate::error::{IntegrationError, ParamError, StateError};
use crate::liouvillian::{Generator, Liouville};
use crate::pulses::{detuning, drive_amplitude, envelope};
use crate::types::{BlochVector, DensityState, SweepParams, STATE_TOLERANCE};

/// Tolerance on trace and Hermiticity drift of an integrated trajectory.
pub const INVARIANT_TOLERANCE: f64 = 1e-8;

/// A trajectory is aborted once an invariant drifts past this multiple of
/// its tolerance.
pub const ABORT_FACTOR: f64 = 10.0;

/// Fraction of a nutation period allowed per step: steps never exceed
/// `NUTATION_STEP_FRACTION / max ω_eff`.
pub const NUTATION_STEP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step in ms, before the nutation cap.
    pub max_step: f64,
    /// Number of evenly spaced output samples, endpoints included.
    pub sample_count: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 1.0,
            sample_count: 2000,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        if self.sample_count < 2 {
            return Err(ParamError::Invalid {
                name: "samples",
                reason: format!("need at least 2 samples, got {}", self.sample_count),
            });
        }
        Ok(())
    }

    /// Same settings with both tolerances scaled by `factor`.
    pub fn scaled_tolerances(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// What the drive does after the sweep ends at `t = T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailDrive {
    /// Amplitude drops to zero; populations freeze.
    #[default]
    Off,
    /// The envelope keeps going (a rectangular drive stays at `ω₁`) while
    /// the detuning continues its linear ramp. This is how drive-induced
    /// saturation is observed.
    Continued,
}

/// Extra evolution after the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tail {
    /// Length in ms.
    pub duration: f64,
    pub drive: TailDrive,
}

impl Tail {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn drive_off(duration: f64) -> Self {
        Self {
            duration,
            drive: TailDrive::Off,
        }
    }

    pub fn drive_continued(duration: f64) -> Self {
        Self {
            duration,
            drive: TailDrive::Continued,
        }
    }
}

impl From<f64> for Tail {
    fn from(duration: f64) -> Self {
        Self::drive_off(duration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Time in ms.
    pub t: f64,
    pub state: DensityState,
    pub bloch: BlochVector,
    /// `ρ11`.
    pub p_excited: f64,
    /// Drive amplitude at `t` in rad/ms.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStats {
    pub p_max: f64,
    /// Earliest sample time at which `p_max` is attained.
    pub t_peak: f64,
    pub p_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub params: SweepParams,
    pub stats: TrajectoryStats,
    /// Accumulated local error estimate, an a-posteriori bound on the
    /// global error of any sampled population.
    pub error_estimate: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    fn from_samples(samples: Vec<Sample>, params: SweepParams) -> Self {
        let (p_max, t_peak) = peak_of(&samples);
        let p_final = samples.last().map_or(0.0, |s| s.p_excited);
        Self {
            samples,
            params,
            stats: TrajectoryStats {
                p_max,
                t_peak,
                p_final,
            },
            error_estimate: 0.0,
            accepted_steps: 0,
            rejected_steps: 0,
        }
    }

    pub fn final_state(&self) -> &DensityState {
        &self.samples.last().expect("trajectories are never empty").state
    }
}

fn peak_of(samples: &[Sample]) -> (f64, f64) {
    let p_max = samples
        .iter()
        .map(|s| s.p_excited)
        .fold(f64::NEG_INFINITY, f64::max);
    let t_peak = samples
        .iter()
        .find(|s| s.p_excited >= p_max - 1e-9)
        .map_or(0.0, |s| s.t);
    (p_max, t_peak)
}

/// Global maximum of the excited population over the samples and the
/// earliest time it is reached (within 1e-9).
pub fn max_transfer(trajectory: &Trajectory) -> (f64, f64) {
    peak_of(&trajectory.samples)
}

fn sample_times(t_end: f64, count: usize) -> impl Iterator<Item = f64> {
    let last = (count - 1) as f64;
    (0..count).map(move |i| if i + 1 == count { t_end } else { t_end * i as f64 / last })
}

/// Largest `|ω_eff| = √(Δω² + ω₁²)` over `[0, t_end]`.
fn max_effective_field(params: &SweepParams, t_end: f64, drive_in_tail: bool) -> f64 {
    let dw = detuning(0.0, params)
        .value()
        .abs()
        .max(detuning(t_end, params).value().abs());
    let mut amp = params.peak_amplitude();
    if drive_in_tail && params.gaussian().is_some() {
        // The Gaussian tail never exceeds its peak.
        amp = amp.max(envelope(t_end, params));
    }
    dw.hypot(amp)
}

fn step_cap(settings: &IntegratorSettings, omega_eff: f64) -> f64 {
    if omega_eff > 0.0 {
        settings.max_step.min(NUTATION_STEP_FRACTION / omega_eff)
    } else {
        settings.max_step
    }
}

fn check_invariants(t: f64, state: &DensityState) -> Result<(), IntegrationError> {
    let limit = ABORT_FACTOR * INVARIANT_TOLERANCE;
    let checks = [
        ("trace", state.trace_error()),
        ("hermiticity", state.hermiticity_error()),
        ("bloch norm", (state.bloch().norm() - 1.0).max(0.0)),
    ];
    for (quantity, deviation) in checks {
        if deviation.is_nan() || deviation > limit {
            return Err(IntegrationError::InvariantViolation {
                t,
                quantity,
                deviation,
            });
        }
    }
    Ok(())
}

/// Integrates the master equation from `initial` at `t = 0` to
/// `T + tail.duration`.
///
/// Passing a plain `f64` as `tail` gives a drive-off tail of that length.
pub fn evolve(
    initial: &DensityState,
    params: &SweepParams,
    settings: &IntegratorSettings,
    tail: impl Into<Tail>,
) -> Result<Trajectory, IntegrationError> {
    let tail = tail.into();
    settings.validate()?;
    if !(tail.duration.is_finite() && tail.duration >= 0.0) {
        return Err(ParamError::Negative {
            name: "tail",
            value: tail.duration,
        }
        .into());
    }
    initial.check(STATE_TOLERANCE)?;

    let duration = params.duration();
    let t_end = duration + tail.duration;
    let drive_in_tail = tail.drive == TailDrive::Continued;
    let amplitude_at = |t: f64| {
        if drive_in_tail && t > duration {
            envelope(t, params)
        } else {
            drive_amplitude(t, params)
        }
    };

    let rate = params.rate().value();
    let delta_omega = params.delta_omega().value();
    let tau_c = params.tau_c();
    let relaxation = *params.relaxation();
    let mut rhs = |t: f64, v: &Liouville| {
        Generator::from_rates(amplitude_at(t), rate * t - delta_omega, tau_c, &relaxation).apply(v)
    };

    let cap = step_cap(settings, max_effective_field(params, t_end, drive_in_tail));
    let mut solver = Dopri5::new(
        0.0,
        *initial.liouville(),
        settings.rel_tol,
        settings.abs_tol,
        cap,
        &mut rhs,
    );

    let mut samples = Vec::with_capacity(settings.sample_count);
    for t in sample_times(t_end, settings.sample_count) {
        solver.advance_to(t, &mut rhs)?;
        let state = DensityState::from_liouville_unchecked(solver.y);
        check_invariants(t, &state)?;
        samples.push(Sample {
            t,
            state,
            bloch: state.bloch(),
            p_excited: state.p_excited(),
            amplitude: amplitude_at(t),
        });
    }

    let mut trajectory = Trajectory::from_samples(samples, params.clone());
    trajectory.error_estimate = solver.error_sum;
    trajectory.accepted_steps = solver.accepted;
    trajectory.rejected_steps = solver.rejected;
    Ok(trajectory)
}

type Spinor = [Complex64; 2];

fn spinor_from_state(state: &DensityState) -> Result<Spinor, StateError> {
    let b = state.bloch();
    let norm = b.norm();
    if (norm - 1.0).abs() > STATE_TOLERANCE {
        return Err(StateError::NotPure { norm });
    }
    let theta = (b.mz / norm).clamp(-1.0, 1.0).acos();
    let phi = b.my.atan2(b.mx);
    Ok([
        Complex64::new((0.5 * theta).cos(), 0.0),
        Complex64::from_polar((0.5 * theta).sin(), phi),
    ])
}

fn state_from_spinor(psi: &Spinor) -> DensityState {
    let rho12 = psi[0] * psi[1].conj();
    DensityState::from_liouville_unchecked([
        Complex64::new(psi[0].norm_sqr(), 0.0),
        rho12,
        rho12.conj(),
        Complex64::new(psi[1].norm_sqr(), 0.0),
    ])
}

/// Pauli components `h` of `H = h·σ = ½(ω₁ σx − Δω σz)`.
fn hamiltonian_vector(params: &SweepParams, t: f64) -> [f64; 3] {
    [
        0.5 * drive_amplitude(t, params),
        0.0,
        -0.5 * detuning(t, params).value(),
    ]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// One fourth-order Magnus step `ψ ← exp(Ω) ψ` with Gauss–Legendre nodes.
///
/// With `A = −iH` and `H = h·σ`,
/// `Ω = (Δt/2)(A₁ + A₂) − (√3 Δt²/12)[A₁, A₂] = −i v·σ`, where
/// `v = (Δt/2)(h₁ + h₂) + (√3 Δt²/6)(h₂ × h₁)`.
fn magnus_step(params: &SweepParams, t: f64, dt: f64, psi: &Spinor) -> Spinor {
    let offset = 3f64.sqrt() / 6.0;
    let h1 = hamiltonian_vector(params, t + (0.5 - offset) * dt);
    let h2 = hamiltonian_vector(params, t + (0.5 + offset) * dt);
    let c = cross(h2, h1);
    let k = 3f64.sqrt() / 6.0 * dt * dt;
    let v: [f64; 3] = std::array::from_fn(|i| 0.5 * dt * (h1[i] + h2[i]) + k * c[i]);
    let angle = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if angle == 0.0 {
        return *psi;
    }
    let (s, cos) = angle.sin_cos();
    let n = [v[0] / angle, v[1] / angle, v[2] / angle];
    // exp(−i θ n·σ) = cos θ − i sin θ n·σ
    let i_sin = Complex64::new(0.0, -s);
    let u00 = Complex64::new(cos, 0.0) + i_sin * n[2];
    let u11 = Complex64::new(cos, 0.0) - i_sin * n[2];
    let u01 = i_sin * Complex64::new(n[0], -n[1]);
    let u10 = i_sin * Complex64::new(n[0], n[1]);
    [u00 * psi[0] + u01 * psi[1], u10 * psi[0] + u11 * psi[1]]
}

/// Closed-system reference propagation over `[0, T]` on the same sample
/// grid as [`evolve`].
///
/// Rejects parameters with drive-induced dissipation or relaxation, and
/// initial states that are not pure.
pub fn unitary_oracle(
    initial: &DensityState,
    params: &SweepParams,
    settings: &IntegratorSettings,
) -> Result<Trajectory, IntegrationError> {
    if !params.is_unitary() {
        return Err(IntegrationError::NotUnitary);
    }
    settings.validate()?;
    let mut psi = spinor_from_state(initial)?;

    let t_end = params.duration();
    // Magnus-4 converges as dt⁴; a fifth of the Runge–Kutta cap keeps its
    // error well below the tolerance used to compare the two.
    let h_target = 0.2 * step_cap(settings, max_effective_field(params, t_end, false));

    let mut samples = Vec::with_capacity(settings.sample_count);
    let mut t = 0.0;
    for t_next in sample_times(t_end, settings.sample_count) {
        let span = t_next - t;
        if span > 0.0 {
            let n = (span / h_target).ceil().max(1.0) as usize;
            let dt = span / n as f64;
            for k in 0..n {
                psi = magnus_step(params, t + k as f64 * dt, dt, &psi);
            }
        }
        t = t_next;
        let state = state_from_spinor(&psi);
        samples.push(Sample {
            t,
            state,
            bloch: state.bloch(),
            p_excited: state.p_excited(),
            amplitude: drive_amplitude(t, params),
        });
    }
    Ok(Trajectory::from_samples(samples, params.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{PulseProfile, RelaxationParams, Timing};

    fn rect(omega1: f64, tau_c: f64) -> SweepParams {
        SweepParams::new(
            10.0,
            Timing::Duration(200.0),
            PulseProfile::rectangular(omega1).unwrap(),
            tau_c,
            RelaxationParams::disabled(),
        )
        .unwrap()
    }

    fn settings(samples: usize) -> IntegratorSettings {
        IntegratorSettings {
            sample_count: samples,
            ..Default::default()
        }
    }

    #[test]
    fn settings_validation() {
        let mut s = IntegratorSettings::default();
        assert!(s.validate().is_ok());
        s.rel_tol = 0.0;
        assert_eq!(s.validate().unwrap_err().name(), "rel_tol");
        let s = IntegratorSettings {
            sample_count: 1,
            ..Default::default()
        };
        assert_eq!(s.validate().unwrap_err().name(), "samples");
        let p = rect(1.0, 0.0);
        let e = evolve(&DensityState::ground(), &p, &IntegratorSettings::default(), -1.0);
        assert!(matches!(e, Err(IntegrationError::Settings(_))));
    }

    #[test]
    fn sample_grid_is_strictly_increasing() {
        let times: Vec<f64> = sample_times(200.0, 2000).collect();
        assert_eq!(times.len(), 2000);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 200.0);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn undriven_ground_state_stays_put() {
        let p = rect(0.0, 0.37);
        let traj = evolve(&DensityState::ground(), &p, &settings(200), 0.0).unwrap();
        for s in &traj.samples {
            assert_eq!(s.p_excited, 0.0);
        }
        assert_eq!(max_transfer(&traj), (0.0, 0.0));
    }

    #[test]
    fn invalid_initial_state_is_rejected() {
        let bad = DensityState::from_liouville_unchecked([Complex64::new(0.7, 0.0); 4]);
        let e = evolve(&bad, &rect(1.0, 0.0), &settings(10), 0.0);
        assert!(matches!(e, Err(IntegrationError::InitialState(_))));
    }

    #[test]
    fn oracle_rejects_dissipation_and_mixed_states() {
        let s = settings(10);
        assert_eq!(
            unitary_oracle(&DensityState::ground(), &rect(1.0, 0.01), &s).unwrap_err(),
            IntegrationError::NotUnitary
        );
        let relaxing = SweepParams::new(
            10.0,
            Timing::Duration(200.0),
            PulseProfile::rectangular(1.0).unwrap(),
            0.0,
            RelaxationParams::new(1.0, 1e3, 1e3).unwrap(),
        )
        .unwrap();
        assert_eq!(
            unitary_oracle(&DensityState::ground(), &relaxing, &s).unwrap_err(),
            IntegrationError::NotUnitary
        );
        assert!(matches!(
            unitary_oracle(&DensityState::maximally_mixed(), &rect(1.0, 0.0), &s),
            Err(IntegrationError::InitialState(StateError::NotPure { .. }))
        ));
    }

    #[test]
    fn oracle_keeps_undriven_state() {
        let traj = unitary_oracle(&DensityState::ground(), &rect(0.0, 0.0), &settings(50)).unwrap();
        let ground = DensityState::ground();
        for s in &traj.samples {
            for (a, b) in s.state.liouville().iter().zip(ground.liouville()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn spinor_round_trip() {
        let b = BlochVector::new(0.48, -0.6, 0.64);
        let state = DensityState::from_bloch(b).unwrap();
        let back = state_from_spinor(&spinor_from_state(&state).unwrap());
        for (x, y) in state.liouville().iter().zip(back.liouville()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    /// Magnus-4 error shrinks ~16x per halving of the step.
    #[test]
    fn magnus_is_fourth_order() {
        let p = rect(1.0, 0.0);
        let run = |n: usize| {
            let dt = 40.0 / n as f64;
            let mut psi = spinor_from_state(&DensityState::ground()).unwrap();
            for k in 0..n {
                psi = magnus_step(&p, 80.0 + k as f64 * dt, dt, &psi);
            }
            psi
        };
        let reference = run(64_000);
        let err = |n: usize| {
            let psi = run(n);
            ((psi[0] - reference[0]).norm_sqr() + (psi[1] - reference[1]).norm_sqr()).sqrt()
        };
        let (e1, e2) = (err(500), err(1000));
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}, errors {e1:e} {e2:e}");
    }
}
