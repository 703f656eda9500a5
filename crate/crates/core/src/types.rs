//! Domain types shared by every other module.
//!
//! Units are fixed crate-wide: time in ms, angular frequency in rad/ms and
//! sweep rate in rad/ms². One rad/ms is one k rad/s, so published numbers
//! quoted in k rad/s can be used unchanged.

use std::fmt;

use num_complex::Complex64;

use crate::error::{ParamError, StateError};
use crate::pulses::GaussianShape;

/// Tolerance on the trace, Hermiticity and Bloch-norm invariants of a
/// [`DensityState`].
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Default cutoff fraction of the Gaussian profile at the pulse edges.
pub const DEFAULT_CUTOFF_FRACTION: f64 = 0.1;

fn finite(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParamError::NotFinite { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, ParamError> {
    let value = finite(name, value)?;
    if value < 0.0 {
        Err(ParamError::Negative { name, value })
    } else {
        Ok(value)
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, ParamError> {
    let value = finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ParamError::NotPositive { name, value })
    }
}

/// Angular frequency in rad/ms. Signed, since detunings change sign.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub fn new(value: f64) -> Result<Self, ParamError> {
        finite("angular frequency", value).map(Self)
    }

    /// Constructor for drive amplitudes and sweep half-widths, which may not
    /// be negative.
    pub fn non_negative(name: &'static str, value: f64) -> Result<Self, ParamError> {
        non_negative(name, value).map(Self)
    }

    pub(crate) fn from_raw(value: f64) -> Self {
        Self(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for AngularFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad/ms", self.0)
    }
}

/// Linear chirp rate in rad/ms².
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SweepRate(f64);

impl SweepRate {
    pub fn new(value: f64) -> Result<Self, ParamError> {
        positive("rate", value).map(Self)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for SweepRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad/ms^2", self.0)
    }
}

/// System-environment relaxation: equilibrium magnetization and the
/// longitudinal and transverse relaxation times.
///
/// An infinite time switches the corresponding process off; its rate is then
/// exactly zero. [`RelaxationParams::disabled`] is the default and uses
/// `m0 = 1`. The `m0` value only matters once `t1` is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationParams {
    m0: f64,
    t1: f64,
    t2: f64,
}

impl RelaxationParams {
    pub fn new(m0: f64, t1: f64, t2: f64) -> Result<Self, ParamError> {
        let m0 = finite("m0", m0)?;
        if !(-1.0..=1.0).contains(&m0) {
            return Err(ParamError::OutOfRange {
                name: "m0",
                range: "[-1, 1]",
                value: m0,
            });
        }
        for (name, value) in [("t1", t1), ("t2", t2)] {
            if value.is_nan() || value <= 0.0 {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        Ok(Self { m0, t1, t2 })
    }

    pub fn disabled() -> Self {
        Self {
            m0: 1.0,
            t1: f64::INFINITY,
            t2: f64::INFINITY,
        }
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// `1/T1`, or exactly zero when longitudinal relaxation is off.
    pub fn longitudinal_rate(&self) -> f64 {
        if self.t1.is_infinite() {
            0.0
        } else {
            1.0 / self.t1
        }
    }

    /// `1/T2`, or exactly zero when transverse relaxation is off.
    pub fn transverse_rate(&self) -> f64 {
        if self.t2.is_infinite() {
            0.0
        } else {
            1.0 / self.t2
        }
    }

    pub fn is_disabled(&self) -> bool {
        self.t1.is_infinite() && self.t2.is_infinite()
    }
}

impl Default for RelaxationParams {
    fn default() -> Self {
        Self::disabled()
    }
}

/// Envelope family of the chirped pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    Rectangular,
    /// Gaussian truncated at `cutoff_fraction` of its peak at both pulse
    /// edges, with the peak chosen so its area equals the rectangular one.
    Gaussian { cutoff_fraction: f64 },
}

impl PulseShape {
    pub fn gaussian(cutoff_fraction: f64) -> Result<Self, ParamError> {
        check_cutoff(cutoff_fraction)?;
        Ok(Self::Gaussian { cutoff_fraction })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PulseShape::Rectangular => "rect",
            PulseShape::Gaussian { .. } => "gauss",
        }
    }

    pub(crate) fn validate(&self) -> Result<(), ParamError> {
        match *self {
            PulseShape::Rectangular => Ok(()),
            PulseShape::Gaussian { cutoff_fraction } => check_cutoff(cutoff_fraction),
        }
    }
}

pub(crate) fn check_cutoff(f: f64) -> Result<(), ParamError> {
    if f.is_finite() && f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name: "cutoff_fraction",
            range: "(0, 1)",
            value: f,
        })
    }
}

/// Pulse envelope plus its amplitude scale.
///
/// For a Gaussian, `omega1` is the amplitude of the rectangular pulse with
/// the same area, not the Gaussian peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseProfile {
    pub shape: PulseShape,
    pub omega1: AngularFrequency,
}

impl PulseProfile {
    pub fn new(shape: PulseShape, omega1: f64) -> Result<Self, ParamError> {
        shape.validate()?;
        Ok(Self {
            shape,
            omega1: AngularFrequency::non_negative("omega1", omega1)?,
        })
    }

    pub fn rectangular(omega1: f64) -> Result<Self, ParamError> {
        Self::new(PulseShape::Rectangular, omega1)
    }

    pub fn gaussian(omega1: f64, cutoff_fraction: f64) -> Result<Self, ParamError> {
        Self::new(PulseShape::gaussian(cutoff_fraction)?, omega1)
    }
}

/// Either side of the `R = 2 δω / T` relation; the other is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timing {
    /// Sweep duration `T` in ms.
    Duration(f64),
    /// Sweep rate `R` in rad/ms².
    Rate(f64),
}

/// Complete physical configuration of one chirped sweep.
///
/// Construction guarantees `2·δω/T == R` bit for bit and caches the Gaussian
/// width and peak, so the propagator never recomputes an error function.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    delta_omega: AngularFrequency,
    duration: f64,
    rate: SweepRate,
    profile: PulseProfile,
    tau_c: f64,
    relaxation: RelaxationParams,
    gaussian: Option<GaussianShape>,
}

impl SweepParams {
    #[doc(alias = "make_sweep_params")]
    pub fn new(
        delta_omega: f64,
        timing: Timing,
        profile: PulseProfile,
        tau_c: f64,
        relaxation: RelaxationParams,
    ) -> Result<Self, ParamError> {
        let delta_omega = AngularFrequency::non_negative("delta_omega", delta_omega)?;
        profile.shape.validate()?;
        AngularFrequency::non_negative("omega1", profile.omega1.value())?;
        let tau_c = non_negative("tau_c", tau_c)?;
        let dw = delta_omega.value();

        let duration = match timing {
            Timing::Duration(t) => positive("duration", t)?,
            Timing::Rate(r) => {
                let r = positive("rate", r)?;
                positive("duration", 2.0 * dw / r).map_err(|_| ParamError::Invalid {
                    name: "delta_omega",
                    reason: "must be positive so the sweep has a finite duration".into(),
                })?
            }
        };
        // Recomputing R from T (rather than keeping a user-supplied R) is what
        // makes the round trip exact.
        let rate = 2.0 * dw / duration;
        let rate = SweepRate::new(rate).map_err(|_| match timing {
            Timing::Duration(_) => ParamError::Invalid {
                name: "delta_omega",
                reason: format!("sweep rate 2*delta_omega/duration = {rate} must be positive"),
            },
            Timing::Rate(r) => ParamError::NotPositive { name: "rate", value: r },
        })?;

        let gaussian = match profile.shape {
            PulseShape::Rectangular => None,
            PulseShape::Gaussian { cutoff_fraction } => Some(GaussianShape::new(
                profile.omega1.value(),
                duration,
                cutoff_fraction,
            )?),
        };

        Ok(Self {
            delta_omega,
            duration,
            rate,
            profile,
            tau_c,
            relaxation,
            gaussian,
        })
    }

    /// Same sweep with a different amplitude scale. Gaussian width and peak
    /// are recomputed.
    pub fn with_omega1(&self, omega1: f64) -> Result<Self, ParamError> {
        Self::new(
            self.delta_omega.value(),
            Timing::Duration(self.duration),
            PulseProfile::new(self.profile.shape, omega1)?,
            self.tau_c,
            self.relaxation,
        )
    }

    pub fn delta_omega(&self) -> AngularFrequency {
        self.delta_omega
    }

    /// Sweep duration `T` in ms.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn rate(&self) -> SweepRate {
        self.rate
    }

    pub fn profile(&self) -> &PulseProfile {
        &self.profile
    }

    pub fn omega1(&self) -> AngularFrequency {
        self.profile.omega1
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn relaxation(&self) -> &RelaxationParams {
        &self.relaxation
    }

    /// Cached Gaussian envelope, `None` for rectangular pulses.
    pub fn gaussian(&self) -> Option<&GaussianShape> {
        self.gaussian.as_ref()
    }

    /// Largest drive amplitude reached during the sweep.
    pub fn peak_amplitude(&self) -> f64 {
        match &self.gaussian {
            Some(g) => g.peak,
            None => self.profile.omega1.value(),
        }
    }

    /// True when the evolution is purely Hamiltonian.
    pub fn is_unitary(&self) -> bool {
        self.tau_c == 0.0 && self.relaxation.is_disabled()
    }
}

/// Bloch vector `M_α = Tr(ρ σ_α)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl BlochVector {
    pub fn new(mx: f64, my: f64, mz: f64) -> Self {
        Self { mx, my, mz }
    }

    pub fn norm(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my + self.mz * self.mz).sqrt()
    }
}

/// Two-level density matrix stored as the Liouville vector
/// `(ρ11, ρ12, ρ21, ρ22)`.
///
/// Index 1 is the `M_z = +1` eigenstate of σ_z (the excited state at the end
/// of the sweep), index 2 the `M_z = −1` ground state the sweep starts from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityState {
    v: [Complex64; 4],
}

impl DensityState {
    /// `diag(0, 1)`, the state `|g⟩` with `M_z = −1`.
    pub fn ground() -> Self {
        Self::diagonal(0.0)
    }

    /// `diag(1, 0)`.
    pub fn excited() -> Self {
        Self::diagonal(1.0)
    }

    pub fn maximally_mixed() -> Self {
        Self::diagonal(0.5)
    }

    fn diagonal(rho11: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            v: [Complex64::new(rho11, 0.0), z, z, Complex64::new(1.0 - rho11, 0.0)],
        }
    }

    /// Validating constructor from a Liouville vector.
    pub fn from_liouville(v: [Complex64; 4]) -> Result<Self, StateError> {
        let state = Self { v };
        state.check(STATE_TOLERANCE)?;
        Ok(state)
    }

    /// `ρ = (1 + M·σ)/2`.
    pub fn from_bloch(b: BlochVector) -> Result<Self, StateError> {
        let norm = b.norm();
        if norm.is_nan() || norm > 1.0 + STATE_TOLERANCE {
            return Err(StateError::BlochNorm { norm });
        }
        Ok(Self::from_bloch_unchecked(b))
    }

    pub(crate) fn from_bloch_unchecked(b: BlochVector) -> Self {
        let rho12 = Complex64::new(0.5 * b.mx, -0.5 * b.my);
        Self {
            v: [
                Complex64::new(0.5 * (1.0 + b.mz), 0.0),
                rho12,
                rho12.conj(),
                Complex64::new(0.5 * (1.0 - b.mz), 0.0),
            ],
        }
    }

    /// Wraps an integrator state without checking invariants.
    pub(crate) fn from_liouville_unchecked(v: [Complex64; 4]) -> Self {
        Self { v }
    }

    pub fn liouville(&self) -> &[Complex64; 4] {
        &self.v
    }

    pub fn rho11(&self) -> f64 {
        self.v[0].re
    }

    pub fn rho22(&self) -> f64 {
        self.v[3].re
    }

    pub fn rho12(&self) -> Complex64 {
        self.v[1]
    }

    pub fn rho21(&self) -> Complex64 {
        self.v[2]
    }

    /// Excited-state population `ρ11`.
    pub fn p_excited(&self) -> f64 {
        self.rho11()
    }

    pub fn trace(&self) -> Complex64 {
        self.v[0] + self.v[3]
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - 1.0).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.v[2] - self.v[1].conj()).norm()
    }

    pub fn bloch(&self) -> BlochVector {
        bloch_from_state(self)
    }

    /// Checks trace, Hermiticity and Bloch norm against `tol`.
    pub fn check(&self, tol: f64) -> Result<(), StateError> {
        let imag = self.v[0].im.abs().max(self.v[3].im.abs());
        if imag.is_nan() || imag > tol {
            return Err(StateError::ComplexPopulation { imag });
        }
        let deviation = self.trace_error();
        if deviation.is_nan() || deviation > tol {
            return Err(StateError::Trace { deviation });
        }
        let deviation = self.hermiticity_error();
        if deviation.is_nan() || deviation > tol {
            return Err(StateError::Hermiticity { deviation });
        }
        let norm = self.bloch().norm();
        if norm.is_nan() || norm > 1.0 + tol {
            return Err(StateError::BlochNorm { norm });
        }
        Ok(())
    }
}

/// Pauli expectation values: `mz = ρ11 − ρ22`, `mx = 2 Re ρ12`,
/// `my = −2 Im ρ12`.
pub fn bloch_from_state(state: &DensityState) -> BlochVector {
    let rho12 = state.rho12();
    BlochVector {
        mx: 2.0 * rho12.re,
        my: -2.0 * rho12.im,
        mz: state.rho11() - state.rho22(),
    }
}
