//! Drive amplitude and detuning of the linearly chirped pulse.
//!
//! The detuning is `Δω(t) = R t − δω`, so the sweep starts at `−δω`, crosses
//! resonance at `T/2` and ends at `+δω`. The amplitude is either constant or a
//! Gaussian truncated at a fraction `f` of its peak at `t = 0` and `t = T`,
//! scaled so both envelopes have the same area.
//!
//! Outside `[0, T]` the pulse is off: [`amplitude`] returns zero there, while
//! the detuning keeps extrapolating linearly.

use std::f64::consts::PI;

use crate::error::ParamError;
use crate::types::{check_cutoff, AngularFrequency, PulseProfile, PulseShape, SweepParams};

/// Instantaneous detuning `R t − δω`.
pub fn detuning(t: f64, params: &SweepParams) -> AngularFrequency {
    AngularFrequency::from_raw(params.rate().value() * t - params.delta_omega().value())
}

/// Width parameter `β = (T/2)² / ln(1/f)` that puts the Gaussian at `f` times
/// its peak at both pulse edges.
pub fn gaussian_width(duration: f64, cutoff_fraction: f64) -> Result<f64, ParamError> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(ParamError::NotPositive {
            name: "duration",
            value: duration,
        });
    }
    check_cutoff(cutoff_fraction)?;
    let half = 0.5 * duration;
    Ok(half * half / (1.0 / cutoff_fraction).ln())
}

/// Gaussian peak whose area over `[0, T]` equals that of a rectangular pulse
/// of amplitude `omega1`:
///
/// `ω₁ᵍ = ω₁ T / (√(πβ) · erf(T / (2√β)))`
pub fn equal_area_peak(omega1: f64, duration: f64, beta: f64) -> AngularFrequency {
    let sqrt_beta = beta.sqrt();
    let area_per_unit_peak = (PI * beta).sqrt() * libm::erf(duration / (2.0 * sqrt_beta));
    AngularFrequency::from_raw(omega1 * duration / area_per_unit_peak)
}

/// Resolved Gaussian envelope `ω₁ᵍ exp(−(t − T/2)² / β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShape {
    /// Width parameter in ms².
    pub beta: f64,
    /// Peak amplitude `ω₁ᵍ` in rad/ms.
    pub peak: f64,
    /// Pulse centre `T/2` in ms.
    pub center: f64,
}

impl GaussianShape {
    pub fn new(omega1: f64, duration: f64, cutoff_fraction: f64) -> Result<Self, ParamError> {
        let beta = gaussian_width(duration, cutoff_fraction)?;
        Ok(Self {
            beta,
            peak: equal_area_peak(omega1, duration, beta).value(),
            center: 0.5 * duration,
        })
    }

    /// Envelope value at `t`, without the `[0, T]` window.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let s = t - self.center;
        self.peak * (-s * s / self.beta).exp()
    }

    /// Full width at half maximum, `σ = 2√(β ln 2)`.
    pub fn fwhm(&self) -> f64 {
        2.0 * (self.beta * std::f64::consts::LN_2).sqrt()
    }
}

/// Drive amplitude of `profile` at time `t` for a pulse of length `duration`.
///
/// This resolves the Gaussian from scratch on every call; inside the
/// propagator use [`drive_amplitude`], which reads the shape cached in
/// [`SweepParams`].
pub fn amplitude(t: f64, profile: &PulseProfile, duration: f64) -> AngularFrequency {
    if !(0.0..=duration).contains(&t) {
        return AngularFrequency::from_raw(0.0);
    }
    let omega1 = profile.omega1.value();
    let value = match profile.shape {
        PulseShape::Rectangular => omega1,
        PulseShape::Gaussian { cutoff_fraction } => {
            match GaussianShape::new(omega1, duration, cutoff_fraction) {
                Ok(shape) => shape.at(t),
                Err(_) => 0.0,
            }
        }
    };
    AngularFrequency::from_raw(value)
}

/// Windowed drive amplitude using the cached envelope of `params`.
#[inline]
pub fn drive_amplitude(t: f64, params: &SweepParams) -> f64 {
    if !(0.0..=params.duration()).contains(&t) {
        return 0.0;
    }
    envelope(t, params)
}

/// Envelope of `params` at `t` with no window: a rectangular drive stays on,
/// a Gaussian keeps following its tails.
#[inline]
pub fn envelope(t: f64, params: &SweepParams) -> f64 {
    match params.gaussian() {
        Some(g) => g.at(t),
        None => params.omega1().value(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{RelaxationParams, Timing};
    use std::f64::consts::{E, LN_10};

    fn params(shape: PulseShape) -> SweepParams {
        SweepParams::new(
            10.0,
            Timing::Duration(200.0),
            PulseProfile::new(shape, 1.0).unwrap(),
            0.0,
            RelaxationParams::disabled(),
        )
        .unwrap()
    }

    /// Maclaurin series of erf, summed until terms vanish. Independent of
    /// the library implementation used by `equal_area_peak`.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -x * x / n;
            sum += term / (2.0 * n + 1.0);
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn detuning_endpoints() {
        let p = params(PulseShape::Rectangular);
        assert_eq!(detuning(0.0, &p).value(), -10.0);
        assert_eq!(detuning(100.0, &p).value(), 0.0);
        assert_eq!(detuning(200.0, &p).value(), 10.0);
        assert_eq!(detuning(300.0, &p).value(), 20.0);
    }

    #[test]
    fn gaussian_width_values() {
        let beta = gaussian_width(200.0, 0.1).unwrap();
        assert!((beta - 10_000.0 / LN_10).abs() < 1e-9);
        assert!((beta - 4342.944819).abs() < 1e-5);
        assert!((gaussian_width(2.0, 1.0 / E).unwrap() - 1.0).abs() < 1e-15);
        let beta = gaussian_width(200.0, 0.5).unwrap();
        assert!((beta - 10_000.0 / std::f64::consts::LN_2).abs() < 1e-9);
        assert!(gaussian_width(200.0, 1.0).is_err());
        assert!(gaussian_width(200.0, 0.0).is_err());
        assert!(gaussian_width(0.0, 0.1).is_err());
    }

    #[test]
    fn erf_matches_series_oracle() {
        for x in [0.05, 0.3, 0.7, 1.0, 1.2, (LN_10).sqrt(), 2.0, 2.5, 3.0] {
            let rel = (libm::erf(x) - erf_series(x)).abs() / erf_series(x);
            assert!(rel <= 1e-10, "x = {x}: relative error {rel:e}");
        }
    }

    #[test]
    fn equal_area_constant() {
        let beta = gaussian_width(200.0, 0.1).unwrap();
        let ratio = equal_area_peak(1.0, 200.0, beta).value();
        assert!((ratio - 1.7686).abs() < 5e-5, "{ratio}");
        let two = equal_area_peak(2.0, 200.0, beta).value();
        assert!((two - 3.5372).abs() < 1e-4);
        assert!((two - 2.0 * ratio).abs() < 1e-14);
        // Independent route through the series oracle.
        let t = 200.0;
        let oracle = t / ((PI * beta).sqrt() * erf_series(t / (2.0 * beta.sqrt())));
        assert!((ratio - oracle).abs() < 1e-10);
    }

    #[test]
    fn flat_gaussian_tends_to_rectangle() {
        let beta = 1e12 * 100.0 * 100.0;
        let peak = equal_area_peak(1.0, 200.0, beta).value();
        assert!((peak - 1.0).abs() < 1e-4);
        assert!(peak > 1.0);
    }

    #[test]
    fn gaussian_amplitude_landmarks() {
        let p = params(PulseShape::Gaussian { cutoff_fraction: 0.1 });
        let g = *p.gaussian().unwrap();
        let profile = *p.profile();
        assert!((amplitude(100.0, &profile, 200.0).value() - g.peak).abs() < 1e-15);
        assert!((amplitude(0.0, &profile, 200.0).value() - 0.1 * g.peak).abs() < 1e-12);
        assert!((amplitude(200.0, &profile, 200.0).value() - 0.1 * g.peak).abs() < 1e-12);
        assert_eq!(amplitude(-1.0, &profile, 200.0).value(), 0.0);
        assert_eq!(amplitude(201.0, &profile, 200.0).value(), 0.0);
        assert_eq!(drive_amplitude(37.5, &p), amplitude(37.5, &profile, 200.0).value());
        assert!(g.peak > 1.0);
        assert!((g.fwhm() - 2.0 * (g.beta * std::f64::consts::LN_2).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rectangular_amplitude_is_constant_in_window() {
        let profile = PulseProfile::rectangular(1.3).unwrap();
        for t in [0.0, 1.0, 99.0, 200.0] {
            assert_eq!(amplitude(t, &profile, 200.0).value(), 1.3);
        }
        assert_eq!(amplitude(200.5, &profile, 200.0).value(), 0.0);
    }

    #[test]
    fn gaussian_area_equals_rectangle() {
        // Composite Simpson on [0, T].
        for (omega1, t_end, f) in [(1.0, 200.0, 0.1), (2.5, 37.0, 0.3), (0.4, 1000.0, 0.01)] {
            let profile = PulseProfile::gaussian(omega1, f).unwrap();
            let n = 2000;
            let h = t_end / n as f64;
            let mut sum = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * amplitude(i as f64 * h, &profile, t_end).value();
            }
            let area = sum * h / 3.0;
            let rel = (area - omega1 * t_end).abs() / (omega1 * t_end);
            assert!(rel < 1e-3, "relative area error {rel:e}");
        }
    }

    #[test]
    fn gaussian_symmetry_and_sign() {
        let p = params(PulseShape::Gaussian { cutoff_fraction: 0.1 });
        let profile = *p.profile();
        for k in 0..=100 {
            let s = k as f64;
            let a = amplitude(100.0 + s, &profile, 200.0).value();
            let b = amplitude(100.0 - s, &profile, 200.0).value();
            assert!((a - b).abs() <= 1e-12);
            assert!(a >= 0.0);
        }
    }
}
