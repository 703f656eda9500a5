//! Closed-form Landau–Zener probabilities and the phenomenological model of
//! transfer under drive-induced dissipation.
//!
//! The model multiplies the Landau–Zener transfer `1 − exp(−πω₁²/2R)` by a
//! `tanh` rise centred on resonance that decays as `exp(−ω₁²τc t)`:
//!
//! `𝒫(t) = ½ (1 − e^{−πω₁²/2R}) [1 + e^{−ω₁²τc t} tanh((R/ω₁)(t − δω/R))]`
//!
//! Setting `d𝒫/dt = 0` gives the optimal stopping time
//! `t_max = (1/R)[δω + (ω₁/2) asinh(2R / (ω₁³τc))]`, and `p(ω₁) = 𝒫(t_max)`
//! is the model's best achievable transfer.

use std::f64::consts::{LN_2, PI};

use crate::error::{ModelError, ParamError};

/// Landau–Zener probability `exp(−πω₁²/2R)` of jumping to the other adiabat.
pub fn lz_probability(omega1: f64, rate: f64) -> f64 {
    (-PI * omega1 * omega1 / (2.0 * rate)).exp()
}

/// Adiabatic transfer probability `1 − exp(−πω₁²/2R)`.
pub fn arp_probability(omega1: f64, rate: f64) -> f64 {
    -(-PI * omega1 * omega1 / (2.0 * rate)).exp_m1()
}

/// Inputs of the phenomenological model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhenomParams {
    omega1: f64,
    rate: f64,
    delta_omega: f64,
    tau_c: f64,
}

impl PhenomParams {
    pub fn new(omega1: f64, rate: f64, delta_omega: f64, tau_c: f64) -> Result<Self, ModelError> {
        if !omega1.is_finite() || omega1 < 0.0 {
            return Err(ParamError::Negative {
                name: "omega1",
                value: omega1,
            }
            .into());
        }
        if omega1 == 0.0 {
            return Err(ModelError::ZeroAmplitude);
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(ParamError::NotPositive {
                name: "rate",
                value: rate,
            }
            .into());
        }
        if !(delta_omega.is_finite() && delta_omega >= 0.0) {
            return Err(ParamError::Negative {
                name: "delta_omega",
                value: delta_omega,
            }
            .into());
        }
        if !(tau_c.is_finite() && tau_c >= 0.0) {
            return Err(ParamError::Negative {
                name: "tau_c",
                value: tau_c,
            }
            .into());
        }
        Ok(Self {
            omega1,
            rate,
            delta_omega,
            tau_c,
        })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }
}

/// Model population `𝒫(t)`.
pub fn phenom_transfer(t: f64, p: &PhenomParams) -> f64 {
    let (w1, r) = (p.omega1, p.rate);
    let decay = (-w1 * w1 * p.tau_c * t).exp();
    let rise = ((r / w1) * (t - p.delta_omega / r)).tanh();
    0.5 * arp_probability(w1, r) * (1.0 + decay * rise)
}

/// `asinh(x)` given `ln x`, so huge arguments never have to be formed.
fn asinh_from_ln(ln_x: f64) -> f64 {
    if ln_x > 20.0 {
        // asinh x = ln 2x + O(1/x²)
        ln_x + LN_2
    } else {
        ln_x.exp().asinh()
    }
}

/// Stationary point `t_max` of the model.
pub fn phenom_tmax(p: &PhenomParams) -> Result<f64, ModelError> {
    if p.tau_c == 0.0 {
        return Err(ModelError::NoInteriorMaximum);
    }
    let (w1, r) = (p.omega1, p.rate);
    // ln(2R / (ω₁³τc)); ω₁³τc alone can underflow.
    let ln_x = (2.0 * r).ln() - 3.0 * w1.ln() - p.tau_c.ln();
    Ok((p.delta_omega + 0.5 * w1 * asinh_from_ln(ln_x)) / r)
}

/// Model optimum `p(ω₁) = 𝒫(t_max)`.
pub fn phenom_max(omega1: f64, rate: f64, delta_omega: f64, tau_c: f64) -> Result<f64, ModelError> {
    let p = PhenomParams::new(omega1, rate, delta_omega, tau_c)?;
    let t_max = phenom_tmax(&p)?;
    Ok(phenom_transfer(t_max, &p))
}
