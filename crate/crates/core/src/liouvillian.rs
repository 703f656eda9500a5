//! Rotating-frame generator of the driven two-level master equation and the
//! adiabatic/diabatic energy curves of the chirped Hamiltonian
//! `H = −Δω(t) I_z + ω₁(t) I_x`.
//!
//! Acting on `(ρ11, ρ12, ρ21, ρ22)` the generator is, with `ξ = iω₁/2`,
//! `χ = iΔω`, `d = ω₁²τc/2`, `a± = (1 ± M0)/T1` and `γ = 2/T2`:
//!
//! ```text
//! | −d − a−    ξ            ξ*           d + a+  |
//! |  ξ        −d + χ − γ    d            ξ*      |
//! |  ξ*        d           −d − χ − γ    ξ       |
//! |  d + a−    ξ*           ξ           −d − a+  |
//! ```
//!
//! The `d` entries are the drive-induced dissipation. They use the
//! instantaneous amplitude, so a Gaussian pulse dissipates most at its peak.

use num_complex::Complex64;

use crate::pulses::{detuning, drive_amplitude};
use crate::types::{RelaxationParams, SweepParams};

/// Liouville vector `(ρ11, ρ12, ρ21, ρ22)`.
pub type Liouville = [Complex64; 4];

/// 4×4 generator `Γ(t)` in 1/ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    m: [[Complex64; 4]; 4],
}

impl Generator {
    /// Generator for a given instantaneous amplitude and detuning.
    pub fn from_rates(
        amplitude: f64,
        detuning: f64,
        tau_c: f64,
        relaxation: &RelaxationParams,
    ) -> Self {
        let re = |x: f64| Complex64::new(x, 0.0);
        let xi = Complex64::new(0.0, 0.5 * amplitude);
        let xi_c = xi.conj();
        let chi = Complex64::new(0.0, detuning);
        let d = 0.5 * amplitude * amplitude * tau_c;

        let r1 = relaxation.longitudinal_rate();
        let (a_minus, a_plus) = if r1 == 0.0 {
            (0.0, 0.0)
        } else {
            let m0 = relaxation.m0();
            ((1.0 - m0) * r1, (1.0 + m0) * r1)
        };
        let gamma = 2.0 * relaxation.transverse_rate();

        Self {
            m: [
                [re(-d - a_minus), xi, xi_c, re(d + a_plus)],
                [xi, re(-d - gamma) + chi, re(d), xi_c],
                [xi_c, re(d), re(-d - gamma) - chi, xi],
                [re(d + a_minus), xi_c, xi, re(-d - a_plus)],
            ],
        }
    }

    /// Zero-based entry access.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn matrix(&self) -> &[[Complex64; 4]; 4] {
        &self.m
    }

    /// `Γ v`.
    #[inline]
    pub fn apply(&self, v: &Liouville) -> Liouville {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (o, row) in out.iter_mut().zip(&self.m) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }
}

/// Generator at time `t`, with the windowed amplitude from `params`.
pub fn build_generator(t: f64, params: &SweepParams) -> Generator {
    Generator::from_rates(
        drive_amplitude(t, params),
        detuning(t, params).value(),
        params.tau_c(),
        params.relaxation(),
    )
}

/// Adiabatic energies `E± = ±½√(Δω² + ω₁²)` and the diabats `±Δω/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPair {
    pub e_plus: f64,
    pub e_minus: f64,
    /// Ground-state diabat `Δω/2`.
    pub d_g: f64,
    /// Excited-state diabat `−Δω/2`.
    pub d_e: f64,
}

impl EnergyPair {
    pub fn gap(&self) -> f64 {
        self.e_plus - self.e_minus
    }
}

pub fn adiabats(t: f64, params: &SweepParams) -> EnergyPair {
    let dw = detuning(t, params).value();
    let w1 = drive_amplitude(t, params);
    let e = 0.5 * dw.hypot(w1);
    EnergyPair {
        e_plus: e,
        e_minus: -e,
        d_g: 0.5 * dw,
        d_e: -0.5 * dw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{PulseProfile, PulseShape, Timing};
    use proptest::prelude::*;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn params(shape: PulseShape, omega1: f64, tau_c: f64, relax: RelaxationParams) -> SweepParams {
        SweepParams::new(
            10.0,
            Timing::Duration(200.0),
            PulseProfile::new(shape, omega1).unwrap(),
            tau_c,
            relax,
        )
        .unwrap()
    }

    /// `−i[H, ·]` assembled column by column from the 2×2 Hamiltonian,
    /// with Liouville index `k = 2i + j` for `ρ_ij`.
    fn commutator_superop(amplitude: f64, detuning: f64) -> [[Complex64; 4]; 4] {
        let h = [
            [Complex64::new(-0.5 * detuning, 0.0), Complex64::new(0.5 * amplitude, 0.0)],
            [Complex64::new(0.5 * amplitude, 0.0), Complex64::new(0.5 * detuning, 0.0)],
        ];
        let mut out = [[ZERO; 4]; 4];
        for col in 0..4 {
            let mut e = [[ZERO; 2]; 2];
            e[col / 2][col % 2] = Complex64::new(1.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    let mut c = ZERO;
                    for k in 0..2 {
                        c += h[i][k] * e[k][j] - e[i][k] * h[k][j];
                    }
                    out[2 * i + j][col] = Complex64::new(0.0, -1.0) * c;
                }
            }
        }
        out
    }

    #[test]
    fn undriven_generator_only_rotates_coherences() {
        let p = params(PulseShape::Rectangular, 0.0, 0.3, RelaxationParams::disabled());
        let g = build_generator(50.0, &p);
        let chi = Complex64::new(0.0, detuning(50.0, &p).value());
        for r in 0..4 {
            for c in 0..4 {
                let expected = match (r, c) {
                    (1, 1) => chi,
                    (2, 2) => -chi,
                    _ => ZERO,
                };
                assert_eq!(g.entry(r, c), expected, "entry ({r}, {c})");
            }
        }
    }

    #[test]
    fn did_diagonal_entry() {
        let p = params(PulseShape::Rectangular, 1.0, 0.01, RelaxationParams::disabled());
        let g = build_generator(0.0, &p);
        assert!((g.entry(0, 0).re + 0.005).abs() < 1e-16);
        assert_eq!(g.entry(0, 0).im, 0.0);
        assert!((g.entry(0, 3).re - 0.005).abs() < 1e-16);
        assert!((g.entry(1, 2).re - 0.005).abs() < 1e-16);
    }

    #[test]
    fn relaxation_entries() {
        let relax = RelaxationParams::new(0.4, 20.0, 5.0).unwrap();
        let g = Generator::from_rates(0.0, 0.0, 0.0, &relax);
        assert!((g.entry(0, 0).re + 0.6 / 20.0).abs() < 1e-16);
        assert!((g.entry(0, 3).re - 1.4 / 20.0).abs() < 1e-16);
        assert!((g.entry(3, 0).re - 0.6 / 20.0).abs() < 1e-16);
        assert!((g.entry(3, 3).re + 1.4 / 20.0).abs() < 1e-16);
        assert!((g.entry(1, 1).re + 2.0 / 5.0).abs() < 1e-16);
        // Undriven steady state is diag((1 + M0)/2, (1 − M0)/2).
        let ss = [Complex64::new(0.7, 0.0), ZERO, ZERO, Complex64::new(0.3, 0.0)];
        for d in g.apply(&ss) {
            assert!(d.norm() < 1e-16);
        }
    }

    #[test]
    fn avoided_crossing() {
        let p = params(PulseShape::Rectangular, 1.0, 0.0, RelaxationParams::disabled());
        let at_res = adiabats(100.0, &p);
        assert_eq!(at_res.e_plus, 0.5);
        assert_eq!(at_res.e_minus, -0.5);
        let e0 = adiabats(0.0, &p);
        assert!((e0.e_plus - 0.5 * 101f64.sqrt()).abs() < 1e-14);
        assert!((e0.e_plus - 5.0249).abs() < 1e-4);
        let min_gap = (0..=20_000)
            .map(|k| adiabats(k as f64 * 0.01, &p).gap())
            .fold(f64::INFINITY, f64::min);
        assert!((min_gap - 1.0).abs() < 1e-9);

        let off = params(PulseShape::Rectangular, 0.0, 0.0, RelaxationParams::disabled());
        for t in [0.0, 40.0, 160.0] {
            let e = adiabats(t, &off);
            assert_eq!(e.e_plus, e.d_g.abs());
            assert_eq!(e.e_minus, -e.d_g.abs());
            assert_eq!(e.d_e, -e.d_g);
        }
    }

    fn generator_inputs() -> impl Strategy<Value = (f64, f64, f64, RelaxationParams)> {
        (
            0.0..10.0f64,
            -60.0..60.0f64,
            0.0..0.1f64,
            prop_oneof![
                Just(RelaxationParams::disabled()),
                (-1.0..=1.0f64, 0.1..1e4f64, 0.1..1e4f64)
                    .prop_map(|(m0, t1, t2)| RelaxationParams::new(m0, t1, t2).unwrap()),
            ],
        )
    }

    proptest! {
        #[test]
        fn trace_rows_cancel((w1, dw, tc, relax) in generator_inputs()) {
            let g = Generator::from_rates(w1, dw, tc, &relax);
            for c in 0..4 {
                prop_assert!((g.entry(0, c) + g.entry(3, c)).norm() <= 1e-14);
            }
            prop_assert_eq!(g.entry(1, 1), g.entry(2, 2).conj());
            prop_assert_eq!(g.entry(1, 0), g.entry(2, 0).conj());
        }

        #[test]
        fn hermiticity_is_propagated(
            (w1, dw, tc, relax) in generator_inputs(),
            p in 0.0..=1.0f64, re in -0.5..0.5f64, im in -0.5..0.5f64,
        ) {
            let g = Generator::from_rates(w1, dw, tc, &relax);
            let c = Complex64::new(re, im);
            let v = [Complex64::new(p, 0.0), c, c.conj(), Complex64::new(1.0 - p, 0.0)];
            let d = g.apply(&v);
            prop_assert!((d[2] - d[1].conj()).norm() <= 1e-14);
            prop_assert!(d[0].im.abs() <= 1e-14);
        }

        #[test]
        fn unitary_limit_is_commutator(w1 in 0.0..10.0f64, dw in -60.0..60.0f64) {
            let g = Generator::from_rates(w1, dw, 0.0, &RelaxationParams::disabled());
            let reference = commutator_superop(w1, dw);
            for (r, row) in reference.iter().enumerate() {
                for (c, want) in row.iter().enumerate() {
                    prop_assert!((g.entry(r, c) - want).norm() <= 1e-14);
                }
            }
        }
    }
}
