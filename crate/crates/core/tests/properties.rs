//! Trajectory-level invariants of the master-equation integrator.

use arpsim::{
    evolve, unitary_oracle, DensityState, IntegratorSettings, PulseProfile, PulseShape, RelaxationParams,
    SweepParams, Tail, Timing, Trajectory,
};
use proptest::prelude::*;

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

fn ground_run(p: &SweepParams) -> Trajectory {
    evolve(&DensityState::ground(), p, &IntegratorSettings::default(), 0.0).unwrap()
}

fn gauss() -> PulseShape {
    PulseShape::gaussian(0.1).unwrap()
}

fn assert_trace_and_hermiticity(traj: &Trajectory) {
    for s in &traj.samples {
        assert!(s.state.trace_error() <= 1e-8, "trace at t = {}", s.t);
        assert!(s.state.hermiticity_error() <= 1e-8, "hermiticity at t = {}", s.t);
    }
}

#[test]
fn conserved_quantities_across_models() {
    let relax = RelaxationParams::new(0.6, 150.0, 40.0).unwrap();
    for p in [
        params(PulseShape::Rectangular, 1.0, 0.0, RelaxationParams::disabled()),
        params(PulseShape::Rectangular, 1.0, 0.01, RelaxationParams::disabled()),
        params(gauss(), 1.0, 0.01, RelaxationParams::disabled()),
        params(PulseShape::Rectangular, 1.5, 0.005, relax),
    ] {
        assert_trace_and_hermiticity(&ground_run(&p));
    }
}

#[test]
fn sample_times_increase_and_stats_match() {
    let traj = ground_run(&params(PulseShape::Rectangular, 1.0, 0.01, RelaxationParams::disabled()));
    assert_eq!(traj.samples.len(), 2000);
    assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(traj.samples.last().unwrap().t, 200.0);
    let p_max = traj.samples.iter().map(|s| s.p_excited).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(traj.stats.p_max, p_max);
    assert_eq!(traj.stats.p_final, traj.samples.last().unwrap().p_excited);
}

#[test]
fn unitary_run_stays_on_the_sphere() {
    for shape in [PulseShape::Rectangular, gauss()] {
        let traj = ground_run(&params(shape, 1.0, 0.0, RelaxationParams::disabled()));
        for s in &traj.samples {
            assert!((s.bloch.norm() - 1.0).abs() <= 1e-6, "t = {}", s.t);
            assert!(s.bloch.norm() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn dissipative_run_contracts() {
    for shape in [PulseShape::Rectangular, gauss()] {
        let traj = ground_run(&params(shape, 1.0, 0.01, RelaxationParams::disabled()));
        for w in traj.samples.windows(2) {
            assert!(w[1].bloch.norm() <= w[0].bloch.norm() + 1e-7, "t = {}", w[1].t);
        }
        assert!(traj.samples.last().unwrap().bloch.norm() < 0.9);
    }
}

#[test]
fn oracle_equivalence() {
    let settings = IntegratorSettings::default();
    for shape in [PulseShape::Rectangular, gauss()] {
        for omega1 in [0.3, 1.0, 2.5] {
            let p = params(shape, omega1, 0.0, RelaxationParams::disabled());
            let a = evolve(&DensityState::ground(), &p, &settings, 0.0).unwrap();
            let b = unitary_oracle(&DensityState::ground(), &p, &settings).unwrap();
            assert_eq!(a.samples.len(), b.samples.len());
            for (x, y) in a.samples.iter().zip(&b.samples) {
                assert_eq!(x.t, y.t);
                assert!((x.p_excited - y.p_excited).abs() <= 1e-6, "{shape:?} ω₁={omega1} t={}", x.t);
            }
        }
    }
}

#[test]
fn resonant_snapshot_agrees_with_oracle() {
    // 2001 samples over 200 ms put one exactly on resonance at t = 100.
    let settings = IntegratorSettings {
        sample_count: 2001,
        ..Default::default()
    };
    let p = params(PulseShape::Rectangular, 1.0, 0.0, RelaxationParams::disabled());
    let a = evolve(&DensityState::ground(), &p, &settings, 0.0).unwrap();
    let b = unitary_oracle(&DensityState::ground(), &p, &settings).unwrap();
    let (sa, sb) = (&a.samples[1000], &b.samples[1000]);
    assert_eq!(sa.t, 100.0);
    assert!((sa.bloch.mx - sb.bloch.mx).abs() <= 1e-6);
}

#[test]
fn undriven_ground_state_never_moves() {
    for tau_c in [0.0, 0.01, 1.0] {
        let traj = ground_run(&params(PulseShape::Rectangular, 0.0, tau_c, RelaxationParams::disabled()));
        assert!(traj.samples.iter().all(|s| s.p_excited == 0.0));
        assert_eq!((traj.stats.p_max, traj.stats.t_peak), (0.0, 0.0));
    }
}

#[test]
fn refinement_change_within_error_estimate() {
    let loose = IntegratorSettings {
        rel_tol: 1e-6,
        abs_tol: 1e-8,
        ..Default::default()
    };
    for p in [
        params(PulseShape::Rectangular, 1.0, 0.0, RelaxationParams::disabled()),
        params(gauss(), 1.0, 0.01, RelaxationParams::disabled()),
    ] {
        for settings in [loose, IntegratorSettings::default()] {
            let coarse = evolve(&DensityState::ground(), &p, &settings, 0.0).unwrap();
            let fine = evolve(&DensityState::ground(), &p, &settings.scaled_tolerances(0.5), 0.0).unwrap();
            let change = (coarse.stats.p_final - fine.stats.p_final).abs();
            assert!(change < coarse.error_estimate, "{change:e} vs {:e}", coarse.error_estimate);
        }
    }
}

#[test]
fn identical_inputs_are_bit_identical() {
    let p = params(gauss(), 1.3, 0.01, RelaxationParams::new(0.2, 300.0, 90.0).unwrap());
    let a = ground_run(&p);
    let b = ground_run(&p);
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
}

#[test]
fn drive_off_tail_freezes_populations() {
    let p = params(PulseShape::Rectangular, 1.0, 0.01, RelaxationParams::disabled());
    let traj = evolve(&DensityState::ground(), &p, &IntegratorSettings::default(), 300.0).unwrap();
    let at_end = traj.samples.iter().find(|s| s.t >= 200.0).unwrap().p_excited;
    assert!((traj.stats.p_final - at_end).abs() < 1e-9);
    assert!(traj.samples.iter().filter(|s| s.t > 200.0).all(|s| s.amplitude == 0.0));
}

#[test]
fn continued_tail_saturates_at_half() {
    let p = params(PulseShape::Rectangular, 1.0, 0.01, RelaxationParams::disabled());
    // ω₁²τc·t reaches 10 at t = 1000 ms.
    let traj = evolve(&DensityState::ground(), &p, &IntegratorSettings::default(), Tail::drive_continued(800.0)).unwrap();
    assert!((traj.final_state().rho11() - 0.5).abs() <= 0.01);
    assert_trace_and_hermiticity(&traj);
}

#[test]
fn did_peak_is_interior_and_unitary_peak_is_late() {
    let did = ground_run(&params(PulseShape::Rectangular, 1.0, 0.01, RelaxationParams::disabled()));
    assert!(did.stats.t_peak > 0.0 && did.stats.t_peak < 200.0);
    assert!(did.stats.p_max - did.stats.p_final > 0.05);
    // Nutation ripple puts the unitary maximum slightly before T.
    let uni = ground_run(&params(PulseShape::Rectangular, 1.0, 0.0, RelaxationParams::disabled()));
    assert!(uni.stats.t_peak >= 0.99 * 200.0);
    assert!(uni.stats.p_max - uni.stats.p_final <= 0.01);
}

#[test]
fn relaxation_pulls_toward_equilibrium() {
    // Long undriven evolution from |g⟩ relaxes to ρ11 = (1 + M0)/2.
    let relax = RelaxationParams::new(0.4, 20.0, 10.0).unwrap();
    let p = params(PulseShape::Rectangular, 0.0, 0.0, relax);
    let traj = evolve(&DensityState::ground(), &p, &IntegratorSettings::default(), 200.0).unwrap();
    assert!((traj.final_state().rho11() - 0.7).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_dissipative_runs_keep_invariants(
        omega1 in 0.0..3.0f64,
        tau_c in 0.0..0.05f64,
        gaussian in any::<bool>(),
        mz in -1.0..1.0f64,
        phase in 0.0..std::f64::consts::TAU,
    ) {
        let shape = if gaussian { gauss() } else { PulseShape::Rectangular };
        let p = params(shape, omega1, tau_c, RelaxationParams::disabled());
        let r = 0.9 * (1.0 - mz * mz).sqrt();
        let start = DensityState::from_bloch(arpsim::BlochVector::new(r * phase.cos(), r * phase.sin(), 0.9 * mz)).unwrap();
        let traj = evolve(&start, &p, &IntegratorSettings { sample_count: 200, ..Default::default() }, 0.0).unwrap();
        for s in &traj.samples {
            prop_assert!(s.state.trace_error() <= 1e-8);
            prop_assert!(s.state.hermiticity_error() <= 1e-8);
            prop_assert!(s.bloch.norm() <= 1.0 + 1e-9);
        }
    }
}
