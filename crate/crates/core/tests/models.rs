use pulse_jcm_core::algebra::{basis_index, SystemState};
use pulse_jcm_core::integrator::{evolve, IntegratorConfig, Trajectory};
use pulse_jcm_core::models::*;
use pulse_jcm_core::num::Complex;
use pulse_jcm_core::pulses::*;
use pulse_jcm_core::{Error, PulseShape64};

fn gauss(tau: f64) -> PulseShape64 {
    standard_gaussian(tau).unwrap()
}

fn run(model: &ModelSpec<f64>, s0: &SystemState<f64>, tau: f64) -> Trajectory<f64> {
    let (t0, t1) = model.window().unwrap();
    evolve(model, s0, &IntegratorConfig::for_window(t0, t1, tau, 200)).unwrap()
}

fn all_models(n: usize) -> Vec<ModelSpec<f64>> {
    let pol = CouplingPolicy::default();
    let p = gauss(0.7);
    vec![
        build_reference_jcm(&p, 1.0, n, false).unwrap(),
        build_reference_jcm(&p, 1.0, n, true).unwrap(),
        build_jcm1(&p, 1.0, n, &pol).unwrap(),
        build_jcm2(&p, &p, 1.0, n, n, &pol).unwrap(),
        build_jcm3(&p, 1.0, n, n, &pol).unwrap(),
        build_classical_drive(&p, Complex::new(0.7, 0.2), 1.0, 0.0).unwrap(),
        add_reflection(build_jcm3(&p, 1.0, n, n, &pol).unwrap(), 0.3).unwrap(),
    ]
}

#[test]
fn hamiltonians_hermitian_and_conserve_excitations() {
    for m in all_models(3) {
        let (t0, t1) = m.window().unwrap();
        let n_tot = m.total_excitation().unwrap();
        for k in 0..=97 {
            let t = t0 + (t1 - t0) * k as f64 / 97.0;
            assert!(m.hermiticity_defect(t).unwrap() < 1e-10, "{} t={t}", m.kind().name());
            let h = m.hamiltonian_at(t).unwrap();
            if m.kind() != ModelKind::ClassicalDrive {
                assert!(h.commutator(&n_tot).unwrap().max_abs() < 1e-12, "{}", m.kind().name());
            }
            for c in 0..m.channels().len() {
                // [N, L] = −L: each channel removes exactly one excitation
                let l = m.channel_at(c, t).unwrap();
                let d = n_tot.commutator(&l).unwrap().add(&l).unwrap();
                assert!(d.max_abs() < 1e-12, "{} channel {c}", m.kind().name());
            }
        }
    }
}

#[test]
fn vacuum_rabi_oscillation_with_constant_coupling() {
    let u0 = 0.4;
    let p = PulseShape64::from_fn(|_| Complex::new(1.0, 0.0), 0.0, 10.0, 3.0, 5.0, 4096).unwrap();
    assert!((p.amplitude(2.0).re - 10f64.sqrt().recip()).abs() < 1e-12);
    let scale = u0 * 10f64.sqrt();
    let m = build_reference_jcm(&p, scale * scale, 1, false).unwrap();
    let s0 = basis_state(&m, &[0, 1], 0.0).unwrap();
    let tr = run(&m, &s0, 3.0);
    for (&t, &pe) in tr.times.iter().zip(&tr.p_e) {
        let want = (u0 * t).sin().powi(2);
        assert!((pe - want).abs() < 1e-7, "t={t}: {pe} vs {want}");
    }
}

#[test]
fn reference_hamiltonian_vanishes_with_pulse() {
    let p = gauss(1.0);
    let m = build_reference_jcm(&p, 1.0, 2, false).unwrap();
    assert_eq!(m.hamiltonian_at(p.t_end() + 1.0).unwrap().max_abs(), 0.0);
    assert!(m.hamiltonian_at(p.center()).unwrap().max_abs() > 0.1);
}

#[test]
fn damped_reference_loses_a_little_over_two_photons() {
    let p = gauss(1.0);
    let m = build_reference_jcm(&p, 1.0, 20, true).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(20)]).unwrap();
    let n = *run(&m, &s0, 1.0).n_u.last().unwrap();
    assert!(n > 17.5 && n < 18.0, "{n}");
}

#[test]
fn vacuum_is_a_fixed_point() {
    let p = gauss(1.0);
    let m = build_jcm1(&p, 1.0, 2, &CouplingPolicy::default()).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Vacuum]).unwrap();
    let tr = run(&m, &s0, 1.0);
    assert!((tr.final_state.rho() - s0.rho()).camax() < 1e-14);
}

#[test]
fn uncoupled_emitter_transfers_pulse_losslessly() {
    let p = gauss(1.0);
    let m = build_jcm2(&p, &p, 0.0, 3, 3, &CouplingPolicy::default()).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(3), FieldStateSpec::Vacuum]).unwrap();
    let nv = *run(&m, &s0, 1.0).n_v.last().unwrap();
    assert!((nv - 3.0).abs() < 1e-6, "{nv}");
}

#[test]
fn rotated_frame_follows_pulse_content() {
    let p = gauss(1.0);
    let m = build_jcm3(&p, 0.0, 2, 2, &CouplingPolicy::default()).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(2), FieldStateSpec::Vacuum]).unwrap();
    let tr = run(&m, &s0, 1.0);
    assert!(tr.n_u.iter().all(|&n| (n - 2.0).abs() < 1e-12));
}

#[test]
fn two_photon_subtraction_leaves_one_in_each_mode() {
    let tau = 0.3799;
    let m = build_jcm3(&gauss(tau), 1.0, 2, 2, &CouplingPolicy::default()).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(2), FieldStateSpec::Vacuum]).unwrap();
    let tr = run(&m, &s0, tau);
    let nu = *tr.n_u.last().unwrap();
    let emitted = 2.0 - tr.n_tot.last().unwrap();
    assert!((nu - 1.0).abs() < 0.01 && (emitted - 1.0).abs() < 0.01, "{nu} {emitted}");
    let ru = tr.final_state.partial_trace(&[1]).unwrap();
    assert!(ru.rho()[(1, 1)].re > 0.99);
}

#[test]
fn reflection_rates_add() {
    let p = gauss(1.0);
    let base = build_jcm1(&p, 1.0, 1, &CouplingPolicy::default()).unwrap();
    let same = add_reflection(base.clone(), 0.0).unwrap();
    assert_eq!(same.channels().len(), base.channels().len());
    assert_eq!(same.gamma_refl(), 0.0);
    assert!(matches!(add_reflection(base.clone(), -0.1), Err(Error::InvalidArgument(_))));

    let m = add_reflection(base, 0.4).unwrap();
    assert_eq!(m.gamma_refl(), 0.4);
    let s0 = initial_state(&m, TlsState::Excited, &[FieldStateSpec::Vacuum]).unwrap();
    let tr = run(&m, &s0, 1.0);
    for (&t, &pe) in tr.times.iter().zip(&tr.p_e) {
        assert!((pe - (-1.4 * t).exp()).abs() < 1e-8);
    }
}

#[test]
fn classical_drive_limits() {
    let p = gauss(1.0);
    let m = build_classical_drive(&p, Complex::new(0.0, 0.0), 1.0, 0.0).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[]).unwrap();
    assert!(run(&m, &s0, 1.0).p_e.iter().all(|&x| x == 0.0));

    // area π at vanishing γ: amplitude drive √γ α₀ u with α₀ = π/(2√γ ∫u)
    let gamma: f64 = 1e-6;
    let area: f64 = {
        let n = 20000;
        let h = (p.t_end() - p.t_start()) / n as f64;
        (0..n).map(|k| p.amplitude(p.t_start() + (k as f64 + 0.5) * h).re * h).sum()
    };
    let alpha = std::f64::consts::PI / (2.0 * gamma.sqrt() * area);
    let m = build_classical_drive(&p, Complex::new(alpha, 0.0), gamma, 0.0).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[]).unwrap();
    let peak = run(&m, &s0, 1.0).p_e.iter().cloned().fold(0.0, f64::max);
    assert!(peak > 0.999, "{peak}");
}

#[test]
fn initial_state_examples() {
    let p = gauss(1.0);
    let pol = CouplingPolicy::default();
    let m = build_jcm2(&p, &p, 1.0, 20, 20, &pol).unwrap();
    let s = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(20), FieldStateSpec::Vacuum]).unwrap();
    assert!((s.trace().re - 1.0).abs() < 1e-14);
    assert!((s.expectation(&m.number(1).unwrap()).unwrap().re - 20.0).abs() < 1e-12);

    let coh = FieldStateSpec::Coherent(Complex::new(2.0, 0.0));
    let tail: f64 = {
        // Poisson tail Σ_{n>20} e^{-4} 4^n / n!
        let mut term = (-4.0f64).exp();
        let mut head = term;
        for n in 1..=20 {
            term *= 4.0 / n as f64;
            head += term;
        }
        1.0 - head
    };
    assert!(tail < 1e-8);
    assert!((coh.truncation_deficit(20) - tail).abs() < 1e-14);

    let m1 = build_jcm1(&p, 1.0, 1, &pol).unwrap();
    let e = initial_state(&m1, TlsState::Excited, &[FieldStateSpec::Vacuum]).unwrap();
    assert_eq!(e.expectation(&m1.excited_projector().unwrap()).unwrap().re, 1.0);
    assert!(matches!(initial_state(&m1, TlsState::Ground, &[FieldStateSpec::Fock(2)]), Err(Error::Truncation(_))));
    let bad = FieldStateSpec::Superposition(vec![(Complex::new(1.0, 0.0), 0), (Complex::new(1.0, 0.0), 1)]);
    assert!(matches!(initial_state(&m1, TlsState::Ground, &[bad]), Err(Error::InvalidArgument(_))));
    let ok = FieldStateSpec::Superposition(vec![(Complex::new(0.6, 0.0), 0), (Complex::new(0.0, 0.8), 1)]);
    let s = initial_state(&m1, TlsState::Ground, &[ok]).unwrap();
    assert!((s.rho()[(basis_index(&[2, 2], &[0, 1]).unwrap(), 0)].im - 0.48).abs() < 1e-15);
}
