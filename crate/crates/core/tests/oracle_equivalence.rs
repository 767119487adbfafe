use pulse_jcm_core::algebra::trace_distance;
use pulse_jcm_core::integrator::{evolve, IntegratorConfig, Trajectory};
use pulse_jcm_core::models::*;
use pulse_jcm_core::num::Complex;
use pulse_jcm_core::oracle::*;
use pulse_jcm_core::pulses::*;

const SUBTRACTION_TAU: f64 = 0.3799;

fn run(model: &ModelSpec<f64>, tls: TlsState, fields: &[FieldStateSpec<f64>], tau: f64, n: usize) -> Trajectory<f64> {
    let (t0, t1) = model.window().unwrap();
    let s0 = initial_state(model, tls, fields).unwrap();
    evolve(model, &s0, &IntegratorConfig::for_window(t0, t1, tau, n)).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn single_photon_jcm1_matches_closed_form() {
    let pol = CouplingPolicy::new(1e-13, 1e-13).unwrap();
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let m = build_jcm1(&p, 1.0, 1, &pol).unwrap();
    let tr = run(&m, TlsState::Ground, &[FieldStateSpec::Fock(1)], 1.0, 400);
    let or = single_excitation_solve(&p, 1.0, 0.0).unwrap();
    let want: Vec<f64> = tr.times.iter().map(|&t| or.p_e_at(t)).collect();
    let err = sup_diff(&tr.p_e, &want);
    assert!(err < 1e-6, "sup |ΔP_e| = {err:e}");
    assert!(want.iter().cloned().fold(0.0, f64::max) > 0.3);
}

#[test]
fn default_cutoff_error_scales_with_sqrt_eps() {
    // untransferred amplitude O(√eps) is the only source of disagreement
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let or = single_excitation_solve(&p, 1.0, 0.0).unwrap();
    let err = |eps: f64| {
        let m = build_jcm1(&p, 1.0, 1, &CouplingPolicy::new(eps, eps).unwrap()).unwrap();
        let tr = run(&m, TlsState::Ground, &[FieldStateSpec::Fock(1)], 1.0, 200);
        sup_diff(&tr.p_e, &tr.times.iter().map(|&t| or.p_e_at(t)).collect::<Vec<_>>())
    };
    let (a, b) = (err(1e-8), err(1e-10));
    assert!(a < 1e-4 && b < 1e-5);
    assert!(a / b > 5.0 && a / b < 20.0, "ratio {}", a / b);
}

#[test]
fn jcm1_and_jcm3_share_emitter_dynamics_two_photons() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(SUBTRACTION_TAU).unwrap();
    let m1 = build_jcm1(&p, 1.0, 2, &pol).unwrap();
    let m3 = build_jcm3(&p, 1.0, 2, 2, &pol).unwrap();
    let a = run(&m1, TlsState::Ground, &[FieldStateSpec::Fock(2)], SUBTRACTION_TAU, 200);
    let b = run(&m3, TlsState::Ground, &[FieldStateSpec::Fock(2), FieldStateSpec::Vacuum], SUBTRACTION_TAU, 200);
    assert!(sup_diff(&a.p_e, &b.p_e) < 1e-5);
}

#[test]
fn pickup_mode_choice_leaves_emitter_untouched() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let (t0, tc, t1) = standard_window(1.0);
    let delayed = gaussian_pulse(1.0, tc + 1.5, t0, t1).unwrap();
    let fields = [FieldStateSpec::Fock(3), FieldStateSpec::Vacuum];
    let a = run(&build_jcm2(&p, &p, 1.0, 3, 3, &pol).unwrap(), TlsState::Ground, &fields, 1.0, 300);
    let b = run(&build_jcm2(&p, &delayed, 1.0, 3, 3, &pol).unwrap(), TlsState::Ground, &fields, 1.0, 300);
    let c = run(&build_jcm1(&p, 1.0, 3, &pol).unwrap(), TlsState::Ground, &fields[..1], 1.0, 300);
    assert!(sup_diff(&a.p_e, &b.p_e) < 1e-6);
    assert!(sup_diff(&a.p_e, &c.p_e) < 1e-6);
    assert!((a.n_v.last().unwrap() - b.n_v.last().unwrap()).abs() > 1e-3);
}

#[test]
fn coherent_input_acts_as_classical_drive() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let alpha = Complex::new(2f64.sqrt(), 0.0);
    let spec = FieldStateSpec::Coherent(alpha);
    let n = spec.min_truncation();
    let q = build_jcm1(&p, 1.0, n, &pol).unwrap();
    let c = build_classical_drive(&p, alpha, 1.0, 0.0).unwrap();
    let a = run(&q, TlsState::Ground, &[spec], 1.0, 300);
    let b = run(&c, TlsState::Ground, &[], 1.0, 300);
    assert!(sup_diff(&a.p_e, &b.p_e) < 1e-6, "{:e}", sup_diff(&a.p_e, &b.p_e));
}

#[test]
fn coherent_source_stays_pure() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let spec = FieldStateSpec::Coherent(Complex::new(1.0, 0.5));
    let m = build_jcm1(&p, 1.0, spec.min_truncation(), &pol).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[spec]).unwrap();
    let (t0, t1) = m.window().unwrap();
    let mut cfg = IntegratorConfig::for_window(t0, t1, 1.0, 20);
    cfg.snapshot_times = pulse_jcm_core::integrator::uniform_grid(t0, t1, 20);
    let tr = evolve(&m, &s0, &cfg).unwrap();
    assert_eq!(tr.snapshots.len(), 21);
    for s in &tr.snapshots {
        let ru = s.partial_trace(&[1]).unwrap();
        assert!(ru.purity() > 1.0 - 1e-6, "t={} purity {}", s.time(), ru.purity());
    }
}

#[test]
fn no_excitation_flows_upstream() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let m1 = build_jcm1(&p, 1.0, 1, &pol).unwrap();
    let m2 = build_jcm2(&p, &p, 1.0, 1, 1, &pol).unwrap();
    let a = run(&m1, TlsState::Excited, &[FieldStateSpec::Vacuum], 1.0, 300);
    let b = run(&m2, TlsState::Excited, &[FieldStateSpec::Vacuum, FieldStateSpec::Vacuum], 1.0, 300);
    assert!(a.n_u.iter().chain(&b.n_u).all(|&x| x.abs() < 1e-10));
    assert!((a.p_e[1] - (-a.times[1]).exp()).abs() < 1e-8);
    assert!(b.n_v.iter().cloned().fold(0.0, f64::max) > 1e-3);
}

#[test]
fn decaying_exponential_peak_excitation() {
    let p = exponential_pulse::<f64>(1.0, 0.0, ExponentialKind::Decaying, 0.0, 40.0).unwrap();
    let or = single_excitation_solve(&p, 1.0, 0.0).unwrap();
    let peak = or.p_e().into_iter().fold(0.0, f64::max);
    assert!((peak - 4.0 * (-2.0f64).exp()).abs() < 1e-6, "{peak}");
    for t in [0.5, 2.0, 5.0] {
        assert!((or.e_at(t) - decaying_exponential_amplitude(1.0, t)).norm() < 1e-7);
    }
    assert!((or.norm - 1.0).abs() < 1e-8);
}

#[test]
fn rising_exponential_fully_excites() {
    let p = exponential_pulse::<f64>(1.0, 0.0, ExponentialKind::Rising, -40.0, 0.0).unwrap();
    let or = single_excitation_solve(&p, 1.0, 0.0).unwrap();
    assert!(or.p_e_at(0.0) > 1.0 - 1e-6, "{}", or.p_e_at(0.0));
}

#[test]
fn reflection_keeps_norm_bookkeeping() {
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let or = single_excitation_solve(&p, 1.0, 0.3).unwrap();
    assert!((or.norm - 1.0).abs() < 1e-8);
}

#[test]
fn timebin_single_photon_converges_first_order() {
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let or = single_excitation_solve(&p, 1.0, 0.0).unwrap();
    let err = |m: usize| {
        let st = timebin_solve(&p, 1.0, 0.0, 1, m).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-8);
        st.edges().iter().zip(&st.p_e).map(|(&t, &pe)| (pe - or.p_e_at(t)).abs()).fold(0.0, f64::max)
    };
    let (a, b) = (err(1000), err(2000));
    assert!(b < a && a / b > 1.6 && a / b < 2.5, "{a:e} {b:e}");
}

#[test]
fn timebin_vacuum_stays_vacuum() {
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let st = timebin_solve(&p, 1.0, 0.0, 0, 400).unwrap();
    assert_eq!(st.g0, Complex::new(1.0, 0.0));
    assert!(st.p_e.iter().all(|&x| x == 0.0));
    assert_eq!(st.photon_number(), 0.0);
}

#[test]
fn timebin_rejects_coarse_grids() {
    let p = standard_gaussian::<f64>(1.0).unwrap();
    assert!(matches!(timebin_solve(&p, 1.0, 0.0, 1, 50), Err(pulse_jcm_core::Error::Resolution(_))));
}

#[test]
fn uncoupled_photon_is_its_own_mode() {
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let st = timebin_solve(&p, 0.0, 0.0, 1, 400).unwrap();
    let u = pulse_mode(&p, &st);
    let dec = output_mode_decomposition(&st).unwrap();
    assert!((dec.occupations[0] - 1.0).abs() < 1e-12);
    assert!(dec.occupations[1..].iter().all(|&x| x < 1e-12));
    assert!(inner(&u, &dec.modes[0], st.dt()).norm_sqr() > 1.0 - 1e-6);
    let r = project_reduced_state(&st, &u).unwrap();
    assert!((r[(1, 1)].re - 1.0).abs() < 1e-8);
    assert!((r.trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn subtraction_splits_pulse_into_two_single_photons() {
    let p = standard_gaussian::<f64>(SUBTRACTION_TAU).unwrap();
    let st = timebin_solve(&p, 1.0, 0.0, 2, 1000).unwrap();
    assert!((st.norm() - 1.0).abs() < 1e-8);
    let dec = output_mode_decomposition(&st).unwrap();
    assert!(dec.gram_defect() < 1e-8);
    let occ_sum: f64 = dec.occupations.iter().sum();
    assert!((occ_sum - st.photon_number()).abs() < 1e-8);
    let u = pulse_mode(&p, &st);
    let (v2, occ) = dec.dominant_orthogonal_mode(&u).unwrap();
    assert!(inner(&u, &v2, st.dt()).norm() < 1e-3);
    assert!(occ >= 0.95);
    assert!(pair_population(&st, &u, &v2).unwrap() >= 0.98);
    for j in [3, 100, 400] {
        for k in [7, 250, 999] {
            assert_eq!(st.pair_amplitude(j, k), st.pair_amplitude(k, j));
        }
    }
}

#[test]
fn pickup_marginal_matches_timebin_projection() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(SUBTRACTION_TAU).unwrap();
    let m = build_jcm2(&p, &p, 1.0, 2, 2, &pol).unwrap();
    let tr = run(&m, TlsState::Ground, &[FieldStateSpec::Fock(2), FieldStateSpec::Vacuum], SUBTRACTION_TAU, 100);
    let rv = tr.final_state.partial_trace(&[2]).unwrap();
    let dist = |bins: usize| {
        let st = timebin_solve(&p, 1.0, 0.0, 2, bins).unwrap();
        let r = project_reduced_state(&st, &pulse_mode(&p, &st)).unwrap();
        trace_distance(&r, rv.rho()).unwrap()
    };
    let (a, b) = (dist(600), dist(1200));
    assert!(a < 1e-2 && b < a, "{a:e} {b:e}");
}

#[test]
fn single_photon_pickup_matches_timebin_projection() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let m = build_jcm2(&p, &p, 1.0, 1, 1, &pol).unwrap();
    let tr = run(&m, TlsState::Ground, &[FieldStateSpec::Fock(1), FieldStateSpec::Vacuum], 1.0, 100);
    let rv = tr.final_state.partial_trace(&[2]).unwrap();
    let padded = rv.rho().clone().resize(3, 3, Complex::new(0.0, 0.0));
    let st = timebin_solve(&p, 1.0, 0.0, 1, 2000).unwrap();
    let r = project_reduced_state(&st, &pulse_mode(&p, &st)).unwrap();
    assert!(r[(2, 2)].re == 0.0);
    assert!(trace_distance(&r, &padded).unwrap() < 1e-2);
}

#[test]
fn timebin_photon_bookkeeping() {
    let p = standard_gaussian::<f64>(0.6).unwrap();
    let st = timebin_solve(&p, 1.0, 0.0, 2, 800).unwrap();
    for k in (0..=800).step_by(37) {
        assert!((st.n_in[k] + st.n_out[k] + st.p_e[k] - 2.0).abs() < 1e-10, "k={k}");
    }
    assert!((st.n_out[800] - st.photon_number()).abs() < 1e-10);
    let lossy = timebin_solve(&p, 1.0, 0.5, 2, 800).unwrap();
    assert!(lossy.n_out.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    assert!((lossy.n_out[800] - lossy.photon_number()).abs() < 1e-10);
    assert!(lossy.photon_number() < 1.9);
}
