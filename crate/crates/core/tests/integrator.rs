use nalgebra::DMatrix;
use pulse_jcm_core::algebra::{embed, sigma_minus, Operator, SystemState};
use pulse_jcm_core::integrator::*;
use pulse_jcm_core::models::*;
use pulse_jcm_core::num::Complex;
use pulse_jcm_core::pulses::*;
use pulse_jcm_core::Error;

type C = Complex<f64>;

fn decay_model(dims: &[usize], gamma: f64) -> ModelSpec<f64> {
    let sm = embed(&sigma_minus::<f64>(), 0, dims).unwrap();
    ModelSpec::custom(
        dims.to_vec(),
        TimeDependentOperator::new(),
        vec![TimeDependentOperator::constant(sm, C::new(gamma.sqrt(), 0.0))],
    )
    .unwrap()
}

fn excited(dims: &[usize]) -> SystemState<f64> {
    let n: usize = dims.iter().product();
    let mut psi = vec![C::new(0.0, 0.0); n];
    psi[n / 2] = C::new(1.0, 0.0);
    SystemState::pure(&psi, dims.to_vec(), 0.0).unwrap()
}

#[test]
fn rhs_is_traceless_hermitian_and_decays() {
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let m = build_jcm2(&p, &p, 1.0, 2, 2, &CouplingPolicy::default()).unwrap();
    let psi: Vec<C> = (0..m.dim()).map(|k| C::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos())).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi: Vec<C> = psi.iter().map(|z| z / norm).collect();
    let rho = SystemState::pure(&psi, m.subsystem_dims().to_vec(), 0.0).unwrap();
    for t in [1.0, 6.0, 9.0] {
        let d = lindblad_rhs(&m, t, rho.rho()).unwrap();
        assert!(d.trace().norm() < 1e-13);
        assert!((&d - d.adjoint()).camax() < 1e-13);
    }
    let m = decay_model(&[2], 0.7);
    let d = lindblad_rhs(&m, 0.0, excited(&[2]).rho()).unwrap();
    assert!((d[(1, 1)].re + 0.7).abs() < 1e-15);
    let mut bad = excited(&[2]).into_rho();
    bad[(0, 1)] = C::new(f64::NAN, 0.0);
    assert!(matches!(lindblad_rhs(&m, 0.0, &bad), Err(Error::NumericalFailure(_))));
}

#[test]
fn exponential_decay_accuracy() {
    let m = decay_model(&[2, 2], 1.0);
    let tr = evolve(&m, &excited(&[2, 2]), &IntegratorConfig::uniform(0.0, 10.0, 500, 0.02)).unwrap();
    let err = tr.times.iter().zip(&tr.p_e).map(|(&t, &p)| (p - (-t).exp()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err:e}");
    assert_eq!(tr.series("t").unwrap(), &tr.times[..]);
    assert_eq!(tr.series("P_e").unwrap().len(), tr.len());
}

#[test]
fn empty_model_is_identity() {
    let dims = vec![2, 3];
    let m = ModelSpec::custom(dims.clone(), TimeDependentOperator::new(), vec![]).unwrap();
    let psi: Vec<C> = (0..6).map(|k| C::new(1.0 / 6f64.sqrt(), 0.1 * k as f64 - 0.1 * k as f64)).collect();
    let s0 = SystemState::pure(&psi, dims, 0.0).unwrap();
    let tr = evolve(&m, &s0, &IntegratorConfig::uniform(0.0, 5.0, 10, 0.1)).unwrap();
    assert_eq!(tr.final_state.rho(), s0.rho());
}

fn fig3b(rtol: f64, max_step_scale: f64) -> Trajectory<f64> {
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let m = build_jcm2(&p, &p, 1.0, 20, 20, &CouplingPolicy::default()).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(20), FieldStateSpec::Vacuum]).unwrap();
    let (t0, t1) = m.window().unwrap();
    let mut cfg = IntegratorConfig::for_window(t0, t1, 1.0, 100).with_tolerances(rtol, 1e-10);
    cfg.max_step *= max_step_scale;
    evolve(&m, &s0, &cfg).unwrap()
}

#[test]
fn halving_rtol_leaves_pickup_population() {
    let a = fig3b(1e-8, 1.0);
    let b = fig3b(5e-9, 1.0);
    let (na, nb) = (a.n_v.last().unwrap(), b.n_v.last().unwrap());
    assert!((na - nb).abs() < 1e-6, "{na} {nb}");
    assert!(*na > 18.0 && *na < 19.0);
    let loss = 20.0 - a.n_tot.last().unwrap();
    assert!(loss > 1.0 && loss < 2.0);
}

#[test]
fn step_and_grid_invariance() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(0.6).unwrap();
    let m = build_jcm3(&p, 1.0, 3, 3, &pol).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(3), FieldStateSpec::Vacuum]).unwrap();
    let (t0, t1) = m.window().unwrap();
    let base = IntegratorConfig::for_window(t0, t1, 0.6, 120);
    let a = evolve(&m, &s0, &base).unwrap();
    let mut half = base.clone();
    half.max_step *= 0.5;
    let b = evolve(&m, &s0, &half).unwrap();
    let diff = a.p_e.iter().zip(&b.p_e).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff:e}");

    let mut shifted: Vec<f64> = base.record_grid.iter().map(|t| t + 0.0137).collect();
    shifted.pop();
    shifted.insert(0, t0);
    let c = evolve(&m, &s0, &IntegratorConfig::new(shifted.clone(), base.max_step)).unwrap();
    for (k, &t) in shifted.iter().enumerate().skip(1).step_by(17) {
        let r = evolve(&m, &s0, &IntegratorConfig::new(vec![t0, t], base.max_step)).unwrap();
        assert!((c.p_e[k] - r.p_e[1]).abs() < 1e-6);
    }
    let diff = a.times.iter().zip(&a.p_e).skip(1).step_by(13).map(|(&t, &pe)| {
        let j = c.times.partition_point(|&x| x < t);
        let r = evolve(&m, &s0, &IntegratorConfig::new(vec![t0, c.times[j - 1], t], base.max_step)).unwrap();
        (pe - r.p_e[2]).abs()
    });
    assert!(diff.fold(0.0, f64::max) < 1e-6);
}

#[test]
fn excitation_number_never_grows() {
    let pol = CouplingPolicy::default();
    let p = standard_gaussian::<f64>(0.5).unwrap();
    let m = add_reflection(build_jcm2(&p, &p, 1.0, 3, 3, &pol).unwrap(), 0.2).unwrap();
    let s0 = initial_state(&m, TlsState::Excited, &[FieldStateSpec::Fock(3), FieldStateSpec::Vacuum]).unwrap();
    let (t0, t1) = m.window().unwrap();
    let tr = evolve(&m, &s0, &IntegratorConfig::for_window(t0, t1, 0.5, 400)).unwrap();
    assert!(tr.n_tot.windows(2).all(|w| w[1] - w[0] <= 1e-9));
    assert!(tr.max_trace_deviation() < 1e-8);
    assert!(tr.min_recorded_eigenvalue() >= -1e-8);
}

#[test]
fn check_state_reports_defects() {
    let good = excited(&[2, 3]);
    let d = check_state(&good);
    assert!(d.trace_deviation < 1e-12 && d.hermiticity_defect < 1e-12 && d.min_eigenvalue > -1e-12);
    assert!(!d.any_flagged());

    let short = SystemState::from_density(DMatrix::from_diagonal_element(2, 2, C::new(0.45, 0.0)), vec![2], 0.0).unwrap();
    let d = check_state(&short);
    assert!((d.trace_deviation - 0.1).abs() < 1e-12);
    assert!(d.trace_flagged(1e-8));

    let mut skew = good.into_rho();
    skew[(0, 1)] += C::new(1e-3, 0.0);
    let d = check_state(&SystemState::from_density(skew, vec![2, 3], 0.0).unwrap());
    assert!((d.hermiticity_defect - 1e-3).abs() < 1e-12);
    assert!(d.hermiticity_flagged(1e-9));
}

#[test]
fn non_hermitian_generator_is_caught() {
    let dims = vec![2];
    let id = Operator::<f64>::identity(&dims).unwrap();
    let m = ModelSpec::custom(dims, TimeDependentOperator::constant(id, C::new(0.0, 1.0)), vec![]).unwrap();
    let r = evolve(&m, &excited(&[2]), &IntegratorConfig::uniform(0.0, 2.0, 20, 0.05));
    assert!(matches!(r, Err(Error::StateCorruption { .. })), "{r:?}");
}

#[test]
fn step_budget_reports_stiffness() {
    let m = decay_model(&[2], 1.0);
    let mut cfg = IntegratorConfig::uniform(0.0, 10.0, 10, 0.01);
    cfg.max_steps = 20;
    assert!(matches!(evolve(&m, &excited(&[2]), &cfg), Err(Error::Stiffness { .. })));
}

#[test]
fn config_validation() {
    let m = decay_model(&[2], 1.0);
    let s0 = excited(&[2]);
    let bad_rtol = IntegratorConfig::uniform(0.0, 1.0, 4, 0.1).with_tolerances(1e-3, 1e-10);
    assert!(matches!(evolve(&m, &s0, &bad_rtol), Err(Error::InvalidArgument(_))));
    let unsorted = IntegratorConfig::new(vec![0.0, 0.5, 0.2], 0.1);
    assert!(matches!(evolve(&m, &s0, &unsorted), Err(Error::InvalidArgument(_))));
    let p = standard_gaussian::<f64>(1.0).unwrap();
    let j = build_jcm1(&p, 1.0, 1, &CouplingPolicy::default()).unwrap();
    let s = initial_state(&j, TlsState::Ground, &[FieldStateSpec::Fock(1)]).unwrap();
    let outside = IntegratorConfig::uniform(0.0, p.t_end() + 3.0, 10, 0.1);
    assert!(matches!(evolve(&j, &s, &outside), Err(Error::InvalidArgument(_))));
}

#[test]
fn single_precision_alias_runs() {
    let p = standard_gaussian::<f32>(1.0).unwrap();
    let pol = CouplingPolicy::<f32>::new(1e-6, 1e-6).unwrap();
    let m: pulse_jcm_core::ModelSpec32 = build_jcm1(&p, 1.0, 1, &pol).unwrap();
    let s0 = initial_state(&m, TlsState::Ground, &[FieldStateSpec::Fock(1)]).unwrap();
    let (t0, t1) = m.window().unwrap();
    let cfg: pulse_jcm_core::IntegratorConfig32 = IntegratorConfig::for_window(t0, t1, 1.0, 50).with_tolerances(1e-5, 1e-6);
    let tr: pulse_jcm_core::Trajectory32 = evolve(&m, &s0, &cfg).unwrap();
    let p64 = standard_gaussian::<f64>(1.0).unwrap();
    let m64 = build_jcm1(&p64, 1.0, 1, &CouplingPolicy::new(1e-6, 1e-6).unwrap()).unwrap();
    let s64 = initial_state(&m64, TlsState::Ground, &[FieldStateSpec::Fock(1)]).unwrap();
    let r = evolve(&m64, &s64, &IntegratorConfig::for_window(t0 as f64, t1 as f64, 1.0, 50)).unwrap();
    let diff = tr.p_e.iter().zip(&r.p_e).map(|(a, b)| (*a as f64 - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-3, "{diff}");
}
