use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use pulse_jcm_core::pulses::*;
use pulse_jcm_core::{CouplingPolicy64, Error, PulseShape64};

fn gauss(tau: f64) -> PulseShape64 {
    standard_gaussian(tau).unwrap()
}

#[test]
fn gaussian_normalization_and_peak() {
    for tau in [0.3799, 1.0, 2.5] {
        let p = gauss(tau);
        assert!((p.cumulative(p.t_end()) - 1.0).abs() < 1e-9);
        assert!((p.cumulative(p.center()) - 0.5).abs() < 1e-9);
        // amplitude has standard deviation τ
        let peak = (PI * tau * tau).powf(-0.25);
        assert!((p.amplitude(p.center()).re / peak - 1.0).abs() < 1e-6);
    }
    let (t0, tc, t1) = standard_window(1.0);
    assert_eq!((t0, tc, t1), (0.0, 6.0, 17.0));
    assert!(matches!(gaussian_pulse(1.0, 4.0, 0.0, 17.0), Err(Error::TruncationTooSevere(_))));
    assert!(matches!(gaussian_pulse(1.0, 6.0, 0.0, 10.0), Err(Error::TruncationTooSevere(_))));
}

#[test]
fn couplings_at_center_and_edges() {
    let pol = CouplingPolicy64::default();
    let p = gauss(1.0);
    let tc = p.center();
    let uc = p.amplitude(tc).re;
    assert!((g_u(&p, tc, &pol).re - SQRT_2 * uc).abs() < 1e-8);
    assert!((g_v(&p, tc, &pol).re + SQRT_2 * uc).abs() < 1e-8);
    assert!(g_v(&p, 4.0, &pol).re < 0.0);
    assert_eq!(g_u(&p, p.t_start(), &pol), p.amplitude(p.t_start()).conj());
    let (lo, hi) = p.active_window(&pol);
    assert_eq!(g_u(&p, hi + 0.01, &pol).norm(), 0.0);
    assert_eq!(g_v(&p, lo - 0.01, &pol).norm(), 0.0);
    assert!(g_u(&p, hi - 0.01, &pol).norm() > 0.0);
}

#[test]
fn rotation_angle() {
    let p = gauss(0.7);
    assert_eq!(theta(&p, p.t_start()), 0.0);
    assert!((theta(&p, p.t_end()) - FRAC_PI_2).abs() < 1e-6);
    assert!((theta(&p, p.center()) - FRAC_PI_4).abs() < 1e-9);
    for t in [1.0, 4.2, 6.0] {
        let th = theta(&p, t);
        assert!((th.cos() - (1.0 - p.cumulative(t)).sqrt()).abs() < 1e-12);
        assert!((th.sin() - p.cumulative(t).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn rotated_frame_coefficients() {
    let pol = CouplingPolicy64::default();
    let p = gauss(1.0);
    let c = ip_coefficients(&p, p.center(), &pol);
    let uc = p.amplitude(p.center()).re;
    assert!(c.pickup.norm() < 1e-8);
    assert!((c.loss.re - 2.0 * uc).abs() < 1e-8);
    assert_eq!(c.pulse, p.amplitude(p.center()).conj());
    let (_, hi) = p.active_window(&pol);
    let out = ip_coefficients(&p, hi + 0.5, &pol);
    assert_eq!((out.pickup.norm(), out.loss.norm()), (0.0, 0.0));
    assert_eq!(out.pulse, p.amplitude(hi + 0.5).conj());
}

#[test]
fn policy_bounds() {
    assert!(CouplingPolicy64::new(1e-6, 1e-12).is_ok());
    assert!(matches!(CouplingPolicy64::new(0.0, 1e-10), Err(Error::InvalidArgument(_))));
    assert!(matches!(CouplingPolicy64::new(1e-10, 2e-6), Err(Error::InvalidArgument(_))));
    let d = CouplingPolicy64::default();
    assert_eq!((d.eps_low, d.eps_high), (1e-10, 1e-10));
}
