//! Temporal pulse shapes and the time-dependent virtual-cavity couplings they induce.
//!
//! A pulse `u(t)` is normalized on its window, `∫|u|² dt = 1`. The cumulative
//! intensity `F(t) = ∫_{t_start}^t |u|²` is computed once on a uniform grid and
//! interpolated with monotone cubic Hermite segments. The complement `1 − F` is
//! accumulated separately from the right so that it keeps full relative
//! accuracy in the late tail, where it appears in a denominator.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::num::{Complex, Real};

/// Grid nodes used for the cumulative intensity unless overridden.
pub const DEFAULT_GRID_POINTS: usize = 8192;
/// Smallest accepted grid.
pub const MIN_GRID_POINTS: usize = 4096;
/// Minimum distance, in widths, between the pulse center and either window edge.
pub const MIN_MARGIN_WIDTHS: f64 = 5.0;

pub type AmplitudeFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

// 8-point Gauss-Legendre rule on [-1, 1].
const GL8_X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Integrates `f` over `[a, b]` with an 8-point Gauss-Legendre rule.
pub(crate) fn gauss_legendre<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut acc = T::zero();
    for k in 0..4 {
        let dx = half * T::lit(GL8_X[k]);
        acc += T::lit(GL8_W[k]) * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

/// Complex-valued counterpart of [`gauss_legendre`].
pub(crate) fn gauss_legendre_c<T: Real, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T) -> Complex<T> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut acc = Complex::default();
    for k in 0..4 {
        let dx = half * T::lit(GL8_X[k]);
        acc += (f(mid - dx) + f(mid + dx)) * T::lit(GL8_W[k]);
    }
    acc * half
}

fn adaptive_integral<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, whole: T, tol: T, depth: u32) -> T {
    let mid = (a + b) * T::lit(0.5);
    let left = gauss_legendre(f, a, mid);
    let right = gauss_legendre(f, mid, b);
    let both = left + right;
    if depth == 0 || (both - whole).abs() <= tol {
        return both;
    }
    let half_tol = tol * T::lit(0.5);
    adaptive_integral(f, a, mid, left, half_tol, depth - 1) + adaptive_integral(f, mid, b, right, half_tol, depth - 1)
}

/// Normalized temporal amplitude with a cached cumulative intensity.
#[derive(Clone)]
pub struct PulseShape<T: Real> {
    amplitude: AmplitudeFn<T>,
    scale: T,
    t_start: T,
    t_end: T,
    width: T,
    center: T,
    step: T,
    cumulative: Vec<T>,
    remaining: Vec<T>,
    density: Vec<T>,
}

impl<T: Real> fmt::Debug for PulseShape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PulseShape")
            .field("t_start", &self.t_start)
            .field("t_end", &self.t_end)
            .field("width", &self.width)
            .field("center", &self.center)
            .field("grid_points", &self.cumulative.len())
            .finish()
    }
}

impl<T: Real> PulseShape<T> {
    /// Builds a pulse from an arbitrary (not necessarily normalized) amplitude.
    /// The amplitude is renormalized so that `F(t_end) = 1`.
    pub fn from_fn<F>(amplitude: F, t_start: T, t_end: T, width: T, center: T, grid_points: usize) -> Result<Self>
    where
        F: Fn(T) -> Complex<T> + Send + Sync + 'static,
    {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!("empty pulse window [{t_start}, {t_end}]")));
        }
        if !(width > T::zero()) {
            return Err(Error::InvalidArgument(format!("pulse width must be positive, got {width}")));
        }
        if grid_points < MIN_GRID_POINTS {
            return Err(Error::InvalidArgument(format!(
                "cumulative-intensity grid needs at least {MIN_GRID_POINTS} points, got {grid_points}"
            )));
        }
        let amplitude: AmplitudeFn<T> = Arc::new(amplitude);
        let cells = grid_points - 1;
        let step = (t_end - t_start) / T::lit(cells as f64);
        let node = |i: usize| if i == cells { t_end } else { t_start + step * T::lit(i as f64) };
        let intensity = |t: T| amplitude(t).norm_sqr();

        let mut cell = Vec::with_capacity(cells);
        for i in 0..cells {
            let (a, b) = (node(i), node(i + 1));
            let whole = gauss_legendre(&intensity, a, b);
            cell.push(adaptive_integral(&intensity, a, b, whole, T::lit(1e-16).max(T::eps()), 12));
        }
        let mut cumulative = Vec::with_capacity(grid_points);
        let mut acc = T::zero();
        cumulative.push(acc);
        for c in &cell {
            acc += *c;
            cumulative.push(acc);
        }
        let mut remaining = vec![T::zero(); grid_points];
        let mut acc = T::zero();
        for i in (0..cells).rev() {
            acc += cell[i];
            remaining[i] = acc;
        }
        let total = cumulative[cells];
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::InvalidArgument(format!("pulse has non-positive or non-finite energy {total}")));
        }
        for v in cumulative.iter_mut().chain(remaining.iter_mut()) {
            *v /= total;
        }
        let density = (0..grid_points).map(|i| intensity(node(i)) / total).collect();
        Ok(Self {
            amplitude,
            scale: T::one() / total.sqrt(),
            t_start,
            t_end,
            width,
            center,
            step,
            cumulative,
            remaining,
            density,
        })
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn center(&self) -> T {
        self.center
    }

    pub fn grid_points(&self) -> usize {
        self.cumulative.len()
    }

    pub fn contains(&self, t: T) -> bool {
        t >= self.t_start && t <= self.t_end
    }

    /// Normalized amplitude `u(t)`; zero outside the window.
    pub fn amplitude(&self, t: T) -> Complex<T> {
        if !self.contains(t) {
            return Complex::default();
        }
        (self.amplitude)(t) * self.scale
    }

    pub fn intensity(&self, t: T) -> T {
        self.amplitude(t).norm_sqr()
    }

    /// Cell index and the cubic increment `F(t) − F(t_i)` inside it.
    fn locate(&self, t: T) -> (usize, T) {
        let cells = self.cumulative.len() - 1;
        let x = ((t - self.t_start) / self.step).to_f64_lossy();
        let i = (x.floor().max(0.0) as usize).min(cells - 1);
        let t0 = self.t_start + self.step * T::lit(i as f64);
        let h = self.step;
        let s = ((t - t0) / h).max(T::zero()).min(T::one());
        let c = self.cumulative[i + 1] - self.cumulative[i];
        let (mut m0, mut m1) = (self.density[i], self.density[i + 1]);
        if c <= T::zero() {
            return (i, T::zero());
        }
        let delta = c / h;
        let (alpha, beta) = (m0 / delta, m1 / delta);
        let r2 = alpha * alpha + beta * beta;
        if r2 > T::lit(9.0) {
            let tau = T::lit(3.0) / r2.sqrt();
            m0 = tau * alpha * delta;
            m1 = tau * beta * delta;
        }
        let s2 = s * s;
        let s3 = s2 * s;
        let h01 = T::lit(-2.0) * s3 + T::lit(3.0) * s2;
        let h10 = s3 - T::lit(2.0) * s2 + s;
        let h11 = s3 - s2;
        let inc = h01 * c + h * (h10 * m0 + h11 * m1);
        (i, inc.max(T::zero()).min(c))
    }

    /// Cumulative intensity `F(t)`, clamped to `[0, 1]`.
    pub fn cumulative(&self, t: T) -> T {
        if t <= self.t_start {
            return T::zero();
        }
        if t >= self.t_end {
            return T::one();
        }
        let (i, inc) = self.locate(t);
        (self.cumulative[i] + inc).max(T::zero()).min(T::one())
    }

    /// `1 − F(t)`, evaluated without cancellation near the end of the pulse.
    pub fn remaining(&self, t: T) -> T {
        if t <= self.t_start {
            return T::one();
        }
        if t >= self.t_end {
            return T::zero();
        }
        let (i, inc) = self.locate(t);
        (self.remaining[i] - inc).max(T::zero()).min(T::one())
    }

    /// Time at which the monotone function `f` first reaches `level`.
    fn crossing<F: Fn(T) -> bool>(&self, reached: F) -> T {
        let (mut lo, mut hi) = (self.t_start, self.t_end);
        if reached(lo) {
            return lo;
        }
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if reached(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// The interval `[t_lo, t_hi]` on which `eps_low ≤ F ≤ 1 − eps_high`.
    /// Outside it the regularized couplings are forced to zero.
    pub fn active_window(&self, policy: &CouplingPolicy<T>) -> (T, T) {
        let t_lo = self.crossing(|t| self.cumulative(t) >= policy.eps_low);
        let t_hi = self.crossing(|t| self.remaining(t) < policy.eps_high);
        (t_lo, t_hi)
    }

    /// Same pulse translated in time by `shift`, on the window `[t_start, t_end]`.
    pub fn shifted(&self, shift: T, t_start: T, t_end: T) -> Result<Self> {
        let base = self.clone();
        PulseShape::from_fn(
            move |t| (base.amplitude)(t - shift),
            t_start,
            t_end,
            self.width,
            self.center + shift,
            self.cumulative.len(),
        )
    }
}

/// Standard window for a pulse of width τ: `[0, 12τ + 5]` with the center at `6τ`.
pub fn standard_window<T: Real>(tau: T) -> (T, T, T) {
    (T::zero(), T::lit(6.0) * tau, T::lit(12.0) * tau + T::lit(5.0))
}

/// Gaussian pulse `u(t) ∝ exp(−(t − t_c)² / (2τ²))`, i.e. `τ` is the standard
/// deviation of the amplitude and `|u|²` has standard deviation `τ/√2`.
pub fn gaussian_pulse<T: Real>(tau: T, t_c: T, t_start: T, t_end: T) -> Result<PulseShape<T>> {
    gaussian_pulse_with_grid(tau, t_c, t_start, t_end, DEFAULT_GRID_POINTS)
}

pub fn gaussian_pulse_with_grid<T: Real>(tau: T, t_c: T, t_start: T, t_end: T, grid: usize) -> Result<PulseShape<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidArgument(format!("Gaussian width must be positive, got {tau}")));
    }
    let margin = T::lit(MIN_MARGIN_WIDTHS) * tau;
    // small slack so that margins of exactly 5τ computed in floating point pass
    let slack = T::lit(1e-9) * tau;
    if t_c - t_start < margin - slack || t_end - t_c < margin - slack {
        return Err(Error::TruncationTooSevere(format!(
            "window [{t_start}, {t_end}] leaves less than {MIN_MARGIN_WIDTHS}τ around t_c = {t_c} (τ = {tau})"
        )));
    }
    let norm = (T::pi() * tau * tau).powf(T::lit(-0.25));
    let inv = T::one() / (T::lit(2.0) * tau * tau);
    PulseShape::from_fn(
        move |t: T| {
            let x = t - t_c;
            Complex::new(norm * (-(x * x) * inv).exp(), T::zero())
        },
        t_start,
        t_end,
        tau,
        t_c,
        grid,
    )
}

/// Gaussian on the standard window of [`standard_window`].
pub fn standard_gaussian<T: Real>(tau: T) -> Result<PulseShape<T>> {
    let (t0, tc, t1) = standard_window(tau);
    gaussian_pulse(tau, tc, t0, t1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentialKind {
    /// `√κ e^{−κ(t − t₀)/2}` for `t ≥ t₀`, the shape of spontaneous emission.
    Decaying,
    /// `√κ e^{κ(t − t₀)/2}` for `t ≤ t₀`, its time reverse.
    Rising,
}

pub fn exponential_pulse<T: Real>(
    rate: T,
    t0: T,
    kind: ExponentialKind,
    t_start: T,
    t_end: T,
) -> Result<PulseShape<T>> {
    if !(rate > T::zero()) {
        return Err(Error::InvalidArgument(format!("exponential rate must be positive, got {rate}")));
    }
    let amp = rate.sqrt();
    let half = rate * T::lit(0.5);
    PulseShape::from_fn(
        move |t: T| {
            let v = match kind {
                ExponentialKind::Decaying if t >= t0 => amp * (-(t - t0) * half).exp(),
                ExponentialKind::Rising if t <= t0 => amp * ((t - t0) * half).exp(),
                _ => T::zero(),
            };
            Complex::new(v, T::zero())
        },
        t_start,
        t_end,
        T::one() / rate,
        t0,
        DEFAULT_GRID_POINTS,
    )
}

/// Regularization of the coupling singularities at the edges of the pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingPolicy<T: Real> {
    /// `g_v` vanishes until `F` reaches this value.
    pub eps_low: T,
    /// `g_u` vanishes once `1 − F` drops below this value.
    pub eps_high: T,
}

pub const DEFAULT_COUPLING_EPS: f64 = 1e-10;
pub const MAX_COUPLING_EPS: f64 = 1e-6;

impl<T: Real> CouplingPolicy<T> {
    pub fn new(eps_low: T, eps_high: T) -> Result<Self> {
        let max = T::lit(MAX_COUPLING_EPS);
        for (name, v) in [("eps_low", eps_low), ("eps_high", eps_high)] {
            if !(v > T::zero() && v <= max) {
                return Err(Error::InvalidArgument(format!("{name} must lie in (0, {MAX_COUPLING_EPS:e}], got {v}")));
            }
        }
        Ok(Self { eps_low, eps_high })
    }
}

impl<T: Real> Default for CouplingPolicy<T> {
    fn default() -> Self {
        Self { eps_low: T::lit(DEFAULT_COUPLING_EPS), eps_high: T::lit(DEFAULT_COUPLING_EPS) }
    }
}

/// Source-cavity coupling `g_u(t) = u*(t) / √(1 − F(t))`.
pub fn g_u<T: Real>(pulse: &PulseShape<T>, t: T, policy: &CouplingPolicy<T>) -> Complex<T> {
    if !pulse.contains(t) {
        return Complex::default();
    }
    let rem = pulse.remaining(t);
    if rem < policy.eps_high {
        return Complex::default();
    }
    pulse.amplitude(t).conj() / rem.sqrt()
}

/// Pick-up-cavity coupling `g_v(t) = −v*(t) / √F(t)`.
pub fn g_v<T: Real>(pulse: &PulseShape<T>, t: T, policy: &CouplingPolicy<T>) -> Complex<T> {
    if !pulse.contains(t) {
        return Complex::default();
    }
    let cum = pulse.cumulative(t);
    if cum < policy.eps_low {
        return Complex::default();
    }
    -pulse.amplitude(t).conj() / cum.sqrt()
}

/// Mixing angle of the rotating frame, `sin²θ = F`, in `[0, π/2]`.
pub fn theta<T: Real>(pulse: &PulseShape<T>, t: T) -> T {
    pulse.cumulative(t).sqrt().atan2(pulse.remaining(t).sqrt())
}

/// Scalar coefficients of the rotating-frame model at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpCoefficients<T: Real> {
    /// Coefficient of `a_u† σ⁻` (the pulse-following mode); equals `u*(t)`.
    pub pulse: Complex<T>,
    /// Coefficient of `a_v† σ⁻`, `½ u*(t)(cot θ − tan θ)`.
    pub pickup: Complex<T>,
    /// Weight of `a_v` in the jump operator, `(tan θ + cot θ) u(t)`.
    pub loss: Complex<T>,
}

pub fn ip_coefficients<T: Real>(pulse: &PulseShape<T>, t: T, policy: &CouplingPolicy<T>) -> IpCoefficients<T> {
    let u = pulse.amplitude(t);
    let cum = pulse.cumulative(t);
    let rem = pulse.remaining(t);
    if !pulse.contains(t) || cum < policy.eps_low || rem < policy.eps_high {
        return IpCoefficients { pulse: u.conj(), pickup: Complex::default(), loss: Complex::default() };
    }
    let (s, c) = (cum.sqrt(), rem.sqrt());
    let cot_minus_tan = c / s - s / c;
    let tan_plus_cot = s / c + c / s;
    IpCoefficients {
        pulse: u.conj(),
        pickup: u.conj() * (T::lit(0.5) * cot_minus_tan),
        loss: u * tan_plus_cot,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn unit_gaussian() -> PulseShape<f64> {
        gaussian_pulse(1.0, 6.0, 0.0, 12.0).unwrap()
    }

    #[test]
    fn gaussian_normalization_and_symmetry() {
        let p = unit_gaussian();
        assert_eq!(p.cumulative(12.0), 1.0);
        assert!((p.cumulative(12.0 - 1e-9) - 1.0).abs() < 1e-9);
        assert!((p.cumulative(6.0) - 0.5).abs() < 1e-12);
        assert!((p.remaining(6.0) - 0.5).abs() < 1e-12);
        let peak = (std::f64::consts::PI).powf(-0.25);
        assert!((p.amplitude(6.0).re / peak - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cumulative_matches_independent_simpson_integration() {
        let p = gaussian_pulse(0.3799, 6.0 * 0.3799, 0.0, 12.0 * 0.3799 + 5.0).unwrap();
        let raw = |t: f64| (-(t - 6.0 * 0.3799).powi(2) / (0.3799f64.powi(2))).exp();
        let total = simpson(raw, 0.0, 12.0 * 0.3799 + 5.0, 200_000);
        for &t in &[1.5, 2.0, 2.2, 2.279, 2.5, 3.0, 3.5] {
            let expected = simpson(raw, 0.0, t, 200_000) / total;
            assert!((p.cumulative(t) - expected).abs() < 1e-11, "t={t}");
            assert!((p.remaining(t) - (1.0 - expected)).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn margin_violation_is_rejected() {
        assert!(matches!(gaussian_pulse(1.0, 4.0, 0.0, 12.0), Err(Error::TruncationTooSevere(_))));
        assert!(matches!(gaussian_pulse(1.0, 6.0, 0.0, 10.0), Err(Error::TruncationTooSevere(_))));
        assert!(gaussian_pulse(0.0, 6.0, 0.0, 12.0).is_err());
    }

    #[test]
    fn couplings_at_the_center() {
        let p = unit_gaussian();
        let pol = CouplingPolicy::default();
        let u = p.amplitude(6.0).re;
        assert!((g_u(&p, 6.0, &pol).re - 2f64.sqrt() * u).abs() < 1e-9);
        assert!((g_v(&p, 6.0, &pol).re + 2f64.sqrt() * u).abs() < 1e-9);
        assert!(g_v(&p, 4.0, &pol).re < 0.0);
        assert!((g_u(&p, 0.0, &pol) - p.amplitude(0.0)).norm_sqr() < 1e-30);
    }

    #[test]
    fn couplings_vanish_past_the_cutoffs() {
        let p = unit_gaussian();
        let pol = CouplingPolicy::default();
        let (t_lo, t_hi) = p.active_window(&pol);
        assert!(t_lo > 0.0 && t_lo < 6.0 && t_hi > 6.0 && t_hi < 12.0);
        assert_eq!(g_v(&p, t_lo * 0.99, &pol), Complex::default());
        assert_eq!(g_u(&p, t_hi + 0.01, &pol), Complex::default());
        assert!(g_u(&p, t_hi - 0.01, &pol).re > 0.0);
        let c = ip_coefficients(&p, t_hi + 0.01, &pol);
        assert_eq!((c.pickup, c.loss), (Complex::default(), Complex::default()));
        assert_eq!(c.pulse, p.amplitude(t_hi + 0.01));
    }

    #[test]
    fn theta_limits() {
        let p = unit_gaussian();
        assert_eq!(theta(&p, 0.0), 0.0);
        assert!((theta(&p, 12.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((theta(&p, 6.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-11);
    }

    #[test]
    fn ip_coefficients_at_quarter_angle() {
        let p = unit_gaussian();
        let c = ip_coefficients(&p, 6.0, &CouplingPolicy::default());
        let u = p.amplitude(6.0).re;
        assert!(c.pickup.norm_sqr().sqrt() < 1e-10);
        assert!((c.loss.re - 2.0 * u).abs() < 1e-10);
        assert_eq!(c.pulse.re, u);
    }

    #[test]
    fn theta_rate_matches_coupling_product() {
        // −2 dθ/dt = g_u g_v* inside the active window
        let p = unit_gaussian();
        let pol = CouplingPolicy::default();
        let h = 1e-5;
        for &t in &[3.0, 4.5, 5.5, 6.0, 6.7, 8.0, 9.0] {
            let dtheta = (theta(&p, t + h) - theta(&p, t - h)) / (2.0 * h);
            let prod = g_u(&p, t, &pol) * g_v(&p, t, &pol).conj();
            assert!((-2.0 * dtheta - prod.re).abs() < 1e-6 * (1.0 + prod.re.abs()), "t={t}");
            assert!(prod.im.abs() < 1e-15);
        }
    }

    #[test]
    fn denominators_are_cos_and_sin_theta() {
        let p = unit_gaussian();
        for &t in &[1.0, 4.0, 6.0, 7.3, 11.0] {
            let th = theta(&p, t);
            assert!((th.cos() - p.remaining(t).sqrt()).abs() < 1e-12);
            assert!((th.sin() - p.cumulative(t).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn policy_bounds() {
        assert!(CouplingPolicy::new(1e-7, 1e-8).is_ok());
        assert!(CouplingPolicy::new(0.0, 1e-8).is_err());
        assert!(CouplingPolicy::new(1e-3, 1e-8).is_err());
    }

    #[test]
    fn exponential_shapes_are_normalized() {
        let d = exponential_pulse(1.0, 0.0, ExponentialKind::Decaying, 0.0, 40.0).unwrap();
        assert!((d.amplitude(0.0).re - 1.0f64).abs() < 1e-12);
        assert!((d.cumulative(2.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-10);
        let r = exponential_pulse(1.0, 0.0, ExponentialKind::Rising, -40.0, 0.0).unwrap();
        assert!((r.cumulative(-2.0) - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn single_precision_pulse() {
        let p = gaussian_pulse::<f32>(1.0, 6.0, 0.0, 12.0).unwrap();
        assert!((p.cumulative(6.0) - 0.5).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn cumulative_is_monotone_and_bounded(a in 0.0f64..12.0, b in 0.0f64..12.0) {
            let p = unit_gaussian();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (fl, fh) = (p.cumulative(lo), p.cumulative(hi));
            prop_assert!(fl <= fh);
            prop_assert!((0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
            prop_assert!(p.remaining(lo) >= p.remaining(hi));
        }
    }
}
