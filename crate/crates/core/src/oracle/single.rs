use crate::error::{Error, Result};
use crate::num::{real, Complex, Real};
use crate::pulses::{gauss_legendre_c, PulseShape};

/// Emitter amplitude for a single photon in mode `u`, sampled on a fine uniform grid.
#[derive(Debug, Clone)]
pub struct SingleExcitationSolution<T: Real> {
    pub times: Vec<T>,
    /// Excited-state amplitude `e(t)`.
    pub e: Vec<Complex<T>>,
    /// Forward output amplitude `u(t) + √γ e(t)`.
    pub u_out: Vec<Complex<T>>,
    /// `∫|u_out|² + γ′∫|e|² + |e(t_end)|²`, which equals one.
    pub norm: T,
    gamma: T,
    kappa: T,
    pulse: PulseShape<T>,
}

impl<T: Real> SingleExcitationSolution<T> {
    fn derivative(&self, k: usize) -> Complex<T> {
        -self.e[k] * self.kappa - self.pulse.amplitude(self.times[k]) * self.gamma.sqrt()
    }

    /// `e(t)` by cubic Hermite interpolation with the exact derivative.
    pub fn e_at(&self, t: T) -> Complex<T> {
        let n = self.times.len();
        let (t0, t1) = (self.times[0], self.times[n - 1]);
        if t <= t0 {
            return self.e[0];
        }
        if t >= t1 {
            return self.e[n - 1];
        }
        let h = (t1 - t0) / T::lit((n - 1) as f64);
        let k = (((t - t0) / h).to_f64_lossy().floor() as usize).min(n - 2);
        let s = (t - self.times[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = T::lit(2.0) * s3 - T::lit(3.0) * s2 + T::one();
        let h10 = s3 - T::lit(2.0) * s2 + s;
        let h01 = T::lit(-2.0) * s3 + T::lit(3.0) * s2;
        let h11 = s3 - s2;
        self.e[k] * h00 + self.derivative(k) * (h10 * h) + self.e[k + 1] * h01 + self.derivative(k + 1) * (h11 * h)
    }

    pub fn p_e_at(&self, t: T) -> T {
        self.e_at(t).norm_sqr()
    }

    pub fn p_e(&self) -> Vec<T> {
        self.e.iter().map(|z| z.norm_sqr()).collect()
    }
}

fn simpson<T: Real>(f: &[T], h: T) -> T {
    let n = f.len();
    debug_assert!(n % 2 == 1);
    let mut s = f[0] + f[n - 1];
    for (i, v) in f.iter().enumerate().take(n - 1).skip(1) {
        s += *v * if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
    }
    s * h / T::lit(3.0)
}

/// Default number of fine-grid intervals used by [`single_excitation_solve`].
pub const SINGLE_EXCITATION_INTERVALS: usize = 40_000;

/// Solves `ė = −((γ+γ′)/2) e − √γ u(t)`, `e(t_start) = 0`, exactly between
/// grid points with Gauss-Legendre quadrature of the convolution integral.
pub fn single_excitation_solve<T: Real>(
    pulse: &PulseShape<T>,
    gamma: T,
    gamma_refl: T,
) -> Result<SingleExcitationSolution<T>> {
    single_excitation_solve_with(pulse, gamma, gamma_refl, SINGLE_EXCITATION_INTERVALS)
}

pub fn single_excitation_solve_with<T: Real>(
    pulse: &PulseShape<T>,
    gamma: T,
    gamma_refl: T,
    intervals: usize,
) -> Result<SingleExcitationSolution<T>> {
    if !(gamma >= T::zero()) || !(gamma_refl >= T::zero()) {
        return Err(Error::InvalidArgument(format!("rates must be non-negative, got γ={gamma}, γ′={gamma_refl}")));
    }
    let n = intervals + intervals % 2;
    if n < 2 {
        return Err(Error::InvalidArgument("at least two intervals required".into()));
    }
    let kappa = (gamma + gamma_refl) * T::lit(0.5);
    let sg = gamma.sqrt();
    let (t0, t1) = (pulse.t_start(), pulse.t_end());
    let h = (t1 - t0) / T::lit(n as f64);
    let times: Vec<T> = (0..=n).map(|k| if k == n { t1 } else { t0 + h * T::lit(k as f64) }).collect();
    let decay = (-kappa * h).exp();
    let mut e = Vec::with_capacity(n + 1);
    let mut cur = Complex::default();
    e.push(cur);
    for k in 0..n {
        let (a, b) = (times[k], times[k + 1]);
        let conv = gauss_legendre_c(&|s: T| pulse.amplitude(s) * (-kappa * (b - s)).exp(), a, b);
        cur = cur * decay - conv * sg;
        e.push(cur);
    }
    let u_out: Vec<Complex<T>> = times.iter().zip(&e).map(|(&t, &ek)| pulse.amplitude(t) + ek * sg).collect();
    let out_int = simpson(&u_out.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(), h);
    let e_int = simpson(&e.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(), h);
    let norm = out_int + gamma_refl * e_int + e[n].norm_sqr();
    Ok(SingleExcitationSolution { times, e, u_out, norm, gamma, kappa, pulse: pulse.clone() })
}

/// Closed-form `e(t)` for the decaying exponential `√γ e^{−γt/2}` (t ≥ 0) at γ′ = 0.
pub fn decaying_exponential_amplitude<T: Real>(gamma: T, t: T) -> Complex<T> {
    real(-gamma * t * (-gamma * t * T::lit(0.5)).exp())
}
