use crate::error::{Error, Result};
use crate::num::{Complex, Real};
use crate::pulses::PulseShape;

/// Photon lost into the unobserved channel at some bin: a one-excitation
/// branch of the mixture that keeps scattering its remaining photon.
#[derive(Debug, Clone)]
pub struct LossBranch<T: Real> {
    pub e0: Complex<T>,
    pub g1: Vec<Complex<T>>,
}

/// Few-photon wavefunction over time bins after collision-model scattering.
///
/// Bin `j` covers `[t_start + jΔt, t_start + (j+1)Δt)`; before it has met
/// the emitter it holds input photons, afterwards output photons.
#[derive(Debug, Clone)]
pub struct FewPhotonState<T: Real> {
    bins: usize,
    dt: T,
    t_start: T,
    pub g0: Complex<T>,
    pub e0: Complex<T>,
    pub g1: Vec<Complex<T>>,
    pub e1: Vec<Complex<T>>,
    /// `|g, 1_j 1_k⟩` (j < k) and `|g, 2_j⟩` amplitudes, row-major upper triangle of an M×M array.
    g2: Vec<Complex<T>>,
    pub branches: Vec<LossBranch<T>>,
    /// Weight of the branch with every photon lost and the emitter in the ground state.
    pub vacuum_weight: T,
    /// Emitter excitation at the bin edges, length M + 1.
    pub p_e: Vec<T>,
    /// Photons still in bins not yet scattered, at the bin edges.
    pub n_in: Vec<T>,
    /// Photons in bins already scattered forward, at the bin edges.
    pub n_out: Vec<T>,
    n_photons: usize,
    complete: bool,
}

impl<T: Real> FewPhotonState<T> {
    pub fn bin_count(&self) -> usize {
        self.bins
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Bin edges, length M + 1.
    pub fn edges(&self) -> Vec<T> {
        (0..=self.bins).map(|k| self.t_start + self.dt * T::lit(k as f64)).collect()
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.bins).map(|k| self.t_start + self.dt * (T::lit(k as f64) + T::lit(0.5))).collect()
    }

    /// Amplitude of the normalized basis state with photons in bins `j` and `k`.
    pub fn g2(&self, j: usize, k: usize) -> Complex<T> {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        self.g2[a * self.bins + b]
    }

    /// Symmetric two-photon amplitude `F(j,k)` with `|ψ₂⟩ = (1/√2) Σ F(j,k) b_j† b_k† |0⟩`.
    pub fn pair_amplitude(&self, j: usize, k: usize) -> Complex<T> {
        if j == k {
            self.g2(j, k)
        } else {
            self.g2(j, k) * T::lit(std::f64::consts::FRAC_1_SQRT_2)
        }
    }

    fn g2_norm_sqr(&self) -> T {
        let m = self.bins;
        let mut acc = T::zero();
        if self.g2.is_empty() {
            return acc;
        }
        for j in 0..m {
            for k in j..m {
                acc += self.g2[j * m + k].norm_sqr();
            }
        }
        acc
    }

    /// Total probability carried by the main branch, loss branches and the vacuum branch.
    pub fn norm(&self) -> T {
        let sq = |v: &[Complex<T>]| v.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        let mut n = self.g0.norm_sqr() + self.e0.norm_sqr() + sq(&self.g1) + sq(&self.e1) + self.g2_norm_sqr();
        for b in &self.branches {
            n += b.e0.norm_sqr() + sq(&b.g1);
        }
        n + self.vacuum_weight
    }

    /// `⟨Σ_j b_j† b_j⟩` over the recorded field.
    pub fn photon_number(&self) -> T {
        let sq = |v: &[Complex<T>]| v.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        let mut n = sq(&self.g1) + sq(&self.e1) + T::lit(2.0) * self.g2_norm_sqr();
        for b in &self.branches {
            n += sq(&b.g1);
        }
        n
    }

    /// Full symmetric matrix `F` (row-major).
    pub(crate) fn pair_matrix(&self) -> Vec<Complex<T>> {
        let m = self.bins;
        let mut f = vec![Complex::default(); m * m];
        for j in 0..m {
            for k in j..m {
                let v = self.pair_amplitude(j, k);
                f[j * m + k] = v;
                f[k * m + j] = v;
            }
        }
        f
    }

    pub(crate) fn two_photon_norm_sqr(&self) -> T {
        self.g2_norm_sqr()
    }
}

/// Discretizes `pulse` onto `bins` time bins as a normalized bin vector
/// (bin averages times √Δt).
pub fn bin_vector<T: Real>(pulse: &PulseShape<T>, bins: usize) -> Vec<Complex<T>> {
    let (t0, t1) = (pulse.t_start(), pulse.t_end());
    let dt = (t1 - t0) / T::lit(bins as f64);
    let mut v: Vec<Complex<T>> = (0..bins)
        .map(|j| {
            let a = t0 + dt * T::lit(j as f64);
            crate::pulses::gauss_legendre_c(&|t: T| pulse.amplitude(t), a, a + dt) / dt.sqrt()
        })
        .collect();
    let norm = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// `⟨b_j† b_j⟩`, final once bin `j` has been scattered.
fn bin_occupation<T: Real>(st: &FewPhotonState<T>, j: usize) -> T {
    let mut n = st.g1[j].norm_sqr();
    if !st.e1.is_empty() {
        n += st.e1[j].norm_sqr();
    }
    if !st.g2.is_empty() {
        let pairs = (0..st.bins).fold(T::zero(), |a, k| a + st.pair_amplitude(j, k).norm_sqr());
        n += T::lit(2.0) * pairs;
    }
    n + st.branches.iter().fold(T::zero(), |a, b| a + b.g1[j].norm_sqr())
}

#[inline(always)]
fn rotate<T: Real>(a: &mut Complex<T>, b: &mut Complex<T>, c: T, s: T) {
    let (x, y) = (*a, *b);
    *a = x * c - y * s;
    *b = x * s + y * c;
}

/// Scatters an `n_photons`-photon Fock state in mode `pulse` off the emitter,
/// one time bin at a time. During bin `j` the emitter exchanges an excitation
/// with bin `j` through `exp(−iHΔt)`, `H = i√(γ/Δt)(b_j†σ⁻ − b_jσ⁺)`, then
/// decays into the unobserved direction with probability `1 − e^{−γ′Δt}`.
pub fn timebin_solve<T: Real>(
    pulse: &PulseShape<T>,
    gamma: T,
    gamma_refl: T,
    n_photons: usize,
    bins: usize,
) -> Result<FewPhotonState<T>> {
    if !(gamma >= T::zero()) || !(gamma_refl >= T::zero()) {
        return Err(Error::InvalidArgument(format!("rates must be non-negative, got γ={gamma}, γ′={gamma_refl}")));
    }
    if n_photons > 2 {
        return Err(Error::InvalidArgument(format!("time-bin oracle supports at most 2 photons, got {n_photons}")));
    }
    let (t0, t1) = (pulse.t_start(), pulse.t_end());
    let window = (t1 - t0).to_f64_lossy();
    let rate = gamma.to_f64_lossy().max(1.0 / pulse.width().to_f64_lossy());
    let needed = (20.0 * window * rate).ceil() as usize;
    if bins < needed {
        return Err(Error::Resolution(format!(
            "{bins} bins resolve neither the pulse nor the emitter decay; at least {needed} required"
        )));
    }
    let m = bins;
    let dt = (t1 - t0) / T::lit(m as f64);
    let u = bin_vector(pulse, m);
    let mut st = FewPhotonState {
        bins: m,
        dt,
        t_start: t0,
        g0: Complex::default(),
        e0: Complex::default(),
        g1: Vec::new(),
        e1: Vec::new(),
        g2: Vec::new(),
        branches: Vec::new(),
        vacuum_weight: T::zero(),
        p_e: Vec::with_capacity(m + 1),
        n_in: Vec::with_capacity(m + 1),
        n_out: Vec::with_capacity(m + 1),
        n_photons,
        complete: false,
    };
    match n_photons {
        0 => st.g0 = Complex::new(T::one(), T::zero()),
        1 => {
            st.g1 = u.clone();
        }
        _ => {
            st.e1 = vec![Complex::default(); m];
            st.g2 = vec![Complex::default(); m * m];
            let r2 = T::lit(2.0).sqrt();
            for j in 0..m {
                st.g2[j * m + j] = u[j] * u[j];
                for k in j + 1..m {
                    st.g2[j * m + k] = u[j] * u[k] * r2;
                }
            }
        }
    }
    if st.g1.is_empty() {
        st.g1 = vec![Complex::default(); m];
    }
    let phi = (gamma * dt).sqrt();
    let (c1, s1) = (phi.cos(), phi.sin());
    let phi2 = phi * T::lit(2.0).sqrt();
    let (c2, s2) = (phi2.cos(), phi2.sin());
    let p_loss = T::one() - (-gamma_refl * dt).exp();
    let keep = (T::one() - p_loss).sqrt();
    let jump = p_loss.sqrt();
    let two = n_photons == 2;

    let excited = |st: &FewPhotonState<T>| {
        let mut p = st.e0.norm_sqr();
        if two {
            p += st.e1.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        }
        p + st.branches.iter().fold(T::zero(), |a, b| a + b.e0.norm_sqr())
    };
    // unscattered bins keep their input marginals
    let mut tail = vec![T::zero(); m + 1];
    for j in (0..m).rev() {
        tail[j] = tail[j + 1] + u[j].norm_sqr() * T::lit(n_photons as f64);
    }
    let mut out = T::zero();
    st.p_e.push(excited(&st));
    st.n_in.push(tail[0]);
    st.n_out.push(out);
    for j in 0..m {
        rotate(&mut st.e0, &mut st.g1[j], c1, s1);
        if two {
            for k in 0..m {
                if k == j {
                    rotate(&mut st.e1[j], &mut st.g2[j * m + j], c2, s2);
                } else {
                    let idx = if j < k { j * m + k } else { k * m + j };
                    rotate(&mut st.e1[k], &mut st.g2[idx], c1, s1);
                }
            }
        }
        for b in st.branches.iter_mut() {
            rotate(&mut b.e0, &mut b.g1[j], c1, s1);
        }
        if p_loss > T::zero() {
            st.vacuum_weight += p_loss * st.e0.norm_sqr();
            st.e0 *= keep;
            for b in st.branches.iter_mut() {
                st.vacuum_weight += p_loss * b.e0.norm_sqr();
                b.e0 *= keep;
            }
            if two {
                let g1: Vec<Complex<T>> = st.e1.iter().map(|z| *z * jump).collect();
                if g1.iter().any(|z| z.norm_sqr() > T::zero()) {
                    st.branches.push(LossBranch { e0: Complex::default(), g1 });
                }
                st.e1.iter_mut().for_each(|z| *z *= keep);
            }
        }
        out += bin_occupation(&st, j);
        st.p_e.push(excited(&st));
        st.n_in.push(tail[j + 1]);
        st.n_out.push(out);
    }
    st.complete = true;
    Ok(st)
}
