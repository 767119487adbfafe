//! Hamiltonians and Lindblad channels of the cascaded emitter models.
//!
//! Subsystem 0 is always the two-level emitter; subsystem 1 is the source
//! (or pulse-following) oscillator and subsystem 2, when present, the pick-up
//! oscillator. Time dependence enters only through scalar coefficients that
//! multiply fixed sparse operators.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{annihilation_op, basis_index, embed, number_op, sigma_minus, Operator, SystemState};
use crate::error::{Error, Result};
use crate::num::{real, Complex, Real};
use crate::pulses::{g_u, g_v, ip_coefficients, CouplingPolicy, PulseShape};

pub type CoefFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

/// `Σ_k c_k(t) O_k` with fixed operators and time-dependent scalars.
#[derive(Clone)]
pub struct TimeDependentOperator<T: Real> {
    ops: Vec<Operator<T>>,
    coefs: Vec<CoefFn<T>>,
}

impl<T: Real> fmt::Debug for TimeDependentOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentOperator").field("terms", &self.ops.len()).finish()
    }
}

impl<T: Real> Default for TimeDependentOperator<T> {
    fn default() -> Self {
        Self { ops: Vec::new(), coefs: Vec::new() }
    }
}

impl<T: Real> TimeDependentOperator<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(op: Operator<T>, c: Complex<T>) -> Self {
        let mut out = Self::new();
        out.push(op, move |_| c);
        out
    }

    pub fn push<F>(&mut self, op: Operator<T>, coef: F)
    where
        F: Fn(T) -> Complex<T> + Send + Sync + 'static,
    {
        self.ops.push(op);
        self.coefs.push(Arc::new(coef));
    }

    /// Appends `c(t) O + c(t)* O†`, which is Hermitian by construction.
    pub fn push_hermitian_pair<F>(&mut self, op: Operator<T>, coef: F)
    where
        F: Fn(T) -> Complex<T> + Send + Sync + 'static,
    {
        let coef: CoefFn<T> = Arc::new(coef);
        let conj = coef.clone();
        let adj = op.adjoint();
        self.ops.push(op);
        self.coefs.push(coef);
        self.ops.push(adj);
        self.coefs.push(Arc::new(move |t| conj(t).conj()));
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn operators(&self) -> &[Operator<T>] {
        &self.ops
    }

    pub fn coefficients_into(&self, t: T, out: &mut Vec<Complex<T>>) {
        out.clear();
        out.extend(self.coefs.iter().map(|c| c(t)));
    }

    pub fn coefficients(&self, t: T) -> Vec<Complex<T>> {
        let mut v = Vec::with_capacity(self.coefs.len());
        self.coefficients_into(t, &mut v);
        v
    }

    /// Assembled operator at time `t`.
    pub fn at(&self, t: T, dims: &[usize]) -> Result<Operator<T>> {
        let mut acc = Operator::zeros(dims)?;
        for (op, c) in self.ops.iter().zip(&self.coefs) {
            acc = acc.add(&op.scale(c(t)))?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    ReferenceJcm,
    DampedJcm,
    Jcm1,
    Jcm2,
    Jcm3,
    ClassicalDrive,
    Custom,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ReferenceJcm => "reference-jcm",
            ModelKind::DampedJcm => "damped-jcm",
            ModelKind::Jcm1 => "jcm1",
            ModelKind::Jcm2 => "jcm2",
            ModelKind::Jcm3 => "jcm3",
            ModelKind::ClassicalDrive => "classical-drive",
            ModelKind::Custom => "custom",
        }
    }
}

/// Complete specification of a time-dependent Lindblad master equation.
#[derive(Debug, Clone)]
pub struct ModelSpec<T: Real> {
    kind: ModelKind,
    subsystem_dims: Vec<usize>,
    hamiltonian: TimeDependentOperator<T>,
    channels: Vec<TimeDependentOperator<T>>,
    gamma: T,
    gamma_refl: T,
    window: Option<(T, T)>,
    breakpoints: Vec<T>,
}

impl<T: Real> ModelSpec<T> {
    /// Model with arbitrary Hamiltonian and channels. Hermiticity of `H(t)` is
    /// the caller's responsibility and can be checked with [`ModelSpec::hermiticity_defect`].
    pub fn custom(
        subsystem_dims: Vec<usize>,
        hamiltonian: TimeDependentOperator<T>,
        channels: Vec<TimeDependentOperator<T>>,
    ) -> Result<Self> {
        let dim: usize = subsystem_dims.iter().product();
        for op in hamiltonian.operators().iter().chain(channels.iter().flat_map(|c| c.operators())) {
            if op.subsystem_dims() != subsystem_dims.as_slice() || op.dim() != dim {
                return Err(Error::InvalidDimension(format!(
                    "term on {:?} does not act on {subsystem_dims:?}",
                    op.subsystem_dims()
                )));
            }
        }
        Ok(Self {
            kind: ModelKind::Custom,
            subsystem_dims,
            hamiltonian,
            channels,
            gamma: T::zero(),
            gamma_refl: T::zero(),
            window: None,
            breakpoints: Vec::new(),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    pub fn dim(&self) -> usize {
        self.subsystem_dims.iter().product()
    }

    pub fn hamiltonian(&self) -> &TimeDependentOperator<T> {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[TimeDependentOperator<T>] {
        &self.channels
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn gamma_refl(&self) -> T {
        self.gamma_refl
    }

    /// Pulse window `[t_start, t_end]`, if the model is driven by a pulse.
    pub fn window(&self) -> Option<(T, T)> {
        self.window
    }

    /// Instants where coefficients switch on or off; the integrator never steps across them.
    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn with_window(mut self, t_start: T, t_end: T) -> Self {
        self.window = Some((t_start, t_end));
        self
    }

    pub fn with_breakpoints(mut self, mut points: Vec<T>) -> Self {
        self.breakpoints.append(&mut points);
        self.breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        self.breakpoints.dedup();
        self
    }

    pub fn hamiltonian_at(&self, t: T) -> Result<Operator<T>> {
        self.hamiltonian.at(t, &self.subsystem_dims)
    }

    pub fn channel_at(&self, k: usize, t: T) -> Result<Operator<T>> {
        let ch = self
            .channels
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("channel {k} does not exist")))?;
        ch.at(t, &self.subsystem_dims)
    }

    pub fn hermiticity_defect(&self, t: T) -> Result<T> {
        Ok(self.hamiltonian_at(t)?.hermiticity_defect())
    }

    pub fn has_pickup(&self) -> bool {
        self.subsystem_dims.len() > 2
    }

    /// `σ⁺σ⁻` on the emitter.
    pub fn excited_projector(&self) -> Result<Operator<T>> {
        let sm = sigma_minus::<T>();
        embed(&sm.adjoint().mul(&sm)?, 0, &self.subsystem_dims)
    }

    /// Number operator of oscillator `slot` (1 = source, 2 = pick-up).
    pub fn number(&self, slot: usize) -> Result<Operator<T>> {
        if slot == 0 || slot >= self.subsystem_dims.len() {
            return Err(Error::InvalidArgument(format!("model has no oscillator in slot {slot}")));
        }
        embed(&number_op(self.subsystem_dims[slot] - 1)?, slot, &self.subsystem_dims)
    }

    /// Total excitation number `σ⁺σ⁻ + Σ a†a`.
    pub fn total_excitation(&self) -> Result<Operator<T>> {
        let mut acc = self.excited_projector()?;
        for slot in 1..self.subsystem_dims.len() {
            acc = acc.add(&self.number(slot)?)?;
        }
        Ok(acc)
    }

    /// Appends an extra emitter decay channel `√γ′ σ⁻` into an unobserved direction.
    pub fn add_reflection(self, gamma_refl: T) -> Result<Self> {
        add_reflection(self, gamma_refl)
    }
}

fn check_rate<T: Real>(name: &str, rate: T) -> Result<()> {
    if !(rate >= T::zero()) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} must be a finite non-negative rate, got {rate}")));
    }
    Ok(())
}

fn check_truncation(n_max: usize) -> Result<()> {
    if n_max < 1 {
        return Err(Error::InvalidDimension(format!("Fock truncation must be >= 1, got {n_max}")));
    }
    Ok(())
}

struct Ladder<T: Real> {
    dims: Vec<usize>,
    sm: Operator<T>,
    a: Vec<Operator<T>>,
}

impl<T: Real> Ladder<T> {
    fn new(truncations: &[usize]) -> Result<Self> {
        let mut dims = vec![2];
        for &n in truncations {
            check_truncation(n)?;
            dims.push(n + 1);
        }
        let sm = embed(&sigma_minus(), 0, &dims)?;
        let a = truncations
            .iter()
            .enumerate()
            .map(|(k, &n)| embed(&annihilation_op(n)?, k + 1, &dims))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dims, sm, a })
    }
}

fn cutoffs<T: Real>(pulse: &PulseShape<T>, policy: &CouplingPolicy<T>) -> Vec<T> {
    let (lo, hi) = pulse.active_window(policy);
    vec![lo, hi]
}

fn emitter_channel<T: Real>(lad: &Ladder<T>, rate: T) -> TimeDependentOperator<T> {
    TimeDependentOperator::constant(lad.sm.clone(), real(rate.sqrt()))
}

/// Single-mode Jaynes-Cummings model with coupling `√γ u(t)`:
/// `H = i√γ (u* a†σ⁻ − u aσ⁺)`, optionally with emitter decay `√γ σ⁻`.
pub fn build_reference_jcm<T: Real>(
    pulse: &PulseShape<T>,
    gamma: T,
    n_max: usize,
    damped: bool,
) -> Result<ModelSpec<T>> {
    check_rate("gamma", gamma)?;
    let lad = Ladder::new(&[n_max])?;
    let sg = gamma.sqrt();
    let mut h = TimeDependentOperator::new();
    let p = pulse.clone();
    h.push_hermitian_pair(lad.a[0].adjoint().mul(&lad.sm)?, move |t| {
        Complex::new(T::zero(), sg) * p.amplitude(t).conj()
    });
    let channels = if damped { vec![emitter_channel(&lad, gamma)] } else { Vec::new() };
    Ok(ModelSpec {
        kind: if damped { ModelKind::DampedJcm } else { ModelKind::ReferenceJcm },
        subsystem_dims: lad.dims,
        hamiltonian: h,
        channels,
        gamma,
        gamma_refl: T::zero(),
        window: Some((pulse.t_start(), pulse.t_end())),
        breakpoints: Vec::new(),
    })
}

/// Virtual source cavity releasing `pulse` into the waveguide, cascaded into the emitter.
pub fn build_jcm1<T: Real>(
    pulse: &PulseShape<T>,
    gamma: T,
    n_max: usize,
    policy: &CouplingPolicy<T>,
) -> Result<ModelSpec<T>> {
    check_rate("gamma", gamma)?;
    let lad = Ladder::new(&[n_max])?;
    let sg = gamma.sqrt();
    let half_i = Complex::new(T::zero(), T::lit(0.5));
    let mut h = TimeDependentOperator::new();
    let (p, pol) = (pulse.clone(), *policy);
    h.push_hermitian_pair(lad.a[0].adjoint().mul(&lad.sm)?, move |t| half_i * g_u(&p, t, &pol) * sg);
    let mut l = TimeDependentOperator::new();
    let (p, pol) = (pulse.clone(), *policy);
    l.push(lad.a[0].clone(), move |t| g_u(&p, t, &pol).conj());
    l.push(lad.sm.clone(), move |_| real(sg));
    Ok(ModelSpec {
        kind: ModelKind::Jcm1,
        subsystem_dims: lad.dims,
        hamiltonian: h,
        channels: vec![l],
        gamma,
        gamma_refl: T::zero(),
        window: Some((pulse.t_start(), pulse.t_end())),
        breakpoints: cutoffs(pulse, policy),
    })
}

/// Source cavity, emitter and a downstream pick-up cavity absorbing mode `pulse_v`.
pub fn build_jcm2<T: Real>(
    pulse_u: &PulseShape<T>,
    pulse_v: &PulseShape<T>,
    gamma: T,
    n_max_u: usize,
    n_max_v: usize,
    policy: &CouplingPolicy<T>,
) -> Result<ModelSpec<T>> {
    check_rate("gamma", gamma)?;
    let tol = T::lit(1e-12) * (T::one() + pulse_u.t_end().abs());
    if (pulse_u.t_start() - pulse_v.t_start()).abs() > tol || (pulse_u.t_end() - pulse_v.t_end()).abs() > tol {
        return Err(Error::InvalidArgument("pick-up mode must be defined on the input pulse window".into()));
    }
    let lad = Ladder::new(&[n_max_u, n_max_v])?;
    let (au, av) = (&lad.a[0], &lad.a[1]);
    let sg = gamma.sqrt();
    let half_i = Complex::new(T::zero(), T::lit(0.5));
    let mut h = TimeDependentOperator::new();
    let (pu, pol) = (pulse_u.clone(), *policy);
    h.push_hermitian_pair(au.adjoint().mul(&lad.sm)?, move |t| half_i * g_u(&pu, t, &pol) * sg);
    let (pv, pol) = (pulse_v.clone(), *policy);
    h.push_hermitian_pair(lad.sm.adjoint().mul(av)?, move |t| half_i * g_v(&pv, t, &pol).conj() * sg);
    let (pu, pv, pol) = (pulse_u.clone(), pulse_v.clone(), *policy);
    h.push_hermitian_pair(au.adjoint().mul(av)?, move |t| {
        half_i * g_u(&pu, t, &pol) * g_v(&pv, t, &pol).conj()
    });

    let mut l = TimeDependentOperator::new();
    l.push(lad.sm.clone(), move |_| real(sg));
    let (pu, pol) = (pulse_u.clone(), *policy);
    l.push(au.clone(), move |t| g_u(&pu, t, &pol).conj());
    let (pv, pol) = (pulse_v.clone(), *policy);
    l.push(av.clone(), move |t| g_v(&pv, t, &pol).conj());

    let mut bps = cutoffs(pulse_u, policy);
    bps.extend(cutoffs(pulse_v, policy));
    Ok(ModelSpec {
        kind: ModelKind::Jcm2,
        subsystem_dims: lad.dims.clone(),
        hamiltonian: h,
        channels: vec![l],
        gamma,
        gamma_refl: T::zero(),
        window: Some((pulse_u.t_start(), pulse_u.t_end())),
        breakpoints: Vec::new(),
    }
    .with_breakpoints(bps))
}

/// Rotated frame in which oscillator 1 follows the pulse content and
/// oscillator 2 holds what has been scattered out of it (pick-up mode equal to the input mode).
pub fn build_jcm3<T: Real>(
    pulse: &PulseShape<T>,
    gamma: T,
    n_max_u: usize,
    n_max_v: usize,
    policy: &CouplingPolicy<T>,
) -> Result<ModelSpec<T>> {
    check_rate("gamma", gamma)?;
    let lad = Ladder::new(&[n_max_u, n_max_v])?;
    let (au, av) = (&lad.a[0], &lad.a[1]);
    let i_sg = Complex::new(T::zero(), gamma.sqrt());
    let mut h = TimeDependentOperator::new();
    let (p, pol) = (pulse.clone(), *policy);
    h.push_hermitian_pair(au.adjoint().mul(&lad.sm)?, move |t| i_sg * ip_coefficients(&p, t, &pol).pulse);
    let (p, pol) = (pulse.clone(), *policy);
    h.push_hermitian_pair(av.adjoint().mul(&lad.sm)?, move |t| i_sg * ip_coefficients(&p, t, &pol).pickup);
    let sg = gamma.sqrt();
    let mut l = TimeDependentOperator::new();
    l.push(lad.sm.clone(), move |_| real(sg));
    let (p, pol) = (pulse.clone(), *policy);
    l.push(av.clone(), move |t| -ip_coefficients(&p, t, &pol).loss);
    Ok(ModelSpec {
        kind: ModelKind::Jcm3,
        subsystem_dims: lad.dims,
        hamiltonian: h,
        channels: vec![l],
        gamma,
        gamma_refl: T::zero(),
        window: Some((pulse.t_start(), pulse.t_end())),
        breakpoints: cutoffs(pulse, policy),
    })
}

/// Appends `√γ′ σ⁻`; a zero rate leaves the model unchanged.
pub fn add_reflection<T: Real>(mut model: ModelSpec<T>, gamma_refl: T) -> Result<ModelSpec<T>> {
    check_rate("gamma_refl", gamma_refl)?;
    if gamma_refl == T::zero() {
        return Ok(model);
    }
    let sm = embed(&sigma_minus(), 0, &model.subsystem_dims)?;
    model.channels.push(TimeDependentOperator::constant(sm, real(gamma_refl.sqrt())));
    model.gamma_refl += gamma_refl;
    Ok(model)
}

/// Emitter driven by the mean field of a coherent pulse `α₀ u(t)`:
/// `H = i√γ (α₀* u* σ⁻ − α₀ u σ⁺)`, decay `√γ σ⁻` (and `√γ′ σ⁻`).
pub fn build_classical_drive<T: Real>(
    pulse: &PulseShape<T>,
    alpha0: Complex<T>,
    gamma: T,
    gamma_refl: T,
) -> Result<ModelSpec<T>> {
    check_rate("gamma", gamma)?;
    let dims = vec![2];
    let sm = sigma_minus::<T>();
    let i_sg = Complex::new(T::zero(), gamma.sqrt());
    let mut h = TimeDependentOperator::new();
    let p = pulse.clone();
    h.push_hermitian_pair(sm.clone(), move |t| i_sg * alpha0.conj() * p.amplitude(t).conj());
    let model = ModelSpec {
        kind: ModelKind::ClassicalDrive,
        subsystem_dims: dims,
        hamiltonian: h,
        channels: vec![TimeDependentOperator::constant(sm, real(gamma.sqrt()))],
        gamma,
        gamma_refl: T::zero(),
        window: Some((pulse.t_start(), pulse.t_end())),
        breakpoints: Vec::new(),
    };
    add_reflection(model, gamma_refl)
}

/// Largest accepted norm deficit of a truncated coherent state.
pub const COHERENT_TAIL_TOL: f64 = 1e-8;

/// Quantum state of one oscillator.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldStateSpec<T: Real> {
    Vacuum,
    Fock(usize),
    Coherent(Complex<T>),
    /// `Σ c_n |n⟩`; must be normalized.
    Superposition(Vec<(Complex<T>, usize)>),
}

fn coherent_amplitudes<T: Real>(alpha: Complex<T>, n_max: usize) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = real((-alpha.norm_sqr() * T::lit(0.5)).exp());
    out.push(c);
    for n in 1..=n_max {
        c = c * alpha / T::lit(n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Smallest truncation whose Poisson tail is below `tol`.
pub fn coherent_truncation<T: Real>(alpha: Complex<T>, tol: T) -> usize {
    let mut n = 1;
    loop {
        let kept = coherent_amplitudes(alpha, n).iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        if T::one() - kept < tol || n > 10_000 {
            return n;
        }
        n += 1;
    }
}

impl<T: Real> FieldStateSpec<T> {
    /// Smallest truncation that represents the state within [`COHERENT_TAIL_TOL`].
    pub fn min_truncation(&self) -> usize {
        match self {
            FieldStateSpec::Vacuum => 1,
            FieldStateSpec::Fock(n) => (*n).max(1),
            FieldStateSpec::Coherent(a) => coherent_truncation(*a, T::lit(COHERENT_TAIL_TOL)),
            FieldStateSpec::Superposition(terms) => terms.iter().map(|t| t.1).max().unwrap_or(0).max(1),
        }
    }

    /// Mean photon number of the untruncated state.
    pub fn mean_photon_number(&self) -> T {
        match self {
            FieldStateSpec::Vacuum => T::zero(),
            FieldStateSpec::Fock(n) => T::lit(*n as f64),
            FieldStateSpec::Coherent(a) => a.norm_sqr(),
            FieldStateSpec::Superposition(terms) => {
                terms.iter().fold(T::zero(), |acc, (c, n)| acc + c.norm_sqr() * T::lit(*n as f64))
            }
        }
    }

    /// Norm lost by truncating at `n_max` (zero for exactly representable states).
    pub fn truncation_deficit(&self, n_max: usize) -> T {
        match self {
            FieldStateSpec::Coherent(a) => {
                let kept = coherent_amplitudes(*a, n_max).iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
                (T::one() - kept).max(T::zero())
            }
            _ => T::zero(),
        }
    }

    /// Fock-basis amplitudes on `0..=n_max`.
    pub fn amplitudes(&self, n_max: usize) -> Result<Vec<Complex<T>>> {
        let mut psi = vec![Complex::default(); n_max + 1];
        match self {
            FieldStateSpec::Vacuum => psi[0] = real(T::one()),
            FieldStateSpec::Fock(n) => {
                if *n > n_max {
                    return Err(Error::Truncation(format!("Fock state |{n}⟩ exceeds truncation {n_max}")));
                }
                psi[*n] = real(T::one());
            }
            FieldStateSpec::Coherent(a) => {
                let deficit = self.truncation_deficit(n_max);
                if deficit > T::lit(COHERENT_TAIL_TOL) {
                    return Err(Error::Truncation(format!(
                        "coherent state α = {a} loses {deficit} of its norm at truncation {n_max}"
                    )));
                }
                psi = coherent_amplitudes(*a, n_max);
                let norm = psi.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
                psi.iter_mut().for_each(|z| *z /= norm);
            }
            FieldStateSpec::Superposition(terms) => {
                if terms.is_empty() {
                    return Err(Error::InvalidArgument("empty superposition".into()));
                }
                for (c, n) in terms {
                    if *n > n_max {
                        return Err(Error::Truncation(format!("component |{n}⟩ exceeds truncation {n_max}")));
                    }
                    psi[*n] += *c;
                }
                let norm2 = psi.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
                if (norm2 - T::one()).abs() > T::lit(1e-10) {
                    return Err(Error::InvalidArgument(format!("superposition has squared norm {norm2}, expected 1")));
                }
            }
        }
        Ok(psi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlsState {
    Ground,
    Excited,
}

/// Product initial state `|tls⟩ ⊗ fields[0] ⊗ fields[1] …` at the start of the model window.
pub fn initial_state<T: Real>(
    model: &ModelSpec<T>,
    tls: TlsState,
    fields: &[FieldStateSpec<T>],
) -> Result<SystemState<T>> {
    let dims = model.subsystem_dims();
    if fields.len() != dims.len() - 1 {
        return Err(Error::InvalidArgument(format!(
            "model has {} oscillators, {} field states given",
            dims.len() - 1,
            fields.len()
        )));
    }
    let mut psi = match tls {
        TlsState::Ground => vec![real(T::one()), Complex::default()],
        TlsState::Excited => vec![Complex::default(), real(T::one())],
    };
    for (f, &d) in fields.iter().zip(&dims[1..]) {
        let amps = f.amplitudes(d - 1)?;
        let mut next = Vec::with_capacity(psi.len() * d);
        for a in &psi {
            next.extend(amps.iter().map(|b| *a * *b));
        }
        psi = next;
    }
    let t0 = model.window().map(|w| w.0).unwrap_or_else(T::zero);
    SystemState::pure(&psi, dims.to_vec(), t0)
}

/// Basis state `|levels⟩` of the model space as a density matrix.
pub fn basis_state<T: Real>(model: &ModelSpec<T>, levels: &[usize], time: T) -> Result<SystemState<T>> {
    let idx = basis_index(model.subsystem_dims(), levels)?;
    let mut psi = vec![Complex::default(); model.dim()];
    psi[idx] = real(T::one());
    SystemState::pure(&psi, model.subsystem_dims().to_vec(), time)
}
