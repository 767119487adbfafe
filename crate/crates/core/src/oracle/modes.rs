use nalgebra::DMatrix;

use super::timebin::FewPhotonState;
use crate::algebra::hermitian_eigh_dense;
use crate::error::{Error, Result};
use crate::num::{cabs, Complex, Real};

/// Largest rank of the pivoted Cholesky factor of the coherence matrix.
pub const MAX_FACTOR_RANK: usize = 600;

/// Eigenmodes of the first-order coherence matrix of the output field.
#[derive(Debug, Clone)]
pub struct ModeDecomposition<T: Real> {
    /// Temporal amplitudes sampled at bin centers, orthonormal under `Σ_j m_j* n_j Δt`.
    pub modes: Vec<Vec<Complex<T>>>,
    /// Photon numbers of the modes, descending.
    pub occupations: Vec<T>,
    /// `⟨Σ b†b⟩`, the trace of the coherence matrix.
    pub total: T,
    pub dt: T,
    factor: Vec<Vec<Complex<T>>>,
}

/// `G₁(j,k) = ⟨b_k† b_j⟩` over bins, available column by column.
struct Coherence<'a, T: Real> {
    state: &'a FewPhotonState<T>,
    f: Vec<Complex<T>>,
}

impl<'a, T: Real> Coherence<'a, T> {
    fn new(state: &'a FewPhotonState<T>) -> Self {
        let f = if state.n_photons() == 2 { state.pair_matrix() } else { Vec::new() };
        Self { state, f }
    }

    fn diagonal(&self) -> Vec<T> {
        let m = self.state.bin_count();
        let s = self.state;
        (0..m)
            .map(|j| {
                let mut d = s.g1[j].norm_sqr();
                if !s.e1.is_empty() {
                    d += s.e1[j].norm_sqr();
                }
                if !self.f.is_empty() {
                    let row = &self.f[j * m..(j + 1) * m];
                    d += T::lit(2.0) * row.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
                }
                d + s.branches.iter().fold(T::zero(), |a, b| a + b.g1[j].norm_sqr())
            })
            .collect()
    }

    fn column(&self, i: usize) -> Vec<Complex<T>> {
        let m = self.state.bin_count();
        let s = self.state;
        let mut col: Vec<Complex<T>> = s.g1.iter().map(|z| *z * s.g1[i].conj()).collect();
        if !s.e1.is_empty() {
            let c = s.e1[i].conj();
            col.iter_mut().zip(&s.e1).for_each(|(o, z)| *o += *z * c);
        }
        if !self.f.is_empty() {
            // 2 Σ_l F(j,l) F(i,l)*, using the symmetry of F
            let fi = &self.f[i * m..(i + 1) * m];
            let two = T::lit(2.0);
            for (j, o) in col.iter_mut().enumerate() {
                let row = &self.f[j * m..(j + 1) * m];
                let mut acc = Complex::default();
                for (a, b) in row.iter().zip(fi) {
                    acc += *a * b.conj();
                }
                *o += acc * two;
            }
        }
        for b in &s.branches {
            let c = b.g1[i].conj();
            col.iter_mut().zip(&b.g1).for_each(|(o, z)| *o += *z * c);
        }
        col
    }
}

/// Low-rank factor `G₁ ≈ L L†` by diagonally pivoted Cholesky, stopping once
/// the unexplained trace drops below `tol`.
fn pivoted_cholesky<T: Real>(g: &Coherence<'_, T>, tol: T) -> Vec<Vec<Complex<T>>> {
    let mut d = g.diagonal();
    let mut factor: Vec<Vec<Complex<T>>> = Vec::new();
    while factor.len() < MAX_FACTOR_RANK {
        let rest = d.iter().fold(T::zero(), |a, &x| a + x.max(T::zero()));
        if rest <= tol {
            break;
        }
        let (p, &dp) = d
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty diagonal");
        if !(dp > T::zero()) {
            break;
        }
        let mut col = g.column(p);
        for l in &factor {
            let c = l[p].conj();
            col.iter_mut().zip(l).for_each(|(o, z)| *o -= *z * c);
        }
        let inv = T::one() / dp.sqrt();
        col.iter_mut().for_each(|z| *z *= inv);
        for (dj, z) in d.iter_mut().zip(&col) {
            *dj -= z.norm_sqr();
        }
        d[p] = T::zero();
        factor.push(col);
    }
    factor
}

/// Eigenpairs of `L L†` from the small Gram matrix `L† L`, descending.
fn factor_eigen<T: Real>(factor: &[Vec<Complex<T>>]) -> Result<Vec<(T, Vec<Complex<T>>)>> {
    let r = factor.len();
    if r == 0 {
        return Ok(Vec::new());
    }
    let m = factor[0].len();
    let gram = DMatrix::from_fn(r, r, |a, b| {
        factor[a].iter().zip(&factor[b]).fold(Complex::default(), |acc, (x, y)| acc + x.conj() * *y)
    });
    let eig = hermitian_eigh_dense(&gram)?;
    let mut out = Vec::with_capacity(r);
    for c in (0..r).rev() {
        let lam = eig.values[c];
        if !(lam > T::lit(1e-300).max(T::eps() * T::eps())) {
            continue;
        }
        let mut v = vec![Complex::default(); m];
        for (a, l) in factor.iter().enumerate() {
            let w = eig.vectors[(a, c)];
            v.iter_mut().zip(l).for_each(|(o, z)| *o += *z * w);
        }
        let norm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        out.push((lam, v));
    }
    Ok(out)
}

fn require_complete<T: Real>(state: &FewPhotonState<T>) -> Result<()> {
    if !state.is_complete() {
        return Err(Error::InvalidArgument("time-bin evolution has not finished".into()));
    }
    Ok(())
}

/// Diagonalizes the output field's first-order coherence matrix.
pub fn output_mode_decomposition<T: Real>(state: &FewPhotonState<T>) -> Result<ModeDecomposition<T>> {
    require_complete(state)?;
    let g = Coherence::new(state);
    let total = g.diagonal().iter().fold(T::zero(), |a, &x| a + x);
    let factor = pivoted_cholesky(&g, T::lit(1e-13) * (T::one() + total));
    let pairs = factor_eigen(&factor)?;
    let scale = T::one() / state.dt().sqrt();
    let modes = pairs.iter().map(|(_, v)| v.iter().map(|z| *z * scale).collect()).collect();
    let occupations = pairs.iter().map(|(l, _)| *l).collect();
    Ok(ModeDecomposition { modes, occupations, total, dt: state.dt(), factor })
}

impl<T: Real> ModeDecomposition<T> {
    /// Largest `|Σ m_a* m_b Δt − δ_ab|` over the returned modes.
    pub fn gram_defect(&self) -> T {
        let mut worst = T::zero();
        for (a, x) in self.modes.iter().enumerate() {
            for (b, y) in self.modes.iter().enumerate() {
                let ip = inner(x, y, self.dt);
                let target = if a == b { T::one() } else { T::zero() };
                worst = worst.max(cabs(ip - Complex::new(target, T::zero())));
            }
        }
        worst
    }

    /// Dominant eigenmode of the coherence matrix restricted to the complement
    /// of `mode`, with its photon number.
    pub fn dominant_orthogonal_mode(&self, mode: &[Complex<T>]) -> Result<(Vec<Complex<T>>, T)> {
        let w = discrete_unit(mode, self.dt)?;
        let projected: Vec<Vec<Complex<T>>> = self
            .factor
            .iter()
            .map(|l| {
                let c = w.iter().zip(l).fold(Complex::default(), |acc, (a, b)| acc + a.conj() * *b);
                l.iter().zip(&w).map(|(z, a)| *z - *a * c).collect()
            })
            .collect();
        let pairs = factor_eigen(&projected)?;
        let (lam, v) = pairs
            .into_iter()
            .next()
            .ok_or_else(|| Error::InvalidArgument("no output photons outside the reference mode".into()))?;
        let scale = T::one() / self.dt.sqrt();
        Ok((v.iter().map(|z| *z * scale).collect(), lam))
    }
}

/// `Σ_j x_j* y_j Δt`.
pub fn inner<T: Real>(x: &[Complex<T>], y: &[Complex<T>], dt: T) -> Complex<T> {
    x.iter().zip(y).fold(Complex::default(), |acc, (a, b)| acc + a.conj() * *b) * dt
}

fn discrete_unit<T: Real>(mode: &[Complex<T>], dt: T) -> Result<Vec<Complex<T>>> {
    let norm = inner(mode, mode, dt).re;
    if (norm - T::one()).abs() > T::lit(1e-6) {
        return Err(Error::InvalidArgument(format!("mode has norm {norm} on the bin grid, expected 1")));
    }
    let s = dt.sqrt();
    Ok(mode.iter().map(|z| *z * s).collect())
}

/// Reduced density matrix (Fock levels 0, 1, 2) of the output mode `mode`,
/// given as amplitudes at the bin centers normalized under `Σ|m_j|²Δt = 1`.
pub fn project_reduced_state<T: Real>(state: &FewPhotonState<T>, mode: &[Complex<T>]) -> Result<DMatrix<Complex<T>>> {
    require_complete(state)?;
    let m = state.bin_count();
    if mode.len() != m {
        return Err(Error::InvalidArgument(format!("mode has {} samples, state has {m} bins", mode.len())));
    }
    let w = discrete_unit(mode, state.dt())?;
    let dot = |v: &[Complex<T>]| w.iter().zip(v).fold(Complex::default(), |acc, (a, b)| acc + a.conj() * *b);
    let sq = |v: &[Complex<T>]| v.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    let mut rho = DMatrix::<Complex<T>>::zeros(3, 3);
    let zero = Complex::default();

    // emitter in the ground state, main branch
    let alpha = dot(&state.g1);
    let perp: Vec<Complex<T>> = state.g1.iter().zip(&w).map(|(g, a)| *g - *a * alpha).collect();
    let (beta, y, rest2) = if state.n_photons() == 2 {
        let f = state.pair_matrix();
        // y_k = Σ_j F(k,j) w_j*
        let y: Vec<Complex<T>> = (0..m)
            .map(|k| f[k * m..(k + 1) * m].iter().zip(&w).fold(zero, |acc, (a, b)| acc + *a * b.conj()))
            .collect();
        let beta = w.iter().zip(&y).fold(zero, |acc, (a, b)| acc + a.conj() * *b);
        let y_perp: Vec<Complex<T>> = y.iter().zip(&w).map(|(z, a)| *z - *a * beta).collect();
        let two = T::lit(2.0);
        let rest2 = (state.two_photon_norm_sqr() - beta.norm_sqr() - two * sq(&y_perp)).max(T::zero());
        (beta, y_perp, rest2)
    } else {
        (zero, vec![zero; m], T::zero())
    };
    let r2 = T::lit(2.0).sqrt();
    rho[(0, 0)] += Complex::new(state.g0.norm_sqr() + sq(&perp) + rest2, T::zero());
    rho[(1, 1)] += Complex::new(alpha.norm_sqr() + T::lit(2.0) * sq(&y), T::zero());
    rho[(2, 2)] += Complex::new(beta.norm_sqr(), T::zero());
    // ρ(n, n') = ⟨R_n'|R_n⟩
    let r1_r0 = alpha.conj() * state.g0 + y.iter().zip(&perp).fold(zero, |acc, (a, b)| acc + a.conj() * *b) * r2;
    rho[(0, 1)] += r1_r0;
    rho[(0, 2)] += beta.conj() * state.g0;
    rho[(1, 2)] += beta.conj() * alpha;

    // emitter excited, main branch
    if !state.e1.is_empty() || state.e0 != zero {
        let e1 = if state.e1.is_empty() { vec![zero; m] } else { state.e1.clone() };
        let alpha_e = dot(&e1);
        let perp_e = sq(&e1) - alpha_e.norm_sqr();
        rho[(0, 0)] += Complex::new(state.e0.norm_sqr() + perp_e.max(T::zero()), T::zero());
        rho[(1, 1)] += Complex::new(alpha_e.norm_sqr(), T::zero());
        rho[(0, 1)] += alpha_e.conj() * state.e0;
    }

    for b in &state.branches {
        let a = dot(&b.g1);
        rho[(1, 1)] += Complex::new(a.norm_sqr(), T::zero());
        rho[(0, 0)] += Complex::new((sq(&b.g1) - a.norm_sqr()).max(T::zero()) + b.e0.norm_sqr(), T::zero());
    }
    rho[(0, 0)] += Complex::new(state.vacuum_weight, T::zero());
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        rho[(j, i)] = rho[(i, j)].conj();
    }
    Ok(rho)
}

/// Probability of exactly one photon in each of two orthonormal output modes
/// with the emitter in the ground state, `|⟨1_a 1_b|ψ₂⟩|²`.
pub fn pair_population<T: Real>(state: &FewPhotonState<T>, mode_a: &[Complex<T>], mode_b: &[Complex<T>]) -> Result<T> {
    require_complete(state)?;
    let m = state.bin_count();
    if mode_a.len() != m || mode_b.len() != m {
        return Err(Error::InvalidArgument(format!("modes must have {m} samples")));
    }
    if state.n_photons() != 2 {
        return Ok(T::zero());
    }
    let (a, b) = (discrete_unit(mode_a, state.dt())?, discrete_unit(mode_b, state.dt())?);
    let overlap = cabs(a.iter().zip(&b).fold(Complex::<T>::default(), |acc, (x, y)| acc + x.conj() * *y));
    if overlap > T::lit(1e-6) {
        return Err(Error::InvalidArgument(format!("modes overlap by {overlap}, expected orthogonal")));
    }
    let f = state.pair_matrix();
    let mut amp = Complex::<T>::default();
    for j in 0..m {
        let row = &f[j * m..(j + 1) * m];
        let fb = row.iter().zip(&b).fold(Complex::default(), |acc, (z, y)| acc + *z * y.conj());
        amp += a[j].conj() * fb;
    }
    Ok((amp * T::lit(2.0).sqrt()).norm_sqr())
}
