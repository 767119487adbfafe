use nalgebra::DMatrix;

use super::eig::{dense_hermiticity_defect, hermitian_eigvals_dense, HERMITICITY_TOL, POSITIVITY_TOL};
use super::operator::{vec_norm, Operator};
use crate::error::{Error, Result};
use crate::num::{is_finite_c, Complex, Real};

/// Density matrix on a tensor-product space at a given time (units 1/γ).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState<T: Real> {
    rho: DMatrix<Complex<T>>,
    subsystem_dims: Vec<usize>,
    time: T,
}

/// Health diagnostics of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics<T: Real> {
    /// |Tr ρ − 1|
    pub trace_deviation: T,
    /// ‖ρ − ρ†‖_max
    pub hermiticity_defect: T,
    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub min_eigenvalue: T,
}

impl<T: Real> StateDiagnostics<T> {
    pub fn trace_flagged(&self, tol: T) -> bool {
        !(self.trace_deviation <= tol)
    }

    pub fn hermiticity_flagged(&self, tol: T) -> bool {
        !(self.hermiticity_defect <= tol)
    }

    pub fn positivity_flagged(&self, tol: T) -> bool {
        !(self.min_eigenvalue >= -tol)
    }

    /// True when any defect exceeds the default tolerances.
    pub fn any_flagged(&self) -> bool {
        self.trace_flagged(T::lit(POSITIVITY_TOL))
            || self.hermiticity_flagged(T::lit(HERMITICITY_TOL))
            || self.positivity_flagged(T::lit(POSITIVITY_TOL))
    }
}

impl<T: Real> SystemState<T> {
    /// Wraps a density matrix. Only structural invariants are enforced here;
    /// physical validity is reported by [`SystemState::diagnostics`].
    pub fn from_density(rho: DMatrix<Complex<T>>, subsystem_dims: Vec<usize>, time: T) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidDimension(format!("density matrix is {}x{}", rho.nrows(), rho.ncols())));
        }
        let dim: usize = subsystem_dims.iter().product();
        if subsystem_dims.is_empty() || dim != rho.nrows() {
            return Err(Error::InvalidDimension(format!(
                "subsystem dimensions {subsystem_dims:?} do not match a {}x{} density matrix",
                rho.nrows(),
                rho.ncols()
            )));
        }
        if !rho.iter().all(|&z| is_finite_c(z)) {
            return Err(Error::NumericalFailure("density matrix has non-finite entries".into()));
        }
        Ok(Self { rho, subsystem_dims, time })
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &[Complex<T>], subsystem_dims: Vec<usize>, time: T) -> Result<Self> {
        let norm = vec_norm(psi);
        if (norm - T::one()).abs() > T::lit(1e-10) {
            return Err(Error::InvalidArgument(format!("state vector has norm {norm}, expected 1")));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::from_density(&v * v.adjoint(), subsystem_dims, time)
    }

    /// Tensor product of factor states, in order.
    pub fn product(factors: &[SystemState<T>]) -> Result<Self> {
        let first = factors.first().ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
        let mut rho = first.rho.clone();
        let mut dims = first.subsystem_dims.clone();
        for f in &factors[1..] {
            rho = rho.kronecker(&f.rho);
            dims.extend_from_slice(&f.subsystem_dims);
        }
        Self::from_density(rho, dims, first.time)
    }

    pub fn rho(&self) -> &DMatrix<Complex<T>> {
        &self.rho
    }

    pub fn into_rho(self) -> DMatrix<Complex<T>> {
        self.rho
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn with_time(mut self, time: T) -> Self {
        self.time = time;
        self
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim()).fold(Complex::default(), |acc, i| acc + self.rho[(i, i)])
    }

    pub fn hermiticity_defect(&self) -> T {
        dense_hermiticity_defect(&self.rho)
    }

    /// Purity Tr ρ².
    pub fn purity(&self) -> T {
        self.rho.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// `Tr[op ρ]`.
    pub fn expectation(&self, op: &Operator<T>) -> Result<Complex<T>> {
        if op.subsystem_dims() != self.subsystem_dims.as_slice() {
            return Err(Error::InvalidArgument(format!(
                "operator on {:?} applied to state on {:?}",
                op.subsystem_dims(),
                self.subsystem_dims
            )));
        }
        Ok(op.matrix().triplets().fold(Complex::default(), |acc, (i, k, v)| acc + v * self.rho[(k, i)]))
    }

    /// Reduced state on the factors listed in `keep` (kept in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<SystemState<T>> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("partial trace needs at least one kept factor".into()));
        }
        let n = self.subsystem_dims.len();
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() || kept.iter().any(|&k| k >= n) {
            return Err(Error::InvalidArgument(format!("invalid kept factors {keep:?} for {n} subsystems")));
        }
        let kept_dims: Vec<usize> = kept.iter().map(|&k| self.subsystem_dims[k]).collect();
        let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
        let dk: usize = kept_dims.iter().product();
        let dt: usize = traced.iter().map(|&k| self.subsystem_dims[k]).product();

        // groups[t][k] = flattened index with traced multi-index t and kept multi-index k
        let mut groups = vec![vec![0usize; dk]; dt];
        let mut digits = vec![0usize; n];
        for full in 0..self.dim() {
            let mut rem = full;
            for f in (0..n).rev() {
                digits[f] = rem % self.subsystem_dims[f];
                rem /= self.subsystem_dims[f];
            }
            let ki = kept.iter().fold(0, |acc, &f| acc * self.subsystem_dims[f] + digits[f]);
            let ti = traced.iter().fold(0, |acc, &f| acc * self.subsystem_dims[f] + digits[f]);
            groups[ti][ki] = full;
        }
        let mut red = DMatrix::zeros(dk, dk);
        for g in &groups {
            for (b, &jb) in g.iter().enumerate() {
                for (a, &ia) in g.iter().enumerate() {
                    red[(a, b)] += self.rho[(ia, jb)];
                }
            }
        }
        SystemState::from_density(red, kept_dims, self.time)
    }

    /// Ascending spectrum of the Hermitian part of ρ.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let half = T::lit(0.5);
        let herm = (&self.rho + self.rho.adjoint()) * Complex::new(half, T::zero());
        hermitian_eigvals_dense(&herm)
    }

    pub fn diagnostics(&self) -> StateDiagnostics<T> {
        let trace_deviation = (self.trace() - Complex::new(T::one(), T::zero())).norm_sqr().sqrt();
        let min_eigenvalue = self.eigenvalues().ok().and_then(|v| v.first().copied()).unwrap_or(T::zero());
        StateDiagnostics { trace_deviation, hermiticity_defect: self.hermiticity_defect(), min_eigenvalue }
    }

    /// Fidelity ⟨ψ|ρ|ψ⟩ with a pure state.
    pub fn overlap_with_pure(&self, psi: &[Complex<T>]) -> Result<T> {
        if psi.len() != self.dim() {
            return Err(Error::InvalidArgument("state vector dimension mismatch".into()));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok((v.adjoint() * &self.rho * &v)[(0, 0)].re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::operator::{annihilation_op, basis_index, embed, sigma_minus, Operator};

    fn ket(dims: &[usize], levels: &[usize]) -> Vec<Complex<f64>> {
        let dim: usize = dims.iter().product();
        let mut v = vec![Complex::default(); dim];
        v[basis_index(dims, levels).unwrap()] = Complex::new(1.0, 0.0);
        v
    }

    fn mixed(d: usize, weights: &[f64]) -> SystemState<f64> {
        let rho = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex::new(weights[i], 0.0)
            } else {
                Complex::new(0.01 * (i + j) as f64, 0.02 * (i as f64 - j as f64))
            }
        });
        SystemState::from_density(rho, vec![d], 0.0).unwrap()
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = mixed(2, &[0.3, 0.7]);
        let b = mixed(3, &[0.2, 0.5, 0.3]);
        let ab = SystemState::product(&[a.clone(), b.clone()]).unwrap();
        let ra = ab.partial_trace(&[0]).unwrap();
        let rb = ab.partial_trace(&[1]).unwrap();
        assert!((ra.rho() - a.rho()).camax() < 1e-14);
        assert!((rb.rho() - b.rho()).camax() < 1e-14);
        assert!((ab.partial_trace(&[0]).unwrap().trace() - ab.trace()).norm_sqr() < 1e-28);
    }

    #[test]
    fn entangled_marginal_is_maximally_mixed() {
        let dims = [2, 2];
        let s = 0.5f64.sqrt();
        let psi: Vec<_> =
            ket(&dims, &[0, 0]).iter().zip(ket(&dims, &[1, 1])).map(|(a, b)| (a + b) * s).collect();
        let st = SystemState::pure(&psi, dims.to_vec(), 0.0).unwrap();
        let field = st.partial_trace(&[1]).unwrap();
        assert!((field.rho() - DMatrix::identity(2, 2) * Complex::new(0.5, 0.0)).camax() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        let st = SystemState::pure(&ket(&[2, 2], &[0, 0]), vec![2, 2], 0.0).unwrap();
        assert!(matches!(st.partial_trace(&[]), Err(Error::InvalidArgument(_))));
        assert!(st.partial_trace(&[2]).is_err());
    }

    #[test]
    fn partial_trace_keeps_non_adjacent_factors() {
        let dims = [2, 3, 2];
        let st = SystemState::pure(&ket(&dims, &[1, 2, 0]), dims.to_vec(), 0.0).unwrap();
        let red = st.partial_trace(&[0, 2]).unwrap();
        assert_eq!(red.subsystem_dims(), &[2, 2]);
        assert!((red.rho()[(2, 2)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectations() {
        let dims = vec![2, 21];
        let st = SystemState::pure(&ket(&dims, &[0, 20]), dims.clone(), 0.0).unwrap();
        let id = Operator::identity(&dims).unwrap();
        assert!((st.expectation(&id).unwrap().re - 1.0).abs() < 1e-15);
        let a = embed(&annihilation_op::<f64>(20).unwrap(), 1, &dims).unwrap();
        let n = a.adjoint().mul(&a).unwrap();
        assert!((st.expectation(&n).unwrap().re - 20.0).abs() < 1e-12);
        let sm = embed(&sigma_minus::<f64>(), 0, &dims).unwrap();
        let pe = sm.adjoint().mul(&sm).unwrap();
        assert_eq!(st.expectation(&pe).unwrap().re, 0.0);
        let wrong = Operator::identity(&[2]).unwrap();
        assert!(st.expectation(&wrong).is_err());
    }

    #[test]
    fn diagnostics_report_defects() {
        let dims = vec![2, 3];
        let pure = SystemState::pure(&ket(&dims, &[1, 1]), dims.clone(), 0.0).unwrap();
        let d = pure.diagnostics();
        assert!(d.trace_deviation < 1e-12 && d.hermiticity_defect < 1e-12 && d.min_eigenvalue.abs() < 1e-12);
        assert!(!d.any_flagged());

        let scaled = SystemState::from_density(pure.rho() * Complex::new(0.9, 0.0), dims.clone(), 0.0).unwrap();
        let d = scaled.diagnostics();
        assert!((d.trace_deviation - 0.1).abs() < 1e-12);
        assert!(d.trace_flagged(1e-8));

        let mut rho = pure.rho().clone();
        rho[(0, 1)] += Complex::new(1e-3, 0.0);
        let skew = SystemState::from_density(rho, dims, 0.0).unwrap();
        assert!((skew.diagnostics().hermiticity_defect - 1e-3).abs() < 1e-12);
    }
}
