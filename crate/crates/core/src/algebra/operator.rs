use nalgebra::DMatrix;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::num::{Complex, Real};

/// Square operator on a tensor-product Hilbert space.
///
/// Factor 0 is the most significant index of the flattened basis, i.e. the
/// layout produced by repeated Kronecker products `A₀ ⊗ A₁ ⊗ …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real> {
    matrix: CsrMatrix<T>,
    subsystem_dims: Vec<usize>,
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    dims.iter().try_fold(1usize, |acc, &d| {
        acc.checked_mul(d).ok_or_else(|| Error::Capacity(format!("dimension product of {dims:?} overflows")))
    })
}

impl<T: Real> Operator<T> {
    pub fn new(matrix: CsrMatrix<T>, subsystem_dims: Vec<usize>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidDimension(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if subsystem_dims.is_empty() || subsystem_dims.contains(&0) {
            return Err(Error::InvalidDimension(format!("bad subsystem dimensions {subsystem_dims:?}")));
        }
        let dim = checked_product(&subsystem_dims)?;
        if dim != matrix.nrows() {
            return Err(Error::InvalidDimension(format!(
                "subsystem dimensions {subsystem_dims:?} multiply to {dim}, matrix is {}",
                matrix.nrows()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::NumericalFailure("operator has non-finite entries".into()));
        }
        Ok(Self { matrix, subsystem_dims })
    }

    /// Single-factor operator from triplets.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex<T>)>,
    {
        Self::new(CsrMatrix::from_triplets(dim, dim, triplets)?, vec![dim])
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        let dim = checked_product(dims)?;
        Self::new(CsrMatrix::identity(dim), dims.to_vec())
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let dim = checked_product(dims)?;
        Self::new(CsrMatrix::zeros(dim, dim), dims.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        self.matrix.to_dense()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix.get(i, j)
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), subsystem_dims: self.subsystem_dims.clone() }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.subsystem_dims != other.subsystem_dims {
            return Err(Error::InvalidArgument(format!(
                "operators act on different spaces: {:?} vs {:?}",
                self.subsystem_dims, other.subsystem_dims
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self { matrix: self.matrix.matmul(&other.matrix)?, subsystem_dims: self.subsystem_dims.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self { matrix: self.matrix.add(&other.matrix)?, subsystem_dims: self.subsystem_dims.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { matrix: self.matrix.scale(c), subsystem_dims: self.subsystem_dims.clone() }
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.scale(Complex::new(c, T::zero()))
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Largest entry modulus, ‖A‖_max.
    pub fn max_abs(&self) -> T {
        self.matrix.max_abs()
    }

    /// ‖A − A†‖_max.
    pub fn hermiticity_defect(&self) -> T {
        match self.sub(&self.adjoint()) {
            Ok(d) => d.max_abs(),
            Err(_) => T::zero(),
        }
    }

    pub fn apply(&self, psi: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if psi.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "vector of length {} does not match operator dimension {}",
                psi.len(),
                self.dim()
            )));
        }
        Ok(self.matrix.mul_vec(psi))
    }
}

/// Bosonic annihilation operator truncated to Fock states `0..=n_max`.
pub fn annihilation_op<T: Real>(n_max: usize) -> Result<Operator<T>> {
    if n_max < 1 {
        return Err(Error::InvalidDimension(format!("Fock truncation must be >= 1, got {n_max}")));
    }
    Operator::from_triplets(
        n_max + 1,
        (1..=n_max).map(|n| (n - 1, n, Complex::new(T::lit(n as f64).sqrt(), T::zero()))),
    )
}

pub fn creation_op<T: Real>(n_max: usize) -> Result<Operator<T>> {
    Ok(annihilation_op::<T>(n_max)?.adjoint())
}

pub fn number_op<T: Real>(n_max: usize) -> Result<Operator<T>> {
    if n_max < 1 {
        return Err(Error::InvalidDimension(format!("Fock truncation must be >= 1, got {n_max}")));
    }
    Operator::from_triplets(n_max + 1, (0..=n_max).map(|n| (n, n, Complex::new(T::lit(n as f64), T::zero()))))
}

/// TLS lowering operator `σ⁻ = |g⟩⟨e|` with `|g⟩ = 0`, `|e⟩ = 1`.
pub fn sigma_minus<T: Real>() -> Operator<T> {
    Operator::from_triplets(2, [(0, 1, Complex::new(T::one(), T::zero()))]).expect("static 2x2 operator")
}

pub fn sigma_plus<T: Real>() -> Operator<T> {
    sigma_minus::<T>().adjoint()
}

/// Kronecker product; subsystem lists are concatenated.
pub fn kron<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Result<Operator<T>> {
    let mut dims = a.subsystem_dims.clone();
    dims.extend_from_slice(&b.subsystem_dims);
    Operator::new(a.matrix.kron(&b.matrix)?, dims)
}

/// Lifts a single-factor operator into slot `slot` of the space `dims`.
pub fn embed<T: Real>(op: &Operator<T>, slot: usize, dims: &[usize]) -> Result<Operator<T>> {
    if slot >= dims.len() {
        return Err(Error::InvalidArgument(format!("slot {slot} out of range for {} factors", dims.len())));
    }
    if op.dim() != dims[slot] {
        return Err(Error::InvalidArgument(format!(
            "operator of dimension {} cannot act on factor {slot} of dimension {}",
            op.dim(),
            dims[slot]
        )));
    }
    let before: usize = checked_product(&dims[..slot])?;
    let after: usize = checked_product(&dims[slot + 1..])?;
    let left = CsrMatrix::identity(before);
    let right = CsrMatrix::identity(after);
    let matrix = left.kron(&op.matrix)?.kron(&right)?;
    Operator::new(matrix, dims.to_vec())
}

/// Maximum over entries of `|a − b|`, treating missing entries as zero.
pub fn max_abs_diff<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Result<T> {
    Ok(a.sub(b)?.max_abs())
}

/// Flattened basis index of a product state `|i₀, i₁, …⟩`.
pub fn basis_index(dims: &[usize], levels: &[usize]) -> Result<usize> {
    if dims.len() != levels.len() {
        return Err(Error::InvalidArgument("level list does not match subsystem count".into()));
    }
    let mut idx = 0usize;
    for (&d, &l) in dims.iter().zip(levels) {
        if l >= d {
            return Err(Error::InvalidArgument(format!("level {l} outside factor of dimension {d}")));
        }
        idx = idx * d + l;
    }
    Ok(idx)
}

/// Vector norm ‖ψ‖.
pub fn vec_norm<T: Real>(psi: &[Complex<T>]) -> T {
    psi.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}
