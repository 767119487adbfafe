//! Hermitian eigendecomposition.
//!
//! Matrices are first split into the connected components of their nonzero
//! pattern. Density matrices of excitation-conserving models are exactly block
//! diagonal in the total excitation number, so this turns one large dense
//! problem into many small ones without changing the spectrum.

use nalgebra::DMatrix;

use super::operator::Operator;
use crate::error::{Error, Result};
use crate::num::{Complex, Real};

/// Hermiticity tolerance on ‖A − A†‖_max accepted by the eigensolvers.
pub const HERMITICITY_TOL: f64 = 1e-9;

/// Positivity tolerance on the smallest eigenvalue of a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DMatrix<Complex<T>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Groups indices into blocks that are decoupled by exact zeros.
pub fn nonzero_blocks<T: Real>(m: &DMatrix<Complex<T>>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let z = m[(i, j)];
            if z.re != T::zero() || z.im != T::zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

pub fn dense_hermiticity_defect<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for i in 0..=j {
            let d = m[(i, j)] - m[(j, i)].conj();
            worst = worst.max(d.re.hypot(d.im));
        }
    }
    worst
}

fn check_hermitian<T: Real>(m: &DMatrix<Complex<T>>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let defect = dense_hermiticity_defect(m);
    if !(defect <= T::lit(HERMITICITY_TOL)) {
        return Err(Error::InvalidArgument(format!(
            "Hermiticity defect {defect} exceeds tolerance {HERMITICITY_TOL:e}"
        )));
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors of a dense Hermitian matrix.
pub fn hermitian_eigh_dense<T: Real>(m: &DMatrix<Complex<T>>) -> Result<HermitianEigen<T>> {
    check_hermitian(m)?;
    let n = m.nrows();
    let half = T::lit(0.5);
    let mut pairs: Vec<(T, Vec<(usize, Complex<T>)>)> = Vec::with_capacity(n);
    for block in nonzero_blocks(m) {
        let k = block.len();
        let sub = DMatrix::from_fn(k, k, |i, j| (m[(block[i], block[j])] + m[(block[j], block[i])].conj()) * half);
        let eig = sub.symmetric_eigen();
        for c in 0..k {
            let vec: Vec<(usize, Complex<T>)> = (0..k).map(|r| (block[r], eig.eigenvectors[(r, c)])).collect();
            pairs.push((eig.eigenvalues[c], vec));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (c, (val, vec)) in pairs.into_iter().enumerate() {
        values.push(val);
        for (r, z) in vec {
            vectors[(r, c)] = z;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only (ascending) of a dense Hermitian matrix.
pub fn hermitian_eigvals_dense<T: Real>(m: &DMatrix<Complex<T>>) -> Result<Vec<T>> {
    check_hermitian(m)?;
    let half = T::lit(0.5);
    let mut values = Vec::with_capacity(m.nrows());
    for block in nonzero_blocks(m) {
        let k = block.len();
        if k == 1 {
            values.push(m[(block[0], block[0])].re);
            continue;
        }
        let sub = DMatrix::from_fn(k, k, |i, j| (m[(block[i], block[j])] + m[(block[j], block[i])].conj()) * half);
        values.extend(sub.symmetric_eigenvalues().iter().copied());
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(values)
}

/// Real spectrum (ascending) of a Hermitian operator.
pub fn hermitian_eigs<T: Real>(op: &Operator<T>) -> Result<Vec<T>> {
    hermitian_eigvals_dense(&op.to_dense())
}

/// Spectrum and eigenvectors of a Hermitian operator.
pub fn hermitian_eigh<T: Real>(op: &Operator<T>) -> Result<HermitianEigen<T>> {
    hermitian_eigh_dense(&op.to_dense())
}

/// Trace distance ½‖a − b‖₁ between two Hermitian matrices.
pub fn trace_distance<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::InvalidArgument(format!("shapes {:?} and {:?} differ", a.shape(), b.shape())));
    }
    let diff = a - b;
    let vals = hermitian_eigvals_dense(&diff)?;
    Ok(vals.iter().fold(T::zero(), |acc, v| acc + v.abs()) * T::lit(0.5))
}
