//! Compressed sparse row storage for Hamiltonians and jump operators.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::num::{cabs, is_finite_c, Complex, Real};

/// Complex CSR matrix. Column indices within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T: Real> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![Complex::new(T::one(), T::zero()); n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex<T>)>,
    {
        Self::from_triplets_impl(nrows, ncols, triplets, true)
    }

    fn from_triplets_impl<I>(nrows: usize, ncols: usize, triplets: I, drop_zeros: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex<T>)>,
    {
        let mut rows: Vec<BTreeMap<usize, Complex<T>>> = vec![BTreeMap::new(); nrows];
        for (i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            *rows[i].entry(j).or_insert_with(Complex::default) += v;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                if drop_zeros && v.re == T::zero() && v.im == T::zero() {
                    continue;
                }
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self { nrows, ncols, indptr, indices, values })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.indptr[i]..self.indptr[i + 1]).map(move |p| (i, self.indices[p], self.values[p]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        let row = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.indptr[i] + k],
            Err(_) => Complex::default(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![Complex::default(); self.nnz()];
        for i in 0..self.nrows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[p];
                let q = next[j];
                indices[q] = i;
                values[q] = self.values[p].conj();
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr, indices, values }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::InvalidArgument(format!(
                "cannot add {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut trip = Vec::new();
        for i in 0..self.nrows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                let k = self.indices[p];
                let a = self.values[p];
                for q in other.indptr[k]..other.indptr[k + 1] {
                    trip.push((i, other.indices[q], a * other.values[q]));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let nrows = self
            .nrows
            .checked_mul(other.nrows)
            .ok_or_else(|| Error::Capacity("kron row dimension overflows usize".into()))?;
        let ncols = self
            .ncols
            .checked_mul(other.ncols)
            .ok_or_else(|| Error::Capacity("kron column dimension overflows usize".into()))?;
        let nnz = self
            .nnz()
            .checked_mul(other.nnz())
            .ok_or_else(|| Error::Capacity("kron nonzero count overflows usize".into()))?;
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for i in 0..self.nrows {
            for k in 0..other.nrows {
                for p in self.indptr[i]..self.indptr[i + 1] {
                    for q in other.indptr[k]..other.indptr[k + 1] {
                        indices.push(self.indices[p] * other.ncols + other.indices[q]);
                        values.push(self.values[p] * other.values[q]);
                    }
                }
                indptr.push(indices.len());
            }
        }
        Ok(Self { nrows, ncols, indptr, indices, values })
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(cabs(v)))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|&v| is_finite_c(v))
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut acc = Complex::default();
                for p in self.indptr[i]..self.indptr[i + 1] {
                    acc += self.values[p] * x[self.indices[p]];
                }
                acc
            })
            .collect()
    }

    /// Computes `y = self * x` for column-major `x` with `ncols` columns.
    pub fn mul_dense_into(&self, x: &[Complex<T>], ncols: usize, y: &mut [Complex<T>]) {
        spmm_colmajor(&self.indptr, &self.indices, &self.values, self.ncols, x, ncols, y);
    }
}

/// `y = S x` where `S` is given by raw CSR arrays and `x`, `y` are column-major.
pub(crate) fn spmm_colmajor<T: Real>(
    indptr: &[usize],
    indices: &[usize],
    values: &[Complex<T>],
    inner: usize,
    x: &[Complex<T>],
    ncols: usize,
    y: &mut [Complex<T>],
) {
    let nrows = indptr.len() - 1;
    debug_assert_eq!(x.len(), inner * ncols);
    debug_assert_eq!(y.len(), nrows * ncols);
    for c in 0..ncols {
        let xc = &x[c * inner..(c + 1) * inner];
        let yc = &mut y[c * nrows..(c + 1) * nrows];
        for (i, yi) in yc.iter_mut().enumerate() {
            let mut re = T::zero();
            let mut im = T::zero();
            for p in indptr[i]..indptr[i + 1] {
                let a = values[p];
                let b = xc[indices[p]];
                re += a.re * b.re - a.im * b.im;
                im += a.re * b.im + a.im * b.re;
            }
            *yi = Complex::new(re, im);
        }
    }
}

/// A fixed sparsity pattern shared by several matrices, so that a time-dependent
/// linear combination `Σ c_k(t) M_k` can be refreshed without re-assembly.
#[derive(Debug, Clone)]
pub struct SharedPattern<T: Real> {
    pattern: CsrMatrix<T>,
    term_values: Vec<Vec<Complex<T>>>,
}

impl<T: Real> SharedPattern<T> {
    pub fn new(terms: &[&CsrMatrix<T>]) -> Result<Self> {
        let (nrows, ncols) = match terms.first() {
            Some(m) => (m.nrows, m.ncols),
            None => return Err(Error::InvalidArgument("empty linear combination".into())),
        };
        if terms.iter().any(|m| m.nrows != nrows || m.ncols != ncols) {
            return Err(Error::InvalidArgument("terms of a linear combination differ in shape".into()));
        }
        let one = Complex::new(T::one(), T::zero());
        let union = CsrMatrix::from_triplets_impl(
            nrows,
            ncols,
            terms.iter().flat_map(|m| m.triplets().map(move |(i, j, _)| (i, j, one))),
            false,
        )?;
        let term_values = terms
            .iter()
            .map(|m| {
                let mut vals = vec![Complex::default(); union.nnz()];
                for i in 0..nrows {
                    let cols = &union.indices[union.indptr[i]..union.indptr[i + 1]];
                    for p in m.indptr[i]..m.indptr[i + 1] {
                        let k = cols.binary_search(&m.indices[p]).expect("entry in union pattern");
                        vals[union.indptr[i] + k] = m.values[p];
                    }
                }
                vals
            })
            .collect();
        Ok(Self { pattern: union, term_values })
    }

    pub fn n_terms(&self) -> usize {
        self.term_values.len()
    }

    /// Overwrites the pattern values with `Σ coefs[k] * term_k`.
    pub fn assemble(&mut self, coefs: &[Complex<T>]) -> &CsrMatrix<T> {
        assert_eq!(coefs.len(), self.term_values.len());
        let out = &mut self.pattern.values;
        out.iter_mut().for_each(|v| *v = Complex::default());
        for (c, vals) in coefs.iter().zip(&self.term_values) {
            if c.re == T::zero() && c.im == T::zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(vals) {
                *o += *c * *v;
            }
        }
        &self.pattern
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.pattern
    }
}
