//! Lindblad right-hand side on block-structured density matrices.
//!
//! When every Hamiltonian term conserves the total excitation number and every
//! jump operator lowers it by one, a density matrix that starts block diagonal
//! in that number stays block diagonal. Each block is then evolved on its own,
//! with jumps feeding block `N + 1` into block `N`. Otherwise a single dense
//! block holds the whole matrix.

use nalgebra::DMatrix;

use crate::algebra::{spmm_colmajor, CsrMatrix, SharedPattern, SystemState};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::num::{is_finite_c, Complex, Real};

fn submatrix<T: Real>(m: &CsrMatrix<T>, rows: &[usize], col_map: &[usize]) -> Result<CsrMatrix<T>> {
    let ncols = col_map.iter().filter(|&&c| c != usize::MAX).count();
    let indptr = m.indptr();
    let mut trip = Vec::new();
    for (r, &i) in rows.iter().enumerate() {
        for p in indptr[i]..indptr[i + 1] {
            let c = col_map[m.indices()[p]];
            if c != usize::MAX {
                trip.push((r, c, m.values()[p]));
            }
        }
    }
    CsrMatrix::from_triplets(rows.len(), ncols, trip)
}

/// Total excitation number of every basis index.
pub(crate) fn excitation_numbers(dims: &[usize]) -> Vec<usize> {
    let dim: usize = dims.iter().product();
    (0..dim)
        .map(|mut idx| {
            let mut n = 0;
            for &d in dims.iter().rev() {
                n += idx % d;
                idx /= d;
            }
            n
        })
        .collect()
}

struct ChannelBlock<T: Real> {
    source: usize,
    target: usize,
    pattern: SharedPattern<T>,
}

/// Model compiled for repeated evaluation on a fixed block layout.
pub struct LindbladRhs<T: Real> {
    model: ModelSpec<T>,
    sectors: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    len: usize,
    heff: Vec<Option<SharedPattern<T>>>,
    channels: Vec<Vec<ChannelBlock<T>>>,
    h_coefs: Vec<Complex<T>>,
    ch_coefs: Vec<Vec<Complex<T>>>,
    heff_coefs: Vec<Complex<T>>,
    buf_a: Vec<Complex<T>>,
    buf_b: Vec<Complex<T>>,
    buf_c: Vec<Complex<T>>,
}

impl<T: Real> LindbladRhs<T> {
    /// Compiles `model`, using excitation sectors when both the model and `rho0` permit it.
    pub fn new(model: &ModelSpec<T>, rho0: Option<&DMatrix<Complex<T>>>) -> Result<Self> {
        Self::with_layout(model, rho0, true)
    }

    /// Compiles `model` with a single dense block.
    pub fn dense(model: &ModelSpec<T>) -> Result<Self> {
        Self::with_layout(model, None, false)
    }

    fn with_layout(model: &ModelSpec<T>, rho0: Option<&DMatrix<Complex<T>>>, allow_sectors: bool) -> Result<Self> {
        let dims = model.subsystem_dims();
        let dim = model.dim();
        let nexc = excitation_numbers(dims);
        let conserving = model.hamiltonian().operators().iter().all(|op| {
            op.matrix().triplets().all(|(i, j, _)| nexc[i] == nexc[j])
        }) && model
            .channels()
            .iter()
            .flat_map(|c| c.operators())
            .all(|op| op.matrix().triplets().all(|(i, j, _)| nexc[i] + 1 == nexc[j]));
        let block_diagonal = rho0.map_or(true, |rho| {
            (0..dim).all(|j| (0..dim).all(|i| nexc[i] == nexc[j] || rho[(i, j)] == Complex::default()))
        });
        let sectored = allow_sectors && conserving && block_diagonal;
        let sectors: Vec<Vec<usize>> = if sectored {
            let top = nexc.iter().copied().max().unwrap_or(0);
            (0..=top).map(|n| (0..dim).filter(|&i| nexc[i] == n).collect()).collect()
        } else {
            vec![(0..dim).collect()]
        };
        let mut offsets = Vec::with_capacity(sectors.len());
        let mut len = 0;
        for s in &sectors {
            offsets.push(len);
            len += s.len() * s.len();
        }

        let mut heff_terms: Vec<CsrMatrix<T>> = model.hamiltonian().operators().iter().map(|o| o.matrix().clone()).collect();
        for ch in model.channels() {
            let ops = ch.operators();
            for a in ops {
                let ad = a.matrix().adjoint();
                for b in ops {
                    heff_terms.push(ad.matmul(b.matrix())?);
                }
            }
        }
        let mut col_maps = Vec::with_capacity(sectors.len());
        for s in &sectors {
            let mut map = vec![usize::MAX; dim];
            for (k, &i) in s.iter().enumerate() {
                map[i] = k;
            }
            col_maps.push(map);
        }
        let mut heff = Vec::with_capacity(sectors.len());
        for (s, rows) in sectors.iter().enumerate() {
            if heff_terms.is_empty() {
                heff.push(None);
                continue;
            }
            let subs = heff_terms
                .iter()
                .map(|m| submatrix(m, rows, &col_maps[s]))
                .collect::<Result<Vec<_>>>()?;
            heff.push(Some(SharedPattern::new(&subs.iter().collect::<Vec<_>>())?));
        }
        let mut channels = Vec::with_capacity(model.channels().len());
        for ch in model.channels() {
            let mut blocks = Vec::new();
            for source in 0..sectors.len() {
                let target = if sectored {
                    match source.checked_sub(1) {
                        Some(t) => t,
                        None => continue,
                    }
                } else {
                    source
                };
                let subs = ch
                    .operators()
                    .iter()
                    .map(|op| submatrix(op.matrix(), &sectors[target], &col_maps[source]))
                    .collect::<Result<Vec<_>>>()?;
                blocks.push(ChannelBlock {
                    source,
                    target,
                    pattern: SharedPattern::new(&subs.iter().collect::<Vec<_>>())?,
                });
            }
            channels.push(blocks);
        }
        let largest = sectors.iter().map(|s| s.len()).max().unwrap_or(0);
        let buf = vec![Complex::default(); largest * largest];
        Ok(Self {
            model: model.clone(),
            ch_coefs: vec![Vec::new(); model.channels().len()],
            sectors,
            offsets,
            len,
            heff,
            channels,
            h_coefs: Vec::new(),
            heff_coefs: Vec::new(),
            buf_a: buf.clone(),
            buf_b: buf.clone(),
            buf_c: buf,
        })
    }

    pub fn model(&self) -> &ModelSpec<T> {
        &self.model
    }

    /// Number of stored complex entries.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_sectored(&self) -> bool {
        self.sectors.len() > 1
    }

    pub fn sectors(&self) -> &[Vec<usize>] {
        &self.sectors
    }

    /// Packs the stored blocks of a dense density matrix.
    pub fn pack(&self, rho: &DMatrix<Complex<T>>) -> Vec<Complex<T>> {
        let mut y = Vec::with_capacity(self.len);
        for s in &self.sectors {
            for &j in s {
                for &i in s {
                    y.push(rho[(i, j)]);
                }
            }
        }
        y
    }

    pub fn unpack(&self, y: &[Complex<T>]) -> DMatrix<Complex<T>> {
        let dim = self.model.dim();
        let mut rho = DMatrix::zeros(dim, dim);
        for (s, idx) in self.sectors.iter().enumerate() {
            let n = idx.len();
            let blk = &y[self.offsets[s]..self.offsets[s] + n * n];
            for (cj, &j) in idx.iter().enumerate() {
                for (ci, &i) in idx.iter().enumerate() {
                    rho[(i, j)] = blk[cj * n + ci];
                }
            }
        }
        rho
    }

    pub fn to_state(&self, y: &[Complex<T>], t: T) -> Result<SystemState<T>> {
        SystemState::from_density(self.unpack(y), self.model.subsystem_dims().to_vec(), t)
    }

    /// Views of the diagonal blocks as `(indices, column-major block)`.
    pub fn blocks<'a>(&'a self, y: &'a [Complex<T>]) -> impl Iterator<Item = (&'a [usize], &'a [Complex<T>])> + 'a {
        self.sectors.iter().enumerate().map(move |(s, idx)| {
            let n = idx.len();
            (idx.as_slice(), &y[self.offsets[s]..self.offsets[s] + n * n])
        })
    }

    pub fn trace(&self, y: &[Complex<T>]) -> Complex<T> {
        let mut acc = Complex::default();
        for (idx, blk) in self.blocks(y) {
            let n = idx.len();
            for k in 0..n {
                acc += blk[k * n + k];
            }
        }
        acc
    }

    /// `Tr[O ρ]` for an operator on the full space.
    pub fn expectation(&self, op: &CsrMatrix<T>, y: &[Complex<T>]) -> Complex<T> {
        let dim = self.model.dim();
        let mut where_ = vec![(0usize, 0usize); dim];
        for (s, idx) in self.sectors.iter().enumerate() {
            for (k, &i) in idx.iter().enumerate() {
                where_[i] = (s, k);
            }
        }
        let mut acc = Complex::default();
        for (i, j, v) in op.triplets() {
            let ((si, ki), (sj, kj)) = (where_[j], where_[i]);
            if si == sj {
                let n = self.sectors[si].len();
                acc += v * y[self.offsets[si] + kj * n + ki];
            }
        }
        acc
    }

    /// Writes `dρ/dt` at time `t` into `out`.
    pub fn eval(&mut self, t: T, y: &[Complex<T>], out: &mut [Complex<T>]) {
        let model = &self.model;
        model.hamiltonian().coefficients_into(t, &mut self.h_coefs);
        for (k, ch) in model.channels().iter().enumerate() {
            ch.coefficients_into(t, &mut self.ch_coefs[k]);
        }
        self.heff_coefs.clear();
        self.heff_coefs.extend_from_slice(&self.h_coefs);
        let minus_half_i = Complex::new(T::zero(), T::lit(-0.5));
        for d in &self.ch_coefs {
            for a in d {
                for b in d {
                    self.heff_coefs.push(minus_half_i * a.conj() * *b);
                }
            }
        }
        let half = T::lit(0.5);
        for s in 0..self.sectors.len() {
            let n = self.sectors[s].len();
            let off = self.offsets[s];
            let x = &mut self.buf_a[..n * n];
            match self.heff[s].as_mut() {
                Some(p) => {
                    let m = p.assemble(&self.heff_coefs);
                    spmm_colmajor(m.indptr(), m.indices(), m.values(), n, &y[off..off + n * n], n, x);
                    // X = −i H_eff ρ
                    for z in x.iter_mut() {
                        *z = Complex::new(z.im, -z.re);
                    }
                }
                None => x.iter_mut().for_each(|z| *z = Complex::default()),
            }
            for (k, blocks) in self.channels.iter_mut().enumerate() {
                for blk in blocks.iter_mut().filter(|b| b.target == s) {
                    let ns = self.sectors[blk.source].len();
                    let src = &y[self.offsets[blk.source]..self.offsets[blk.source] + ns * ns];
                    let l = blk.pattern.assemble(&self.ch_coefs[k]);
                    // B = L ρ_src (n × ns), C = B† (ns × n), D = L C (n × n)
                    let b = &mut self.buf_b[..n * ns];
                    spmm_colmajor(l.indptr(), l.indices(), l.values(), ns, src, ns, b);
                    let c = &mut self.buf_c[..ns * n];
                    for j in 0..ns {
                        for i in 0..n {
                            c[i * ns + j] = b[j * n + i].conj();
                        }
                    }
                    let d = &mut self.buf_b[..n * n];
                    spmm_colmajor(l.indptr(), l.indices(), l.values(), ns, &self.buf_c[..ns * n], n, d);
                    for (xi, di) in x.iter_mut().zip(d.iter()) {
                        *xi += *di * half;
                    }
                }
            }
            let o = &mut out[off..off + n * n];
            for j in 0..n {
                for i in 0..=j {
                    let v = x[j * n + i] + x[i * n + j].conj();
                    o[j * n + i] = v;
                    o[i * n + j] = v.conj();
                }
            }
        }
    }
}

/// `−i[H(t), ρ] + Σ_k D[L_k(t)]ρ` for a dense density matrix.
pub fn lindblad_rhs<T: Real>(model: &ModelSpec<T>, t: T, rho: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    if rho.nrows() != model.dim() || rho.ncols() != model.dim() {
        return Err(Error::InvalidDimension(format!(
            "density matrix is {}x{}, model dimension is {}",
            rho.nrows(),
            rho.ncols(),
            model.dim()
        )));
    }
    if !rho.iter().all(|&z| is_finite_c(z)) {
        return Err(Error::NumericalFailure("density matrix has non-finite entries".into()));
    }
    let mut full = LindbladRhs::dense(model)?;
    let y = full.pack(rho);
    let mut out = vec![Complex::default(); y.len()];
    full.eval(t, &y, &mut out);
    if !out.iter().all(|&z| is_finite_c(z)) {
        return Err(Error::NumericalFailure(format!("Lindblad right-hand side is not finite at t = {t}")));
    }
    Ok(full.unpack(&out))
}
