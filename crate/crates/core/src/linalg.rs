//! Dense complex linear algebra and bipartite index bookkeeping.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Composite
//! indices follow the A-major convention `i = i_A * dimB + i_B`, which is
//! also the order `kron` produces.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default cap on the total dimension produced by [`kron`].
pub const DIMENSION_CAP: usize = 4096;

/// Deviation `‖m − m†‖_F / max(1, ‖m‖_F)` above which a matrix is rejected
/// as non-Hermitian instead of being symmetrized.
pub const HERMITIAN_REJECT: f64 = 1e-8;

/// Default iteration budget of the eigenvalue and singular value solvers.
pub const DEFAULT_ITERATION_CAP: usize = 10_000;

static ITERATION_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_ITERATION_CAP);

/// Set the iteration budget of [`eigh`] and [`svd`] for the whole process.
/// Solvers that run out report [`Error::Numeric`].
pub fn set_iteration_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Validation("iteration cap must be positive".into()));
    }
    ITERATION_CAP.store(n, Ordering::Relaxed);
    Ok(())
}

fn iteration_cap() -> usize {
    ITERATION_CAP.load(Ordering::Relaxed)
}

/// Dimensions of a bipartite space `H_A ⊗ H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    #[serde(rename = "dimA")]
    pub a: usize,
    #[serde(rename = "dimB")]
    pub b: usize,
}

impl BipartiteDims {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::Validation(format!("bipartite dimensions must be positive, got {a}x{b}")));
        }
        Ok(Self { a, b })
    }

    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    pub fn total(&self) -> usize {
        self.a * self.b
    }

    pub fn min(&self) -> usize {
        self.a.min(self.b)
    }

    pub fn index(&self, i_a: usize, i_b: usize) -> usize {
        i_a * self.b + i_b
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }
}

/// One factor of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> Result<CMat> {
    if data.len() != rows * cols {
        return Err(Error::Shape(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(CMat::from_row_slice(rows, cols, data))
}

pub fn to_row_major(m: &CMat) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Reshape a composite vector into its `dimA × dimB` coefficient matrix.
pub fn coefficient_matrix(v: &CVec, dims: BipartiteDims) -> CMat {
    CMat::from_fn(dims.a, dims.b, |i, j| v[dims.index(i, j)])
}

/// Inverse of [`coefficient_matrix`].
pub fn vectorize(m: &CMat) -> CVec {
    let cols = m.ncols();
    CVec::from_fn(m.nrows() * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm()
}

/// Real part of `⟨v|m|v⟩`.
pub fn expectation(m: &CMat, v: &CVec) -> f64 {
    v.dotc(&(m * v)).re
}

/// Real part of `Tr(a b)`.
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    kron_with_cap(a, b, DIMENSION_CAP)
}

pub fn kron_with_cap(a: &CMat, b: &CMat, cap: usize) -> Result<CMat> {
    let rows = a.nrows().saturating_mul(b.nrows());
    let cols = a.ncols().saturating_mul(b.ncols());
    let requested = rows.max(cols);
    if requested > cap {
        return Err(Error::DimensionLimit { requested, cap });
    }
    Ok(a.kronecker(b))
}

/// Trace out `side`; tracing out B returns the `dimA × dimA` reduction.
pub fn partial_trace(m: &CMat, dims: BipartiteDims, side: Side) -> Result<CMat> {
    let n = dims.total();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Shape(format!(
            "partial trace over {}x{} needs a {n}x{n} matrix, got {}x{}",
            dims.a,
            dims.b,
            m.nrows(),
            m.ncols()
        )));
    }
    let out = match side {
        Side::B => CMat::from_fn(dims.a, dims.a, |i, j| {
            (0..dims.b).map(|k| m[(dims.index(i, k), dims.index(j, k))]).sum()
        }),
        Side::A => CMat::from_fn(dims.b, dims.b, |i, j| {
            (0..dims.a).map(|k| m[(dims.index(k, i), dims.index(k, j))]).sum()
        }),
    };
    Ok(out)
}

/// `(m + m†)/2`, rejecting inputs whose relative deviation exceeds
/// [`HERMITIAN_REJECT`].
pub fn hermitian_part(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::Shape(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if !is_finite(m) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let adj = m.adjoint();
    let deviation = (m - &adj).norm() / m.norm().max(1.0);
    if deviation > HERMITIAN_REJECT {
        return Err(Error::NotHermitian { deviation });
    }
    Ok((m + adj) * C64::new(0.5, 0.0))
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: CMat,
}

impl Eigh {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, i: usize) -> CVec {
        self.vectors.column(i).into_owned()
    }

    /// Number of eigenvalues strictly above `rel * max(|λ_max|, tiny)`.
    pub fn support_rank(&self, rel: f64) -> usize {
        let cut = rel * self.max().abs().max(f64::MIN_POSITIVE);
        self.values.iter().filter(|&&v| v > cut).count()
    }

    /// Apply `f` to the spectrum: `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            scaled.column_mut(j).scale_mut(f(self.values[j]));
        }
        scaled * self.vectors.adjoint()
    }

    /// Projector onto eigenvectors with eigenvalue at or below the support cut.
    pub fn kernel_projector(&self, rel: f64) -> CMat {
        let r = self.support_rank(rel);
        let n = self.values.len();
        let mut p = CMat::zeros(n, n);
        for j in r..n {
            let v = self.vectors.column(j);
            p += v * v.adjoint();
        }
        p
    }

    pub fn reconstruct(&self) -> CMat {
        self.map(|x| x)
    }
}

// Entries this far below the largest magnitude are treated as roundoff; this
// keeps exactly structured inputs (diagonal, block diagonal) from having their
// degenerate eigenspaces rotated by reflections built on noise.
fn flush_roundoff(m: &mut CMat) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = 4.0 * f64::EPSILON * scale;
    for z in m.iter_mut() {
        if z.re.abs() <= floor {
            z.re = 0.0;
        }
        if z.im.abs() <= floor {
            z.im = 0.0;
        }
    }
}

pub fn eigh(m: &CMat) -> Result<Eigh> {
    let mut h = hermitian_part(m)?;
    flush_roundoff(&mut h);
    let n = h.nrows();
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: h });
    }
    let norm = h.norm();
    let dec = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, iteration_cap())
        .ok_or(Error::Numeric { op: "eigh", residual: norm })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[j].total_cmp(&dec.eigenvalues[i]));
    let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| dec.eigenvectors[(r, order[k])]);
    Ok(Eigh { values, vectors })
}

pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    Ok(eigh(m)?.min())
}

pub fn max_eigenvalue(m: &CMat) -> Result<f64> {
    Ok(eigh(m)?.max())
}

/// Thin singular value decomposition `m = U diag(s) V†` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub singular: Vec<f64>,
    pub v_adj: CMat,
}

impl Svd {
    pub fn reconstruct(&self) -> CMat {
        let mut us = self.u.clone();
        for (j, s) in self.singular.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.v_adj
    }

    /// Best approximation of rank at most `r` in Frobenius norm.
    pub fn truncated(&self, r: usize) -> CMat {
        let r = r.min(self.singular.len());
        let mut us = self.u.columns(0, r).into_owned();
        for j in 0..r {
            us.column_mut(j).scale_mut(self.singular[j]);
        }
        us * self.v_adj.rows(0, r)
    }
}

pub fn svd(m: &CMat) -> Result<Svd> {
    if !is_finite(m) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd { u: CMat::zeros(rows, 0), singular: vec![], v_adj: CMat::zeros(0, cols) });
    }
    let norm = m.norm();
    let dec = m
        .clone()
        .try_svd(true, true, f64::EPSILON, iteration_cap())
        .ok_or(Error::Numeric { op: "svd", residual: norm })?;
    let (u, v_t) = match (dec.u, dec.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(Error::Numeric { op: "svd", residual: norm }),
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    Ok(Svd {
        u: CMat::from_fn(rows, k, |r, j| u[(r, order[j])]),
        singular: order.iter().map(|&i| dec.singular_values[i]).collect(),
        v_adj: CMat::from_fn(k, cols, |j, c| v_t[(order[j], c)]),
    })
}

/// Closest matrix with orthonormal rows (or columns, whichever is shorter):
/// the unitary factor of the polar decomposition.
pub fn polar_unitary(m: &CMat) -> Result<CMat> {
    let d = svd(m)?;
    Ok(d.u * d.v_adj)
}

/// Best Schmidt-rank-`r` approximation of a composite vector.
pub fn truncate_schmidt_rank(v: &CVec, dims: BipartiteDims, r: usize) -> Result<CVec> {
    let m = coefficient_matrix(v, dims);
    Ok(vectorize(&svd(&m)?.truncated(r)))
}

/// Trace distance `½‖a − b‖₁` of two Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    let e = eigh(&(a - b))?;
    Ok(0.5 * e.values.iter().map(|x| x.abs()).sum::<f64>())
}

pub fn real_diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0))))
}

/// Hermitian matrix as a real vector with the same Frobenius norm:
/// diagonal entries, then `√2 Re`, `√2 Im` of the upper triangle.
pub fn hermitian_coordinates(h: &CMat) -> DVector<f64> {
    let n = h.nrows();
    let mut out = Vec::with_capacity(n * n);
    out.extend((0..n).map(|i| h[(i, i)].re));
    for i in 0..n {
        for j in i + 1..n {
            out.push(std::f64::consts::SQRT_2 * h[(i, j)].re);
            out.push(std::f64::consts::SQRT_2 * h[(i, j)].im);
        }
    }
    DVector::from_vec(out)
}

/// Non-negative least squares `min ‖A x − b‖₂` over `x ≥ 0` by the
/// Lawson–Hanson active-set method.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    if a.nrows() != b.len() {
        return Err(Error::Shape(format!("nnls: {} rows against {} targets", a.nrows(), b.len())));
    }
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let solve = |passive: &[bool]| -> Result<DVector<f64>> {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
        let z = sub.svd(true, true).solve(b, 1e-14).map_err(|_| Error::Numeric { op: "nnls", residual: f64::NAN })?;
        let mut full = DVector::zeros(n);
        for (c, &j) in cols.iter().enumerate() {
            full[j] = z[c];
        }
        Ok(full)
    };
    for _ in 0..3 * n.max(1) {
        let w = a.transpose() * (b - a * &x);
        let Some(j) = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &k| w[i].total_cmp(&w[k])) else {
            break;
        };
        passive[j] = true;
        loop {
            let z = solve(&passive)?;
            let blocking: Vec<usize> = (0..n).filter(|&i| passive[i] && z[i] <= 0.0).collect();
            if blocking.is_empty() {
                x = z;
                break;
            }
            let alpha = blocking.iter().map(|&i| x[i] / (x[i] - z[i])).fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    Ok(x)
}
