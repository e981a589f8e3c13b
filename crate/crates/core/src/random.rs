//! Random test objects: Haar vectors and unitaries, states of bounded
//! Schmidt rank, random channels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, BipartiteDims, CMat, CVec, C64};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    let v = CVec::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Haar-distributed unitary via QR with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = ginibre(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random `rows × cols` matrix with orthonormal rows (`rows ≤ cols`).
pub fn coisometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    assert!(rows <= cols);
    unitary(rng, cols).rows(0, rows).into_owned()
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = ginibre(rng, n, n);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Random density matrix of rank at most `rank` (induced measure).
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let g = ginibre(rng, n, rank);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m);
    m / tr
}

/// Random unit vector of Schmidt rank exactly `r` (generically) built from
/// random local frames and random positive coefficients.
pub fn schmidt_rank_vector<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims, r: usize) -> CVec {
    let r = r.min(dims.min()).max(1);
    let left = ginibre(rng, dims.a, r);
    let right = ginibre(rng, dims.b, r);
    let v = linalg::vectorize(&(left * right.transpose()));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Random product vector `a ⊗ b`.
pub fn product_vector<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims) -> CVec {
    schmidt_rank_vector(rng, dims, 1)
}

/// Equal-coefficient Schmidt-rank-`r` vector `Σ_{i<r} |ii⟩ / √r`.
pub fn equal_coefficient_vector(dims: BipartiteDims, r: usize) -> CVec {
    let r = r.min(dims.min());
    let mut v = CVec::zeros(dims.total());
    let amp = C64::new(1.0 / (r as f64).sqrt(), 0.0);
    for i in 0..r {
        v[dims.index(i, i)] = amp;
    }
    v
}

/// Random Kraus list `d_out × d_in` with every operator of rank ≤ `rank`,
/// normalized to be trace preserving.
pub fn kraus_list<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, count: usize, rank: usize) -> Vec<CMat> {
    let rank = rank.max(1).min(d_in.min(d_out));
    // the Gram sum must be invertible for the normalization below
    let count = count.max(d_in.div_ceil(rank));
    let raw: Vec<CMat> = (0..count)
        .map(|_| ginibre(rng, d_out, rank) * ginibre(rng, rank, d_in))
        .collect();
    let mut s = CMat::zeros(d_in, d_in);
    for k in &raw {
        s += k.adjoint() * k;
    }
    // s^{-1/2}; multiplying on the right by an invertible matrix keeps each rank.
    let e = linalg::eigh(&s).expect("gram matrix is Hermitian");
    let inv_sqrt = e.map(|x| 1.0 / x.max(1e-300).sqrt());
    raw.into_iter().map(|k| k * &inv_sqrt).collect()
}
