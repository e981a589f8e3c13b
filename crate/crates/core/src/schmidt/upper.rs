//! Decomposition-based upper bounds.
//!
//! Every ensemble of `ω = Σ_j λ_j |e_j⟩⟨e_j|` has the form `w_i = V x_i` with
//! `V = [√λ_j e_j]` and `X = [x_i]` a co-isometry (`X X† = I`). Random `X`
//! remix the eigen-ensemble; a directed search moves `X` over the
//! co-isometries to shrink what each `V x_i` loses when truncated to the
//! target Schmidt rank.

use rand::Rng;
use serde::Serialize;

use crate::linalg::{self, BipartiteDims, CMat, CVec, C64};
use crate::par;
use crate::random;
use crate::seed;
use crate::states::{DensityMatrix, Ensemble, EnsembleMember, PureState, RankTolerance, Tolerances};
use crate::Result;

use super::overlap::{Objective, OverlapOptions};
use super::SearchOptions;

/// Members lighter than this are dropped from produced ensembles.
const MIN_WEIGHT: f64 = 1e-12;
/// Hint ensembles must reproduce the state this closely (trace distance).
pub const HINT_TOLERANCE: f64 = 1e-8;
const STEER_ITERS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperMethod {
    Eigen,
    Remix,
    Sampling,
    Interior,
    Steering,
    Hint,
}

#[derive(Debug, Clone)]
pub struct UpperOptions {
    pub search: SearchOptions,
    /// Candidate ensembles supplied by the caller (e.g. a generating ensemble).
    pub hints: Vec<Ensemble>,
    /// Stop searching once this rank is reached (a known lower bound).
    pub floor: usize,
}

impl Default for UpperOptions {
    fn default() -> Self {
        Self { search: SearchOptions::default(), hints: Vec::new(), floor: 1 }
    }
}

impl UpperOptions {
    pub fn new(search: SearchOptions) -> Self {
        Self { search, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct UpperBound {
    pub k: usize,
    pub ensemble: Ensemble,
    pub method: UpperMethod,
    /// Trial, restart or hint index that produced the ensemble.
    pub index: usize,
    pub reconstruction_error: f64,
}

/// Upper bound on the Schmidt number from the best ensemble found.
pub fn sn_upper_bound(omega: &DensityMatrix, opts: &UpperOptions) -> Result<UpperBound> {
    let tol = &opts.search.tol;
    let dims = omega.dims();
    let e = omega.eigen()?;
    let rank = e.support_rank(tol.support);
    let v = CMat::from_fn(dims.total(), rank, |i, j| e.vectors[(i, j)] * C64::new(e.values[j].max(0.0).sqrt(), 0.0));

    let eigen = omega.eigen_ensemble(tol.support)?;
    let mut best = UpperBound {
        k: eigen.max_schmidt_rank(tol.rank)?,
        reconstruction_error: eigen.reconstruction_error(omega)?,
        ensemble: eigen,
        method: UpperMethod::Eigen,
        index: 0,
    };

    for (i, hint) in opts.hints.iter().enumerate() {
        if best.k <= opts.floor {
            break;
        }
        if let Some(found) = check_hint(omega, hint, tol)? {
            if found.0 < best.k {
                best = UpperBound { k: found.0, reconstruction_error: found.1, ensemble: hint.clone(), method: UpperMethod::Hint, index: i };
            }
        }
    }

    if best.k > opts.floor && rank > 1 {
        remix(&v, dims, opts, &mut best, omega)?;
    }
    if best.k > opts.floor && rank == dims.total() && rank <= SAMPLE_MAX_RANK {
        interior(omega, e.min(), dims, opts, &mut best)?;
    }
    if best.k > opts.floor && rank > 1 && rank <= SAMPLE_MAX_RANK {
        let basis = e.vectors.columns(0, rank).into_owned();
        let kernel = (rank < dims.total()).then(|| e.kernel_projector(tol.support));
        sample(&v, &basis, kernel.as_ref(), dims, opts, &mut best, omega)?;
    }
    if best.k > opts.floor && rank > 1 {
        steer(&v, dims, opts, &mut best, omega)?;
    }
    Ok(best)
}

fn check_hint(omega: &DensityMatrix, hint: &Ensemble, tol: &Tolerances) -> Result<Option<(usize, f64)>> {
    if hint.dims() != Some(omega.dims()) || (hint.total_weight() - 1.0).abs() > 1e-10 {
        return Ok(None);
    }
    if hint.members.iter().any(|m| m.weight < 0.0) {
        return Ok(None);
    }
    let err = hint.reconstruction_error(omega)?;
    if err > HINT_TOLERANCE {
        log::debug!("rejecting hint ensemble: reconstruction error {err:.3e}");
        return Ok(None);
    }
    Ok(Some((hint.max_schmidt_rank(tol.rank)?, err)))
}

/// Ensemble `{V x_i}` from the columns of `X`.
fn ensemble_from(v: &CMat, x: &CMat, dims: BipartiteDims) -> Result<Ensemble> {
    columns_ensemble(&(v * x), dims)
}

fn columns_ensemble(w: &CMat, dims: BipartiteDims) -> Result<Ensemble> {
    let mut members = Vec::with_capacity(w.ncols());
    for i in 0..w.ncols() {
        let col: CVec = w.column(i).into_owned();
        let weight = col.norm_squared();
        if weight < MIN_WEIGHT {
            continue;
        }
        members.push(EnsembleMember { weight, state: PureState::normalized(col, dims)? });
    }
    Ok(Ensemble { members })
}

fn rank_of_columns(w: &CMat, dims: BipartiteDims, tol: RankTolerance) -> Result<usize> {
    let mut k = 0;
    for i in 0..w.ncols() {
        let col: CVec = w.column(i).into_owned();
        if col.norm_squared() < MIN_WEIGHT {
            continue;
        }
        let s = linalg::svd(&linalg::coefficient_matrix(&col, dims))?;
        k = k.max(tol.count(&s.singular));
    }
    Ok(k)
}

fn consider(best: &mut UpperBound, ensemble: Ensemble, omega: &DensityMatrix, method: UpperMethod, index: usize, tol: RankTolerance) -> Result<()> {
    let k = ensemble.max_schmidt_rank(tol)?;
    if k >= best.k {
        return Ok(());
    }
    let err = ensemble.reconstruction_error(omega)?;
    if err > HINT_TOLERANCE {
        log::debug!("discarding {method:?} ensemble {index}: reconstruction error {err:.3e}");
        return Ok(());
    }
    *best = UpperBound { k, ensemble, method, index, reconstruction_error: err };
    Ok(())
}

fn member_counts(rank: usize) -> [usize; 3] {
    [rank, rank + rank.div_ceil(2), 2 * rank]
}

/// Random co-isometries applied to the eigen-ensemble.
fn remix(v: &CMat, dims: BipartiteDims, opts: &UpperOptions, best: &mut UpperBound, omega: &DensityMatrix) -> Result<()> {
    let rank = v.ncols();
    let stream = seed::derive(opts.search.seed, "upper-remix");
    let sizes = member_counts(rank);
    let tol = opts.search.tol.rank;
    let results = par::map_indexed(opts.search.exec, opts.search.trials, |i| -> Result<(usize, CMat)> {
        let mut rng = seed::restart_rng(stream, i as u64);
        let m = sizes[rng.random_range(0..sizes.len())];
        let x = random::coisometry(&mut rng, rank, m);
        Ok((rank_of_columns(&(v * &x), dims, tol)?, x))
    });
    let mut winner: Option<(usize, usize, CMat)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let (k, x) = r?;
        if winner.as_ref().is_none_or(|w| k < w.0) {
            winner = Some((k, i, x));
        }
    }
    if let Some((k, i, x)) = winner {
        if k < best.k {
            consider(best, ensemble_from(v, &x, dims)?, omega, UpperMethod::Remix, i, tol)?;
        }
    }
    Ok(())
}

/// Columns of `W` truncated to Schmidt rank `r`, the squared truncation
/// error, and a bound on `‖W W† − T T†‖_1`.
fn truncate_columns(w: &CMat, dims: BipartiteDims, r: usize) -> Result<(CMat, f64, f64)> {
    let mut t = CMat::zeros(w.nrows(), w.ncols());
    let (mut energy, mut bound) = (0.0, 0.0);
    for i in 0..w.ncols() {
        let col: CVec = w.column(i).into_owned();
        let m = linalg::coefficient_matrix(&col, dims);
        let s = linalg::svd(&m)?;
        // project onto the leading left singular vectors and measure the
        // residual directly, so the bound does not rest on SVD accuracy
        let u = s.u.columns(0, r.min(s.u.ncols()));
        let kept = u * (u.adjoint() * &m);
        let tail = (&m - &kept).norm();
        energy += tail * tail;
        // w = t + e: ‖ww† − tt†‖_1 ≤ 2‖t‖‖e‖ + ‖e‖²
        bound += 2.0 * kept.norm() * tail + tail * tail;
        t.set_column(i, &linalg::vectorize(&kept));
    }
    Ok((t, energy, bound))
}

/// Preconditioned projected descent of `Σ_i ‖V x_i − trunc_r(V x_i)‖²`
/// over co-isometries `X`. On success returns the truncated members, whose
/// normalized mixture is within `accept` of `V V†` in trace distance.
fn steer_once(v: &CMat, precond: &CMat, x0: CMat, dims: BipartiteDims, target: usize, accept: f64) -> Result<Option<CMat>> {
    let omega = v * v.adjoint();
    let check = (accept * 1e3).max(EXACT_CHECK);
    let close = |t: &CMat, bound: f64| -> Result<bool> {
        if bound <= accept {
            return Ok(true);
        }
        if bound > check {
            return Ok(false);
        }
        // the bound is loose near roundoff; measure the normalized gap
        let tt = t * t.adjoint();
        let tr = linalg::trace(&tt).re;
        Ok(linalg::trace_distance(&(tt / C64::new(tr, 0.0)), &omega)? <= accept)
    };
    let mut x = x0;
    let (mut t, mut f, mut bound) = truncate_columns(&(v * &x), dims, target)?;
    let mut steps = [0.5f64, 0.5];
    let lipschitz = linalg::max_eigenvalue(&(v.adjoint() * v))?;
    let mut checkpoint = f;
    for it in 0..STEER_ITERS {
        if (bound <= accept || (bound <= check && it % 10 == 0)) && close(&t, bound)? {
            return Ok(Some(t));
        }
        let residual = v * &x - &t;
        // the preconditioned step is fast but not always a descent direction;
        // the plain gradient is
        let mut accepted = false;
        let dirs = [precond * &residual, v.adjoint() * &residual / C64::new(lipschitz, 0.0)];
        for (dir, step) in dirs.iter().zip(steps.iter_mut()) {
            *step = (*step * 2.0).min(1.0);
            while *step > 1e-6 {
                let cand = linalg::polar_unitary(&(&x - dir * C64::new(*step, 0.0)))?;
                let (ct, cf, cb) = truncate_columns(&(v * &cand), dims, target)?;
                if cf < f {
                    (x, t, f, bound) = (cand, ct, cf, cb);
                    accepted = true;
                    break;
                }
                *step *= 0.5;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            break;
        }
        if (it + 1) % 50 == 0 {
            if f > STALL_RATIO * checkpoint {
                break;
            }
            checkpoint = f;
        }
    }
    Ok(close(&t, bound)?.then_some(t))
}

/// Accepted trace distance between the steered mixture and the state.
const STEER_ACCEPT: f64 = 1e-9;
/// Below this bound the exact gap is measured instead.
const EXACT_CHECK: f64 = 1e-6;
const STALL_RATIO: f64 = 0.9;

/// Left inverse of a full-column-rank matrix.
fn pinv_columns(v: &CMat) -> Result<CMat> {
    let gram = v.adjoint() * v;
    gram.try_inverse()
        .map(|g| g * v.adjoint())
        .ok_or(crate::Error::Numeric { op: "pseudo-inverse", residual: f64::NAN })
}

/// Largest support rank the sampling stage takes on.
const SAMPLE_MAX_RANK: usize = 16;
/// Kernel overlap below which a sampled vector counts as lying in the range.
const SAMPLE_LEAK: f64 = 1e-12;

/// Sample vectors of the target rank from the range of `ω` (kernel-overlap
/// minimizers, or random vectors when `ω` has full rank), fit non-negative
/// weights to `ω`, and finish the fit by steering from it.
fn sample(
    v: &CMat,
    basis: &CMat,
    kernel: Option<&CMat>,
    dims: BipartiteDims,
    opts: &UpperOptions,
    best: &mut UpperBound,
    omega: &DensityMatrix,
) -> Result<()> {
    let fit = Fit::new(v, basis, dims, opts)?;
    for target in opts.floor.max(1)..best.k {
        let stream = seed::derive(opts.search.seed, &format!("upper-sample-{target}"));
        if let Some(t) = fit.run(kernel, target, stream, STEER_ACCEPT)? {
            consider(best, normalized_columns(&t, dims)?, omega, UpperMethod::Sampling, 0, opts.search.tol.rank)?;
            if best.k <= target {
                break;
            }
        }
    }
    Ok(())
}

/// Sampled candidates, non-negative weights and steering, for `V V†`.
struct Fit<'a> {
    v: &'a CMat,
    basis: &'a CMat,
    precond: CMat,
    goal: nalgebra::DVector<f64>,
    dims: BipartiteDims,
    count: usize,
    exec: crate::par::ExecMode,
}

impl<'a> Fit<'a> {
    fn new(v: &'a CMat, basis: &'a CMat, dims: BipartiteDims, opts: &UpperOptions) -> Result<Self> {
        Ok(Self {
            v,
            basis,
            precond: pinv_columns(v)?,
            goal: linalg::hermitian_coordinates(&(basis.adjoint() * v * v.adjoint() * basis)),
            dims,
            count: (opts.search.trials / 5).clamp(40, 400),
            exec: opts.search.exec,
        })
    }

    fn run(&self, kernel: Option<&CMat>, target: usize, stream: u64, accept: f64) -> Result<Option<CMat>> {
        let dims = self.dims;
        let vectors: Vec<CVec> = match kernel {
            Some(p) => {
                let obj = Objective::new(p, target, dims, OverlapOptions::default().shift)?;
                let oo = OverlapOptions { restarts: self.count, seed: stream, exec: self.exec, ..OverlapOptions::default() };
                obj.candidates(&oo, "sample")?.into_iter().filter(|c| c.value <= SAMPLE_LEAK).map(|c| c.vector).collect()
            }
            None => (0..self.count)
                .map(|i| random::schmidt_rank_vector(&mut seed::restart_rng(stream, i as u64), dims, target))
                .collect(),
        };
        if vectors.is_empty() {
            return Ok(None);
        }
        let mut a = nalgebra::DMatrix::<f64>::zeros(self.goal.len(), vectors.len());
        for (j, phi) in vectors.iter().enumerate() {
            a.set_column(j, &linalg::hermitian_coordinates(&linalg::outer(&(self.basis.adjoint() * phi))));
        }
        let weights = linalg::nnls(&a, &self.goal)?;
        let kept: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > MIN_WEIGHT).collect();
        let mut w = CMat::zeros(dims.total(), kept.len().max(self.v.ncols()));
        for (col, &j) in kept.iter().enumerate() {
            w.set_column(col, &(&vectors[j] * C64::new(weights[j].sqrt(), 0.0)));
        }
        let x0 = linalg::polar_unitary(&(&self.precond * &w))?;
        steer_once(self.v, &self.precond, x0, dims, target, accept)
    }
}

/// Shares of `I/n` the interior stage splits off, relative to `n λ_min`.
const INTERIOR_SHARES: [f64; 4] = [0.25, 0.5, 0.1, 0.03];

/// Full-rank states: split `ω = (1 − s) σ + s I/n`, fit `σ` loosely at the
/// target rank, and give the misfit to the identity share, which keeps an
/// explicit product decomposition while the misfit is small.
fn interior(omega: &DensityMatrix, lambda_min: f64, dims: BipartiteDims, opts: &UpperOptions, best: &mut UpperBound) -> Result<()> {
    let n = dims.total();
    if !(lambda_min > 0.0) {
        return Ok(());
    }
    let basis = linalg::identity(n);
    for target in opts.floor.max(1)..best.k {
        for (j, share) in INTERIOR_SHARES.iter().enumerate() {
            let s = share * n as f64 * lambda_min;
            let sigma = (omega.matrix() - linalg::identity(n) * C64::new(s / n as f64, 0.0)) / C64::new(1.0 - s, 0.0);
            let e = linalg::eigh(&sigma)?;
            let vs = CMat::from_fn(n, n, |i, k| e.vectors[(i, k)] * C64::new(e.values[k].max(0.0).sqrt(), 0.0));
            let stream = seed::derive(opts.search.seed, &format!("upper-interior-{target}-{j}"));
            let Some(t) = Fit::new(&vs, &basis, dims, opts)?.run(None, target, stream, s / (2 * n * n) as f64)? else {
                continue;
            };
            let mut ensemble = normalized_columns(&t, dims)?;
            for m in &mut ensemble.members {
                m.weight *= 1.0 - s;
            }
            let rest = omega.matrix() - ensemble.reconstruct().unwrap_or_else(|| CMat::zeros(n, n));
            if let Some(products) = product_decomposition(&rest, dims)? {
                ensemble.members.extend(products.members);
                consider(best, ensemble, omega, UpperMethod::Interior, j, opts.search.tol.rank)?;
                if best.k <= target {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Orthonormal Hermitian basis of `d × d` matrices.
fn hermitian_basis(d: usize) -> Vec<CMat> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in i..d {
            let mut m = CMat::zeros(d, d);
            if i == j {
                m[(i, i)] = C64::new(1.0, 0.0);
                out.push(m);
                continue;
            }
            m[(i, j)] = C64::new(r, 0.0);
            m[(j, i)] = C64::new(r, 0.0);
            out.push(m.clone());
            m[(i, j)] = C64::new(0.0, -r);
            m[(j, i)] = C64::new(0.0, r);
            out.push(m);
        }
    }
    out
}

/// Product ensemble of `h = α I + Σ c_ab G_a ⊗ G_b` when `α` covers
/// `Σ |c_ab| ‖G_a‖ ‖G_b‖`: each term takes that much identity and splits
/// over the eigenbases of `G_a` and `G_b` with non-negative weights.
pub(crate) fn product_decomposition(h: &CMat, dims: BipartiteDims) -> Result<Option<Ensemble>> {
    let n = dims.total();
    let alpha = linalg::trace(h).re / n as f64;
    let spread = h - linalg::identity(n) * C64::new(alpha, 0.0);
    let side = |d: usize| -> Result<Vec<(CMat, linalg::Eigh)>> {
        hermitian_basis(d)
            .into_iter()
            .map(|g| {
                let e = linalg::eigh(&g)?;
                Ok((g, e))
            })
            .collect()
    };
    let (ga, gb) = (side(dims.a)?, side(dims.b)?);
    let mut terms = Vec::new();
    let mut used = 0.0;
    for (a, ea) in &ga {
        for (b, eb) in &gb {
            let c = linalg::trace_product(&spread, &linalg::kron(a, b)?);
            if c.abs() <= 1e-15 {
                continue;
            }
            let share = c.abs() * ea.values.iter().fold(0.0f64, |m, x| m.max(x.abs())) * eb.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            used += share;
            terms.push((c, share, ea, eb));
        }
    }
    if used > alpha {
        return Ok(None);
    }
    let mut members = Vec::new();
    let mut push = |w: f64, va: CVec, vb: CVec| -> Result<()> {
        if w > MIN_WEIGHT {
            let v = linalg::kron(&CMat::from_column_slice(va.len(), 1, va.as_slice()), &CMat::from_column_slice(vb.len(), 1, vb.as_slice()))?;
            members.push(EnsembleMember { weight: w, state: PureState::normalized(v.column(0).into_owned(), dims)? });
        }
        Ok(())
    };
    for (c, share, ea, eb) in terms {
        for i in 0..dims.a {
            for j in 0..dims.b {
                push(share + c * ea.values[i] * eb.values[j], ea.vector(i), eb.vector(j))?;
            }
        }
    }
    for i in 0..dims.a {
        for j in 0..dims.b {
            let mut va = CVec::zeros(dims.a);
            va[i] = C64::new(1.0, 0.0);
            let mut vb = CVec::zeros(dims.b);
            vb[j] = C64::new(1.0, 0.0);
            push(alpha - used, va, vb)?;
        }
    }
    Ok(Some(Ensemble { members }))
}

/// Ensemble of the columns of `t`, weights rescaled to sum to one.
fn normalized_columns(t: &CMat, dims: BipartiteDims) -> Result<Ensemble> {
    let mut ensemble = columns_ensemble(t, dims)?;
    let total = ensemble.total_weight();
    for m in &mut ensemble.members {
        m.weight /= total;
    }
    Ok(ensemble)
}

fn steer(v: &CMat, dims: BipartiteDims, opts: &UpperOptions, best: &mut UpperBound, omega: &DensityMatrix) -> Result<()> {
    let rank = v.ncols();
    let restarts = (opts.search.trials / 50).max(4);
    let sizes = member_counts(rank);
    let tol = opts.search.tol.rank;
    let precond = pinv_columns(v)?;
    // lowest target first: the first success is the best this search offers
    for target in opts.floor.max(1)..best.k {
        let stream = seed::derive(opts.search.seed, &format!("upper-steer-{target}"));
        let found = par::map_indexed(opts.search.exec, restarts, |i| -> Result<Option<CMat>> {
            let mut rng = seed::restart_rng(stream, i as u64);
            let x0 = random::coisometry(&mut rng, rank, sizes[i % sizes.len()]);
            steer_once(v, &precond, x0, dims, target, STEER_ACCEPT)
        });
        let mut hit = None;
        for (i, r) in found.into_iter().enumerate() {
            if let Some(t) = r? {
                hit = Some((i, t));
                break;
            }
        }
        if let Some((i, t)) = hit {
            consider(best, normalized_columns(&t, dims)?, omega, UpperMethod::Steering, i, tol)?;
            if best.k <= target {
                break;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mixture(g: &mut ChaCha8Rng, dims: BipartiteDims, weights: &[f64], r: usize) -> (DensityMatrix, Ensemble) {
        let mut m = CMat::zeros(dims.total(), dims.total());
        let mut members = Vec::new();
        for &w in weights {
            let v = random::schmidt_rank_vector(g, dims, r);
            m += linalg::outer(&v) * c(w, 0.0);
            members.push(EnsembleMember { weight: w, state: PureState::new(v, dims).unwrap() });
        }
        (DensityMatrix::new(m, dims).unwrap(), Ensemble { members })
    }

    #[test]
    fn pure_state_gives_its_rank() {
        let psi = PureState::maximally_entangled(3).unwrap();
        let u = sn_upper_bound(&psi.density(), &UpperOptions::default()).unwrap();
        assert_eq!(u.k, 3);
        assert_eq!(u.ensemble.len(), 1);
    }

    #[test]
    fn maximally_mixed_two_qubits_is_separable() {
        let dims = BipartiteDims::square(2).unwrap();
        let u = sn_upper_bound(&DensityMatrix::maximally_mixed(dims), &UpperOptions::default()).unwrap();
        assert_eq!(u.k, 1);
        assert!(u.reconstruction_error < 1e-8);
    }

    #[test]
    fn finds_product_decomposition_without_hint() {
        let mut g = ChaCha8Rng::seed_from_u64(5);
        let dims = BipartiteDims::square(3).unwrap();
        let (omega, _) = mixture(&mut g, dims, &[0.5, 0.3, 0.2], 1);
        let u = sn_upper_bound(&omega, &UpperOptions::default()).unwrap();
        assert_eq!(u.k, 1, "{:?}", u.method);
        assert!(u.reconstruction_error < 1e-8);
        assert!((u.ensemble.total_weight() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn accepts_valid_hint_and_rejects_wrong_one() {
        let mut g = ChaCha8Rng::seed_from_u64(6);
        let dims = BipartiteDims::new(3, 4).unwrap();
        let (omega, hint) = mixture(&mut g, dims, &[0.25; 4], 2);
        let (_, wrong) = mixture(&mut g, dims, &[0.5, 0.5], 1);
        let mut opts = UpperOptions::new(SearchOptions { trials: 0, ..Default::default() });
        opts.hints = vec![wrong, hint];
        let u = sn_upper_bound(&omega, &opts).unwrap();
        assert!(u.k <= 2);
        assert_eq!(u.method, UpperMethod::Hint);
        assert_eq!(u.index, 1);
    }

    #[test]
    fn near_identity_splits_into_products() {
        let mut g = ChaCha8Rng::seed_from_u64(8);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let h = linalg::identity(6) * c(1.0 / 6.0, 0.0) + random::hermitian(&mut g, 6) * c(1e-3, 0.0);
        let products = product_decomposition(&h, dims).unwrap().expect("close to the identity");
        assert!((products.reconstruct().unwrap() - &h).norm() < 1e-12);
        assert_eq!(products.max_schmidt_rank(RankTolerance::default()).unwrap(), 1);
        let bell = PureState::maximally_entangled(2).unwrap().density();
        assert!(product_decomposition(bell.matrix(), bell.dims()).unwrap().is_none());
    }

    #[test]
    fn separable_isotropic_qubits_use_the_interior_split() {
        let omega = crate::constructions::isotropic_state(2, 0.4).unwrap();
        let u = sn_upper_bound(&omega, &UpperOptions::default()).unwrap();
        assert_eq!(u.k, 1, "{:?}", u.method);
        assert!(u.reconstruction_error < 1e-10);
    }

    #[test]
    fn mixture_of_rank_two_states() {
        let mut g = ChaCha8Rng::seed_from_u64(7);
        let dims = BipartiteDims::square(3).unwrap();
        let (omega, _) = mixture(&mut g, dims, &[0.4, 0.35, 0.25], 2);
        let u = sn_upper_bound(&omega, &UpperOptions { floor: 2, ..Default::default() }).unwrap();
        assert_eq!(u.k, 2);
    }
}
