use crate::linalg::{self, CMat, CVec, Eigh, C64};
use crate::par::{self, ExecMode};
use crate::states::{DensityMatrix, PureState, Tolerances};
use crate::Result;

use super::overlap::{Objective, OverlapOptions};

/// Largest tolerated weight `Tr(P_ker σ)` of `σ` outside the support of `ω`.
pub const SUPPORT_LEAK: f64 = 1e-12;

/// Largest `λ ≥ 0` with `ω − λσ ⪰ 0` (up to `tol.psd`); zero when `σ` is not
/// supported inside `ω`.
pub fn max_subtraction(omega: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    let e = omega.eigen()?;
    let kernel = e.kernel_projector(tol.support);
    if linalg::trace_product(&kernel, sigma.matrix()) > SUPPORT_LEAK {
        return Ok(0.0);
    }
    let pinv_sqrt = pinv_sqrt(e, tol.support);
    let s = &pinv_sqrt * sigma.matrix() * &pinv_sqrt;
    let top = linalg::max_eigenvalue(&s)?;
    if top <= 0.0 {
        return Ok(0.0);
    }
    certify_weight(omega.matrix(), sigma.matrix(), 1.0 / top, tol)
}

fn pinv_sqrt(e: &Eigh, support: f64) -> CMat {
    let cut = support * e.max();
    e.map(|x| if x > cut { 1.0 / x.sqrt() } else { 0.0 })
}

fn pinv(e: &Eigh, support: f64) -> CMat {
    let cut = support * e.max();
    e.map(|x| if x > cut { 1.0 / x } else { 0.0 })
}

/// Shrink `lambda` until `ω − λσ` passes the PSD tolerance.
fn certify_weight(omega: &CMat, sigma: &CMat, lambda: f64, tol: &Tolerances) -> Result<f64> {
    let ok = |l: f64| -> Result<bool> { Ok(linalg::min_eigenvalue(&(omega - sigma * C64::new(l, 0.0)))? >= -tol.psd) };
    if ok(lambda)? {
        return Ok(lambda);
    }
    let (mut lo, mut hi) = (0.0, lambda);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Best subtractable low-Schmidt-rank pure state found by a search.
#[derive(Debug, Clone)]
pub struct Subtraction {
    pub lambda: f64,
    pub state: Option<PureState>,
    /// Candidates inspected / candidates found inside the support.
    pub inspected: usize,
    pub supported: usize,
}

/// Search for the pure state `φ` of Schmidt rank ≤ `r` maximizing
/// [`max_subtraction`]`(ω, |φ⟩⟨φ|) = 1/⟨φ|ω⁺|φ⟩`.
///
/// For rank-deficient `ω` the overlap engine drives candidates into the
/// support by minimizing their weight on the kernel. For full-rank `ω` it
/// seeds a projected gradient descent of `⟨φ|ω⁻¹|φ⟩`.
pub fn best_subtraction(
    omega: &DensityMatrix,
    r: usize,
    restarts: usize,
    seed: u64,
    exec: ExecMode,
    tol: &Tolerances,
) -> Result<Subtraction> {
    let dims = omega.dims();
    let e = omega.eigen()?;
    let inv = pinv(e, tol.support);
    let deficient = e.support_rank(tol.support) < dims.total();
    let opts = OverlapOptions { restarts, seed, exec, oracle: false, ..Default::default() };
    let (kernel, vectors) = if deficient {
        let k = e.kernel_projector(tol.support);
        let cands = Objective::new(&k, r, dims, opts.shift)?.candidates(&opts, "subtract")?;
        (Some(k), cands.into_iter().map(|c| c.vector).collect::<Vec<_>>())
    } else {
        let obj = Objective::new(&inv, r, dims, opts.shift)?;
        let cands = obj.candidates(&opts, "subtract")?;
        let polished = par::map_indexed(exec, cands.len(), |i| polish(&obj, &inv, &cands[i].vector));
        (None, polished.into_iter().collect::<Result<Vec<_>>>()?)
    };

    let mut best = Subtraction { lambda: 0.0, state: None, inspected: vectors.len(), supported: 0 };
    for v in &vectors {
        if let Some(k) = &kernel {
            if linalg::expectation(k, v) > SUPPORT_LEAK {
                continue;
            }
        }
        best.supported += 1;
        let lambda = pure_weight(omega, &inv, v, tol)?;
        if lambda > best.lambda {
            best.lambda = lambda;
            best.state = Some(PureState::normalized(v.clone(), dims)?);
        }
    }
    Ok(best)
}

const POLISH_ITERS: usize = 200;

/// Projected gradient descent of `⟨φ|Q|φ⟩` over unit vectors of bounded
/// Schmidt rank, with step halving on failure.
fn polish(obj: &Objective, q: &CMat, start: &CVec) -> Result<CVec> {
    let mut phi = start.clone();
    let mut f = linalg::expectation(q, &phi);
    let mut step = 1.0 / linalg::max_eigenvalue(q)?.max(1e-300);
    for _ in 0..POLISH_ITERS {
        let qphi = q * &phi;
        let grad = &qphi - &phi * C64::new(f, 0.0);
        if grad.norm() < 1e-12 * f.max(1.0) {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            if let Some(next) = obj.retract(&(&phi - &grad * C64::new(step, 0.0)))? {
                let g = linalg::expectation(q, &next);
                if g < f {
                    improved = (f - g) > 1e-13 * f;
                    phi = next;
                    f = g;
                    step *= 1.5;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(phi)
}

fn pure_weight(omega: &DensityMatrix, inv: &CMat, phi: &CVec, tol: &Tolerances) -> Result<f64> {
    let q = linalg::expectation(inv, phi);
    if q <= 0.0 {
        return Ok(0.0);
    }
    certify_weight(omega.matrix(), &linalg::outer(phi), 1.0 / q, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, BipartiteDims};
    use crate::random;
    use crate::states::RankTolerance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subtracting_itself_gives_one() {
        let mut g = ChaCha8Rng::seed_from_u64(1);
        let dims = BipartiteDims::square(2).unwrap();
        let omega = DensityMatrix::new(random::density(&mut g, 4, 3), dims).unwrap();
        let l = max_subtraction(&omega, &omega, &Tolerances::default()).unwrap();
        assert!((l - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_state_outside_support_gives_zero() {
        let dims = BipartiteDims::square(2).unwrap();
        let omega = DensityMatrix::new(crate::linalg::real_diag(&[0.5, 0.5, 0.0, 0.0]), dims).unwrap();
        let mut v = CVec::zeros(4);
        v[3] = c(1.0, 0.0);
        let sigma = PureState::new(v, dims).unwrap().density();
        assert_eq!(max_subtraction(&omega, &sigma, &Tolerances::default()).unwrap(), 0.0);
    }

    #[test]
    fn bell_from_maximally_mixed_is_quarter() {
        // 4·(I/4 − λP) ⪰ 0 iff λ ≤ 1/4
        let dims = BipartiteDims::square(2).unwrap();
        let omega = DensityMatrix::maximally_mixed(dims);
        let sigma = PureState::maximally_entangled(2).unwrap().density();
        let l = max_subtraction(&omega, &sigma, &Tolerances::default()).unwrap();
        assert!((l - 0.25).abs() < 1e-12);
    }

    #[test]
    fn finds_generating_products_of_a_mixture() {
        let mut g = ChaCha8Rng::seed_from_u64(2);
        let dims = BipartiteDims::square(3).unwrap();
        let weights = [0.5, 0.3, 0.2];
        let mut m = CMat::zeros(9, 9);
        for w in weights {
            m += linalg::outer(&random::product_vector(&mut g, dims)) * c(w, 0.0);
        }
        let omega = DensityMatrix::new(m, dims).unwrap();
        let tol = Tolerances::default();
        let s = best_subtraction(&omega, 1, 32, 7, ExecMode::default(), &tol).unwrap();
        // the generating vectors are linearly independent, so each one can be
        // removed with exactly its mixing weight
        assert!((s.lambda - 0.5).abs() < 1e-6, "{}", s.lambda);
        assert_eq!(s.state.unwrap().schmidt_rank(RankTolerance::default()).unwrap(), 1);
    }

    #[test]
    fn entangled_pure_state_admits_no_product() {
        let omega = PureState::maximally_entangled(2).unwrap().density();
        let s = best_subtraction(&omega, 1, 16, 1, ExecMode::default(), &Tolerances::default()).unwrap();
        assert_eq!(s.lambda, 0.0);
        assert!(s.state.is_none());
    }
}
