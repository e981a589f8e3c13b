use serde::Serialize;

use crate::linalg::{self, BipartiteDims, CMat, CVec, Side, C64};
use crate::states::{DensityMatrix, Tolerances};
use crate::{Error, Result};

/// `Λ_t(ρ) = Tr(ρ) I − t ρ`.
pub fn lambda_map(rho: &CMat, t: f64) -> Result<CMat> {
    if !rho.is_square() {
        return Err(Error::Shape(format!("Λ_t needs a square matrix, got {}x{}", rho.nrows(), rho.ncols())));
    }
    let n = rho.nrows();
    Ok(linalg::identity(n) * linalg::trace(rho) - rho * C64::new(t, 0.0))
}

/// Apply `Λ_t` to the factor `side` of an operator on `dims`, leaving the
/// other factor alone: `Side::A` gives `(Λ_t ⊗ Id)(m)`, `Side::B` gives
/// `(Id ⊗ Λ_t)(m)`.
pub fn apply_lambda(m: &CMat, dims: BipartiteDims, t: f64, side: Side) -> Result<CMat> {
    let n = dims.total();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Shape(format!("operator must be {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    let mut out = CMat::zeros(n, n);
    match side {
        Side::B => {
            for i in 0..dims.a {
                for j in 0..dims.a {
                    let block = m.view((i * dims.b, j * dims.b), (dims.b, dims.b)).into_owned();
                    out.view_mut((i * dims.b, j * dims.b), (dims.b, dims.b)).copy_from(&lambda_map(&block, t)?);
                }
            }
        }
        Side::A => {
            for k in 0..dims.b {
                for l in 0..dims.b {
                    let block = CMat::from_fn(dims.a, dims.a, |x, y| m[(dims.index(x, k), dims.index(y, l))]);
                    let mapped = lambda_map(&block, t)?;
                    for x in 0..dims.a {
                        for y in 0..dims.a {
                            out[(dims.index(x, k), dims.index(y, l))] = mapped[(x, y)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A negative eigenvalue of `(Λ_t ⊗ Id)(ω)` with its eigenvector.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaEvidence {
    /// The largest Schmidt number excluded, `k = 1/t`.
    pub k: usize,
    pub t: f64,
    pub eigenvalue: f64,
    #[serde(skip)]
    pub eigenvector: CVec,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBound {
    pub k: usize,
    pub evidence: Option<LambdaEvidence>,
}

/// Largest `k + 1` such that `(Λ_{1/k} ⊗ Id)(ω)` has an eigenvalue below
/// `−margin`, scanning `k = 1 … min(dimA, dimB) − 1`; 1 without a violation.
///
/// The map acts on the first factor. For a Choi state stored as
/// (output, input) that is the output side, so the bound does not depend on
/// which full-rank reference state built the Choi matrix.
pub fn sn_lower_bound(omega: &DensityMatrix, tol: &Tolerances) -> Result<LowerBound> {
    let dims = omega.dims();
    let mut best = LowerBound { k: 1, evidence: None };
    for k in 1..dims.min() {
        let t = 1.0 / k as f64;
        let mapped = apply_lambda(omega.matrix(), dims, t, Side::A)?;
        let e = linalg::eigh(&mapped)?;
        let min = e.min();
        if min < -tol.margin {
            let idx = e.values.len() - 1;
            best = LowerBound {
                k: k + 1,
                evidence: Some(LambdaEvidence { k, t, eigenvalue: min, eigenvector: e.vector(idx) }),
            };
        }
    }
    Ok(best)
}
