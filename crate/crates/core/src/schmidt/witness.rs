use serde::Serialize;

use crate::linalg::{self, BipartiteDims, CMat, Side, C64};
use crate::par;
use crate::random;
use crate::seed;
use crate::states::{DensityMatrix, Tolerances};
use crate::{Error, Result};

use super::lambda::{apply_lambda, LambdaEvidence};
use super::overlap::{min_overlap_sr_with, OverlapOptions};

/// Witnesses whose `ε` falls to this level are rejected.
pub const EPSILON_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    /// `W = P − (ε/c) C` with `P` the kernel projector of the target.
    Kernel {
        epsilon: f64,
        c: f64,
        engine_epsilon: f64,
        oracle_epsilon: Option<f64>,
        restart: usize,
    },
    /// `W = (Λ_t ⊗ Id)(|v⟩⟨v|)` for a violating eigenvector `v`.
    LambdaMap { t: f64 },
}

/// Hermitian `W` with `Tr(Wσ) ≥ 0` on every state of Schmidt number below
/// `order`; `margin = Tr(Wδ) < 0` on its target.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessOperator {
    #[serde(skip)]
    pub matrix: CMat,
    pub dims: BipartiteDims,
    pub order: usize,
    pub recipe: Recipe,
    pub margin: f64,
    pub seed: u64,
}

impl WitnessOperator {
    pub fn evaluate(&self, rho: &CMat) -> f64 {
        linalg::trace_product(&self.matrix, rho)
    }

    /// Smallest `⟨φ|W|φ⟩` over `samples` random pure states of Schmidt rank
    /// `order − 1`.
    pub fn min_on_random_states(&self, samples: usize, seed: u64) -> f64 {
        let stream = seed::derive(seed, "witness-check");
        let r = self.order - 1;
        let values = par::map_indexed(Default::default(), samples, |i| {
            let mut rng = seed::restart_rng(stream, i as u64);
            let v = random::schmidt_rank_vector(&mut rng, self.dims, r);
            linalg::expectation(&self.matrix, &v)
        });
        values.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// `W = P − (ε/c) C` detecting `δ` with Schmidt order `k`.
///
/// `P` projects onto the kernel of `δ`, `ε = min ⟨φ|P|φ⟩` over `φ` of
/// Schmidt rank `≤ k − 1`, and `c = ‖C‖`.
pub fn build_witness(
    delta: &DensityMatrix,
    k: usize,
    c_op: &CMat,
    opts: &OverlapOptions,
    tol: &Tolerances,
) -> Result<WitnessOperator> {
    let dims = delta.dims();
    if k < 2 || k > dims.min() {
        return Err(Error::Validation(format!("witness order {k} outside 2..={}", dims.min())));
    }
    let n = dims.total();
    if c_op.nrows() != n || c_op.ncols() != n {
        return Err(Error::Shape(format!("C must be {n}x{n}, got {}x{}", c_op.nrows(), c_op.ncols())));
    }
    let c_op = linalg::hermitian_part(c_op)?;
    let ce = linalg::eigh(&c_op)?;
    if ce.min() < -tol.psd * ce.max().abs().max(1.0) {
        return Err(Error::Validation(format!("C is not positive semidefinite: eigenvalue {:.3e}", ce.min())));
    }
    let overlap = linalg::trace_product(&c_op, delta.matrix());
    if overlap <= tol.margin {
        return Err(Error::Validation(format!("Tr(C δ) = {overlap:.3e} is not positive")));
    }
    let e = delta.eigen()?;
    if e.support_rank(tol.support) == n {
        return Err(Error::Validation("state has full rank: its kernel is empty".into()));
    }
    let p = e.kernel_projector(tol.support);
    let found = min_overlap_sr_with(&p, k - 1, dims, opts)?;
    if found.epsilon <= EPSILON_FLOOR {
        return Err(Error::WitnessDegenerate { epsilon: found.epsilon });
    }
    let c = ce.max();
    let matrix = &p - &c_op * C64::new(found.epsilon / c, 0.0);
    let margin = linalg::trace_product(&matrix, delta.matrix());
    Ok(WitnessOperator {
        matrix,
        dims,
        order: k,
        recipe: Recipe::Kernel {
            epsilon: found.epsilon,
            c,
            engine_epsilon: found.engine_value,
            oracle_epsilon: found.oracle_value,
            restart: found.engine_restart,
        },
        margin,
        seed: opts.seed,
    })
}

/// Witness of order `k + 1` read off a Λ-map violation: since `Λ_t` is
/// self-adjoint, `Tr(Wω) = ⟨v|(Λ_t ⊗ Id)(ω)|v⟩`.
pub fn witness_from_lambda(omega: &DensityMatrix, evidence: &LambdaEvidence) -> Result<WitnessOperator> {
    let dims = omega.dims();
    let matrix = apply_lambda(&linalg::outer(&evidence.eigenvector), dims, evidence.t, Side::A)?;
    let margin = linalg::trace_product(&matrix, omega.matrix());
    Ok(WitnessOperator { matrix, dims, order: evidence.k + 1, recipe: Recipe::LambdaMap { t: evidence.t }, margin, seed: 0 })
}
