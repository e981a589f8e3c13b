//! Greedy edge decomposition `ω = (1 − p) ω_{k−1} + p δ`.
//!
//! Pure states of Schmidt rank `≤ k − 1` are peeled off the remainder, each
//! with half of its largest admissible weight, until none can be removed.
//! The reported `p` is an upper bound on the minimal one.

use crate::linalg::{CMat, C64};
use crate::seed;
use crate::states::{DensityMatrix, Ensemble, EnsembleMember};
use crate::{Error, Result};

use super::certificate::{certify, CertifyOptions};
use super::subtract::best_subtraction;
use super::SearchOptions;

pub const DAMPING: f64 = 0.5;
/// Normalized weights below this end the peeling.
pub const STOP_WEIGHT: f64 = 1e-6;
/// A remainder lighter than this is folded into `ω_{k−1}`.
pub const FOLD_MASS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EdgeDecomposition {
    pub p: f64,
    /// `ω_{k−1}`, absent when `p == 1`.
    pub low: Option<DensityMatrix>,
    /// Ensemble realising `(1 − p) ω_{k−1}` before normalization.
    pub peeled: Ensemble,
    /// Edge remainder `δ`, absent when `p == 0`.
    pub delta: Option<DensityMatrix>,
    pub steps: usize,
    /// True when the step budget ran out before the stopping rule fired.
    pub budget_exhausted: bool,
}

impl EdgeDecomposition {
    /// `(1 − p) ω_{k−1} + p δ`.
    pub fn reconstruct(&self) -> CMat {
        let n = self.low.as_ref().or(self.delta.as_ref()).map_or(0, |d| d.dims().total());
        let mut m = CMat::zeros(n, n);
        if let Some(low) = &self.low {
            m += low.matrix() * C64::new(1.0 - self.p, 0.0);
        }
        if let Some(delta) = &self.delta {
            m += delta.matrix() * C64::new(self.p, 0.0);
        }
        m
    }
}

fn restarts_per_step(trials: usize) -> usize {
    (trials / 20).clamp(16, 128)
}

fn max_steps(trials: usize) -> usize {
    (trials / 2).clamp(50, 1000)
}

/// Edge decomposition with a certification shortcut: a state whose upper
/// bound is already `≤ k − 1` returns `p = 0` without peeling.
pub fn edge_decompose(omega: &DensityMatrix, k: usize, search: &SearchOptions) -> Result<EdgeDecomposition> {
    check_order(omega, k)?;
    let cert = certify(omega, &CertifyOptions::new(*search))?;
    if cert.upper < k {
        return Ok(EdgeDecomposition {
            p: 0.0,
            low: Some(omega.clone()),
            peeled: cert.upper_evidence,
            delta: None,
            steps: 0,
            budget_exhausted: false,
        });
    }
    greedy_subtraction(omega, k, search)
}

fn check_order(omega: &DensityMatrix, k: usize) -> Result<()> {
    if k < 2 || k > omega.dims().min() {
        return Err(Error::Validation(format!("edge order {k} outside 2..={}", omega.dims().min())));
    }
    Ok(())
}

/// The peeling loop alone.
pub fn greedy_subtraction(omega: &DensityMatrix, k: usize, search: &SearchOptions) -> Result<EdgeDecomposition> {
    check_order(omega, k)?;
    let dims = omega.dims();
    let tol = &search.tol;
    let restarts = restarts_per_step(search.trials);
    let budget = max_steps(search.trials);
    let mut remainder = omega.matrix().clone();
    let mut mass = 1.0;
    let mut peeled = Vec::new();
    let mut steps = 0;
    let mut exhausted = true;
    while steps < budget {
        let current = DensityMatrix::trusted(&remainder / C64::new(mass, 0.0), dims);
        let step_seed = seed::derive(search.seed, &format!("edge-{steps}"));
        let found = best_subtraction(&current, k - 1, restarts, step_seed, search.exec, tol)?;
        steps += 1;
        let Some(state) = found.state.filter(|_| found.lambda >= STOP_WEIGHT) else {
            exhausted = false;
            break;
        };
        let weight = DAMPING * found.lambda * mass;
        remainder -= state.projector() * C64::new(weight, 0.0);
        mass -= weight;
        peeled.push(EnsembleMember { weight, state });
        if mass < FOLD_MASS {
            exhausted = false;
            break;
        }
    }
    let peeled = Ensemble { members: peeled };
    let peeled_mass = 1.0 - mass;

    if mass < FOLD_MASS {
        // fold the negligible remainder into the low-rank part
        return Ok(EdgeDecomposition {
            p: 0.0,
            low: Some(omega.clone()),
            peeled,
            delta: None,
            steps,
            budget_exhausted: false,
        });
    }
    let delta = DensityMatrix::from_unnormalized(remainder, dims)?;
    let low = match peeled.reconstruct() {
        Some(m) if peeled_mass > 0.0 => Some(DensityMatrix::from_unnormalized(m, dims)?),
        _ => None,
    };
    let p = if low.is_some() { mass } else { 1.0 };
    Ok(EdgeDecomposition { p, low, peeled, delta: Some(delta), steps, budget_exhausted: exhausted })
}
