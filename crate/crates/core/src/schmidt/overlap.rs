//! Minimization of `⟨φ|P|φ⟩` over unit vectors of Schmidt rank at most `r`.
//!
//! The search engine alternates a shift-and-invert step `(P + σI)⁻¹φ` with
//! truncation back to Schmidt rank `r`, from many random starts. At small
//! dimension an independent oracle grids the first-factor subspace
//! (`Gr(r, d)`), reduces the inner problem to a smallest eigenvalue, and
//! polishes the best grid points by pattern search.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::linalg::{self, BipartiteDims, CMat, CVec, C64};
use crate::par::{self, ExecMode};
use crate::random;
use crate::seed;
use crate::states::PureState;
use crate::{Error, Result};

/// Largest total dimension at which the grid oracle runs.
pub const ORACLE_MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub shift: f64,
    pub seed: u64,
    pub exec: ExecMode,
    /// Run the grid oracle when the problem is small enough.
    pub oracle: bool,
}

impl Default for OverlapOptions {
    fn default() -> Self {
        Self { restarts: 64, max_iter: 1000, shift: 1e-3, seed: 0, exec: ExecMode::default(), oracle: true }
    }
}

#[derive(Debug, Clone)]
pub struct OverlapResult {
    /// `min(engine, oracle)`.
    pub epsilon: f64,
    pub state: PureState,
    pub engine_value: f64,
    /// Restart index that produced the engine minimum.
    pub engine_restart: usize,
    pub oracle_value: Option<f64>,
}

/// One converged restart.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub value: f64,
    pub vector: CVec,
    pub restart: usize,
}

/// Precomputed pieces of the objective `⟨φ|P|φ⟩`.
pub(crate) struct Objective {
    dims: BipartiteDims,
    rank: usize,
    sqrt: CMat,
    resolvent: CMat,
    pub(crate) min_eigen: (f64, CVec),
}

impl Objective {
    pub fn new(p: &CMat, rank: usize, dims: BipartiteDims, shift: f64) -> Result<Self> {
        let n = dims.total();
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::Shape(format!("operator must be {n}x{n}, got {}x{}", p.nrows(), p.ncols())));
        }
        if rank == 0 || rank > dims.min() {
            return Err(Error::Validation(format!("Schmidt rank {rank} outside 1..={}", dims.min())));
        }
        let e = linalg::eigh(p)?;
        let scale = e.max().abs().max(1.0);
        if e.min() < -1e-9 * scale {
            return Err(Error::Validation(format!("operator is not positive semidefinite: eigenvalue {:.3e}", e.min())));
        }
        let sqrt = e.map(|x| x.max(0.0).sqrt());
        let resolvent = e.map(|x| 1.0 / (x.max(0.0) + shift * scale));
        let last = e.values.len() - 1;
        Ok(Self { dims, rank, sqrt, resolvent, min_eigen: (e.min().max(0.0), e.vector(last)) })
    }

    pub fn value(&self, v: &CVec) -> f64 {
        (&self.sqrt * v).norm_squared()
    }

    /// Nearest unit vector of the objective's Schmidt rank.
    pub fn retract(&self, v: &CVec) -> Result<Option<CVec>> {
        self.truncate(v)
    }

    fn truncate(&self, v: &CVec) -> Result<Option<CVec>> {
        let t = linalg::truncate_schmidt_rank(v, self.dims, self.rank)?;
        let n = t.norm();
        Ok((n > 1e-300).then(|| t / C64::new(n, 0.0)))
    }

    /// Alternating shift-invert / truncation from `start`; returns the best
    /// point visited.
    pub fn descend(&self, start: CVec, max_iter: usize) -> Result<(f64, CVec)> {
        let Some(mut phi) = self.truncate(&start)? else {
            return Err(Error::Validation("zero starting vector".into()));
        };
        let mut best = (self.value(&phi), phi.clone());
        let mut stall = 0;
        for _ in 0..max_iter {
            let Some(next) = self.truncate(&(&self.resolvent * &phi))? else { break };
            let v = self.value(&next);
            if v < best.0 * (1.0 - 1e-9) {
                best = (v, next.clone());
                stall = 0;
            } else {
                stall += 1;
            }
            phi = next;
            if best.0 <= 1e-28 || stall >= 25 {
                break;
            }
        }
        Ok(best)
    }

    pub fn candidates(&self, opts: &OverlapOptions, tag: &str) -> Result<Vec<Candidate>> {
        let stream = seed::derive(opts.seed, tag);
        let dims = self.dims;
        let rank = self.rank;
        let runs = par::map_indexed(opts.exec, opts.restarts.max(1), |i| {
            let mut rng = seed::restart_rng(stream, i as u64);
            let start = random::schmidt_rank_vector(&mut rng, dims, rank);
            self.descend(start, opts.max_iter).map(|(value, vector)| Candidate { value, vector, restart: i })
        });
        runs.into_iter().collect()
    }
}

fn best_of(cands: &[Candidate]) -> Option<&Candidate> {
    // lowest value, then lowest restart index
    cands.iter().fold(None, |acc: Option<&Candidate>, c| match acc {
        Some(b) if b.value <= c.value => Some(b),
        _ => Some(c),
    })
}

/// `min ⟨φ|P|φ⟩` over unit `φ` with Schmidt rank ≤ `r`, default options.
pub fn min_overlap_sr(p: &CMat, r: usize, dims: BipartiteDims) -> Result<OverlapResult> {
    min_overlap_sr_with(p, r, dims, &OverlapOptions::default())
}

pub fn min_overlap_sr_with(p: &CMat, r: usize, dims: BipartiteDims, opts: &OverlapOptions) -> Result<OverlapResult> {
    let obj = Objective::new(p, r, dims, opts.shift)?;
    if r == dims.min() {
        // no constraint: the bottom eigenvector is optimal
        let (value, v) = obj.min_eigen.clone();
        return Ok(OverlapResult {
            epsilon: value,
            state: PureState::normalized(v, dims)?,
            engine_value: value,
            engine_restart: 0,
            oracle_value: opts.oracle.then_some(value),
        });
    }
    let cands = obj.candidates(opts, "min-overlap")?;
    let best = best_of(&cands).expect("at least one restart").clone();
    let oracle = if opts.oracle { grid_oracle(p, r, dims, opts.exec)? } else { None };
    let (epsilon, vector) = match &oracle {
        Some((v, phi)) if *v < best.value => (*v, phi.clone()),
        _ => (best.value, best.vector.clone()),
    };
    Ok(OverlapResult {
        epsilon,
        state: PureState::normalized(vector, dims)?,
        engine_value: best.value,
        engine_restart: best.restart,
        oracle_value: oracle.map(|(v, _)| v),
    })
}

/// Unit vector in `C^d` (up to global phase) from `2d − 2` angles:
/// polar angles in `[0, π/2]` followed by phases in `[0, 2π)`.
fn sphere_point(d: usize, params: &[f64]) -> CVec {
    let polar = &params[..d - 1];
    let phases = &params[d - 1..];
    let mut v = CVec::zeros(d);
    let mut sin_acc = 1.0;
    for i in 0..d {
        let amp = if i + 1 < d { sin_acc * polar[i].cos() } else { sin_acc };
        let phase = if i == 0 { 0.0 } else { phases[i - 1] };
        v[i] = C64::from_polar(amp, phase);
        if i + 1 < d {
            sin_acc *= polar[i].sin();
        }
    }
    v
}

/// Orthonormal frame of the subspace selected by `params` on a factor of
/// dimension `d`: the vector itself for rank 1, its complement for `d − 1`.
fn frame(d: usize, rank: usize, params: &[f64]) -> Result<CMat> {
    let v = sphere_point(d, params);
    if rank == 1 {
        return Ok(CMat::from_column_slice(d, 1, v.as_slice()));
    }
    let comp = linalg::identity(d) - linalg::outer(&v);
    let e = linalg::eigh(&comp)?;
    Ok(e.vectors.columns(0, d - 1).into_owned())
}

struct GridProblem<'a> {
    p: &'a CMat,
    dims: BipartiteDims,
    rank: usize,
    on_first: bool,
    d: usize,
}

impl GridProblem<'_> {
    fn evaluate(&self, params: &[f64]) -> Result<(f64, CVec)> {
        let f = frame(self.d, self.rank, params)?;
        let iso = if self.on_first {
            linalg::kron(&f, &linalg::identity(self.dims.b))?
        } else {
            linalg::kron(&linalg::identity(self.dims.a), &f)?
        };
        let k = iso.adjoint() * self.p * &iso;
        let e = linalg::eigh(&k)?;
        let last = e.values.len() - 1;
        Ok((e.min(), &iso * e.vector(last)))
    }

    fn polish(&self, mut x: Vec<f64>, mut fx: f64, step0: f64) -> Result<(f64, Vec<f64>)> {
        let mut step = step0;
        while step > 1e-10 {
            let mut improved = false;
            for i in 0..x.len() {
                for dir in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[i] += dir * step;
                    let fy = self.evaluate(&y)?.0;
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok((fx, x))
    }
}

/// Grid + polish minimum of `⟨φ|P|φ⟩` over Schmidt rank ≤ `r`.
///
/// Returns `None` when the problem is outside the oracle's reach: total
/// dimension above [`ORACLE_MAX_DIM`], or no factor on which the rank-`r`
/// subspaces form a sphere of at most four real parameters.
pub fn grid_oracle(p: &CMat, r: usize, dims: BipartiteDims, exec: ExecMode) -> Result<Option<(f64, CVec)>> {
    if dims.total() > ORACLE_MAX_DIM || r == 0 {
        return Ok(None);
    }
    if r >= dims.min() {
        let e = linalg::eigh(p)?;
        let last = e.values.len() - 1;
        return Ok(Some((e.min(), e.vector(last))));
    }
    let pick = [(true, dims.a), (false, dims.b)]
        .into_iter()
        .find(|&(_, d)| (r == 1 || r + 1 == d) && d <= 3 && r < d);
    let Some((on_first, d)) = pick else { return Ok(None) };
    let problem = GridProblem { p, dims, rank: r, on_first, d };

    let (n_polar, n_phase) = if d == 2 { (33, 64) } else { (13, 24) };
    let polar_axis: Vec<f64> = (0..n_polar).map(|i| FRAC_PI_2 * i as f64 / (n_polar - 1) as f64).collect();
    let phase_axis: Vec<f64> = (0..n_phase).map(|i| 2.0 * PI * i as f64 / n_phase as f64).collect();
    let points: Vec<Vec<f64>> = if d == 2 {
        polar_axis.iter().flat_map(|&t| phase_axis.iter().map(move |&f| vec![t, f])).collect()
    } else {
        let mut pts = Vec::new();
        for &t1 in &polar_axis {
            for &t2 in &polar_axis {
                for &f1 in &phase_axis {
                    for &f2 in &phase_axis {
                        pts.push(vec![t1, t2, f1, f2]);
                    }
                }
            }
        }
        pts
    };
    let values = par::map_indexed(exec, points.len(), |i| problem.evaluate(&points[i]).map(|(v, _)| v));
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));

    let step0 = FRAC_PI_2 / (n_polar - 1) as f64;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for &i in order.iter().take(4) {
        let (v, x) = problem.polish(points[i].clone(), values[i], step0)?;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, x));
        }
    }
    let (_, x) = best.expect("grid is non-empty");
    let (v, phi) = problem.evaluate(&x)?;
    Ok(Some((v.max(0.0), phi)))
}
