//! Example states: orbits of the rotation group `V_x = Σ_q e^{ixq}|q⟩⟨q|`
//! on truncated Fourier modes, and the isotropic family.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, BipartiteDims, CMat, CVec, C64};
use crate::par::ExecMode;
use crate::schmidt::{best_subtraction, sn_lower_bound};
use crate::states::{DensityMatrix, Ensemble, EnsembleMember, PureState, Tolerances};
use crate::{Error, Result};

pub const DEFAULT_DECAY: f64 = 0.7;
/// Smallest admissible coefficient magnitude of a nonvanishing profile.
pub const NONVANISHING_FLOOR: f64 = 1e-6;
const FAMILY_RETRIES: usize = 100;

/// Unit vector over the modes `q = −m..=m`, stored at index `q + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierVector {
    m: usize,
    coefficients: CVec,
}

impl FourierVector {
    pub fn new(m: usize, coefficients: CVec) -> Result<Self> {
        if coefficients.len() != 2 * m + 1 {
            return Err(Error::Shape(format!("{} coefficients for mode cutoff {m}", coefficients.len())));
        }
        let norm = coefficients.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("Fourier vector norm is {norm}, expected 1")));
        }
        Ok(Self { m, coefficients })
    }

    /// `c_q ∝ a^{|q|}`.
    pub fn profile(m: usize, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Validation(format!("profile decay must be positive, got {a}")));
        }
        let v = CVec::from_fn(2 * m + 1, |i, _| C64::new(a.powi((i as i64 - m as i64).unsigned_abs() as i32), 0.0));
        let n = v.norm();
        Self::new(m, v / C64::new(n, 0.0))
    }

    pub fn mode_cutoff(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }

    pub fn coefficients(&self) -> &CVec {
        &self.coefficients
    }

    pub fn coefficient(&self, q: i64) -> Option<C64> {
        let i = q + self.m as i64;
        (0..self.dim() as i64).contains(&i).then(|| self.coefficients[i as usize])
    }

    pub fn is_nonvanishing(&self, floor: f64) -> bool {
        self.coefficients.iter().all(|z| z.norm() >= floor)
    }
}

/// Uniform grid `x_l = 2π · arc · l / N`, `l = 0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationGrid {
    pub points: usize,
    pub arc: f64,
}

impl RotationGrid {
    pub fn new(points: usize, arc: f64) -> Result<Self> {
        if points == 0 {
            return Err(Error::Validation("grid needs at least one point".into()));
        }
        if !(arc > 0.0 && arc <= 1.0) {
            return Err(Error::Validation(format!("arc fraction must lie in (0, 1], got {arc}")));
        }
        Ok(Self { points, arc })
    }

    pub fn full(points: usize) -> Result<Self> {
        Self::new(points, 1.0)
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |l| 2.0 * PI * self.arc * l as f64 / self.points as f64)
    }
}

/// `diag(e^{ixq})`, `q = −m..=m`.
pub fn rotation_unitary(x: f64, m: usize) -> CMat {
    let phases: Vec<C64> = (0..2 * m + 1).map(|i| C64::from_polar(1.0, x * (i as f64 - m as f64))).collect();
    CMat::from_diagonal(&CVec::from_vec(phases))
}

fn rotate(v: &CVec, x: f64, m: usize) -> CVec {
    CVec::from_fn(v.len(), |i, _| v[i] * C64::from_polar(1.0, x * (i as f64 - m as f64)))
}

/// `k` orthonormal Fourier vectors with every coefficient nonzero.
///
/// Gram–Schmidt runs on the profile `a^{|q|}` modulated by the phases
/// `e^{2πi j l/(2m+1)}`; if a result has a vanishing coefficient the phases
/// are re-drawn at random.
pub fn orthogonal_fourier_family(k: usize, m: usize, a: f64) -> Result<Vec<FourierVector>> {
    let dim = 2 * m + 1;
    if k == 0 || k > dim {
        return Err(Error::Validation(format!("family size {k} outside 1..={dim}")));
    }
    let base = FourierVector::profile(m, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for attempt in 0..=FAMILY_RETRIES {
        let raw: Vec<CVec> = (0..k)
            .map(|j| {
                CVec::from_fn(dim, |l, _| {
                    let theta = if attempt == 0 || j == 0 {
                        2.0 * PI * (j * l) as f64 / dim as f64
                    } else {
                        rng.random::<f64>() * 2.0 * PI
                    };
                    base.coefficients[l] * C64::from_polar(1.0, theta)
                })
            })
            .collect();
        let Some(ortho) = gram_schmidt(&raw) else { continue };
        let family = ortho.into_iter().map(|v| FourierVector::new(m, v)).collect::<Result<Vec<_>>>()?;
        if family.iter().all(|f| f.is_nonvanishing(NONVANISHING_FLOOR)) {
            return Ok(family);
        }
        log::debug!("fourier family attempt {attempt} has a vanishing coefficient");
    }
    Err(Error::Construction(format!("no nonvanishing orthogonal family after {FAMILY_RETRIES} retries")))
}

fn gram_schmidt(vs: &[CVec]) -> Option<Vec<CVec>> {
    let mut out: Vec<CVec> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        // two passes for stability
        for _ in 0..2 {
            for u in &out {
                let p = u.dotc(&w);
                w -= u * p;
            }
        }
        let n = w.norm();
        if n < 1e-8 {
            return None;
        }
        out.push(w / C64::new(n, 0.0));
    }
    Some(out)
}

/// A constructed state with the ensemble that generated it.
#[derive(Debug, Clone)]
pub struct Constructed {
    pub state: DensityMatrix,
    pub ensemble: Ensemble,
}

fn assemble(vectors: Vec<CVec>, dims: BipartiteDims) -> Result<Constructed> {
    let n = dims.total();
    let w = 1.0 / vectors.len() as f64;
    let mut m = CMat::zeros(n, n);
    let mut members = Vec::with_capacity(vectors.len());
    for v in vectors {
        m += linalg::outer(&v);
        members.push(EnsembleMember { weight: w, state: PureState::normalized(v, dims)? });
    }
    Ok(Constructed { state: DensityMatrix::from_unnormalized(m, dims)?, ensemble: Ensemble { members } })
}

fn aliasing_guard(grid: &RotationGrid, m: usize) {
    if grid.points < 2 * m + 1 {
        log::warn!("grid of {} points aliases {} modes", grid.points, 2 * m + 1);
    }
}

/// `(1/N) Σ_l V_x|φ₁⟩⟨φ₁|V_x† ⊗ V_x|φ₂⟩⟨φ₂|V_x†`: a mixture of `N` products.
pub fn build_rotation_state(phi1: &FourierVector, phi2: &FourierVector, grid: &RotationGrid) -> Result<Constructed> {
    if phi1.m != phi2.m {
        return Err(Error::Validation(format!("mode cutoffs differ: {} and {}", phi1.m, phi2.m)));
    }
    let m = phi1.m;
    aliasing_guard(grid, m);
    let dims = BipartiteDims::square(phi1.dim())?;
    let vectors = grid.angles().map(|x| rotate(&phi1.coefficients, x, m).kronecker(&rotate(&phi2.coefficients, x, m))).collect();
    assemble(vectors, dims)
}

/// Grid average of `(V_x ⊗ V_x ⊗ I)|Ω⟩`, `|Ω⟩ = k^{-1/2} Σ_i |φ¹_i⟩|φ²_i⟩|i⟩`,
/// split as `H₁ | H₂ ⊗ K` with dimensions `(2m+1, (2m+1)k)`.
pub fn build_sn_k_state(left: &[FourierVector], right: &[FourierVector], grid: &RotationGrid) -> Result<Constructed> {
    let k = left.len();
    if k < 2 || right.len() != k {
        return Err(Error::Validation(format!("need two families of equal size ≥ 2, got {} and {}", k, right.len())));
    }
    let m = left[0].m;
    if left.iter().chain(right).any(|f| f.m != m) {
        return Err(Error::Validation("all Fourier vectors must share one mode cutoff".into()));
    }
    for family in [left, right] {
        for i in 0..k {
            for j in 0..i {
                let ip = family[i].coefficients.dotc(&family[j].coefficients).norm();
                if ip > 1e-8 {
                    return Err(Error::Validation(format!("family vectors {j} and {i} overlap by {ip:.3e}")));
                }
            }
        }
    }
    aliasing_guard(grid, m);
    let d = 2 * m + 1;
    let dims = BipartiteDims::new(d, d * k)?;
    let amp = C64::new(1.0 / (k as f64).sqrt(), 0.0);
    let vectors = grid
        .angles()
        .map(|x| {
            let mut v = CVec::zeros(dims.total());
            for i in 0..k {
                let l = rotate(&left[i].coefficients, x, m);
                let r = rotate(&right[i].coefficients, x, m);
                for h1 in 0..d {
                    for h2 in 0..d {
                        v[dims.index(h1, h2 * k + i)] += l[h1] * r[h2] * amp;
                    }
                }
            }
            v
        })
        .collect();
    assemble(vectors, dims)
}

/// The default `k`-term state: both families from
/// [`orthogonal_fourier_family`], grid of `points` on the arc `1/n`.
pub fn default_sn_k_state(k: usize, m: usize, n: usize, points: usize) -> Result<Constructed> {
    if n == 0 {
        return Err(Error::Validation("arc divisor must be positive".into()));
    }
    let family = orthogonal_fourier_family(k, m, DEFAULT_DECAY)?;
    build_sn_k_state(&family, &family, &RotationGrid::new(points, 1.0 / n as f64)?)
}

/// The default rotation state: `φ₁ = φ₂ =` the profile with decay `a`.
pub fn default_rotation_state(m: usize, a: f64, points: usize) -> Result<Constructed> {
    let phi = FourierVector::profile(m, a)?;
    build_rotation_state(&phi, &phi, &RotationGrid::full(points)?)
}

/// First arc divisor in `divisors` at which the Λ-map lower bound of the
/// default `k`-term state reaches `k`. This is where the scan first sees it,
/// not a claim about the true onset.
pub fn sn_k_onset(k: usize, m: usize, divisors: &[usize], points: usize, tol: &Tolerances) -> Result<Option<usize>> {
    for &n in divisors {
        if sn_lower_bound(&default_sn_k_state(k, m, n, points)?.state, tol)?.k >= k {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// `F P₊ + (1 − F)(I − P₊)/(d² − 1)`.
pub fn isotropic_state(d: usize, fidelity: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::Validation(format!("fidelity must lie in [0, 1], got {fidelity}")));
    }
    if d < 2 {
        return Err(Error::Validation("isotropic states need d ≥ 2".into()));
    }
    let p = PureState::maximally_entangled(d)?.projector();
    let n = d * d;
    let rest = (linalg::identity(n) - &p) * C64::new((1.0 - fidelity) / (n as f64 - 1.0), 0.0);
    DensityMatrix::new(p * C64::new(fidelity, 0.0) + rest, BipartiteDims::square(d)?)
}

/// Smallest fidelity (to `resolution`) at which the Λ-map lower bound of the
/// `d`-dimensional isotropic state exceeds `k`.
pub fn isotropic_transition(d: usize, k: usize, resolution: f64, tol: &Tolerances) -> Result<f64> {
    let above = |f: f64| -> Result<bool> { Ok(sn_lower_bound(&isotropic_state(d, f)?, tol)?.k > k) };
    let (mut lo, mut hi) = (0.0, 1.0);
    if !above(hi)? {
        return Err(Error::Validation(format!("lower bound never exceeds {k} at d = {d}")));
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest weight of a product state found removable from `state`.
pub fn erosion_level(state: &DensityMatrix, restarts: usize, seed: u64, exec: ExecMode) -> Result<f64> {
    Ok(best_subtraction(state, 1, restarts, seed, exec, &Tolerances::default())?.lambda)
}

/// Erosion level of the default rotation state for each grid size.
pub fn erosion_trend(m: usize, a: f64, grids: &[usize], restarts: usize, seed: u64, exec: ExecMode) -> Result<Vec<(usize, f64)>> {
    grids
        .iter()
        .map(|&n| Ok((n, erosion_level(&default_rotation_state(m, a, n)?.state, restarts, seed, exec)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::RankTolerance;

    #[test]
    fn rotation_group_law() {
        let m = 3;
        assert!((rotation_unitary(0.0, m) - linalg::identity(7)).norm() < 1e-15);
        let (x, y) = (1.3, 5.9);
        let xy = (x + y) % (2.0 * PI);
        assert!((rotation_unitary(x, m) * rotation_unitary(y, m) - rotation_unitary(xy, m)).norm() < 1e-12);
        let u = rotation_unitary(0.4, 1);
        let mut e = CVec::zeros(3);
        e[2] = C64::new(1.0, 0.0);
        assert!(((&u * &e)[2] - C64::from_polar(1.0, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn family_properties() {
        let one = orthogonal_fourier_family(1, 3, 0.7).unwrap();
        assert_eq!(one[0], FourierVector::profile(3, 0.7).unwrap());
        let fam = orthogonal_fourier_family(3, 4, 0.7).unwrap();
        for i in 0..3 {
            assert!(fam[i].is_nonvanishing(1e-6));
            for j in 0..i {
                assert!(fam[i].coefficients().dotc(fam[j].coefficients()).norm() <= 1e-10);
            }
        }
        assert!(orthogonal_fourier_family(8, 3, 0.7).is_err());
    }

    #[test]
    fn single_point_grids() {
        let phi = FourierVector::profile(2, 0.7).unwrap();
        let c = build_rotation_state(&phi, &phi, &RotationGrid::full(1).unwrap()).unwrap();
        let v = phi.coefficients().kronecker(phi.coefficients());
        assert!((c.state.matrix() - linalg::outer(&v)).norm() < 1e-12);

        let fam = orthogonal_fourier_family(2, 2, 0.7).unwrap();
        let s = build_sn_k_state(&fam, &fam, &RotationGrid::new(1, 1.0 / 16.0).unwrap()).unwrap();
        assert_eq!(s.ensemble.len(), 1);
        assert_eq!(s.ensemble.members[0].state.schmidt_rank(RankTolerance::default()).unwrap(), 2);
    }

    #[test]
    fn rotation_state_has_grid_symmetry() {
        let c = default_rotation_state(2, 0.7, 8).unwrap();
        let u = rotation_unitary(2.0 * PI / 8.0, 2);
        let uu = linalg::kron(&u, &u).unwrap();
        let rotated = &uu * c.state.matrix() * uu.adjoint();
        assert!((rotated - c.state.matrix()).norm() < 1e-9);
    }

    #[test]
    fn sn_k_rejects_non_orthogonal_families() {
        let p = FourierVector::profile(2, 0.7).unwrap();
        let fam = vec![p.clone(), p];
        assert!(matches!(build_sn_k_state(&fam, &fam, &RotationGrid::full(4).unwrap()), Err(Error::Validation(_))));
    }

    #[test]
    fn isotropic_endpoints() {
        let mixed = isotropic_state(3, 1.0 / 9.0).unwrap();
        assert!((mixed.matrix() - linalg::identity(9) / C64::new(9.0, 0.0)).norm() < 1e-12);
        let pure = isotropic_state(3, 1.0).unwrap();
        assert!((pure.matrix() - PureState::maximally_entangled(3).unwrap().projector()).norm() < 1e-12);
        assert!(isotropic_state(3, 1.5).is_err());
    }
}
