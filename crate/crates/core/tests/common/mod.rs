//! State library with known Schmidt numbers.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use schmlab::constructions::isotropic_state;
use schmlab::linalg::{self, BipartiteDims, CMat, CVec, C64};
use schmlab::random;
use schmlab::{DensityMatrix, PureState};

pub struct Entry {
    pub name: &'static str,
    pub state: DensityMatrix,
    pub sn: usize,
    /// A mixture of pure states of Schmidt rank below `sn + 1`, built as such.
    pub pure: bool,
}

pub fn basis_pair(dims: BipartiteDims, pairs: &[(usize, usize)]) -> CVec {
    let mut v = CVec::zeros(dims.total());
    for &(i, j) in pairs {
        v[dims.index(i, j)] = C64::new(1.0, 0.0);
    }
    v.unscale(v.norm())
}

pub fn mixture(parts: &[(f64, CVec)], dims: BipartiteDims) -> DensityMatrix {
    let mut m = CMat::zeros(dims.total(), dims.total());
    for (w, v) in parts {
        m += linalg::outer(v) * C64::new(*w, 0.0);
    }
    DensityMatrix::new(m, dims).unwrap()
}

fn entry(name: &'static str, state: DensityMatrix, sn: usize) -> Entry {
    Entry { name, state, sn, pure: false }
}

fn pure(name: &'static str, v: CVec, dims: BipartiteDims, sn: usize) -> Entry {
    Entry { name, state: PureState::new(v, dims).unwrap().density(), sn, pure: true }
}

pub fn library() -> Vec<Entry> {
    let mut g = ChaCha8Rng::seed_from_u64(2024);
    let q = BipartiteDims::square(2).unwrap();
    let t = BipartiteDims::square(3).unwrap();
    let r23 = BipartiteDims::new(2, 3).unwrap();
    let mut lib = vec![
        pure("product 2x2", random::product_vector(&mut g, q), q, 1),
        pure("product 3x3", random::product_vector(&mut g, t), t, 1),
        pure("maxent 2", PureState::maximally_entangled(2).unwrap().amplitudes().clone(), q, 2),
        pure("maxent 3", PureState::maximally_entangled(3).unwrap().amplitudes().clone(), t, 3),
        pure("sr2 in 3x3", random::schmidt_rank_vector(&mut g, t, 2), t, 2),
        entry("maximally mixed 2x2", DensityMatrix::maximally_mixed(q), 1),
        entry("maximally mixed 3x3", DensityMatrix::maximally_mixed(t), 1),
    ];
    let products: Vec<_> = (0..3).map(|_| random::product_vector(&mut g, t)).collect();
    lib.push(entry("three products 3x3", mixture(&[(0.5, products[0].clone()), (0.3, products[1].clone()), (0.2, products[2].clone())], t), 1));
    let products: Vec<_> = (0..3).map(|_| random::product_vector(&mut g, r23)).collect();
    lib.push(entry(
        "three products 2x3",
        mixture(&products.iter().map(|v| (1.0 / 3.0, v.clone())).collect::<Vec<_>>(), r23),
        1,
    ));
    let bell = PureState::maximally_entangled(2).unwrap().amplitudes().clone();
    lib.push(entry("bell + product", mixture(&[(0.9, bell.clone()), (0.1, random::product_vector(&mut g, q))], q), 2));
    lib.push(entry("bell + noise", mixture(&[(0.6, bell), (0.4, basis_pair(q, &[(0, 1)]))], q), 2));
    lib.push(entry(
        "two sr2 3x3",
        mixture(&[(0.7, basis_pair(t, &[(0, 0), (1, 1)])), (0.3, basis_pair(t, &[(1, 1), (2, 2)]))], t),
        2,
    ));
    lib.push(entry("isotropic 0.9", isotropic_state(3, 0.9).unwrap(), 3));
    lib.push(entry("isotropic 0.5", isotropic_state(3, 0.5).unwrap(), 2));
    lib.push(entry("isotropic 0.2", isotropic_state(3, 0.2).unwrap(), 1));
    lib.push(entry("isotropic 0.65", isotropic_state(3, 0.65).unwrap(), 2));
    lib.push(entry("isotropic 2x2 0.8", isotropic_state(2, 0.8).unwrap(), 2));
    lib.push(entry("isotropic 2x2 0.4", isotropic_state(2, 0.4).unwrap(), 1));
    lib.push(pure("sr2 in 2x3", random::schmidt_rank_vector(&mut g, r23, 2), r23, 2));
    lib
}

/// Four random products in `2 ⊗ 3`: rank four, with a decomposition the
/// searches do not reliably find.
pub fn four_products(g: &mut ChaCha8Rng) -> DensityMatrix {
    let dims = BipartiteDims::new(2, 3).unwrap();
    let parts: Vec<_> = (0..4).map(|_| (0.25, random::product_vector(g, dims))).collect();
    mixture(&parts, dims)
}

/// Random mixed state: `members` random pure states of Schmidt rank ≤ `r`.
pub fn random_mixture(g: &mut ChaCha8Rng, dims: BipartiteDims, members: usize, r: usize) -> DensityMatrix {
    let parts: Vec<_> = (0..members).map(|_| (1.0 / members as f64, random::schmidt_rank_vector(g, dims, r))).collect();
    mixture(&parts, dims)
}
