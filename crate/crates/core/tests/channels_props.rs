use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schmlab::channels::{certify_peb, certify_peb_with_reference, choi_to_kraus, kraus_to_choi, QuantumChannel};
use schmlab::linalg::{self, BipartiteDims};
use schmlab::random;
use schmlab::schmidt::SearchOptions;
use schmlab::PureState;

/// Random reference state with full-rank marginals.
fn reference(g: &mut ChaCha8Rng, d: usize) -> PureState {
    PureState::new(random::schmidt_rank_vector(g, BipartiteDims::square(d).unwrap(), d), BipartiteDims::square(d).unwrap()).unwrap()
}

#[test]
fn choi_round_trip_preserves_the_action() {
    let mut g = ChaCha8Rng::seed_from_u64(20);
    for case in 0..100 {
        let (d_in, d_out) = (g.random_range(1..=4), g.random_range(1..=4));
        let count = g.random_range(1..=5);
        let rank = g.random_range(1..=d_in.min(d_out));
        let channel = QuantumChannel::random(&mut g, d_in, d_out, count, rank).unwrap();
        let psi = if case % 2 == 0 { PureState::maximally_entangled(d_in).unwrap() } else { reference(&mut g, d_in) };
        let choi = kraus_to_choi(&channel, &psi).unwrap();
        let back = QuantumChannel::new(choi_to_kraus(&choi, &psi).unwrap()).unwrap();
        for _ in 0..50 {
            let r = g.random_range(1..=d_in);
            let rho = random::density(&mut g, d_in, r);
            let gap = (channel.apply(&rho).unwrap() - back.apply(&rho).unwrap()).norm();
            assert!(gap <= 1e-8, "case {case}: {gap:.3e}");
        }
        // the rebuilt channel has the same Choi state
        let again = kraus_to_choi(&back, &psi).unwrap();
        assert!(choi.trace_distance(again.matrix()).unwrap() <= 1e-9, "case {case}");
    }
}

#[test]
fn kraus_rank_bounds_the_peb_level() {
    let mut g = ChaCha8Rng::seed_from_u64(21);
    let search = SearchOptions::default();
    for case in 0..100 {
        let k = 1 + case % 3;
        let d_in = g.random_range(k.max(2)..=4);
        let d_out = g.random_range(k.max(2)..=4);
        let count = g.random_range(1..=4);
        let channel = QuantumChannel::random(&mut g, d_in, d_out, count, k).unwrap();
        let c = certify_peb(&channel, &search).unwrap();
        let upper = c.k_peb_upper.unwrap();
        assert!(upper <= k, "case {case}: upper {upper} > {k}");
        assert!(c.k_peb_lower.unwrap() <= upper);
    }
}

#[test]
fn any_full_rank_reference_gives_the_same_upper_level() {
    let mut g = ChaCha8Rng::seed_from_u64(22);
    let search = SearchOptions::default();
    for case in 0..50 {
        let k = 1 + case % 3;
        let d = g.random_range(k.max(2)..=3);
        let channel = QuantumChannel::random(&mut g, d, d, 3, k).unwrap();
        let psi = reference(&mut g, d);
        let c = certify_peb_with_reference(&channel, &psi, &search).unwrap();
        assert!(c.k_peb_upper.unwrap() <= k, "case {case}");
        assert!(c.k_peb_lower.unwrap() <= c.k_peb_upper.unwrap());
    }
}

#[test]
fn measure_and_prepare_channels_break_entanglement() {
    let mut g = ChaCha8Rng::seed_from_u64(23);
    let search = SearchOptions::default();
    for case in 0..30 {
        let (d_in, d_out) = (g.random_range(2..=4), g.random_range(2..=4));
        let outcomes = g.random_range(1..=4);
        let channel = QuantumChannel::random_measure_prepare(&mut g, d_in, d_out, outcomes).unwrap();
        let c = certify_peb(&channel, &search).unwrap();
        assert_eq!(c.k_peb_upper, Some(1), "case {case}");
        assert!(c.is_entanglement_breaking());
    }
}

#[test]
fn identity_and_depolarizing_certificates() {
    let search = SearchOptions::default();
    let id = certify_peb(&QuantumChannel::identity(3).unwrap(), &search).unwrap();
    assert_eq!((id.k_peb_lower, id.k_peb_upper), (Some(3), Some(3)));
    for channel in [QuantumChannel::depolarizing(3).unwrap(), QuantumChannel::weyl_depolarizing(3).unwrap()] {
        let c = certify_peb(&channel, &search).unwrap();
        assert_eq!((c.k_peb_lower, c.k_peb_upper), (Some(1), Some(1)));
        assert!(linalg::trace_distance(channel.choi().unwrap().matrix(), &(linalg::identity(9) / linalg::c(9.0, 0.0))).unwrap() < 1e-12);
    }
}
