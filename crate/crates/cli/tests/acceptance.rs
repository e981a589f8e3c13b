//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

use schmlab::channels::{certify_peb, choi_to_kraus, kraus_to_choi, QuantumChannel};
use schmlab::constructions::{default_sn_k_state, isotropic_state, isotropic_transition};
use schmlab::linalg::{self, identity, BipartiteDims, CMat, CVec, Side, C64};
use schmlab::par::ExecMode;
use schmlab::random;
use schmlab::schmidt::*;
use schmlab::states::{local_filter, Tolerances};
use schmlab::{DensityMatrix, PureState, RankTolerance};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Check {
    let t = started.elapsed();
    ensure(t < limit, || format!("took {t:.1?}, limit {limit:?}"))
}

fn rank_one(v: &CVec, dims: BipartiteDims) -> DensityMatrix {
    PureState::normalized(v.clone(), dims).unwrap().density()
}

fn mixture(parts: &[(f64, CVec)], dims: BipartiteDims) -> DensityMatrix {
    let mut m = CMat::zeros(dims.total(), dims.total());
    for (w, v) in parts {
        m += linalg::outer(&v.unscale(v.norm())) * C64::new(*w, 0.0);
    }
    DensityMatrix::new(m, dims).unwrap()
}

/// Random local filter; every third one is rank deficient.
fn filter(g: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    let m = random::ginibre(g, rows, cols);
    if g.random_range(0..3) == 0 && rows.min(cols) > 1 {
        let keep = g.random_range(1..rows.min(cols));
        return linalg::svd(&m).unwrap().truncated(keep);
    }
    m
}

fn schmidt_rank_exactness() -> Check {
    let started = Instant::now();
    let tol = RankTolerance::new(1e-8).unwrap();
    for d in 2..=6 {
        let psi = PureState::maximally_entangled(d).unwrap();
        let sr = psi.schmidt_rank(tol).unwrap();
        ensure(sr == d, || format!("maximally entangled d = {d}: SR {sr}"))?;
        let c = certify(&psi.density(), &CertifyOptions::new(SearchOptions::default())).unwrap();
        ensure((c.lower, c.upper) == (d, d), || format!("maximally entangled d = {d}: ({}, {})", c.lower, c.upper))?;
    }
    let mut g = ChaCha8Rng::seed_from_u64(101);
    for d in 2..=6 {
        let dims = BipartiteDims::square(d).unwrap();
        let psi = PureState::new(random::product_vector(&mut g, dims), dims).unwrap();
        ensure(psi.schmidt_rank(tol).unwrap() == 1, || format!("product d = {d}"))?;
        let c = certify(&psi.density(), &CertifyOptions::new(SearchOptions::default())).unwrap();
        ensure((c.lower, c.upper) == (1, 1), || format!("product d = {d}: ({}, {})", c.lower, c.upper))?;
    }
    let mut violations = 0;
    for _ in 0..1000 {
        let dims = BipartiteDims::new(g.random_range(2..5), g.random_range(2..5)).unwrap();
        let r = g.random_range(1..=dims.min());
        let psi = PureState::new(random::schmidt_rank_vector(&mut g, dims, r), dims).unwrap();
        let (ra, rb) = (g.random_range(1..6), g.random_range(1..6));
        let fa = filter(&mut g, ra, dims.a);
        let fb = filter(&mut g, rb, dims.b);
        if let Ok(out) = local_filter(&psi, &fa, &fb) {
            if out.schmidt_rank(tol).unwrap() > psi.schmidt_rank(tol).unwrap() {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} filtering violations"))?;
    within(Duration::from_secs(5), started)
}

fn lambda_boundary() -> Check {
    let started = Instant::now();
    let dims = BipartiteDims::square(4).unwrap();
    let mut g = ChaCha8Rng::seed_from_u64(102);
    for r in 1..=3usize {
        let t = 1.0 / r as f64;
        for _ in 0..1000 {
            let k = g.random_range(1..=r);
            let p = linalg::outer(&random::schmidt_rank_vector(&mut g, dims, k));
            let min = linalg::min_eigenvalue(&apply_lambda(&p, dims, t, Side::A).unwrap()).unwrap();
            ensure(min >= -1e-9, || format!("r = {r}: SR-{k} state gives {min:.3e}"))?;
        }
        let edge = linalg::outer(&random::equal_coefficient_vector(dims, r + 1));
        let min = linalg::min_eigenvalue(&apply_lambda(&edge, dims, t, Side::A).unwrap()).unwrap();
        let expected = 1.0 / (r + 1) as f64 - 1.0 / r as f64;
        ensure((min - expected).abs() <= 1e-9, || format!("r = {r}: {min} vs {expected}"))?;
    }
    within(Duration::from_secs(30), started)
}

fn witness_construction() -> Check {
    let delta = PureState::maximally_entangled(2).unwrap().density();
    let dims = delta.dims();
    let w = build_witness(&delta, 2, &identity(4), &OverlapOptions::default(), &Tolerances::default()).map_err(|e| e.to_string())?;
    let Recipe::Kernel { epsilon, .. } = w.recipe else { return Err("unexpected witness recipe".into()) };
    ensure((epsilon - 0.5).abs() <= 1e-6, || format!("epsilon {epsilon}"))?;
    // independent grid search over product vectors, polished
    let kernel = identity(4) - delta.matrix();
    let (oracle, _) = grid_oracle(&kernel, 1, dims, ExecMode::Parallel).unwrap().ok_or("grid oracle unavailable")?;
    ensure((oracle - epsilon).abs() <= 1e-6, || format!("oracle {oracle} vs engine {epsilon}"))?;
    let margin = w.evaluate(delta.matrix());
    ensure((margin + 0.5).abs() <= 1e-6, || format!("Tr(W δ) = {margin}"))?;
    let mut g = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..10_000 {
        let v = random::product_vector(&mut g, dims);
        let x = linalg::expectation(&w.matrix, &v);
        ensure(x >= -1e-9, || format!("product state gives {x:.3e}"))?;
    }
    Ok(())
}

/// Twenty states with known Schmidt number; `pure` marks rank-one inputs.
fn library() -> Vec<(&'static str, DensityMatrix, usize, bool)> {
    let mut g = ChaCha8Rng::seed_from_u64(104);
    let q = BipartiteDims::square(2).unwrap();
    let t = BipartiteDims::square(3).unwrap();
    let r23 = BipartiteDims::new(2, 3).unwrap();
    let bell = PureState::maximally_entangled(2).unwrap().amplitudes().clone();
    let mut lib = vec![
        ("product 2x2", rank_one(&random::product_vector(&mut g, q), q), 1, true),
        ("product 3x3", rank_one(&random::product_vector(&mut g, t), t), 1, true),
        ("bell", rank_one(&bell, q), 2, true),
        ("maxent 3", PureState::maximally_entangled(3).unwrap().density(), 3, true),
        ("sr2 3x3", rank_one(&random::schmidt_rank_vector(&mut g, t, 2), t), 2, true),
        ("sr3 3x3", rank_one(&random::schmidt_rank_vector(&mut g, t, 3), t), 3, true),
        ("sr2 2x3", rank_one(&random::schmidt_rank_vector(&mut g, r23, 2), r23), 2, true),
        ("maximally mixed 2x2", DensityMatrix::maximally_mixed(q), 1, false),
        ("maximally mixed 3x3", DensityMatrix::maximally_mixed(t), 1, false),
        ("isotropic 0.2", isotropic_state(3, 0.2).unwrap(), 1, false),
        ("isotropic 0.5", isotropic_state(3, 0.5).unwrap(), 2, false),
        ("isotropic 0.9", isotropic_state(3, 0.9).unwrap(), 3, false),
        ("isotropic 2x2 0.8", isotropic_state(2, 0.8).unwrap(), 2, false),
        ("bell + product", mixture(&[(0.9, bell.clone()), (0.1, random::product_vector(&mut g, q))], q), 2, false),
    ];
    for (name, k, members) in [("products 3x3", 1, 3), ("sr2 mixture 3x3", 2, 3), ("sr3 mixture 3x3", 3, 2), ("products 2x3", 1, 2)] {
        let dims = if name.ends_with("2x3") { r23 } else { t };
        let parts: Vec<_> = (0..members).map(|_| (1.0 / members as f64, random::schmidt_rank_vector(&mut g, dims, k))).collect();
        lib.push((name, mixture(&parts, dims), k, false));
    }
    for (name, k) in [("sr2 pair 4x4", 2), ("sr3 pair 4x4", 3)] {
        let dims = BipartiteDims::square(4).unwrap();
        let parts: Vec<_> = (0..2).map(|_| (0.5, random::schmidt_rank_vector(&mut g, dims, k))).collect();
        lib.push((name, mixture(&parts, dims), k, false));
    }
    lib
}

fn edge_decomposition() -> Check {
    let lib = library();
    ensure(lib.len() >= 20, || format!("library has {} states", lib.len()))?;
    let search = SearchOptions::default();
    for (name, omega, sn, pure) in &lib {
        let k = (*sn).clamp(2, omega.dims().min());
        let d = edge_decompose(omega, k, &search).map_err(|e| format!("{name}: {e}"))?;
        let gap = omega.trace_distance(&d.reconstruct()).unwrap();
        ensure(gap <= 1e-8, || format!("{name}: reconstruction gap {gap:.3e}"))?;
        if *pure && *sn == k {
            ensure(d.p == 1.0, || format!("{name}: p = {} for a pure SR-{k} input", d.p))?;
        }
    }
    let mut g = ChaCha8Rng::seed_from_u64(105);
    let thorough = SearchOptions::from_effort(Effort::Thorough, 5);
    let t = BipartiteDims::square(3).unwrap();
    for k in [2, 3] {
        let parts: Vec<_> = (0..3).map(|_| (1.0 / 3.0, random::schmidt_rank_vector(&mut g, t, k - 1))).collect();
        let omega = mixture(&parts, t);
        let d = edge_decompose(&omega, k, &thorough).map_err(|e| e.to_string())?;
        ensure(d.p <= 0.05, || format!("SR ≤ {} mixture: p = {}", k - 1, d.p))?;
    }
    Ok(())
}

fn choi_jamiolkowski() -> Check {
    let started = Instant::now();
    let mut g = ChaCha8Rng::seed_from_u64(106);
    for case in 0..100 {
        let (d_in, d_out) = (g.random_range(1..=4), g.random_range(1..=4));
        let count = g.random_range(1..=5);
        let rank = g.random_range(1..=d_in.min(d_out));
        let channel = QuantumChannel::random(&mut g, d_in, d_out, count, rank).unwrap();
        let psi = PureState::maximally_entangled(d_in).unwrap();
        let back = QuantumChannel::new(choi_to_kraus(&kraus_to_choi(&channel, &psi).unwrap(), &psi).unwrap()).unwrap();
        for _ in 0..50 {
            let r = g.random_range(1..=d_in);
            let rho = random::density(&mut g, d_in, r);
            let gap = (channel.apply(&rho).unwrap() - back.apply(&rho).unwrap()).norm();
            ensure(gap <= 1e-8, || format!("channel {case}: action differs by {gap:.3e}"))?;
        }
    }
    let search = SearchOptions::default();
    let id = certify_peb(&QuantumChannel::identity(3).unwrap(), &search).unwrap();
    ensure((id.k_peb_lower, id.k_peb_upper) == (Some(3), Some(3)), || format!("identity: {:?}", (id.k_peb_lower, id.k_peb_upper)))?;
    let dep = certify_peb(&QuantumChannel::depolarizing(3).unwrap(), &search).unwrap();
    ensure((dep.k_peb_lower, dep.k_peb_upper) == (Some(1), Some(1)), || format!("depolarizing: {:?}", (dep.k_peb_lower, dep.k_peb_upper)))?;
    for case in 0..30 {
        let (d_in, d_out, outcomes) = (g.random_range(2..=4), g.random_range(2..=4), g.random_range(1..=4));
        let c = certify_peb(&QuantumChannel::random_measure_prepare(&mut g, d_in, d_out, outcomes).unwrap(), &search).unwrap();
        ensure(c.k_peb_upper == Some(1), || format!("measure-and-prepare {case}: upper {:?}", c.k_peb_upper))?;
    }
    within(Duration::from_secs(60), started)
}

fn kraus_rank_soundness() -> Check {
    let mut g = ChaCha8Rng::seed_from_u64(107);
    let search = SearchOptions::default();
    for case in 0..100 {
        let k = 1 + case % 3;
        let (d_in, d_out) = (g.random_range(k.max(2)..=4), g.random_range(k.max(2)..=4));
        let count = g.random_range(1..=4);
        let channel = QuantumChannel::random(&mut g, d_in, d_out, count, k).unwrap();
        let c = certify_peb(&channel, &search).unwrap();
        ensure(c.k_peb_upper.is_some_and(|u| u <= k), || format!("channel {case}: upper {:?} > {k}", c.k_peb_upper))?;
    }
    Ok(())
}

fn schmlab(args: &[&str]) -> Result<Value, String> {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = Command::new(env!("CARGO_BIN_EXE_schmlab")).arg("--json").arg(&out).args(args).output().unwrap();
    if !o.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
    }
    serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).map_err(|e| e.to_string())
}

fn paper_constructions() -> Check {
    let started = Instant::now();
    let c = default_sn_k_state(2, 2, 16, 8).unwrap();
    let cert = certify(&c.state, &CertifyOptions::new(SearchOptions::default()).with_hint(c.ensemble)).unwrap();
    ensure((cert.lower, cert.upper) == (2, 2), || format!("snk certificate ({}, {})", cert.lower, cert.upper))?;
    let sweep = schmlab(&["sweep", "rotation", "--values", "4,8,16,32"])?;
    let levels: Vec<f64> = sweep["table"].as_array().unwrap().iter().map(|r| r["scalar"]["value"].as_f64().unwrap()).collect();
    ensure(levels.len() == 4, || format!("{levels:?}"))?;
    for w in levels.windows(2) {
        ensure(w[1] <= 1.1 * w[0], || format!("erosion trend rises: {levels:?}"))?;
    }
    println!("  erosion trend N = 4, 8, 16, 32: {levels:.4?}");
    within(Duration::from_secs(120), started)
}

fn isotropic_threshold() -> Check {
    let tol = Tolerances::default();
    for k in 1..=2 {
        let f = isotropic_transition(3, k, 1e-4, &tol).unwrap();
        // closed form: min eig of (Λ_{1/k} ⊗ Id)(ω_F) is 1/3 − max(F, (1 − F)/8)/k
        let closed = |f: f64| 1.0 / 3.0 - f.max((1.0 - f) / 8.0) / k as f64;
        let root = k as f64 / 3.0;
        ensure(closed(root).abs() < 1e-12, || "closed form root".into())?;
        ensure((f - root).abs() <= 0.01, || format!("k = {k}: transition {f}, closed form {root}"))?;
        for probe in [f - 0.02, f + 0.02] {
            let s = isotropic_state(3, probe).unwrap();
            let min = linalg::min_eigenvalue(&apply_lambda(s.matrix(), s.dims(), 1.0 / k as f64, Side::A).unwrap()).unwrap();
            ensure((min - closed(probe)).abs() < 1e-12, || format!("F = {probe}: {min} vs {}", closed(probe)))?;
        }
    }
    Ok(())
}

fn without_timing(v: &Value) -> String {
    let mut v = v.clone();
    v.as_object_mut().unwrap().remove("timing_ms");
    serde_json::to_string_pretty(&v).unwrap()
}

fn determinism() -> Check {
    let dir = TempDir::new().unwrap();
    let state = dir.path().join("snk.json");
    let s = state.to_str().unwrap();
    let built = Command::new(env!("CARGO_BIN_EXE_schmlab")).args(["build", "snk", "--out", s]).output().unwrap();
    ensure(built.status.success(), || "build snk failed".into())?;
    let matrix: Vec<Vec<&str>> = vec![
        vec!["--seed", "11", "analyze-state", s],
        vec!["--seed", "11", "analyze-state", "--recipe", "isotropic", "--d", "3", "--F", "0.5", "--edge", "2"],
        vec!["--seed", "11", "analyze-state", "--recipe", "rotation", "--grid", "8"],
        vec!["--seed", "11", "analyze-channel", "--channel", "identity", "--dim", "3"],
        vec!["--seed", "11", "analyze-channel", "--channel", "weyl", "--dim", "2"],
        vec!["--seed", "11", "--effort", "quick", "sweep", "isotropic", "--from", "0", "--to", "1", "--step", "0.25"],
        vec!["--seed", "11", "sweep", "rotation", "--values", "4,8"],
    ];
    let first: Vec<String> = matrix.iter().map(|a| schmlab(a).map(|v| without_timing(&v))).collect::<Result<_, _>>()?;
    let second: Vec<String> = matrix.iter().map(|a| schmlab(a).map(|v| without_timing(&v))).collect::<Result<_, _>>()?;
    for (i, (a, b)) in first.iter().zip(&second).enumerate() {
        ensure(a == b, || format!("run {:?} differs between invocations", matrix[i]))?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 Schmidt-rank exactness", schmidt_rank_exactness),
        ("2 Λ-map boundary", lambda_boundary),
        ("3 witness construction", witness_construction),
        ("4 edge decomposition", edge_decomposition),
        ("5 Choi-Jamiolkowski", choi_jamiolkowski),
        ("6 Kraus-rank soundness", kraus_rank_soundness),
        ("7 constructions", paper_constructions),
        ("8 isotropic threshold", isotropic_threshold),
        ("9 determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let started = Instant::now();
        match check() {
            Ok(()) => println!("PASS {name} ({:.1?})", started.elapsed()),
            Err(why) => {
                println!("FAIL {name} ({:.1?}): {why}", started.elapsed());
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
