mod common;

use bmc_core::instance::generate_instance;
use bmc_core::model::FactorZ;
use bmc_core::observation::{
    read_matrix_market, residual_on_omega, sample_bernoulli, sample_uniform, write_matrix_market,
    ObservationSet,
};
use bmc_core::Error;
use common::gaussian;
use proptest::prelude::*;
use std::io::Write;

#[test]
fn bernoulli_count_is_binomial() {
    let inst = generate_instance::<f64>(100, 100, 2, 1.0, 1).unwrap();
    let trials = 1000;
    let total: usize = (0..trials)
        .map(|s| sample_bernoulli(100, 100, 0.5, &inst, s).unwrap().len())
        .sum();
    let mean = total as f64 / trials as f64;
    // Standard error of the mean of Binomial(10⁴, ½) over 1000 draws.
    let se = (10_000.0 * 0.25f64).sqrt() / (trials as f64).sqrt();
    assert!((mean - 5000.0).abs() <= 3.0 * se, "mean {mean}");
}

#[test]
fn uniform_sampler_edge_cases() {
    let inst = generate_instance::<f64>(8, 6, 2, 1.0, 2).unwrap();
    let full = sample_uniform(8, 6, 48, &inst, 3).unwrap();
    assert_eq!(full.len(), 48);
    for (&(i, j), &x) in full.indices().iter().zip(full.values()) {
        assert_eq!(x, inst.entry(i, j));
    }
    assert_eq!(sample_uniform(8, 6, 1, &inst, 4).unwrap().len(), 1);
    let a = sample_uniform(8, 6, 20, &inst, 5).unwrap();
    let b = sample_uniform(8, 6, 20, &inst, 5).unwrap();
    assert_eq!(a.indices(), b.indices());
    assert_eq!(a.values(), b.values());
    assert_eq!(a.len(), 20);
    assert!(sample_uniform(8, 6, 49, &inst, 5).is_err());
}

#[test]
fn residual_matches_dense_oracle() {
    let inst = generate_instance::<f64>(15, 11, 3, 2.0, 6).unwrap();
    let obs = sample_uniform(15, 11, 60, &inst, 7).unwrap();
    let z = FactorZ::from_matrix(15, 11, gaussian(26, 3, 8)).unwrap();
    let scale = 2.5;
    let res = residual_on_omega(&obs, &z, scale).unwrap().to_dense();
    let full = z.reconstruct().sub(&inst.dense().unwrap()).unwrap();
    let mut mask = vec![vec![false; 11]; 15];
    for &(i, j) in obs.indices() {
        mask[i][j] = true;
    }
    for i in 0..15 {
        for j in 0..11 {
            let want = if mask[i][j] { scale * full[(i, j)] } else { 0.0 };
            assert!((res[(i, j)] - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn single_entry_residual() {
    let obs = ObservationSet::new(1, 1, vec![(0, 0, 1.0)]).unwrap();
    let z = FactorZ::from_matrix(
        1,
        1,
        bmc_core::linalg::DenseMatrix::from_row_major(2, 1, vec![2.0, 3.0]).unwrap(),
    )
    .unwrap();
    assert_eq!(residual_on_omega(&obs, &z, 1.0).unwrap().values(), &[5.0]);
}

#[test]
fn mtx_error_cases() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.mtx");
    let mut f = std::fs::File::create(&dup).unwrap();
    writeln!(f, "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 1 1.0\n1 1 2.0").unwrap();
    drop(f);
    assert!(matches!(read_matrix_market::<f64>(&dup), Err(Error::Parse { .. })));

    let empty = dir.path().join("empty.mtx");
    std::fs::write(&empty, "%%MatrixMarket matrix coordinate real general\n3 3 0\n").unwrap();
    assert!(matches!(read_matrix_market::<f64>(&empty), Err(Error::InvalidArgument(_))));

    let missing = dir.path().join("nope.mtx");
    assert!(matches!(read_matrix_market::<f64>(&missing), Err(Error::Io(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mtx_round_trip(
        n1 in 1usize..12,
        n2 in 1usize..12,
        seed in 0u64..10_000,
        vals in proptest::collection::vec(-1e6f64..1e6, 1..40),
    ) {
        let mut seen = std::collections::HashSet::new();
        let entries: Vec<_> = vals
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let h = seed.wrapping_mul(6364136223846793005).wrapping_add((k as u64).wrapping_mul(1442695040888963407));
                (((h >> 33) as usize) % n1, ((h >> 13) as usize) % n2, v)
            })
            .filter(|&(i, j, _)| seen.insert((i, j)))
            .collect();
        let obs = ObservationSet::new(n1, n2, entries).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.mtx");
        write_matrix_market(&obs, &path).unwrap();
        let back = read_matrix_market::<f64>(&path).unwrap();
        prop_assert_eq!((back.n1(), back.n2()), (n1, n2));
        prop_assert_eq!(back.indices(), obs.indices());
        prop_assert_eq!(back.values(), obs.values());
    }

    #[test]
    fn masking_contracts(seed in 0u64..100_000, m in 1usize..80) {
        let inst = generate_instance::<f64>(10, 9, 2, 1.5, seed).unwrap();
        let obs = sample_uniform(10, 9, m, &inst, seed + 1).unwrap();
        let z = FactorZ::from_matrix(10, 9, gaussian(19, 2, seed + 2)).unwrap();
        let masked = residual_on_omega(&obs, &z, 1.0).unwrap().frobenius_norm();
        let full = z.reconstruct().distance_to(&inst.dense().unwrap()).unwrap();
        prop_assert!(masked <= full * (1.0 + 1e-12));
    }
}
