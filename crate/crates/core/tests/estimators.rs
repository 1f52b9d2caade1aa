mod common;

use common::*;
use idmem::analysis::{gen_hypercube, gen_sphere_surface, rigid_motion};
use idmem::estimators::{mle_levina_bickel, pca_baseline, twonn, Estimator, MleParams, TwoNNParams};
use idmem::geometry::{dedupe_points, knn_distances};
use idmem::model::{PointCloud, TwoNNFit};
use idmem::Error;
use proptest::prelude::*;

fn line(xs: &[f64]) -> PointCloud {
    PointCloud::from_rows("line", &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
}

fn untrimmed() -> TwoNNParams {
    TwoNNParams {
        discard_fraction: 0.0,
        fit: TwoNNFit::Mle,
    }
}

#[test]
fn line_cloud_hand_value() {
    let c = line(&[0.0, 1.0, 3.0, 7.0]);
    let want = 4.0 / (3f64.ln() + 2f64.ln() + 2.0 * 1.5f64.ln());
    let a = twonn(&c, untrimmed()).unwrap().value;
    let b = mle_levina_bickel(&c, MleParams { k: 2 }).unwrap().value;
    assert!((a - 1.5369).abs() < 1e-3);
    assert!(rel_err(a, want) < 1e-12);
    assert!(rel_err(a, b) < 1e-12);
}

#[test]
fn untrimmed_matches_oracles() {
    for seed in 0..20 {
        let c = random_cloud(seed, 40, 3);
        let a = twonn(&c, untrimmed()).unwrap().value;
        assert!(rel_err(a, twonn_untrimmed(&c)) < 1e-12, "seed {seed}");
        for k in [2, 5, 10] {
            let b = mle_levina_bickel(&c, MleParams { k }).unwrap().value;
            assert!(rel_err(b, mle_pooled(&c, k)) < 1e-12, "seed {seed} k {k}");
        }
    }
}

#[test]
fn knn_matches_full_sort() {
    for seed in 0..30 {
        let n = 5 + (seed as usize * 7) % 46;
        let c = random_cloud(seed, n, 1 + seed as usize % 5);
        let oracle = sorted_neighbors(&c);
        for k in [1, 2, (n - 1).min(10)] {
            let t = knn_distances(&c, k).unwrap();
            for (i, row) in oracle.iter().enumerate().take(n) {
                let want_d: Vec<f64> = row[..k].iter().map(|p| p.0).collect();
                let want_i: Vec<usize> = row[..k].iter().map(|p| p.1).collect();
                assert_eq!(t.distances(i), &want_d[..]);
                assert_eq!(t.neighbors(i), &want_i[..]);
            }
        }
    }
}

#[test]
fn knn_tie_breaks_by_index() {
    let c = line(&[0.0, -1.0, 1.0, 5.0]);
    let t = knn_distances(&c, 2).unwrap();
    assert_eq!(t.neighbors(0), &[1, 2]);
}

#[test]
fn coincident_points_rejected() {
    let c = line(&[0.0, 0.0, 1.0, 2.0]);
    assert!(matches!(knn_distances(&c, 1), Err(Error::CoincidentPoints)));
    let d = dedupe_points(&c).unwrap();
    assert_eq!(d.len(), 3);
}

#[test]
fn too_few_points_degenerate() {
    let c = line(&[0.0, 0.0, 1.0, 1.0]);
    assert!(matches!(dedupe_points(&c), Err(Error::DegenerateCloud { remaining: 2 })));
    let two = line(&[0.0, 1.0]);
    assert!(matches!(twonn(&two, untrimmed()), Err(Error::DegenerateCloud { remaining: 2 })));
    assert!(mle_levina_bickel(&two, MleParams { k: 2 }).is_err());
    assert_eq!(pca_baseline(&two, 0.95).unwrap().value, 1.0);
}

#[test]
fn pca_recovers_flat_dimension() {
    for d in [1, 3, 7] {
        let c = gen_hypercube(d, 20, 300, d as u64).unwrap();
        assert_eq!(pca_baseline(&c, 0.999).unwrap().value, d as f64);
    }
}

#[test]
fn least_squares_fit_is_close_to_mle() {
    let c = gen_hypercube(4, 16, 1500, 3).unwrap();
    let ml = twonn(&c, TwoNNParams::default()).unwrap().value;
    let ls = twonn(
        &c,
        TwoNNParams {
            fit: TwoNNFit::LeastSquares,
            ..Default::default()
        },
    )
    .unwrap()
    .value;
    assert!(rel_err(ls, ml) < 0.1, "{ls} vs {ml}");
}

#[test]
fn estimates_grow_with_dimension() {
    let mut last = (0.0, 0.0);
    for d in [1, 3, 6, 10] {
        let c = gen_sphere_surface(d, 24, 1500, 1).unwrap();
        let t = twonn(&c, TwoNNParams::default()).unwrap().value;
        let m = mle_levina_bickel(&c, MleParams::default()).unwrap().value;
        assert!(t > last.0 && m > last.1, "d={d}: {t} {m}");
        last = (t, m);
    }
}

fn all_estimators() -> [Estimator; 3] {
    [
        Estimator::Twonn(TwoNNParams::default()),
        Estimator::MleLb(MleParams { k: 5 }),
        Estimator::Pca {
            variance_threshold: 0.9,
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invariant_to_scale(seed in 0u64..1000, n in 20usize..80, dim in 2usize..8, exp in -3i32..4) {
        let c = random_cloud(seed, n, dim);
        let s = 10f64.powi(exp) * 1.37;
        let sc = scaled(&c, s);
        for e in all_estimators() {
            let a = e.estimate(&c).unwrap().value;
            let b = e.estimate(&sc).unwrap().value;
            prop_assert!(rel_err(b, a) <= 1e-9, "{:?}: {} vs {}", e, a, b);
        }
    }

    #[test]
    fn invariant_to_rigid_motion(seed in 0u64..1000, n in 20usize..80, dim in 2usize..8) {
        let c = random_cloud(seed, n, dim);
        let m = rigid_motion(&c, seed + 1, 5.0).unwrap();
        for e in all_estimators() {
            let a = e.estimate(&c).unwrap().value;
            let b = e.estimate(&m).unwrap().value;
            prop_assert!(rel_err(b, a) <= 1e-6, "{:?}: {} vs {}", e, a, b);
        }
    }

    #[test]
    fn invariant_to_permutation(seed in 0u64..1000, n in 20usize..80, dim in 2usize..8) {
        let c = random_cloud(seed, n, dim);
        let p = permuted(&c, seed + 7);
        for e in all_estimators() {
            let a = e.estimate(&c).unwrap().value;
            let b = e.estimate(&p).unwrap().value;
            prop_assert!(rel_err(b, a) <= 1e-12, "{:?}: {} vs {}", e, a, b);
        }
    }

    #[test]
    fn knn_agrees_with_oracle(seed in 0u64..10_000, n in 3usize..=50, dim in 1usize..6) {
        let c = random_cloud(seed, n, dim);
        let oracle = sorted_neighbors(&c);
        let k = (n - 1).min(4);
        let t = knn_distances(&c, k).unwrap();
        for (i, row) in oracle.iter().enumerate() {
            let want: Vec<usize> = row[..k].iter().map(|p| p.1).collect();
            prop_assert_eq!(t.neighbors(i), &want[..]);
        }
    }
}
