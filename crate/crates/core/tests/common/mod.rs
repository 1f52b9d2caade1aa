//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use idmem::model::{PointCloud, SequenceRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// For every row, all other rows sorted by (distance, index).
pub fn sorted_neighbors(cloud: &PointCloud) -> Vec<Vec<(f64, usize)>> {
    (0..cloud.len())
        .map(|i| {
            let mut all: Vec<(f64, usize)> = (0..cloud.len())
                .filter(|&j| j != i)
                .map(|j| (euclid(cloud.row(i), cloud.row(j)), j))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            all
        })
        .collect()
}

/// TwoNN with no trimming: d = N / sum ln(r2/r1).
pub fn twonn_untrimmed(cloud: &PointCloud) -> f64 {
    let nb = sorted_neighbors(cloud);
    let s: f64 = nb.iter().map(|v| (v[1].0 / v[0].0).ln()).sum();
    nb.len() as f64 / s
}

/// Pooled Levina-Bickel: N(k-1) / sum_i sum_{j<k} ln(T_k / T_j).
pub fn mle_pooled(cloud: &PointCloud, k: usize) -> f64 {
    let nb = sorted_neighbors(cloud);
    let mut s = 0.0;
    for v in &nb {
        let tk = v[k - 1].0;
        for item in v.iter().take(k - 1) {
            s += (tk / item.0).ln();
        }
    }
    (nb.len() * (k - 1)) as f64 / s
}

/// Pairwise equality count for every record.
pub fn dup_oracle(records: &[SequenceRecord]) -> BTreeMap<String, u64> {
    records
        .iter()
        .map(|a| {
            let c = records.iter().filter(|b| b.tokens == a.tokens).count() as u64;
            (a.id.clone(), c)
        })
        .collect()
}

/// Corpus over a tiny vocabulary so duplicates are frequent.
pub fn random_corpus(seed: u64, n: usize, len: usize, vocab: u32) -> Vec<SequenceRecord> {
    let mut r = rng(seed);
    let pool: Vec<Vec<u32>> = (0..(n / 3).max(1))
        .map(|_| (0..len).map(|_| r.random_range(0..vocab)).collect())
        .collect();
    (0..n)
        .map(|i| {
            let tokens = if r.random_bool(0.7) {
                pool[r.random_range(0..pool.len())].clone()
            } else {
                (0..len).map(|_| r.random_range(0..vocab)).collect()
            };
            let mut rec = SequenceRecord::new(format!("r{i:04}"), tokens, 1);
            rec.dup_count = None;
            rec
        })
        .collect()
}

/// Gaussian cloud with f32-representable coordinates.
pub fn random_cloud(seed: u64, n: usize, dim: usize) -> PointCloud {
    let mut r = rng(seed);
    let coords = (0..n * dim)
        .map(|_| {
            let x: f32 = r.sample(rand_distr::StandardNormal);
            f64::from(x)
        })
        .collect();
    PointCloud::new(format!("rand-{seed}"), dim, coords, vec![false; n]).unwrap()
}

pub fn scaled(cloud: &PointCloud, s: f64) -> PointCloud {
    cloud.map_rows(cloud.dim(), |row| row.iter().map(|x| x * s).collect()).unwrap()
}

pub fn permuted(cloud: &PointCloud, seed: u64) -> PointCloud {
    let mut idx: Vec<usize> = (0..cloud.len()).collect();
    let mut r = rng(seed);
    for i in (1..idx.len()).rev() {
        idx.swap(i, r.random_range(0..=i));
    }
    cloud.select_rows(&idx)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
