//! Exact nearest-neighbor distances and duplicate-row removal.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::PointCloud;

/// Smallest number of rows any estimator accepts.
pub const MIN_POINTS: usize = 3;

/// Row `i` holds the `k` smallest Euclidean distances from point `i` to the
/// other points, ascending, with the matching neighbor indices.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    n: usize,
    k: usize,
    dist: Vec<f64>,
    index: Vec<usize>,
}

impl NeighborTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.dist[i * self.k..(i + 1) * self.k]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.index[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.dist.chunks_exact(self.k)
    }
}

fn row_key(row: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 are the same coordinate
    row.iter()
        .map(|&x| if x == 0.0 { 0 } else { x.to_bits() })
        .collect()
}

/// Drops special-masked rows, then every row equal to an earlier row.
/// Order of the survivors is preserved.
pub fn dedupe_points(cloud: &PointCloud) -> Result<PointCloud> {
    let (out, _, _) = dedupe_counted(cloud)?;
    Ok(out)
}

/// As [`dedupe_points`], also returning (special rows removed, duplicate rows removed).
pub(crate) fn dedupe_counted(cloud: &PointCloud) -> Result<(PointCloud, usize, usize)> {
    let mut seen = HashSet::with_capacity(cloud.len());
    let mut keep = Vec::with_capacity(cloud.len());
    let mut specials = 0;
    let mut dups = 0;
    for (i, (row, &special)) in cloud.rows().zip(cloud.special_mask()).enumerate() {
        if special {
            specials += 1;
        } else if seen.insert(row_key(row)) {
            keep.push(i);
        } else {
            dups += 1;
        }
    }
    if keep.len() < MIN_POINTS {
        return Err(Error::DegenerateCloud {
            remaining: keep.len(),
        });
    }
    Ok((cloud.select_rows(&keep), specials, dups))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn by_dist_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Brute-force exact k-NN over all rows of `cloud` (special mask ignored;
/// clean the cloud first). Equal distances are ordered by lower row index.
pub fn knn_distances(cloud: &PointCloud, k: usize) -> Result<NeighborTable> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must satisfy 1 <= k <= N-1 with N = {n}"
        )));
    }
    let rows: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.row(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(p, cloud.row(j)), j))
                .collect();
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by_dist_then_index);
                cand.truncate(k);
            }
            cand.sort_unstable_by(by_dist_then_index);
            cand
        })
        .collect();

    let mut dist = Vec::with_capacity(n * k);
    let mut index = Vec::with_capacity(n * k);
    for row in rows {
        for (d2, j) in row {
            if d2 <= 0.0 {
                return Err(Error::CoincidentPoints);
            }
            dist.push(d2.sqrt());
            index.push(j);
        }
    }
    Ok(NeighborTable { n, k, dist, index })
}
