//! Intrinsic-dimension estimators over a cleaned point cloud.
//!
//! * [`twonn`] uses only the ratio `mu = r2 / r1` of each point's second to
//!   first neighbor distance. Under local uniformity `mu` is Pareto with
//!   `P(mu > x) = x^-d`, so `ln mu` is exponential with rate `d`.
//! * [`mle_levina_bickel`] fits the Poisson-process likelihood of the
//!   first `k` neighbor distances, pooled over points by inverse averaging.
//! * [`pca_baseline`] counts principal components up to a variance share.
//!
//! All three expect a cloud already passed through
//! [`crate::ingest::clean_cloud`] (or [`crate::geometry::dedupe_points`]).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{knn_distances, MIN_POINTS};
use crate::model::{EstimateParams, IdEstimate, Method, PointCloud, TwoNNFit};

pub const DEFAULT_DISCARD_FRACTION: f64 = 0.1;
pub const DEFAULT_MLE_K: usize = 10;
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoNNParams {
    pub discard_fraction: f64,
    pub fit: TwoNNFit,
}

impl Default for TwoNNParams {
    fn default() -> Self {
        TwoNNParams {
            discard_fraction: DEFAULT_DISCARD_FRACTION,
            fit: TwoNNFit::Mle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MleParams {
    pub k: usize,
}

impl Default for MleParams {
    fn default() -> Self {
        MleParams { k: DEFAULT_MLE_K }
    }
}

/// Estimator choice plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Estimator {
    Twonn(TwoNNParams),
    MleLb(MleParams),
    Pca { variance_threshold: f64 },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Twonn(TwoNNParams::default())
    }
}

impl Estimator {
    pub fn estimate(&self, cloud: &PointCloud) -> Result<IdEstimate> {
        match *self {
            Estimator::Twonn(p) => twonn(cloud, p),
            Estimator::MleLb(p) => mle_levina_bickel(cloud, p),
            Estimator::Pca { variance_threshold } => pca_baseline(cloud, variance_threshold),
        }
    }
}

fn require_points(cloud: &PointCloud, min: usize) -> Result<()> {
    if cloud.len() < min {
        Err(Error::DegenerateCloud {
            remaining: cloud.len(),
        })
    } else {
        Ok(())
    }
}

/// Number of ratios dropped from the upper tail. A small slack keeps
/// products like `0.1 * 150 = 15.000000000000002` from rounding up.
fn discard_count(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    (raw - 1e-9 * raw.max(1.0)).ceil().max(0.0) as usize
}

/// TwoNN estimate.
///
/// Ratios are sorted and the `ceil(discard_fraction * N)` largest are
/// dropped, leaving `r = n_used` ratios.
///
/// * `Mle`: the largest ratios are treated as right-censored at the
///   largest kept one, giving `d = r / (sum_{i<=r} ln mu_(i) + (N - r) ln mu_(r))`.
///   With nothing discarded this is `N / sum ln mu`.
/// * `LeastSquares`: regress `-ln(1 - i/(N+1))` on `ln mu_(i)`, `i = 1..=r`,
///   through the origin; the slope is `d`.
pub fn twonn(cloud: &PointCloud, params: TwoNNParams) -> Result<IdEstimate> {
    if !(0.0..1.0).contains(&params.discard_fraction) {
        return Err(Error::InvalidParameter(format!(
            "discard_fraction {} not in [0, 1)",
            params.discard_fraction
        )));
    }
    require_points(cloud, MIN_POINTS)?;
    let n = cloud.len();
    let table = knn_distances(cloud, 2)?;
    let mut log_mu: Vec<f64> = table.rows().map(|r| (r[1] / r[0]).ln()).collect();
    log_mu.sort_by(f64::total_cmp);

    let n_used = n - discard_count(params.discard_fraction, n);
    if n_used == 0 {
        return Err(Error::InvalidParameter("discard_fraction leaves no ratios".into()));
    }
    let kept = &log_mu[..n_used];

    let value = match params.fit {
        TwoNNFit::Mle => {
            let censored = (n - n_used) as f64 * kept[n_used - 1];
            let total: f64 = kept.iter().sum::<f64>() + censored;
            if total <= 0.0 {
                return Err(Error::UndefinedEstimate(
                    "all kept neighbor ratios equal 1".into(),
                ));
            }
            n_used as f64 / total
        }
        TwoNNFit::LeastSquares => {
            let denom = (n + 1) as f64;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (i, &x) in kept.iter().enumerate() {
                let y = -(1.0 - (i + 1) as f64 / denom).ln();
                sxy += x * y;
                sxx += x * x;
            }
            if sxx <= 0.0 {
                return Err(Error::UndefinedEstimate(
                    "all kept neighbor ratios equal 1".into(),
                ));
            }
            sxy / sxx
        }
    };

    Ok(IdEstimate {
        seq_id: cloud.seq_id().to_string(),
        method: Method::Twonn,
        value,
        n_used,
        params: EstimateParams {
            discard_fraction: Some(params.discard_fraction),
            fit: Some(params.fit),
            ..Default::default()
        },
    })
}

/// Levina–Bickel estimate with MacKay–Ghahramani pooling:
/// `d = [ 1/(N(k-1)) * sum_i sum_{j<k} ln(T_k(i) / T_j(i)) ]^-1`.
pub fn mle_levina_bickel(cloud: &PointCloud, params: MleParams) -> Result<IdEstimate> {
    if params.k < 2 {
        return Err(Error::InvalidParameter(format!("k = {} must be >= 2", params.k)));
    }
    require_points(cloud, MIN_POINTS)?;
    let n = cloud.len();
    let k = params.k;
    let table = knn_distances(cloud, k)?;

    let total: f64 = table
        .rows()
        .map(|t| {
            let tk = t[k - 1];
            t[..k - 1].iter().map(|&tj| (tk / tj).ln()).sum::<f64>()
        })
        .sum();
    if total <= 0.0 {
        return Err(Error::UndefinedEstimate(
            "every point has equal neighbor distances".into(),
        ));
    }
    let value = (n * (k - 1)) as f64 / total;

    Ok(IdEstimate {
        seq_id: cloud.seq_id().to_string(),
        method: Method::MleLb,
        value,
        n_used: n,
        params: EstimateParams {
            k: Some(k),
            ..Default::default()
        },
    })
}

/// Relative slack on the cumulative-variance comparison so that
/// floating-point residue in null directions never adds a component.
const VARIANCE_SLACK: f64 = 1e-10;

/// Smallest number of principal components of the centered cloud that
/// explain at least `variance_threshold` of the total variance.
pub fn pca_baseline(cloud: &PointCloud, variance_threshold: f64) -> Result<IdEstimate> {
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance threshold {variance_threshold} not in (0, 1]"
        )));
    }
    require_points(cloud, 2)?;
    let n = cloud.len();
    let d = cloud.dim();

    let mut mean = vec![0.0; d];
    for row in cloud.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| cloud.row(i)[j] - mean[j]);

    // nonzero spectrum of X^T X equals that of X X^T; use the smaller one
    let gram = if n <= d {
        &centered * centered.transpose()
    } else {
        centered.transpose() * &centered
    };
    let mut eig: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|&v| v.max(0.0))
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = eig.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedEstimate("zero total variance".into()));
    }

    let target = variance_threshold * total * (1.0 - VARIANCE_SLACK);
    let mut acc = 0.0;
    let mut m = eig.len();
    for (i, v) in eig.iter().enumerate() {
        acc += v;
        if acc >= target {
            m = i + 1;
            break;
        }
    }

    Ok(IdEstimate {
        seq_id: cloud.seq_id().to_string(),
        method: Method::Pca,
        value: m as f64,
        n_used: n,
        params: EstimateParams {
            variance_threshold: Some(variance_threshold),
            ..Default::default()
        },
    })
}
