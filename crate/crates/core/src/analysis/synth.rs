//! Seeded generators: point clouds of known intrinsic dimension and
//! planted memorization experiments with a known dependence on ID.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::DupBuckets;
use crate::model::{
    DupBucket, EstimateParams, ExperimentRecord, IdEstimate, MemorizationOutcome, Method,
    PointCloud,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random injection of `d` latent axes into `ambient` coordinates. This is
/// an orthonormal map, and keeps latent coordinates recognizable.
fn axis_injection(d: usize, ambient: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut axes: Vec<usize> = (0..ambient).collect();
    axes.shuffle(rng);
    axes.truncate(d);
    axes
}

fn embed(latent: &[Vec<f64>], ambient: usize, axes: &[usize], seq_id: String) -> Result<PointCloud> {
    let mut coords = vec![0.0; latent.len() * ambient];
    for (i, p) in latent.iter().enumerate() {
        for (&a, &x) in axes.iter().zip(p) {
            coords[i * ambient + a] = x;
        }
    }
    PointCloud::new(seq_id, ambient, coords, vec![false; latent.len()])
}

/// `n` points uniform in `[0,1]^d`, embedded in `ambient` coordinates.
pub fn gen_hypercube(d: usize, ambient: usize, n: usize, seed: u64) -> Result<PointCloud> {
    if d == 0 || d > ambient {
        return Err(Error::InvalidParameter(format!(
            "hypercube dimension {d} must lie in 1..={ambient}"
        )));
    }
    let mut r = rng(seed);
    let axes = axis_injection(d, ambient, &mut r);
    let latent: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| r.random::<f64>()).collect())
        .collect();
    embed(&latent, ambient, &axes, format!("hypercube-d{d}-D{ambient}-s{seed}"))
}

/// `n` points uniform on the unit `d`-sphere (a `d`-dimensional manifold
/// living in `d + 1` coordinates), centered at the origin of `ambient`
/// space.
pub fn gen_sphere_surface(d: usize, ambient: usize, n: usize, seed: u64) -> Result<PointCloud> {
    if d == 0 || d + 1 > ambient {
        return Err(Error::InvalidParameter(format!(
            "a {d}-sphere needs {} ambient coordinates, got {ambient}",
            d + 1
        )));
    }
    let mut r = rng(seed);
    let axes = axis_injection(d + 1, ambient, &mut r);
    let mut latent = Vec::with_capacity(n);
    while latent.len() < n {
        let g: Vec<f64> = (0..=d).map(|_| r.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            latent.push(g.iter().map(|x| x / norm).collect());
        }
    }
    embed(&latent, ambient, &axes, format!("sphere-d{d}-D{ambient}-s{seed}"))
}

/// Haar-random orthogonal matrix (QR of a Gaussian matrix with the sign of
/// R's diagonal folded into Q).
pub fn random_rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| r.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let rm = qr.r();
    for j in 0..dim {
        if rm[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Applies a seeded random rotation followed by a translation.
pub fn rigid_motion(cloud: &PointCloud, seed: u64, shift: f64) -> Result<PointCloud> {
    let d = cloud.dim();
    let q = random_rotation(d, seed);
    let mut r = rng(seed ^ 0xA5A5_A5A5);
    let t: Vec<f64> = (0..d).map(|_| shift * r.random_range(-1.0..1.0)).collect();
    cloud.map_rows(d, |row| {
        (0..d)
            .map(|i| (0..d).map(|j| q[(i, j)] * row[j]).sum::<f64>() + t[i])
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// `p = 1 / (1 + exp(-eta))`
    #[default]
    Logistic,
    /// `p = clamp(eta, 0, 1)`
    Linear,
}

/// Coefficients of one synthetic model:
/// `eta = intercept + dup_slope * log10(dup) - id_slope * id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub label: String,
    pub intercept: f64,
    pub dup_slope: f64,
    pub id_slope: f64,
}

impl PlantedModel {
    pub fn new(label: impl Into<String>, intercept: f64, dup_slope: f64, id_slope: f64) -> Self {
        PlantedModel {
            label: label.into(),
            intercept,
            dup_slope,
            id_slope,
        }
    }

    pub fn probability(&self, link: Link, dup_count: u64, id: f64) -> f64 {
        let eta = self.intercept + self.dup_slope * (dup_count as f64).log10() - self.id_slope * id;
        match link {
            Link::Logistic => 1.0 / (1.0 + (-eta).exp()),
            Link::Linear => eta.clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedConfig {
    /// Number of synthetic sequences; each is audited by every model.
    pub n: usize,
    pub seed: u64,
    pub models: Vec<PlantedModel>,
    pub id_range: (f64, f64),
    pub buckets: DupBuckets,
    pub link: Link,
    pub prefix_len: usize,
    pub suffix_len: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            n: 10_000,
            seed: 0,
            models: vec![
                PlantedModel::new("0.1B", 1.0, 1.0, 0.5),
                PlantedModel::new("6.0B", 2.5, 1.0, 0.5),
            ],
            id_range: (2.0, 12.0),
            buckets: DupBuckets::default(),
            link: Link::Logistic,
            prefix_len: 100,
            suffix_len: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedExperiment {
    pub config: PlantedConfig,
    pub records: Vec<ExperimentRecord>,
}

/// Draws, per sequence, a duplication count log-uniform over the bucket
/// range, an ID uniform over `id_range`, and for every model a memorized
/// flag with the model's planted probability.
pub fn gen_planted_experiment(config: &PlantedConfig) -> Result<PlantedExperiment> {
    let (lo_id, hi_id) = config.id_range;
    if !(lo_id > 0.0 && hi_id >= lo_id && hi_id.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad id range {:?}", config.id_range)));
    }
    if config.models.is_empty() || config.suffix_len == 0 {
        return Err(Error::InvalidParameter("need at least one model and a suffix".into()));
    }
    let edges = config.buckets.edges();
    let (lo, hi) = (edges[0], *edges.last().unwrap());
    let (llo, lhi) = ((lo as f64).log10(), (hi as f64).log10());
    let mut r = rng(config.seed);
    let width = (config.n.max(1) as f64).log10().floor() as usize + 1;

    let mut records = Vec::with_capacity(config.n * config.models.len());
    for i in 0..config.n {
        let seq_id = format!("planted-{i:0width$}");
        let u: f64 = r.random();
        let dup = (10f64.powf(llo + u * (lhi - llo)).floor() as u64).clamp(lo, hi - 1);
        let bucket: DupBucket = config.buckets.bucket_of(dup).expect("dup drawn inside buckets");
        let id = lo_id + r.random::<f64>() * (hi_id - lo_id);
        let estimate = IdEstimate {
            seq_id: seq_id.clone(),
            method: Method::Twonn,
            value: id,
            n_used: 0,
            params: EstimateParams::default(),
        };
        for m in &config.models {
            let memorized = r.random::<f64>() < m.probability(config.link, dup, id);
            let outcome = MemorizationOutcome {
                seq_id: seq_id.clone(),
                prefix_len: config.prefix_len,
                suffix_len: config.suffix_len,
                generated: vec![u32::from(memorized); config.suffix_len],
                memorized,
                fractional: if memorized { 1.0 } else { 0.0 },
                model_label: m.label.clone(),
            };
            records.push(ExperimentRecord::new(dup, bucket, estimate.clone(), outcome)?);
        }
    }
    Ok(PlantedExperiment {
        config: config.clone(),
        records,
    })
}
