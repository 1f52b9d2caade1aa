use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinConfig {
    pub n_bins: usize,
}

impl Default for BinConfig {
    fn default() -> Self {
        BinConfig { n_bins: DEFAULT_BINS }
    }
}

/// Value range and size of one quantile bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSkeleton {
    pub bin_index: usize,
    pub id_min: f64,
    pub id_max: f64,
    pub id_mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub bins: Vec<BinSkeleton>,
    /// Sequence id -> bin index.
    pub assignment: BTreeMap<String, usize>,
}

/// Equal-count binning. Values are ordered by `(value, id)` and cut into
/// `n_bins` contiguous runs whose sizes differ by at most one, the larger
/// runs first.
pub fn quantile_bin(values: &[(String, f64)], config: BinConfig) -> Result<Binning> {
    let k = config.n_bins;
    if k == 0 {
        return Err(Error::InvalidParameter("n_bins must be positive".into()));
    }
    if values.len() < k {
        return Err(Error::InsufficientData(format!(
            "{} values for {k} bins",
            values.len()
        )));
    }
    if let Some((id, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("value {v} for `{id}` is not finite")));
    }
    let mut sorted: Vec<&(String, f64)> = values.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

    let base = sorted.len() / k;
    let extra = sorted.len() % k;
    let mut bins = Vec::with_capacity(k);
    let mut assignment = BTreeMap::new();
    let mut start = 0;
    for b in 0..k {
        let size = base + usize::from(b < extra);
        let run = &sorted[start..start + size];
        start += size;
        for (id, _) in run.iter().map(|p| (&p.0, p.1)) {
            if assignment.insert(id.clone(), b).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        bins.push(BinSkeleton {
            bin_index: b,
            id_min: run[0].1,
            id_max: run[size - 1].1,
            id_mean: run.iter().map(|p| p.1).sum::<f64>() / size as f64,
            count: size,
        });
    }
    Ok(Binning { bins, assignment })
}
