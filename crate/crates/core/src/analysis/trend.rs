use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line of memorization rate on `log10(dup_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Trend summary of one series. Fields are `None` where the statistic is
/// undefined for the data (one distinct duplication count, constant rates).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrendStats {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub spearman_rho: Option<f64>,
}

impl TrendStats {
    pub fn new(fit: Option<LogLinearFit>, spearman_rho: Option<f64>) -> Self {
        TrendStats {
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            r_squared: fit.map(|f| f.r_squared),
            spearman_rho,
        }
    }
}

pub fn loglinear_fit(points: &[(u64, f64)]) -> Result<LogLinearFit> {
    let weighted: Vec<(u64, f64, f64)> = points.iter().map(|&(n, r)| (n, r, 1.0)).collect();
    loglinear_fit_weighted(&weighted)
}

/// Weighted OLS on `(dup_count, rate, weight)`. Fitting per-count rates
/// weighted by their sample size gives the same line as fitting every
/// individual outcome.
pub fn loglinear_fit_weighted(points: &[(u64, f64, f64)]) -> Result<LogLinearFit> {
    if let Some(&(n, _, _)) = points.iter().find(|p| p.0 == 0) {
        return Err(Error::InvalidParameter(format!("dup_count {n} < 1")));
    }
    let w_sum: f64 = points.iter().map(|p| p.2).sum();
    if w_sum.is_nan() || w_sum <= 0.0 {
        return Err(Error::InsufficientData("no weight".into()));
    }
    let x = |n: u64| (n as f64).log10();
    let mx = points.iter().map(|p| p.2 * x(p.0)).sum::<f64>() / w_sum;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / w_sum;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(n, y, w) in points {
        let dx = x(n) - mx;
        let dy = y - my;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    let distinct = {
        let mut xs: Vec<u64> = points.iter().filter(|p| p.2 > 0.0).map(|p| p.0).collect();
        xs.sort_unstable();
        xs.dedup();
        xs.len()
    };
    if distinct < 2 || sxx <= 0.0 {
        return Err(Error::InsufficientData(
            "log-linear fit needs at least 2 distinct dup counts".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|&(n, y, w)| {
            let e = y - (intercept + slope * x(n));
            w * e * e
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LogLinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "spearman on {} and {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData("spearman needs at least 3 pairs".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedEstimate(
            "spearman correlation of a constant series".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
