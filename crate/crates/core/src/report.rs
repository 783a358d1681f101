//! Summaries for experiment reports.

use serde::{Deserialize, Serialize};

use crate::bounds::PkDistribution;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { count: values.len(), mean: values.iter().sum::<f64>() / values.len() as f64, min, max })
    }

    /// Number of values at least `threshold`.
    pub fn count_at_least(values: &[f64], threshold: f64) -> usize {
        values.iter().filter(|&&v| v >= threshold).count()
    }

    /// Number of values at most `threshold`.
    pub fn count_at_most(values: &[f64], threshold: f64) -> usize {
        values.iter().filter(|&&v| v <= threshold).count()
    }
}

/// Worst relative deviation of an empirical degree law from `p_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeLawFit {
    pub k_lo: usize,
    pub k_hi: usize,
    pub max_rel_error: f64,
    pub worst_k: usize,
}

/// Compares `#{v : d_v = k} / n` pooled over `degree_lists` with `law` on `k_lo..=k_hi`.
pub fn degree_law_fit(degree_lists: &[Vec<usize>], law: &PkDistribution, k_lo: usize, k_hi: usize) -> Result<DegreeLawFit> {
    if k_lo > k_hi || k_hi > law.k_max() {
        return Err(Error::InvalidParameter(format!("degree range {k_lo}..={k_hi} outside 0..={}", law.k_max())));
    }
    let total: usize = degree_lists.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::InvalidParameter("no vertices to compare".into()));
    }
    let mut counts = vec![0usize; k_hi + 1];
    for &d in degree_lists.iter().flatten() {
        if d <= k_hi {
            counts[d] += 1;
        }
    }
    let mut fit = DegreeLawFit { k_lo, k_hi, max_rel_error: 0.0, worst_k: k_lo };
    for (k, &c) in counts.iter().enumerate().skip(k_lo) {
        let p = law.get(k).unwrap_or(0.0);
        let rel = if p > 0.0 { (c as f64 / total as f64 - p).abs() / p } else if c > 0 { f64::INFINITY } else { 0.0 };
        if rel > fit.max_rel_error {
            fit.max_rel_error = rel;
            fit.worst_k = k;
        }
    }
    Ok(fit)
}
