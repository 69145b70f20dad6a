//! Empirical Higher Criticism on a finite set of p-values.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_SEARCH_FRACTION: f64 = 0.5;

/// Ascending p-values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueSample {
    p_sorted: Vec<f64>,
}

impl PValueSample {
    /// Validates and sorts. Duplicates are kept.
    pub fn new(mut p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(invalid("p", format!("{bad} not in [0, 1]")));
        }
        p.sort_by(f64::total_cmp);
        Ok(Self { p_sorted: p })
    }

    pub fn from_z_scores(z: &[f64]) -> Result<Self> {
        Self::new(z.iter().map(|&z| crate::model::p_value(z)).collect())
    }

    pub fn sorted(&self) -> &[f64] {
        &self.p_sorted
    }

    pub fn len(&self) -> usize {
        self.p_sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_sorted.is_empty()
    }
}

/// Empirical distribution function `i/d` for `p_(i) <= x < p_(i+1)`.
pub fn ecdf(s: &PValueSample, x: f64) -> f64 {
    let i = s.p_sorted.partition_point(|&p| p <= x);
    i as f64 / s.len() as f64
}

/// `|i/d - p_(i)| / sqrt((i/d)(1 - i/d)/d)` for `i = 1..d-1`.
///
/// Entry `k` of the result corresponds to order statistic `i = k + 1`.
pub fn hc_objective_at_order_stats(s: &PValueSample) -> Result<Vec<f64>> {
    let d = s.len();
    if d < 2 {
        return Err(Error::InsufficientData { needed: 2, got: d });
    }
    let df = d as f64;
    Ok(s.p_sorted[..d - 1]
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let f = (k + 1) as f64 / df;
            (f - p).abs() / (f * (1.0 - f) / df).sqrt()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcResult {
    /// `x^HC`, the p-value at the maximizing order statistic.
    pub threshold: f64,
    pub hc_star: f64,
    /// 1-based index `i` of the maximizing order statistic.
    pub argmax_index: usize,
    /// Objective at `i = 1..=m`, `m` the last index searched.
    pub objective_values: Vec<f64>,
}

impl HcResult {
    /// Number of features the HC rule calls significant: the order
    /// statistics `1..=argmax_index`.
    pub fn n_selected(&self) -> usize {
        self.argmax_index
    }

    /// HC selection for an arbitrary p-value: `p <= x^HC`.
    pub fn selects(&self, p: f64) -> bool {
        p <= self.threshold
    }
}

/// Maximizes the objective over `i in 1..=floor(search_fraction * d)`,
/// capped at `d - 1`. Ties go to the smallest `i`.
pub fn hc_threshold(s: &PValueSample, search_fraction: f64) -> Result<HcResult> {
    if !(search_fraction > 0.0 && search_fraction <= 1.0) {
        return Err(invalid(
            "search_fraction",
            format!("{search_fraction} not in (0, 1]"),
        ));
    }
    let d = s.len();
    if d < 2 {
        return Err(Error::InsufficientData { needed: 2, got: d });
    }
    let last = ((search_fraction * d as f64).floor() as usize).clamp(1, d - 1);
    let mut values = hc_objective_at_order_stats(s)?;
    values.truncate(last);
    let (k, &hc_star) = values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (k, v)| match best {
            Some((_, b)) if *v <= *b => best,
            _ => Some((k, v)),
        })
        .expect("at least one order statistic is searched");
    Ok(HcResult {
        threshold: s.p_sorted[k],
        hc_star,
        argmax_index: k + 1,
        objective_values: values,
    })
}

/// `p_i < threshold`, in the order of `p`.
pub fn classify(p: &[f64], threshold: f64) -> Vec<bool> {
    p.iter().map(|&x| x < threshold).collect()
}
