//! The rare-weak normal mixture `(1 - ε) N(0, 1) + ε N(τ, 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::normal;

/// Sparsity `epsilon` (fraction of non-null features) and strength `tau`
/// (mean of the alternative component).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwModel {
    epsilon: f64,
    tau: f64,
}

impl RwModel {
    pub fn new(epsilon: f64, tau: f64) -> Result<Self> {
        if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
            return Err(invalid("epsilon", format!("{epsilon} not in [0, 1]")));
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(invalid("tau", format!("{tau} must be finite and >= 0")));
        }
        Ok(Self { epsilon, tau })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Null proportion `1 - ε`.
    pub fn eta0(&self) -> f64 {
        1.0 - self.epsilon
    }

    pub fn density(&self, z: f64) -> f64 {
        mix_density(z, self)
    }

    pub fn cdf(&self, z: f64) -> f64 {
        mix_cdf(z, self)
    }

    /// Mixture survival `1 - F(z)`, computed from the component tails.
    pub fn sf(&self, z: f64) -> f64 {
        self.eta0() * normal::sf(z) + self.epsilon * normal::sf(z - self.tau)
    }

    pub fn local_fdr(&self, z: f64) -> f64 {
        oracle_local_fdr(z, self)
    }
}

pub fn null_density(z: f64) -> f64 {
    normal::pdf(z)
}

pub fn alt_density(z: f64, tau: f64) -> f64 {
    normal::pdf(z - tau)
}

pub fn mix_density(z: f64, m: &RwModel) -> f64 {
    m.eta0() * null_density(z) + m.epsilon * alt_density(z, m.tau)
}

pub fn null_cdf(z: f64) -> f64 {
    normal::cdf(z)
}

pub fn alt_cdf(z: f64, tau: f64) -> f64 {
    normal::cdf(z - tau)
}

pub fn mix_cdf(z: f64, m: &RwModel) -> f64 {
    m.eta0() * null_cdf(z) + m.epsilon * alt_cdf(z, m.tau)
}

/// One-sided upper-tail p-value `1 - Φ(z)`.
pub fn p_value(z: f64) -> f64 {
    normal::sf(z)
}

/// Posterior null probability `(1 - ε) φ(z) / f(z)`.
///
/// Written as `1 / (1 + ε/(1-ε) · exp(τz - τ²/2))` so that it stays exact
/// in the tails where both densities underflow.
pub fn oracle_local_fdr(z: f64, m: &RwModel) -> f64 {
    if m.epsilon == 0.0 {
        return 1.0;
    }
    if m.epsilon == 1.0 {
        return 0.0;
    }
    let log_odds_alt = (m.epsilon / m.eta0()).ln() + m.tau * z - 0.5 * m.tau * m.tau;
    1.0 / (1.0 + log_odds_alt.exp())
}

/// `τ = √n · μ₀` for a balanced two-class design with `n` samples in total
/// and per-class means `±μ₀` on the signal coordinates.
pub fn tau_from_two_class(n: usize, mu0: f64) -> f64 {
    (n as f64).sqrt() * mu0
}

/// Draws from an [`RwModel`] with their ground-truth labels, sorted by z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    z: Vec<f64>,
    is_alternative: Vec<bool>,
    seed: u64,
}

impl LabeledSample {
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn is_alternative(&self) -> &[bool] {
        &self.is_alternative
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn n_alternative(&self) -> usize {
        self.is_alternative.iter().filter(|&&a| a).count()
    }
}

/// Samples `d` labelled z-scores.
///
/// Each coordinate consumes one uniform (for the label) and one standard
/// normal (for the noise) in a fixed order, so two models sharing a seed
/// share labels and noise: only the alternative shift differs.
pub fn sample(m: &RwModel, d: usize, seed: u64) -> Result<LabeledSample> {
    if d == 0 {
        return Err(invalid("d", "sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(f64, bool)> = (0..d)
        .map(|_| {
            let alt = rng.random::<f64>() < m.epsilon;
            let noise: f64 = rng.sample(StandardNormal);
            (if alt { noise + m.tau } else { noise }, alt)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (z, is_alternative) = pairs.into_iter().unzip();
    Ok(LabeledSample {
        z,
        is_alternative,
        seed,
    })
}
