//! Population-level decision thresholds on the z-scale.
//!
//! All thresholds are upper-tail cutoffs: a feature is called non-null when
//! its z-score exceeds the threshold.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{oracle_local_fdr, RwModel};
use crate::normal;
use crate::optimize::{find_root, golden_section_max};

/// Grid spacing of the coarse scan that seeds golden-section refinement.
pub const HC_GRID_STEP: f64 = 1e-3;
pub const HC_SEARCH_LOWER: f64 = -2.0;
/// Upper end of the scan is `tau + HC_SEARCH_UPPER_OFFSET`.
pub const HC_SEARCH_UPPER_OFFSET: f64 = 12.0;
const HC_REFINE_TOL: f64 = 1e-10;
/// Relative tolerance under which two separated grid maxima count as ties.
const HC_TIE_RTOL: f64 = 1e-9;

/// Dimension used to convert an `r` offset into a `tau` shift when none is
/// given.
pub const DEFAULT_DIMENSION: usize = 10_000;

fn require_signal(m: &RwModel) -> Result<()> {
    if m.tau() == 0.0 {
        Err(Error::NoThreshold)
    } else {
        Ok(())
    }
}

/// Maximizer of `|F_A - F_0|`, where the two densities cross: `τ/2`.
pub fn ks_threshold(m: &RwModel) -> Result<f64> {
    require_signal(m)?;
    Ok(0.5 * m.tau())
}

/// Class boundary, where local fdr = 1/2.
///
/// `+inf` for ε = 0 and `-inf` for ε = 1.
pub fn cb_threshold(m: &RwModel) -> Result<f64> {
    require_signal(m)?;
    let e = m.epsilon();
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    if e == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(0.5 * m.tau() + ((1.0 - e) / e).ln() / m.tau())
}

/// The z at which the oracle local fdr equals `q`.
pub fn fdr_cutoff(m: &RwModel, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid("q", format!("{q} not in (0, 1)")));
    }
    if m.epsilon() == 1.0 {
        return Err(invalid("epsilon", "fdr cutoffs need epsilon < 1"));
    }
    require_signal(m)?;
    let e = m.epsilon();
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    let log_ratio = ((1.0 - e) / e).ln() + ((1.0 - q) / q).ln();
    Ok(0.5 * m.tau() + log_ratio / m.tau())
}

/// `S_A(z) - S_0(z)`, taken from whichever tail keeps the operands small.
fn tail_gap(z: f64, tau: f64) -> f64 {
    if z >= 0.5 * tau {
        normal::sf(z - tau) - normal::sf(z)
    } else {
        normal::cdf(z) - normal::cdf(z - tau)
    }
}

fn mixture_tails(z: f64, m: &RwModel) -> Result<(f64, f64)> {
    let s = m.sf(z);
    let f = m.cdf(z);
    if !(s > 0.0 && f > 0.0) {
        return Err(Error::UndefinedPoint { z, survival: s });
    }
    Ok((s, f))
}

/// Population HC objective `(S_A - S_0)² / (S (1 - S))` on the z-scale.
///
/// The constant factor `d (1 - η₀)²` is dropped; it does not move the
/// maximizer.
pub fn population_hc_objective(z: f64, m: &RwModel) -> Result<f64> {
    let (s, f) = mixture_tails(z, m)?;
    let gap = tail_gap(z, m.tau());
    Ok(gap * gap / (s * f))
}

/// The same objective written on the p-value scale, `p = 1 - Φ(z)`:
/// `(F_A(p) - p)² / (F(p) (1 - F(p)))` with `F_A(p) = 1 - Φ(Φ⁻¹(1-p) - τ)`.
pub fn population_hc_objective_p_scale(p: f64, m: &RwModel) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("{p} not in (0, 1)")));
    }
    let z = normal::inverse_sf(p);
    let fa = normal::sf(z - m.tau());
    let f = m.eta0() * p + m.epsilon() * fa;
    let g = 1.0 - f;
    if !(f > 0.0 && g > 0.0) {
        return Err(Error::UndefinedPoint { z, survival: f });
    }
    Ok((fa - p).powi(2) / (f * g))
}

/// Both sides of the HC first-order condition in survival form,
///
/// `f₀ {2S(1-S) + (S_A-S_0)(1-2S) η₀} = f_A {2S(1-S) - (S_A-S_0)(1-2S)(1-η₀)}`.
pub fn hc_stationarity_sides(z: f64, m: &RwModel) -> Result<(f64, f64)> {
    let (s, f) = mixture_tails(z, m)?;
    let gap = tail_gap(z, m.tau());
    let q = 2.0 * s * f;
    // 1 - 2S = F - S
    let skew = gap * (f - s);
    let lhs = normal::pdf(z) * (q + skew * m.eta0());
    let rhs = normal::pdf(z - m.tau()) * (q - skew * m.epsilon());
    Ok((lhs, rhs))
}

/// LHS - RHS of the HC first-order condition; zero at interior stationary
/// points of [`population_hc_objective`].
pub fn hc_stationarity_residual(z: f64, m: &RwModel) -> Result<f64> {
    let (lhs, rhs) = hc_stationarity_sides(z, m)?;
    Ok(lhs - rhs)
}

/// Location and value of the population HC maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcMaximum {
    pub z: f64,
    pub objective: f64,
    /// Another, separated maximum reached the same value within tolerance;
    /// `z` is then the smallest of them.
    pub multiple: bool,
}

/// Global maximizer of the population HC objective.
///
/// Scans `[-2, τ + 12]` on a 1e-3 grid, picks the smallest grid maximum, and
/// refines it by golden-section search within the neighbouring grid cells,
/// then by a root of the first-order condition when one is bracketed there.
pub fn hc_maximum(m: &RwModel) -> Result<HcMaximum> {
    require_signal(m)?;
    let hi = m.tau() + HC_SEARCH_UPPER_OFFSET;
    let n = ((hi - HC_SEARCH_LOWER) / HC_GRID_STEP).round() as usize;
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let z = HC_SEARCH_LOWER + i as f64 * HC_GRID_STEP;
            (z, population_hc_objective(z, m).unwrap_or(f64::NEG_INFINITY))
        })
        .collect();

    let best = grid
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::UndefinedPoint {
            z: HC_SEARCH_LOWER,
            survival: m.sf(HC_SEARCH_LOWER),
        });
    }
    let cutoff = best * (1.0 - HC_TIE_RTOL);
    // Local maxima of the grid that reach the global value.
    let peaks: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let v = grid[i].1;
            let left = if i > 0 { grid[i - 1].1 } else { f64::NEG_INFINITY };
            let right = grid.get(i + 1).map_or(f64::NEG_INFINITY, |g| g.1);
            v >= cutoff && v >= left && v >= right
        })
        .collect();
    let k = peaks[0];
    let multiple = peaks.iter().any(|&j| j > k + 2);

    let lo = grid[k.saturating_sub(1)].0;
    let up = grid[(k + 1).min(grid.len() - 1)].0;
    let objective = |z: f64| population_hc_objective(z, m).unwrap_or(f64::NEG_INFINITY);
    let (z, value) = golden_section_max(objective, lo, up, HC_REFINE_TOL);
    let (z, value) = if value >= grid[k].1 {
        (z, value)
    } else {
        grid[k]
    };
    // Near a flat top the objective only resolves z to about 1e-8; the
    // first-order condition keeps full precision.
    let residual = |x: f64| hc_stationarity_residual(x, m).unwrap_or(f64::NAN);
    let (z, value) = match find_root(residual, lo, up, 0.0) {
        Some(r) if objective(r) >= value * (1.0 - 1e-12) => (r, objective(r).max(value)),
        _ => (z, value),
    };
    Ok(HcMaximum {
        z,
        objective: value,
        multiple,
    })
}

/// Population HC decision threshold `z^HC`.
pub fn hc_threshold(m: &RwModel) -> Result<f64> {
    hc_maximum(m).map(|h| h.z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdrCutoff {
    pub q: f64,
    pub z: f64,
}

/// Every threshold for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub epsilon: f64,
    pub tau: f64,
    pub z_ks: f64,
    pub z_hc: f64,
    pub z_cb: f64,
    pub hc_multiple: bool,
    pub fdr_cutoffs: Vec<FdrCutoff>,
}

impl ThresholdSet {
    pub fn fdr_cutoff(&self, q: f64) -> Option<f64> {
        self.fdr_cutoffs.iter().find(|c| c.q == q).map(|c| c.z)
    }
}

pub fn threshold_set(m: &RwModel, q_levels: &[f64]) -> Result<ThresholdSet> {
    let hc = hc_maximum(m)?;
    let z_cb = cb_threshold(m)?;
    let fdr_cutoffs = q_levels
        .iter()
        .map(|&q| {
            // q = 1/2 is the class boundary by definition; reuse it exactly.
            let z = if q == 0.5 { z_cb } else { fdr_cutoff(m, q)? };
            Ok(FdrCutoff { q, z })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdSet {
        epsilon: m.epsilon(),
        tau: m.tau(),
        z_ks: ks_threshold(m)?,
        z_hc: hc.z,
        z_cb,
        hc_multiple: hc.multiple,
        fdr_cutoffs,
    })
}

/// Signal strength at which `r` sits `delta_r` above the identification
/// boundary `r = β`: `τ² / 2 = -log ε + delta_r · log d`.
pub fn tau_above_identification(epsilon: f64, delta_r: f64, d: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} not in (0, 1)")));
    }
    if !delta_r.is_finite() || delta_r < 0.0 {
        return Err(invalid("delta_r", format!("{delta_r} must be >= 0")));
    }
    if d < 2 {
        return Err(invalid("d", "dimension must be at least 2"));
    }
    Ok((2.0 * (-epsilon.ln() + delta_r * (d as f64).ln())).sqrt())
}

/// `z^HC / z^CB` at (or `delta_r` above) the identification boundary, with
/// the r-offset measured against `d` = [`DEFAULT_DIMENSION`].
pub fn hc_cb_ratio_at_boundary(epsilon: f64, delta_r: f64) -> Result<f64> {
    hc_cb_ratio_at_boundary_with_dimension(epsilon, delta_r, DEFAULT_DIMENSION)
}

pub fn hc_cb_ratio_at_boundary_with_dimension(
    epsilon: f64,
    delta_r: f64,
    d: usize,
) -> Result<f64> {
    let tau = tau_above_identification(epsilon, delta_r, d)?;
    let m = RwModel::new(epsilon, tau)?;
    Ok(hc_threshold(&m)? / cb_threshold(&m)?)
}

/// Oracle local fdr evaluated at the population HC threshold.
pub fn local_fdr_at_hc(m: &RwModel) -> Result<f64> {
    Ok(oracle_local_fdr(hc_threshold(m)?, m))
}
