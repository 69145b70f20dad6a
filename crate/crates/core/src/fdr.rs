//! False discovery rates: BH tail-area estimates, a two-component mixture
//! fit with a fixed N(0, 1) null, local fdr/fndr curves and cutoffs.

use serde::{Deserialize, Serialize};

use crate::empirical::PValueSample;
use crate::error::{invalid, Error, Result};
use crate::model::RwModel;
use crate::normal;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const MIN_FIT_SIZE: usize = 10;
const INIT_ETA0: f64 = 0.9;

/// Benjamini-Hochberg estimate `η₀ p_(i) d / i`, made nondecreasing in `i`
/// by a running minimum from the top and capped at 1.
pub fn bh_tail_fdr(s: &PValueSample, eta0: f64) -> Result<Vec<f64>> {
    if !(eta0 > 0.0 && eta0 <= 1.0) {
        return Err(invalid("eta0", format!("{eta0} not in (0, 1]")));
    }
    let p = s.sorted();
    let d = p.len() as f64;
    let mut out: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(k, &x)| eta0 * x * d / (k + 1) as f64)
        .collect();
    let mut running = 1.0f64;
    for v in out.iter_mut().rev() {
        running = running.min(*v);
        *v = running;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub eta0_hat: f64,
    pub tau_hat: f64,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MixtureFit {
    /// The fitted parameters as a model, for oracle-style formulas.
    pub fn to_model(&self) -> Result<RwModel> {
        RwModel::new(1.0 - self.eta0_hat, self.tau_hat)
    }
}

fn ln_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Mixture log-likelihood and, in `weights`, the posterior alternative
/// probability of each point.
fn e_step(z: &[f64], eta0: f64, tau: f64, weights: &mut [f64]) -> f64 {
    let ln_null = eta0.ln();
    let ln_alt = (1.0 - eta0).ln();
    let ln_norm = normal::INV_SQRT_2PI.ln();
    let mut ll = 0.0;
    for (w, &x) in weights.iter_mut().zip(z) {
        let a = ln_null - 0.5 * x * x;
        let b = ln_alt - 0.5 * (x - tau) * (x - tau);
        let total = ln_sum_exp(a, b);
        *w = (b - total).exp();
        ll += total + ln_norm;
    }
    ll
}

fn percentile(z: &[f64], q: f64) -> f64 {
    let mut v = z.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// EM fit of `η₀ N(0,1) + (1-η₀) N(τ,1)` with the null fixed.
///
/// Starts at `η₀ = 0.9`, `τ = max(1, 90th percentile of z)` and stops when
/// the relative change in log-likelihood drops below `tol`. Also returns the
/// log-likelihood after every E-step.
pub fn fit_mixture_traced(z: &[f64], tol: f64, max_iter: usize) -> Result<(MixtureFit, Vec<f64>)> {
    if z.len() < MIN_FIT_SIZE {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SIZE,
            got: z.len(),
        });
    }
    if let Some(bad) = z.iter().find(|x| !x.is_finite()) {
        return Err(invalid("z", format!("non-finite value {bad}")));
    }
    let n = z.len() as f64;
    let mut eta0 = INIT_ETA0;
    let mut tau = percentile(z, 0.9).max(1.0);
    let mut weights = vec![0.0; z.len()];
    let mut trace = Vec::new();
    let mut converged = false;

    let mut ll = e_step(z, eta0, tau, &mut weights);
    trace.push(ll);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let w_sum: f64 = weights.iter().sum();
        let next_eta0 = 1.0 - w_sum / n;
        // Keep the previous τ once the alternative has lost all its mass.
        let next_tau = if w_sum > 0.0 {
            (weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() / w_sum).max(0.0)
        } else {
            tau
        };
        let next_ll = e_step(z, next_eta0, next_tau, &mut weights);
        trace.push(next_ll);
        let change = (next_ll - ll).abs() / ll.abs().max(f64::MIN_POSITIVE);
        eta0 = next_eta0;
        tau = next_tau;
        ll = next_ll;
        if change < tol {
            converged = true;
            break;
        }
    }
    Ok((
        MixtureFit {
            eta0_hat: eta0.clamp(0.0, 1.0),
            tau_hat: tau,
            loglik: ll,
            iterations,
            converged,
        },
        trace,
    ))
}

pub fn fit_mixture(z: &[f64], tol: f64, max_iter: usize) -> Result<MixtureFit> {
    fit_mixture_traced(z, tol, max_iter).map(|(fit, _)| fit)
}

/// Local and tail-area rates on a z grid, upper-tail orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrCurves {
    pub z_grid: Vec<f64>,
    /// Monotone (nonincreasing in z) local fdr.
    pub local_fdr: Vec<f64>,
    /// Local fdr before the isotonic correction.
    pub raw_local_fdr: Vec<f64>,
    /// `Fdr(z) = η₀ S₀(z) / S(z)`.
    pub tail_fdr: Vec<f64>,
    pub local_fndr: Vec<f64>,
    /// `Fndr(z) = (1 - η₀) F_A(z) / F(z)`.
    pub tail_fndr: Vec<f64>,
}

/// Pool-adjacent-violators for a nonincreasing fit with unit weights.
pub fn isotonic_nonincreasing(y: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count); merging keeps block means nonincreasing.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s2, c2) = blocks[blocks.len() - 1];
            let (s1, c1) = blocks[blocks.len() - 2];
            if s1 / c1 as f64 >= s2 / c2 as f64 {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().expect("len > 1");
            *last = (s1 + s2, c1 + c2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

fn ratio_or(num: f64, den: f64, limit: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        limit
    }
}

/// Evaluates every rate of the fitted model on `z_grid` (sorted ascending).
pub fn local_fdr_curve(fit: &MixtureFit, z_grid: &[f64]) -> Result<FdrCurves> {
    let m = fit.to_model()?;
    model_fdr_curve(&m, z_grid)
}

/// [`local_fdr_curve`] for known model parameters.
pub fn model_fdr_curve(m: &RwModel, z_grid: &[f64]) -> Result<FdrCurves> {
    if z_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("z_grid", "grid must be sorted ascending"));
    }
    let eta0 = m.eta0();
    let eps = m.epsilon();
    let raw: Vec<f64> = z_grid.iter().map(|&z| m.local_fdr(z)).collect();
    // Past the last representable tail, the ratio takes its analytic limit:
    // the alternative dominates the upper tail whenever it exists.
    let upper_limit = if eps > 0.0 && m.tau() > 0.0 { 0.0 } else { eta0 };
    let tail_fdr = z_grid
        .iter()
        .map(|&z| ratio_or(eta0 * normal::sf(z), m.sf(z), upper_limit))
        .collect();
    let lower_limit = if eps > 0.0 && m.tau() > 0.0 { 0.0 } else { eps };
    let tail_fndr = z_grid
        .iter()
        .map(|&z| ratio_or(eps * normal::cdf(z - m.tau()), m.cdf(z), lower_limit))
        .collect();
    let local_fdr = isotonic_nonincreasing(&raw);
    let local_fndr = local_fdr.iter().map(|v| 1.0 - v).collect();
    Ok(FdrCurves {
        z_grid: z_grid.to_vec(),
        local_fdr,
        raw_local_fdr: raw,
        tail_fdr,
        local_fndr,
        tail_fndr,
    })
}

/// Smallest z at which local fdr has fallen to `level`, linearly
/// interpolated between grid points; `+inf` if never reached.
pub fn cutoff_from_curve(c: &FdrCurves, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("level", format!("{level} not in (0, 1)")));
    }
    let Some(k) = c.local_fdr.iter().position(|&v| v <= level) else {
        return Ok(f64::INFINITY);
    };
    if k == 0 {
        return Ok(c.z_grid[0]);
    }
    let (z0, z1) = (c.z_grid[k - 1], c.z_grid[k]);
    let (f0, f1) = (c.local_fdr[k - 1], c.local_fdr[k]);
    if f0 == f1 {
        return Ok(z1);
    }
    Ok(z0 + (f0 - level) / (f0 - f1) * (z1 - z0))
}

/// Evenly spaced grid including both ends.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample;
    use crate::population::cb_threshold;

    fn model(e: f64, t: f64) -> RwModel {
        RwModel::new(e, t).unwrap()
    }

    #[test]
    fn bh_hand_example() {
        let s = PValueSample::new(vec![0.01, 0.02, 0.03, 0.04]).unwrap();
        let v = bh_tail_fdr(&s, 1.0).unwrap();
        for x in v {
            assert!((x - 0.04).abs() < 1e-15);
        }
    }

    #[test]
    fn bh_uniform_is_one() {
        let d = 20;
        let s = PValueSample::new((1..=d).map(|i| i as f64 / d as f64).collect()).unwrap();
        for x in bh_tail_fdr(&s, 1.0).unwrap() {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bh_monotone_and_capped() {
        let s = PValueSample::new(vec![0.001, 0.5, 0.02, 0.9, 0.3, 0.3]).unwrap();
        let v = bh_tail_fdr(&s, 0.8).unwrap();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        assert!(v.iter().all(|&x| x <= 1.0));
        assert!(bh_tail_fdr(&s, 0.0).is_err());
    }

    #[test]
    fn isotonic_pools_violators() {
        let y = [0.9, 0.7, 0.8, 0.2, 0.3, 0.1];
        let f = isotonic_nonincreasing(&y);
        let want = [0.9, 0.75, 0.75, 0.25, 0.25, 0.1];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(isotonic_nonincreasing(&[3.0, 2.0, 1.0]), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn fit_needs_data() {
        assert!(fit_mixture(&[1.0; 5], DEFAULT_TOL, 10).is_err());
        assert!(fit_mixture(&[f64::NAN; 20], DEFAULT_TOL, 10).is_err());
    }

    #[test]
    fn fit_recovers_parameters() {
        let s = sample(&model(0.1, 4.0), 10_000, 5).unwrap();
        let fit = fit_mixture(s.z(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(fit.converged);
        assert!((fit.eta0_hat - 0.9).abs() < 0.03, "{fit:?}");
        assert!((fit.tau_hat - 4.0).abs() < 0.3, "{fit:?}");
    }

    #[test]
    fn loglik_never_decreases() {
        for seed in 0..5 {
            let s = sample(&model(0.05, 2.5), 2_000, seed).unwrap();
            let (_, trace) = fit_mixture_traced(s.z(), 1e-12, 300).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn degenerate_null_data_stays_finite() {
        // Pure null: τ is not identifiable, the fit must still terminate.
        let s = sample(&model(0.0, 0.0), 2_000, 3).unwrap();
        let fit = fit_mixture(s.z(), DEFAULT_TOL, 50).unwrap();
        assert!(fit.eta0_hat.is_finite() && fit.tau_hat.is_finite());
        assert!(fit.iterations <= 50);
        if !fit.converged {
            assert_eq!(fit.iterations, 50);
        }
        // Constant data.
        let fit = fit_mixture(&[0.0; 20], DEFAULT_TOL, 50).unwrap();
        assert!(fit.eta0_hat.is_finite() && fit.tau_hat.is_finite());
    }

    #[test]
    fn curve_of_true_model() {
        let m = model(0.1, 2.0);
        let fit = MixtureFit {
            eta0_hat: 0.9,
            tau_hat: 2.0,
            loglik: 0.0,
            iterations: 0,
            converged: true,
        };
        let grid = uniform_grid(-5.0, 9.0, 0.01);
        let c = local_fdr_curve(&fit, &grid).unwrap();
        for (i, &z) in grid.iter().enumerate() {
            assert!((c.raw_local_fdr[i] - m.local_fdr(z)).abs() < 1e-10);
            assert_eq!(c.local_fdr[i] + c.local_fndr[i], 1.0);
        }
    }

    #[test]
    fn tail_fdr_below_local_fdr() {
        for tau in [2.0, 4.0] {
            let m = model(0.1, tau);
            let c = model_fdr_curve(&m, &uniform_grid(-6.0, 40.0, 0.01)).unwrap();
            for i in 0..c.z_grid.len() {
                assert!(c.tail_fdr[i] <= c.local_fdr[i] + 1e-12, "z={}", c.z_grid[i]);
            }
        }
    }

    #[test]
    fn cutoffs_on_oracle_curve() {
        let m = model(0.1, 4.0);
        let c = model_fdr_curve(&m, &uniform_grid(-5.0, 12.0, 0.01)).unwrap();
        let cb = cutoff_from_curve(&c, 0.5).unwrap();
        assert!((cb - 2.5493).abs() < 1e-3);
        let fndr = cutoff_from_curve(&c, 0.8).unwrap();
        let fdr = cutoff_from_curve(&c, 0.2).unwrap();
        assert!(fndr <= cb && cb <= fdr);
        assert!(cutoff_from_curve(&c, 1.0).is_err());
    }

    #[test]
    fn all_null_curve_never_crosses() {
        let fit = MixtureFit {
            eta0_hat: 1.0,
            tau_hat: 2.0,
            loglik: 0.0,
            iterations: 1,
            converged: true,
        };
        let c = local_fdr_curve(&fit, &uniform_grid(-5.0, 10.0, 0.1)).unwrap();
        for level in [0.2, 0.5, 0.8, 0.99] {
            assert_eq!(cutoff_from_curve(&c, level).unwrap(), f64::INFINITY);
        }
    }

    #[test]
    fn cutoff_converges_with_grid() {
        let m = model(0.1, 4.0);
        let exact = cb_threshold(&m).unwrap();
        // Offset the grid so no point lands on the boundary.
        let err = |h: f64| {
            let c = model_fdr_curve(&m, &uniform_grid(-5.0 + h / 3.0, 12.0, h)).unwrap();
            (cutoff_from_curve(&c, 0.5).unwrap() - exact).abs()
        };
        let (coarse, fine) = (err(0.2), err(0.1));
        assert!(coarse > 0.0);
        assert!(fine <= 0.5 * coarse, "{coarse} {fine}");
    }
}
