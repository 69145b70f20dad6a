//! Monte-Carlo comparison of HC, class-boundary and FNDR thresholds on data
//! drawn from the rare-weak model.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::{self, PValueSample};
use crate::error::{invalid, Error, Result};
use crate::fdr::{self, MixtureFit};
use crate::model::{self, RwModel};
use crate::population::fdr_cutoff;

pub const DEFAULT_REPLICATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "HC")]
    Hc,
    #[serde(rename = "CB")]
    Cb,
    #[serde(rename = "FNDR")]
    Fndr,
    #[serde(rename = "CB_oracle")]
    CbOracle,
    #[serde(rename = "FNDR_oracle")]
    FndrOracle,
    #[serde(rename = "fdr02")]
    Fdr02,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Hc,
        Method::Cb,
        Method::Fndr,
        Method::CbOracle,
        Method::FndrOracle,
        Method::Fdr02,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hc => "HC",
            Method::Cb => "CB",
            Method::Fndr => "FNDR",
            Method::CbOracle => "CB_oracle",
            Method::FndrOracle => "FNDR_oracle",
            Method::Fdr02 => "fdr02",
        }
    }

    /// Local fdr level that defines the cutoff; `None` for HC.
    pub fn fdr_level(&self) -> Option<f64> {
        match self {
            Method::Hc => None,
            Method::Cb | Method::CbOracle => Some(0.5),
            Method::Fndr | Method::FndrOracle => Some(0.8),
            Method::Fdr02 => Some(0.2),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid("method", format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FdrMode {
    Oracle,
    #[default]
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub epsilon: f64,
    pub tau_list: Vec<f64>,
    pub d: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub fdr_mode: FdrMode,
    pub search_fraction: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            tau_list: vec![3.0, 4.0, 5.0, 6.0],
            d: 10_000,
            replications: DEFAULT_REPLICATIONS,
            master_seed: 42,
            methods: vec![Method::Hc, Method::Cb, Method::Fndr],
            fdr_mode: FdrMode::Estimated,
            search_fraction: empirical::DEFAULT_SEARCH_FRACTION,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(invalid("d", "need at least 2 features"));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "need at least 1"));
        }
        if self.tau_list.is_empty() {
            return Err(invalid("tau_list", "empty"));
        }
        for &t in &self.tau_list {
            RwModel::new(self.epsilon, t)?;
        }
        if !(self.search_fraction > 0.0 && self.search_fraction <= 1.0) {
            return Err(invalid("search_fraction", "not in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tp: usize,
    pub tn: usize,
}

impl ErrorCounts {
    pub fn tally(declared: impl Iterator<Item = bool>, truth: &[bool]) -> Self {
        let mut c = ErrorCounts::default();
        for (call, &alt) in declared.zip(truth) {
            match (call, alt) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.fp + self.fn_ + self.tp + self.tn
    }

    pub fn errors(&self) -> usize {
        self.fp + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub rep_index: u64,
    pub tau: f64,
    pub counts: Vec<(Method, ErrorCounts)>,
    /// Present when an estimated-mode method needed a mixture fit.
    pub fit: Option<MixtureFit>,
}

impl TrialResult {
    pub fn get(&self, m: Method) -> Option<ErrorCounts> {
        self.counts.iter().find(|(k, _)| *k == m).map(|(_, c)| *c)
    }

    pub fn fit_failed(&self) -> bool {
        self.fit.is_some_and(|f| !f.converged)
    }
}

/// Per-replication seed: a SplitMix64 mix of the master seed and the index.
///
/// Independent of tau, so every tau in a study sees the same labels and
/// noise within a replication.
pub fn derive_seed(master_seed: u64, rep_index: u64) -> u64 {
    let mut x = master_seed ^ rep_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// z-scale cutoff at local fdr `level` for fitted parameters.
pub fn fitted_cutoff(fit: &MixtureFit, level: f64) -> Result<f64> {
    let m = fit.to_model()?;
    cutoff_for_model(&m, level)
}

/// z-scale cutoff at local fdr `level` for a known model.
pub fn cutoff_for_model(m: &RwModel, level: f64) -> Result<f64> {
    if m.tau() == 0.0 || m.epsilon() == 0.0 {
        // No separable alternative: nothing is declared non-null.
        return Ok(f64::INFINITY);
    }
    if m.epsilon() == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    fdr_cutoff(m, level)
}

pub fn run_trial(m: &RwModel, cfg: &StudyConfig, rep_index: u64) -> Result<TrialResult> {
    let data = model::sample(m, cfg.d, derive_seed(cfg.master_seed, rep_index))?;
    let z = data.z();
    let truth = data.is_alternative();

    let needs_fit = cfg.fdr_mode == FdrMode::Estimated
        && cfg
            .methods
            .iter()
            .any(|k| matches!(k, Method::Cb | Method::Fndr | Method::Fdr02));
    let fit = if needs_fit {
        Some(fdr::fit_mixture(z, fdr::DEFAULT_TOL, fdr::DEFAULT_MAX_ITER)?)
    } else {
        None
    };

    let mut counts = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let c = match method {
            Method::Hc => {
                let p: Vec<f64> = z.iter().map(|&x| model::p_value(x)).collect();
                let hc = empirical::hc_threshold(&PValueSample::new(p.clone())?, cfg.search_fraction)?;
                ErrorCounts::tally(p.iter().map(|&x| hc.selects(x)), truth)
            }
            _ => {
                let level = method.fdr_level().expect("non-HC methods have a level");
                let oracle = matches!(method, Method::CbOracle | Method::FndrOracle)
                    || cfg.fdr_mode == FdrMode::Oracle;
                let cut = match (oracle, &fit) {
                    (true, _) => cutoff_for_model(m, level)?,
                    (false, Some(f)) => fitted_cutoff(f, level)?,
                    (false, None) => unreachable!("fit computed for estimated methods"),
                };
                ErrorCounts::tally(z.iter().map(|&x| x > cut), truth)
            }
        };
        counts.push((method, c));
    }
    Ok(TrialResult {
        rep_index,
        tau: m.tau(),
        counts,
        fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    /// Mean and sample standard deviation (0 for a single value).
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, sd }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Fp,
    Fn,
    Tp,
    Tn,
    Total,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 5] = [
        ErrorKind::Fp,
        ErrorKind::Fn,
        ErrorKind::Tp,
        ErrorKind::Tn,
        ErrorKind::Total,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::Fp => "fp",
            ErrorKind::Fn => "fn",
            ErrorKind::Tp => "tp",
            ErrorKind::Tn => "tn",
            ErrorKind::Total => "total",
        }
    }

    fn of(&self, c: &ErrorCounts) -> f64 {
        (match self {
            ErrorKind::Fp => c.fp,
            ErrorKind::Fn => c.fn_,
            ErrorKind::Tp => c.tp,
            ErrorKind::Tn => c.tn,
            ErrorKind::Total => c.errors(),
        }) as f64
    }
}

/// Summary for one (method, tau) cell. `total` is FP + FN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: Method,
    pub tau: f64,
    pub fp: Stat,
    #[serde(rename = "fn")]
    pub fn_: Stat,
    pub tp: Stat,
    pub tn: Stat,
    pub total: Stat,
}

impl CellSummary {
    pub fn stat(&self, kind: ErrorKind) -> Stat {
        match kind {
            ErrorKind::Fp => self.fp,
            ErrorKind::Fn => self.fn_,
            ErrorKind::Tp => self.tp,
            ErrorKind::Tn => self.tn,
            ErrorKind::Total => self.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub config: StudyConfig,
    pub cells: Vec<CellSummary>,
    /// Trials (over all tau) whose mixture fit hit the iteration cap.
    pub nonconverged_fits: usize,
}

impl StudySummary {
    pub fn cell(&self, method: Method, tau: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.tau == tau)
    }
}

/// Runs every replication for every tau, in parallel over replications.
///
/// Trials are collected by replication index before aggregation, so the
/// result does not depend on scheduling.
pub fn run_study(cfg: &StudyConfig) -> Result<StudySummary> {
    cfg.validate()?;
    let models = cfg
        .tau_list
        .iter()
        .map(|&t| RwModel::new(cfg.epsilon, t))
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<Vec<TrialResult>> = (1..=cfg.replications as u64)
        .into_par_iter()
        .map(|rep| models.iter().map(|m| run_trial(m, cfg, rep)).collect())
        .collect::<Result<_>>()?;
    Ok(summarize(cfg, &trials))
}

/// Aggregates trials indexed as `trials[rep][tau_index]`.
pub fn summarize(cfg: &StudyConfig, trials: &[Vec<TrialResult>]) -> StudySummary {
    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for (ti, &tau) in cfg.tau_list.iter().enumerate() {
            let counts: Vec<ErrorCounts> = trials
                .iter()
                .filter_map(|rep| rep[ti].get(method))
                .collect();
            let stat = |k: ErrorKind| {
                Stat::of(&counts.iter().map(|c| k.of(c)).collect::<Vec<_>>())
            };
            cells.push(CellSummary {
                method,
                tau,
                fp: stat(ErrorKind::Fp),
                fn_: stat(ErrorKind::Fn),
                tp: stat(ErrorKind::Tp),
                tn: stat(ErrorKind::Tn),
                total: stat(ErrorKind::Total),
            });
        }
    }
    let nonconverged_fits = trials.iter().flatten().filter(|t| t.fit_failed()).count();
    StudySummary {
        config: cfg.clone(),
        cells,
        nonconverged_fits,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub method: Method,
    pub tau: f64,
    pub kind: ErrorKind,
    pub mean: f64,
    pub sd: f64,
}

/// One row per (method, tau, kind), method-major.
pub fn emit_error_table(summary: &StudySummary) -> Vec<ErrorRow> {
    summary
        .cells
        .iter()
        .flat_map(|c| {
            ErrorKind::ALL.into_iter().map(move |kind| {
                let s = c.stat(kind);
                ErrorRow {
                    method: c.method,
                    tau: c.tau,
                    kind,
                    mean: s.mean,
                    sd: s.sd,
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> StudyConfig {
        StudyConfig {
            epsilon: 0.05,
            tau_list: vec![2.0, 4.0],
            d: 1_000,
            replications: 6,
            master_seed: 9,
            methods: Method::ALL.to_vec(),
            fdr_mode: FdrMode::Estimated,
            search_fraction: 0.5,
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn seeds_differ_by_replication() {
        let a = derive_seed(42, 1);
        assert_eq!(a, derive_seed(42, 1));
        assert_ne!(a, derive_seed(42, 2));
        assert_ne!(a, derive_seed(43, 1));
    }

    #[test]
    fn counts_partition_features() {
        let cfg = small_cfg();
        let m = RwModel::new(cfg.epsilon, 3.0).unwrap();
        let t = run_trial(&m, &cfg, 1).unwrap();
        assert_eq!(t.counts.len(), Method::ALL.len());
        for (_, c) in &t.counts {
            assert_eq!(c.total(), cfg.d);
        }
    }

    #[test]
    fn null_trial_has_no_positives_to_find() {
        let mut cfg = small_cfg();
        cfg.epsilon = 0.0;
        let m = RwModel::new(0.0, 3.0).unwrap();
        let t = run_trial(&m, &cfg, 3).unwrap();
        for (_, c) in &t.counts {
            assert_eq!(c.tp, 0);
            assert_eq!(c.fn_, 0);
        }
    }

    #[test]
    fn single_replication_has_zero_sd() {
        let mut cfg = small_cfg();
        cfg.replications = 1;
        let s = run_study(&cfg).unwrap();
        let m = RwModel::new(cfg.epsilon, 2.0).unwrap();
        let t = run_trial(&m, &cfg, 1).unwrap();
        let cell = s.cell(Method::Hc, 2.0).unwrap();
        assert_eq!(cell.fp.sd, 0.0);
        assert_eq!(cell.fp.mean, t.get(Method::Hc).unwrap().fp as f64);
    }

    #[test]
    fn study_is_reproducible() {
        let cfg = small_cfg();
        assert_eq!(run_study(&cfg).unwrap(), run_study(&cfg).unwrap());
    }

    #[test]
    fn study_independent_of_thread_count() {
        let cfg = small_cfg();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_study(&cfg).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_study(&cfg).unwrap());
        assert_eq!(one, many);
    }

    #[test]
    fn table_shape() {
        let cfg = small_cfg();
        let s = run_study(&cfg).unwrap();
        let rows = emit_error_table(&s);
        assert_eq!(rows.len(), cfg.methods.len() * cfg.tau_list.len() * 5);
        assert!(rows.iter().all(|r| r.sd >= 0.0 && r.mean >= 0.0 && r.mean <= cfg.d as f64));

        let mut empty = cfg.clone();
        empty.methods.clear();
        assert!(emit_error_table(&run_study(&empty).unwrap()).is_empty());
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = small_cfg();
        cfg.tau_list.clear();
        assert!(run_study(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.d = 1;
        assert!(run_study(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.replications = 0;
        assert!(run_study(&cfg).is_err());
    }
}
