use std::path::PathBuf;

use clap::Args;
use rareweak::empirical::{self, PValueSample};
use rareweak::fdr::{self, uniform_grid};
use rareweak::model::{self, RwModel};
use rareweak::normal;
use rareweak::phase::{self, PhaseCoords};
use rareweak::population::{self, DEFAULT_DIMENSION};
use rareweak::sim::{self, FdrMode, Method, StudyConfig};

use crate::input::{read_values, ValueKind};
use crate::output::{Cell, OutputDocument, Table};
use crate::{CliError, Outcome, OutputArgs};

pub const TABLE_TAUS: [f64; 3] = [2.0, 4.0, 6.0];
pub const TABLE_EPSILONS: [f64; 5] = [0.0, 0.001, 0.01, 0.1, 0.5];

fn level_label(q: f64) -> String {
    format!("fdr_{q}")
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdsArgs {
    #[arg(long, required_unless_present = "table2a")]
    pub epsilon: Option<f64>,
    #[arg(long, required_unless_present = "table2a")]
    pub tau: Option<f64>,
    /// Local fdr levels for extra cutoffs.
    #[arg(long = "q", value_delimiter = ',', default_values_t = [0.2, 0.5, 0.8])]
    pub q_levels: Vec<f64>,
    /// Every combination of tau in {2, 4, 6} and epsilon in {0, 0.001, 0.01, 0.1, 0.5}.
    #[arg(long, conflicts_with_all = ["epsilon", "tau"])]
    pub table2a: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn thresholds(a: &ThresholdsArgs) -> Result<OutputDocument, CliError> {
    if a.table2a {
        let mut t = Table::new(
            "thresholds",
            &["tau", "epsilon", "z_ks", "z_hc", "z_cb", "hc_multiple", "identification_possible"],
        );
        for tau in TABLE_TAUS {
            for eps in TABLE_EPSILONS {
                let m = RwModel::new(eps, tau)?;
                let s = population::threshold_set(&m, &[])?;
                t.push(vec![
                    tau.into(),
                    eps.into(),
                    s.z_ks.into(),
                    s.z_hc.into(),
                    s.z_cb.into(),
                    s.hc_multiple.into(),
                    phase::identification_possible(&m).into(),
                ]);
            }
        }
        return Ok(OutputDocument::single(t));
    }
    let (Some(eps), Some(tau)) = (a.epsilon, a.tau) else {
        return Err(CliError::Usage("--epsilon and --tau are required".into()));
    };
    let m = RwModel::new(eps, tau)?;
    let s = population::threshold_set(&m, &a.q_levels)?;
    let mut cols: Vec<String> = ["tau", "epsilon", "z_ks", "z_hc", "z_cb", "hc_multiple"]
        .iter()
        .map(|c| c.to_string())
        .collect();
    cols.extend(a.q_levels.iter().map(|&q| level_label(q)));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("thresholds", &col_refs);
    let mut row: Vec<Cell> = vec![
        tau.into(),
        eps.into(),
        s.z_ks.into(),
        s.z_hc.into(),
        s.z_cb.into(),
        s.hc_multiple.into(),
    ];
    row.extend(s.fdr_cutoffs.iter().map(|c| Cell::Num(c.z)));
    t.push(row);
    Ok(OutputDocument::single(t))
}

#[derive(Debug, Clone, Args)]
pub struct HcArgs {
    /// Input file with one value per line, or `-` for standard input.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ValueKind::PValues)]
    pub kind: ValueKind,
    #[arg(long, default_value_t = empirical::DEFAULT_SEARCH_FRACTION)]
    pub search_fraction: f64,
    /// Add the objective at every searched order statistic.
    #[arg(long)]
    pub emit_objective: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn hc(a: &HcArgs) -> Result<OutputDocument, CliError> {
    let input = read_values(&a.input, a.kind)?;
    hc_from_values(&input.values, a.kind, a.search_fraction, a.emit_objective)
}

pub fn hc_from_values(
    values: &[f64],
    kind: ValueKind,
    search_fraction: f64,
    emit_objective: bool,
) -> Result<OutputDocument, CliError> {
    let p: Vec<f64> = match kind {
        ValueKind::PValues => values.to_vec(),
        ValueKind::ZScores => {
            eprintln!("note: converting z-scores to p-values with p = 1 - Phi(z)");
            values.iter().map(|&z| model::p_value(z)).collect()
        }
    };
    if p.len() < 2 {
        return Err(CliError::Usage(format!(
            "empirical HC needs at least 2 values, got {}",
            p.len()
        )));
    }
    let sample = PValueSample::new(p.clone())?;
    let r = empirical::hc_threshold(&sample, search_fraction)?;

    let mut summary = Table::new(
        "hc",
        &["d", "threshold", "z_threshold", "hc_star", "argmax_index", "n_selected", "search_fraction"],
    );
    summary.push(vec![
        p.len().into(),
        r.threshold.into(),
        normal::inverse_sf(r.threshold).into(),
        r.hc_star.into(),
        r.argmax_index.into(),
        p.iter().filter(|&&x| r.selects(x)).count().into(),
        search_fraction.into(),
    ]);
    let mut selected = Table::new("significant", &["index", "value", "p"]);
    for (i, (&v, &x)) in values.iter().zip(&p).enumerate() {
        if r.selects(x) {
            selected.push(vec![(i + 1).into(), v.into(), x.into()]);
        }
    }
    let mut doc = OutputDocument {
        tables: vec![summary, selected],
    };
    if emit_objective {
        let mut obj = Table::new("objective", &["i", "p", "hc"]);
        for (k, &v) in r.objective_values.iter().enumerate() {
            obj.push(vec![(k + 1).into(), sample.sorted()[k].into(), v.into()]);
        }
        doc.tables.push(obj);
    }
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Estimated,
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct FdrArgs {
    /// Input file with one value per line, or `-` for standard input.
    /// Not needed in oracle mode.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ValueKind::ZScores)]
    pub kind: ValueKind,
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 0.8])]
    pub levels: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Estimated)]
    pub mode: ModeArg,
    /// True sparsity for oracle mode.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// True signal strength for oracle mode.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = fdr::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = fdr::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Add local/tail fdr and fndr curves on a z grid.
    #[arg(long)]
    pub emit_curves: bool,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Add Benjamini-Hochberg tail-area estimates per order statistic.
    #[arg(long)]
    pub emit_bh: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn fdr(a: &FdrArgs) -> Result<Outcome, CliError> {
    let values = match &a.input {
        Some(path) => Some(read_values(path, a.kind)?),
        None => None,
    };
    let z: Option<Vec<f64>> = values.as_ref().map(|t| match a.kind {
        ValueKind::ZScores => t.values.clone(),
        ValueKind::PValues => {
            eprintln!("note: converting p-values to z-scores with z = Phi^-1(1 - p)");
            t.values.iter().map(|&p| normal::inverse_sf(p)).collect()
        }
    });
    if let Some(z) = &z {
        if z.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Usage("p-values of exactly 0 or 1 have no finite z-score".into()));
        }
    }
    fdr_from_z(z.as_deref(), a)
}

pub fn fdr_from_z(z: Option<&[f64]>, a: &FdrArgs) -> Result<Outcome, CliError> {
    for &l in &a.levels {
        if !(l > 0.0 && l < 1.0) {
            return Err(CliError::Usage(format!("level {l} not in (0, 1)")));
        }
    }
    if a.grid_step.is_nan() || a.grid_step <= 0.0 {
        return Err(CliError::Usage("--grid-step must be positive".into()));
    }
    let mut fit_table = Table::new(
        "fit",
        &["mode", "eta0_hat", "tau_hat", "loglik", "iterations", "converged"],
    );
    let mut failure = None;
    let m = match a.mode {
        ModeArg::Oracle => {
            let (Some(e), Some(t)) = (a.epsilon, a.tau) else {
                return Err(CliError::Usage("oracle mode needs --epsilon and --tau".into()));
            };
            let m = RwModel::new(e, t)?;
            fit_table.push(vec![
                "oracle".into(),
                m.eta0().into(),
                m.tau().into(),
                Cell::Num(f64::NAN),
                0usize.into(),
                true.into(),
            ]);
            m
        }
        ModeArg::Estimated => {
            let Some(z) = z else {
                return Err(CliError::Usage("estimated mode needs an input file".into()));
            };
            let fit = fdr::fit_mixture(z, a.tol, a.max_iter)?;
            fit_table.push(vec![
                "estimated".into(),
                fit.eta0_hat.into(),
                fit.tau_hat.into(),
                fit.loglik.into(),
                fit.iterations.into(),
                fit.converged.into(),
            ]);
            if !fit.converged {
                failure = Some(CliError::Computation(format!(
                    "mixture fit did not converge in {} iterations",
                    fit.iterations
                )));
            }
            fit.to_model()?
        }
    };

    let mut cutoffs = Table::new("cutoffs", &["level", "z", "p"]);
    for &level in &a.levels {
        let zc = sim::cutoff_for_model(&m, level)?;
        cutoffs.push(vec![level.into(), zc.into(), model::p_value(zc).into()]);
    }
    let mut doc = OutputDocument {
        tables: vec![fit_table, cutoffs],
    };

    if a.emit_curves {
        let (lo, hi) = match z {
            Some(z) => {
                let lo = z.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo.floor(), hi.ceil())
            }
            None => (-5.0, m.tau() + 5.0),
        };
        let c = fdr::model_fdr_curve(&m, &uniform_grid(lo, hi, a.grid_step))?;
        let mut t = Table::new(
            "curves",
            &["z", "local_fdr", "local_fndr", "tail_fdr", "tail_fndr"],
        );
        for i in 0..c.z_grid.len() {
            t.push(vec![
                c.z_grid[i].into(),
                c.local_fdr[i].into(),
                c.local_fndr[i].into(),
                c.tail_fdr[i].into(),
                c.tail_fndr[i].into(),
            ]);
        }
        doc.tables.push(t);
    }

    if a.emit_bh {
        let Some(z) = z else {
            return Err(CliError::Usage("--emit-bh needs an input file".into()));
        };
        let s = PValueSample::from_z_scores(z)?;
        let bh = fdr::bh_tail_fdr(&s, 1.0)?;
        let mut t = Table::new("bh", &["i", "p", "tail_fdr"]);
        for (k, (&p, &f)) in s.sorted().iter().zip(&bh).enumerate() {
            t.push(vec![(k + 1).into(), p.into(), f.into()]);
        }
        doc.tables.push(t);
    }
    Ok(Outcome {
        document: doc,
        failure,
    })
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    pub d: usize,
    /// Spacing of the beta grid on [1/2, 1].
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Classify a single model instead of printing the boundary table.
    #[arg(long, requires = "tau")]
    pub epsilon: Option<f64>,
    #[arg(long, requires = "epsilon")]
    pub tau: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn phase(a: &PhaseArgs) -> Result<OutputDocument, CliError> {
    if a.d < 2 {
        return Err(CliError::Usage("--d must be at least 2".into()));
    }
    let log_d = (a.d as f64).ln();
    let tau_of = |r: f64| (2.0 * r * log_d).sqrt();
    if let (Some(e), Some(t)) = (a.epsilon, a.tau) {
        let m = RwModel::new(e, t)?;
        let c = phase::to_phase(&m, a.d)?;
        let region = phase::classify_region(&c)?;
        let mut table = Table::new(
            "region",
            &["epsilon", "tau", "d", "beta", "r", "region", "on_boundary", "dense"],
        );
        table.push(vec![
            e.into(),
            t.into(),
            a.d.into(),
            c.beta.into(),
            c.r.into(),
            region.label.map_or("unclassified", |l| l.as_str()).into(),
            region.on_boundary.into(),
            region.dense.into(),
        ]);
        return Ok(OutputDocument::single(table));
    }
    if !(a.grid_step > 0.0 && a.grid_step <= 0.5) {
        return Err(CliError::Usage("--grid-step must be in (0, 0.5]".into()));
    }
    let mut t = Table::new(
        "phase",
        &[
            "beta", "epsilon", "r_detect", "r_ident", "r_recov", "tau_detect", "tau_ident",
            "tau_recov",
        ],
    );
    for beta in uniform_grid(0.5, 1.0, a.grid_step) {
        let beta = beta.min(1.0);
        let c = PhaseCoords::new(beta, 0.0, a.d)?;
        let eps = phase::from_phase(&c)?.epsilon();
        let rd = phase::detection_boundary(beta)?;
        let ri = phase::identification_boundary(beta)?;
        let rr = phase::recovery_boundary(beta)?;
        t.push(vec![
            beta.into(),
            eps.into(),
            rd.into(),
            ri.into(),
            rr.into(),
            tau_of(rd).into(),
            tau_of(ri).into(),
            tau_of(rr).into(),
        ]);
    }
    Ok(OutputDocument::single(t))
}

#[derive(Debug, Clone, Args)]
pub struct RatioArgs {
    #[arg(long = "epsilon", value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3, 1e-4])]
    pub epsilons: Vec<f64>,
    /// Offsets in r above the identification boundary.
    #[arg(long = "delta-r", value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 1.0])]
    pub delta_rs: Vec<f64>,
    /// Dimension used to convert r offsets to tau.
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    pub d: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn ratio(a: &RatioArgs) -> Result<OutputDocument, CliError> {
    let mut t = Table::new("ratio", &["epsilon", "delta_r", "tau", "z_hc", "z_cb", "ratio"]);
    for &e in &a.epsilons {
        for &dr in &a.delta_rs {
            let tau = population::tau_above_identification(e, dr, a.d)?;
            let m = RwModel::new(e, tau)?;
            let hc = population::hc_threshold(&m)?;
            let cb = population::cb_threshold(&m)?;
            t.push(vec![e.into(), dr.into(), tau.into(), hc.into(), cb.into(), (hc / cb).into()]);
        }
    }
    Ok(OutputDocument::single(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FdrModeArg {
    Estimated,
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [3.0, 4.0, 5.0, 6.0])]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub d: usize,
    /// Number of replications.
    #[arg(long = "B", default_value_t = sim::DEFAULT_REPLICATIONS)]
    pub replications: usize,
    #[arg(long, env = "RAREWEAK_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Comma-separated subset of HC, CB, FNDR, CB_oracle, FNDR_oracle, fdr02.
    #[arg(long, value_delimiter = ',', default_values_t = ["HC".to_string(), "CB".to_string(), "FNDR".to_string()])]
    pub methods: Vec<String>,
    #[arg(long, value_enum, default_value_t = FdrModeArg::Estimated)]
    pub fdr_mode: FdrModeArg,
    #[arg(long, default_value_t = empirical::DEFAULT_SEARCH_FRACTION)]
    pub search_fraction: f64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SimulateArgs {
    pub fn config(&self) -> Result<StudyConfig, CliError> {
        let methods = self
            .methods
            .iter()
            .map(|s| s.parse::<Method>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StudyConfig {
            epsilon: self.epsilon,
            tau_list: self.tau.clone(),
            d: self.d,
            replications: self.replications,
            master_seed: self.seed,
            methods,
            fdr_mode: match self.fdr_mode {
                FdrModeArg::Estimated => FdrMode::Estimated,
                FdrModeArg::Oracle => FdrMode::Oracle,
            },
            search_fraction: self.search_fraction,
        })
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<OutputDocument, CliError> {
    let cfg = a.config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let summary = pool.install(|| sim::run_study(&cfg))?;
    if summary.nonconverged_fits > 0 {
        eprintln!(
            "note: {} mixture fits hit the iteration cap; their trials are included",
            summary.nonconverged_fits
        );
    }
    Ok(OutputDocument::single(error_table(&summary)))
}

pub fn error_table(summary: &sim::StudySummary) -> Table {
    let mut t = Table::new("errors", &["method", "tau", "kind", "mean", "sd"]);
    for row in sim::emit_error_table(summary) {
        t.push(vec![
            row.method.as_str().into(),
            row.tau.into(),
            row.kind.as_str().into(),
            row.mean.into(),
            row.sd.into(),
        ]);
    }
    t
}
