//! Decision thresholds for identifying rare and weak signals.
//!
//! The crate works in the rare-weak normal mixture
//! `Z ~ (1 - ε) N(0, 1) + ε N(τ, 1)` and provides
//!
//! * population thresholds on the z-scale: Kolmogorov-Smirnov (`τ/2`),
//!   Higher Criticism (numerical maximizer), class boundary (local fdr = 1/2)
//!   and general local-fdr cutoffs ([`population`]);
//! * the empirical HC statistic and threshold from p-values ([`empirical`]);
//! * BH tail-area FDR, an EM mixture fit with known null, and local
//!   fdr/fndr curves ([`fdr`]);
//! * the (β, r) phase space with its detection, identification and recovery
//!   boundaries ([`phase`]);
//! * a seeded Monte-Carlo harness comparing the thresholds ([`sim`]).

pub mod empirical;
pub mod error;
pub mod fdr;
pub mod model;
pub mod normal;
pub mod optimize;
pub mod phase;
pub mod population;
pub mod sim;

pub use empirical::{HcResult, PValueSample};
pub use error::{Error, Result};
pub use fdr::{FdrCurves, MixtureFit};
pub use model::{LabeledSample, RwModel};
pub use phase::{PhaseCoords, Region, RegionLabel};
pub use population::{HcMaximum, ThresholdSet};
pub use sim::{ErrorCounts, FdrMode, Method, StudyConfig, StudySummary};
