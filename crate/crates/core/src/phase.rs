//! The (β, r) phase space of the rare-weak model and its boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::RwModel;

/// Sparsity `beta = -log ε / log d` and strength `r = (τ²/2) / log d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCoords {
    pub beta: f64,
    pub r: f64,
    pub d: usize,
}

impl PhaseCoords {
    pub fn new(beta: f64, r: f64, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid("d", "dimension must be at least 2"));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(invalid("beta", format!("{beta} must be >= 0")));
        }
        if !r.is_finite() || r < 0.0 {
            return Err(invalid("r", format!("{r} must be >= 0")));
        }
        Ok(Self { beta, r, d })
    }
}

pub fn to_phase(m: &RwModel, d: usize) -> Result<PhaseCoords> {
    if m.epsilon() == 0.0 {
        return Err(Error::OutOfDomain("beta is undefined for epsilon = 0".into()));
    }
    if d < 2 {
        return Err(invalid("d", "dimension must be at least 2"));
    }
    let log_d = (d as f64).ln();
    Ok(PhaseCoords {
        beta: -m.epsilon().ln() / log_d,
        r: 0.5 * m.tau() * m.tau() / log_d,
        d,
    })
}

pub fn from_phase(c: &PhaseCoords) -> Result<RwModel> {
    let log_d = (c.d as f64).ln();
    RwModel::new((-c.beta * log_d).exp(), (2.0 * c.r * log_d).sqrt())
}

fn check_sparse(beta: f64) -> Result<()> {
    if (0.5..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!(
            "detection boundary needs beta in [1/2, 1], got {beta}"
        )))
    }
}

fn check_unit(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("beta {beta} not in [0, 1]")))
    }
}

pub fn detection_boundary(beta: f64) -> Result<f64> {
    check_sparse(beta)?;
    Ok(if beta <= 0.75 {
        beta - 0.5
    } else {
        (1.0 - (1.0 - beta).sqrt()).powi(2)
    })
}

pub fn identification_boundary(beta: f64) -> Result<f64> {
    check_unit(beta)?;
    Ok(beta)
}

pub fn recovery_boundary(beta: f64) -> Result<f64> {
    check_unit(beta)?;
    Ok((1.0 + (1.0 - beta).sqrt()).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionLabel {
    Undetectable,
    Detectable,
    Estimable,
    Recoverable,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Undetectable => "undetectable",
            RegionLabel::Detectable => "detectable",
            RegionLabel::Estimable => "estimable",
            RegionLabel::Recoverable => "recoverable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    /// `None` only in the dense regime when `r` lies below the
    /// identification boundary, where detectability is not classified.
    pub label: Option<RegionLabel>,
    /// `r` equals the boundary below the assigned region.
    pub on_boundary: bool,
    /// `beta < 1/2`.
    pub dense: bool,
}

/// Assigns a point to its region; points on a boundary go to the region
/// above it.
pub fn classify_region(c: &PhaseCoords) -> Result<Region> {
    check_unit(c.beta)?;
    let ident = identification_boundary(c.beta)?;
    let recov = recovery_boundary(c.beta)?;
    let dense = c.beta < 0.5;
    let (label, on_boundary) = if c.r >= recov {
        (Some(RegionLabel::Recoverable), c.r == recov)
    } else if c.r >= ident {
        (Some(RegionLabel::Estimable), c.r == ident)
    } else if dense {
        (None, false)
    } else {
        let detect = detection_boundary(c.beta)?;
        if c.r >= detect {
            (Some(RegionLabel::Detectable), c.r == detect)
        } else {
            (Some(RegionLabel::Undetectable), false)
        }
    };
    Ok(Region {
        label,
        on_boundary,
        dense,
    })
}

/// Identification is possible when `ε >= exp(-τ²/2)`.
pub fn identification_possible(m: &RwModel) -> bool {
    m.epsilon() >= (-0.5 * m.tau() * m.tau()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(beta: f64, r: f64) -> PhaseCoords {
        PhaseCoords::new(beta, r, 10_000).unwrap()
    }

    #[test]
    fn phase_special_points() {
        let d = 10_000usize;
        let df = d as f64;
        let c = to_phase(&RwModel::new(1.0 / df, (2.0 * df.ln()).sqrt()).unwrap(), d).unwrap();
        assert!((c.beta - 1.0).abs() < 1e-12);
        assert!((c.r - 1.0).abs() < 1e-12);
        let c = to_phase(&RwModel::new(df.powf(-0.5), 1.0).unwrap(), d).unwrap();
        assert!((c.beta - 0.5).abs() < 1e-12);
        assert!(to_phase(&RwModel::new(0.0, 1.0).unwrap(), d).is_err());
    }

    #[test]
    fn round_trip() {
        for &(e, t) in &[(0.01, 3.0), (0.3, 0.2), (1e-4, 6.5), (1.0, 0.0)] {
            let m = RwModel::new(e, t).unwrap();
            let back = from_phase(&to_phase(&m, 5_000).unwrap()).unwrap();
            assert!((back.epsilon() - e).abs() <= 1e-12 * e.max(1e-300) + 1e-15);
            assert!((back.tau() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn detection_boundary_values() {
        assert_eq!(detection_boundary(0.5).unwrap(), 0.0);
        let a = 0.75 - 0.5;
        let b = (1.0f64 - 0.25f64.sqrt()).powi(2);
        assert!((a - b).abs() < 1e-15);
        assert!((detection_boundary(0.75).unwrap() - 0.25).abs() < 1e-15);
        assert!((detection_boundary(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(detection_boundary(0.4).is_err());
        assert!(detection_boundary(1.1).is_err());
    }

    #[test]
    fn identification_and_recovery() {
        assert_eq!(identification_boundary(0.6).unwrap(), 0.6);
        assert_eq!(recovery_boundary(1.0).unwrap(), 1.0);
        assert_eq!(recovery_boundary(0.0).unwrap(), 4.0);
        assert_eq!(recovery_boundary(0.75).unwrap(), 2.25);
        assert!(recovery_boundary(-0.1).is_err());
    }

    #[test]
    fn identification_in_tau_terms() {
        // ε = 0.01, d = 10⁴ gives β = 1/2; r = β means τ = √(-2 log ε).
        let c = to_phase(&RwModel::new(0.01, 1.0).unwrap(), 10_000).unwrap();
        assert!((c.beta - 0.5).abs() < 1e-12);
        let tau_r = (2.0 * identification_boundary(c.beta).unwrap() * 10_000f64.ln()).sqrt();
        let tau_eps = (-2.0 * 0.01f64.ln()).sqrt();
        assert!((tau_r - tau_eps).abs() < 1e-10);
        assert!((tau_eps - 3.0349).abs() < 1e-4);
        assert!(identification_possible(&RwModel::new(0.01, 4.0).unwrap()));
        assert!(!identification_possible(&RwModel::new(0.001, 2.0).unwrap()));
    }

    #[test]
    fn regions() {
        let lab = |b, r| classify_region(&coords(b, r)).unwrap().label;
        assert_eq!(lab(0.6, 0.05), Some(RegionLabel::Undetectable));
        assert_eq!(lab(0.6, 0.3), Some(RegionLabel::Detectable));
        assert_eq!(lab(0.6, 1.0), Some(RegionLabel::Estimable));
        assert_eq!(lab(0.6, 3.0), Some(RegionLabel::Recoverable));

        let on = classify_region(&coords(0.6, 0.6)).unwrap();
        assert_eq!(on.label, Some(RegionLabel::Estimable));
        assert!(on.on_boundary);

        let dense = classify_region(&coords(0.3, 0.1)).unwrap();
        assert!(dense.dense);
        assert_eq!(dense.label, None);
        let dense = classify_region(&coords(0.3, 0.5)).unwrap();
        assert_eq!(dense.label, Some(RegionLabel::Estimable));
        assert!(classify_region(&coords(1.5, 0.5)).is_err());
    }

    #[test]
    fn boundaries_ordered() {
        for i in 0..=1000 {
            let b = 0.5 + 0.5 * i as f64 / 1000.0;
            let d = detection_boundary(b).unwrap();
            let id = identification_boundary(b).unwrap();
            let r = recovery_boundary(b).unwrap();
            assert!(d <= id && id <= r, "beta={b}");
        }
    }
}
