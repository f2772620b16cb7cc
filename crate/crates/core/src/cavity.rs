//! Purcell factors from cavity figures of merit, plus the three
//! photonic-crystal presets (nanodiamond, diamond membrane, bulk diamond).
//!
//! Two prefactor conventions are shipped. The default (`eq2`) uses
//! 3/(4π²)·Q/V with the mode volume in (λ/n)³ units. The published
//! values for these structures are reproduced by the alternative
//! `paper_values` convention, 3/(4π)·Q/V, exactly π times larger. Both
//! are kept available and cross-checked rather than silently corrected.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{NvError, Result};

/// Prefactor convention for the Purcell formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurcellConvention {
    /// 3/(4π²) · Q/V, the default.
    #[default]
    Eq2,
    /// 3/(4π) · Q/V, reproducing the published preset values.
    PaperValues,
}

impl std::fmt::Display for PurcellConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PurcellConvention::Eq2 => write!(f, "eq2"),
            PurcellConvention::PaperValues => write!(f, "paper_values"),
        }
    }
}

impl std::str::FromStr for PurcellConvention {
    type Err = NvError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eq2" => Ok(PurcellConvention::Eq2),
            "paper_values" => Ok(PurcellConvention::PaperValues),
            other => Err(NvError::validation(format!(
                "unknown convention '{other}' (expected 'eq2' or 'paper_values')"
            ))),
        }
    }
}

/// Cavity figures of merit.
///
/// `v_norm` is the mode volume in units of (λ/n)³, so the wavelength and
/// refractive index cancel out of the Purcell formula and are kept as
/// documentation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub q: f64,
    pub v_norm: f64,
    pub wavelength_nm: f64,
    pub refractive_index: f64,
    pub collection_efficiency: f64,
    pub label: String,
    /// Published Purcell factor for this structure, used to cross-check
    /// the prefactor conventions. Not an output of the formula.
    pub reported_fp: Option<f64>,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0) || !self.q.is_finite() {
            return Err(NvError::validation(format!(
                "quality factor must be > 0, got {}",
                self.q
            )));
        }
        if !(self.v_norm > 0.0) || !self.v_norm.is_finite() {
            return Err(NvError::validation(format!(
                "normalized mode volume must be > 0, got {}",
                self.v_norm
            )));
        }
        if self.refractive_index < 1.0 {
            return Err(NvError::validation(format!(
                "refractive index must be >= 1, got {}",
                self.refractive_index
            )));
        }
        if !(0.0..=1.0).contains(&self.collection_efficiency) {
            return Err(NvError::validation(format!(
                "collection efficiency must lie in [0, 1], got {}",
                self.collection_efficiency
            )));
        }
        Ok(())
    }
}

/// Purcell factor in the default convention: 3/(4π²)·Q/V with V in
/// (λ/n)³ units, so the (λ/n)³ factors cancel.
pub fn purcell_factor(c: &CavityParams) -> Result<f64> {
    purcell_factor_with(c, PurcellConvention::Eq2)
}

/// Purcell factor in an explicit convention.
pub fn purcell_factor_with(c: &CavityParams, convention: PurcellConvention) -> Result<f64> {
    c.validate()?;
    let prefactor = match convention {
        PurcellConvention::Eq2 => 3.0 / (4.0 * PI * PI),
        PurcellConvention::PaperValues => 3.0 / (4.0 * PI),
    };
    Ok(prefactor * c.q / c.v_norm)
}

/// The three shipped cavity structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CavityPreset {
    Nanodiamond,
    Membrane,
    Bulk,
}

impl CavityPreset {
    pub const ALL: [CavityPreset; 3] = [
        CavityPreset::Nanodiamond,
        CavityPreset::Membrane,
        CavityPreset::Bulk,
    ];
}

impl std::fmt::Display for CavityPreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CavityPreset::Nanodiamond => write!(f, "nanodiamond"),
            CavityPreset::Membrane => write!(f, "membrane"),
            CavityPreset::Bulk => write!(f, "bulk"),
        }
    }
}

impl std::str::FromStr for CavityPreset {
    type Err = NvError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nanodiamond" => Ok(CavityPreset::Nanodiamond),
            "membrane" => Ok(CavityPreset::Membrane),
            "bulk" => Ok(CavityPreset::Bulk),
            other => Err(NvError::validation(format!(
                "unknown cavity preset '{other}' (expected nanodiamond, membrane, or bulk)"
            ))),
        }
    }
}

/// Parameters of a shipped photonic-crystal structure.
///
/// The nanodiamond design is a silicon-nitride hexagonal L3 cavity
/// (n = 2) with side holes shifted to optimize the quality factor; the
/// membrane and bulk designs are in diamond (n ≈ 2.4). Its far-field
/// directionality supports roughly 45% collection at NA 0.95, used as
/// the default collection efficiency for all three presets.
pub fn preset(label: CavityPreset) -> CavityParams {
    match label {
        CavityPreset::Nanodiamond => CavityParams {
            q: 2650.0,
            v_norm: 0.27,
            wavelength_nm: 1042.0,
            refractive_index: 2.0,
            collection_efficiency: 0.45,
            label: "nanodiamond".to_string(),
            reported_fp: Some(2343.0),
        },
        CavityPreset::Membrane => CavityParams {
            q: 13300.0,
            v_norm: 0.38,
            wavelength_nm: 1042.0,
            refractive_index: 2.4,
            collection_efficiency: 0.45,
            label: "membrane".to_string(),
            reported_fp: Some(8355.0),
        },
        CavityPreset::Bulk => CavityParams {
            q: 790.0,
            v_norm: 0.8,
            wavelength_nm: 1042.0,
            refractive_index: 2.4,
            collection_efficiency: 0.45,
            label: "bulk".to_string(),
            reported_fp: Some(235.0),
        },
    }
}
