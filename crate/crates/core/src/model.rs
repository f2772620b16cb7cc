//! Eight-level population model of the NV center under green/IR drive.
//!
//! The basis covers both charge states: the NV⁻ spin-triplet ground and
//! excited pairs (m_s = 0 and m_s = ±1), the NV⁻ singlet excited/ground
//! pair, and the NV⁰ ground/excited pair. All couplings are classical
//! rates; populations evolve under a linear generator whose columns sum
//! to zero so that total probability is conserved.
//!
//! Laser-induced rates are modelled as `coefficient × power^exponent`
//! with exponent 1 by default. The radiative part of the singlet decay
//! (and optionally the singlet excitation) can be multiplied by a cavity
//! Purcell factor.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{NvError, Result};

pub type Matrix8 = SMatrix<f64, 8, 8>;
pub type Vector8 = SVector<f64, 8>;

/// The eight basis levels, with fixed ordinals 0..7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LevelIndex {
    /// NV⁻ triplet ground, m_s = 0.
    TripletGround0 = 0,
    /// NV⁻ triplet ground, m_s = ±1.
    TripletGround1 = 1,
    /// NV⁻ triplet excited, m_s = 0.
    TripletExcited0 = 2,
    /// NV⁻ triplet excited, m_s = ±1.
    TripletExcited1 = 3,
    /// NV⁻ singlet excited.
    SingletExcited = 4,
    /// NV⁻ singlet ground (metastable shelf).
    SingletGround = 5,
    /// NV⁰ ground.
    NeutralGround = 6,
    /// NV⁰ excited.
    NeutralExcited = 7,
}

impl LevelIndex {
    pub const ALL: [LevelIndex; 8] = [
        LevelIndex::TripletGround0,
        LevelIndex::TripletGround1,
        LevelIndex::TripletExcited0,
        LevelIndex::TripletExcited1,
        LevelIndex::SingletExcited,
        LevelIndex::SingletGround,
        LevelIndex::NeutralGround,
        LevelIndex::NeutralExcited,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// All transition-rate parameters of the level diagram.
///
/// Fixed rates are in MHz; `*_coeff` fields are rate-per-power
/// coefficients in MHz/mW that yield the laser-induced rates once a
/// drive power is applied. The singlet decay is split into a radiative
/// and a non-radiative part so that a cavity can enhance only the
/// radiative share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    /// NV⁻ triplet fluorescence rate (excited → ground).
    pub k_f_minus: f64,
    /// NV⁰ fluorescence rate (excited → ground).
    pub k_f_neutral: f64,
    /// Intersystem crossing, triplet excited m_s = 0 → singlet excited.
    pub k_es_0: f64,
    /// Intersystem crossing, triplet excited m_s = ±1 → singlet excited.
    pub k_es_1: f64,
    /// Non-radiative part of the singlet excited → singlet ground decay.
    pub k_ss_nonrad: f64,
    /// Radiative part of the singlet excited → singlet ground decay
    /// (before any Purcell enhancement).
    pub k_ss_rad: f64,
    /// Singlet ground → triplet ground m_s = 0.
    pub k_sg_0: f64,
    /// Singlet ground → triplet ground m_s = ±1.
    pub k_sg_1: f64,
    /// Green-induced ionization coefficient (from the triplet excited states).
    pub ion_green_coeff: f64,
    /// IR-induced ionization coefficient (from the triplet excited states).
    pub ion_ir_coeff: f64,
    /// Green-induced recombination coefficient (from the NV⁰ excited state).
    pub rec_green_coeff: f64,
    /// IR-induced recombination coefficient (from the NV⁰ excited state).
    pub rec_ir_coeff: f64,
    /// Green excitation coefficient for the NV⁻ triplet.
    pub exc_green_minus_coeff: f64,
    /// Green excitation coefficient for NV⁰.
    pub exc_green_neutral_coeff: f64,
    /// IR excitation coefficient for the singlet ground → excited transition.
    pub exc_ir_singlet_coeff: f64,
}

impl RateSet {
    /// Check non-negativity/finiteness and that the radiative share of the
    /// singlet decay matches `branching_ratio` (rad / (rad + nonrad)).
    pub fn validate(&self, branching_ratio: f64) -> Result<()> {
        for (name, v) in self.fields() {
            if !v.is_finite() || v < 0.0 {
                return Err(NvError::validation(format!(
                    "rate field '{name}' must be finite and non-negative, got {v}"
                )));
            }
        }
        let total = self.k_ss_rad + self.k_ss_nonrad;
        if total <= 0.0 {
            return Err(NvError::validation(
                "singlet decay total (k_ss_rad + k_ss_nonrad) must be positive",
            ));
        }
        let share = self.k_ss_rad / total;
        if (share - branching_ratio).abs() > 1e-9 {
            return Err(NvError::validation(format!(
                "singlet radiative share {share} does not match configured branching ratio {branching_ratio}"
            )));
        }
        Ok(())
    }

    pub fn fields(&self) -> [(&'static str, f64); 15] {
        [
            ("k_f_minus", self.k_f_minus),
            ("k_f_neutral", self.k_f_neutral),
            ("k_es_0", self.k_es_0),
            ("k_es_1", self.k_es_1),
            ("k_ss_nonrad", self.k_ss_nonrad),
            ("k_ss_rad", self.k_ss_rad),
            ("k_sg_0", self.k_sg_0),
            ("k_sg_1", self.k_sg_1),
            ("ion_green_coeff", self.ion_green_coeff),
            ("ion_ir_coeff", self.ion_ir_coeff),
            ("rec_green_coeff", self.rec_green_coeff),
            ("rec_ir_coeff", self.rec_ir_coeff),
            ("exc_green_minus_coeff", self.exc_green_minus_coeff),
            ("exc_green_neutral_coeff", self.exc_green_neutral_coeff),
            ("exc_ir_singlet_coeff", self.exc_ir_singlet_coeff),
        ]
    }
}

/// Instantaneous laser drive plus cavity enhancement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSettings {
    pub green_power_mw: f64,
    pub ir_power_mw: f64,
    /// Purcell factor; 1 means no cavity.
    pub purcell_factor: f64,
}

impl DriveSettings {
    pub fn new(green_power_mw: f64, ir_power_mw: f64, purcell_factor: f64) -> Result<Self> {
        let d = DriveSettings {
            green_power_mw,
            ir_power_mw,
            purcell_factor,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn off() -> Self {
        DriveSettings {
            green_power_mw: 0.0,
            ir_power_mw: 0.0,
            purcell_factor: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.green_power_mw.is_finite() || self.green_power_mw < 0.0 {
            return Err(NvError::validation(format!(
                "green_power_mw must be finite and >= 0, got {}",
                self.green_power_mw
            )));
        }
        if !self.ir_power_mw.is_finite() || self.ir_power_mw < 0.0 {
            return Err(NvError::validation(format!(
                "ir_power_mw must be finite and >= 0, got {}",
                self.ir_power_mw
            )));
        }
        if !self.purcell_factor.is_finite() || self.purcell_factor < 1.0 {
            return Err(NvError::validation(format!(
                "purcell_factor must be finite and >= 1, got {}",
                self.purcell_factor
            )));
        }
        Ok(())
    }
}

/// Where the Purcell factor is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurcellTarget {
    /// Multiply the radiative part of the singlet decay (the default).
    #[default]
    Emission,
    /// Multiply the IR excitation rate of the singlet transition.
    Excitation,
    /// Multiply both.
    Both,
}

/// Model switches that extend the baseline rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub purcell_target: PurcellTarget,
    /// Power exponent for the ionization rates (1 = linear).
    pub ionization_exponent: f64,
    /// Power exponent for the recombination rates (1 = linear).
    pub recombination_exponent: f64,
    /// Coefficient for IR-induced ionization out of the singlet excited
    /// state (MHz/mW). Reserved channel; 0 disables it.
    pub singlet_ionization_coeff: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            purcell_target: PurcellTarget::Emission,
            ionization_exponent: 1.0,
            recombination_exponent: 1.0,
            singlet_ionization_coeff: 0.0,
        }
    }
}

/// Environment tag selecting an ionization/recombination profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvLabel {
    Bulk,
    Surface,
}

impl std::fmt::Display for EnvLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnvLabel::Bulk => write!(f, "bulk"),
            EnvLabel::Surface => write!(f, "surface"),
        }
    }
}

impl std::str::FromStr for EnvLabel {
    type Err = NvError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bulk" => Ok(EnvLabel::Bulk),
            "surface" => Ok(EnvLabel::Surface),
            other => Err(NvError::validation(format!(
                "unknown environment '{other}' (expected 'bulk' or 'surface')"
            ))),
        }
    }
}

/// Partial override of the laser-coupling coefficients only.
///
/// Lifetimes and intersystem-crossing rates are intrinsic to the defect
/// and cannot be overridden per environment; the struct shape enforces
/// that.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateOverrides {
    pub ion_green_coeff: Option<f64>,
    pub ion_ir_coeff: Option<f64>,
    pub rec_green_coeff: Option<f64>,
    pub rec_ir_coeff: Option<f64>,
    pub exc_green_minus_coeff: Option<f64>,
    pub exc_green_neutral_coeff: Option<f64>,
    pub exc_ir_singlet_coeff: Option<f64>,
}

/// A labelled environment (bulk or surface NV) with its coefficient overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentProfile {
    pub label: EnvLabel,
    pub rate_overrides: RateOverrides,
}

impl EnvironmentProfile {
    pub fn new(label: EnvLabel, rate_overrides: RateOverrides) -> Self {
        EnvironmentProfile {
            label,
            rate_overrides,
        }
    }

    /// Apply the overrides on top of a base rate set.
    pub fn apply(&self, base: &RateSet) -> RateSet {
        let mut rs = base.clone();
        let ov = &self.rate_overrides;
        if let Some(v) = ov.ion_green_coeff {
            rs.ion_green_coeff = v;
        }
        if let Some(v) = ov.ion_ir_coeff {
            rs.ion_ir_coeff = v;
        }
        if let Some(v) = ov.rec_green_coeff {
            rs.rec_green_coeff = v;
        }
        if let Some(v) = ov.rec_ir_coeff {
            rs.rec_ir_coeff = v;
        }
        if let Some(v) = ov.exc_green_minus_coeff {
            rs.exc_green_minus_coeff = v;
        }
        if let Some(v) = ov.exc_green_neutral_coeff {
            rs.exc_green_neutral_coeff = v;
        }
        if let Some(v) = ov.exc_ir_singlet_coeff {
            rs.exc_ir_singlet_coeff = v;
        }
        rs
    }
}

/// All rates of the level diagram with the drive resolved into MHz values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRates {
    pub k_f_minus: f64,
    pub k_f_neutral: f64,
    pub k_es_0: f64,
    pub k_es_1: f64,
    /// Total singlet excited → ground decay, including Purcell enhancement.
    pub k_ss_total: f64,
    /// Radiative part of the singlet decay after Purcell enhancement; this
    /// is the IR photon emission rate per unit singlet-excited population.
    pub k_ss_rad_eff: f64,
    pub k_sg_0: f64,
    pub k_sg_1: f64,
    /// Green excitation of the NV⁻ triplet.
    pub exc_green_minus: f64,
    /// Green excitation of NV⁰.
    pub exc_green_neutral: f64,
    /// IR excitation of the singlet transition (after Purcell if targeted).
    pub exc_ir_singlet: f64,
    pub ion_green: f64,
    pub ion_ir: f64,
    pub rec_green: f64,
    pub rec_ir: f64,
    /// IR-induced ionization out of the singlet excited state (reserved
    /// channel, 0 unless enabled in the model options).
    pub ion_ir_singlet: f64,
}

fn power_rate(coeff: f64, power: f64, exponent: f64) -> f64 {
    if power == 0.0 {
        return 0.0;
    }
    if exponent == 1.0 {
        coeff * power
    } else {
        coeff * power.powf(exponent)
    }
}

/// Resolve a rate set and a drive into the full rate map.
pub fn effective_rates(rs: &RateSet, drive: &DriveSettings) -> Result<EffectiveRates> {
    effective_rates_opts(rs, drive, &ModelOptions::default())
}

/// [`effective_rates`] with explicit model options.
pub fn effective_rates_opts(
    rs: &RateSet,
    drive: &DriveSettings,
    opts: &ModelOptions,
) -> Result<EffectiveRates> {
    drive.validate()?;
    let fp = drive.purcell_factor;
    let p_g = drive.green_power_mw;
    let p_ir = drive.ir_power_mw;

    let k_ss_rad_eff = match opts.purcell_target {
        PurcellTarget::Emission | PurcellTarget::Both => fp * rs.k_ss_rad,
        PurcellTarget::Excitation => rs.k_ss_rad,
    };
    let exc_ir_base = rs.exc_ir_singlet_coeff * p_ir;
    let exc_ir_singlet = match opts.purcell_target {
        PurcellTarget::Excitation | PurcellTarget::Both => fp * exc_ir_base,
        PurcellTarget::Emission => exc_ir_base,
    };

    Ok(EffectiveRates {
        k_f_minus: rs.k_f_minus,
        k_f_neutral: rs.k_f_neutral,
        k_es_0: rs.k_es_0,
        k_es_1: rs.k_es_1,
        k_ss_total: rs.k_ss_nonrad + k_ss_rad_eff,
        k_ss_rad_eff,
        k_sg_0: rs.k_sg_0,
        k_sg_1: rs.k_sg_1,
        exc_green_minus: rs.exc_green_minus_coeff * p_g,
        exc_green_neutral: rs.exc_green_neutral_coeff * p_g,
        exc_ir_singlet,
        ion_green: power_rate(rs.ion_green_coeff, p_g, opts.ionization_exponent),
        ion_ir: power_rate(rs.ion_ir_coeff, p_ir, opts.ionization_exponent),
        rec_green: power_rate(rs.rec_green_coeff, p_g, opts.recombination_exponent),
        rec_ir: power_rate(rs.rec_ir_coeff, p_ir, opts.recombination_exponent),
        ion_ir_singlet: power_rate(opts.singlet_ionization_coeff, p_ir, opts.ionization_exponent),
    })
}

/// Generator of the coupled rate equations plus per-channel emission rows.
///
/// `dp/dt = m · p` with columns indexed by the source level. Every column
/// sums to zero; off-diagonal entries are non-negative. The emission rows
/// give the instantaneous photon emission rate of each detection channel
/// as a linear functional of the population vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub m: Matrix8,
    /// Red channel: triplet fluorescence from both excited spin states.
    pub emission_red: Vector8,
    /// IR channel: Purcell-enhanced radiative singlet decay.
    pub emission_ir: Vector8,
}

impl GeneratorMatrix {
    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|v| v.is_finite())
            && self.emission_red.iter().all(|v| v.is_finite())
            && self.emission_ir.iter().all(|v| v.is_finite())
    }
}

/// Build the generator for a resolved drive.
pub fn build_generator(rs: &RateSet, drive: &DriveSettings) -> Result<GeneratorMatrix> {
    build_generator_opts(rs, drive, &ModelOptions::default())
}

/// [`build_generator`] with explicit model options.
pub fn build_generator_opts(
    rs: &RateSet,
    drive: &DriveSettings,
    opts: &ModelOptions,
) -> Result<GeneratorMatrix> {
    let k = effective_rates_opts(rs, drive, opts)?;
    Ok(generator_from_effective(&k))
}

/// Assemble the matrix from an already-resolved rate map.
pub fn generator_from_effective(k: &EffectiveRates) -> GeneratorMatrix {
    use LevelIndex::*;
    let tg0 = TripletGround0.index();
    let tg1 = TripletGround1.index();
    let te0 = TripletExcited0.index();
    let te1 = TripletExcited1.index();
    let se = SingletExcited.index();
    let sg = SingletGround.index();
    let ng = NeutralGround.index();
    let ne = NeutralExcited.index();

    let ion = k.ion_green + k.ion_ir;
    let rec = k.rec_green + k.rec_ir;

    let mut m = Matrix8::zeros();

    // Triplet ground states: pumped up by green, fed by fluorescence,
    // singlet return, and an equal split of recombination.
    m[(tg0, tg0)] = -k.exc_green_minus;
    m[(te0, tg0)] = k.exc_green_minus;
    m[(tg1, tg1)] = -k.exc_green_minus;
    m[(te1, tg1)] = k.exc_green_minus;

    // Triplet excited states: decay by fluorescence, intersystem crossing,
    // and photo-ionization into NV0.
    m[(te0, te0)] = -(k.k_f_minus + k.k_es_0 + ion);
    m[(tg0, te0)] = k.k_f_minus;
    m[(se, te0)] = k.k_es_0;
    m[(ng, te0)] = ion;

    m[(te1, te1)] = -(k.k_f_minus + k.k_es_1 + ion);
    m[(tg1, te1)] = k.k_f_minus;
    m[(se, te1)] = k.k_es_1;
    m[(ng, te1)] = ion;

    // Singlet excited: decays to the singlet ground (radiative + non-radiative);
    // optionally photo-ionizes under IR if the reserved channel is enabled.
    m[(se, se)] = -(k.k_ss_total + k.ion_ir_singlet);
    m[(sg, se)] = k.k_ss_total;
    m[(ng, se)] += k.ion_ir_singlet;

    // Singlet ground: spin-selective return to the triplet ground states,
    // re-excited towards the singlet excited state by the IR drive.
    m[(sg, sg)] = -(k.k_sg_0 + k.k_sg_1 + k.exc_ir_singlet);
    m[(tg0, sg)] = k.k_sg_0;
    m[(tg1, sg)] = k.k_sg_1;
    m[(se, sg)] = k.exc_ir_singlet;

    // NV0: green-pumped two-level system; recombination from the excited
    // state splits equally into the two triplet ground spin states.
    m[(ng, ng)] = -k.exc_green_neutral;
    m[(ne, ng)] = k.exc_green_neutral;

    m[(ne, ne)] = -(k.k_f_neutral + rec);
    m[(ng, ne)] = k.k_f_neutral;
    m[(tg0, ne)] = 0.5 * rec;
    m[(tg1, ne)] = 0.5 * rec;

    let mut emission_red = Vector8::zeros();
    emission_red[te0] = k.k_f_minus;
    emission_red[te1] = k.k_f_minus;

    let mut emission_ir = Vector8::zeros();
    emission_ir[se] = k.k_ss_rad_eff;

    GeneratorMatrix {
        m,
        emission_red,
        emission_ir,
    }
}
