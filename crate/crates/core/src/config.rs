//! Structured configuration: rate defaults, environment overrides,
//! protocol defaults, and sweep ranges, with a versioned schema.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cavity::PurcellConvention;
use crate::error::{NvError, Result};
use crate::model::{
    EnvLabel, EnvironmentProfile, ModelOptions, PurcellTarget, RateOverrides, RateSet,
};
use crate::readout::Efficiencies;

pub const SUPPORTED_CONFIG_VERSION: u32 = 1;

const DEFAULT_TOML: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub branching_ratio: f64,
    #[serde(default)]
    pub purcell_target: PurcellTarget,
    pub ionization_exponent: f64,
    pub recombination_exponent: f64,
    #[serde(default)]
    pub singlet_ionization_enabled: bool,
    #[serde(default)]
    pub singlet_ionization_coeff: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    #[serde(default)]
    pub bulk: RateOverrides,
    #[serde(default)]
    pub surface: RateOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub green_pump_power_mw: f64,
    pub green_pump_duration_us: f64,
    pub tau_us: f64,
    pub ir_power_mw: f64,
    pub ir_duration_us: f64,
    pub repetitions: usize,
    pub red_power_mw: f64,
    pub red_duration_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    pub collection_efficiency: f64,
    pub detection_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    #[serde(default)]
    pub convention: PurcellConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepsSection {
    pub red_power_min_mw: f64,
    pub red_power_max_mw: f64,
    pub red_duration_min_us: f64,
    pub red_duration_max_us: f64,
    pub ir_power_min_mw: f64,
    pub ir_power_max_mw: f64,
    pub ir_duration_min_us: f64,
    pub ir_duration_max_us: f64,
    pub default_points: usize,
    pub purcell_min: f64,
    pub purcell_max: f64,
    pub purcell_points: usize,
}

/// Parsed and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub config_version: u32,
    pub rates: RateSet,
    pub model: ModelSection,
    #[serde(default)]
    pub env: EnvSection,
    pub protocol: ProtocolSection,
    pub readout: ReadoutSection,
    #[serde(default = "default_cavity_section")]
    pub cavity: CavitySection,
    pub sweeps: SweepsSection,
}

fn default_cavity_section() -> CavitySection {
    CavitySection {
        convention: PurcellConvention::default(),
    }
}

impl Config {
    /// The TOML text of the shipped default configuration.
    pub fn embedded_toml() -> &'static str {
        DEFAULT_TOML
    }

    /// Parse and validate configuration text.
    pub fn parse(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text)
            .map_err(|e| NvError::validation(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and validate a configuration file.
    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    /// The shipped defaults.
    pub fn shipped_default() -> Config {
        Config::parse(DEFAULT_TOML).expect("embedded default config must validate")
    }

    pub fn validate(&self) -> Result<()> {
        if self.config_version != SUPPORTED_CONFIG_VERSION {
            return Err(NvError::validation(format!(
                "unsupported config_version {} (expected {SUPPORTED_CONFIG_VERSION})",
                self.config_version
            )));
        }
        if !(0.0..=1.0).contains(&self.model.branching_ratio) {
            return Err(NvError::validation(format!(
                "branching_ratio must lie in [0, 1], got {}",
                self.model.branching_ratio
            )));
        }
        self.rates.validate(self.model.branching_ratio)?;
        for (name, e) in [
            ("ionization_exponent", self.model.ionization_exponent),
            ("recombination_exponent", self.model.recombination_exponent),
        ] {
            if !(e > 0.0) || !e.is_finite() {
                return Err(NvError::validation(format!(
                    "{name} must be > 0, got {e}"
                )));
            }
        }
        if self.model.singlet_ionization_coeff < 0.0 {
            return Err(NvError::validation(
                "singlet_ionization_coeff must be >= 0",
            ));
        }
        for (label, ov) in [("bulk", &self.env.bulk), ("surface", &self.env.surface)] {
            for (name, v) in [
                ("ion_green_coeff", ov.ion_green_coeff),
                ("ion_ir_coeff", ov.ion_ir_coeff),
                ("rec_green_coeff", ov.rec_green_coeff),
                ("rec_ir_coeff", ov.rec_ir_coeff),
                ("exc_green_minus_coeff", ov.exc_green_minus_coeff),
                ("exc_green_neutral_coeff", ov.exc_green_neutral_coeff),
                ("exc_ir_singlet_coeff", ov.exc_ir_singlet_coeff),
            ] {
                if let Some(v) = v {
                    if !v.is_finite() || v < 0.0 {
                        return Err(NvError::validation(format!(
                            "env.{label}.{name} must be finite and >= 0, got {v}"
                        )));
                    }
                }
            }
        }
        let p = &self.protocol;
        if !(p.green_pump_duration_us > 0.0)
            || !(p.ir_duration_us > 0.0)
            || !(p.red_duration_us > 0.0)
            || p.tau_us < 0.0
            || p.green_pump_power_mw < 0.0
            || p.ir_power_mw < 0.0
            || p.red_power_mw < 0.0
            || p.repetitions < 1
        {
            return Err(NvError::validation(
                "protocol section: durations must be > 0 (tau >= 0), powers >= 0, repetitions >= 1",
            ));
        }
        Efficiencies {
            collection: self.readout.collection_efficiency,
            detection: self.readout.detection_efficiency,
        }
        .validate()?;
        let s = &self.sweeps;
        for (name, min, max) in [
            ("red_power", s.red_power_min_mw, s.red_power_max_mw),
            ("red_duration", s.red_duration_min_us, s.red_duration_max_us),
            ("ir_power", s.ir_power_min_mw, s.ir_power_max_mw),
            ("ir_duration", s.ir_duration_min_us, s.ir_duration_max_us),
            ("purcell", s.purcell_min, s.purcell_max),
        ] {
            if !(min > 0.0) || !(max > min) {
                return Err(NvError::validation(format!(
                    "sweeps.{name} range must satisfy 0 < min < max, got [{min}, {max}]"
                )));
            }
        }
        if s.purcell_min < 1.0 {
            return Err(NvError::validation("sweeps.purcell_min must be >= 1"));
        }
        if s.default_points < 2 || s.purcell_points < 2 {
            return Err(NvError::validation("sweep point counts must be >= 2"));
        }
        Ok(())
    }

    pub fn rate_set(&self) -> RateSet {
        self.rates.clone()
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            purcell_target: self.model.purcell_target,
            ionization_exponent: self.model.ionization_exponent,
            recombination_exponent: self.model.recombination_exponent,
            singlet_ionization_coeff: if self.model.singlet_ionization_enabled {
                self.model.singlet_ionization_coeff
            } else {
                0.0
            },
        }
    }

    pub fn environment(&self, label: EnvLabel) -> EnvironmentProfile {
        let overrides = match label {
            EnvLabel::Bulk => self.env.bulk.clone(),
            EnvLabel::Surface => self.env.surface.clone(),
        };
        EnvironmentProfile::new(label, overrides)
    }

    pub fn efficiencies(&self) -> Efficiencies {
        Efficiencies {
            collection: self.readout.collection_efficiency,
            detection: self.readout.detection_efficiency,
        }
    }

    /// SHA-256 over the canonical serialized form of the resolved config.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_validates() {
        let cfg = Config::shipped_default();
        assert_eq!(cfg.config_version, 1);
        assert_eq!(cfg.rates.k_ss_nonrad, 999.0);
        assert_eq!(cfg.protocol.repetitions, 3);
        assert_eq!(cfg.model.purcell_target, PurcellTarget::Emission);
        assert_eq!(cfg.cavity.convention, PurcellConvention::Eq2);
    }

    #[test]
    fn surface_profile_overrides_only_ionization() {
        let cfg = Config::shipped_default();
        let base = cfg.rate_set();
        let surface = cfg.environment(EnvLabel::Surface).apply(&base);
        assert_eq!(surface.ion_green_coeff, 60.0);
        assert_eq!(surface.ion_ir_coeff, 0.04);
        assert_eq!(surface.k_f_minus, base.k_f_minus);
        assert_eq!(surface.k_sg_0, base.k_sg_0);
        let bulk = cfg.environment(EnvLabel::Bulk).apply(&base);
        assert_eq!(bulk, base);
    }

    #[test]
    fn branching_mismatch_rejected() {
        let text = Config::embedded_toml().replace("k_ss_rad = 1.0", "k_ss_rad = 5.0");
        assert!(Config::parse(&text).is_err());
    }

    #[test]
    fn version_mismatch_rejected() {
        let text = Config::embedded_toml().replace("config_version = 1", "config_version = 2");
        match Config::parse(&text) {
            Err(NvError::Validation(msg)) => assert!(msg.contains("config_version")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn lifetime_override_rejected_by_schema() {
        let text = Config::embedded_toml().replace(
            "[env.surface]",
            "[env.surface]\nk_f_minus = 10.0",
        );
        assert!(Config::parse(&text).is_err());
    }

    #[test]
    fn singlet_ionization_gate() {
        let cfg = Config::shipped_default();
        assert_eq!(cfg.model_options().singlet_ionization_coeff, 0.0);
        let text = Config::embedded_toml()
            .replace(
                "singlet_ionization_enabled = false",
                "singlet_ionization_enabled = true",
            )
            .replace(
                "singlet_ionization_coeff = 0.0",
                "singlet_ionization_coeff = 0.5",
            );
        let cfg = Config::parse(&text).unwrap();
        assert_eq!(cfg.model_options().singlet_ionization_coeff, 0.5);
    }

    #[test]
    fn hash_is_stable_and_value_sensitive() {
        let a = Config::shipped_default();
        let b = Config::shipped_default();
        assert_eq!(a.hash(), b.hash());
        let text = Config::embedded_toml().replace("tau_us = 0.01", "tau_us = 0.02");
        let c = Config::parse(&text).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn calibration_targets_documented() {
        // The published absolute red-channel peaks cannot be reproduced
        // without non-public rate constants; the default config must
        // record them as documentation instead.
        let text = Config::embedded_toml();
        assert!(text.contains("Calibration targets"));
        assert!(text.contains("0.25"));
        assert!(text.contains("0.22"));
    }
}
