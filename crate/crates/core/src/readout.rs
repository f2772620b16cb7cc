//! Figures of merit for spin readout: shot-noise-limited SNR, its
//! duration-normalized form, and relative sensitivity between schemes.

use serde::{Deserialize, Serialize};

use crate::error::{NvError, Result};
use crate::model::{EnvironmentProfile, ModelOptions, RateSet};
use crate::sequence::{run_sequence_opts, PulseSequence, SpinState};

/// Detection channel of a readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Red,
    Ir,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::Red => write!(f, "red"),
            Channel::Ir => write!(f, "ir"),
        }
    }
}

/// Collection and detection efficiencies applied to expected counts
/// before the SNR formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiencies {
    pub collection: f64,
    pub detection: f64,
}

impl Default for Efficiencies {
    fn default() -> Self {
        Efficiencies {
            collection: 1.0,
            detection: 1.0,
        }
    }
}

impl Efficiencies {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("collection", self.collection), ("detection", self.detection)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(NvError::validation(format!(
                    "{name} efficiency must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Paired expected photon counts from the two spin preparations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutResult {
    /// Expected photons when prepared in m_s = 0.
    pub n0: f64,
    /// Expected photons when prepared in m_s = ±1.
    pub n1: f64,
    /// Collecting duration in µs (summed over repeated passes).
    pub duration_us: f64,
    pub channel: Channel,
    pub collection_efficiency: f64,
    pub detection_efficiency: f64,
}

/// Shot-noise-limited SNR value with a degeneracy marker for 0/0 cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snr {
    pub value: f64,
    /// True when both scaled counts vanish; the value is then defined as 0
    /// so that sweep grids stay total.
    pub degenerate: bool,
}

impl ReadoutResult {
    pub fn new(
        n0: f64,
        n1: f64,
        duration_us: f64,
        channel: Channel,
        eff: Efficiencies,
    ) -> Result<Self> {
        if n0 < 0.0 || n1 < 0.0 || !n0.is_finite() || !n1.is_finite() {
            return Err(NvError::validation(format!(
                "photon counts must be finite and >= 0, got n0={n0}, n1={n1}"
            )));
        }
        eff.validate()?;
        Ok(ReadoutResult {
            n0,
            n1,
            duration_us,
            channel,
            collection_efficiency: eff.collection,
            detection_efficiency: eff.detection,
        })
    }

    /// Counts after applying collection and detection efficiencies.
    pub fn scaled_counts(&self) -> (f64, f64) {
        let eps = self.collection_efficiency * self.detection_efficiency;
        (self.n0 * eps, self.n1 * eps)
    }

    /// Shot-noise-limited SNR: |N0 − N1| / sqrt(N0 + N1) on the
    /// efficiency-scaled counts.
    pub fn snr(&self) -> Snr {
        let (n0, n1) = self.scaled_counts();
        let total = n0 + n1;
        if total <= 0.0 {
            return Snr {
                value: 0.0,
                degenerate: true,
            };
        }
        Snr {
            value: (n0 - n1).abs() / total.sqrt(),
            degenerate: false,
        }
    }

    /// SNR divided by the square root of the collecting duration in µs,
    /// for duration-fair comparison between protocols.
    pub fn normalized_snr(&self) -> Result<f64> {
        if !(self.duration_us > 0.0) {
            return Err(NvError::validation(format!(
                "normalized SNR needs duration > 0, got {}",
                self.duration_us
            )));
        }
        Ok(self.snr().value / self.duration_us.sqrt())
    }
}

/// Sensitivity of a scheme relative to a reference, via the reciprocal
/// SNR proportionality. Values below 1 mean the new scheme reaches a
/// smaller (better) sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEstimate {
    pub relative_sensitivity: f64,
}

pub fn relative_sensitivity(ref_snr: f64, new_snr: f64) -> Result<SensitivityEstimate> {
    if !(ref_snr > 0.0) || !ref_snr.is_finite() {
        return Err(NvError::validation(format!(
            "reference SNR must be > 0, got {ref_snr}"
        )));
    }
    if !(new_snr > 0.0) || !new_snr.is_finite() {
        return Err(NvError::validation(format!(
            "new SNR must be > 0, got {new_snr}"
        )));
    }
    Ok(SensitivityEstimate {
        relative_sensitivity: ref_snr / new_snr,
    })
}

/// Run a protocol once per spin preparation with everything else
/// identical and pair the counts from its active detection channel.
///
/// The protocol must collect exactly one channel; the result's duration
/// is the total collecting time across repetitions.
pub fn readout_pair(
    protocol: &PulseSequence,
    rs: &RateSet,
    env: &EnvironmentProfile,
    purcell: f64,
    opts: &ModelOptions,
    eff: Efficiencies,
) -> Result<ReadoutResult> {
    let collects_red = protocol.segments.iter().any(|s| s.collect_red);
    let collects_ir = protocol.segments.iter().any(|s| s.collect_ir);
    let channel = match (collects_red, collects_ir) {
        (true, false) => Channel::Red,
        (false, true) => Channel::Ir,
        (true, true) => {
            return Err(NvError::validation(
                "protocol collects both channels; readout pairing needs a single active channel",
            ))
        }
        (false, false) => {
            return Err(NvError::validation(
                "protocol collects no channel; nothing to pair",
            ))
        }
    };

    let mut counts = [0.0; 2];
    for (k, spin) in [SpinState::Ms0, SpinState::Ms1].into_iter().enumerate() {
        let seq = protocol.with_initial_spin(spin);
        let (_, acc) = run_sequence_opts(&seq, rs, env, purcell, opts)?;
        counts[k] = match channel {
            Channel::Red => acc.red_counts,
            Channel::Ir => acc.ir_counts,
        };
    }

    ReadoutResult::new(
        counts[0],
        counts[1],
        protocol.collecting_duration_us(),
        channel,
        eff,
    )
}
