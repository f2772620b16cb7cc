//! Pulsed photodynamics of the diamond nitrogen-vacancy center and
//! shot-noise-limited spin-readout SNR, for both the conventional red
//! fluorescence scheme and a singlet (IR) fluorescence scheme with
//! optional cavity Purcell enhancement.
//!
//! The model is an eight-level classical rate system covering both charge
//! states. Pulse protocols are piecewise-constant drive plans evolved
//! exactly with matrix exponentials; expected photon counts come from
//! augmented accumulator rows rather than quadrature. On top sit the
//! readout figures of merit, the cavity presets, and a deterministic
//! parallel sweep engine with a CLI.

pub mod cavity;
pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod propagator;
pub mod readout;
pub mod sequence;
pub mod sweep;
pub mod units;

pub use cavity::{preset, purcell_factor, purcell_factor_with, CavityParams, CavityPreset, PurcellConvention};
pub use config::Config;
pub use error::{NvError, Result};
pub use model::{
    build_generator, build_generator_opts, effective_rates, effective_rates_opts, DriveSettings,
    EnvLabel, EnvironmentProfile, GeneratorMatrix, LevelIndex, ModelOptions, PurcellTarget,
    RateOverrides, RateSet,
};
pub use propagator::{
    propagate_exact, propagate_trace, steady_state, EmissionAccumulator, PopulationState,
};
pub use readout::{
    readout_pair, relative_sensitivity, Channel, Efficiencies, ReadoutResult, SensitivityEstimate,
    Snr,
};
pub use sequence::{
    calibrate_pump, initial_state, ir_readout_protocol, red_readout_protocol, run_sequence,
    run_sequence_opts, trace_sequence, ChargeState, PulseSegment, PulseSequence, SpinState,
};
pub use sweep::{purcell_curve, run_sweep, AxisSpec, GridCell, GridResult, Scale, SweepProtocol, SweepSpec};
