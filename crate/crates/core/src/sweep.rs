//! Parameter-sweep engine: evaluates the readout pipeline over 1-D and
//! 2-D grids and serializes the results as CSV plus a JSON sidecar.
//!
//! Grid cells are independent and evaluated in parallel, but results are
//! merged in deterministic grid order: identical spec + config produce
//! byte-identical CSV regardless of worker count. `NVSIM_THREADS` caps
//! the worker pool.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{NvError, Result};
use crate::model::{EnvLabel, RateSet};
use crate::readout::readout_pair;
use crate::sequence::{ir_readout_protocol, red_readout_protocol, PulseSequence, TracePoint};

/// Axis spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

impl std::str::FromStr for Scale {
    type Err = NvError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(NvError::validation(format!(
                "unknown axis scale '{other}' (expected 'linear' or 'log')"
            ))),
        }
    }
}

/// One sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl AxisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(NvError::validation(format!(
                "axis '{}' needs at least 2 points, got {}",
                self.name, self.points
            )));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.min >= self.max {
            return Err(NvError::validation(format!(
                "axis '{}' range must satisfy min < max, got [{}, {}]",
                self.name, self.min, self.max
            )));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(NvError::validation(format!(
                "axis '{}' uses log scale, which requires min > 0 (got {})",
                self.name, self.min
            )));
        }
        Ok(())
    }

    /// Grid knots. Endpoints land exactly on `min` and `max`.
    pub fn knots(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                let frac = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.min + frac * (self.max - self.min),
                    Scale::Log => (self.min.ln() + frac * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }

    /// Parse the CLI form `name:min:max:points:scale`.
    pub fn parse_flag(s: &str) -> Result<AxisSpec> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 5 {
            return Err(NvError::validation(format!(
                "axis flag '{s}' must have the form name:min:max:points:scale"
            )));
        }
        let axis = AxisSpec {
            name: parts[0].to_string(),
            min: parts[1]
                .parse()
                .map_err(|_| NvError::validation(format!("axis min '{}' is not a number", parts[1])))?,
            max: parts[2]
                .parse()
                .map_err(|_| NvError::validation(format!("axis max '{}' is not a number", parts[2])))?,
            points: parts[3]
                .parse()
                .map_err(|_| NvError::validation(format!("axis points '{}' is not an integer", parts[3])))?,
            scale: parts[4].parse()?,
        };
        axis.validate()?;
        Ok(axis)
    }
}

/// Which pipeline the sweep drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepProtocol {
    RedMap,
    IrMap,
    PurcellCurve,
}

impl std::fmt::Display for SweepProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepProtocol::RedMap => write!(f, "red_map"),
            SweepProtocol::IrMap => write!(f, "ir_map"),
            SweepProtocol::PurcellCurve => write!(f, "purcell_curve"),
        }
    }
}

/// Full sweep description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis1: AxisSpec,
    pub axis2: Option<AxisSpec>,
    /// Constant parameters overriding the configured defaults.
    pub fixed: BTreeMap<String, f64>,
    pub protocol: SweepProtocol,
    pub environment: EnvLabel,
}

fn valid_axis_names(protocol: SweepProtocol) -> &'static [&'static str] {
    match protocol {
        SweepProtocol::RedMap => &["green_power_mw", "duration_us"],
        SweepProtocol::IrMap => &["ir_power_mw", "ir_duration_us"],
        SweepProtocol::PurcellCurve => &["purcell"],
    }
}

fn valid_fixed_names(protocol: SweepProtocol) -> &'static [&'static str] {
    match protocol {
        SweepProtocol::RedMap => &["green_power_mw", "duration_us", "purcell"],
        SweepProtocol::IrMap => &[
            "ir_power_mw",
            "ir_duration_us",
            "tau_us",
            "green_pump_power_mw",
            "green_pump_duration_us",
            "repetitions",
            "purcell",
        ],
        SweepProtocol::PurcellCurve => &[
            "ir_power_mw",
            "ir_duration_us",
            "tau_us",
            "green_pump_power_mw",
            "green_pump_duration_us",
            "repetitions",
        ],
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.name == self.axis1.name {
                return Err(NvError::validation(format!(
                    "both axes sweep '{}'",
                    self.axis1.name
                )));
            }
        }
        let axis_names = valid_axis_names(self.protocol);
        for axis in std::iter::once(&self.axis1).chain(self.axis2.iter()) {
            if !axis_names.contains(&axis.name.as_str()) {
                return Err(NvError::validation(format!(
                    "axis '{}' is not sweepable for {}; valid axes: {}",
                    axis.name,
                    self.protocol,
                    axis_names.join(", ")
                )));
            }
        }
        let fixed_names = valid_fixed_names(self.protocol);
        for name in self.fixed.keys() {
            if !fixed_names.contains(&name.as_str()) {
                return Err(NvError::validation(format!(
                    "fixed parameter '{}' is not valid for {}; valid names: {}",
                    name,
                    self.protocol,
                    fixed_names.join(", ")
                )));
            }
        }
        if self.protocol == SweepProtocol::PurcellCurve && self.axis2.is_some() {
            return Err(NvError::validation(
                "the Purcell curve is one-dimensional; drop the second axis",
            ));
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub n0: f64,
    pub n1: f64,
    pub snr: f64,
    pub snr_norm: f64,
    pub degenerate: bool,
}

/// Axis values as evaluated (explicit, so non-uniform lists round-trip).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValues {
    pub name: String,
    pub values: Vec<f64>,
}

/// Evaluated grid plus everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub schema: String,
    pub protocol: SweepProtocol,
    pub environment: EnvLabel,
    pub axis1: AxisValues,
    pub axis2: Option<AxisValues>,
    /// Per-cell constants after merging configured defaults and overrides.
    pub resolved_params: BTreeMap<String, f64>,
    pub cells: Vec<GridCell>,
    pub config_hash: String,
    /// Rate set with the environment overrides applied.
    pub resolved_rates: RateSet,
    /// The originating spec, when the grid came from a sweep.
    pub spec: Option<SweepSpec>,
    /// Full configuration, embedded so a result file can be re-run.
    pub config: Config,
}

pub const GRID_SCHEMA: &str = "grid_result_v1";

/// Bit-exact CSV header for grid artifacts.
pub const GRID_CSV_HEADER: &str = "axis1,axis2,n0,n1,snr,snr_norm,degenerate";

/// Header for trace exports (field names documented in the README).
pub const TRACE_CSV_HEADER: &str =
    "t_us, p_g0, p_g1, p_e0, p_e1, p_se, p_sg, p_n_g, p_n_e, red_cum, ir_cum";

#[derive(Debug, Clone, Copy)]
struct CellParams {
    green_power_mw: f64,
    duration_us: f64,
    ir_power_mw: f64,
    ir_duration_us: f64,
    tau_us: f64,
    green_pump_power_mw: f64,
    green_pump_duration_us: f64,
    repetitions: usize,
    purcell: f64,
}

impl CellParams {
    fn from_config(config: &Config) -> Self {
        let p = &config.protocol;
        CellParams {
            green_power_mw: p.red_power_mw,
            duration_us: p.red_duration_us,
            ir_power_mw: p.ir_power_mw,
            ir_duration_us: p.ir_duration_us,
            tau_us: p.tau_us,
            green_pump_power_mw: p.green_pump_power_mw,
            green_pump_duration_us: p.green_pump_duration_us,
            repetitions: p.repetitions,
            purcell: 1.0,
        }
    }

    fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "green_power_mw" => self.green_power_mw = value,
            "duration_us" => self.duration_us = value,
            "ir_power_mw" => self.ir_power_mw = value,
            "ir_duration_us" => self.ir_duration_us = value,
            "tau_us" => self.tau_us = value,
            "green_pump_power_mw" => self.green_pump_power_mw = value,
            "green_pump_duration_us" => self.green_pump_duration_us = value,
            "purcell" => self.purcell = value,
            "repetitions" => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(NvError::validation(format!(
                        "repetitions must be a positive integer, got {value}"
                    )));
                }
                self.repetitions = value as usize;
            }
            other => {
                return Err(NvError::validation(format!(
                    "unknown sweep parameter '{other}'"
                )))
            }
        }
        Ok(())
    }

    fn as_map(&self, protocol: SweepProtocol) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match protocol {
            SweepProtocol::RedMap => {
                m.insert("green_power_mw".into(), self.green_power_mw);
                m.insert("duration_us".into(), self.duration_us);
                m.insert("purcell".into(), self.purcell);
            }
            SweepProtocol::IrMap | SweepProtocol::PurcellCurve => {
                m.insert("ir_power_mw".into(), self.ir_power_mw);
                m.insert("ir_duration_us".into(), self.ir_duration_us);
                m.insert("tau_us".into(), self.tau_us);
                m.insert("green_pump_power_mw".into(), self.green_pump_power_mw);
                m.insert("green_pump_duration_us".into(), self.green_pump_duration_us);
                m.insert("repetitions".into(), self.repetitions as f64);
                if protocol == SweepProtocol::IrMap {
                    m.insert("purcell".into(), self.purcell);
                }
            }
        }
        m
    }

    fn build_protocol(&self, protocol: SweepProtocol) -> Result<PulseSequence> {
        match protocol {
            SweepProtocol::RedMap => red_readout_protocol(self.green_power_mw, self.duration_us),
            SweepProtocol::IrMap | SweepProtocol::PurcellCurve => ir_readout_protocol(
                self.green_pump_power_mw,
                self.green_pump_duration_us,
                self.tau_us,
                self.ir_power_mw,
                self.ir_duration_us,
                self.repetitions,
            ),
        }
    }
}

fn worker_pool() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var("NVSIM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                NvError::validation(format!("NVSIM_THREADS must be a positive integer, got '{v}'"))
            })?;
            if n == 0 {
                return Err(NvError::validation("NVSIM_THREADS must be >= 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| NvError::numeric(format!("worker pool construction failed: {e}")))?;
            Ok(Some(pool))
        }
    }
}

fn eval_cell(
    params: &CellParams,
    protocol: SweepProtocol,
    config: &Config,
    env: EnvLabel,
    axis1: f64,
    axis2: Option<f64>,
) -> Result<GridCell> {
    let seq = params.build_protocol(protocol)?;
    let rs = config.rate_set();
    let profile = config.environment(env);
    let result = readout_pair(
        &seq,
        &rs,
        &profile,
        params.purcell,
        &config.model_options(),
        config.efficiencies(),
    )?;
    let snr = result.snr();
    let snr_norm = if snr.degenerate {
        0.0
    } else {
        result.normalized_snr()?
    };
    Ok(GridCell {
        axis1,
        axis2,
        n0: result.n0,
        n1: result.n1,
        snr: snr.value,
        snr_norm,
        degenerate: snr.degenerate,
    })
}

/// Evaluate a sweep over its full grid. Cells are computed in parallel
/// and merged in row-major axis order.
pub fn run_sweep(spec: &SweepSpec, config: &Config) -> Result<GridResult> {
    spec.validate()?;
    config.validate()?;

    let mut base = CellParams::from_config(config);
    for (name, value) in &spec.fixed {
        base.set(name, *value)?;
    }

    let knots1 = spec.axis1.knots();
    let knots2 = spec.axis2.as_ref().map(|a| a.knots());

    let coords: Vec<(f64, Option<f64>)> = match &knots2 {
        None => knots1.iter().map(|a| (*a, None)).collect(),
        Some(k2) => knots1
            .iter()
            .flat_map(|a| k2.iter().map(move |b| (*a, Some(*b))))
            .collect(),
    };

    let evaluate = |(a1, a2): &(f64, Option<f64>)| -> Result<GridCell> {
        let mut params = base;
        params.set(&spec.axis1.name, *a1)?;
        if let (Some(v), Some(axis)) = (a2, &spec.axis2) {
            params.set(&axis.name, *v)?;
        }
        eval_cell(&params, spec.protocol, config, spec.environment, *a1, *a2)
    };

    let cells: Result<Vec<GridCell>> = match worker_pool()? {
        Some(pool) => pool.install(|| coords.par_iter().map(evaluate).collect()),
        None => coords.par_iter().map(evaluate).collect(),
    };
    let cells = cells?;

    Ok(GridResult {
        schema: GRID_SCHEMA.to_string(),
        protocol: spec.protocol,
        environment: spec.environment,
        axis1: AxisValues {
            name: spec.axis1.name.clone(),
            values: knots1,
        },
        axis2: spec.axis2.as_ref().map(|a| AxisValues {
            name: a.name.clone(),
            values: knots2.clone().unwrap(),
        }),
        resolved_params: base.as_map(spec.protocol),
        cells,
        config_hash: config.hash(),
        resolved_rates: config.environment(spec.environment).apply(&config.rate_set()),
        spec: Some(spec.clone()),
        config: config.clone(),
    })
}

/// Evaluate the IR readout across an explicit, sorted list of Purcell
/// factors at a fixed operating point.
pub fn purcell_curve(
    fp_values: &[f64],
    ir_power_mw: f64,
    ir_duration_us: f64,
    tau_us: f64,
    env: EnvLabel,
    config: &Config,
) -> Result<GridResult> {
    if fp_values.is_empty() {
        return Err(NvError::validation("purcell curve needs at least one value"));
    }
    for w in fp_values.windows(2) {
        if w[1] <= w[0] {
            return Err(NvError::validation(format!(
                "purcell values must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    if fp_values[0] < 1.0 {
        return Err(NvError::validation(format!(
            "purcell values must be >= 1, got {}",
            fp_values[0]
        )));
    }
    config.validate()?;

    let mut base = CellParams::from_config(config);
    base.ir_power_mw = ir_power_mw;
    base.ir_duration_us = ir_duration_us;
    base.tau_us = tau_us;

    let evaluate = |fp: &f64| -> Result<GridCell> {
        let mut params = base;
        params.purcell = *fp;
        eval_cell(&params, SweepProtocol::PurcellCurve, config, env, *fp, None)
    };

    let cells: Result<Vec<GridCell>> = match worker_pool()? {
        Some(pool) => pool.install(|| fp_values.par_iter().map(evaluate).collect()),
        None => fp_values.par_iter().map(evaluate).collect(),
    };
    let cells = cells?;

    Ok(GridResult {
        schema: GRID_SCHEMA.to_string(),
        protocol: SweepProtocol::PurcellCurve,
        environment: env,
        axis1: AxisValues {
            name: "purcell".to_string(),
            values: fp_values.to_vec(),
        },
        axis2: None,
        resolved_params: base.as_map(SweepProtocol::PurcellCurve),
        cells,
        config_hash: config.hash(),
        resolved_rates: config.environment(env).apply(&config.rate_set()),
        spec: None,
        config: config.clone(),
    })
}

impl GridResult {
    /// Best (highest-SNR) non-degenerate cell, if any.
    pub fn best_cell(&self) -> Option<&GridCell> {
        self.cells
            .iter()
            .filter(|c| !c.degenerate)
            .max_by(|a, b| a.snr.partial_cmp(&b.snr).expect("finite snr"))
    }

    /// Write the grid as CSV with the fixed schema header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{GRID_CSV_HEADER}")?;
        for c in &self.cells {
            let axis2 = c.axis2.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                c.axis1,
                axis2,
                c.n0,
                c.n1,
                c.snr,
                c.snr_norm,
                u8::from(c.degenerate)
            )?;
        }
        Ok(())
    }

    /// Write the JSON sidecar with spec, resolved rates, and config hash.
    pub fn write_sidecar<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)
            .map_err(|e| NvError::numeric(format!("sidecar serialization failed: {e}")))?;
        Ok(())
    }
}

/// Write a sequence trace as CSV.
pub fn write_trace_csv<W: Write>(points: &[TracePoint], mut w: W) -> Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for p in points {
        write!(w, "{}", p.t_us)?;
        for v in p.populations {
            write!(w, ", {v}")?;
        }
        writeln!(w, ", {}, {}", p.red_cum, p.ir_cum)?;
    }
    Ok(())
}
