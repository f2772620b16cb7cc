//! Command-line interface: maps, curves, traces, preset inspection, pump
//! calibration, and config validation.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad flags, bad
//! config, out-of-range parameters), 1 on numeric failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cavity::{preset, purcell_factor_with, CavityParams, CavityPreset, PurcellConvention};
use crate::config::Config;
use crate::error::{NvError, Result};
use crate::model::EnvLabel;
use crate::sequence::{calibrate_pump, trace_sequence, PulseSequence, PumpCalibrationSpec};
use crate::sweep::{
    purcell_curve, run_sweep, write_trace_csv, AxisSpec, Scale, SweepProtocol, SweepSpec,
};
use crate::units::{parse_duration_us, parse_power_mw};

#[derive(Parser, Debug)]
#[command(
    name = "nvsim",
    about = "NV-center photodynamics and spin-readout SNR simulator",
    version
)]
struct Cli {
    /// Configuration file (defaults to the embedded configuration).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonOut {
    /// Environment profile.
    #[arg(long, default_value = "bulk")]
    env: EnvLabel,

    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replay a sequence file and export the population/emission trace.
    Trace {
        #[command(flatten)]
        common: CommonOut,
        /// TOML sequence description.
        #[arg(long)]
        sequence: PathBuf,
        /// Samples per segment.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Purcell factor applied during the run.
        #[arg(long, default_value_t = 1.0)]
        purcell: f64,
    },
    /// Sweep the red readout over green power and duration.
    RedMap {
        #[command(flatten)]
        common: CommonOut,
        /// First axis as name:min:max:points:scale.
        #[arg(long, short = 'x')]
        x: Option<String>,
        /// Second axis as name:min:max:points:scale.
        #[arg(long, short = 'y')]
        y: Option<String>,
    },
    /// Sweep the IR readout over IR power and duration.
    IrMap {
        #[command(flatten)]
        common: CommonOut,
        #[arg(long, short = 'x')]
        x: Option<String>,
        #[arg(long, short = 'y')]
        y: Option<String>,
        /// Purcell factor applied across the map.
        #[arg(long, default_value_t = 1.0)]
        purcell: f64,
    },
    /// IR readout SNR versus Purcell factor at a fixed operating point.
    PurcellCurve {
        #[command(flatten)]
        common: CommonOut,
        /// Purcell axis as name:min:max:points:scale (name must be `purcell`).
        #[arg(long, short = 'x')]
        x: Option<String>,
        /// IR probe power (accepts unit suffixes, e.g. 1W).
        #[arg(long)]
        ir_power: Option<String>,
        /// IR probe duration (accepts unit suffixes, e.g. 1us).
        #[arg(long)]
        duration: Option<String>,
        /// Dark delay between pump and probe (e.g. 10ns).
        #[arg(long)]
        tau: Option<String>,
    },
    /// Print the Purcell factor of a preset or explicit Q/V in both
    /// prefactor conventions.
    Purcell {
        /// Cavity preset: nanodiamond, membrane, or bulk.
        #[arg(long)]
        preset: Option<CavityPreset>,
        /// Quality factor (with --v, instead of a preset).
        #[arg(long)]
        q: Option<f64>,
        /// Mode volume in (lambda/n)^3 units.
        #[arg(long)]
        v: Option<f64>,
        /// Highlighted convention.
        #[arg(long, default_value = "eq2")]
        convention: PurcellConvention,
    },
    /// Scan the green pump power for maximum spin contrast in the
    /// singlet-ground shelf.
    CalibratePump {
        #[command(flatten)]
        common: CommonOut,
        /// Pump duration (e.g. 300ns).
        #[arg(long)]
        duration: Option<String>,
        /// Dark delay after the pump (e.g. 10ns).
        #[arg(long)]
        tau: Option<String>,
        /// Power scan range, lower bound (e.g. 0.05mW).
        #[arg(long)]
        power_min: Option<String>,
        /// Power scan range, upper bound (e.g. 50mW).
        #[arg(long)]
        power_max: Option<String>,
        /// Number of scan points.
        #[arg(long, default_value_t = 120)]
        points: usize,
    },
    /// Parse and validate the configuration, printing its hash.
    ValidateConfig,
}

impl clap::builder::ValueParserFactory for EnvLabel {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<EnvLabel>().map_err(|e| e.to_string()))
    }
}

impl clap::builder::ValueParserFactory for CavityPreset {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| {
            s.parse::<CavityPreset>().map_err(|e| e.to_string())
        })
    }
}

impl clap::builder::ValueParserFactory for PurcellConvention {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| {
            s.parse::<PurcellConvention>().map_err(|e| e.to_string())
        })
    }
}

/// Parse arguments, run the requested computation, and return the process
/// exit status. All output files carry the config hash in their sidecar.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parse and run, returning the one-line summary instead of printing it.
/// Argument errors surface as validation errors.
pub fn cli_run<I, T>(argv: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)
        .map_err(|e| NvError::validation(e.render().to_string()))?;
    run(cli)
}

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::shipped_default()),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn default_axis(name: &str, min: f64, max: f64, points: usize) -> AxisSpec {
    AxisSpec {
        name: name.to_string(),
        min,
        max,
        points,
        scale: Scale::Log,
    }
}

fn axis_from_flag(flag: &Option<String>, fallback: AxisSpec) -> Result<AxisSpec> {
    match flag {
        Some(s) => AxisSpec::parse_flag(s),
        None => Ok(fallback),
    }
}

fn write_grid(
    grid: &crate::sweep::GridResult,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    ensure_out_dir(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    grid.write_csv(BufWriter::new(File::create(&csv_path)?))?;
    grid.write_sidecar(BufWriter::new(File::create(&json_path)?))?;
    Ok((csv_path, json_path))
}

fn run(cli: Cli) -> Result<String> {
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::ValidateConfig => Ok(format!("config OK (hash {})", config.hash())),

        Command::Purcell {
            preset: preset_label,
            q,
            v,
            convention,
        } => {
            let params: CavityParams = match (preset_label, q, v) {
                (Some(label), None, None) => preset(label),
                (None, Some(q), Some(v)) => CavityParams {
                    q,
                    v_norm: v,
                    wavelength_nm: 1042.0,
                    refractive_index: 2.4,
                    collection_efficiency: 0.45,
                    label: "custom".to_string(),
                    reported_fp: None,
                },
                _ => {
                    return Err(NvError::validation(
                        "pass either --preset or both --q and --v",
                    ))
                }
            };
            let fp_eq2 = purcell_factor_with(&params, PurcellConvention::Eq2)?;
            let fp_paper = purcell_factor_with(&params, PurcellConvention::PaperValues)?;
            let reported = params
                .reported_fp
                .map(|v| format!(", reported {v}"))
                .unwrap_or_default();
            Ok(format!(
                "{}: Q={} V={}(lambda/n)^3 -> F_p[eq2]={fp_eq2:.1} F_p[paper_values]={fp_paper:.1}{reported} (selected: {})",
                params.label,
                params.q,
                params.v_norm,
                match convention {
                    PurcellConvention::Eq2 => format!("{fp_eq2:.1}"),
                    PurcellConvention::PaperValues => format!("{fp_paper:.1}"),
                },
            ))
        }

        Command::Trace {
            common,
            sequence,
            samples,
            purcell,
        } => {
            let text = std::fs::read_to_string(&sequence)?;
            let seq = PulseSequence::from_toml(&text)?;
            let points = trace_sequence(
                &seq,
                &config.rate_set(),
                &config.environment(common.env),
                purcell,
                &config.model_options(),
                samples,
            )?;
            ensure_out_dir(&common.out)?;
            let csv_path = common.out.join("trace.csv");
            write_trace_csv(&points, BufWriter::new(File::create(&csv_path)?))?;
            let meta = serde_json::json!({
                "schema": "trace_v1",
                "config_hash": config.hash(),
                "environment": common.env,
                "purcell": purcell,
                "samples_per_segment": samples,
                "sequence": seq,
            });
            let json_path = common.out.join("trace.json");
            serde_json::to_writer_pretty(BufWriter::new(File::create(&json_path)?), &meta)
                .map_err(|e| NvError::numeric(format!("trace sidecar failed: {e}")))?;
            Ok(format!(
                "trace: {} points over {:.4} us -> {}",
                points.len(),
                seq.total_duration_us(),
                csv_path.display()
            ))
        }

        Command::RedMap { common, x, y } => {
            let s = &config.sweeps;
            let spec = SweepSpec {
                axis1: axis_from_flag(
                    &x,
                    default_axis(
                        "green_power_mw",
                        s.red_power_min_mw,
                        s.red_power_max_mw,
                        s.default_points,
                    ),
                )?,
                axis2: Some(axis_from_flag(
                    &y,
                    default_axis(
                        "duration_us",
                        s.red_duration_min_us,
                        s.red_duration_max_us,
                        s.default_points,
                    ),
                )?),
                fixed: BTreeMap::new(),
                protocol: SweepProtocol::RedMap,
                environment: common.env,
            };
            let grid = run_sweep(&spec, &config)?;
            let (csv_path, _) = write_grid(&grid, &common.out, "red_map")?;
            let best = grid.best_cell().map(|c| c.snr).unwrap_or(0.0);
            Ok(format!(
                "red-map [{}]: {} cells, peak SNR {:.4} -> {}",
                common.env,
                grid.cells.len(),
                best,
                csv_path.display()
            ))
        }

        Command::IrMap {
            common,
            x,
            y,
            purcell,
        } => {
            let s = &config.sweeps;
            let mut fixed = BTreeMap::new();
            fixed.insert("purcell".to_string(), purcell);
            let spec = SweepSpec {
                axis1: axis_from_flag(
                    &x,
                    default_axis(
                        "ir_power_mw",
                        s.ir_power_min_mw,
                        s.ir_power_max_mw,
                        s.default_points,
                    ),
                )?,
                axis2: Some(axis_from_flag(
                    &y,
                    default_axis(
                        "ir_duration_us",
                        s.ir_duration_min_us,
                        s.ir_duration_max_us,
                        s.default_points,
                    ),
                )?),
                fixed,
                protocol: SweepProtocol::IrMap,
                environment: common.env,
            };
            let grid = run_sweep(&spec, &config)?;
            let (csv_path, _) = write_grid(&grid, &common.out, "ir_map")?;
            let best = grid.best_cell().map(|c| c.snr).unwrap_or(0.0);
            Ok(format!(
                "ir-map [{}] F_p={}: {} cells, peak SNR {:.4} -> {}",
                common.env,
                purcell,
                grid.cells.len(),
                best,
                csv_path.display()
            ))
        }

        Command::PurcellCurve {
            common,
            x,
            ir_power,
            duration,
            tau,
        } => {
            let s = &config.sweeps;
            let axis = axis_from_flag(
                &x,
                default_axis("purcell", s.purcell_min, s.purcell_max, s.purcell_points),
            )?;
            if axis.name != "purcell" {
                return Err(NvError::validation(format!(
                    "purcell-curve sweeps 'purcell', got axis '{}'",
                    axis.name
                )));
            }
            let ir_power_mw = match &ir_power {
                Some(s) => parse_power_mw(s)?,
                None => config.protocol.ir_power_mw,
            };
            let ir_duration_us = match &duration {
                Some(s) => parse_duration_us(s)?,
                None => config.protocol.ir_duration_us,
            };
            let tau_us = match &tau {
                Some(s) => parse_duration_us(s)?,
                None => config.protocol.tau_us,
            };
            let grid = purcell_curve(
                &axis.knots(),
                ir_power_mw,
                ir_duration_us,
                tau_us,
                common.env,
                &config,
            )?;
            let (csv_path, _) = write_grid(&grid, &common.out, "purcell_curve")?;
            let last = grid.cells.last().expect("non-empty curve");
            Ok(format!(
                "purcell-curve [{}] {} points, SNR {:.4} at F_p={} -> {}",
                common.env,
                grid.cells.len(),
                last.snr,
                last.axis1,
                csv_path.display()
            ))
        }

        Command::CalibratePump {
            common,
            duration,
            tau,
            power_min,
            power_max,
            points,
        } => {
            let mut spec = PumpCalibrationSpec {
                pump_duration_us: config.protocol.green_pump_duration_us,
                tau_us: config.protocol.tau_us,
                power_points: points,
                ..PumpCalibrationSpec::default()
            };
            if let Some(d) = &duration {
                spec.pump_duration_us = parse_duration_us(d)?;
            }
            if let Some(t) = &tau {
                spec.tau_us = parse_duration_us(t)?;
            }
            if let Some(p) = &power_min {
                spec.power_min_mw = parse_power_mw(p)?;
            }
            if let Some(p) = &power_max {
                spec.power_max_mw = parse_power_mw(p)?;
            }
            let cal = calibrate_pump(
                &config.rate_set(),
                &config.environment(common.env),
                &config.model_options(),
                &spec,
            )?;
            ensure_out_dir(&common.out)?;
            let csv_path = common.out.join("pump_calibration.csv");
            let mut w = BufWriter::new(File::create(&csv_path)?);
            use std::io::Write;
            writeln!(w, "power_mw,singlet_ground_contrast")?;
            for (p, c) in &cal.samples {
                writeln!(w, "{p},{c}")?;
            }
            Ok(format!(
                "calibrate-pump [{}] at {} us pump: best {:.4} mW (contrast {:.4}) -> {}",
                common.env,
                spec.pump_duration_us,
                cal.best_power_mw,
                cal.best_contrast,
                csv_path.display()
            ))
        }
    }
}
