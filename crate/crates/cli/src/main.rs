use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fwm_core::experiment::{self, ExperimentConfig, FigureId, RunOptions};
use fwm_core::fitting::FitResult;
use fwm_core::harris_hau::{self, HarrisHauInputs, PHI_DRIVE_SCAN, TIGHT_FOCUS_CROSS_SECTION_RATIO};
use fwm_core::steady::{self, SteadyStateInputs};
use fwm_core::trace::{format_sig9, load_trace};
use fwm_core::units::{self, PhysicalConstants};
use fwm_core::{FwmError, Result};

/// EIT four-wave-mixing simulator.
///
/// Rates are in units of Γ, durations in μs.
#[derive(Parser, Debug)]
#[command(name = "fwm", version)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for multi-file results.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Evaluate sweeps with the closed-form steady state.
    #[arg(long, global = true)]
    analytic: bool,
    /// Run sweep points one after another.
    #[arg(long, global = true)]
    serial: bool,
    /// Multiply n_z and 1/dt by this factor.
    #[arg(long, global = true, value_name = "FACTOR")]
    grid_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form steady-state probe transmission and signal efficiency.
    Steady {
        #[arg(long)]
        omega_c: Option<f64>,
        #[arg(long)]
        omega_d: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        gamma31: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Propagate the configured pulses and write the envelope CSV.
    Propagate,
    /// Run the configured sweep.
    Sweep,
    /// Fit Ω_d and γ21 to a measured trace.
    Fit {
        /// Trace CSV; defaults to `fit.trace` of the config.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Pulsed-regime analytic efficiency ζ and its parameters η and r.
    HarrisHau {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        gamma31: Option<f64>,
        #[arg(long)]
        omega_c: Option<f64>,
        /// Probe duration T_p in μs.
        #[arg(long)]
        probe_duration_us: Option<f64>,
        /// Driving photons per atomic cross section N_d.
        #[arg(long, default_value_t = 60.0)]
        n_photons: f64,
        /// σ24 / A.
        #[arg(long, default_value_t = TIGHT_FOCUS_CROSS_SECTION_RATIO)]
        cross_section_ratio: f64,
        /// Φ(η, r).
        #[arg(long, default_value_t = PHI_DRIVE_SCAN)]
        phi: f64,
    },
    /// Run the bundled configuration of a figure.
    ReproduceFigure {
        /// fig2, fig3a, fig3b, fig4 or fig5.
        figure: String,
    },
    /// Convert between Rabi frequency, intensity, photon number and time units.
    ConvertUnits {
        /// Rabi frequency in Γ, converted to intensity.
        #[arg(long)]
        rabi: Option<f64>,
        /// Intensity in mW/cm², converted to Rabi frequency.
        #[arg(long)]
        intensity: Option<f64>,
        /// Pulse length in μs, for photon counts and Γ⁻¹ conversion.
        #[arg(long)]
        duration_us: Option<f64>,
        /// Time in Γ⁻¹, converted to μs.
        #[arg(long)]
        gamma_time: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    cli.config.as_ref().map(ExperimentConfig::load).transpose()
}

fn require_config(cli: &Cli) -> Result<ExperimentConfig> {
    load_config(cli)?.ok_or_else(|| FwmError::Config {
        field: "--config".into(),
        message: "this subcommand needs a configuration file".into(),
    })
}

fn pick(flag: Option<f64>, from_config: Option<f64>, name: &str) -> Result<f64> {
    flag.or(from_config).ok_or_else(|| FwmError::Config {
        field: format!("--{}", name.replace('_', "-")),
        message: "required without --config".into(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| FwmError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Prints or writes key=value output.
fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_options(cli: &Cli) -> RunOptions {
    RunOptions {
        parallel: !cli.serial,
        analytic: cli.analytic,
        grid_scale: cli.grid_scale,
    }
}

/// Single files go to `--out` (or `output.path`) or stdout; several files
/// need a directory.
fn deliver(cli: &Cli, config: &ExperimentConfig, files: &[(String, String)]) -> Result<()> {
    let target = cli
        .out
        .clone()
        .or_else(|| config.output.path.as_ref().map(PathBuf::from));
    match (files, target) {
        ([(_, text)], Some(path)) => {
            write_text(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        ([(_, text)], None) => print!("{text}"),
        (_, Some(dir)) => {
            for p in experiment::write_files(&dir, files)? {
                eprintln!("wrote {}", p.display());
            }
        }
        (_, None) => {
            return Err(FwmError::Config {
                field: "--out".into(),
                message: format!("{} series produce several files; give an output directory", files.len()),
            })
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let consts = PhysicalConstants::default();
    match &cli.command {
        Command::Steady {
            omega_c,
            omega_d,
            delta,
            gamma31,
            alpha,
        } => {
            let config = load_config(cli)?;
            let p = config.as_ref().map(|c| &c.params);
            let inputs = SteadyStateInputs {
                omega_c: pick(*omega_c, p.map(|p| p.omega_c), "omega_c")?,
                omega_d: pick(*omega_d, p.map(|p| p.omega_d), "omega_d")?,
                delta: pick(*delta, p.map(|p| p.delta), "delta")?,
                gamma31: pick(*gamma31, p.map(|p| p.gamma31), "gamma31")?,
                alpha: pick(*alpha, p.map(|p| p.alpha), "alpha")?,
            };
            let sol = steady::steady_state(&inputs)?;
            emit(
                cli,
                &format!(
                    "probe_transmission={}\nsignal_efficiency={}\n",
                    format_sig9(sol.probe_transmission),
                    format_sig9(sol.signal_efficiency)
                ),
            )
        }
        Command::Propagate => {
            let mut config = require_config(cli)?;
            config.sweep = None;
            let files = experiment::run_config(&config, "propagate", &run_options(cli))?;
            if files.len() == 1 {
                let t = fwm_core::trace::Trace::from_csv_str(&files[0].1)?;
                for key in ["conversion_efficiency", "energy_transmission_probe", "probe_delay_us"] {
                    if let Some(v) = t.metadata.get(key) {
                        eprintln!("{key}={v}");
                    }
                }
            }
            deliver(cli, &config, &files)
        }
        Command::Sweep => {
            let config = require_config(cli)?;
            if config.sweep.is_none() {
                return Err(FwmError::Config {
                    field: "sweep".into(),
                    message: "configuration has no [sweep] section".into(),
                });
            }
            let files = experiment::run_config(&config, "sweep", &run_options(cli))?;
            deliver(cli, &config, &files)
        }
        Command::Fit { trace } => {
            let mut config = require_config(cli)?;
            if let Some(f) = cli.grid_scale {
                config = config.with_grid_scale(f)?;
            }
            let path = match (trace, config.fit.as_ref().and_then(|f| f.trace.as_ref())) {
                (Some(p), _) => p.clone(),
                (None, Some(rel)) => {
                    let base = cli.config.as_ref().and_then(|c| c.parent()).unwrap_or(Path::new(""));
                    base.join(rel)
                }
                (None, None) => {
                    return Err(FwmError::Config {
                        field: "fit.trace".into(),
                        message: "no trace given (use --trace)".into(),
                    })
                }
            };
            let trace = load_trace(&path)?;
            let result = experiment::run_fit(&config, &trace)?;
            print!("{}", result.to_kv_block());
            if let Some(out) = &cli.out {
                write_text(out, &format!("{}\n{}\n", FitResult::CSV_HEADER, result.to_csv_row()))?;
            }
            Ok(())
        }
        Command::HarrisHau {
            alpha,
            delta,
            gamma31,
            omega_c,
            probe_duration_us,
            n_photons,
            cross_section_ratio,
            phi,
        } => {
            let config = load_config(cli)?;
            let p = config.as_ref().map(|c| &c.params);
            let alpha = pick(*alpha, p.map(|p| p.alpha), "alpha")?;
            let delta = pick(*delta, p.map(|p| p.delta), "delta")?;
            let gamma31 = pick(*gamma31, p.map(|p| p.gamma31), "gamma31")?;
            let omega_c = pick(*omega_c, p.map(|p| p.omega_c), "omega_c")?;
            let t_p = pick(
                *probe_duration_us,
                config.as_ref().map(|c| c.probe.duration_us),
                "probe_duration_us",
            )?;
            let t_d = consts.gamma_units_to_us(units::eit_delay_gamma_units(alpha, gamma31, omega_c)?);
            let eta = harris_hau::delay_ratio(t_d, t_p)?;
            let r = harris_hau::loss_parameter(alpha, delta, gamma31)?;
            let zeta = harris_hau::zeta(&HarrisHauInputs {
                n_drive_photons: *n_photons,
                cross_section_ratio: *cross_section_ratio,
                phi: *phi,
                eta,
                r,
            })?;
            emit(
                cli,
                &format!(
                    "delay_us={}\neta={}\nr={}\nzeta={}\n",
                    format_sig9(t_d),
                    format_sig9(eta),
                    format_sig9(r),
                    format_sig9(zeta)
                ),
            )
        }
        Command::ReproduceFigure { figure } => {
            let id: FigureId = figure.parse()?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            for p in experiment::reproduce_figure(id, &dir, &run_options(cli))? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::ConvertUnits {
            rabi,
            intensity,
            duration_us,
            gamma_time,
        } => {
            let mut out = String::new();
            let mut intensity_used = *intensity;
            if let Some(r) = rabi {
                let i = units::rabi_to_intensity(*r, &consts)?;
                out += &format!("intensity_mw_per_cm2={}\n", format_sig9(i));
                intensity_used = intensity_used.or(Some(i));
            }
            if let Some(i) = intensity {
                out += &format!("rabi={}\n", format_sig9(units::intensity_to_rabi(*i, &consts)?));
            }
            if let Some(d) = duration_us {
                out += &format!("duration_gamma_units={}\n", format_sig9(consts.us_to_gamma_units(*d)));
                if let Some(i) = intensity_used {
                    let n = units::photons_per_atomic_cross_section(i, d * 1e-6, &consts)?;
                    out += &format!("photons_per_cross_section={}\n", format_sig9(n));
                }
            }
            if let Some(t) = gamma_time {
                out += &format!("time_us={}\n", format_sig9(consts.gamma_units_to_us(*t)));
            }
            if out.is_empty() {
                return Err(FwmError::Config {
                    field: "convert-units".into(),
                    message: "give at least one of --rabi, --intensity, --duration-us, --gamma-time".into(),
                });
            }
            emit(cli, &out)
        }
    }
}
