use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use strainsafe::check::run_checks;
use strainsafe::config::{ResolvedRun, RunConfig};
use strainsafe::integrator::{replay, simulate, PressureProfile, SimulationError, SimulationTrace};
use strainsafe::material::scan_safe_set;
use strainsafe::{io, plot, ConfigError};

#[derive(Parser)]
#[command(
    name = "strainsafe",
    version,
    about = "Strain-energy safety filter for inflating elastomer tubes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration. Built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-loop simulation; writes trace.csv and pressure.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Log every n-th step.
        #[arg(long)]
        decimate: Option<usize>,
        /// Apply the nominal pressure unfiltered.
        #[arg(long)]
        no_filter: bool,
    },
    /// Barrier values on a stretch grid; writes safeset.csv.
    Safeset {
        #[command(flatten)]
        common: Common,
    },
    /// Open-loop replay of a `t,pressure_pa` history; writes trace.csv.
    Replay {
        #[command(flatten)]
        common: Common,
        /// Pressure history with header `t,pressure_pa`, covering the run
        pressure_csv: PathBuf,
        /// Log every n-th step
        #[arg(long)]
        decimate: Option<usize>,
    },
    /// Numerical self-checks; non-zero exit on any failure.
    Check {
        /// TOML run configuration. Built-in defaults when omitted
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum Failure {
    Config(ConfigError),
    Runtime(String),
}

/// Failures while writing results are runtime faults, not configuration errors.
fn output_failure(e: ConfigError) -> Failure {
    Failure::Runtime(e.to_string())
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn load(config: Option<&Path>, decimate: Option<usize>, no_filter: bool) -> Result<ResolvedRun, ConfigError> {
    let (mut cfg, base) = match config {
        Some(path) => (
            RunConfig::load(path)?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    if let Some(n) = decimate {
        cfg.output.decimate = n;
    }
    if no_filter {
        cfg.simulation.filter_enabled = false;
    }
    cfg.resolve(&base)
}

fn output_dir(run: &ResolvedRun, common: &Common) -> Result<PathBuf, Failure> {
    let dir = common.out.clone().unwrap_or_else(|| run.output.dir.clone());
    std::fs::create_dir_all(&dir).map_err(|source| {
        output_failure(ConfigError::Io {
            file: dir.clone(),
            source,
        })
    })?;
    Ok(dir)
}

fn write_svg(file: &Path, svg: &str) -> Result<(), Failure> {
    std::fs::write(file, svg).map_err(|source| {
        output_failure(ConfigError::Io {
            file: file.to_path_buf(),
            source,
        })
    })
}

fn write_trace_outputs(dir: &Path, trace: &SimulationTrace, plots: bool) -> Result<(), Failure> {
    io::write_trace(&dir.join("trace.csv"), trace).map_err(output_failure)?;
    if plots && !trace.is_empty() {
        for (name, svg) in plot::trace_panels(trace) {
            write_svg(&dir.join(name), &svg)?;
        }
    }
    Ok(())
}

fn finish(
    dir: &Path,
    result: Result<SimulationTrace, SimulationError>,
    plots: bool,
) -> Result<SimulationTrace, Failure> {
    match result {
        Ok(trace) => {
            write_trace_outputs(dir, &trace, plots)?;
            Ok(trace)
        }
        Err(fault) => {
            write_trace_outputs(dir, &fault.partial, plots)?;
            Err(Failure::Runtime(format!(
                "{fault} ({} rows written to {})",
                fault.partial.len(),
                dir.join("trace.csv").display()
            )))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            common,
            decimate,
            no_filter,
        } => {
            let run = load(common.config.as_deref(), decimate, no_filter)?;
            let dir = output_dir(&run, &common)?;
            let plots = common.plots || run.output.plots;
            let trace = finish(&dir, simulate(&run.simulation, &run.spec, &run.model), plots)?;
            io::write_pressure(&dir.join("pressure.csv"), &trace.pressure).map_err(output_failure)?;
            let active: usize = trace.rows.iter().filter(|r| r.active).count();
            println!(
                "{} rows, min h = {:.6e} J/m^3, filter active on {} rows -> {}",
                trace.len(),
                trace.min_h(),
                active,
                dir.display()
            );
            Ok(())
        }
        Command::Safeset { common } => {
            let run = load(common.config.as_deref(), None, false)?;
            let dir = output_dir(&run, &common)?;
            let s = &run.safeset;
            let grid = scan_safe_set(
                &run.model.material,
                run.spec.w_safe,
                (s.theta_range[0], s.theta_range[1]),
                (s.z_range[0], s.z_range[1]),
                (s.resolution[0], s.resolution[1]),
            )
            .map_err(|e| ConfigError::invalid("safeset", e.to_string()))?;
            io::write_safeset(&dir.join("safeset.csv"), &grid).map_err(output_failure)?;
            if common.plots || run.output.plots {
                write_svg(&dir.join("safeset.svg"), &plot::safeset_svg(&grid))?;
            }
            println!(
                "{} x {} grid, {} safe component(s) -> {}",
                grid.theta_axis.len(),
                grid.z_axis.len(),
                grid.safe_components(),
                dir.display()
            );
            Ok(())
        }
        Command::Replay {
            common,
            pressure_csv,
            decimate,
        } => {
            let run = load(common.config.as_deref(), decimate, false)?;
            let samples = io::read_pressure_csv(&pressure_csv)?;
            let profile = PressureProfile::new(&samples).map_err(|e| ConfigError::Csv {
                file: pressure_csv.clone(),
                message: e.to_string(),
            })?;
            if !profile.covers(0.0, run.simulation.t_end) {
                return Err(Failure::Config(ConfigError::Csv {
                    file: pressure_csv,
                    message: format!(
                        "samples span [{}, {}] but simulation.t_end = {}",
                        profile.start(),
                        profile.end(),
                        run.simulation.t_end
                    ),
                }));
            }
            let dir = output_dir(&run, &common)?;
            let plots = common.plots || run.output.plots;
            let trace = finish(&dir, replay(&profile, &run.simulation, &run.spec, &run.model), plots)?;
            println!(
                "{} rows, min h = {:.6e} J/m^3 -> {}",
                trace.len(),
                trace.min_h(),
                dir.display()
            );
            Ok(())
        }
        Command::Check { config } => {
            let run = load(config.as_deref(), None, false)?;
            if let Some(fit) = &run.tensile_fit {
                println!(
                    "tensile fit: mu = {:.6e} Pa (+/- {:.2e}), rms residual {:.3e} Pa",
                    fit.mu, fit.std_error, fit.residual_rms
                );
            }
            let report = run_checks(&run);
            print!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Runtime("one or more checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
    }
}
