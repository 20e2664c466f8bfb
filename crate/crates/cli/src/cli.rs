//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage or configuration error (including
//! unwritable output paths), 2 physics or solver error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use cnt_coherence::analytics::cpt_threshold;
use cnt_coherence::presets::DIPOLE_EA;
use cnt_coherence::scenario::ScenarioName;
use cnt_coherence::units::{
    intensity_from_pulse, intensity_from_rabi, parse_quantity, parse_rate_or_lifetime, rabi_from_intensity,
    ConversionMode, Dimension,
};

use crate::config::{parse_config_for, Format, RunConfig, Selection};
use crate::output::{render, write_results};
use crate::solve;

/// Directory for result files when neither `--out` nor the config names a path.
pub const OUT_DIR_ENV: &str = "CNT_COHERENCE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "cnt-coherence",
    version,
    about = "Bright/dark exciton coherence simulator for carbon nanotubes"
)]
struct Cli {
    /// Only print warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named scenario (see list-scenarios).
    Scenario {
        name: String,
        #[command(flatten)]
        io: RunArgs,
    },
    /// Stationary state of the CW model in a config.
    Steady {
        #[command(flatten)]
        io: RunArgs,
    },
    /// Time evolution of the model in a config.
    Evolve {
        #[command(flatten)]
        io: RunArgs,
    },
    /// Dark-state threshold Rabi frequency and intensity.
    Threshold {
        /// Dark–ground coherence decay, 1/s (or a quantity such as "1 us").
        #[arg(long, allow_hyphen_values = true)]
        gamma_cb: String,
        /// Bright–ground coherence decay, 1/s.
        #[arg(long, allow_hyphen_values = true)]
        gamma_ab: String,
        #[arg(long, value_enum, default_value = "paper_fit")]
        mode: ModeArg,
        /// Transition dipole in e·Å, used by the physical conversion.
        #[arg(long, default_value_t = DIPOLE_EA)]
        dipole: f64,
    },
    /// Unit conversions between intensity and Rabi frequency.
    Convert {
        #[command(subcommand)]
        what: Convert,
    },
    /// Print the available scenarios.
    ListScenarios,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// TOML config (see docs/config.md).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; "-" writes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand, Debug)]
enum Convert {
    /// Intensity (W/cm², or a quantity such as "2 kW/cm2") to Rabi frequency.
    Intensity {
        value: String,
        #[arg(long, value_enum, default_value = "paper_fit")]
        mode: ModeArg,
        #[arg(long, default_value_t = DIPOLE_EA)]
        dipole: f64,
    },
    /// Rabi frequency (rad/s) to intensity.
    Rabi {
        value: String,
        #[arg(long, value_enum, default_value = "paper_fit")]
        mode: ModeArg,
        #[arg(long, default_value_t = DIPOLE_EA)]
        dipole: f64,
    },
    /// Mean intensity of a pulse: energy / (duration × spot area).
    Pulse {
        /// e.g. "1 uJ"
        #[arg(long)]
        energy: String,
        /// e.g. "1 ps"
        #[arg(long)]
        duration: String,
        /// e.g. "1 cm2"
        #[arg(long)]
        area: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    #[value(name = "paper_fit")]
    PaperFit,
    Physical,
}

impl ModeArg {
    fn mode(self, dipole_ea: f64) -> ConversionMode {
        match self {
            ModeArg::PaperFit => ConversionMode::PaperFit,
            ModeArg::Physical => ConversionMode::Physical { dipole_ea },
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

enum Failure {
    Usage(String),
    Physics(String),
}

impl From<cnt_coherence::error::Error> for Failure {
    fn from(e: cnt_coherence::error::Error) -> Self {
        Failure::Physics(e.to_string())
    }
}

/// Runs the CLI on `argv` (program name first) with the process streams.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    cli_run(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// As [`cli_main`], writing results to `out` and diagnostics to `err`.
pub fn cli_run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    init_logging(cli.quiet);
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Physics(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn init_logging(quiet: bool) {
    let level = if quiet {
        log::LevelFilter::Warn
    } else {
        log::LevelFilter::Info
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("RUST_LOG")
        .format_timestamp(None)
        .try_init();
    log::set_max_level(level);
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Scenario { name, io } => {
            let name: ScenarioName = name.parse().map_err(|_| {
                let names: Vec<&str> = ScenarioName::ALL.iter().map(|n| n.name()).collect();
                Failure::Usage(format!(
                    "unknown scenario '{name}' (expected one of: {})",
                    names.join(", ")
                ))
            })?;
            run_config(Selection::Scenario(name), io, out)
        }
        Command::Steady { io } => run_config(Selection::Steady, io, out),
        Command::Evolve { io } => run_config(Selection::Evolve, io, out),
        Command::Threshold {
            gamma_cb,
            gamma_ab,
            mode,
            dipole,
        } => {
            let (g_cb, g_ab) = (rate_arg("--gamma-cb", &gamma_cb)?, rate_arg("--gamma-ab", &gamma_ab)?);
            let th = cpt_threshold(g_cb, g_ab, mode.mode(dipole))?;
            print(
                out,
                &format!("Ω_th = {:.1e} rad/s, P_th = {:.1e} W/cm²", th.rabi, th.intensity),
            )
        }
        Command::Convert { what } => match what {
            Convert::Intensity { value, mode, dipole } => {
                let p = quantity_arg("intensity", &value, Dimension::Intensity)?;
                let omega = rabi_from_intensity(p, mode.mode(dipole))?;
                print(out, &format!("Ω = {omega:e} rad/s"))
            }
            Convert::Rabi { value, mode, dipole } => {
                let omega = quantity_arg("rabi", &value, Dimension::AngularFrequency)?;
                let p = intensity_from_rabi(omega, mode.mode(dipole))?;
                print(out, &format!("P = {p:e} W/cm²"))
            }
            Convert::Pulse { energy, duration, area } => {
                let e = quantity_arg("--energy", &energy, Dimension::PulseEnergy)?;
                let t = quantity_arg("--duration", &duration, Dimension::Time)?;
                let a = quantity_arg("--area", &area, Dimension::Area)?;
                print(out, &format!("I = {:e} W/cm²", intensity_from_pulse(e, t, a)?))
            }
        },
        Command::ListScenarios => {
            for n in ScenarioName::ALL {
                print(out, &format!("{:<18} {}", n.name(), n.description()))?;
            }
            Ok(())
        }
    }
}

fn print(out: &mut dyn Write, line: &str) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

/// A bare number in the canonical unit, or a number with a unit.
fn quantity_arg(flag: &str, text: &str, dim: Dimension) -> Result<f64, Failure> {
    if let Ok(x) = text.trim().parse::<f64>() {
        return Ok(x);
    }
    parse_quantity(text, dim).map_err(|e| Failure::Usage(format!("{flag}: {e}")))
}

fn rate_arg(flag: &str, text: &str) -> Result<f64, Failure> {
    if let Ok(x) = text.trim().parse::<f64>() {
        return Ok(x);
    }
    parse_rate_or_lifetime(text).map_err(|e| Failure::Usage(format!("{flag}: {e}")))
}

fn run_config(selection: Selection, io: RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg: RunConfig = match &io.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let resolved = parse_config_for(&text, Some(selection))
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            if !resolved.defaulted.is_empty() {
                log::info!("defaults applied: {}", resolved.defaulted.join(", "));
            }
            resolved.config
        }
        None if selection == Selection::Steady || selection == Selection::Evolve => {
            return Err(Failure::Usage(format!("{} needs --config", selection.label())));
        }
        None => RunConfig::defaults(selection),
    };
    let format: Format = io.format.map(Format::from).or(cfg.output.format).unwrap_or(Format::Csv);
    let path = io.out.clone().or_else(|| cfg.output.path.clone()).unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        dir.join(format!("{}.{}", selection.label(), format.extension()))
    });

    log::info!("running {}", selection.label());
    let start = std::time::Instant::now();
    let table = solve::run(&cfg)?;
    log::info!("{} rows in {:.2} s", table.rows.len(), start.elapsed().as_secs_f64());

    if path == Path::new("-") {
        out.write_all(render(&table, format).as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))?;
    } else {
        write_results(&table, format, &path).map_err(|e| Failure::Usage(e.to_string()))?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}
