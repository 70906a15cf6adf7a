use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use wvlab::commands::{cmd_estimate, cmd_fisher, cmd_spectrum, cmd_sweep, SweepAxis};
use wvlab::report::ResultBundle;
use wvlab::scenario::{Scenario, PRESET_NAMES};

const EXIT_CONFIG: u8 = 2;
const EXIT_STRICT: u8 = 3;

#[derive(Parser)]
#[command(name = "wvlab", version, about = "Weak-value vs. focused-beam deflection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Preset name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Overrides the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Fail with exit code 3 on numerical-regime warnings.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Modulation,
    Geometry,
}

#[derive(Subcommand)]
enum Command {
    /// Dark and bright port Fisher fractions over the post-selection angle.
    Fisher(Common),
    /// Averaged spectra of both techniques and their peak comparison.
    Spectrum(Common),
    /// Modulation sweeps or the geometric-factor surface.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "modulation")]
        axis: Axis,
    },
    /// Repeated kick estimates from plateau windows.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
    },
    /// Prints a scenario with all values in SI units.
    Show {
        #[arg(long)]
        scenario: String,
    },
    /// Lists the built-in presets.
    Presets,
}

enum Failure {
    Config(String),
    Strict,
    Other(String),
}

impl From<wvlab::Error> for Failure {
    fn from(e: wvlab::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

fn prepare(c: &Common) -> Result<Scenario, Failure> {
    let mut sc = Scenario::load(&c.scenario)?;
    if let Some(seed) = c.seed {
        sc.run.master_seed = seed;
    }
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    let warnings = sc.warnings()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if c.strict && !warnings.is_empty() {
        return Err(Failure::Strict);
    }
    Ok(sc)
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Other(e.to_string())),
        _ => Ok(()),
    }
}

fn report(b: &ResultBundle, out: &std::path::Path) -> Result<(), Failure> {
    let mut text = format!("{} {} (seed {})\n", b.command, b.scenario, b.seed);
    for f in &b.outputs {
        text += &format!("  {}\n", out.join(f).display());
    }
    emit(&text)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Fisher(c) => {
            let sc = prepare(&c)?;
            report(&cmd_fisher(&sc, &c.out)?, &c.out)?;
        }
        Command::Spectrum(c) => {
            let sc = prepare(&c)?;
            report(&cmd_spectrum(&sc, &c.out)?, &c.out)?;
        }
        Command::Sweep { common, axis } => {
            let sc = prepare(&common)?;
            let axis = match axis {
                Axis::Modulation => SweepAxis::Modulation,
                Axis::Geometry => SweepAxis::Geometry,
            };
            report(&cmd_sweep(&sc, axis, &common.out)?, &common.out)?;
        }
        Command::Estimate { common, repetitions } => {
            let sc = prepare(&common)?;
            report(&cmd_estimate(&sc, repetitions, &common.out)?, &common.out)?;
        }
        Command::Show { scenario } => {
            emit(&format!("{}\n", Scenario::load(&scenario)?.to_json()?))?;
        }
        Command::Presets => {
            let mut text = String::new();
            for name in PRESET_NAMES {
                let sc = Scenario::preset(name)?;
                text += &format!("{name:6} {}\n", sc.description);
            }
            emit(&text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Strict) => {
            eprintln!("error: numerical-regime warnings with --strict");
            ExitCode::from(EXIT_STRICT)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
