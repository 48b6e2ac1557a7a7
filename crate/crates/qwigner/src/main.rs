use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwigner::commands::{self, VerifyHooks};
use qwigner::config::{parse_spinor, parse_times, InitialKind, Method, OutputFormat, Preset, Settings};
use qwigner::Result;

/// Discrete-time coined quantum walk: distributions, Wigner fields,
/// negativity and coin entanglement.
#[derive(Debug, Parser)]
#[command(name = "qwigner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Position distribution and spread at the recorded times.
    Simulate,
    /// Export the Wigner field at the recorded times.
    WignerField,
    /// Negativity series for t = 0..=steps.
    Negativity,
    /// Entanglement entropy series for t = 0..=steps.
    Entropy,
    /// Cross-check both evolution routes and the marginal identities.
    Verify {
        #[arg(long, hide = true)]
        corrupt_field: bool,
    },
}

#[derive(Debug, Args)]
struct Flags {
    /// Coin angle in radians [default: π/4]
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Number of walk steps [default: 100]
    #[arg(long, global = true)]
    steps: Option<u64>,
    #[arg(long, global = true, value_enum)]
    initial: Option<InitialKind>,
    /// Half-separation a of the cat state
    #[arg(long, global = true)]
    cat_a: Option<u32>,
    /// Localized coin state as re_R,im_R,re_L,im_L
    #[arg(long, global = true, value_parser = parse_spinor, allow_hyphen_values = true)]
    coin_spinor: Option<[f64; 4]>,
    /// Momentum grid size [default: max(512, 8(steps+1))]
    #[arg(long, global = true)]
    k_points: Option<usize>,
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    /// Output directory [default: out]
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Comma-separated times to record [default: steps]
    #[arg(long, global = true, value_parser = |s: &str| parse_times(s).map(Times))]
    times: Option<Times>,
    /// key = value file; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Times(Vec<u64>);

impl Flags {
    fn settings(&self) -> Settings {
        Settings {
            theta: self.theta,
            steps: self.steps,
            initial: self.initial,
            cat_a: self.cat_a,
            coin_spinor: self.coin_spinor,
            k_points: self.k_points,
            method: self.method,
            output: self.output.clone(),
            format: self.format,
            times: self.times.clone().map(|t| t.0),
            preset: self.preset,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = Settings::layered(cli.flags.settings(), cli.flags.config.as_deref())?;
    for w in &config.warnings {
        eprintln!("warning: {w}");
    }
    let files = match cli.command {
        Command::Simulate => commands::run_simulate(&config)?,
        Command::WignerField => {
            let exports = commands::run_wigner_field(&config)?;
            for e in &exports {
                match e.normalization {
                    Some(norm) => eprintln!("t={}: {} rows, normalization {norm:.12}", e.t, e.rows),
                    None => eprintln!("t={}: {} rows", e.t, e.rows),
                }
            }
            exports.into_iter().map(|e| e.path).collect()
        }
        Command::Negativity => commands::run_negativity_series(&config)?,
        Command::Entropy => commands::run_entropy_series(&config)?,
        Command::Verify { corrupt_field } => {
            let report = commands::run_verify(&config, VerifyHooks { corrupt_field })?;
            print!("{report}");
            report.into_result()?;
            Vec::new()
        }
    };
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
