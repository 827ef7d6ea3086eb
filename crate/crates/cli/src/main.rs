use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pel_cli::config::{Format, RunConfig};
use pel_cli::report::Report;
use pel_cli::{commands, CliError, EXIT_VIOLATION};
use pel_core::hecke::PrimeBehavior;
use pel_core::weightspace::WeightTriple;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Behavior {
    Inert,
    Split,
}

#[derive(Debug, Parser)]
#[command(name = "pel", version, about = "Exact computations for Picard modular eigenvarieties at p")]
struct Cli {
    /// Odd prime.
    #[arg(long, global = true, default_value_t = 3)]
    p: u64,
    /// Relative precision in digits.
    #[arg(long, global = true, default_value_t = 20)]
    precision: u32,
    /// Character parameter, at least 1.
    #[arg(long, global = true, default_value_t = 1)]
    a: i64,
    /// Truncation sizes, strictly increasing.
    #[arg(long, global = true, value_delimiter = ',', default_value = "10,20")]
    schedule: Vec<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Behavior::Inert)]
    behavior: Behavior,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cache directory; PEL_CACHE_DIR takes precedence.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Component count, torsion enumeration and character decompositions.
    Weights {
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<WeightTriple>,
        /// JSON file with {"characters": [...]}; `-` reads stdin.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Newton polygons along the schedule with commutation and classicity checks.
    Slopes {
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        kappa: WeightTriple,
    },
    /// Classicity scans and BGG kernel dimensions along the schedule.
    Classicity {
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        kappa: WeightTriple,
    },
    /// Refinements of the endoscopic point, or of supplied eigenvalues.
    Refine {
        /// JSON file with {"kappa": [..], "eigenvalues": [..]}; `-` reads stdin.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Weak admissibility of {rank, hodge, slopes, f}.
    Admissible {
        /// JSON file; `-` reads stdin.
        #[arg(long)]
        input: PathBuf,
    },
    /// Reducibility case table.
    Eliminate {
        /// Hodge-Tate weights h1,h2,h3 (strictly increasing).
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        h: Option<Vec<i64>>,
    },
    /// Kernel of p^- on the polynomial model.
    GkKernel {
        #[arg(long)]
        degree: Option<u32>,
    },
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let cfg = RunConfig {
        p: cli.p,
        precision: cli.precision,
        schedule: cli.schedule,
        a: cli.a,
        prime_behavior: match cli.behavior {
            Behavior::Inert => PrimeBehavior::Inert,
            Behavior::Split => PrimeBehavior::Split,
        },
        format: cli.format,
        cache_dir: cli.cache_dir,
    }
    .with_env_cache();
    match cli.command {
        Command::Weights { kappa, input } => {
            let text = input.as_ref().map(read_input).transpose()?;
            commands::weights(&cfg, kappa, text.as_deref())
        }
        Command::Slopes { kappa } => commands::slopes(&cfg, kappa),
        Command::Classicity { kappa } => commands::classicity(&cfg, kappa),
        Command::Refine { input } => {
            let text = input.as_ref().map(read_input).transpose()?;
            commands::refine(&cfg, text.as_deref())
        }
        Command::Admissible { input } => commands::admissible(&cfg, &read_input(&input)?),
        Command::Eliminate { h } => {
            let h = h
                .map(|v| <[i64; 3]>::try_from(v).map_err(|v| CliError::Input(format!("--h needs 3 weights, got {}", v.len()))))
                .transpose()?;
            commands::eliminate(&cfg, h)
        }
        Command::GkKernel { degree } => commands::gk_kernel(&cfg, degree),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli).and_then(|r| Ok((r.render(format)?, r.violations.is_empty()))) {
        Ok((text, clean)) => {
            print!("{text}");
            if clean {
                ExitCode::SUCCESS
            } else {
                eprintln!("property violation detected");
                ExitCode::from(EXIT_VIOLATION as u8)
            }
        }
        Err(e) => {
            eprintln!("pel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
