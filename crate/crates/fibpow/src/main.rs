//! Command-line front end.  Runs individual verification stages or the
//! whole pipeline, appends one JSON certificate per stage to the log, and
//! exits 0 / 1 / 2 / 3 for verified / failed / error / invalid
//! configuration, so CI can regression-test every published constant.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fibpow::cert::{CertWriter, Certificate, Quantity, Stage, Verdict};
use fibpow::config::{parse_decimal_int, parse_range, Config};
use fibpow::error::{Error, Result};
use fibpow::heights::chain::Scenario;
use fibpow::kfib::kfib_at;
use fibpow::stages;

#[derive(Parser)]
#[command(
    name = "fibpow",
    version,
    about = "Certified arithmetic for powers of consecutive k-generalized Fibonacci numbers"
)]
struct Cli {
    /// TOML configuration file; built-in desk defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Certificate log; one JSON document per line, appended.
    #[arg(long, global = true, default_value = "certificates.jsonl")]
    certificates: PathBuf,

    /// Worker threads (overrides the FIBPOW_WORKERS environment variable).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print the stage plan and exit without computing or writing anything.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one term of the order-k recurrence.
    Fib {
        /// Recurrence order.
        #[arg(long)]
        k: u64,
        /// Term index; negative indices reach into the zero seed.
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Certify dominant-root and growth-constant enclosures.
    Root {
        /// Order range, e.g. 3..10.
        #[arg(long)]
        k: Option<String>,
    },
    /// Re-derive the absolute bound chain.
    Bounds {
        /// small-m, large-m, or both (default).
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run the convergent reduction grid.
    Reduce {
        /// Order range, e.g. 3..5.
        #[arg(long)]
        k: Option<String>,
        /// Shift range, e.g. 3..6.
        #[arg(long)]
        m: Option<String>,
        /// Reduction parameter M as a decimal integer, e.g. 2.64e35.
        #[arg(long = "M")]
        cap: Option<String>,
        /// First convergent index to try.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Certify convergent denominator and partial-quotient thresholds.
    Legendre {
        /// Order range, e.g. 3..242.
        #[arg(long)]
        k: Option<String>,
        /// Highest partial-quotient index to expand.
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Exhaustively search a window for solutions.
    Search {
        /// Order range, e.g. 3..5.
        #[arg(long)]
        k: Option<String>,
        /// Shift range, e.g. 3..30.
        #[arg(long)]
        m: Option<String>,
        /// Exponent range, e.g. 2..30.
        #[arg(long)]
        x: Option<String>,
    },
    /// Scan the closing minimization over both denominator variants.
    FinalMin {
        /// Exponent range, e.g. 20..150.
        #[arg(long)]
        x: Option<String>,
        /// Order range, e.g. 3..5.
        #[arg(long)]
        k: Option<String>,
    },
    /// Run every stage in proof order, stopping at the first failure.
    Pipeline,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ConfigInvalid(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    configure_workers(cli.workers)?;
    let mut cfg = Config::load(cli.config.as_deref())?;
    apply_overrides(&cli.command, &mut cfg)?;
    let scenarios = match &cli.command {
        Command::Bounds { scenario } => scenarios_for(scenario.as_deref())?,
        _ => vec![Scenario::SmallM, Scenario::LargeM],
    };

    if cli.dry_run {
        print_plan(&cli.command);
        return Ok(0);
    }

    if let Command::Fib { k, n } = cli.command {
        println!("{}", kfib_at(k, n)?);
        return Ok(0);
    }

    let mut writer = CertWriter::append(&cli.certificates)?;
    let certs: Vec<Certificate> = match &cli.command {
        Command::Pipeline => stages::run_pipeline(&cfg, |cert| {
            writer.write(cert)?;
            report(cert);
            Ok(())
        })?,
        Command::Bounds { .. } => {
            let cert = stages::run_bound_chain_scenarios(&cfg, &scenarios);
            writer.write(&cert)?;
            report(&cert);
            vec![cert]
        }
        command => {
            let stage = stage_of(command).expect("fib and pipeline handled above");
            let cert = stages::run_stage(stage, &cfg);
            writer.write(&cert)?;
            report(&cert);
            vec![cert]
        }
    };

    Ok(certs
        .iter()
        .map(|c| match c.verdict {
            Verdict::Verified => 0,
            Verdict::Failed => 1,
            Verdict::Error => 2,
        })
        .max()
        .unwrap_or(0))
}

/// Worker count resolution: flag beats environment beats library default.
fn configure_workers(flag: Option<usize>) -> Result<()> {
    let count = match flag {
        Some(n) => Some(n),
        None => match std::env::var("FIBPOW_WORKERS") {
            Ok(raw) => Some(raw.trim().parse().map_err(|_| {
                Error::ConfigInvalid(format!("FIBPOW_WORKERS must be a positive integer, got {raw:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = count {
        if n == 0 {
            return Err(Error::ConfigInvalid("worker count must be positive".into()));
        }
        // A second build_global in the same process is harmless; the first
        // pool wins and the error is deliberately ignored.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn apply_overrides(command: &Command, cfg: &mut Config) -> Result<()> {
    match command {
        Command::Fib { .. } | Command::Bounds { .. } | Command::Pipeline => {}
        Command::Root { k } => {
            if let Some(k) = k {
                cfg.root.k_range = parse_range(k)?;
            }
        }
        Command::Reduce { k, m, cap, index } => {
            if let Some(k) = k {
                cfg.reduce.k_range = parse_range(k)?;
            }
            if let Some(m) = m {
                cfg.reduce.m_range = parse_range(m)?;
            }
            if let Some(cap) = cap {
                cfg.reduce.cap = parse_decimal_int(cap)?;
            }
            if let Some(index) = index {
                cfg.reduce.start_index = *index;
            }
        }
        Command::Legendre { k, terms } => {
            if let Some(k) = k {
                cfg.legendre.k_range = parse_range(k)?;
            }
            if let Some(terms) = terms {
                cfg.legendre.terms = *terms;
            }
        }
        Command::Search { k, m, x } => {
            if let Some(k) = k {
                cfg.search.k_range = parse_range(k)?;
            }
            if let Some(m) = m {
                cfg.search.m_range = parse_range(m)?;
            }
            if let Some(x) = x {
                cfg.search.x_range = parse_range(x)?;
            }
        }
        Command::FinalMin { x, k } => {
            if let Some(x) = x {
                cfg.final_min.x_range = parse_range(x)?;
            }
            if let Some(k) = k {
                cfg.final_min.k_range = parse_range(k)?;
            }
        }
    }
    Ok(())
}

fn scenarios_for(flag: Option<&str>) -> Result<Vec<Scenario>> {
    match flag {
        None | Some("both") => Ok(vec![Scenario::SmallM, Scenario::LargeM]),
        Some("small-m") => Ok(vec![Scenario::SmallM]),
        Some("large-m") => Ok(vec![Scenario::LargeM]),
        Some(other) => Err(Error::ConfigInvalid(format!(
            "scenario must be small-m, large-m, or both, got {other:?}"
        ))),
    }
}

fn stage_of(command: &Command) -> Option<Stage> {
    match command {
        Command::Fib { .. } | Command::Pipeline => None,
        Command::Root { .. } => Some(Stage::Root),
        Command::Bounds { .. } => Some(Stage::BoundChain),
        Command::Reduce { .. } => Some(Stage::DpReduction),
        Command::Legendre { .. } => Some(Stage::Legendre),
        Command::Search { .. } => Some(Stage::Search),
        Command::FinalMin { .. } => Some(Stage::FinalMin),
    }
}

fn print_plan(command: &Command) {
    match command {
        Command::Fib { k, n } => println!("would print term n={n} of order k={k}"),
        Command::Pipeline => {
            for stage in stages::PIPELINE_ORDER {
                println!("would run {}", stage.name());
            }
        }
        other => {
            let stage = stage_of(other).expect("single-stage command");
            println!("would run {}", stage.name());
        }
    }
}

/// One stdout line per certificate, plus failure details when present.
fn report(cert: &Certificate) {
    println!("{}: {}", cert.stage.name(), cert.verdict.name());
    for key in ["error", "broken-scenario", "broken-stage", "broken-detail"] {
        if let Some(Quantity::Text { value }) = cert.quantity(key) {
            println!("  {key}: {value}");
        }
    }
}
