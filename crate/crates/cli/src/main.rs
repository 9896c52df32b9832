mod bundled;
mod commands;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use commands::{Report, Suite, VerifyArgs};

/// Exact finite-model checks for calibrated martingale measures, semi-static
/// hedging and informed pricing.
///
/// SCENARIO is a path to a JSON file or the name of a bundled scenario.
/// Exit status: 0 when the reported check passes, 1 when it fails, 2 on input errors.
/// SEMISTATIC_THREADS sets the worker count; it never changes the output.
#[derive(Parser)]
#[command(name = "semistatic", version)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model and print its filtration.
    Validate { scenario: String },
    /// Vertices of the calibrated martingale measure set, in canonical order.
    Extremes { scenario: String },
    /// Semi-static completeness of a measure; fails if it disagrees with extremality.
    Complete {
        /// Vertex index, named measure, or inline weights like 1/4,1/2,1/4.
        #[arg(long)]
        measure: String,
        scenario: String,
    },
    /// Replicate a payoff under a measure; fails if it is not replicable.
    Replicate {
        #[arg(long)]
        payoff: String,
        #[arg(long)]
        measure: String,
        scenario: String,
    },
    /// Robust price: the maximum expectation over calibrated vertices.
    Price {
        #[arg(long)]
        payoff: String,
        scenario: String,
    },
    /// Cheapest dominating semi-static strategy.
    Superhedge {
        #[arg(long)]
        payoff: String,
        scenario: String,
    },
    /// Superhedging price against robust price, with complementary slackness.
    Duality {
        #[arg(long)]
        payoff: String,
        scenario: String,
    },
    /// Extract the atomic tree of a measure; fails when there is none.
    Tree {
        #[arg(long)]
        measure: String,
        scenario: String,
    },
    /// Enlarge by the scenario's jumps and check the compensated jump martingales.
    Enlarge {
        /// Inline weights over the enlarged atoms; uniform by default.
        #[arg(long)]
        measure: Option<String>,
        scenario: String,
    },
    /// Compare vertex sets and robust prices before and after enlargement.
    InformedCompare {
        /// Payoff names or inline vectors per outcome; all named payoffs by default.
        #[arg(long)]
        payoff: Vec<String>,
        scenario: String,
    },
    /// Seeded property suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the number of random cases per suite.
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long, default_value_t = 5)]
        pmax: u32,
        #[arg(long, default_value_t = 6)]
        mmax: u32,
    },
}

fn run(cmd: Command) -> Result<Report> {
    use commands as c;
    let load = |s: &str| bundled::resolve(s);
    Ok(match cmd {
        Command::Validate { scenario } => c::validate(&load(&scenario)?),
        Command::Extremes { scenario } => c::extremes(&load(&scenario)?),
        Command::Complete { measure, scenario } => c::complete(&load(&scenario)?, &measure)?,
        Command::Replicate { payoff, measure, scenario } => c::replicate_cmd(&load(&scenario)?, &payoff, &measure)?,
        Command::Price { payoff, scenario } => c::price(&load(&scenario)?, &payoff)?,
        Command::Superhedge { payoff, scenario } => c::superhedge_cmd(&load(&scenario)?, &payoff)?,
        Command::Duality { payoff, scenario } => c::duality(&load(&scenario)?, &payoff)?,
        Command::Tree { measure, scenario } => c::tree(&load(&scenario)?, &measure)?,
        Command::Enlarge { measure, scenario } => c::enlarge_cmd(&load(&scenario)?, measure.as_deref())?,
        Command::InformedCompare { payoff, scenario } => c::informed_compare_cmd(&load(&scenario)?, &payoff)?,
        Command::Verify {
            suite,
            seed,
            cases,
            pmax,
            mmax,
        } => c::verify_cmd(&VerifyArgs {
            suite,
            seed,
            cases,
            pmax,
            mmax,
        }),
    })
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SEMISTATIC_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("SEMISTATIC_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = init_threads().and_then(|_| run(cli.command));
    match outcome {
        Ok(report) => {
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).expect("reports serialize")
                ),
                Format::Text => print!("{}", report.text),
            }
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
