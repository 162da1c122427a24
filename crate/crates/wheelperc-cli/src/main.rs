//! `wheelperc`: exact and Monte Carlo connectivity-pattern distributions
//! of cylindrical loop percolation.
//!
//! Exit codes: 0 on success, 1 when a validation or cross-check reports a
//! mismatch, 2 on usage or resource errors. Data goes to stdout; progress
//! and diagnostics go to stderr.

mod cache;
mod commands;
mod error;
mod input;
mod output;
mod verify;

use clap::{Parser, Subcommand};

use commands::{Route, TableKind};
use error::CliError;
use output::Format;
use verify::Suite;

#[derive(Parser)]
#[command(
    name = "wheelperc",
    version,
    about = "Exact and Monte Carlo connectivity-pattern distributions of cylindrical loop percolation"
)]
struct Cli {
    /// Output format for the data stream.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact stationary distribution over noncrossing matchings.
    Mu {
        /// System order (half the number of boundary points).
        #[arg(long)]
        n: usize,
    },
    /// Integer change-of-basis matrix over the canonical matching order.
    Cmatrix {
        #[arg(long)]
        n: usize,
        /// Print the inverse matrix instead.
        #[arg(long)]
        tilde: bool,
    },
    /// Window numerator polynomial of a matching.
    Fpoly {
        /// Matching as a JSON arc list ("[[1,4],[2,3]]") or opener list ("1,2").
        #[arg(long)]
        matching: String,
    },
    /// Exact window-event probability at a finite order.
    Prob {
        #[arg(long)]
        matching: String,
        #[arg(long)]
        n: usize,
        /// Computation route; `both` cross-checks and fails on mismatch.
        #[arg(long, value_enum, default_value_t = Route::Ct)]
        route: Route,
    },
    /// Fit the window-event probability as a rational function of the order.
    Interpolate {
        #[arg(long)]
        matching: String,
        /// Check the fit at one extra node (always on for order <= 2).
        #[arg(long)]
        witness: bool,
    },
    /// Limiting window-event probability for the half plane.
    Halfplane {
        #[arg(long)]
        matching: String,
        /// Check the fit at one extra node (always on for order <= 2).
        #[arg(long)]
        witness: bool,
    },
    /// Probability that none of the first k points match one another.
    Anticluster {
        #[arg(long)]
        k: usize,
        /// System order; omit for the half-plane limit.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Constant-term evaluations.
    Ct {
        #[command(subcommand)]
        op: CtOp,
    },
    /// Monte Carlo estimate of an event probability.
    Simulate {
        #[arg(long)]
        n: usize,
        /// Event: "submatching:[[1,2]]", "anticluster:3", or "pairs:[[1,4],[2,3]]".
        #[arg(long)]
        event: String,
        /// Sample count; accepts scientific notation ("1e6").
        #[arg(long, default_value = "100000")]
        samples: String,
        /// Master seed; per-worker streams are derived from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run exact self-check suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Largest order exercised (individual checks cap lower).
        #[arg(long, default_value_t = 5)]
        max_n: usize,
    },
    /// Reproduce the half-plane value tables.
    Tables {
        #[arg(long, value_enum)]
        table: TableKind,
        /// Largest window order (submatching, default 3) or point count
        /// (anticluster, default 8).
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Subcommand)]
enum CtOp {
    /// Loop-configuration count via the constant-term formula, checked
    /// against the product formula.
    Asm {
        #[arg(long)]
        n: usize,
    },
    /// 1-evaluation of the wheel component of a weak opener sequence.
    Phi {
        /// Comma-separated weak opener sequence, e.g. "1,2".
        #[arg(long)]
        a: String,
    },
}

fn dispatch(command: Command, format: Format) -> Result<i32, CliError> {
    let result = match command {
        Command::Mu { n } => commands::cmd_mu(n)?,
        Command::Cmatrix { n, tilde } => commands::cmd_cmatrix(n, tilde)?,
        Command::Fpoly { matching } => commands::cmd_fpoly(&matching)?,
        Command::Prob { matching, n, route } => commands::cmd_prob(&matching, n, route)?,
        Command::Interpolate { matching, witness } => {
            commands::cmd_interpolate(&matching, witness)?
        }
        Command::Halfplane { matching, witness } => commands::cmd_halfplane(&matching, witness)?,
        Command::Anticluster { k, n } => commands::cmd_anticluster(k, n)?,
        Command::Ct { op } => match op {
            CtOp::Asm { n } => commands::cmd_ct_asm(n)?,
            CtOp::Phi { a } => commands::cmd_ct_phi(&a)?,
        },
        Command::Simulate { n, event, samples, seed } => {
            commands::cmd_simulate(n, &event, &samples, seed)?
        }
        Command::Verify { suite, max_n } => commands::cmd_verify(suite, max_n)?,
        Command::Tables { table, k } => commands::cmd_tables(table, k)?,
    };
    print!("{}", output::render(&result, format));
    Ok(result.exit)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let Cli { format, threads, command } = cli;
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(command, format))
        }
        None => dispatch(command, format),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}
