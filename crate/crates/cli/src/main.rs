//! `cfnet` command-line front end. Node indices on the command line and in
//! every output are 1-based.

mod commands;
mod output;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(name = "cfnet", version, about = "Analyze additive networks of Chen-Fliess series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct NetArg {
    /// Network description (JSON).
    #[arg(long)]
    pub net: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generating series of the map v_i -> y_j, truncated at a degree.
    Iomap {
        #[command(flatten)]
        net: NetArg,
        /// Source node i (1-based).
        #[arg(long)]
        from: usize,
        /// Sink node j (1-based).
        #[arg(long)]
        to: usize,
        /// Truncation degree.
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Measured and predicted relative degree, for one pair or all pairs.
    Reldeg {
        #[command(flatten)]
        net: NetArg,
        #[arg(long, requires = "to")]
        from: Option<usize>,
        #[arg(long, requires = "from")]
        to: Option<usize>,
        #[arg(long)]
        degree: usize,
        /// Exit with status 1 unless the relative degree is measured and
        /// certified by a sufficient condition.
        #[arg(long)]
        require_certified: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Growth bound M_inf and escape-time lower bound t*.
    Bounds {
        /// Take Kbar, Mbar and m from a network of maximal nodes.
        #[arg(long, conflicts_with_all = ["k", "big_m", "m"])]
        net: Option<PathBuf>,
        /// Number of nodes.
        #[arg(long, required_unless_present = "net")]
        m: Option<usize>,
        /// Largest node constant K.
        #[arg(long = "K", id = "k", required_unless_present = "net")]
        k: Option<String>,
        /// Largest node growth constant M.
        #[arg(long = "M", id = "big_m", required_unless_present = "net")]
        big_m: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Taylor data of the maximal network's natural response.
    Abel {
        #[arg(long)]
        m: usize,
        #[arg(long = "K", default_value = "1")]
        k: String,
        #[arg(long = "M", default_value = "1")]
        big_m: String,
        /// Highest derivative order.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a network: the ODE realization for maximal nodes, Picard
    /// iteration for polynomial nodes.
    Simulate {
        #[command(flatten)]
        net: NetArg,
        /// Horizon T.
        #[arg(long = "T", default_value_t = 0.2)]
        horizon: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Constant input applied to every node.
        #[arg(long, default_value_t = 0.0)]
        input: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Relative degree under random weights on a fixed edge pattern.
    Montecarlo {
        /// Network whose nonzero weights define the edge pattern.
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        /// Pair whose coefficient distribution is recorded (1-based).
        #[arg(long, requires_all = ["to", "word"])]
        from: Option<usize>,
        #[arg(long, requires_all = ["from", "word"])]
        to: Option<usize>,
        /// Word of the recorded coefficient, e.g. "x0 x0 x1".
        #[arg(long, requires_all = ["from", "to"])]
        word: Option<String>,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        /// Worker threads (results do not depend on it).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the truncated series of v_i -> y_j against simulation.
    Validate {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long = "T", default_value_t = 0.1)]
        horizon: f64,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
        /// Constant input at the source node.
        #[arg(long, default_value_t = 1.0)]
        input: f64,
        /// Also run on [0, T/2] and report the observed error order.
        #[arg(long)]
        order: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the JSON schema of a subcommand's output.
    Schema {
        #[arg(value_parser = schema::NAMES)]
        command: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Iomap { net, from, to, degree, common } => commands::iomap(&net, from, to, degree, &common),
        Command::Reldeg { net, from, to, degree, require_certified, common } => {
            commands::reldeg(&net, from.zip(to), degree, require_certified, &common)
        }
        Command::Bounds { net, m, k, big_m, common } => commands::bounds(net.as_deref(), m, k, big_m, &common),
        Command::Abel { m, k, big_m, n, common } => commands::abel(m, &k, &big_m, n, &common),
        Command::Simulate { net, horizon, t0, steps, input, common } => {
            commands::simulate(&net, t0, horizon, steps, input, &common)
        }
        Command::Montecarlo { net, seed, samples, degree, from, to, word, bins, jobs, common } => {
            let designated = match (from, to, word) {
                (Some(f), Some(t), Some(w)) => Some((f, t, w)),
                _ => None,
            };
            commands::montecarlo(&net, seed, samples, degree, designated, bins, jobs, &common)
        }
        Command::Validate { net, from, to, degree, horizon, steps, input, order, common } => {
            commands::validate(&net, from, to, degree, horizon, steps, input, order, &common)
        }
        Command::Schema { command } => commands::schema(&command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(doc)) => {
            println!("{}", serde_json::to_string_pretty(&doc).expect("error document"));
            if let Some(msg) = doc["error"]["message"].as_str() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
    }
}
