mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

/// Certified bounds and exact search for modular Sperner-type set systems.
#[derive(Debug, Parser)]
#[command(name = "sperner", version)]
pub struct Cli {
    /// Emit one JSON document on standard output.
    #[arg(long, global = true)]
    pub json: bool,

    /// Node budget for exact searches.
    #[arg(long, global = true, env = "SPERNER_BUDGET")]
    pub budget: Option<u64>,

    /// Seed for randomized work; recorded in JSON output.
    #[arg(long, global = true, default_value_t = commands::DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// p-adic valuation of an integer or of its factorial.
    Vp {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        n: String,
        /// Valuate n! instead of n.
        #[arg(long)]
        factorial: bool,
    },
    /// C(x, y) with its p-adic valuation (Kummer) and the Lucas test.
    Binom {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
    },
    /// Base-p digits of s below q, most significant first.
    Digits {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        s: u64,
    },
    /// Shortest q-closed interval containing lo..hi.
    Closure {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
    },
    /// The closure-length bound mu_q(s).
    Mu {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        s: u64,
    },
    /// Count of q-closed intervals against the closed form.
    Census {
        #[arg(long)]
        q: u64,
    },
    /// Separating polynomials.
    #[command(subcommand)]
    Seppoly(SeppolyCommand),
    /// Best certified upper bound with the full audit trail.
    Bound(SpecArgs),
    /// Bounds for every interval L, with brute force for small n.
    Table {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        /// Largest n for which brute force runs.
        #[arg(long, default_value_t = 7)]
        brute_max: usize,
    },
    /// Exact maximum family by clique search.
    Search(SpecArgs),
    /// Checks a family file against a constraint.
    Check {
        #[command(flatten)]
        spec: FileSpecArgs,
    },
    /// Pushes an antichain into the band [s, n - s].
    Push {
        #[arg(long)]
        file: String,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Builds the proof polynomials for a family and checks their rank.
    Verify {
        #[command(flatten)]
        spec: FileSpecArgs,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SeppolyCommand {
    /// Checks one factored polynomial.
    Check {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        alpha: i64,
        #[arg(long = "L", alias = "l")]
        l: String,
        /// Comma-separated integer roots.
        #[arg(long, allow_hyphen_values = true)]
        roots: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        lead: i64,
    },
    /// Lowest-degree monic polynomial with roots in [0, window).
    Find {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        alpha: i64,
        #[arg(long = "L", alias = "l")]
        l: String,
        #[arg(long)]
        max_degree: usize,
        /// Exclusive upper end of the root window; defaults to q^2.
        #[arg(long)]
        window: Option<i64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q: Option<u64>,
    /// Comma list, a..b, or a..b@wrap.
    #[arg(long = "L", alias = "l", default_value = "")]
    pub l: String,
    /// The residue k for intersecting-uniform.
    #[arg(long)]
    pub residue: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct FileSpecArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub file: String,
    /// Ground-set size; defaults to the largest element in the file.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long = "L", alias = "l", default_value = "")]
    pub l: String,
    #[arg(long)]
    pub residue: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Mid-band system for [s]-differencing families.
    Sym,
    /// Mid-band system for [s]-close families.
    Close,
    /// F block (x_n - 1) I_j.
    MinusOne,
    /// F block x_n I_j.
    Plain,
    /// No F block.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Infeasible,
    BudgetExhausted,
    Error,
}

/// What a command produced, before formatting.
pub struct Outcome {
    pub status: Status,
    pub payload: Value,
    pub text: String,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    pub fn ok(payload: Value, text: impl Into<String>) -> Self {
        Outcome { status: Status::Ok, payload, text: text.into(), diagnostics: Vec::new() }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn note(mut self, d: impl Into<String>) -> Self {
        self.diagnostics.push(d.into());
        self
    }
}

pub enum Failure {
    Usage(String),
    Internal(String),
}

impl From<sperner_core::Error> for Failure {
    fn from(e: sperner_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Vp { .. } => "vp",
        Command::Binom { .. } => "binom",
        Command::Digits { .. } => "digits",
        Command::Closure { .. } => "closure",
        Command::Mu { .. } => "mu",
        Command::Census { .. } => "census",
        Command::Seppoly(_) => "seppoly",
        Command::Bound(_) => "bound",
        Command::Table { .. } => "table",
        Command::Search(_) => "search",
        Command::Check { .. } => "check",
        Command::Push { .. } => "push",
        Command::Verify { .. } => "verify",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let (outcome, code) = match commands::dispatch(&cli) {
        Ok(o) => {
            let code = match o.status {
                Status::Ok | Status::Infeasible => 0,
                Status::BudgetExhausted => 3,
                Status::Error => 1,
            };
            (o, code)
        }
        Err(Failure::Usage(msg)) => (error_outcome(msg), 2),
        Err(Failure::Internal(msg)) => (error_outcome(msg), 1),
    };
    let mut stdout = std::io::stdout().lock();
    // A closed pipe on stdout is not an error worth reporting.
    let _ = if cli.json {
        let doc = json!({
            "schema": 1,
            "command": name,
            "seed": cli.seed,
            "status": outcome.status,
            "payload": outcome.payload,
            "diagnostics": outcome.diagnostics,
        });
        writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("JSON values always serialize"))
    } else {
        for d in &outcome.diagnostics {
            eprintln!("note: {d}");
        }
        if outcome.text.is_empty() {
            Ok(())
        } else {
            writeln!(stdout, "{}", outcome.text.trim_end())
        }
    };
    if outcome.status == Status::Error && !cli.json {
        eprintln!("error: {}", outcome.payload["message"].as_str().unwrap_or("failed"));
    }
    ExitCode::from(code)
}

fn error_outcome(msg: String) -> Outcome {
    Outcome { status: Status::Error, payload: json!({ "message": msg }), text: String::new(), diagnostics: Vec::new() }
}
