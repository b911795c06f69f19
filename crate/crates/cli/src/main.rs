//! `conat` — batch front-end for the conat-channel simulator.

mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Symbolic,
    Gaussian,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Pq,
    Mq,
}

#[derive(Debug, Parser)]
#[command(name = "conat", version, about = "Continuous-variable multiparty coherent-channel simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format for the emitted artifact.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the artifact to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Which engine(s) to run: exact symbolic, stochastic gaussian, or both
    /// with cross-validation.
    #[arg(long, value_enum, default_value_t = Engine::Both)]
    pub engine: Engine,
    /// Monte-Carlo trials for the gaussian engine.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Seed for all stochastic runs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CcaeccArgs {
    /// Number of receivers (the sender included).
    #[arg(long)]
    pub n: usize,
    /// Squeezing parameter of the GHZ resource.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Homodyne detector efficiency of the sender's measurements.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = Kind::Pq)]
    pub kind: Kind,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SuperdenseArgs {
    /// Topology JSON file: {"parties": [...], "sender": "...", "edges": [["A","B"], ...]}.
    #[arg(long)]
    pub topology: PathBuf,
    /// Default squeezing for edges without an override in the file.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum VerifyTarget {
    /// Verify a CCAECC channel against the closed-form ε predictions.
    Ccaecc(CcaeccArgs),
    /// Verify a superdense run against the path-noise predictions.
    Superdense(SuperdenseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub target: VerifyTarget,
    /// Override the predicted ε values (comma-separated ε₁,…,εₙ).
    #[arg(long, value_delimiter = ',')]
    pub expect: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct TeleportArgs {
    /// Receiver of the teleported state.
    #[arg(long)]
    pub receiver: String,
    /// CCAECC receiver count (single-mode teleportation).
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = Kind::Pq)]
    pub kind: Kind,
    /// Two-mode teleportation over a superdense run on this topology.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Input coherent mean (x₀, p₀) of the teleported mode.
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p0: f64,
    /// Second input mean for two-mode teleportation.
    #[arg(long, default_value_t = 0.0)]
    pub x1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p1: f64,
    /// Controllers whose outcome never reaches the receiver.
    #[arg(long = "drop-controller")]
    pub drop_controller: Vec<String>,
    /// Controller homodyne efficiency (defaults to the channel's η).
    #[arg(long)]
    pub eta_controllers: Option<f64>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QssArgs {
    /// Party reconstructing the secret.
    #[arg(long)]
    pub receiver: String,
    /// Cooperating parties, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub coalition: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = Kind::Pq)]
    pub kind: Kind,
    /// The classical secret (x₀, p₀) encoded as a coherent displacement.
    #[arg(long, default_value_t = 1.0)]
    pub secret_x: f64,
    #[arg(long, default_value_t = -0.5)]
    pub secret_p: f64,
    #[arg(long)]
    pub eta_controllers: Option<f64>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    R,
    Eta,
    N,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Number of grid points.
    #[arg(long)]
    pub steps: usize,
    /// The subcommand to run at every grid point, e.g.
    /// `--over ccaecc --n 3 --eta 1 --kind pq` (must come last).
    #[arg(long, num_args = 1.., allow_hyphen_values = true, required = true)]
    pub over: Vec<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Prepare a GHZ resource and report its correlation variances.
    Ghz {
        #[arg(long)]
        parties: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Prepare an EPR pair and report its correlation variances.
    Epr {
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Run a CCAECC conat channel and measure its ε values.
    Ccaecc(CcaeccArgs),
    /// Run the superdense construction over a topology file.
    Superdense(SuperdenseArgs),
    /// Run and verify, exiting 3 when any check fails.
    Verify(VerifyArgs),
    /// Multiparty-controlled teleportation.
    Teleport(TeleportArgs),
    /// Quantum secret sharing of a classical value.
    Qss(QssArgs),
    /// Run a subcommand over a parameter grid, one output row per point.
    Sweep(SweepArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version on stdout with a zero-ish status
            if e.use_stderr() {
                eprintln!("{}", json!({"code": "invalid-arguments", "message": e.to_string()}));
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    let outcome = match run::execute(&cli.command, cli.format) {
        Ok(outcome) => outcome,
        Err(err) => {
            let (code, label) = match &err {
                run::CliError::Core(conat::Error::Topology(_)) => (2, "topology-error"),
                run::CliError::Core(_) => (1, "invalid-arguments"),
                run::CliError::Io(_) => (1, "io-error"),
                run::CliError::Usage(_) => (1, "invalid-arguments"),
            };
            eprintln!("{}", json!({"code": label, "message": err.to_string()}));
            return ExitCode::from(code);
        }
    };

    let text = output::render(outcome.record, outcome.csv_rows, cli.format == Format::Csv);
    if let Err(e) = output::emit(&text, cli.out.as_deref()) {
        eprintln!("{}", json!({"code": "io-error", "message": e.to_string()}));
        return ExitCode::from(1);
    }
    if !outcome.pass {
        eprintln!(
            "{}",
            json!({"code": "verification-failed", "message": "one or more checks failed"})
        );
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
