use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quest_core::registry::{DependencyRef, Kind, Uid};
use quest_core::scoreboard::ValidationStatus;

#[derive(Debug, Parser)]
#[command(
    name = "quest",
    version,
    about = "Package, run, submit and compare benchmark workflows"
)]
pub struct Cli {
    /// Local artifact repository [env: QUEST_REPO]
    #[arg(long, global = true, value_name = "PATH")]
    pub repo: Option<PathBuf>,
    /// Scoreboard service base URL [env: QUEST_SERVICE]
    #[arg(long, global = true, value_name = "URL")]
    pub service: Option<String>,
    /// Bearer token for the service [env: QUEST_TOKEN]
    #[arg(long, global = true, value_name = "T")]
    pub token: Option<String>,
    /// Config file [env: QUEST_CONFIG; default: <config dir>/quest/config.json]
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Store a directory as a new package; prints its uid
    Pack(PackArgs),
    /// List packages matching a query
    Search(SearchArgs),
    /// Print the descriptor detected for this machine, usable as platform meta
    Platform,
    /// Run a workflow locally and print the measured result as JSON
    Run(RunArgs),
    /// Submit a run result to a tournament; prints the submission uid
    Submit(SubmitArgs),
    /// Render a tournament board
    Board(BoardArgs),
    /// Manage tournaments and submission statuses
    #[command(subcommand)]
    Tournament(TournamentCommand),
    /// Run the scoreboard service
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PackArgs {
    #[arg(long)]
    pub kind: Kind,
    #[arg(long)]
    pub name: String,
    #[arg(long = "version", id = "package_version", value_name = "VERSION")]
    pub version: String,
    /// Directory copied into the package
    #[arg(long, value_name = "DIR")]
    pub payload: PathBuf,
    #[arg(long = "tag", value_name = "TAG", value_delimiter = ',')]
    pub tags: Vec<String>,
    /// Dependency: `<uid>` or `kind[:tag,tag][@version]`, `?` prefix for optional
    #[arg(long = "dep", value_name = "SELECTOR")]
    pub deps: Vec<DependencyRef>,
    /// JSON file with the kind-specific metadata
    #[arg(long, value_name = "FILE", conflicts_with = "meta_json")]
    pub meta: Option<PathBuf>,
    /// Inline JSON metadata
    #[arg(long = "meta-json", value_name = "JSON")]
    pub meta_json: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub kind: Option<Kind>,
    #[arg(long = "tag", value_name = "TAG", value_delimiter = ',')]
    pub tags: Vec<String>,
    #[arg(long, value_name = "TEXT")]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Workflow descriptor JSON instead of --program/--model/--dataset/-p
    #[arg(long, value_name = "FILE", conflicts_with_all = ["program", "model", "dataset", "params"])]
    pub workflow: Option<PathBuf>,
    #[arg(long, value_name = "SELECTOR", required_unless_present = "workflow")]
    pub program: Option<DependencyRef>,
    #[arg(long, value_name = "SELECTOR")]
    pub model: Option<DependencyRef>,
    #[arg(long, value_name = "SELECTOR")]
    pub dataset: Option<DependencyRef>,
    /// Entry-command parameter
    #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(short = 'n', long, value_name = "N")]
    pub repetitions: Option<u32>,
    /// Platform package describing the target; detected when absent
    #[arg(long, value_name = "SELECTOR")]
    pub platform: Option<DependencyRef>,
    /// Fail when any repetition fails instead of dropping it
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SubmitArgs {
    #[arg(long, value_name = "UID")]
    pub tournament: Uid,
    /// Read the run result from stdin
    #[arg(long, conflicts_with = "file")]
    pub stdin: bool,
    #[arg(long, value_name = "FILE", required_unless_present = "stdin")]
    pub file: Option<PathBuf>,
    /// 16 hex digits; generated when absent. Reusing it makes retries safe.
    #[arg(long, value_name = "HEX")]
    pub nonce: Option<String>,
    /// Board facet such as framework=tflite
    #[arg(long = "label", value_name = "KEY=VALUE")]
    pub labels: Vec<String>,
    /// Attempts before giving up on an unreachable service
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoardFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct BoardArgs {
    #[arg(long, value_name = "UID")]
    pub tournament: Uid,
    #[arg(short = 'x', value_name = "DIM")]
    pub x: String,
    #[arg(short = 'y', value_name = "DIM")]
    pub y: String,
    /// Include pending submissions
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub pending: bool,
    /// Filter such as platform_label:android; repeatable, conjunctive
    #[arg(long = "label", value_name = "KEY:VALUE")]
    pub labels: Vec<String>,
    #[arg(long, value_enum, default_value_t = BoardFormat::Text)]
    pub format: BoardFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum TournamentCommand {
    /// Create a draft tournament; prints its uid
    Create {
        #[arg(long)]
        title: String,
        /// RFC 3339 start; defaults to now
        #[arg(long, value_name = "TIME")]
        opens: Option<String>,
        /// RFC 3339 end; defaults to --days after the start
        #[arg(long, value_name = "TIME", conflicts_with = "days")]
        closes: Option<String>,
        #[arg(long, default_value_t = 30)]
        days: i64,
        /// Metric space JSON; the six standard metrics when absent
        #[arg(long, value_name = "FILE")]
        space: Option<PathBuf>,
        /// Open the tournament right away
        #[arg(long)]
        open: bool,
    },
    /// Print a tournament as JSON
    Show {
        uid: Uid,
    },
    Open {
        uid: Uid,
    },
    Close {
        uid: Uid,
    },
    /// Record an artifact-evaluation decision for a submission
    SetStatus {
        submission: Uid,
        status: ValidationStatus,
        #[arg(long, default_value = "")]
        note: String,
    },
    /// Dump all submissions of a tournament
    Export {
        uid: Uid,
        #[arg(long, value_enum, default_value_t = ExportArg::Csv)]
        format: ExportArg,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Event log file; created when missing
    #[arg(long, value_name = "PATH", required_unless_present = "in_memory")]
    pub log: Option<PathBuf>,
    /// Keep events in memory only
    #[arg(long, conflicts_with = "log")]
    pub in_memory: bool,
    /// Token required for tournament and status management [env: QUEST_ADMIN_TOKEN]
    #[arg(long, value_name = "T")]
    pub admin_token: Option<String>,
    /// Accepted submitter token; repeatable. Any token is accepted when none is given.
    #[arg(long = "submitter-token", value_name = "T")]
    pub submitter_tokens: Vec<String>,
    /// File of SHA-256 hex digests of submitter tokens, one per line
    #[arg(long, value_name = "FILE")]
    pub submitter_hashes: Option<PathBuf>,
}
