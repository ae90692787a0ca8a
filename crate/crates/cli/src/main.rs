//! `fm`: command-line workbench for finite elementary submodels, graph
//! slicing and bond-faithful decompositions.

mod commands;
mod input;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use fm_core::structure::DEFAULT_BUDGET;

pub const SCHEMA: &str = "fm-report/1";

#[derive(Parser, Debug)]
#[command(name = "fm", version, about = "Finite elementary submodels, graph slicing and bond-faithful decompositions")]
pub struct Cli {
    /// Output format; not every command has a text or DOT rendering.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Re-check the result through an independent path.
    #[arg(long, global = true)]
    pub validate: bool,
    /// Evaluation and search step budget.
    #[arg(long, global = true, env = "FM_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Worker threads for corpus runs; results keep input order.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Seed for sampled bond enumeration.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("ambient").required(true).args(["structure", "graph"])))]
pub struct AmbientArgs {
    /// Structure file (JSON, universe report, or 0/1 matrix text).
    #[arg(long)]
    pub structure: Option<PathBuf>,
    /// Graph file; its HF ambient structure is used.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("instances").required(true).args(["graph", "corpus"])))]
pub struct InstanceArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Corpus spec or `{"graphs": [...]}` file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a formula and print its normalized form.
    Parse {
        #[arg(long)]
        formula: String,
    },
    /// Evaluate a formula in a structure, optionally relativized to a subset.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        /// `x=1,y=2`
        #[arg(long, default_value = "")]
        valuation: String,
        /// Evaluate the relativization to these elements.
        #[arg(long)]
        subset: Option<String>,
    },
    /// Bound every quantifier of a formula to the distinguished subset.
    Relativize {
        #[arg(long)]
        formula: String,
        /// With --subset and --validate, check the relativization over this structure.
        #[arg(long)]
        structure: Option<PathBuf>,
        #[arg(long)]
        subset: Option<String>,
    },
    /// Build `V_n`, or the HF ambient of a graph.
    #[command(group(ArgGroup::new("source").required(true).args(["rank", "graph"])))]
    Universe {
        #[arg(long)]
        rank: Option<usize>,
        /// Permit rank 5 (65536 elements).
        #[arg(long)]
        allow_rank5: bool,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Witness-closure hull of a seed under a formula pack.
    Hull {
        #[command(flatten)]
        ambient: AmbientArgs,
        /// Shipped pack name or pack file.
        #[arg(long)]
        pack: String,
        #[arg(long, default_value = "")]
        seed_elems: String,
    },
    /// Increasing chain of hulls until a cover set is absorbed.
    Chain {
        #[command(flatten)]
        ambient: AmbientArgs,
        #[arg(long)]
        pack: String,
        #[arg(long, default_value = "")]
        seed_elems: String,
        /// Defaults to every element, or every vertex and edge for a graph.
        #[arg(long)]
        cover: Option<String>,
    },
    /// Slice a graph along a chain.
    Slice {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "members")]
        pack: String,
        /// Explicit stages (JSON list of `{"vertices", "edges"}`) instead of a chain.
        #[arg(long)]
        stages: Option<PathBuf>,
    },
    /// Test whether a property survives restriction, deletion and slicing.
    Probe {
        #[command(flatten)]
        instances: InstanceArgs,
        #[arg(long, default_value = "path")]
        pack: String,
        /// nw, bridgeless, even-degree or no-small-component.
        #[arg(long, default_value = "nw")]
        property: String,
    },
    /// Graph algorithms.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Bond-faithful decompositions.
    Bondfaithful {
        #[command(subcommand)]
        command: BondFaithfulCommand,
    },
    /// Δ-systems in a family of sets.
    Sunflower {
        #[command(subcommand)]
        command: SunflowerCommand,
    },
    /// Free set of a set mapping.
    Freeset {
        /// `{"x": [images...], ...}`
        #[arg(long)]
        mapping: PathBuf,
    },
    /// Random graph corpora.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum GraphCommand {
    /// Enumerate bonds.
    Bonds {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        max_size: Option<usize>,
        /// Random bipartitions per component too large to scan.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Edge connectivity between two vertices, with disjoint paths.
    Gamma {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x: u32,
        #[arg(long)]
        y: u32,
    },
    /// Whether the graph has no odd cut.
    Nw {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Partition the edges into cycles.
    Veblen {
        #[arg(long)]
        graph: PathBuf,
    },
    Bridges {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Search for a cycle double cover.
    Dcc {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 30)]
        max_edges: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum BondFaithfulCommand {
    Check {
        #[arg(long)]
        graph: PathBuf,
        /// JSON list of members, each a list of `[u, v]` edges.
        #[arg(long)]
        parts: PathBuf,
        #[arg(long)]
        kappa: usize,
    },
    Search {
        #[command(flatten)]
        instances: InstanceArgs,
        #[arg(long)]
        kappa: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum SunflowerCommand {
    /// Whether the whole family is a Δ-system.
    Check {
        #[arg(long)]
        family: PathBuf,
    },
    /// A Δ-system with at least this many members.
    Find {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        petals: usize,
    },
    /// A largest Δ-system.
    Max {
        #[arg(long)]
        family: PathBuf,
    },
    /// Kernel from the trace of a model on the first member outside it.
    Trace {
        #[arg(long)]
        family: PathBuf,
        /// `{"elements": [...], "sets": [[...], ...]}`
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum CorpusCommand {
    Gen {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input or arguments.
    Input(String),
    Budget(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Budget(m) => write!(f, "budget exhausted: {m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    /// A counterexample, a negative verdict, or a failed validation.
    Violation,
    Budget,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::Budget => 3,
        }
    }
}

pub struct Output {
    pub fields: Map<String, Value>,
    pub text: Option<String>,
    pub dot: Option<String>,
    pub status: Status,
}

impl Default for Output {
    fn default() -> Self {
        Self::new()
    }
}

impl Output {
    pub fn new() -> Self {
        Output { fields: Map::new(), text: None, dot: None, status: Status::Ok }
    }

    pub fn field(mut self, key: &str, value: impl serde::Serialize) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) {
        self.fields.insert(key.to_string(), serde_json::to_value(value).expect("report values serialize"));
    }

    /// Raises the status; a budget verdict outranks a violation.
    pub fn flag(&mut self, status: Status) {
        self.status = self.status.max(status);
    }

    fn render(self, command: &str, format: Format) -> Result<(String, Status), CliError> {
        let body = match format {
            Format::Json => {
                let mut report = Map::new();
                report.insert("schema".into(), SCHEMA.into());
                report.insert("command".into(), command.into());
                report.extend(self.fields);
                let mut s = serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.text.ok_or_else(|| CliError::Input(format!("`{command}` has no text output")))?,
            Format::Dot => self.dot.ok_or_else(|| CliError::Input(format!("`{command}` has no DOT output")))?,
        };
        Ok((body, self.status))
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::Eval { .. } => "eval",
        Command::Relativize { .. } => "relativize",
        Command::Universe { .. } => "universe",
        Command::Hull { .. } => "hull",
        Command::Chain { .. } => "chain",
        Command::Slice { .. } => "slice",
        Command::Probe { .. } => "probe",
        Command::Graph { command } => match command {
            GraphCommand::Bonds { .. } => "graph bonds",
            GraphCommand::Gamma { .. } => "graph gamma",
            GraphCommand::Nw { .. } => "graph nw",
            GraphCommand::Veblen { .. } => "graph veblen",
            GraphCommand::Bridges { .. } => "graph bridges",
            GraphCommand::Dcc { .. } => "graph dcc",
        },
        Command::Bondfaithful { command } => match command {
            BondFaithfulCommand::Check { .. } => "bondfaithful check",
            BondFaithfulCommand::Search { .. } => "bondfaithful search",
        },
        Command::Sunflower { command } => match command {
            SunflowerCommand::Check { .. } => "sunflower check",
            SunflowerCommand::Find { .. } => "sunflower find",
            SunflowerCommand::Max { .. } => "sunflower max",
            SunflowerCommand::Trace { .. } => "sunflower trace",
        },
        Command::Freeset { .. } => "freeset",
        Command::Corpus { .. } => "corpus gen",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let result = commands::run(&cli).and_then(|out| out.render(name, cli.format));
    match result {
        Ok((body, status)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(status.code())
        }
        Err(e) => {
            eprintln!("fm {name}: {e}");
            ExitCode::from(e.code())
        }
    }
}
