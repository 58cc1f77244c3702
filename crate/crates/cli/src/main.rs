//! `feyn`: command-line front end for Feynman graphs, graphical species and
//! the free monad on species.
//!
//! Results go to standard output as JSON (or DOT / a one-line summary with
//! `--format`), diagnostics to standard error. Exit codes: 0 on success, 1 when
//! a check fails, 2 on input errors.

mod commands;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "feyn", version, about = "Feynman graphs, graphical species and their free monad")]
pub struct Cli {
    /// Output mode.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Summary,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BoundsArgs {
    /// Largest number of vertices of the graphs summed over.
    #[arg(long, default_value_t = 2)]
    pub max_vertices: usize,
    /// Largest number of inner edges of the graphs summed over.
    #[arg(long, visible_alias = "max-inner", default_value_t = 2)]
    pub max_inner_edges: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a graph document against every graph invariant.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        /// Include the canonical form of the graph.
        #[arg(long)]
        canon: bool,
    },
    /// Print the canonical form of a graph and its hash.
    Canon {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Render a graph in Graphviz DOT.
    Dot {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Count (and optionally list) etale maps between two graphs.
    Homs {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// Also list the maps.
        #[arg(long)]
        list: bool,
    },
    /// Automorphism group of a graph.
    Aut {
        #[arg(long)]
        graph: PathBuf,
        /// Only count automorphisms fixing every port.
        #[arg(long)]
        fix_ports: bool,
    },
    /// Connected n-graphs within bounds up to port-fixing isomorphism.
    Enumerate {
        #[arg(long)]
        arity: usize,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Print a species as a validated species document.
    Species {
        /// Species document, or `builtin:qed` / `builtin:terminal:<max arity>`.
        #[arg(long)]
        species: String,
    },
    /// Decorations of a graph by a species, computed as a limit.
    Eval {
        /// Species document, or `builtin:qed` / `builtin:terminal:<max arity>`.
        #[arg(long)]
        species: String,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Elements of the free monad on a species in one arity.
    Free {
        #[arg(long)]
        species: String,
        #[arg(long)]
        arity: usize,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Seeded checks of the monad laws.
    Laws {
        #[arg(long)]
        species: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Algebra axioms of the free algebra on a species.
    Algebra {
        #[arg(long)]
        species: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Export the nerve of the free algebra as a presheaf document.
    Nerve {
        #[arg(long)]
        species: String,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Largest vertex valence in the generated universe of graphs.
        #[arg(long, default_value_t = 3)]
        max_valence: usize,
        /// Directory of graph documents to use as the universe instead of
        /// the generated one.
        #[arg(long)]
        universe: Option<PathBuf>,
        /// Check the Segal condition instead of printing the presheaf.
        #[arg(long)]
        segal: bool,
    },
    /// Segal condition for a presheaf document, or for the nerve of the free
    /// algebra on a species.
    Segal {
        #[arg(long, conflicts_with = "species", required_unless_present = "species")]
        presheaf: Option<PathBuf>,
        #[arg(long)]
        species: Option<String>,
        #[command(flatten)]
        bounds: BoundsArgs,
        #[arg(long, default_value_t = 3)]
        max_valence: usize,
    },
    /// Factor a Kleisli map into a refinement followed by an etale map.
    Factor {
        #[arg(long)]
        kleisli: PathBuf,
        /// Also search exhaustively for factorizations through other graphs.
        #[arg(long)]
        search: bool,
        /// Largest middle graph (in arcs) the search considers; defaults to
        /// the size of the refined graph.
        #[arg(long)]
        max_arcs: Option<usize>,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
}

/// How a run ended, mapped to the exit code.
pub enum Outcome {
    Pass(Output),
    CheckFailed(Output),
}

/// A result in every output mode the command supports.
pub struct Output {
    pub json: serde_json::Value,
    pub summary: String,
    pub dot: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = input::check_paths(&cli.command).and_then(|()| commands::run(&cli.command));
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let (output, code) = match result {
        Ok(Outcome::Pass(o)) => (o, 0),
        Ok(Outcome::CheckFailed(o)) => {
            eprintln!("check failed: {}", o.summary);
            (o, 1)
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.to_json()).expect("errors serialize"));
            if let (Command::Validate { .. }, Some(report)) = (&cli.command, e.report()) {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            }
            return ExitCode::from(2);
        }
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&output.json).expect("results serialize"),
        Format::Summary => output.summary,
        Format::Dot => match output.dot {
            Some(d) => d.trim_end().to_string(),
            None => {
                let e = input::InputError::Usage("--format dot is only available for graph commands".into());
                eprintln!("{}", serde_json::to_string(&e.to_json()).expect("errors serialize"));
                return ExitCode::from(2);
            }
        },
    };
    let _ = writeln!(out, "{text}");
    ExitCode::from(code)
}
