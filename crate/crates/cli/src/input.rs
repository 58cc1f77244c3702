//! Reading documents and reporting input errors.

use std::path::{Path, PathBuf};

use feynman_core::graph::{GraphDocument, GraphError, ValidationError};
use feynman_core::species::{parse_species, qed_species, terminal_species, GraphicalSpecies};
use feynman_core::FeynmanGraph;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::Command;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("file not found: {}", .0.display())]
    Missing(PathBuf),
    #[error("cannot read {}: {message}", path.display())]
    Unreadable { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Syntax { path: PathBuf, message: String },
    #[error("{}: invalid graph", path.display())]
    InvalidGraph {
        path: PathBuf,
        errors: Vec<ValidationError>,
    },
    #[error("{}: invalid species: {}", path, errors.join("; "))]
    InvalidSpecies { path: String, errors: Vec<String> },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Computation(String),
}

impl InputError {
    pub fn to_json(&self) -> Value {
        let kind = match self {
            InputError::Missing(_) => "missing_file",
            InputError::Unreadable { .. } => "unreadable_file",
            InputError::Syntax { .. } => "syntax",
            InputError::InvalidGraph { .. } => "invalid_graph",
            InputError::InvalidSpecies { .. } => "invalid_species",
            InputError::Usage(_) => "usage",
            InputError::Computation(_) => "computation",
        };
        let mut v = json!({"error": kind, "message": self.to_string()});
        if let InputError::InvalidGraph { errors, .. } = self {
            v["details"] = json!(errors);
        }
        v
    }

    /// The validation verdict on a rejected graph document.
    pub fn report(&self) -> Option<Value> {
        match self {
            InputError::InvalidGraph { errors, .. } => Some(json!({"valid": false, "errors": errors})),
            InputError::Syntax { message, .. } => Some(json!({"valid": false, "errors": [{"code": "Syntax", "message": message, "index": null}]})),
            _ => None,
        }
    }
}

/// Every file named on the command line must exist before anything runs.
pub fn check_paths(command: &Command) -> Result<(), InputError> {
    let mut paths: Vec<&Path> = Vec::new();
    let mut species: Vec<&str> = Vec::new();
    match command {
        Command::Validate { graph, .. } | Command::Canon { graph } | Command::Dot { graph } | Command::Aut { graph, .. } => {
            paths.push(graph)
        }
        Command::Homs { from, to, .. } => paths.extend([from.as_path(), to.as_path()]),
        Command::Enumerate { .. } => {}
        Command::Eval { species: s, graph } => {
            species.push(s);
            paths.push(graph);
        }
        Command::Species { species: s }
        | Command::Free { species: s, .. }
        | Command::Laws { species: s, .. }
        | Command::Algebra { species: s, .. } => species.push(s),
        Command::Nerve { species: s, universe, .. } => {
            species.push(s);
            if let Some(dir) = universe {
                if !dir.is_dir() {
                    return Err(InputError::Missing(dir.clone()));
                }
            }
        }
        Command::Segal { presheaf, species: s, .. } => {
            paths.extend(presheaf.as_deref());
            species.extend(s.as_deref());
        }
        Command::Factor { kleisli, .. } => paths.push(kleisli),
    }
    paths.extend(species.into_iter().filter(|s| !s.starts_with(BUILTIN)).map(Path::new));
    match paths.into_iter().find(|p| !p.is_file()) {
        Some(p) => Err(InputError::Missing(p.to_path_buf())),
        None => Ok(()),
    }
}

pub fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError::Unreadable {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_graph(path: &Path) -> Result<FeynmanGraph, InputError> {
    let text = read(path)?;
    feynman_core::graph::parse_graph(&text).map_err(|e| match e {
        GraphError::Syntax { .. } => InputError::Syntax {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        GraphError::Invalid(errors) => InputError::InvalidGraph {
            path: path.to_path_buf(),
            errors,
        },
    })
}

/// Every `*.json` graph document in a directory, in file name order.
pub fn read_graph_dir(dir: &Path) -> Result<Vec<FeynmanGraph>, InputError> {
    let unreadable = |e: std::io::Error| InputError::Unreadable {
        path: dir.to_path_buf(),
        message: e.to_string(),
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(unreadable)? {
        let path = entry.map_err(unreadable)?.path();
        if path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    files.iter().map(|f| read_graph(f)).collect()
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    serde_json::from_str(&read(path)?).map_err(|e| InputError::Syntax {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

const BUILTIN: &str = "builtin:";

/// A species from a document path or a builtin name.
pub fn read_species(spec: &str) -> Result<GraphicalSpecies, InputError> {
    if let Some(name) = spec.strip_prefix(BUILTIN) {
        return match name.split(':').collect::<Vec<_>>().as_slice() {
            ["qed"] => Ok(qed_species()),
            ["terminal", n] => n
                .parse()
                .map(terminal_species)
                .map_err(|_| InputError::Usage(format!("bad arity in {spec:?}"))),
            _ => Err(InputError::Usage(format!(
                "unknown builtin species {spec:?}; use builtin:qed or builtin:terminal:<n>"
            ))),
        };
    }
    let text = read(Path::new(spec))?;
    parse_species(&text).map_err(|errors| InputError::InvalidSpecies {
        path: spec.to_string(),
        errors: errors.iter().map(ToString::to_string).collect(),
    })
}

/// SHA-256 of the canonical form's document, in hex.
pub fn canonical_hash(g: &FeynmanGraph) -> String {
    let canonical = feynman_core::canon::canonical_graph(g);
    hex::encode(Sha256::digest(feynman_core::graph::serialize_graph(&canonical).as_bytes()))
}

pub fn graph_json(g: &FeynmanGraph) -> Value {
    serde_json::to_value::<GraphDocument>(g.to_document()).expect("graph documents serialize")
}
