//! Compact symmetric multicategories: the free monad `F ↦ F̄` on graphical
//! species, computed within explicit truncation bounds.
//!
//! - [`substitute`]: vertex replacement, the multiplication on plain graphs.
//! - [`free`]: n-graph classes, free elements, the three formulas for `F̄[n]`,
//!   the unit and flattening.
//! - [`laws`]: seeded property checks of the monad laws.
//! - [`algebra`]: algebras given by structure tables, and their axioms.
//! - [`kleisli`]: maps that refine vertices, with their factorization.
//! - [`nerve`]: the presheaf of decorations an algebra induces.

pub mod algebra;
pub mod free;
pub mod kleisli;
pub mod laws;
pub mod nerve;
pub mod substitute;

use thiserror::Error;

use crate::graph::ValidationError;

pub use crate::generate::TruncationBounds;

pub use free::{enumerate_n_graphs, flatten, free_apply, unit, FreeElement, NGraphClass};

pub use algebra::{check_algebra, free_csm, AlgebraReport, CsmAlgebra};
pub use kleisli::{factorize_kleisli, kleisli_equal, KleisliMap};
pub use laws::{check_monad_laws, LawReport, MonadLawReport};

pub use nerve::{nerve, Nerve};
pub use substitute::{substitute, NGraph};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CsmError {
    #[error("vertex {vertex} has valence {valence} but the graph has {arity} ports")]
    ArityMismatch { vertex: usize, valence: usize, arity: usize },
    #[error("replacing vertex {vertex} leaves a closed circle without vertices")]
    CircleUnrepresentable { vertex: usize },
    #[error("colors disagree across the gluing at vertex {vertex}")]
    ColorMismatch { vertex: usize },
    #[error("port labeling is not a bijection onto the ports")]
    BadPortLabeling,
    #[error("substitution produced an invalid graph: {0:?}")]
    InvalidResult(Vec<ValidationError>),
    #[error("the formulas for the free species disagree in arity {arity}: {detail}")]
    FormulaMismatch { arity: usize, detail: String },
    #[error("{0} lies outside the truncation bounds")]
    BoundsNotClosed(String),
    #[error("invalid Kleisli map: {0}")]
    InvalidKleisli(String),
}
