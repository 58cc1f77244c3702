//! Feynman graphs, etale maps and graphical species, with the free compact
//! symmetric multicategory monad computed by graph substitution.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: graphs as diagrams `E <- H -> V` of finite sets, validation,
//!   interfaces, the graph document format and DOT export.
//! - [`perm`]: permutations of `0..n`.
//! - [`morphisms`]: etale maps, Hom-set enumeration, isomorphism, canonical
//!   forms and automorphism groups; [`canon`] holds the labeling search.
//! - [`generate`]: exhaustive generation of small connected graphs and
//!   n-graphs within truncation bounds.
//! - [`site`]: the category of elements of a graph, covers, limits of
//!   presheaf data over the canonical cover and the Segal condition checker.
//! - [`species`]: graphical species, decorations and the QED example.
//! - [`csm`]: n-graphs, the free monad `F ↦ F̄`, substitution, algebras,
//!   Kleisli maps and the nerve.

pub mod canon;
pub mod csm;
pub mod generate;
pub mod graph;
pub mod morphisms;
pub mod perm;
pub mod site;
pub mod species;

pub use graph::{Elementary, FeynmanGraph, Flag};
pub use morphisms::GraphMap;
