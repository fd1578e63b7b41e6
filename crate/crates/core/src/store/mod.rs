//! Interned, triple-indexed RDF store.
//!
//! The store is append-only: after ingest it is read concurrently and never
//! mutated again.

mod graph;
mod reach;
mod term;

pub use graph::{Graph, IdTriple, TermId};
pub(crate) use term::escape_lexical;
pub use term::{Term, Triple};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("IRI must not be empty")]
    EmptyIri,
    #[error("IRI contains whitespace: {0:?}")]
    WhitespaceInIri(String),
    #[error("invalid language tag: {0:?}")]
    BadLanguageTag(String),
    #[error("{0} must be an IRI")]
    NonIriPosition(&'static str),
}
