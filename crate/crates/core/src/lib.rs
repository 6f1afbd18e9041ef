//! Lexical retrieval and cross-genre relevance feedback for historical
//! fiction / non-fiction collections, with a TREC-style evaluation harness.

pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod feedback;
pub mod harness;
pub mod index;
pub mod judging;
pub mod retrieval;

pub use error::{Error, Result};
