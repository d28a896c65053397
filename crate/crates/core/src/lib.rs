//! Verb-conditioned event location linking.
//!
//! Given a sentence with token-level linguistic annotations and the index
//! of an event verb, label the tokens that name where that event happened.

pub mod baseline;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod models;
pub mod nn;
