//! Human-steered ontology alignment.
//!
//! Loads an ontology bundle and scenario graphs from Turtle, proposes
//! correspondences between source and target terms, lets a user relax or
//! strengthen them, and exports the accepted set as Turtle axioms plus
//! graph rewriting rules.

pub mod alignment;
pub mod analysis;
pub mod bundle;
pub mod engine;
pub mod error;
pub mod prefix;
pub mod rdf;
pub mod rules;
pub mod scenario;
pub mod session;
pub mod store;
pub mod taxonomy;
pub mod term;
pub mod turtle;

pub use error::{Error, Result};
