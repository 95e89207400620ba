//! Automatic feature generation for span-based semantic role labeling.
//!
//! Features are built from *featlets*: small named operations over a
//! [`context::Context`] scratchpad. Strings of featlets form templates,
//! multisets of templates form feature products. The crate covers the whole
//! loop: corpus ingestion, featlet execution, template discovery, near
//! duplicate detection, information-theoretic selection and a two-stage
//! averaged-perceptron SRL system to train on the selected features.

pub mod context;
pub mod corpus;
pub mod discovery;
pub mod error;
pub mod selection;
pub mod similarity;
pub mod srl;

pub use error::{Error, Result};
