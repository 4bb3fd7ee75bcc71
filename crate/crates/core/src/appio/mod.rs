//! File formats and fixture generation.
//!
//! Instance files are JSON with a `schema_version` field; integers are
//! written as decimal strings (field elements do not fit JSON numbers) and
//! accepted either as strings or as plain numbers.

mod fixture;
mod schema;

pub use fixture::{
    corridor_triangulate, gen_fixture, generate_instance, random_instance, FixtureMode, FixtureSpec, RandomCaps,
};
pub use schema::{
    instance_from_doc, instance_to_doc, load_instance, parse_instance, save_instance, CircleDoc, Dec, FieldParamsDoc,
    GeometryDoc, InstanceDoc, PolicyDoc, RectDoc, SizesDoc, SCHEMA_VERSION,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppioError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// Malformed JSON or a value of the wrong type.
    #[error("{pointer}: {msg} (line {line}, column {column})")]
    Schema { pointer: String, line: usize, column: usize, msg: String },
    /// Well-formed document describing an invalid instance.
    #[error("{pointer}: {msg}")]
    Invalid { pointer: String, msg: String },
    #[error("fixture generation failed: {0}")]
    GenerationFailed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl AppioError {
    pub(crate) fn invalid(pointer: impl Into<String>, msg: impl std::fmt::Display) -> Self {
        AppioError::Invalid { pointer: pointer.into(), msg: msg.to_string() }
    }

    /// JSON pointer of the offending value, when known.
    pub fn pointer(&self) -> Option<&str> {
        match self {
            AppioError::Schema { pointer, .. } | AppioError::Invalid { pointer, .. } => Some(pointer),
            _ => None,
        }
    }
}
