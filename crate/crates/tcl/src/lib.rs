//! Command-line and HTTP front ends for the `tcl-core` reasoner.

pub mod cli;
pub mod exec;
pub mod output;
pub mod service;

use tcl_core::scenario::DEFAULT_MAX_INCLUSIONS;
use tcl_core::{parse_concept, CombinationSpec, ParseError};

pub const MAX_INCLUSIONS_VAR: &str = "TCL_MAX_INCLUSIONS";

/// Inclusion guard from `TCL_MAX_INCLUSIONS`, falling back to the default.
pub fn max_inclusions_from_env() -> usize {
    std::env::var(MAX_INCLUSIONS_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_INCLUSIONS)
}

/// Builds a combination request from concept expressions in text form.
pub fn combination_spec(
    head: &str,
    modifiers: &[String],
    exactly_k: Option<usize>,
    max_inclusions: usize,
    compound: Option<&str>,
) -> Result<CombinationSpec, ParseError> {
    let mut spec = CombinationSpec::new(
        parse_concept(head)?,
        modifiers.iter().map(|m| parse_concept(m)).collect::<Result<_, _>>()?,
    );
    spec.options.exactly_k = exactly_k;
    spec.options.max_inclusions = max_inclusions;
    if let Some(c) = compound {
        spec.options.compound = Some(parse_concept(c)?);
    }
    Ok(spec)
}
