#![no_std]
//! Reasoning core for the typicality logic T^CL over ALC.
extern crate alloc;

pub mod alc;
pub mod concept;
pub mod kb;
pub mod number;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod rank;
pub mod revision;
pub mod scenario;
pub mod text;

pub use concept::{nnf, ConceptExpr};
pub use kb::{fresh_individual, validate, Assertion, KnowledgeBase, RigidInclusion, Signature, TypicalityInclusion, Violation};
pub use number::{Degree, NumberError, Probability};
pub use text::{parse_concept, parse_kb, serialize_kb, ParseError};
pub use rank::{compute_ranks, concept_rank, rc_entails_assertion, rc_entails_typicality, tcl_consistent, Rank, RankTable, RationalClosure};
pub use scenario::{
    enumerate_scenarios, scenario_consistent, select_scenarios, selection_probability, Combination, CombinationOptions,
    CombinationSpec, Executor, ScenarioError, ScenarioRecord, ScenarioStatus, Selection, SelectionResult, Serial,
};
pub use revision::{
    build_revised_kb, categorization_score, infer_compound, iterate_combine, query_probability, RevisedKB, RevisionError,
};
