//! Compound-revised knowledge bases, query probabilities and iterated combination.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::alc::{Reasoner, UnknownIndividual};
use crate::concept::ConceptExpr;
use crate::kb::{is_reserved_individual, Assertion, KnowledgeBase, RigidInclusion, TypicalityInclusion};
use crate::number::Probability;
use crate::rank::RationalClosure;
use crate::scenario::{select_scenarios, CombinationSpec, ScenarioError, ScenarioRecord, ScenarioStatus, SelectionResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevisedKB {
    pub kb: KnowledgeBase,
    pub compound: ConceptExpr,
    pub compound_alias: Option<String>,
    /// Added typicality id to the source inclusion id in the input KB.
    pub provenance: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RevisionError {
    NotSelected,
    BitsLength { expected: usize, got: usize },
    AliasInUse(String),
    InvalidAlias(String),
    UnknownIndividual(String),
    PriorOutOfRange,
    Scenario(ScenarioError),
}

impl fmt::Display for RevisionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevisionError::NotSelected => f.write_str("scenario is not in the surviving block"),
            RevisionError::BitsLength { expected, got } => {
                write!(f, "scenario has {} bits, expected {}", got, expected)
            }
            RevisionError::AliasInUse(a) => write!(f, "alias {} already occurs in the knowledge base", a),
            RevisionError::InvalidAlias(a) => write!(f, "alias {} is not a valid concept name", a),
            RevisionError::UnknownIndividual(a) => write!(f, "unknown individual {}", a),
            RevisionError::PriorOutOfRange => f.write_str("prior must be in (0,1]"),
            RevisionError::Scenario(e) => e.fmt(f),
        }
    }
}

impl From<ScenarioError> for RevisionError {
    fn from(e: ScenarioError) -> Self {
        RevisionError::Scenario(e)
    }
}

impl From<UnknownIndividual> for RevisionError {
    fn from(e: UnknownIndividual) -> Self {
        RevisionError::UnknownIndividual(e.0)
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(s, "top" | "bot" | "not" | "and" | "or" | "some" | "all" | "T")
}

/// Head and modifier inclusions in bit order, as in the scenario engine.
fn relevant(kb: &KnowledgeBase, spec: &CombinationSpec) -> Vec<usize> {
    kb.typical
        .iter()
        .filter(|t| t.subject == spec.head || spec.modifiers.contains(&t.subject))
        .map(|t| t.id)
        .collect()
}

pub fn build_revised_kb(
    kb: &KnowledgeBase,
    spec: &CombinationSpec,
    chosen: &ScenarioRecord,
    alias: Option<&str>,
) -> Result<RevisedKB, RevisionError> {
    if chosen.status != ScenarioStatus::Selected {
        return Err(RevisionError::NotSelected);
    }
    let ids = relevant(kb, spec);
    let bits = &chosen.selection.bits;
    if bits.len() != ids.len() {
        return Err(RevisionError::BitsLength { expected: ids.len(), got: bits.len() });
    }
    let compound = spec.compound();
    let mut out = kb.clone();
    if let Some(a) = alias {
        if !valid_name(a) || is_reserved_individual(a) {
            return Err(RevisionError::InvalidAlias(a.to_string()));
        }
        if kb.used_names().concepts.contains(a) || kb.used_names().roles.contains(a) {
            return Err(RevisionError::AliasInUse(a.to_string()));
        }
        out.rigid.push(RigidInclusion::new(ConceptExpr::atom(a), compound.clone()));
        out.rigid.push(RigidInclusion::new(compound.clone(), ConceptExpr::atom(a)));
    }
    // one addition per predicate; a chosen head inclusion fixes its degree
    let mut chosen_by_pred: Vec<(ConceptExpr, usize)> = Vec::new();
    for (pos, &id) in ids.iter().enumerate() {
        if !bits[pos] {
            continue;
        }
        let t = &kb.typical[id];
        match chosen_by_pred.iter_mut().find(|(p, _)| *p == t.predicate) {
            None => chosen_by_pred.push((t.predicate.clone(), id)),
            Some(entry) => {
                if t.subject == spec.head && kb.typical[entry.1].subject != spec.head {
                    entry.1 = id;
                }
            }
        }
    }
    let mut provenance = BTreeMap::new();
    for (pred, src) in chosen_by_pred {
        let exists = out.typical.iter().any(|t| t.subject == compound && t.predicate == pred);
        if exists {
            continue;
        }
        provenance.insert(out.typical.len(), src);
        out.typical.push(TypicalityInclusion::new(kb.typical[src].degree.clone(), compound.clone(), pred));
    }
    out.normalize();
    Ok(RevisedKB { kb: out, compound, compound_alias: alias.map(String::from), provenance })
}

/// The compound of a revised KB given only its text: the single conjunctive
/// typicality subject, if there is exactly one.
pub fn infer_compound(kb: &KnowledgeBase) -> Option<ConceptExpr> {
    let mut found: Option<&ConceptExpr> = None;
    for t in &kb.typical {
        if matches!(t.subject, ConceptExpr::And(..)) {
            match found {
                None => found = Some(&t.subject),
                Some(f) if *f == t.subject => {}
                Some(_) => return None,
            }
        }
    }
    found.cloned()
}

impl RevisedKB {
    /// Wraps an existing KB whose compound is known; an alias is recovered
    /// from a mutual rigid pair with an atom.
    pub fn from_kb(kb: KnowledgeBase, compound: ConceptExpr) -> Self {
        let compound_alias = aliases(&kb).into_iter().find(|(_, d)| *d == compound).map(|(a, _)| a);
        RevisedKB { kb, compound, compound_alias, provenance: BTreeMap::new() }
    }

    /// Degrees of inclusions `T(compound) <= D` justifying `target`, with
    /// `D` equal to or subsumed by `target` under the rigid part.
    pub fn justifying_degrees(&self, target: &ConceptExpr) -> Vec<BigRational> {
        let r = Reasoner::new(&self.kb.rigid);
        let same_subject = |s: &ConceptExpr| {
            *s == self.compound || (r.subsumes(s, &self.compound) && r.subsumes(&self.compound, s))
        };
        self.kb
            .typical
            .iter()
            .filter(|t| same_subject(&t.subject))
            .filter(|t| t.predicate == *target || r.subsumes(&t.predicate, target))
            .map(|t| t.degree.value().clone())
            .collect()
    }
}

/// `prior × q` when `concept(individual)` is entailed, 0 otherwise. `q` is the
/// largest degree of a justifying compound inclusion, or 1 when the entailment
/// needs none.
pub fn query_probability(
    revised: &RevisedKB,
    concept: &ConceptExpr,
    individual: &str,
    prior: &Probability,
) -> Result<Probability, RevisionError> {
    if prior.value().is_zero() {
        return Err(RevisionError::PriorOutOfRange);
    }
    if !revised.kb.has_individual(individual) {
        return Err(RevisionError::UnknownIndividual(individual.to_string()));
    }
    let rc = RationalClosure::new(&revised.kb);
    if !rc.entails_assertion(individual, concept)? {
        return Ok(Probability::zero());
    }
    let q = revised.justifying_degrees(concept).into_iter().max().unwrap_or_else(BigRational::one);
    Ok(Probability::new(prior.value() * q).expect("product of probabilities"))
}

/// Sum of query probabilities after asserting `candidate(individual)` on a copy.
pub fn categorization_score(
    revised: &RevisedKB,
    candidate: &ConceptExpr,
    individual: &str,
    facts: &[(ConceptExpr, Probability)],
) -> Result<BigRational, RevisionError> {
    let mut tmp = revised.clone();
    tmp.kb = tmp.kb.with_assertion(Assertion::concept(candidate.clone(), individual));
    let mut sum = BigRational::zero();
    for (c, p) in facts {
        sum += query_probability(&tmp, c, individual, p)?.value();
    }
    Ok(sum)
}

/// Atoms defined by a mutual rigid pair `A <= X`, `X <= A`, with their definitions.
pub fn aliases(kb: &KnowledgeBase) -> Vec<(String, ConceptExpr)> {
    let mut out = Vec::new();
    for r in &kb.rigid {
        if let ConceptExpr::Atom(a) = &r.lhs {
            if r.rhs != r.lhs && kb.rigid.iter().any(|s| s.lhs == r.rhs && s.rhs == r.lhs) {
                out.push((a.clone(), r.rhs.clone()));
            }
        }
    }
    out
}

/// Typicality inclusions about an aliased compound are renamed to the alias so
/// the alias can act as head or modifier.
pub fn aliased_kb(kb: &KnowledgeBase) -> KnowledgeBase {
    let defs = aliases(kb);
    let mut kb = kb.clone();
    for t in &mut kb.typical {
        if let Some((a, _)) = defs.iter().find(|(_, d)| *d == t.subject) {
            t.subject = ConceptExpr::atom(a);
        }
    }
    kb.normalize();
    kb
}

pub fn iterate_combine(revised: &RevisedKB, spec: &CombinationSpec) -> Result<SelectionResult, ScenarioError> {
    select_scenarios(&aliased_kb(&revised.kb), spec)
}
