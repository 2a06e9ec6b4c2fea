//! Scenario enumeration and selection for concept combination.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::One;

use crate::alc::Reasoner;
use crate::concept::ConceptExpr;
use crate::kb::{fresh_individual, Assertion, KnowledgeBase, TypicalityInclusion};
use crate::number::{Degree, Probability};
use crate::rank::RationalClosure;

pub const DEFAULT_MAX_INCLUSIONS: usize = 20;
const HARD_LIMIT: usize = 63;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinationOptions {
    pub exactly_k: Option<usize>,
    pub max_inclusions: usize,
    /// Conjunction to use for the compound instead of `head and modifier_1 and …`;
    /// must have the same conjuncts.
    pub compound: Option<ConceptExpr>,
}

impl Default for CombinationOptions {
    fn default() -> Self {
        CombinationOptions { exactly_k: None, max_inclusions: DEFAULT_MAX_INCLUSIONS, compound: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinationSpec {
    pub head: ConceptExpr,
    pub modifiers: Vec<ConceptExpr>,
    pub options: CombinationOptions,
}

impl CombinationSpec {
    pub fn new(head: ConceptExpr, modifiers: Vec<ConceptExpr>) -> Self {
        CombinationSpec { head, modifiers, options: CombinationOptions::default() }
    }

    pub fn exactly(mut self, k: usize) -> Self {
        self.options.exactly_k = Some(k);
        self
    }

    pub fn max_inclusions(mut self, n: usize) -> Self {
        self.options.max_inclusions = n;
        self
    }

    pub fn with_compound(mut self, c: ConceptExpr) -> Self {
        self.options.compound = Some(c);
        self
    }

    pub fn compound(&self) -> ConceptExpr {
        match &self.options.compound {
            Some(c) => c.clone(),
            None => ConceptExpr::and_all(core::iter::once(self.head.clone()).chain(self.modifiers.iter().cloned())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScenarioError {
    SizeLimit { n: usize, max: usize },
    EmptyModifiers,
    HeadIsModifier,
    CompoundMismatch,
    LengthMismatch,
    NotSelected,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::SizeLimit { n, max } => write!(
                f,
                "{} relevant typicality inclusions exceed the limit of {} (2^{} scenarios)",
                n, max, n
            ),
            ScenarioError::EmptyModifiers => f.write_str("at least one modifier is required"),
            ScenarioError::HeadIsModifier => f.write_str("the head cannot also be a modifier"),
            ScenarioError::CompoundMismatch => {
                f.write_str("compound must be a conjunction of exactly the head and the modifiers")
            }
            ScenarioError::LengthMismatch => f.write_str("degrees and bits differ in length"),
            ScenarioError::NotSelected => f.write_str("scenario is not in the surviving block"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Selection {
    pub bits: Vec<bool>,
    pub probability: Probability,
}

impl Selection {
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn chosen(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioStatus {
    Inconsistent,
    Trivial,
    ModifierPreferred,
    Dominated,
    Selected,
}

impl ScenarioStatus {
    pub const ALL: [ScenarioStatus; 5] = [
        ScenarioStatus::Inconsistent,
        ScenarioStatus::Trivial,
        ScenarioStatus::ModifierPreferred,
        ScenarioStatus::Dominated,
        ScenarioStatus::Selected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioStatus::Inconsistent => "inconsistent",
            ScenarioStatus::Trivial => "trivial",
            ScenarioStatus::ModifierPreferred => "modifier_preferred",
            ScenarioStatus::Dominated => "dominated",
            ScenarioStatus::Selected => "selected",
        }
    }
}

impl fmt::Display for ScenarioStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One scenario. The scenario KB itself is rebuilt on demand with
/// [`Combination::scenario_kb`] to keep large enumerations small.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioRecord {
    pub selection: Selection,
    pub status: ScenarioStatus,
    pub block: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub counts: [usize; 5],
}

impl Diagnostics {
    pub fn count(&self, s: ScenarioStatus) -> usize {
        self.counts[s as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionResult {
    pub compound: ConceptExpr,
    pub head: ConceptExpr,
    pub modifiers: Vec<ConceptExpr>,
    /// KB ids of the head and modifier inclusions, in bit order.
    pub inclusions: Vec<usize>,
    pub all: Vec<ScenarioRecord>,
    pub selected: Vec<ScenarioRecord>,
    pub diagnostics: Diagnostics,
}

impl SelectionResult {
    pub fn find(&self, bits: &[bool]) -> Option<&ScenarioRecord> {
        self.all.iter().find(|r| r.selection.bits == bits)
    }

    /// Records of the block holding the selected scenarios.
    pub fn surviving_block(&self) -> Vec<&ScenarioRecord> {
        match self.selected.first() {
            None => Vec::new(),
            Some(s) => self.all.iter().filter(|r| r.block == s.block).collect(),
        }
    }
}

/// Runs independent scenario checks; implementations may run them in parallel.
pub trait Executor {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> bool + Sync)) -> Vec<bool>;
}

pub struct Serial;

impl Executor for Serial {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> bool + Sync)) -> Vec<bool> {
        (0..n).map(f).collect()
    }
}

pub fn selection_probability(degrees: &[Degree], bits: &[bool]) -> Result<Probability, ScenarioError> {
    if degrees.len() != bits.len() {
        return Err(ScenarioError::LengthMismatch);
    }
    let mut p = BigRational::one();
    for (d, &b) in degrees.iter().zip(bits) {
        p *= if b { d.value().clone() } else { d.complement() };
    }
    Probability::new(p).map_err(|_| ScenarioError::LengthMismatch)
}

fn mask_bits(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask & (1 << (n - 1 - i)) != 0).collect()
}

fn bits_mask(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// A head/modifier combination over one KB.
pub struct Combination<'k> {
    kb: &'k KnowledgeBase,
    spec: CombinationSpec,
    compound: ConceptExpr,
    relevant: Vec<usize>,
    is_head: Vec<bool>,
    rest: Vec<TypicalityInclusion>,
    base: Arc<Reasoner>,
    witness: String,
    ascribable: Vec<usize>,
    conflicts: Vec<(usize, usize)>,
}

impl<'k> Combination<'k> {
    pub fn new(kb: &'k KnowledgeBase, spec: &CombinationSpec) -> Result<Self, ScenarioError> {
        if spec.modifiers.is_empty() {
            return Err(ScenarioError::EmptyModifiers);
        }
        if spec.modifiers.contains(&spec.head) {
            return Err(ScenarioError::HeadIsModifier);
        }
        let compound = spec.compound();
        if spec.options.compound.is_some() {
            let want: BTreeSet<&ConceptExpr> =
                core::iter::once(&spec.head).chain(spec.modifiers.iter()).collect();
            let have: BTreeSet<&ConceptExpr> = compound.conjuncts().into_iter().collect();
            if want != have {
                return Err(ScenarioError::CompoundMismatch);
            }
        }
        let roles: Vec<&ConceptExpr> = core::iter::once(&spec.head).chain(spec.modifiers.iter()).collect();
        let relevant: Vec<usize> =
            kb.typical.iter().filter(|t| roles.contains(&&t.subject)).map(|t| t.id).collect();
        let n = relevant.len();
        let max = spec.options.max_inclusions.min(HARD_LIMIT);
        if n > max {
            return Err(ScenarioError::SizeLimit { n, max });
        }
        let is_head: Vec<bool> = relevant.iter().map(|&i| kb.typical[i].subject == spec.head).collect();
        let rest: Vec<TypicalityInclusion> =
            kb.typical.iter().filter(|t| !roles.contains(&&t.subject)).cloned().collect();
        let base = Arc::new(Reasoner::new(&kb.rigid));
        let witness = fresh_individual(kb);
        let mut c = Combination {
            kb,
            spec: spec.clone(),
            compound,
            relevant,
            is_head,
            rest,
            base,
            witness,
            ascribable: Vec::new(),
            conflicts: Vec::new(),
        };
        c.ascribable = (0..n)
            .filter(|&i| c.is_head[i])
            .filter(|&i| c.is_consistent(&mask_bits(1 << (n - 1 - i), n)))
            .collect();
        let original = RationalClosure::with_reasoner(kb, c.base.clone());
        let strict = original.strict_reasoner();
        for m in (0..n).filter(|&i| !c.is_head[i]) {
            for h in (0..n).filter(|&i| c.is_head[i]) {
                let both = ConceptExpr::and(
                    kb.typical[c.relevant[m]].predicate.clone(),
                    kb.typical[c.relevant[h]].predicate.clone(),
                );
                if !strict.satisfiable(&both) {
                    c.conflicts.push((m, h));
                }
            }
        }
        Ok(c)
    }

    pub fn kb(&self) -> &KnowledgeBase {
        self.kb
    }

    pub fn spec(&self) -> &CombinationSpec {
        &self.spec
    }

    pub fn compound(&self) -> &ConceptExpr {
        &self.compound
    }

    /// KB ids of the head and modifier inclusions, in bit order.
    pub fn inclusions(&self) -> &[usize] {
        &self.relevant
    }

    pub fn n(&self) -> usize {
        self.relevant.len()
    }

    pub fn degrees(&self) -> Vec<Degree> {
        self.relevant.iter().map(|&i| self.kb.typical[i].degree.clone()).collect()
    }

    pub fn is_head_inclusion(&self, position: usize) -> bool {
        self.is_head[position]
    }

    /// `⟨R, T' ∪ {q_i :: T(compound) <= D_i | bits_i = 1}, A⟩`.
    pub fn scenario_kb(&self, bits: &[bool]) -> KnowledgeBase {
        let mut typical = self.rest.clone();
        for (pos, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            let src = &self.kb.typical[self.relevant[pos]];
            typical.push(TypicalityInclusion::new(
                src.degree.clone(),
                self.compound.clone(),
                src.predicate.clone(),
            ));
        }
        KnowledgeBase::new(self.kb.rigid.clone(), typical, self.kb.abox.clone())
    }

    /// The scenario KB with a fresh instance of the compound admits a model.
    pub fn is_consistent(&self, bits: &[bool]) -> bool {
        let mut kb = self.scenario_kb(bits);
        kb.abox.push(Assertion::concept(self.compound.clone(), &self.witness));
        kb.normalize();
        RationalClosure::with_reasoner(&kb, self.base.clone()).is_consistent()
    }

    /// Head inclusions that are consistent on their own.
    pub fn ascribable(&self) -> &[usize] {
        &self.ascribable
    }

    pub fn is_trivial(&self, bits: &[bool]) -> bool {
        !self.ascribable.is_empty() && self.ascribable.iter().all(|&i| bits[i])
    }

    /// A kept modifier property clashes with a dropped head property.
    pub fn conflicts(&self, bits: &[bool]) -> bool {
        self.conflicts.iter().any(|&(m, h)| bits[m] && !bits[h])
    }

    fn candidates(&self) -> Vec<(u64, Selection)> {
        let n = self.n();
        let degrees = self.degrees();
        let mut out: Vec<(u64, Selection)> = (0..(1u64 << n))
            .filter(|m| self.spec.options.exactly_k.is_none_or(|k| m.count_ones() as usize == k))
            .map(|m| {
                let bits = mask_bits(m, n);
                let probability = selection_probability(&degrees, &bits).unwrap_or_else(|_| Probability::zero());
                (m, Selection { bits, probability })
            })
            .collect();
        out.sort_by(|a, b| b.1.probability.cmp(&a.1.probability).then(b.0.cmp(&a.0)));
        out
    }

    pub fn select(&self, exec: &dyn Executor) -> SelectionResult {
        let cands = self.candidates();
        let consistent = exec.map(cands.len(), &|i| self.is_consistent(&cands[i].1.bits));
        let mut all = Vec::with_capacity(cands.len());
        let mut block = 0;
        let mut chosen_block: Option<usize> = None;
        for (i, (_, sel)) in cands.into_iter().enumerate() {
            if i > 0 && all.last().is_some_and(|p: &ScenarioRecord| p.selection.probability != sel.probability) {
                block += 1;
            }
            let status = if !consistent[i] {
                ScenarioStatus::Inconsistent
            } else if self.is_trivial(&sel.bits) {
                ScenarioStatus::Trivial
            } else if self.conflicts(&sel.bits) {
                ScenarioStatus::ModifierPreferred
            } else if chosen_block.is_none_or(|b| b == block) {
                chosen_block = Some(block);
                ScenarioStatus::Selected
            } else {
                ScenarioStatus::Dominated
            };
            all.push(ScenarioRecord { selection: sel, status, block });
        }
        let mut diagnostics = Diagnostics::default();
        for r in &all {
            diagnostics.counts[r.status as usize] += 1;
        }
        let selected = all.iter().filter(|r| r.status == ScenarioStatus::Selected).cloned().collect();
        SelectionResult {
            compound: self.compound.clone(),
            head: self.spec.head.clone(),
            modifiers: self.spec.modifiers.clone(),
            inclusions: self.relevant.clone(),
            all,
            selected,
            diagnostics,
        }
    }

    pub fn probability_of(&self, bits: &[bool]) -> Result<Probability, ScenarioError> {
        selection_probability(&self.degrees(), bits)
    }

    pub fn mask(bits: &[bool]) -> u64 {
        bits_mask(bits)
    }
}

pub fn enumerate_scenarios(kb: &KnowledgeBase, spec: &CombinationSpec) -> Result<Vec<ScenarioRecord>, ScenarioError> {
    Ok(select_scenarios(kb, spec)?.all)
}

pub fn select_scenarios(kb: &KnowledgeBase, spec: &CombinationSpec) -> Result<SelectionResult, ScenarioError> {
    Ok(Combination::new(kb, spec)?.select(&Serial))
}

pub fn scenario_consistent(kb: &KnowledgeBase, spec: &CombinationSpec, bits: &[bool]) -> Result<bool, ScenarioError> {
    let c = Combination::new(kb, spec)?;
    if bits.len() != c.n() {
        return Err(ScenarioError::LengthMismatch);
    }
    Ok(c.is_consistent(bits))
}
