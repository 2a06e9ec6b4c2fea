//! Rational closure over ALC: exceptionality strata, concept ranks and
//! defeasible entailment.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::alc::{Reasoner, UnknownIndividual};
use crate::concept::ConceptExpr;
use crate::kb::{KnowledgeBase, RigidInclusion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(usize),
    Infinite,
}

impl Rank {
    pub fn is_finite(self) -> bool {
        matches!(self, Rank::Finite(_))
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(n) => write!(f, "{}", n),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

/// Strata `E_0 ⊇ E_1 ⊇ …` as typicality ids; the last stratum is the fixpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTable {
    pub strata: Vec<Vec<usize>>,
    pub fixpoint: Vec<usize>,
}

/// A KB with its rank table computed once.
pub struct RationalClosure<'k> {
    kb: &'k KnowledgeBase,
    base: Arc<Reasoner>,
    strict: Arc<Reasoner>,
    table: RankTable,
    materialized: Vec<Vec<ConceptExpr>>,
}

impl<'k> RationalClosure<'k> {
    pub fn new(kb: &'k KnowledgeBase) -> Self {
        RationalClosure::with_reasoner(kb, Arc::new(Reasoner::new(&kb.rigid)))
    }

    /// Reuses a reasoner built for `kb.rigid`, sharing its cache.
    pub fn with_reasoner(kb: &'k KnowledgeBase, base: Arc<Reasoner>) -> Self {
        debug_assert_eq!(base.rigid(), kb.rigid.as_slice());
        let mats = |ids: &[usize]| -> Vec<ConceptExpr> {
            ids.iter().map(|&i| kb.typical[i].materialization()).collect()
        };
        let mut current: Vec<usize> = (0..kb.typical.len()).collect();
        let mut strata = Vec::new();
        let mut materialized = Vec::new();
        loop {
            let m = mats(&current);
            let mut verdicts: BTreeMap<&ConceptExpr, bool> = BTreeMap::new();
            let next: Vec<usize> = current
                .iter()
                .copied()
                .filter(|&i| {
                    let s = &kb.typical[i].subject;
                    *verdicts.entry(s).or_insert_with(|| !base.satisfiable_with(s, &m))
                })
                .collect();
            strata.push(current.clone());
            materialized.push(m);
            if next == current {
                break;
            }
            current = next;
        }
        let fixpoint = current;
        let strict = if fixpoint.is_empty() {
            base.clone()
        } else {
            let mut rigid = kb.rigid.clone();
            rigid.extend(fixpoint.iter().map(|&i| {
                RigidInclusion::new(kb.typical[i].subject.clone(), kb.typical[i].predicate.clone())
            }));
            Arc::new(Reasoner::new(&rigid))
        };
        RationalClosure { kb, base, strict, table: RankTable { strata, fixpoint }, materialized }
    }

    pub fn table(&self) -> &RankTable {
        &self.table
    }

    pub fn kb(&self) -> &KnowledgeBase {
        self.kb
    }

    /// Reasoner over the rigid part extended with the rank-infinite inclusions.
    pub fn strict_reasoner(&self) -> &Reasoner {
        &self.strict
    }

    pub fn base_reasoner(&self) -> &Arc<Reasoner> {
        &self.base
    }

    pub fn exceptional(&self, c: &ConceptExpr, stratum: usize) -> bool {
        !self.base.satisfiable_with(c, &self.materialized[stratum])
    }

    pub fn rank(&self, c: &ConceptExpr) -> Rank {
        (0..self.table.strata.len())
            .find(|&i| !self.exceptional(c, i))
            .map_or(Rank::Infinite, Rank::Finite)
    }

    pub fn entails_typicality(&self, subject: &ConceptExpr, predicate: &ConceptExpr) -> bool {
        if self.rank(subject) == Rank::Infinite {
            return true;
        }
        let with = ConceptExpr::and(subject.clone(), predicate.clone());
        let without = ConceptExpr::and(subject.clone(), ConceptExpr::not(predicate.clone()));
        self.rank(&with) < self.rank(&without)
    }

    /// Classical consequence under the strictified KB, or the typicality of
    /// the conjunction of `a`'s concept assertions.
    pub fn entails_assertion(&self, a: &str, c: &ConceptExpr) -> Result<bool, UnknownIndividual> {
        if self.strict.instance_of(&self.kb.abox, a, c)? {
            return Ok(true);
        }
        Ok(self.entails_typicality(&self.kb.gamma(a), c))
    }

    pub fn is_consistent(&self) -> bool {
        self.strict.consistent(&self.kb.abox)
            && self.kb.individuals().iter().all(|a| self.rank(&self.kb.gamma(a)).is_finite())
    }
}

pub fn compute_ranks(kb: &KnowledgeBase) -> RankTable {
    RationalClosure::new(kb).table
}

pub fn concept_rank(kb: &KnowledgeBase, c: &ConceptExpr) -> Rank {
    RationalClosure::new(kb).rank(c)
}

pub fn rc_entails_typicality(kb: &KnowledgeBase, subject: &ConceptExpr, predicate: &ConceptExpr) -> bool {
    RationalClosure::new(kb).entails_typicality(subject, predicate)
}

pub fn rc_entails_assertion(kb: &KnowledgeBase, a: &str, c: &ConceptExpr) -> Result<bool, UnknownIndividual> {
    RationalClosure::new(kb).entails_assertion(a, c)
}

pub fn tcl_consistent(kb: &KnowledgeBase) -> bool {
    RationalClosure::new(kb).is_consistent()
}
