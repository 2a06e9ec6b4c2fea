//! Brute-force ranked-model semantics for small role-free KBs.
//!
//! Domain elements are propositional valuations. A model assigns each
//! valuation a rank or leaves it out; it satisfies `T(C) <= D` when every
//! minimal-rank present C-valuation satisfies D. Queries are answered in the
//! pointwise-minimal models whose domain is the largest one any model admits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::concept::ConceptExpr;
use crate::kb::KnowledgeBase;

pub const MAX_ATOMS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    HasRoles,
    HasIndividuals,
    TooManyAtoms(usize),
    UnknownAtom(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::HasRoles => f.write_str("oracle input must be role-free"),
            OracleError::HasIndividuals => f.write_str("oracle input must have an empty ABox"),
            OracleError::TooManyAtoms(n) => write!(f, "oracle supports at most {} atoms, got {}", MAX_ATOMS, n),
            OracleError::UnknownAtom(a) => write!(f, "atom {} is not in the KB signature", a),
        }
    }
}

/// Ranks over the valuations consistent with the rigid part; `None` = absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedWorldModel {
    pub worlds: Vec<u32>,
    pub rank: Vec<Option<usize>>,
}

pub struct PropositionalKb {
    atoms: Vec<String>,
    worlds: Vec<u32>,
    // per inclusion: worlds (indices into `worlds`) satisfying the subject, and subject-but-not-predicate
    conditionals: Vec<(u64, u64)>,
    max_rank: usize,
}

fn eval(c: &ConceptExpr, atoms: &[String], w: u32) -> Result<bool, OracleError> {
    Ok(match c {
        ConceptExpr::Top => true,
        ConceptExpr::Bottom => false,
        ConceptExpr::Atom(a) => {
            let i = atoms.iter().position(|x| x == a).ok_or_else(|| OracleError::UnknownAtom(a.clone()))?;
            w & (1 << i) != 0
        }
        ConceptExpr::Not(x) => !eval(x, atoms, w)?,
        ConceptExpr::And(l, r) => eval(l, atoms, w)? && eval(r, atoms, w)?,
        ConceptExpr::Or(l, r) => eval(l, atoms, w)? || eval(r, atoms, w)?,
        ConceptExpr::Exists(..) | ConceptExpr::Forall(..) => return Err(OracleError::HasRoles),
    })
}

impl PropositionalKb {
    /// `vocabulary` adds atoms beyond those used in `kb` (e.g. query atoms).
    pub fn new(kb: &KnowledgeBase, vocabulary: &[ConceptExpr]) -> Result<Self, OracleError> {
        if !kb.abox.is_empty() {
            return Err(OracleError::HasIndividuals);
        }
        let mut names = kb.used_names();
        for c in vocabulary {
            c.collect_names(&mut names.concepts, &mut names.roles);
        }
        if !names.roles.is_empty() {
            return Err(OracleError::HasRoles);
        }
        let atoms: Vec<String> = names.concepts.into_iter().collect();
        if atoms.len() > MAX_ATOMS {
            return Err(OracleError::TooManyAtoms(atoms.len()));
        }
        let mut worlds = Vec::new();
        for w in 0..(1u32 << atoms.len()) {
            let mut ok = true;
            for r in &kb.rigid {
                if eval(&r.lhs, &atoms, w)? && !eval(&r.rhs, &atoms, w)? {
                    ok = false;
                }
            }
            if ok {
                worlds.push(w);
            }
        }
        let mut conditionals = Vec::new();
        for t in &kb.typical {
            let (mut c, mut cn) = (0u64, 0u64);
            for (i, &w) in worlds.iter().enumerate() {
                if eval(&t.subject, &atoms, w)? {
                    c |= 1 << i;
                    if !eval(&t.predicate, &atoms, w)? {
                        cn |= 1 << i;
                    }
                }
            }
            conditionals.push((c, cn));
        }
        Ok(PropositionalKb { atoms, worlds, conditionals, max_rank: kb.typical.len() })
    }

    fn min_rank(rank: &[usize], set: u64) -> Option<usize> {
        rank.iter()
            .enumerate()
            .filter(|&(i, &r)| set & (1 << i) != 0 && r != usize::MAX)
            .map(|(_, &r)| r)
            .min()
    }

    fn holds(rank: &[usize], subject: u64, counter: u64) -> bool {
        match Self::min_rank(rank, subject) {
            None => true,
            Some(m) => Self::min_rank(rank, counter).is_none_or(|x| x > m),
        }
    }

    fn admissible(&self, rank: &[usize]) -> bool {
        self.conditionals.iter().all(|&(c, cn)| Self::holds(rank, c, cn))
    }

    /// Calls `f` on every rank vector with entries in `0..=max_rank` or absent (`usize::MAX`).
    fn each_assignment(&self, mut f: impl FnMut(&[usize])) {
        let n = self.worlds.len();
        let top = self.max_rank + 1;
        let mut digits = vec![0usize; n];
        let decode = |d: &[usize], out: &mut Vec<usize>| {
            out.clear();
            out.extend(d.iter().map(|&x| if x == top { usize::MAX } else { x }));
        };
        let mut buf = Vec::with_capacity(n);
        loop {
            decode(&digits, &mut buf);
            f(&buf);
            let mut i = 0;
            loop {
                if i == n {
                    return;
                }
                digits[i] += 1;
                if digits[i] <= top {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    pub fn minimal_models(&self) -> Vec<RankedWorldModel> {
        let n = self.worlds.len();
        let mut domain = 0u64;
        self.each_assignment(|r| {
            if self.admissible(r) {
                for (i, &x) in r.iter().enumerate() {
                    if x != usize::MAX {
                        domain |= 1 << i;
                    }
                }
            }
        });
        let canonical = |r: &[usize]| (0..n).all(|i| (r[i] != usize::MAX) == (domain & (1 << i) != 0));
        let mut lowest: Option<Vec<usize>> = None;
        self.each_assignment(|r| {
            if canonical(r) && self.admissible(r) {
                match &mut lowest {
                    None => lowest = Some(r.to_vec()),
                    Some(l) => l.iter_mut().zip(r).for_each(|(a, &b)| *a = (*a).min(b)),
                }
            }
        });
        let survivors: Vec<Vec<usize>> = match lowest {
            None => Vec::new(),
            Some(l) if self.admissible(&l) => vec![l],
            Some(_) => {
                let mut all = Vec::new();
                self.each_assignment(|r| {
                    if canonical(r) && self.admissible(r) {
                        all.push(r.to_vec());
                    }
                });
                let below = |a: &Vec<usize>, b: &Vec<usize>| a != b && a.iter().zip(b).all(|(x, y)| x <= y);
                all.iter().filter(|m| !all.iter().any(|o| below(o, m))).cloned().collect()
            }
        };
        survivors
            .into_iter()
            .map(|r| RankedWorldModel {
                worlds: self.worlds.clone(),
                rank: r.into_iter().map(|x| if x == usize::MAX { None } else { Some(x) }).collect(),
            })
            .collect()
    }

    /// `T(subject) <= predicate` in every minimal canonical model.
    pub fn entails(&self, models: &[RankedWorldModel], subject: &ConceptExpr, predicate: &ConceptExpr) -> Result<bool, OracleError> {
        let (mut c, mut cn) = (0u64, 0u64);
        for (i, &w) in self.worlds.iter().enumerate() {
            if eval(subject, &self.atoms, w)? {
                c |= 1 << i;
                if !eval(predicate, &self.atoms, w)? {
                    cn |= 1 << i;
                }
            }
        }
        Ok(models.iter().all(|m| {
            let r: Vec<usize> = m.rank.iter().map(|x| x.unwrap_or(usize::MAX)).collect();
            Self::holds(&r, c, cn)
        }))
    }
}

/// Typicality entailment by exhaustive ranked-model enumeration.
pub fn oracle_rc(kb: &KnowledgeBase, subject: &ConceptExpr, predicate: &ConceptExpr) -> Result<bool, OracleError> {
    let p = PropositionalKb::new(kb, &[subject.clone(), predicate.clone()])?;
    let models = p.minimal_models();
    p.entails(&models, subject, predicate)
}
