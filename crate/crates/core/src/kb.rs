use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::concept::ConceptExpr;
use crate::number::Degree;

/// Reserved prefix for fresh witness individuals.
pub const FRESH_PREFIX: &str = "_fresh";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RigidInclusion {
    pub lhs: ConceptExpr,
    pub rhs: ConceptExpr,
}

impl RigidInclusion {
    pub fn new(lhs: ConceptExpr, rhs: ConceptExpr) -> Self {
        RigidInclusion { lhs, rhs }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypicalityInclusion {
    pub id: usize,
    pub degree: Degree,
    pub subject: ConceptExpr,
    pub predicate: ConceptExpr,
}

impl TypicalityInclusion {
    pub fn new(degree: Degree, subject: ConceptExpr, predicate: ConceptExpr) -> Self {
        TypicalityInclusion { id: 0, degree, subject, predicate }
    }

    /// `not subject or predicate`, the classical stand-in used for ranking.
    pub fn materialization(&self) -> ConceptExpr {
        ConceptExpr::or(ConceptExpr::not(self.subject.clone()), self.predicate.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Assertion {
    Concept { concept: ConceptExpr, individual: String },
    Role { role: String, subject: String, object: String },
}

impl Assertion {
    pub fn concept(concept: ConceptExpr, individual: &str) -> Self {
        Assertion::Concept { concept, individual: individual.into() }
    }

    pub fn role(role: &str, subject: &str, object: &str) -> Self {
        Assertion::Role { role: role.into(), subject: subject.into(), object: object.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct KnowledgeBase {
    pub rigid: Vec<RigidInclusion>,
    pub typical: Vec<TypicalityInclusion>,
    pub abox: Vec<Assertion>,
    pub signature: Signature,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DegreeOutOfRange { id: usize },
    UndeclaredConcept(String),
    UndeclaredRole(String),
    UndeclaredIndividual(String),
    DuplicateRigid { index: usize },
    DuplicateTypical { id: usize },
    IdMismatch { position: usize, id: usize },
    EmptyIndividual,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegreeOutOfRange { id } => {
                write!(f, "typicality inclusion {}: degree must be in (0.5,1]", id)
            }
            Violation::UndeclaredConcept(n) => write!(f, "undeclared concept name {}", n),
            Violation::UndeclaredRole(n) => write!(f, "undeclared role name {}", n),
            Violation::UndeclaredIndividual(n) => write!(f, "undeclared individual {}", n),
            Violation::DuplicateRigid { index } => write!(f, "rigid inclusion {} is a duplicate", index),
            Violation::DuplicateTypical { id } => {
                write!(f, "typicality inclusion {} is a duplicate", id)
            }
            Violation::IdMismatch { position, id } => {
                write!(f, "typicality inclusion at position {} carries id {}", position, id)
            }
            Violation::EmptyIndividual => f.write_str("empty individual name"),
        }
    }
}

impl KnowledgeBase {
    /// Builds a KB, numbering typicality inclusions by position and deriving the signature.
    pub fn new(
        rigid: Vec<RigidInclusion>,
        typical: Vec<TypicalityInclusion>,
        abox: Vec<Assertion>,
    ) -> Self {
        let mut kb = KnowledgeBase { rigid, typical, abox, signature: Signature::default() };
        kb.normalize();
        kb
    }

    /// Renumbers typicality ids and recomputes the signature from the formulas.
    pub fn normalize(&mut self) {
        for (i, t) in self.typical.iter_mut().enumerate() {
            t.id = i;
        }
        self.signature = self.used_names();
    }

    pub fn used_names(&self) -> Signature {
        let mut s = Signature::default();
        for r in &self.rigid {
            r.lhs.collect_names(&mut s.concepts, &mut s.roles);
            r.rhs.collect_names(&mut s.concepts, &mut s.roles);
        }
        for t in &self.typical {
            t.subject.collect_names(&mut s.concepts, &mut s.roles);
            t.predicate.collect_names(&mut s.concepts, &mut s.roles);
        }
        for a in &self.abox {
            match a {
                Assertion::Concept { concept, individual } => {
                    concept.collect_names(&mut s.concepts, &mut s.roles);
                    s.individuals.insert(individual.clone());
                }
                Assertion::Role { role, subject, object } => {
                    s.roles.insert(role.clone());
                    s.individuals.insert(subject.clone());
                    s.individuals.insert(object.clone());
                }
            }
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.rigid.is_empty() && self.typical.is_empty() && self.abox.is_empty()
    }

    pub fn individuals(&self) -> BTreeSet<String> {
        self.used_names().individuals
    }

    pub fn has_individual(&self, a: &str) -> bool {
        self.abox.iter().any(|x| match x {
            Assertion::Concept { individual, .. } => individual == a,
            Assertion::Role { subject, object, .. } => subject == a || object == a,
        })
    }

    /// Conjunction of the concept assertions on `a` (`top` when there are none).
    pub fn gamma(&self, a: &str) -> ConceptExpr {
        ConceptExpr::and_all(self.abox.iter().filter_map(|x| match x {
            Assertion::Concept { concept, individual } if individual == a => Some(concept.clone()),
            _ => None,
        }))
    }

    pub fn with_assertion(&self, assertion: Assertion) -> KnowledgeBase {
        let mut kb = self.clone();
        kb.abox.push(assertion);
        kb.normalize();
        kb
    }

    /// Union of two KBs; statements already present in `self` are not repeated.
    pub fn merge(&self, other: &KnowledgeBase) -> KnowledgeBase {
        let mut kb = self.clone();
        for r in &other.rigid {
            if !kb.rigid.contains(r) {
                kb.rigid.push(r.clone());
            }
        }
        for t in &other.typical {
            if !kb
                .typical
                .iter()
                .any(|x| x.subject == t.subject && x.predicate == t.predicate)
            {
                kb.typical.push(t.clone());
            }
        }
        for a in &other.abox {
            if !kb.abox.contains(a) {
                kb.abox.push(a.clone());
            }
        }
        kb.normalize();
        kb
    }

    pub fn inclusions_of<'a>(&'a self, subject: &'a ConceptExpr) -> impl Iterator<Item = &'a TypicalityInclusion> + 'a {
        self.typical.iter().filter(move |t| &t.subject == subject)
    }
}

/// Lists every degree out of range, undeclared name and duplicate inclusion.
pub fn validate(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = Vec::new();
    let half = num_rational::BigRational::new(1.into(), 2.into());
    for (pos, t) in kb.typical.iter().enumerate() {
        if t.id != pos {
            out.push(Violation::IdMismatch { position: pos, id: t.id });
        }
        let v = t.degree.value();
        if *v <= half || *v > num_rational::BigRational::from_integer(1.into()) {
            out.push(Violation::DegreeOutOfRange { id: t.id });
        }
        if kb.typical[..pos]
            .iter()
            .any(|x| x.subject == t.subject && x.predicate == t.predicate)
        {
            out.push(Violation::DuplicateTypical { id: t.id });
        }
    }
    for (i, r) in kb.rigid.iter().enumerate() {
        if kb.rigid[..i].contains(r) {
            out.push(Violation::DuplicateRigid { index: i });
        }
    }
    let used = kb.used_names();
    for c in used.concepts.difference(&kb.signature.concepts) {
        out.push(Violation::UndeclaredConcept(c.clone()));
    }
    for r in used.roles.difference(&kb.signature.roles) {
        out.push(Violation::UndeclaredRole(r.clone()));
    }
    for a in used.individuals.difference(&kb.signature.individuals) {
        out.push(Violation::UndeclaredIndividual(a.clone()));
    }
    if used.individuals.iter().any(|a| a.is_empty()) {
        out.push(Violation::EmptyIndividual);
    }
    out
}

/// Smallest `_freshN` not used as an individual in `kb`.
pub fn fresh_individual(kb: &KnowledgeBase) -> String {
    let used = kb.used_names().individuals;
    (0..)
        .map(|i| format!("{}{}", FRESH_PREFIX, i))
        .find(|n| !used.contains(n) && !kb.signature.individuals.contains(n))
        .unwrap_or_default()
}

pub fn is_reserved_individual(name: &str) -> bool {
    name.strip_prefix(FRESH_PREFIX)
        .map(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
        .unwrap_or(false)
}
