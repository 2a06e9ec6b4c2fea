//! Tableau procedure for ALC with general TBoxes and ABoxes.
//!
//! Concepts are interned in negation normal form. Inclusions whose NNF
//! `not C or D` has a negated-atom disjunct are absorbed into lazy rules
//! fired by that atom; the rest are added to every node. Termination uses
//! subset blocking against ancestors.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::concept::{nnf, ConceptExpr};
use crate::kb::{Assertion, RigidInclusion};

/// The classical part of a KB: rigid inclusions and assertions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrictKB {
    pub rigid: Vec<RigidInclusion>,
    pub abox: Vec<Assertion>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownIndividual(pub String);

impl fmt::Display for UnknownIndividual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown individual {}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Top,
    Bottom,
    Atom(u32),
    Neg(u32),
    And(Vec<u32>),
    Or(Vec<u32>),
    Some(u32, u32),
    All(u32, u32),
}

#[derive(Default)]
struct Store {
    nodes: Vec<Node>,
    index: BTreeMap<Node, u32>,
    atoms: BTreeMap<String, u32>,
    roles: BTreeMap<String, u32>,
}

/// Interning arena layered over an immutable base.
struct Arena<'a> {
    base: Option<&'a Store>,
    own: Store,
}

impl<'a> Arena<'a> {
    fn new(base: Option<&'a Store>) -> Self {
        Arena { base, own: Store::default() }
    }

    fn base_len(&self) -> usize {
        self.base.map_or(0, |b| b.nodes.len())
    }

    fn len(&self) -> usize {
        self.base_len() + self.own.nodes.len()
    }

    fn node(&self, id: u32) -> &Node {
        let bl = self.base_len();
        if (id as usize) < bl {
            &self.base.map(|b| &b.nodes).unwrap_or(&self.own.nodes)[id as usize]
        } else {
            &self.own.nodes[id as usize - bl]
        }
    }

    fn lookup(&self, n: &Node) -> Option<u32> {
        if let Some(b) = self.base {
            if let Some(&i) = b.index.get(n) {
                return Some(i);
            }
        }
        self.own.index.get(n).copied()
    }

    fn add(&mut self, n: Node) -> u32 {
        if let Some(i) = self.lookup(&n) {
            return i;
        }
        let id = self.len() as u32;
        self.own.nodes.push(n.clone());
        self.own.index.insert(n, id);
        id
    }

    fn name(&mut self, roles: bool, s: &str) -> u32 {
        let base_map = self.base.map(|b| if roles { &b.roles } else { &b.atoms });
        if let Some(&i) = base_map.and_then(|m| m.get(s)) {
            return i;
        }
        let offset = base_map.map_or(0, |m| m.len()) as u32;
        let own = if roles { &mut self.own.roles } else { &mut self.own.atoms };
        let next = offset + own.len() as u32;
        *own.entry(s.into()).or_insert(next)
    }

    fn atom_count(&self) -> usize {
        self.base.map_or(0, |b| b.atoms.len()) + self.own.atoms.len()
    }

    /// Interns an NNF concept, flattening and simplifying connectives.
    fn intern(&mut self, c: &ConceptExpr) -> u32 {
        match c {
            ConceptExpr::Top => self.add(Node::Top),
            ConceptExpr::Bottom => self.add(Node::Bottom),
            ConceptExpr::Atom(a) => {
                let i = self.name(false, a);
                self.add(Node::Atom(i))
            }
            ConceptExpr::Not(x) => match x.as_ref() {
                ConceptExpr::Atom(a) => {
                    let i = self.name(false, a);
                    self.add(Node::Neg(i))
                }
                _ => {
                    let n = nnf(c);
                    self.intern(&n)
                }
            },
            ConceptExpr::And(..) => {
                let mut parts = Vec::new();
                self.flatten(c, true, &mut parts);
                self.connective(true, parts)
            }
            ConceptExpr::Or(..) => {
                let mut parts = Vec::new();
                self.flatten(c, false, &mut parts);
                self.connective(false, parts)
            }
            ConceptExpr::Exists(r, f) => {
                let ri = self.name(true, r);
                let fi = self.intern(f);
                self.add(Node::Some(ri, fi))
            }
            ConceptExpr::Forall(r, f) => {
                let ri = self.name(true, r);
                let fi = self.intern(f);
                self.add(Node::All(ri, fi))
            }
        }
    }

    fn flatten(&mut self, c: &ConceptExpr, conj: bool, out: &mut Vec<u32>) {
        match (c, conj) {
            (ConceptExpr::And(l, r), true) | (ConceptExpr::Or(l, r), false) => {
                self.flatten(l, conj, out);
                self.flatten(r, conj, out);
            }
            _ => {
                let id = self.intern(c);
                match (self.node(id).clone(), conj) {
                    (Node::And(xs), true) | (Node::Or(xs), false) => out.extend(xs),
                    _ => out.push(id),
                }
            }
        }
    }

    fn connective(&mut self, conj: bool, mut parts: Vec<u32>) -> u32 {
        let (unit, zero) = if conj { (Node::Top, Node::Bottom) } else { (Node::Bottom, Node::Top) };
        parts.retain(|&p| *self.node(p) != unit);
        if parts.iter().any(|&p| *self.node(p) == zero) {
            return self.add(zero);
        }
        parts.sort_unstable();
        parts.dedup();
        match parts.len() {
            0 => self.add(unit),
            1 => parts[0],
            _ => self.add(if conj { Node::And(parts) } else { Node::Or(parts) }),
        }
    }

    /// Splits an axiom concept into an unconditional concept or an atom-triggered rule.
    fn absorb(&mut self, id: u32) -> (Option<u32>, u32) {
        match self.node(id).clone() {
            Node::Neg(a) => (Some(a), self.add(Node::Bottom)),
            Node::Or(xs) => {
                let pick = xs.iter().position(|&x| matches!(self.node(x), Node::Neg(_)));
                match pick {
                    Some(p) => {
                        let a = match self.node(xs[p]) {
                            Node::Neg(a) => *a,
                            _ => unreachable!(),
                        };
                        let rest: Vec<u32> =
                            xs.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, &x)| x).collect();
                        (Some(a), self.connective(false, rest))
                    }
                    None => (None, id),
                }
            }
            _ => (None, id),
        }
    }
}

#[derive(Default, Clone)]
struct Rules {
    unconditional: Vec<u32>,
    triggers: BTreeMap<u32, Vec<u32>>,
}

impl Rules {
    fn add(&mut self, arena: &mut Arena<'_>, axiom: u32) {
        match arena.absorb(axiom) {
            (Some(a), rest) => self.triggers.entry(a).or_default().push(rest),
            (None, c) => {
                if *arena.node(c) != Node::Top {
                    self.unconditional.push(c)
                }
            }
        }
    }
}

struct Prepared {
    store: Store,
    global: Rules,
}

fn axiom_concept(r: &RigidInclusion) -> ConceptExpr {
    nnf(&ConceptExpr::or(ConceptExpr::not(r.lhs.clone()), r.rhs.clone()))
}

impl Prepared {
    fn new(rigid: &[RigidInclusion]) -> Self {
        let mut arena = Arena::new(None);
        let mut global = Rules::default();
        arena.add(Node::Top);
        arena.add(Node::Bottom);
        for r in rigid {
            let id = arena.intern(&axiom_concept(r));
            global.add(&mut arena, id);
        }
        Prepared { store: arena.own, global }
    }
}

#[derive(Clone)]
struct Label {
    bits: Vec<u64>,
    members: Vec<u32>,
}

impl Label {
    fn new(size: usize) -> Self {
        Label { bits: vec![0; size.div_ceil(64)], members: Vec::new() }
    }

    fn has(&self, id: u32) -> bool {
        self.bits[(id / 64) as usize] & (1u64 << (id % 64)) != 0
    }

    fn insert(&mut self, id: u32) -> bool {
        let w = &mut self.bits[(id / 64) as usize];
        let m = 1u64 << (id % 64);
        if *w & m != 0 {
            return false;
        }
        *w |= m;
        self.members.push(id);
        true
    }

    fn subset_of(&self, other: &[u64]) -> bool {
        self.bits.iter().zip(other).all(|(a, b)| a & !b == 0)
    }
}

/// One satisfiability or consistency run over a fixed arena.
struct Run<'a, 'b> {
    arena: &'b Arena<'a>,
    global: &'b Rules,
    root: Rules,
    pos: Vec<Option<u32>>,
    neg: Vec<Option<u32>>,
    unsat: BTreeSet<Vec<u64>>,
}

enum Saturated {
    Clash,
    Open(Vec<u32>),
}

impl<'a, 'b> Run<'a, 'b> {
    fn new(arena: &'b Arena<'a>, global: &'b Rules, root: Rules) -> Self {
        let n_atoms = arena.atom_count();
        let mut pos = vec![None; n_atoms];
        let mut neg = vec![None; n_atoms];
        for id in 0..arena.len() as u32 {
            match arena.node(id) {
                Node::Atom(a) => pos[*a as usize] = Some(id),
                Node::Neg(a) => neg[*a as usize] = Some(id),
                _ => {}
            }
        }
        Run { arena, global, root, pos, neg, unsat: BTreeSet::new() }
    }

    fn complement(&self, id: u32) -> Option<u32> {
        match self.arena.node(id) {
            Node::Atom(a) => self.neg[*a as usize],
            Node::Neg(a) => self.pos[*a as usize],
            Node::Top => self.arena.lookup(&Node::Bottom),
            _ => None,
        }
    }

    fn fresh_label(&self, seeds: &[u32]) -> Label {
        let mut l = Label::new(self.arena.len());
        for &s in seeds.iter().chain(&self.global.unconditional) {
            l.insert(s);
        }
        l
    }

    /// Deterministic expansion plus unit propagation on disjunctions.
    fn saturate(&self, label: &mut Label, root: bool) -> Saturated {
        let mut cursor = 0;
        loop {
            while cursor < label.members.len() {
                let id = label.members[cursor];
                cursor += 1;
                match self.arena.node(id) {
                    Node::Bottom => return Saturated::Clash,
                    Node::Atom(a) => {
                        if self.neg[*a as usize].is_some_and(|n| label.has(n)) {
                            return Saturated::Clash;
                        }
                        if let Some(rs) = self.global.triggers.get(a) {
                            for &r in rs {
                                label.insert(r);
                            }
                        }
                        if root {
                            if let Some(rs) = self.root.triggers.get(a) {
                                for &r in rs {
                                    label.insert(r);
                                }
                            }
                        }
                    }
                    Node::Neg(a) => {
                        if self.pos[*a as usize].is_some_and(|p| label.has(p)) {
                            return Saturated::Clash;
                        }
                    }
                    Node::And(xs) => {
                        for &x in xs {
                            label.insert(x);
                        }
                    }
                    _ => {}
                }
            }
            let mut pending = Vec::new();
            let mut progressed = false;
            for i in 0..label.members.len() {
                let id = label.members[i];
                if let Node::Or(xs) = self.arena.node(id) {
                    if xs.iter().any(|&x| label.has(x)) {
                        continue;
                    }
                    let mut viable = xs.iter().copied().filter(|&x| self.viable(label, x));
                    match (viable.next(), viable.next()) {
                        (None, _) => return Saturated::Clash,
                        (Some(only), None) => {
                            label.insert(only);
                            progressed = true;
                            break;
                        }
                        _ => pending.push(id),
                    }
                }
            }
            if !progressed {
                return Saturated::Open(pending);
            }
        }
    }

    fn viable(&self, label: &Label, x: u32) -> bool {
        match self.arena.node(x) {
            Node::Bottom => false,
            _ => !self.complement(x).is_some_and(|c| label.has(c)),
        }
    }

    fn expand(&mut self, mut label: Label, root: bool, ancestors: &mut Vec<Vec<u64>>) -> bool {
        let pending = match self.saturate(&mut label, root) {
            Saturated::Clash => return false,
            Saturated::Open(p) => p,
        };
        if let Some(&or) = pending.first() {
            let Node::Or(xs) = self.arena.node(or) else { unreachable!() };
            let xs = xs.clone();
            let mut refuted: Vec<u32> = Vec::new();
            for x in xs {
                if !self.viable(&label, x) {
                    continue;
                }
                let mut next = label.clone();
                next.insert(x);
                for &r in &refuted {
                    if let Some(c) = self.complement(r) {
                        next.insert(c);
                    }
                }
                if self.expand(next, root, ancestors) {
                    return true;
                }
                refuted.push(x);
            }
            return false;
        }
        self.successors(&label, ancestors)
    }

    fn successors(&mut self, label: &Label, ancestors: &mut Vec<Vec<u64>>) -> bool {
        let exists: Vec<(u32, u32)> = label
            .members
            .iter()
            .filter_map(|&id| match self.arena.node(id) {
                Node::Some(r, f) => Some((*r, *f)),
                _ => None,
            })
            .collect();
        for (role, filler) in exists {
            let mut seeds = vec![filler];
            for &id in &label.members {
                if let Node::All(r, f) = self.arena.node(id) {
                    if *r == role {
                        seeds.push(*f);
                    }
                }
            }
            let child = self.fresh_label(&seeds);
            if child.subset_of(&label.bits) || ancestors.iter().any(|a| child.subset_of(a)) {
                continue;
            }
            if self.unsat.contains(&child.bits) {
                return false;
            }
            ancestors.push(label.bits.clone());
            let key = child.bits.clone();
            let ok = self.expand(child, false, ancestors);
            ancestors.pop();
            if !ok {
                self.unsat.insert(key);
                return false;
            }
        }
        true
    }
}

type SatKey = (ConceptExpr, Vec<ConceptExpr>);

/// Decision procedures over a fixed set of rigid inclusions.
///
/// Results of root satisfiability queries are memoized behind a lock, so one
/// reasoner can be shared by concurrent callers.
pub struct Reasoner {
    rigid: Vec<RigidInclusion>,
    prepared: Prepared,
    cache: Option<spin::Mutex<BTreeMap<SatKey, bool>>>,
}

impl Reasoner {
    pub fn new(rigid: &[RigidInclusion]) -> Self {
        Reasoner {
            rigid: rigid.to_vec(),
            prepared: Prepared::new(rigid),
            cache: Some(spin::Mutex::new(BTreeMap::new())),
        }
    }

    pub fn without_cache(rigid: &[RigidInclusion]) -> Self {
        Reasoner { cache: None, ..Reasoner::new(rigid) }
    }

    pub fn rigid(&self) -> &[RigidInclusion] {
        &self.rigid
    }

    pub fn satisfiable(&self, c: &ConceptExpr) -> bool {
        self.satisfiable_with(c, &[])
    }

    /// Satisfiability of `c` in an element that also satisfies every concept
    /// in `at_root`; unlike rigid inclusions these hold at that element only.
    pub fn satisfiable_with(&self, c: &ConceptExpr, at_root: &[ConceptExpr]) -> bool {
        let key = (c.clone(), at_root.to_vec());
        if let Some(cache) = &self.cache {
            if let Some(&v) = cache.lock().get(&key) {
                return v;
            }
        }
        let v = self.decide(c, at_root);
        if let Some(cache) = &self.cache {
            cache.lock().insert(key, v);
        }
        v
    }

    fn decide(&self, c: &ConceptExpr, at_root: &[ConceptExpr]) -> bool {
        let mut arena = Arena::new(Some(&self.prepared.store));
        let start = arena.intern(&nnf(c));
        let mut root = Rules::default();
        for r in at_root {
            let id = arena.intern(&nnf(r));
            root.add(&mut arena, id);
        }
        let mut run = Run::new(&arena, &self.prepared.global, root);
        let mut seeds = vec![start];
        seeds.extend(run.root.unconditional.iter().copied());
        let label = run.fresh_label(&seeds);
        run.expand(label, true, &mut Vec::new())
    }

    pub fn subsumes(&self, sub: &ConceptExpr, sup: &ConceptExpr) -> bool {
        !self.satisfiable(&ConceptExpr::and(sub.clone(), ConceptExpr::not(sup.clone())))
    }

    pub fn consistent(&self, abox: &[Assertion]) -> bool {
        let mut arena = Arena::new(Some(&self.prepared.store));
        let mut names: BTreeMap<String, usize> = BTreeMap::new();
        let mut seeds: Vec<Vec<u32>> = Vec::new();
        let mut edges: Vec<(usize, u32, usize)> = Vec::new();
        let mut slot = |n: &str, seeds: &mut Vec<Vec<u32>>| -> usize {
            *names.entry(n.into()).or_insert_with(|| {
                seeds.push(Vec::new());
                seeds.len() - 1
            })
        };
        for a in abox {
            match a {
                Assertion::Concept { concept, individual } => {
                    let i = slot(individual, &mut seeds);
                    let id = arena.intern(&nnf(concept));
                    seeds[i].push(id);
                }
                Assertion::Role { role, subject, object } => {
                    let s = slot(subject, &mut seeds);
                    let o = slot(object, &mut seeds);
                    let r = arena.name(true, role);
                    edges.push((s, r, o));
                }
            }
        }
        let mut run = Run::new(&arena, &self.prepared.global, Rules::default());
        let labels: Vec<Label> = seeds.iter().map(|s| run.fresh_label(s)).collect();
        if labels.is_empty() {
            return true;
        }
        abox_expand(&mut run, labels, &edges)
    }

    pub fn instance_of(
        &self,
        abox: &[Assertion],
        a: &str,
        c: &ConceptExpr,
    ) -> Result<bool, UnknownIndividual> {
        let known = abox.iter().any(|x| match x {
            Assertion::Concept { individual, .. } => individual == a,
            Assertion::Role { subject, object, .. } => subject == a || object == a,
        });
        if !known {
            return Err(UnknownIndividual(a.into()));
        }
        let mut extended = abox.to_vec();
        extended.push(Assertion::concept(ConceptExpr::not(c.clone()), a));
        Ok(!self.consistent(&extended))
    }
}

fn abox_expand(run: &mut Run<'_, '_>, mut labels: Vec<Label>, edges: &[(usize, u32, usize)]) -> bool {
    // saturate individuals and propagate universal restrictions along role edges
    let mut pending: Option<(usize, u32)>;
    loop {
        let mut changed = false;
        pending = None;
        for i in 0..labels.len() {
            match run.saturate(&mut labels[i], false) {
                Saturated::Clash => return false,
                Saturated::Open(p) => {
                    if pending.is_none() {
                        if let Some(&or) = p.first() {
                            pending = Some((i, or));
                        }
                    }
                }
            }
        }
        for &(s, r, o) in edges {
            let adds: Vec<u32> = labels[s]
                .members
                .iter()
                .filter_map(|&id| match run.arena.node(id) {
                    Node::All(role, f) if *role == r => Some(*f),
                    _ => None,
                })
                .collect();
            for f in adds {
                changed |= labels[o].insert(f);
            }
        }
        if !changed {
            break;
        }
    }
    if let Some((i, or)) = pending {
        let Node::Or(xs) = run.arena.node(or) else { unreachable!() };
        let xs = xs.clone();
        for x in xs {
            if !run.viable(&labels[i], x) {
                continue;
            }
            let mut next = labels.clone();
            next[i].insert(x);
            if abox_expand(run, next, edges) {
                return true;
            }
        }
        return false;
    }
    let named: Vec<Vec<u64>> = labels.iter().map(|l| l.bits.clone()).collect();
    for l in &labels {
        let mut ancestors = named.clone();
        if !run.successors(l, &mut ancestors) {
            return false;
        }
    }
    true
}

pub fn concept_satisfiable(kb: &StrictKB, c: &ConceptExpr) -> bool {
    Reasoner::new(&kb.rigid).satisfiable(c)
}

pub fn subsumes(kb: &StrictKB, sub: &ConceptExpr, sup: &ConceptExpr) -> bool {
    Reasoner::new(&kb.rigid).subsumes(sub, sup)
}

pub fn kb_consistent(kb: &StrictKB) -> bool {
    Reasoner::new(&kb.rigid).consistent(&kb.abox)
}

pub fn instance_of(kb: &StrictKB, a: &str, c: &ConceptExpr) -> Result<bool, UnknownIndividual> {
    Reasoner::new(&kb.rigid).instance_of(&kb.abox, a, c)
}
