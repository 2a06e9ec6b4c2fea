use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// ALC concept expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConceptExpr {
    Top,
    Bottom,
    Atom(String),
    Not(Box<ConceptExpr>),
    And(Box<ConceptExpr>, Box<ConceptExpr>),
    Or(Box<ConceptExpr>, Box<ConceptExpr>),
    Exists(String, Box<ConceptExpr>),
    Forall(String, Box<ConceptExpr>),
}

impl ConceptExpr {
    pub fn atom(name: &str) -> Self {
        ConceptExpr::Atom(name.into())
    }

    pub fn not(c: ConceptExpr) -> Self {
        ConceptExpr::Not(Box::new(c))
    }

    pub fn and(l: ConceptExpr, r: ConceptExpr) -> Self {
        ConceptExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: ConceptExpr, r: ConceptExpr) -> Self {
        ConceptExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn exists(role: &str, filler: ConceptExpr) -> Self {
        ConceptExpr::Exists(role.into(), Box::new(filler))
    }

    pub fn forall(role: &str, filler: ConceptExpr) -> Self {
        ConceptExpr::Forall(role.into(), Box::new(filler))
    }

    /// Left-nested conjunction; `Top` for an empty input.
    pub fn and_all<I: IntoIterator<Item = ConceptExpr>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => ConceptExpr::Top,
            Some(first) => it.fold(first, ConceptExpr::and),
        }
    }

    /// Left-nested disjunction; `Bottom` for an empty input.
    pub fn or_all<I: IntoIterator<Item = ConceptExpr>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => ConceptExpr::Bottom,
            Some(first) => it.fold(first, ConceptExpr::or),
        }
    }

    /// Flattened top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&ConceptExpr> {
        let mut out = Vec::new();
        fn walk<'a>(c: &'a ConceptExpr, out: &mut Vec<&'a ConceptExpr>) {
            match c {
                ConceptExpr::And(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn is_primary(&self) -> bool {
        matches!(self, ConceptExpr::Top | ConceptExpr::Bottom | ConceptExpr::Atom(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            ConceptExpr::Top | ConceptExpr::Bottom | ConceptExpr::Atom(_) => 1,
            ConceptExpr::Not(c) | ConceptExpr::Exists(_, c) | ConceptExpr::Forall(_, c) => {
                1 + c.depth()
            }
            ConceptExpr::And(l, r) | ConceptExpr::Or(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn collect_names(&self, concepts: &mut BTreeSet<String>, roles: &mut BTreeSet<String>) {
        match self {
            ConceptExpr::Top | ConceptExpr::Bottom => {}
            ConceptExpr::Atom(a) => {
                concepts.insert(a.clone());
            }
            ConceptExpr::Not(c) => c.collect_names(concepts, roles),
            ConceptExpr::And(l, r) | ConceptExpr::Or(l, r) => {
                l.collect_names(concepts, roles);
                r.collect_names(concepts, roles);
            }
            ConceptExpr::Exists(role, c) | ConceptExpr::Forall(role, c) => {
                roles.insert(role.clone());
                c.collect_names(concepts, roles);
            }
        }
    }

    pub fn has_roles(&self) -> bool {
        match self {
            ConceptExpr::Top | ConceptExpr::Bottom | ConceptExpr::Atom(_) => false,
            ConceptExpr::Not(c) => c.has_roles(),
            ConceptExpr::And(l, r) | ConceptExpr::Or(l, r) => l.has_roles() || r.has_roles(),
            ConceptExpr::Exists(..) | ConceptExpr::Forall(..) => true,
        }
    }
}

/// Negation normal form: negation only in front of atoms, `not top`/`not bot` folded.
pub fn nnf(c: &ConceptExpr) -> ConceptExpr {
    use ConceptExpr::*;
    match c {
        Top | Bottom | Atom(_) => c.clone(),
        And(l, r) => ConceptExpr::and(nnf(l), nnf(r)),
        Or(l, r) => ConceptExpr::or(nnf(l), nnf(r)),
        Exists(role, f) => ConceptExpr::exists(role, nnf(f)),
        Forall(role, f) => ConceptExpr::forall(role, nnf(f)),
        Not(inner) => match inner.as_ref() {
            Top => Bottom,
            Bottom => Top,
            Atom(_) => c.clone(),
            Not(x) => nnf(x),
            And(l, r) => ConceptExpr::or(nnf_not(l), nnf_not(r)),
            Or(l, r) => ConceptExpr::and(nnf_not(l), nnf_not(r)),
            Exists(role, f) => ConceptExpr::forall(role, nnf_not(f)),
            Forall(role, f) => ConceptExpr::exists(role, nnf_not(f)),
        },
    }
}

fn nnf_not(c: &ConceptExpr) -> ConceptExpr {
    nnf(&ConceptExpr::not(c.clone()))
}

// Precedence levels for rendering: 0 = or, 1 = and, 2 = unary.
fn render(c: &ConceptExpr, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    use ConceptExpr::*;
    let own = match c {
        Or(..) => 0,
        And(..) => 1,
        _ => 2,
    };
    if own < level {
        f.write_str("(")?;
        render(c, own, f)?;
        return f.write_str(")");
    }
    match c {
        Top => f.write_str("top"),
        Bottom => f.write_str("bot"),
        Atom(a) => f.write_str(a),
        Not(x) => {
            f.write_str("not ")?;
            render(x, 2, f)
        }
        And(l, r) => {
            render(l, 1, f)?;
            f.write_str(" and ")?;
            render(r, 2, f)
        }
        Or(l, r) => {
            render(l, 0, f)?;
            f.write_str(" or ")?;
            render(r, 1, f)
        }
        Exists(role, x) => {
            write!(f, "some {} . ", role)?;
            render(x, 2, f)
        }
        Forall(role, x) => {
            write!(f, "all {} . ", role)?;
            render(x, 2, f)
        }
    }
}

impl fmt::Display for ConceptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(self, 0, f)
    }
}

/// Rendering usable where the grammar demands a primary (assertions).
pub struct AsPrimary<'a>(pub &'a ConceptExpr);

impl fmt::Display for AsPrimary<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_primary() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}
