//! Class and relation terms: atoms, inverse, chain composition, intersection
//! and subject/object class restrictions.
//!
//! Text syntax: `inv(p)`, `chain(p, q, ...)`, `and(p, q, ...)`, `subj(C)`,
//! `obj(C)`, with atoms written as CURIEs or `<iri>`. Whitespace is ignored.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::PrefixMap;
use crate::rdf::{vocab, Iri};
use crate::taxonomy::Taxonomy;

/// A relation-valued term.
///
/// The derived ordering is the canonical total order: constructor rank first
/// (in declaration order), then operands, atoms by IRI.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PropertyTerm {
    Atomic(Iri),
    Inverse(Box<PropertyTerm>),
    /// Binary; longer chains nest to the right.
    Chain(Box<PropertyTerm>, Box<PropertyTerm>),
    /// Non-empty, sorted, duplicate-free.
    Intersection(Vec<PropertyTerm>),
    /// Holds whenever the subject is an instance of the class.
    SubjectRestriction(Iri),
    /// Holds whenever the object is an instance of the class.
    ObjectRestriction(Iri),
}

impl PropertyTerm {
    pub fn atom(iri: impl Into<Iri>) -> Self {
        PropertyTerm::Atomic(iri.into())
    }

    pub fn inv(t: PropertyTerm) -> Self {
        PropertyTerm::Inverse(Box::new(t))
    }

    pub fn chain(a: PropertyTerm, b: PropertyTerm) -> Self {
        PropertyTerm::Chain(Box::new(a), Box::new(b))
    }

    /// Right-nested chain of `parts`. Panics on an empty list.
    pub fn chain_of(parts: Vec<PropertyTerm>) -> Self {
        let mut it = parts.into_iter().rev();
        let last = it.next().expect("chain needs at least one operand");
        it.fold(last, |acc, t| PropertyTerm::chain(t, acc))
    }

    /// Intersection with the set invariant enforced. Panics on an empty list.
    pub fn and(terms: impl IntoIterator<Item = PropertyTerm>) -> Self {
        let mut v: Vec<PropertyTerm> = terms.into_iter().collect();
        assert!(!v.is_empty(), "intersection needs at least one operand");
        v.sort();
        v.dedup();
        PropertyTerm::Intersection(v)
    }

    pub fn subj(c: impl Into<Iri>) -> Self {
        PropertyTerm::SubjectRestriction(c.into())
    }

    pub fn obj(c: impl Into<Iri>) -> Self {
        PropertyTerm::ObjectRestriction(c.into())
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, PropertyTerm::Atomic(_))
    }

    pub fn as_atomic(&self) -> Option<&Iri> {
        match self {
            PropertyTerm::Atomic(i) => Some(i),
            _ => None,
        }
    }

    /// Atomic properties occurring in the term.
    pub fn properties(&self) -> Vec<&Iri> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let PropertyTerm::Atomic(i) = t {
                out.push(i);
            }
        });
        out
    }

    /// Classes occurring in restrictions.
    pub fn classes(&self) -> Vec<&Iri> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let PropertyTerm::SubjectRestriction(c) | PropertyTerm::ObjectRestriction(c) = t {
                out.push(c);
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a PropertyTerm)) {
        f(self);
        match self {
            PropertyTerm::Inverse(t) => t.walk(f),
            PropertyTerm::Chain(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            PropertyTerm::Intersection(v) => v.iter().for_each(|t| t.walk(f)),
            _ => {}
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PropertyTerm::Inverse(t) => 1 + t.depth(),
            PropertyTerm::Chain(a, b) => 1 + a.depth().max(b.depth()),
            PropertyTerm::Intersection(v) => 1 + v.iter().map(PropertyTerm::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn to_text(&self, prefixes: &PrefixMap) -> String {
        TermText { term: self, prefixes }.to_string()
    }

    pub fn parse(text: &str, prefixes: &PrefixMap) -> Result<Self> {
        let mut p = TermParser { src: text, pos: 0, prefixes };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

struct TermText<'a> {
    term: &'a PropertyTerm,
    prefixes: &'a PrefixMap,
}

impl<'a> TermText<'a> {
    fn sub(&self, term: &'a PropertyTerm) -> TermText<'a> {
        TermText { term, prefixes: self.prefixes }
    }
}

impl fmt::Display for TermText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            PropertyTerm::Atomic(i) => f.write_str(&self.prefixes.display(i)),
            PropertyTerm::SubjectRestriction(c) => write!(f, "subj({})", self.prefixes.display(c)),
            PropertyTerm::ObjectRestriction(c) => write!(f, "obj({})", self.prefixes.display(c)),
            PropertyTerm::Inverse(t) => write!(f, "inv({})", self.sub(t)),
            PropertyTerm::Chain(a, b) => {
                write!(f, "chain({}", self.sub(a))?;
                let mut rest: &PropertyTerm = b;
                while let PropertyTerm::Chain(x, y) = rest {
                    write!(f, ", {}", self.sub(x))?;
                    rest = y;
                }
                write!(f, ", {})", self.sub(rest))
            }
            PropertyTerm::Intersection(v) => {
                f.write_str("and(")?;
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", self.sub(t))?;
                }
                f.write_str(")")
            }
        }
    }
}

struct TermParser<'a> {
    src: &'a str,
    pos: usize,
    prefixes: &'a PrefixMap,
}

impl TermParser<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::MalformedTerm { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<&str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = if rest.starts_with('<') {
            rest.find('>').map(|i| i + 1).ok_or_else(|| self.err("unterminated IRI"))?
        } else {
            rest.find(|c: char| c.is_whitespace() || "(),".contains(c)).unwrap_or(rest.len())
        };
        if len == 0 {
            return Err(self.err("expected a term"));
        }
        let w = &self.src[self.pos..self.pos + len];
        self.pos += len;
        Ok(w)
    }

    fn iri(&mut self) -> Result<Iri> {
        let start = self.pos;
        let w = self.word()?.to_string();
        self.prefixes.expand_curie(&w).map_err(|e| Error::MalformedTerm { offset: start, message: e.to_string() })
    }

    fn list(&mut self) -> Result<Vec<PropertyTerm>> {
        let mut out = vec![self.term()?];
        while self.eat(',') {
            out.push(self.term()?);
        }
        if !self.eat(')') {
            return Err(self.err("expected `)`"));
        }
        Ok(out)
    }

    fn class_arg(&mut self) -> Result<Iri> {
        let c = self.iri()?;
        if !self.eat(')') {
            return Err(self.err("expected `)`"));
        }
        Ok(c)
    }

    fn term(&mut self) -> Result<PropertyTerm> {
        self.skip_ws();
        let save = self.pos;
        let w = self.word()?.to_string();
        if !self.eat('(') {
            self.pos = save;
            return Ok(PropertyTerm::Atomic(self.iri()?));
        }
        match w.as_str() {
            "inv" => {
                let mut args = self.list()?;
                if args.len() != 1 {
                    return Err(self.err("inv takes one operand"));
                }
                Ok(PropertyTerm::inv(args.remove(0)))
            }
            "chain" => {
                let args = self.list()?;
                if args.len() < 2 {
                    return Err(self.err("chain takes at least two operands"));
                }
                Ok(PropertyTerm::chain_of(args))
            }
            "and" => Ok(PropertyTerm::and(self.list()?)),
            "subj" => Ok(PropertyTerm::SubjectRestriction(self.class_arg()?)),
            "obj" => Ok(PropertyTerm::ObjectRestriction(self.class_arg()?)),
            other => {
                self.pos = save;
                Err(self.err(format!("unknown operator `{other}`")))
            }
        }
    }
}

/// Canonical form: inverses pushed onto atoms, chains right-nested,
/// intersections flattened, sorted and deduplicated, singleton intersections
/// unwrapped.
pub fn normalize(t: &PropertyTerm) -> PropertyTerm {
    match t {
        PropertyTerm::Atomic(_) | PropertyTerm::SubjectRestriction(_) | PropertyTerm::ObjectRestriction(_) => t.clone(),
        PropertyTerm::Inverse(inner) => invert(normalize(inner)),
        PropertyTerm::Chain(a, b) => make_chain(normalize(a), normalize(b)),
        PropertyTerm::Intersection(v) => make_and(v.iter().map(normalize).collect()),
    }
}

/// Inverse of an already normal term, kept normal.
fn invert(t: PropertyTerm) -> PropertyTerm {
    match t {
        PropertyTerm::Atomic(_) => PropertyTerm::inv(t),
        PropertyTerm::Inverse(inner) => *inner,
        PropertyTerm::Chain(a, b) => make_chain(invert(*b), invert(*a)),
        PropertyTerm::Intersection(v) => make_and(v.into_iter().map(invert).collect()),
        PropertyTerm::SubjectRestriction(c) => PropertyTerm::ObjectRestriction(c),
        PropertyTerm::ObjectRestriction(c) => PropertyTerm::SubjectRestriction(c),
    }
}

fn make_chain(a: PropertyTerm, b: PropertyTerm) -> PropertyTerm {
    match a {
        PropertyTerm::Chain(a1, a2) => make_chain(*a1, make_chain(*a2, b)),
        a => PropertyTerm::chain(a, b),
    }
}

fn make_and(parts: Vec<PropertyTerm>) -> PropertyTerm {
    let mut flat = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            PropertyTerm::Intersection(v) => flat.extend(v),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else {
        PropertyTerm::Intersection(flat)
    }
}

pub fn term_equal(a: &PropertyTerm, b: &PropertyTerm) -> bool {
    normalize(a) == normalize(b)
}

/// Either side of a correspondence. Class terms are atomic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "term", rename_all = "lowercase")]
pub enum CorrespondenceTerm {
    Class(Iri),
    Property(PropertyTerm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Class,
    Property,
}

impl CorrespondenceTerm {
    pub fn kind(&self) -> TermKind {
        match self {
            CorrespondenceTerm::Class(_) => TermKind::Class,
            CorrespondenceTerm::Property(_) => TermKind::Property,
        }
    }

    pub fn normalized(&self) -> CorrespondenceTerm {
        match self {
            CorrespondenceTerm::Class(c) => CorrespondenceTerm::Class(c.clone()),
            CorrespondenceTerm::Property(p) => CorrespondenceTerm::Property(normalize(p)),
        }
    }

    pub fn as_class(&self) -> Option<&Iri> {
        match self {
            CorrespondenceTerm::Class(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_property(&self) -> Option<&PropertyTerm> {
        match self {
            CorrespondenceTerm::Property(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        match self {
            CorrespondenceTerm::Class(_) => true,
            CorrespondenceTerm::Property(p) => p.is_atomic(),
        }
    }

    pub fn to_text(&self, prefixes: &PrefixMap) -> String {
        match self {
            CorrespondenceTerm::Class(c) => prefixes.display(c),
            CorrespondenceTerm::Property(p) => p.to_text(prefixes),
        }
    }

    pub fn parse(text: &str, kind: TermKind, prefixes: &PrefixMap) -> Result<Self> {
        match kind {
            TermKind::Class => {
                let iri = prefixes
                    .expand_curie(text)
                    .map_err(|e| Error::MalformedTerm { offset: 0, message: e.to_string() })?;
                Ok(CorrespondenceTerm::Class(iri))
            }
            TermKind::Property => Ok(CorrespondenceTerm::Property(PropertyTerm::parse(text, prefixes)?)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structural {
    Yes,
    Unknown,
}

/// Sufficient-condition check for `sub ⊑ sup`. Answers `Yes` only when the
/// containment follows from lattice lookups, intersection elimination or
/// monotone congruence through inverse, chain and intersection; `known`
/// holds accepted (sub, super) pairs that may be used verbatim.
pub fn structural_subsumption(
    t: &Taxonomy,
    known: &[(PropertyTerm, PropertyTerm)],
    sub: &PropertyTerm,
    sup: &PropertyTerm,
) -> Structural {
    let (sub, sup) = (normalize(sub), normalize(sup));
    let known: Vec<(PropertyTerm, PropertyTerm)> = known.iter().map(|(a, b)| (normalize(a), normalize(b))).collect();
    if derive(t, &known, &sub, &sup) {
        Structural::Yes
    } else {
        Structural::Unknown
    }
}

fn derive(t: &Taxonomy, known: &[(PropertyTerm, PropertyTerm)], sub: &PropertyTerm, sup: &PropertyTerm) -> bool {
    use PropertyTerm::*;
    if sub == sup || known.iter().any(|(a, b)| a == sub && b == sup) {
        return true;
    }
    let thing = vocab::thing();
    match sup {
        SubjectRestriction(c) | ObjectRestriction(c) if *c == thing => return true,
        Atomic(p)
            if *p == vocab::top_object_property()
                && !sub
                    .properties()
                    .iter()
                    .any(|q| t.property_kind(q) == Some(crate::taxonomy::PropertyKind::Datatype)) =>
        {
            return true
        }
        Intersection(parts) => return parts.iter().all(|n| derive(t, known, sub, n)),
        _ => {}
    }
    if let Intersection(parts) = sub {
        if parts.iter().any(|m| derive(t, known, m, sup)) {
            return true;
        }
    }
    match (sub, sup) {
        (Atomic(a), Atomic(b)) => t.property_subsumes(b, a),
        (Inverse(a), Inverse(b)) => derive(t, known, a, b),
        (Chain(a1, a2), Chain(b1, b2)) => derive(t, known, a1, b1) && derive(t, known, a2, b2),
        (SubjectRestriction(c), SubjectRestriction(d)) | (ObjectRestriction(c), ObjectRestriction(d)) => {
            t.subsumes(d, c)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm() -> PrefixMap {
        let mut m = PrefixMap::standard();
        m.insert("ex", "http://example.org/");
        m
    }

    fn p(s: &str) -> PropertyTerm {
        PropertyTerm::parse(s, &pm()).unwrap()
    }

    #[test]
    fn inverse_is_an_involution() {
        assert_eq!(normalize(&p("inv(inv(ex:p))")), p("ex:p"));
    }

    #[test]
    fn inverse_of_chain_reverses_operands() {
        assert_eq!(normalize(&p("inv(chain(ex:p, ex:q))")), p("chain(inv(ex:q), inv(ex:p))"));
        assert_eq!(normalize(&p("chain(chain(ex:a, ex:b), ex:c)")), p("chain(ex:a, ex:b, ex:c)"));
    }

    #[test]
    fn already_normal_chain_is_unchanged() {
        let t = p("chain(inv(ex:hpp), ex:hpp)");
        assert_eq!(normalize(&t), t);
    }

    #[test]
    fn restrictions_swap_under_inverse() {
        assert_eq!(normalize(&p("inv(and(ex:p, subj(ex:C)))")), p("and(inv(ex:p), obj(ex:C))"));
    }

    #[test]
    fn intersections_flatten_and_sort() {
        assert!(term_equal(&p("and(ex:p, ex:q)"), &p("and(ex:q, ex:p)")));
        assert_eq!(normalize(&p("and(ex:p, and(ex:q, ex:p))")), p("and(ex:p, ex:q)"));
        assert_eq!(normalize(&p("and(ex:p, ex:p)")), p("ex:p"));
        assert!(!term_equal(&p("ex:p"), &p("inv(ex:p)")));
    }

    #[test]
    fn text_round_trips() {
        let m = pm();
        for s in ["chain(ex:a, ex:b, ex:c)", "and(ex:a, subj(ex:C), obj(ex:D))", "inv(chain(ex:a, ex:b))"] {
            let t = p(s);
            assert_eq!(t.to_text(&m), s);
            assert_eq!(PropertyTerm::parse(&t.to_text(&m), &m).unwrap(), t);
        }
        assert_eq!(p("  chain( ex:a ,ex:b )"), p("chain(ex:a, ex:b)"));
    }

    #[test]
    fn malformed_text_is_rejected() {
        let m = pm();
        for bad in ["", "inv(ex:a", "chain(ex:a)", "foo(ex:a)", "ex:a ex:b", "and()", "nope:x", "subj(ex:C, ex:D)"] {
            assert!(matches!(PropertyTerm::parse(bad, &m), Err(Error::MalformedTerm { .. })), "{bad}");
        }
    }
}
