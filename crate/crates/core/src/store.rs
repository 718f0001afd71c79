use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use indexmap::IndexSet;

use crate::rdf::{Iri, NodeRef, Object, Triple};

/// A set of triples that remembers insertion order.
///
/// Equality is set equality; iteration follows document order so that
/// anything derived from a parsed file is reproducible.
#[derive(Clone, Debug, Default)]
pub struct TripleStore {
    triples: IndexSet<Triple>,
}

impl PartialEq for TripleStore {
    fn eq(&self, other: &Self) -> bool {
        self.triples.len() == other.triples.len() && self.triples.iter().all(|t| other.triples.contains(t))
    }
}

impl Eq for TripleStore {}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the triple was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        self.triples.insert(t)
    }

    pub fn extend(&mut self, other: &TripleStore) {
        for t in other.iter() {
            self.insert(t.clone());
        }
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn with_predicate<'a>(&'a self, p: &'a Iri) -> impl Iterator<Item = &'a Triple> + 'a {
        self.triples.iter().filter(move |t| &t.predicate == p)
    }

    pub fn sorted(&self) -> Vec<&Triple> {
        let mut v: Vec<_> = self.triples.iter().collect();
        v.sort();
        v
    }

    pub fn blank_labels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            if let NodeRef::Blank(b) = &t.subject {
                out.insert(b.clone());
            }
            if let Object::Node(NodeRef::Blank(b)) = &t.object {
                out.insert(b.clone());
            }
        }
        out
    }

    /// Set equality up to a bijective renaming of blank nodes.
    pub fn is_isomorphic(&self, other: &TripleStore) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let left = self.blank_labels();
        let right = other.blank_labels();
        if left.len() != right.len() {
            return false;
        }
        if left.is_empty() {
            return self == other;
        }
        // Ground triples must match exactly.
        let ground =
            |s: &TripleStore| -> HashSet<Triple> { s.iter().filter(|t| !mentions_blank(t)).cloned().collect() };
        if ground(self) != ground(other) {
            return false;
        }
        let sig_left = signatures(self);
        let sig_right = signatures(other);
        let order: Vec<String> = left.into_iter().collect();
        let mut candidates: Vec<Vec<String>> = Vec::with_capacity(order.len());
        for b in &order {
            let c: Vec<String> = right.iter().filter(|r| sig_right.get(*r) == sig_left.get(b)).cloned().collect();
            if c.is_empty() {
                return false;
            }
            candidates.push(c);
        }
        let blank_triples: Vec<&Triple> = self.iter().filter(|t| mentions_blank(t)).collect();
        let mut mapping = HashMap::new();
        let mut used = HashSet::new();
        search(0, &order, &candidates, &blank_triples, other, &mut mapping, &mut used)
    }
}

impl FromIterator<Triple> for TripleStore {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        TripleStore { triples: iter.into_iter().collect() }
    }
}

fn mentions_blank(t: &Triple) -> bool {
    t.subject.is_blank() || matches!(&t.object, Object::Node(NodeRef::Blank(_)))
}

/// Per-blank multiset of (role, predicate) pairs used to prune the search.
fn signatures(s: &TripleStore) -> HashMap<String, BTreeMap<(u8, Iri), usize>> {
    let mut out: HashMap<String, BTreeMap<(u8, Iri), usize>> = HashMap::new();
    for t in s.iter() {
        if let NodeRef::Blank(b) = &t.subject {
            *out.entry(b.clone()).or_default().entry((0, t.predicate.clone())).or_default() += 1;
        }
        if let Object::Node(NodeRef::Blank(b)) = &t.object {
            *out.entry(b.clone()).or_default().entry((1, t.predicate.clone())).or_default() += 1;
        }
    }
    out
}

fn rename(t: &Triple, mapping: &HashMap<String, String>) -> Option<Triple> {
    let map_node = |n: &NodeRef| -> Option<NodeRef> {
        match n {
            NodeRef::Blank(b) => mapping.get(b).map(|m| NodeRef::Blank(m.clone())),
            other => Some(other.clone()),
        }
    };
    let subject = map_node(&t.subject)?;
    let object = match &t.object {
        Object::Node(n) => Object::Node(map_node(n)?),
        lit => lit.clone(),
    };
    Some(Triple { subject, predicate: t.predicate.clone(), object })
}

fn search(
    depth: usize,
    order: &[String],
    candidates: &[Vec<String>],
    triples: &[&Triple],
    other: &TripleStore,
    mapping: &mut HashMap<String, String>,
    used: &mut HashSet<String>,
) -> bool {
    if depth == order.len() {
        return triples.iter().all(|t| rename(t, mapping).is_some_and(|r| other.contains(&r)));
    }
    for c in &candidates[depth] {
        if used.contains(c) {
            continue;
        }
        mapping.insert(order[depth].clone(), c.clone());
        used.insert(c.clone());
        // Every triple whose blanks are all mapped must already exist.
        let consistent = triples.iter().filter_map(|t| rename(t, mapping)).all(|r| other.contains(&r));
        if consistent && search(depth + 1, order, candidates, triples, other, mapping, used) {
            return true;
        }
        mapping.remove(&order[depth]);
        used.remove(c);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Literal;

    fn t(s: NodeRef, p: &str, o: impl Into<Object>) -> Triple {
        Triple::new(s, Iri::new(p), o)
    }

    #[test]
    fn isomorphism_ignores_blank_labels() {
        let a: TripleStore = [
            t(NodeRef::iri("urn:x"), "urn:p", NodeRef::Blank("b0".into())),
            t(NodeRef::Blank("b0".into()), "urn:q", Literal::string("v")),
        ]
        .into_iter()
        .collect();
        let b: TripleStore = [
            t(NodeRef::iri("urn:x"), "urn:p", NodeRef::Blank("zz".into())),
            t(NodeRef::Blank("zz".into()), "urn:q", Literal::string("v")),
        ]
        .into_iter()
        .collect();
        assert!(a.is_isomorphic(&b));
        assert_ne!(a, b);
    }

    #[test]
    fn isomorphism_detects_structure_difference() {
        let a: TripleStore = [
            t(NodeRef::Blank("b0".into()), "urn:p", NodeRef::Blank("b1".into())),
            t(NodeRef::Blank("b1".into()), "urn:p", NodeRef::iri("urn:y")),
        ]
        .into_iter()
        .collect();
        let b: TripleStore = [
            t(NodeRef::Blank("b0".into()), "urn:p", NodeRef::Blank("b1".into())),
            t(NodeRef::Blank("b0".into()), "urn:p", NodeRef::iri("urn:y")),
        ]
        .into_iter()
        .collect();
        assert!(!a.is_isomorphic(&b));
    }
}
