//! Subsumption lattices over class and property IRIs.
//!
//! A [`Lattice`] collapses equivalence (asserted or via subsumption cycles)
//! into partitions and keeps the reflexive-transitive closure over them as
//! bit rows. Every partition sits below a designated top.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rdf::{vocab, Iri, Triple};
use crate::store::TripleStore;

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn new(n: usize) -> Self {
        BitRow(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }
    fn union_with(&mut self, other: &BitRow) -> bool {
        let mut changed = false;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            let next = *a | *b;
            changed |= next != *a;
            *a = next;
        }
        changed
    }
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(w, bits)| (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b))
    }
}

/// Reflexive-transitive closure of `edges` over `n` vertices (row = set of
/// vertices reachable from the row's vertex).
fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<BitRow> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a].push(b);
    }
    let mut rows = Vec::with_capacity(n);
    for start in 0..n {
        let mut row = BitRow::new(n);
        let mut stack = vec![start];
        row.set(start);
        while let Some(v) = stack.pop() {
            for &w in &succ[v] {
                if !row.get(w) {
                    row.set(w);
                    stack.push(w);
                }
            }
        }
        rows.push(row);
    }
    rows
}

/// Direct (covering) edges of a partial order given by its closure rows.
fn reduce(rows: &[BitRow]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (p, row) in rows.iter().enumerate() {
        let strict: Vec<usize> = row.ones().filter(|&q| q != p).collect();
        for &q in &strict {
            let covered = strict.iter().any(|&r| r != q && rows[r].get(q));
            if !covered {
                out.push((p, q));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// Subsumption order over a set of IRIs, quotiented by equivalence.
#[derive(Clone, Debug)]
pub struct Lattice {
    nodes: Vec<Iri>,
    index: HashMap<Iri, usize>,
    asserted: BTreeSet<(Iri, Iri)>,
    partition_of: Vec<usize>,
    /// Members of each partition, sorted; the first is the representative.
    partitions: Vec<Vec<usize>>,
    /// Closure of asserted edges only (no synthetic top links).
    asserted_up: Vec<BitRow>,
    /// Closure including every partition below top.
    up: Vec<BitRow>,
    down: Vec<BitRow>,
    cover_up: Vec<Vec<usize>>,
    cover_down: Vec<Vec<usize>>,
    top: usize,
}

impl Lattice {
    /// `subs` are (sub, super) pairs, `equivs` unordered equivalent pairs.
    pub fn build(top: Iri, nodes: impl IntoIterator<Item = Iri>, subs: &[(Iri, Iri)], equivs: &[(Iri, Iri)]) -> Self {
        let mut all: BTreeSet<Iri> = nodes.into_iter().collect();
        all.insert(top.clone());
        for (a, b) in subs.iter().chain(equivs) {
            all.insert(a.clone());
            all.insert(b.clone());
        }
        let nodes: Vec<Iri> = all.into_iter().collect();
        let index: HashMap<Iri, usize> = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let n = nodes.len();

        let mut edges: Vec<(usize, usize)> = subs.iter().map(|(a, b)| (index[a], index[b])).collect();
        for (a, b) in equivs {
            edges.push((index[a], index[b]));
            edges.push((index[b], index[a]));
        }
        let node_rows = closure(n, &edges);

        // Mutually reachable nodes form one partition.
        let mut partition_of = vec![usize::MAX; n];
        let mut partitions: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            if partition_of[v] != usize::MAX {
                continue;
            }
            let id = partitions.len();
            let members: Vec<usize> = (v..n).filter(|&w| node_rows[v].get(w) && node_rows[w].get(v)).collect();
            for &m in &members {
                partition_of[m] = id;
            }
            partitions.push(members);
        }
        let pn = partitions.len();
        let top_p = partition_of[index[&top]];

        let mut p_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &(a, b) in &edges {
            let (pa, pb) = (partition_of[a], partition_of[b]);
            if pa != pb {
                p_edges.insert((pa, pb));
            }
        }
        let p_edges: Vec<(usize, usize)> = p_edges.into_iter().collect();
        let asserted_up = closure(pn, &p_edges);
        let mut up = asserted_up.clone();
        for row in up.iter_mut() {
            let top_row = asserted_up[top_p].clone();
            row.set(top_p);
            row.union_with(&top_row);
        }
        let mut down: Vec<BitRow> = (0..pn).map(|_| BitRow::new(pn)).collect();
        for (p, row) in up.iter().enumerate() {
            for q in row.ones() {
                down[q].set(p);
            }
        }
        let mut cover_up = vec![Vec::new(); pn];
        let mut cover_down = vec![Vec::new(); pn];
        for (p, q) in reduce(&up) {
            cover_up[p].push(q);
            cover_down[q].push(p);
        }

        Lattice {
            asserted: subs.iter().cloned().collect(),
            nodes,
            index,
            partition_of,
            partitions,
            asserted_up,
            up,
            down,
            cover_up,
            cover_down,
            top: top_p,
        }
    }

    fn part(&self, iri: &Iri) -> Option<usize> {
        self.index.get(iri).map(|&i| self.partition_of[i])
    }

    fn rep(&self, p: usize) -> &Iri {
        &self.nodes[self.partitions[p][0]]
    }

    pub fn top(&self) -> &Iri {
        self.rep(self.top)
    }

    pub fn contains(&self, iri: &Iri) -> bool {
        self.index.contains_key(iri)
    }

    pub fn is_top(&self, iri: &Iri) -> bool {
        self.part(iri) == Some(self.top)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iris(&self) -> impl Iterator<Item = &Iri> {
        self.nodes.iter()
    }

    /// `sub ⊑ sup` in the reflexive-transitive closure modulo equivalence.
    /// Unknown IRIs are singleton leaves directly below top.
    pub fn subsumes(&self, sup: &Iri, sub: &Iri) -> bool {
        if sup == sub {
            return true;
        }
        match (self.part(sup), self.part(sub)) {
            (Some(a), Some(b)) => self.up[b].get(a),
            (Some(a), None) => a == self.top,
            _ => false,
        }
    }

    pub fn equivalent(&self, a: &Iri, b: &Iri) -> bool {
        a == b || matches!((self.part(a), self.part(b)), (Some(x), Some(y)) if x == y)
    }

    /// Lexicographically smallest member of `iri`'s partition.
    pub fn representative(&self, iri: &Iri) -> Iri {
        self.part(iri).map(|p| self.rep(p).clone()).unwrap_or_else(|| iri.clone())
    }

    pub fn partition_members(&self, iri: &Iri) -> Vec<Iri> {
        match self.part(iri) {
            Some(p) => self.partitions[p].iter().map(|&i| self.nodes[i].clone()).collect(),
            None => vec![iri.clone()],
        }
    }

    /// Direct super- or sub-partitions, one representative each, sorted.
    pub fn neighbors(&self, iri: &Iri, direction: Direction) -> Vec<Iri> {
        let Some(p) = self.part(iri) else {
            return match direction {
                Direction::Up => vec![self.top().clone()],
                Direction::Down => Vec::new(),
            };
        };
        let cover = match direction {
            Direction::Up => &self.cover_up[p],
            Direction::Down => &self.cover_down[p],
        };
        let mut out: Vec<Iri> = cover.iter().map(|&q| self.rep(q).clone()).collect();
        out.sort();
        out
    }

    /// Every IRI subsuming `iri`, including its own partition and top.
    pub fn ancestors(&self, iri: &Iri) -> Vec<Iri> {
        match self.part(iri) {
            Some(p) => self.expand(&self.up[p]),
            None => {
                let mut v = vec![iri.clone()];
                v.extend(self.partition_members(self.top()));
                v
            }
        }
    }

    /// Every IRI subsumed by `iri`, including its own partition.
    pub fn descendants(&self, iri: &Iri) -> Vec<Iri> {
        match self.part(iri) {
            Some(p) if p == self.top => self.nodes.clone(),
            Some(p) => self.expand(&self.down[p]),
            None => vec![iri.clone()],
        }
    }

    /// True if some other partition lies strictly below `iri`.
    pub fn has_strict_descendants(&self, iri: &Iri) -> bool {
        match self.part(iri) {
            Some(p) => self.down[p].ones().any(|q| q != p),
            None => false,
        }
    }

    fn expand(&self, row: &BitRow) -> Vec<Iri> {
        let mut out: Vec<Iri> =
            row.ones().flat_map(|q| self.partitions[q].iter().map(|&i| self.nodes[i].clone())).collect();
        out.sort();
        out
    }

    pub fn asserted_edges(&self) -> &BTreeSet<(Iri, Iri)> {
        &self.asserted
    }

    /// Minimal (sub, super) edge set over partition representatives whose
    /// closure equals the closure of the asserted edges. Synthetic links to
    /// top are not part of it.
    pub fn transitive_reduction(&self) -> BTreeSet<(Iri, Iri)> {
        reduce(&self.asserted_up).into_iter().map(|(p, q)| (self.rep(p).clone(), self.rep(q).clone())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Object,
    Datatype,
}

/// Class lattice plus disjoint object- and datatype-property lattices.
#[derive(Clone, Debug)]
pub struct Taxonomy {
    pub classes: Lattice,
    pub object_properties: Lattice,
    pub datatype_properties: Lattice,
    kinds: BTreeMap<Iri, PropertyKind>,
}

impl Taxonomy {
    pub fn empty() -> Self {
        Self::from_stores(std::iter::empty()).expect("empty taxonomy is always valid")
    }

    /// Reads subclass, subproperty and equivalence axioms plus class and
    /// property declarations from every store.
    pub fn from_stores<'a>(stores: impl IntoIterator<Item = &'a TripleStore>) -> Result<Self> {
        let rdf_type = vocab::rdf_type();
        let (sub_c, sub_p) = (vocab::subclass_of(), vocab::subproperty_of());
        let (eq_c, eq_p) = (vocab::equivalent_class(), vocab::equivalent_property());
        let class_markers = [vocab::owl_class(), vocab::rdfs_class()];
        let (obj_p, data_p) = (vocab::object_property(), vocab::datatype_property());

        let mut classes = BTreeSet::new();
        let mut class_subs = Vec::new();
        let mut class_eqs = Vec::new();
        let mut declared: BTreeMap<Iri, BTreeSet<PropertyKind>> = BTreeMap::new();
        let mut prop_subs = Vec::new();
        let mut prop_eqs = Vec::new();
        let mut props = BTreeSet::new();

        let pair =
            |t: &Triple| -> Option<(Iri, Iri)> { Some((t.subject.as_iri()?.clone(), t.object.as_iri()?.clone())) };
        for store in stores {
            for t in store.iter() {
                let p = &t.predicate;
                if *p == rdf_type {
                    let (Some(s), Some(o)) = (t.subject.as_iri(), t.object.as_iri()) else { continue };
                    if class_markers.contains(o) {
                        classes.insert(s.clone());
                    } else if *o == obj_p {
                        declared.entry(s.clone()).or_default().insert(PropertyKind::Object);
                    } else if *o == data_p {
                        declared.entry(s.clone()).or_default().insert(PropertyKind::Datatype);
                    }
                } else if *p == sub_c {
                    class_subs.extend(pair(t));
                } else if *p == eq_c {
                    class_eqs.extend(pair(t));
                } else if *p == sub_p {
                    prop_subs.extend(pair(t));
                } else if *p == eq_p {
                    prop_eqs.extend(pair(t));
                }
            }
        }

        for (iri, kinds) in &declared {
            if kinds.len() > 1 {
                return Err(Error::PropertyKindConflict(iri.to_string()));
            }
            props.insert(iri.clone());
        }
        for (a, b) in prop_subs.iter().chain(&prop_eqs) {
            props.insert(a.clone());
            props.insert(b.clone());
        }
        let kinds = resolve_kinds(&props, &declared, &prop_subs, &prop_eqs)?;
        let split = |k: PropertyKind, pairs: &[(Iri, Iri)]| -> Vec<(Iri, Iri)> {
            pairs.iter().filter(|(a, _)| kinds[a] == k).cloned().collect()
        };
        let members = |k: PropertyKind| kinds.iter().filter(move |(_, v)| **v == k).map(|(i, _)| i.clone());

        Ok(Taxonomy {
            classes: Lattice::build(vocab::thing(), classes, &class_subs, &class_eqs),
            object_properties: Lattice::build(
                vocab::top_object_property(),
                members(PropertyKind::Object),
                &split(PropertyKind::Object, &prop_subs),
                &split(PropertyKind::Object, &prop_eqs),
            ),
            datatype_properties: Lattice::build(
                vocab::top_data_property(),
                members(PropertyKind::Datatype),
                &split(PropertyKind::Datatype, &prop_subs),
                &split(PropertyKind::Datatype, &prop_eqs),
            ),
            kinds,
        })
    }

    pub fn top(&self) -> &Iri {
        self.classes.top()
    }

    pub fn subsumes(&self, sup: &Iri, sub: &Iri) -> bool {
        self.classes.subsumes(sup, sub)
    }

    pub fn property_kind(&self, p: &Iri) -> Option<PropertyKind> {
        if *p == vocab::top_object_property() {
            return Some(PropertyKind::Object);
        }
        if *p == vocab::top_data_property() {
            return Some(PropertyKind::Datatype);
        }
        self.kinds.get(p).copied()
    }

    pub fn is_property(&self, p: &Iri) -> bool {
        self.property_kind(p).is_some()
    }

    pub fn is_class(&self, c: &Iri) -> bool {
        self.classes.contains(c)
    }

    /// Lattice for `p`'s kind; undeclared properties are treated as object
    /// properties.
    pub fn property_lattice(&self, p: &Iri) -> &Lattice {
        match self.property_kind(p) {
            Some(PropertyKind::Datatype) => &self.datatype_properties,
            _ => &self.object_properties,
        }
    }

    /// `sub ⊑ sup` for atomic properties; false across kinds.
    pub fn property_subsumes(&self, sup: &Iri, sub: &Iri) -> bool {
        if sup == sub {
            return true;
        }
        let ks = self.property_kind(sup).unwrap_or(PropertyKind::Object);
        let kb = self.property_kind(sub).unwrap_or(PropertyKind::Object);
        ks == kb && self.property_lattice(sup).subsumes(sup, sub)
    }
}

/// Propagates declared kinds across subproperty/equivalence components;
/// undeclared components default to object properties.
fn resolve_kinds(
    props: &BTreeSet<Iri>,
    declared: &BTreeMap<Iri, BTreeSet<PropertyKind>>,
    subs: &[(Iri, Iri)],
    eqs: &[(Iri, Iri)],
) -> Result<BTreeMap<Iri, PropertyKind>> {
    let ids: Vec<&Iri> = props.iter().collect();
    let index: HashMap<&Iri, usize> = ids.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in subs.iter().chain(eqs) {
        let (x, y) = (find(&mut parent, index[a]), find(&mut parent, index[b]));
        parent[x] = y;
    }
    let mut component_kind: HashMap<usize, (PropertyKind, &Iri)> = HashMap::new();
    for (iri, kinds) in declared {
        let kind = *kinds.iter().next().expect("non-empty");
        let root = find(&mut parent, index[iri]);
        match component_kind.get(&root) {
            Some((k, other)) if *k != kind => {
                let (object, datatype) = if kind == PropertyKind::Object { (iri, *other) } else { (*other, iri) };
                return Err(Error::MixedPropertyLink { object: object.to_string(), datatype: datatype.to_string() });
            }
            Some(_) => {}
            None => {
                component_kind.insert(root, (kind, iri));
            }
        }
    }
    let mut out = BTreeMap::new();
    for (i, iri) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        let kind = component_kind.get(&root).map(|(k, _)| *k).unwrap_or(PropertyKind::Object);
        out.insert((*iri).clone(), kind);
    }
    Ok(out)
}

/// Convenience for tests and callers that only have (sub, super) class pairs.
pub fn class_lattice_from_pairs(pairs: &[(&str, &str)]) -> Lattice {
    let subs: Vec<(Iri, Iri)> = pairs.iter().map(|(a, b)| (Iri::new(a), Iri::new(b))).collect();
    Lattice::build(vocab::thing(), std::iter::empty(), &subs, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(s: &str) -> Iri {
        Iri::new(s)
    }

    #[test]
    fn textbook_reduction() {
        let l = class_lattice_from_pairs(&[("urn:a", "urn:b"), ("urn:b", "urn:c"), ("urn:a", "urn:c")]);
        let r = l.transitive_reduction();
        let expected: BTreeSet<(Iri, Iri)> = [(i("urn:a"), i("urn:b")), (i("urn:b"), i("urn:c"))].into_iter().collect();
        assert_eq!(r, expected);
    }

    #[test]
    fn cycles_collapse_into_one_partition() {
        let l = class_lattice_from_pairs(&[("urn:a", "urn:b"), ("urn:b", "urn:a"), ("urn:c", "urn:a")]);
        assert!(l.equivalent(&i("urn:a"), &i("urn:b")));
        assert_eq!(l.representative(&i("urn:b")), i("urn:a"));
        assert_eq!(l.transitive_reduction().len(), 1);
        assert!(l.subsumes(&i("urn:b"), &i("urn:c")));
    }

    #[test]
    fn unknown_iris_sit_below_top() {
        let l = class_lattice_from_pairs(&[("urn:a", "urn:b")]);
        let x = i("urn:unknown");
        assert!(l.subsumes(&x, &x));
        assert!(l.subsumes(l.top(), &x));
        assert!(!l.subsumes(&i("urn:b"), &x));
        assert_eq!(l.neighbors(&x, Direction::Up), vec![l.top().clone()]);
    }

    #[test]
    fn top_has_no_parents() {
        let l = class_lattice_from_pairs(&[("urn:a", "urn:b")]);
        assert!(l.neighbors(l.top(), Direction::Up).is_empty());
        assert_eq!(l.neighbors(l.top(), Direction::Down), vec![i("urn:b")]);
    }

    #[test]
    fn empty_taxonomy_has_only_top() {
        let t = Taxonomy::empty();
        assert_eq!(t.classes.len(), 1);
        assert!(t.classes.is_top(&vocab::thing()));
    }

    #[test]
    fn double_declared_property_is_rejected() {
        let p = crate::prefix::PrefixMap::standard();
        let s =
            crate::turtle::parse_turtle("<urn:p> a owl:ObjectProperty. <urn:p> a owl:DatatypeProperty.", &p).unwrap();
        assert!(matches!(Taxonomy::from_stores([&s]), Err(Error::PropertyKindConflict(_))));
        let s = crate::turtle::parse_turtle(
            "<urn:p> a owl:ObjectProperty. <urn:q> a owl:DatatypeProperty. <urn:p> rdfs:subPropertyOf <urn:q>.",
            &p,
        )
        .unwrap();
        assert!(matches!(Taxonomy::from_stores([&s]), Err(Error::MixedPropertyLink { .. })));
    }
}
