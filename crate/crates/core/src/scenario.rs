//! Scenarios (ABox content) as labeled directed multigraphs, extensional
//! evaluation of relation terms, flowchart CSV import and class-list export.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::PrefixMap;
use crate::rdf::{vocab, Iri, Literal, NodeRef, Object, Triple, OWL, RDFS};
use crate::store::TripleStore;
use crate::taxonomy::Taxonomy;
use crate::term::PropertyTerm;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeRef,
    pub property: Iri,
    pub target: NodeRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub node: NodeRef,
    pub property: Iri,
    pub value: Literal,
}

/// Individuals with their asserted class labels, object-property edges and
/// literal attachments. Node order is first-appearance order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScenarioGraph {
    nodes: IndexMap<NodeRef, BTreeSet<Iri>>,
    edges: Vec<Edge>,
    literals: Vec<Attachment>,
}

pub type Pair = (NodeRef, NodeRef);

/// True for schema-level triples that never belong to a scenario.
pub fn is_tbox(t: &Triple) -> bool {
    const AXIOMS: [&str; 4] = ["subClassOf", "subPropertyOf", "equivalentClass", "equivalentProperty"];
    let p = t.predicate.as_str();
    if AXIOMS.iter().any(|a| p == format!("{RDFS}{a}") || p == format!("{OWL}{a}")) {
        return true;
    }
    t.predicate == vocab::rdf_type()
        && t.object.as_iri().is_some_and(|o| o.as_str().starts_with(OWL) || o.as_str().starts_with(RDFS))
}

/// The scenario part of a store.
pub fn abox(store: &TripleStore) -> TripleStore {
    store.iter().filter(|t| !is_tbox(t)).cloned().collect()
}

impl ScenarioGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples(store: &TripleStore) -> Self {
        let rdf_type = vocab::rdf_type();
        let mut g = ScenarioGraph::new();
        for t in store.iter().filter(|t| !is_tbox(t)) {
            match &t.object {
                Object::Node(NodeRef::Iri(c)) if t.predicate == rdf_type => g.add_label(t.subject.clone(), c.clone()),
                Object::Node(o) => g.add_edge(t.subject.clone(), t.predicate.clone(), o.clone()),
                Object::Literal(l) => g.add_literal(t.subject.clone(), t.predicate.clone(), l.clone()),
            }
        }
        g
    }

    pub fn to_triples(&self) -> TripleStore {
        let mut out = TripleStore::new();
        for (n, labels) in &self.nodes {
            for c in labels {
                out.insert(Triple::new(n.clone(), vocab::rdf_type(), NodeRef::Iri(c.clone())));
            }
        }
        for e in &self.edges {
            out.insert(Triple::new(e.source.clone(), e.property.clone(), e.target.clone()));
        }
        for a in &self.literals {
            out.insert(Triple::new(a.node.clone(), a.property.clone(), a.value.clone()));
        }
        out
    }

    pub fn add_node(&mut self, n: NodeRef) {
        self.nodes.entry(n).or_default();
    }

    pub fn add_label(&mut self, n: NodeRef, class: Iri) {
        self.nodes.entry(n).or_default().insert(class);
    }

    pub fn add_edge(&mut self, source: NodeRef, property: Iri, target: NodeRef) {
        self.add_node(source.clone());
        self.add_node(target.clone());
        self.edges.push(Edge { source, property, target });
    }

    pub fn add_literal(&mut self, node: NodeRef, property: Iri, value: Literal) {
        self.add_node(node.clone());
        self.literals.push(Attachment { node, property, value });
    }

    /// Union of two graphs; shared node identifiers are merged.
    pub fn merge(&self, other: &ScenarioGraph) -> ScenarioGraph {
        let mut g = self.clone();
        for (n, labels) in &other.nodes {
            g.nodes.entry(n.clone()).or_default().extend(labels.iter().cloned());
        }
        for e in &other.edges {
            if !g.edges.contains(e) {
                g.edges.push(e.clone());
            }
        }
        for a in &other.literals {
            if !g.literals.contains(a) {
                g.literals.push(a.clone());
            }
        }
        g
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeRef> {
        self.nodes.keys()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, n: &NodeRef) -> bool {
        self.nodes.contains_key(n)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn literals(&self) -> &[Attachment] {
        &self.literals
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Asserted labels only.
    pub fn labels(&self, n: &NodeRef) -> BTreeSet<Iri> {
        self.nodes.get(n).cloned().unwrap_or_default()
    }

    /// Asserted labels closed upward under the taxonomy, top included.
    pub fn inferred_labels(&self, n: &NodeRef, t: &Taxonomy) -> BTreeSet<Iri> {
        let mut out: BTreeSet<Iri> = t.classes.partition_members(t.top()).into_iter().collect();
        for l in self.labels(n) {
            out.extend(t.classes.ancestors(&l));
        }
        out
    }

    pub fn has_class(&self, n: &NodeRef, class: &Iri, t: &Taxonomy) -> bool {
        t.classes.is_top(class) || self.labels(n).iter().any(|l| t.subsumes(class, l))
    }

    /// Individuals whose inferred labels contain `class`.
    pub fn instances(&self, class: &Iri, t: &Taxonomy) -> Vec<NodeRef> {
        self.nodes.keys().filter(|n| self.has_class(n, class, t)).cloned().collect()
    }

    /// Extension of `term`: the set of node pairs it relates.
    pub fn eval(&self, term: &PropertyTerm, t: &Taxonomy) -> BTreeSet<Pair> {
        let ix = Indexed::new(self, t);
        ix.eval(term).into_iter().map(|(a, b)| (ix.nodes[a].clone(), ix.nodes[b].clone())).collect()
    }
}

type Rel = BTreeSet<(usize, usize)>;

struct Indexed<'a> {
    g: &'a ScenarioGraph,
    t: &'a Taxonomy,
    nodes: Vec<&'a NodeRef>,
    index: HashMap<&'a NodeRef, usize>,
}

impl<'a> Indexed<'a> {
    fn new(g: &'a ScenarioGraph, t: &'a Taxonomy) -> Self {
        let nodes: Vec<&NodeRef> = g.nodes.keys().collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        Indexed { g, t, nodes, index }
    }

    fn typed(&self, class: &Iri) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.g.has_class(self.nodes[i], class, self.t)).collect()
    }

    fn eval(&self, term: &PropertyTerm) -> Rel {
        let all = 0..self.nodes.len();
        match term {
            PropertyTerm::Atomic(p) => self
                .g
                .edges
                .iter()
                .filter(|e| self.t.property_subsumes(p, &e.property))
                .map(|e| (self.index[&e.source], self.index[&e.target]))
                .collect(),
            PropertyTerm::Inverse(inner) => self.eval(inner).into_iter().map(|(a, b)| (b, a)).collect(),
            PropertyTerm::Chain(a, b) => {
                let left = self.eval(a);
                let right = self.eval(b);
                let mut by_start: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for (x, y) in right {
                    by_start.entry(x).or_default().push(y);
                }
                let mut out = Rel::new();
                for (x, m) in left {
                    if let Some(ys) = by_start.get(&m) {
                        out.extend(ys.iter().map(|&y| (x, y)));
                    }
                }
                out
            }
            PropertyTerm::Intersection(parts) => {
                let mut it = parts.iter();
                let mut acc = it.next().map(|p| self.eval(p)).unwrap_or_default();
                for p in it {
                    if acc.is_empty() {
                        break;
                    }
                    let next = self.eval(p);
                    acc.retain(|pair| next.contains(pair));
                }
                acc
            }
            PropertyTerm::SubjectRestriction(c) => {
                self.typed(c).into_iter().flat_map(|x| all.clone().map(move |y| (x, y))).collect()
            }
            PropertyTerm::ObjectRestriction(c) => {
                let ys = self.typed(c);
                all.flat_map(|x| ys.iter().map(move |&y| (x, y))).collect()
            }
        }
    }
}

/// Numeric flowchart edge labels and the relations they stand for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCodeTable {
    codes: BTreeMap<i64, Iri>,
}

impl Default for EdgeCodeTable {
    fn default() -> Self {
        let emmo = |module: &str, local: &str| Iri::new(format!("http://emmo.info/emmo/0.9.10/{module}#{local}"));
        let codes = BTreeMap::from([
            (0, emmo("properties", "has_property")),
            (1, emmo("processual", "has_proper_participant")),
            (2, emmo("semiotics", "has_sign")),
            (3, emmo("mereotopology", "has_proper_part")),
            (4, emmo("mereotopology", "has_spatial_part")),
        ]);
        EdgeCodeTable { codes }
    }
}

impl EdgeCodeTable {
    pub fn empty() -> Self {
        EdgeCodeTable { codes: BTreeMap::new() }
    }

    pub fn insert(&mut self, code: i64, property: Iri) {
        self.codes.insert(code, property);
    }

    pub fn get(&self, code: i64) -> Result<&Iri> {
        self.codes.get(&code).ok_or(Error::UnknownEdgeCode(code))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Iri)> {
        self.codes.iter().map(|(c, p)| (*c, p))
    }

    /// Codes whose relation is not an object property of `t`.
    pub fn non_object_targets(&self, t: &Taxonomy) -> Vec<i64> {
        self.codes
            .iter()
            .filter(|(_, p)| t.property_kind(p) != Some(crate::taxonomy::PropertyKind::Object))
            .map(|(c, _)| *c)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Columns {
    pub id: String,
    pub kind: String,
    pub text: String,
    pub source: String,
    pub target: String,
    pub label: String,
}

impl Default for Columns {
    fn default() -> Self {
        Columns {
            id: "id".into(),
            kind: "kind".into(),
            text: "text".into(),
            source: "source".into(),
            target: "target".into(),
            label: "label".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Kinds {
    pub node: Vec<String>,
    pub edge: Vec<String>,
}

impl Default for Kinds {
    fn default() -> Self {
        Kinds { node: vec!["node".into()], edge: vec!["edge".into()] }
    }
}

/// Adapts a third-party flowchart export to the `id,kind,text,source,target,label`
/// schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub individual_base: String,
    #[serde(default)]
    pub columns: Columns,
    #[serde(default)]
    pub kinds: Kinds,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap { individual_base: "urn:individual:".into(), columns: Columns::default(), kinds: Kinds::default() }
    }
}

impl ColumnMap {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Builds a scenario from flowchart CSV rows. Node text is `NAME : Class, ...`
/// with classes as CURIEs; edge labels are numeric codes.
pub fn import_csv(doc: &str, codes: &EdgeCodeTable, colmap: &ColumnMap, prefixes: &PrefixMap) -> Result<ScenarioGraph> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(doc.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedRow { row: 1, message: format!("missing column `{name}`") })
    };
    let c = &colmap.columns;
    let (id_c, kind_c, text_c, src_c, tgt_c, label_c) =
        (col(&c.id)?, col(&c.kind)?, col(&c.text)?, col(&c.source)?, col(&c.target)?, col(&c.label)?);

    let mut g = ScenarioGraph::new();
    let mut node_ids: HashMap<String, NodeRef> = HashMap::new();
    let mut pending = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let field = |ix: usize| record.get(ix).unwrap_or("").to_string();
        let kind = field(kind_c);
        let malformed = |message: String| Error::MalformedRow { row, message };
        if colmap.kinds.node.contains(&kind) {
            let text = field(text_c);
            let (name, classes) = match text.split_once(':') {
                Some((n, rest)) => (n.trim().to_string(), rest.trim().to_string()),
                None => (text.trim().to_string(), String::new()),
            };
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(malformed(format!("invalid node name `{name}`")));
            }
            let node = NodeRef::Iri(Iri::new(format!("{}{}", colmap.individual_base, name)));
            g.add_node(node.clone());
            for class in classes.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let iri = prefixes.expand_curie(class).map_err(|e| malformed(e.to_string()))?;
                g.add_label(node.clone(), iri);
            }
            node_ids.insert(field(id_c), node);
        } else if colmap.kinds.edge.contains(&kind) {
            let label = field(label_c);
            let code: i64 =
                label.parse().map_err(|_| malformed(format!("edge label `{label}` is not a numeric code")))?;
            let property = codes.get(code)?.clone();
            pending.push((field(id_c), field(src_c), property, field(tgt_c)));
        } else {
            return Err(malformed(format!("unknown row kind `{kind}`")));
        }
    }
    for (id, s, p, o) in pending {
        let lookup = |n: &str| {
            node_ids.get(n).cloned().ok_or_else(|| Error::DanglingEdge { edge: id.clone(), node: n.to_string() })
        };
        let (s, o) = (lookup(&s)?, lookup(&o)?);
        g.add_edge(s, p, o);
    }
    Ok(g)
}

/// One line per individual, sorted by name:
/// `name :: class(,class)* :: (prop->target(,prop->target)*)?`.
/// Individuals without asserted classes are listed under top.
pub fn export_class_list(g: &ScenarioGraph, t: &Taxonomy, prefixes: &PrefixMap) -> String {
    let show = |n: &NodeRef| match n {
        NodeRef::Iri(i) => prefixes.display(i),
        NodeRef::Blank(b) => format!("_:{b}"),
    };
    let mut records: Vec<(String, String)> = g
        .nodes
        .iter()
        .map(|(n, labels)| {
            let mut classes: Vec<String> = labels.iter().map(|c| prefixes.display(c)).collect();
            if classes.is_empty() {
                classes.push(prefixes.display(t.top()));
            }
            classes.sort();
            let mut rels: Vec<String> = g
                .edges
                .iter()
                .filter(|e| &e.source == n)
                .map(|e| format!("{}->{}", prefixes.display(&e.property), show(&e.target)))
                .collect();
            rels.sort();
            let name = show(n);
            let line = format!("{name} :: {} :: {}", classes.join(","), rels.join(","));
            (name, line.trim_end().to_string())
        })
        .collect();
    records.sort();
    let mut out = String::new();
    for (_, line) in records {
        let _ = writeln!(out, "{line}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turtle::parse_turtle;

    fn pm() -> PrefixMap {
        let mut m = PrefixMap::standard();
        m.insert("ex", "http://example.org/");
        m
    }

    fn graph(doc: &str) -> ScenarioGraph {
        ScenarioGraph::from_triples(&parse_turtle(doc, &pm()).unwrap())
    }

    fn n(local: &str) -> NodeRef {
        NodeRef::iri(format!("http://example.org/{local}"))
    }

    fn term(s: &str) -> PropertyTerm {
        PropertyTerm::parse(s, &pm()).unwrap()
    }

    #[test]
    fn tbox_triples_are_excluded() {
        let g = graph("ex:C a owl:Class; rdfs:subClassOf ex:D. ex:a a ex:C; ex:p ex:b; ex:q \"v\".");
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.literals().len(), 1);
        assert_eq!(g.to_triples().len(), 3);
    }

    #[test]
    fn atomic_eval_includes_subproperties() {
        let tbox = parse_turtle("ex:q rdfs:subPropertyOf ex:p.", &pm()).unwrap();
        let t = Taxonomy::from_stores([&tbox]).unwrap();
        let g = graph("ex:a ex:q ex:b. ex:b ex:p ex:c. ex:c ex:r ex:a.");
        assert_eq!(g.eval(&term("ex:p"), &t).len(), 2);
        assert_eq!(g.eval(&term("ex:q"), &t), BTreeSet::from([(n("a"), n("b"))]));
    }

    #[test]
    fn chain_is_a_join() {
        let t = Taxonomy::empty();
        let g = graph("ex:a ex:p ex:b. ex:b ex:q ex:c, ex:d.");
        assert_eq!(g.eval(&term("chain(ex:p, ex:q)"), &t), BTreeSet::from([(n("a"), n("c")), (n("a"), n("d"))]));
        assert_eq!(g.eval(&term("chain(inv(ex:q), ex:q)"), &t).len(), 4);
    }

    #[test]
    fn restrictions_use_inferred_labels() {
        let tbox = parse_turtle("ex:C rdfs:subClassOf ex:D.", &pm()).unwrap();
        let t = Taxonomy::from_stores([&tbox]).unwrap();
        let g = graph("ex:a a ex:C; ex:p ex:b. ex:b ex:p ex:a.");
        assert_eq!(g.eval(&term("and(ex:p, subj(ex:D))"), &t), BTreeSet::from([(n("a"), n("b"))]));
        assert_eq!(g.eval(&term("obj(ex:D)"), &t).len(), 2);
        assert_eq!(g.eval(&term("subj(owl:Thing)"), &t).len(), 4);
        assert!(g.inferred_labels(&n("a"), &t).contains(&Iri::new("http://example.org/D")));
    }

    #[test]
    fn empty_graph_evaluates_to_nothing() {
        let g = ScenarioGraph::new();
        assert!(g.eval(&term("subj(owl:Thing)"), &Taxonomy::empty()).is_empty());
    }

    #[test]
    fn csv_rows_become_nodes_and_edges() {
        let doc = "id,kind,text,source,target,label\n\
                   1,node,A : ex:C,,,\n\
                   2,node,\"B : ex:C, ex:D\",,,\n\
                   3,edge,,1,2,3\n";
        let g = import_csv(doc, &EdgeCodeTable::default(), &ColumnMap::default(), &pm()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.labels(&NodeRef::iri("urn:individual:B")).len(), 2);
        assert_eq!(g.edges()[0].property.local_name(), "has_proper_part");
    }

    #[test]
    fn csv_errors() {
        let codes = EdgeCodeTable::default();
        let cm = ColumnMap::default();
        let head = "id,kind,text,source,target,label\n1,node,A,,,\n";
        let err = import_csv(&format!("{head}2,edge,,1,1,7\n"), &codes, &cm, &pm()).unwrap_err();
        assert!(matches!(err, Error::UnknownEdgeCode(7)));
        let err = import_csv(&format!("{head}2,edge,,1,9,0\n"), &codes, &cm, &pm()).unwrap_err();
        assert!(matches!(err, Error::DanglingEdge { .. }));
        let err = import_csv(&format!("{head}2,edge,,1,1,x\n"), &codes, &cm, &pm()).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 3, .. }));
        assert!(import_csv("id,kind,text,source,target,label\n", &codes, &cm, &pm()).unwrap().is_empty());
    }

    #[test]
    fn class_list_is_sorted_by_name() {
        let g = graph("ex:b a ex:C; ex:p ex:a. ex:a a ex:D, ex:C.");
        let out = export_class_list(&g, &Taxonomy::empty(), &pm());
        assert_eq!(out, "ex:a :: ex:C,ex:D ::\nex:b :: ex:C :: ex:p->ex:a\n");
    }
}
