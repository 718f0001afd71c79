#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use alignforge::engine::Decision;
use alignforge::prefix::PrefixMap;
use alignforge::rdf::{Iri, NodeRef};
use alignforge::scenario::{Pair, ScenarioGraph};
use alignforge::session::{Workspace, WorkspaceConfig};
use alignforge::store::TripleStore;
use alignforge::taxonomy::Taxonomy;
use alignforge::term::PropertyTerm;
use alignforge::turtle::parse_turtle;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixtures().join(rel)).unwrap()
}

pub fn workspace() -> Workspace {
    Workspace::open(&WorkspaceConfig::from_dir(&fixtures()).unwrap()).unwrap()
}

pub fn golden() -> Workspace {
    let mut ws = workspace();
    ws.replay(&read("sessions/golden-session.jsonl")).unwrap();
    ws
}

pub fn accept(ws: &mut Workspace, id: u32) {
    ws.decide(id, &Decision::Accept, "t").unwrap();
}

/// The five alignment statements listed in the worked example.
pub fn expected_alignment(prefixes: &PrefixMap) -> TripleStore {
    parse_turtle(&read("expected/alignment.ttl"), prefixes).unwrap()
}

// Small random vocabulary: p1, p2 ⊑ p0; C2 ⊑ C1 ⊑ C0.
pub const PROPS: [&str; 4] = ["urn:p0", "urn:p1", "urn:p2", "urn:p3"];
pub const CLASSES: [&str; 4] = ["urn:C0", "urn:C1", "urn:C2", "urn:C3"];
pub const THING: &str = "http://www.w3.org/2002/07/owl#Thing";

pub fn random_taxonomy() -> Taxonomy {
    let doc = "
        <urn:p0> a owl:ObjectProperty. <urn:p3> a owl:ObjectProperty.
        <urn:p1> a owl:ObjectProperty; rdfs:subPropertyOf <urn:p0>.
        <urn:p2> a owl:ObjectProperty; rdfs:subPropertyOf <urn:p0>.
        <urn:C0> a owl:Class. <urn:C3> a owl:Class.
        <urn:C1> a owl:Class; rdfs:subClassOf <urn:C0>.
        <urn:C2> a owl:Class; rdfs:subClassOf <urn:C1>.
    ";
    let store = parse_turtle(doc, &PrefixMap::standard()).unwrap();
    Taxonomy::from_stores([&store]).unwrap()
}

/// Hand-written closure of the vocabulary above: the properties/classes each
/// name covers.
fn prop_cover(p: &str) -> Vec<&'static str> {
    match p {
        "urn:p0" => vec!["urn:p0", "urn:p1", "urn:p2"],
        "urn:p1" => vec!["urn:p1"],
        "urn:p2" => vec!["urn:p2"],
        _ => vec!["urn:p3"],
    }
}

fn class_cover(c: &str) -> Vec<&'static str> {
    match c {
        "urn:C0" => vec!["urn:C0", "urn:C1", "urn:C2"],
        "urn:C1" => vec!["urn:C1", "urn:C2"],
        "urn:C2" => vec!["urn:C2"],
        _ => vec!["urn:C3"],
    }
}

pub fn random_graph(rng: &mut impl Rng) -> ScenarioGraph {
    let n = rng.gen_range(1..=8);
    let mut g = ScenarioGraph::new();
    let node = |i: usize| NodeRef::iri(format!("urn:n{i}"));
    for i in 0..n {
        g.add_node(node(i));
        for c in CLASSES {
            if rng.gen_bool(0.25) {
                g.add_label(node(i), Iri::new(c));
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let p = PROPS[rng.gen_range(0..PROPS.len())];
        g.add_edge(node(rng.gen_range(0..n)), Iri::new(p), node(rng.gen_range(0..n)));
    }
    g
}

pub fn random_term(rng: &mut impl Rng, depth: usize) -> PropertyTerm {
    let leaf = depth <= 1 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => PropertyTerm::subj(pick_class(rng)),
            1 => PropertyTerm::obj(pick_class(rng)),
            _ => PropertyTerm::atom(PROPS[rng.gen_range(0..PROPS.len())]),
        };
    }
    match rng.gen_range(0..3) {
        0 => PropertyTerm::inv(random_term(rng, depth - 1)),
        1 => PropertyTerm::chain(random_term(rng, depth - 1), random_term(rng, depth - 1)),
        _ => {
            let k = rng.gen_range(2..=3);
            PropertyTerm::and((0..k).map(|_| random_term(rng, depth - 1)).collect::<Vec<_>>())
        }
    }
}

fn pick_class(rng: &mut impl Rng) -> &'static str {
    if rng.gen_bool(0.15) {
        THING
    } else {
        CLASSES[rng.gen_range(0..CLASSES.len())]
    }
}

type Matrix = Vec<Vec<bool>>;

/// Independent evaluator over boolean matrices indexed by node position.
pub fn oracle_eval(g: &ScenarioGraph, term: &PropertyTerm) -> BTreeSet<Pair> {
    let nodes: Vec<NodeRef> = g.nodes().cloned().collect();
    let index: BTreeMap<&NodeRef, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let n = nodes.len();
    let member = |i: usize, c: &Iri| {
        c.as_str() == THING || class_cover(c.as_str()).iter().any(|k| g.labels(&nodes[i]).contains(&Iri::new(k)))
    };
    fn go(
        t: &PropertyTerm,
        n: usize,
        g: &ScenarioGraph,
        index: &BTreeMap<&NodeRef, usize>,
        member: &dyn Fn(usize, &Iri) -> bool,
    ) -> Matrix {
        let mut m = vec![vec![false; n]; n];
        match t {
            PropertyTerm::Atomic(p) => {
                let cover = prop_cover(p.as_str());
                for e in g.edges() {
                    if cover.contains(&e.property.as_str()) {
                        m[index[&e.source]][index[&e.target]] = true;
                    }
                }
            }
            PropertyTerm::Inverse(a) => {
                let a = go(a, n, g, index, member);
                for (i, row) in m.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = a[j][i];
                    }
                }
            }
            PropertyTerm::Chain(a, b) => {
                let (a, b) = (go(a, n, g, index, member), go(b, n, g, index, member));
                for i in 0..n {
                    for j in 0..n {
                        m[i][j] = (0..n).any(|k| a[i][k] && b[k][j]);
                    }
                }
            }
            PropertyTerm::Intersection(v) => {
                m = vec![vec![true; n]; n];
                for t in v {
                    let a = go(t, n, g, index, member);
                    for i in 0..n {
                        for j in 0..n {
                            m[i][j] &= a[i][j];
                        }
                    }
                }
            }
            PropertyTerm::SubjectRestriction(c) => {
                for (i, row) in m.iter_mut().enumerate() {
                    if member(i, c) {
                        row.iter_mut().for_each(|x| *x = true);
                    }
                }
            }
            PropertyTerm::ObjectRestriction(c) => {
                for row in m.iter_mut() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = member(j, c);
                    }
                }
            }
        }
        m
    }
    let m = go(term, n, g, &index, &member);
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] {
                out.insert((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    out
}

/// Random DAG over `n` nodes as (sub, super) index pairs with sub < super.
pub fn random_dag(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.3) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Reflexive-transitive closure by repeated squaring of (R ∪ I).
pub fn closure_by_squaring(n: usize, edges: &[(usize, usize)]) -> Matrix {
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        m[a][b] = true;
    }
    let mut len = 1;
    while len < n {
        let mut next = m.clone();
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).any(|k| m[i][k] && m[k][j]);
            }
        }
        m = next;
        len *= 2;
    }
    m
}

/// Edges (a, b) of the closure not implied through a third node.
pub fn reduction_from_closure(c: &Matrix) -> BTreeSet<(usize, usize)> {
    let n = c.len();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && c[a][b] && !(0..n).any(|k| k != a && k != b && c[a][k] && c[k][b]) {
                out.insert((a, b));
            }
        }
    }
    out
}

pub fn dag_name(i: usize) -> String {
    format!("urn:k{i:02}")
}

/// Subsumption pairs by breadth-first search over raw axioms, used to audit
/// logical verdicts.
pub fn raw_class_closure(store: &TripleStore) -> BTreeSet<(Iri, Iri)> {
    let sub = alignforge::rdf::vocab::subclass_of();
    let eq = alignforge::rdf::vocab::equivalent_class();
    let mut up: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for t in store.iter() {
        let (Some(s), Some(o)) = (t.subject.as_iri(), t.object.as_iri()) else { continue };
        if t.predicate == sub || t.predicate == eq {
            up.entry(s.clone()).or_default().insert(o.clone());
        }
        if t.predicate == eq {
            up.entry(o.clone()).or_default().insert(s.clone());
        }
    }
    let mut out = BTreeSet::new();
    for start in up.keys() {
        let mut stack = vec![start.clone()];
        let mut seen = BTreeSet::from([start.clone()]);
        while let Some(x) = stack.pop() {
            for y in up.get(&x).into_iter().flatten() {
                if seen.insert(y.clone()) {
                    stack.push(y.clone());
                }
            }
        }
        for s in seen {
            out.insert((start.clone(), s));
        }
    }
    out
}
