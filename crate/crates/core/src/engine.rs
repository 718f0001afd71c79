//! Correspondence construction: candidate generation from paired scenarios,
//! validity reports, relaxation and strengthening moves, decisions and
//! OWL expressibility.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bundle::{OntologyBundle, Tier};
use crate::error::{Error, Result};
use crate::prefix::PrefixMap;
use crate::rdf::{vocab, Iri, NodeRef, Triple};
use crate::scenario::ScenarioGraph;
use crate::store::TripleStore;
use crate::taxonomy::{Direction, PropertyKind, Taxonomy};
use crate::term::{
    normalize, structural_subsumption, term_equal, CorrespondenceTerm, PropertyTerm, Structural, TermKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Subsumed,
    Supersumed,
    Equivalent,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Subsumed => "⊑",
            Op::Supersumed => "⊒",
            Op::Equivalent => "≡",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Candidate,
    Relaxed,
    Strengthened,
    Accepted,
    Discarded,
}

impl Status {
    pub fn is_final(self) -> bool {
        matches!(self, Status::Accepted | Status::Discarded)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    TauGeneralization,
    SigmaRefinement,
    SigmaGeneralization,
    TauRefinement,
    Identification,
}

impl MoveKind {
    pub const ALL: [MoveKind; 5] = [
        MoveKind::TauGeneralization,
        MoveKind::SigmaRefinement,
        MoveKind::SigmaGeneralization,
        MoveKind::TauRefinement,
        MoveKind::Identification,
    ];

    pub fn phase(self) -> Phase {
        match self {
            MoveKind::TauGeneralization | MoveKind::SigmaRefinement => Phase::Relax,
            _ => Phase::Strengthen,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::TauGeneralization => "tau-generalization",
            MoveKind::SigmaRefinement => "sigma-refinement",
            MoveKind::SigmaGeneralization => "sigma-generalization",
            MoveKind::TauRefinement => "tau-refinement",
            MoveKind::Identification => "identification",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Relax,
    Strengthen,
}

/// One step of a correspondence's evolution. `before`/`after` hold the side
/// that changes; identification keeps τ and changes the operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Move {
    pub kind: MoveKind,
    pub before: CorrespondenceTerm,
    pub after: CorrespondenceTerm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HistoryEntry {
    pub action: Action,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r#move: Option<Move>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Apply,
    Accept,
    Discard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Correspondence {
    pub id: u32,
    pub sigma: CorrespondenceTerm,
    pub tau: CorrespondenceTerm,
    pub op: Op,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub status: Status,
    pub history: Vec<HistoryEntry>,
    pub provenance: String,
    /// Set when accepting an exact duplicate of an earlier accepted entry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merged_into: Option<u32>,
}

impl Correspondence {
    /// New candidate; `⊒` is turned into `⊑` by swapping the terms, property
    /// terms are normalized.
    pub fn new(
        id: u32,
        sigma: CorrespondenceTerm,
        tau: CorrespondenceTerm,
        op: Op,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if sigma.kind() != tau.kind() {
            return Err(Error::KindMismatch(format!("candidate {id} pairs a class with a relation")));
        }
        let (sigma, tau, op) = match op {
            Op::Supersumed => (tau, sigma, Op::Subsumed),
            op => (sigma, tau, op),
        };
        Ok(Correspondence {
            id,
            sigma: sigma.normalized(),
            tau: tau.normalized(),
            op,
            confidence: None,
            status: Status::Candidate,
            history: Vec::new(),
            provenance: provenance.into(),
            merged_into: None,
        })
    }

    pub fn kind(&self) -> TermKind {
        self.sigma.kind()
    }

    /// Same statement up to normalization.
    pub fn same_statement(&self, other: &Correspondence) -> bool {
        self.op == other.op
            && self.sigma.normalized() == other.sigma.normalized()
            && self.tau.normalized() == other.tau.normalized()
    }

    pub fn to_text(&self, prefixes: &PrefixMap) -> String {
        format!("{} {} {}", self.sigma.to_text(prefixes), self.op, self.tau.to_text(prefixes))
    }
}

/// A source/target annotation of the same scenario.
#[derive(Clone, Debug)]
pub struct ScenarioPair {
    pub name: String,
    pub source: ScenarioGraph,
    pub target: ScenarioGraph,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Hint {
    pub sigma: PropertyTerm,
    pub tau: PropertyTerm,
    pub line: usize,
}

/// `σ => τ` per line (`σ <= τ` for the converse); `#` starts a comment.
pub fn parse_hints(doc: &str, prefixes: &PrefixMap) -> Result<Vec<Hint>> {
    let mut out = Vec::new();
    for (i, raw) in doc.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let wrap = |e: Error| Error::Syntax { line: i + 1, column: 1, message: e.to_string() };
        let (a, b, swap) = if let Some((a, b)) = line.split_once("=>") {
            (a, b, false)
        } else if let Some((a, b)) = line.split_once("<=") {
            (a, b, true)
        } else {
            return Err(Error::Syntax { line: i + 1, column: 1, message: "expected `σ => τ`".into() });
        };
        let a = PropertyTerm::parse(a.trim(), prefixes).map_err(wrap)?;
        let b = PropertyTerm::parse(b.trim(), prefixes).map_err(wrap)?;
        let (sigma, tau) = if swap { (b, a) } else { (a, b) };
        out.push(Hint { sigma, tau, line: i + 1 });
    }
    Ok(out)
}

/// Everything a verdict depends on besides the accepted set: the bundle, its
/// taxonomy, which terms belong to which side, and the scenario pairs.
#[derive(Clone, Debug)]
pub struct Context {
    pub bundle: OntologyBundle,
    pub taxonomy: Taxonomy,
    pub pairs: Vec<ScenarioPair>,
    pub prefixes: PrefixMap,
    source_terms: BTreeSet<Iri>,
    target_terms: BTreeSet<Iri>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

impl Context {
    /// Alignment targets are the top-tier ontologies; every other tier is on
    /// the source side.
    pub fn new(bundle: OntologyBundle, pairs: Vec<ScenarioPair>) -> Result<Self> {
        let taxonomy = bundle.taxonomy()?;
        let mut source_terms = BTreeSet::new();
        let mut target_terms = BTreeSet::new();
        for o in &bundle.ontologies {
            let terms = o.declared_terms();
            if o.tier == Tier::Top {
                target_terms.extend(terms);
            } else {
                source_terms.extend(terms);
            }
        }
        let prefixes = bundle.prefixes.clone();
        Ok(Context { bundle, taxonomy, pairs, prefixes, source_terms, target_terms })
    }

    pub fn side_terms(&self, side: Side) -> &BTreeSet<Iri> {
        match side {
            Side::Source => &self.source_terms,
            Side::Target => &self.target_terms,
        }
    }

    pub fn on_side(&self, iri: &Iri, side: Side) -> bool {
        self.side_terms(side).contains(iri)
    }

    /// Taxonomy plus accepted axioms, and accepted composite pairs.
    pub fn knowledge(&self, accepted: &[&Correspondence]) -> Result<Knowledge> {
        let mut store = TripleStore::new();
        let mut known = Vec::new();
        for c in accepted {
            if let Some(t) = owl_triple(c, &self.taxonomy) {
                store.insert(t);
            } else if let (CorrespondenceTerm::Property(s), CorrespondenceTerm::Property(t)) = (&c.sigma, &c.tau) {
                known.push((s.clone(), t.clone()));
                if c.op == Op::Equivalent {
                    known.push((t.clone(), s.clone()));
                }
            }
        }
        let taxonomy = if store.is_empty() { self.taxonomy.clone() } else { self.bundle.taxonomy_with(&store)? };
        Ok(Knowledge { taxonomy, known })
    }

    fn parse_term(&self, text: &str, kind: TermKind) -> Result<CorrespondenceTerm> {
        CorrespondenceTerm::parse(text.trim(), kind, &self.prefixes)
    }
}

pub struct Knowledge {
    pub taxonomy: Taxonomy,
    pub known: Vec<(PropertyTerm, PropertyTerm)>,
}

impl Knowledge {
    fn entails(&self, sub: &CorrespondenceTerm, sup: &CorrespondenceTerm) -> bool {
        match (sub, sup) {
            (CorrespondenceTerm::Class(a), CorrespondenceTerm::Class(b)) => self.taxonomy.subsumes(b, a),
            (CorrespondenceTerm::Property(a), CorrespondenceTerm::Property(b)) => {
                structural_subsumption(&self.taxonomy, &self.known, a, b) == Structural::Yes
            }
            _ => false,
        }
    }

    fn entails_statement(&self, sigma: &CorrespondenceTerm, tau: &CorrespondenceTerm, op: Op) -> bool {
        match op {
            Op::Subsumed => self.entails(sigma, tau),
            Op::Supersumed => self.entails(tau, sigma),
            Op::Equivalent => self.entails(sigma, tau) && self.entails(tau, sigma),
        }
    }
}

/// Class and property candidates from every scenario pair, in source
/// document order, then hint order. Returns warnings for pairs without
/// shared individuals.
pub fn generate_candidates(ctx: &Context, hints: &[Hint]) -> (Vec<Correspondence>, Vec<String>) {
    let mut out: Vec<Correspondence> = Vec::new();
    let mut warnings = Vec::new();
    let push =
        |sigma: CorrespondenceTerm, tau: CorrespondenceTerm, provenance: String, out: &mut Vec<Correspondence>| {
            let c = Correspondence::new(out.len() as u32 + 1, sigma, tau, Op::Subsumed, provenance).expect("same kind");
            if !out.iter().any(|o| o.same_statement(&c)) {
                out.push(c);
            }
        };
    for pair in &ctx.pairs {
        let shared = pair.source.nodes().filter(|n| pair.target.contains(n)).count();
        if shared == 0 {
            warnings.push(format!("scenario pair {} has no shared individuals", pair.name));
            continue;
        }
        for n in pair.source.nodes() {
            if !pair.target.contains(n) {
                continue;
            }
            let mut taus: Vec<Iri> = pair.target.labels(n).into_iter().collect();
            taus.sort_by(|a, b| a.local_name().cmp(b.local_name()).then(a.cmp(b)));
            for sigma in source_labels_in_order(&pair.source, n) {
                for tau in &taus {
                    let provenance = format!("scenario {}: {}", pair.name, node_text(n, &ctx.prefixes));
                    push(
                        CorrespondenceTerm::Class(sigma.clone()),
                        CorrespondenceTerm::Class(tau.clone()),
                        provenance,
                        &mut out,
                    );
                }
            }
        }
    }
    for h in hints {
        let witnessed = ctx.pairs.iter().any(|p| {
            let s = p.source.eval(&h.sigma, &ctx.taxonomy);
            let t = p.target.eval(&h.tau, &ctx.taxonomy);
            s.iter().any(|pair| t.contains(pair))
        });
        if witnessed {
            push(
                CorrespondenceTerm::Property(h.sigma.clone()),
                CorrespondenceTerm::Property(h.tau.clone()),
                format!("hint line {}", h.line),
                &mut out,
            );
        } else {
            warnings.push(format!("hint on line {} has no witnessing edge", h.line));
        }
    }
    (out, warnings)
}

fn source_labels_in_order(g: &ScenarioGraph, n: &NodeRef) -> Vec<Iri> {
    let ty = vocab::rdf_type();
    let mut order: Vec<Iri> = g
        .to_triples()
        .iter()
        .filter(|t| &t.subject == n && t.predicate == ty)
        .filter_map(|t| t.object.as_iri().cloned())
        .collect();
    order.dedup();
    order
}

pub fn node_text(n: &NodeRef, prefixes: &PrefixMap) -> String {
    match n {
        NodeRef::Iri(i) => prefixes.display(i),
        NodeRef::Blank(b) => format!("_:{b}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Logical {
    Derivable,
    NotDerivable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Counterexample {
    pub scenario: String,
    pub subject: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "verdict")]
pub enum Extensional {
    /// `vacuous` when no scenario pair exercised the source term.
    Consistent {
        vacuous: bool,
        checked: usize,
    },
    Counterexample {
        items: Vec<Counterexample>,
    },
}

impl Extensional {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Extensional::Consistent { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidityReport {
    pub logical: Logical,
    pub extensional: Extensional,
    pub structural: Structural,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trivial: Option<String>,
}

impl ValidityReport {
    pub fn is_trivial(&self) -> bool {
        self.trivial.is_some()
    }
}

/// Containment of σ's extension (source annotation) in τ's (target
/// annotation) across all scenario pairs.
pub fn extensional(ctx: &Context, sub: &CorrespondenceTerm, sup: &CorrespondenceTerm, sub_side: Side) -> Extensional {
    let t = &ctx.taxonomy;
    let mut items = Vec::new();
    let mut checked = 0;
    for pair in &ctx.pairs {
        let (gs, gt) = match sub_side {
            Side::Source => (&pair.source, &pair.target),
            Side::Target => (&pair.target, &pair.source),
        };
        match (sub, sup) {
            (CorrespondenceTerm::Class(a), CorrespondenceTerm::Class(b)) => {
                for n in gs.instances(a, t) {
                    checked += 1;
                    if !(gt.contains(&n) && gt.has_class(&n, b, t)) {
                        items.push(Counterexample {
                            scenario: pair.name.clone(),
                            subject: node_text(&n, &ctx.prefixes),
                            object: None,
                        });
                    }
                }
            }
            (CorrespondenceTerm::Property(a), CorrespondenceTerm::Property(b)) => {
                let inner = gt.eval(b, t);
                for (x, y) in gs.eval(a, t) {
                    checked += 1;
                    if !inner.contains(&(x.clone(), y.clone())) {
                        items.push(Counterexample {
                            scenario: pair.name.clone(),
                            subject: node_text(&x, &ctx.prefixes),
                            object: Some(node_text(&y, &ctx.prefixes)),
                        });
                    }
                }
            }
            _ => {}
        }
    }
    if items.is_empty() {
        Extensional::Consistent { vacuous: checked == 0, checked }
    } else {
        Extensional::Counterexample { items }
    }
}

fn is_top_term(t: &Taxonomy, term: &CorrespondenceTerm) -> bool {
    match term {
        CorrespondenceTerm::Class(c) => t.classes.is_top(c),
        CorrespondenceTerm::Property(p) => match normalize(p) {
            PropertyTerm::Atomic(q) => q == vocab::top_object_property() || q == vocab::top_data_property(),
            PropertyTerm::SubjectRestriction(c) | PropertyTerm::ObjectRestriction(c) => t.classes.is_top(&c),
            _ => false,
        },
    }
}

/// No instances in any source annotation and nothing below it.
fn is_vacuous(ctx: &Context, term: &CorrespondenceTerm) -> bool {
    if ctx.pairs.is_empty() {
        return false;
    }
    let t = &ctx.taxonomy;
    match term {
        CorrespondenceTerm::Class(c) => {
            !t.classes.has_strict_descendants(c) && ctx.pairs.iter().all(|p| p.source.instances(c, t).is_empty())
        }
        CorrespondenceTerm::Property(p) => {
            let below = p.as_atomic().is_some_and(|q| t.property_lattice(q).has_strict_descendants(q));
            !below && ctx.pairs.iter().all(|pair| pair.source.eval(p, t).is_empty())
        }
    }
}

/// Validity of `c` given the other accepted correspondences.
pub fn check_validity(ctx: &Context, accepted: &[&Correspondence], c: &Correspondence) -> Result<ValidityReport> {
    let others: Vec<&Correspondence> = accepted.iter().copied().filter(|a| a.id != c.id).collect();
    let k = ctx.knowledge(&others)?;
    let base = Knowledge { taxonomy: ctx.taxonomy.clone(), known: Vec::new() };
    Ok(report(ctx, &k, &base, &others, &c.sigma, &c.tau, c.op))
}

fn report(
    ctx: &Context,
    k: &Knowledge,
    base: &Knowledge,
    others: &[&Correspondence],
    sigma: &CorrespondenceTerm,
    tau: &CorrespondenceTerm,
    op: Op,
) -> ValidityReport {
    let logical = if k.entails_statement(sigma, tau, op) { Logical::Derivable } else { Logical::NotDerivable };
    let structural = if base.entails_statement(sigma, tau, op) { Structural::Yes } else { Structural::Unknown };
    let mut ext = extensional(ctx, sigma, tau, Side::Source);
    if op == Op::Equivalent && ext.is_consistent() {
        let back = extensional(ctx, tau, sigma, Side::Target);
        if !back.is_consistent() {
            ext = back;
        }
    }
    let candidate = Correspondence {
        id: 0,
        sigma: sigma.clone(),
        tau: tau.clone(),
        op,
        confidence: None,
        status: Status::Candidate,
        history: Vec::new(),
        provenance: String::new(),
        merged_into: None,
    };
    let duplicate = others.iter().any(|a| a.same_statement(&candidate));
    let trivial = if is_top_term(&ctx.taxonomy, tau) {
        Some("target term is top".to_string())
    } else if is_vacuous(ctx, sigma) {
        Some("source term has no instances and no subterms".to_string())
    } else if !duplicate && logical == Logical::Derivable && structural == Structural::Unknown {
        Some("already derivable from the accepted alignment".to_string())
    } else {
        None
    };
    ValidityReport { logical, extensional: ext, structural, trivial }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Proposal {
    pub r#move: Move,
    pub op: Op,
    pub text: String,
    pub validity: ValidityReport,
}

fn class_neighbors(ctx: &Context, c: &Iri, dir: Direction, side: Side) -> Vec<Iri> {
    let l = &ctx.taxonomy.classes;
    let mut out = Vec::new();
    for n in l.neighbors(c, dir) {
        if l.is_top(&n) {
            out.push(n);
            continue;
        }
        out.extend(l.partition_members(&n).into_iter().filter(|m| ctx.on_side(m, side)));
    }
    out
}

fn property_neighbors(ctx: &Context, p: &Iri, dir: Direction, side: Side) -> Vec<Iri> {
    let l = ctx.taxonomy.property_lattice(p);
    let mut out = Vec::new();
    for n in l.neighbors(p, dir) {
        if l.is_top(&n) {
            if dir == Direction::Up {
                out.push(n);
            }
            continue;
        }
        out.extend(l.partition_members(&n).into_iter().filter(|m| ctx.on_side(m, side)));
    }
    out
}

/// Classes on `side`, other than top, inferred for any endpoint `pick`s.
fn endpoint_classes(
    ctx: &Context,
    g: &ScenarioGraph,
    nodes: impl IntoIterator<Item = NodeRef>,
    side: Side,
) -> BTreeSet<Iri> {
    nodes
        .into_iter()
        .flat_map(|n| g.inferred_labels(&n, &ctx.taxonomy))
        .filter(|c| ctx.on_side(c, side) && !ctx.taxonomy.classes.is_top(c))
        .collect()
}

fn side_graph(pair: &ScenarioPair, side: Side) -> &ScenarioGraph {
    match side {
        Side::Source => &pair.source,
        Side::Target => &pair.target,
    }
}

/// Every term obtained by replacing one subterm `s` of `term` with an element
/// of `f(s)`. All term constructors are monotone, so a more general (or more
/// specific) replacement yields a more general (or more specific) term.
fn rewrites(term: &PropertyTerm, f: &mut dyn FnMut(&PropertyTerm) -> Vec<PropertyTerm>) -> Vec<PropertyTerm> {
    let mut out = f(term);
    match term {
        PropertyTerm::Inverse(a) => out.extend(rewrites(a, f).into_iter().map(PropertyTerm::inv)),
        PropertyTerm::Chain(a, b) => {
            out.extend(rewrites(a, f).into_iter().map(|r| PropertyTerm::chain(r, (**b).clone())));
            out.extend(rewrites(b, f).into_iter().map(|r| PropertyTerm::chain((**a).clone(), r)));
        }
        PropertyTerm::Intersection(v) => {
            for (i, m) in v.iter().enumerate() {
                for r in rewrites(m, f) {
                    let mut w = v.clone();
                    w[i] = r;
                    out.push(PropertyTerm::and(w));
                }
            }
        }
        _ => {}
    }
    out
}

fn generalize_property(ctx: &Context, term: &PropertyTerm, side: Side) -> Vec<PropertyTerm> {
    rewrites(term, &mut |s| match s {
        PropertyTerm::Atomic(p) => {
            property_neighbors(ctx, p, Direction::Up, side).into_iter().map(PropertyTerm::Atomic).collect()
        }
        PropertyTerm::SubjectRestriction(c) => class_neighbors(ctx, c, Direction::Up, side)
            .into_iter()
            .filter(|n| !ctx.taxonomy.classes.is_top(n))
            .map(PropertyTerm::SubjectRestriction)
            .collect(),
        PropertyTerm::ObjectRestriction(c) => class_neighbors(ctx, c, Direction::Up, side)
            .into_iter()
            .filter(|n| !ctx.taxonomy.classes.is_top(n))
            .map(PropertyTerm::ObjectRestriction)
            .collect(),
        PropertyTerm::Intersection(v) if v.len() > 1 => (0..v.len())
            .map(|i| PropertyTerm::and(v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t.clone())))
            .collect(),
        _ => Vec::new(),
    })
}

fn refine_property(ctx: &Context, term: &PropertyTerm, side: Side) -> Vec<PropertyTerm> {
    let t = &ctx.taxonomy;
    let mut out = rewrites(term, &mut |s| match s {
        PropertyTerm::Atomic(p) => {
            let mut v: Vec<PropertyTerm> =
                property_neighbors(ctx, p, Direction::Down, side).into_iter().map(PropertyTerm::Atomic).collect();
            for pair in &ctx.pairs {
                let g = side_graph(pair, side);
                let pairs = g.eval(s, t);
                for c in endpoint_classes(ctx, g, pairs.iter().map(|(x, _)| x.clone()), side) {
                    v.push(PropertyTerm::and([s.clone(), PropertyTerm::SubjectRestriction(c)]));
                }
                for d in endpoint_classes(ctx, g, pairs.iter().map(|(_, y)| y.clone()), side) {
                    v.push(PropertyTerm::and([s.clone(), PropertyTerm::ObjectRestriction(d)]));
                }
            }
            v
        }
        PropertyTerm::SubjectRestriction(c) => {
            class_neighbors(ctx, c, Direction::Down, side).into_iter().map(PropertyTerm::SubjectRestriction).collect()
        }
        PropertyTerm::ObjectRestriction(c) => {
            class_neighbors(ctx, c, Direction::Down, side).into_iter().map(PropertyTerm::ObjectRestriction).collect()
        }
        _ => Vec::new(),
    });
    if side == Side::Source {
        for pair in &ctx.pairs {
            let g = side_graph(pair, side);
            for (x, y) in g.eval(term, t) {
                let cs = endpoint_classes(ctx, g, [x], side);
                let ds = endpoint_classes(ctx, g, [y], side);
                for c in &cs {
                    for d in &ds {
                        out.push(PropertyTerm::and([
                            term.clone(),
                            PropertyTerm::SubjectRestriction(c.clone()),
                            PropertyTerm::ObjectRestriction(d.clone()),
                        ]));
                    }
                }
            }
        }
    }
    out
}

/// Candidate replacement terms for a move kind, before legality filtering.
fn move_targets(ctx: &Context, c: &Correspondence, kind: MoveKind) -> Vec<CorrespondenceTerm> {
    let (term, dir, side) = match kind {
        MoveKind::TauGeneralization => (&c.tau, Direction::Up, Side::Target),
        MoveKind::SigmaRefinement => (&c.sigma, Direction::Down, Side::Source),
        MoveKind::SigmaGeneralization => (&c.sigma, Direction::Up, Side::Source),
        MoveKind::TauRefinement => (&c.tau, Direction::Down, Side::Target),
        MoveKind::Identification => return Vec::new(),
    };
    match term {
        CorrespondenceTerm::Class(x) => {
            class_neighbors(ctx, x, dir, side).into_iter().map(CorrespondenceTerm::Class).collect()
        }
        CorrespondenceTerm::Property(p) => {
            let terms = match dir {
                Direction::Up => generalize_property(ctx, p, side),
                Direction::Down => refine_property(ctx, p, side),
            };
            let mut seen = BTreeSet::new();
            terms
                .into_iter()
                .map(|t| normalize(&t))
                .filter(|t| seen.insert(t.clone()))
                .map(CorrespondenceTerm::Property)
                .collect()
        }
    }
}

/// Direction check for a replacement: generalizations must lie strictly
/// above, refinements strictly below the term they replace.
fn legal_direction(ctx: &Context, kind: MoveKind, before: &CorrespondenceTerm, after: &CorrespondenceTerm) -> bool {
    let base = Knowledge { taxonomy: ctx.taxonomy.clone(), known: Vec::new() };
    let (sub, sup) = match kind {
        MoveKind::TauGeneralization | MoveKind::SigmaGeneralization => (before, after),
        MoveKind::SigmaRefinement | MoveKind::TauRefinement => (after, before),
        MoveKind::Identification => return true,
    };
    let strict = match (before, after) {
        (CorrespondenceTerm::Class(a), CorrespondenceTerm::Class(b)) => !ctx.taxonomy.classes.equivalent(a, b),
        (CorrespondenceTerm::Property(a), CorrespondenceTerm::Property(b)) => !term_equal(a, b),
        _ => false,
    };
    strict && base.entails(sub, sup)
}

fn moved(c: &Correspondence, m: &Move) -> (CorrespondenceTerm, CorrespondenceTerm, Op) {
    match m.kind {
        MoveKind::TauGeneralization | MoveKind::TauRefinement => (c.sigma.clone(), m.after.clone(), c.op),
        MoveKind::SigmaRefinement | MoveKind::SigmaGeneralization => (m.after.clone(), c.tau.clone(), c.op),
        MoveKind::Identification => (c.sigma.clone(), c.tau.clone(), Op::Equivalent),
    }
}

fn phase_allowed(status: Status, phase: Phase) -> bool {
    match phase {
        Phase::Relax => matches!(status, Status::Candidate | Status::Relaxed),
        Phase::Strengthen => matches!(status, Status::Candidate | Status::Relaxed | Status::Strengthened),
    }
}

/// Moves for one phase, each annotated with the validity it would have.
/// Trivial outcomes are kept and flagged.
pub fn propose_moves(
    ctx: &Context,
    accepted: &[&Correspondence],
    c: &Correspondence,
    phase: Phase,
) -> Result<Vec<Proposal>> {
    if c.status.is_final() || !phase_allowed(c.status, phase) {
        return Ok(Vec::new());
    }
    let others: Vec<&Correspondence> = accepted.iter().copied().filter(|a| a.id != c.id).collect();
    let k = ctx.knowledge(&others)?;
    let base = Knowledge { taxonomy: ctx.taxonomy.clone(), known: Vec::new() };
    let mut out = Vec::new();
    for kind in MoveKind::ALL.into_iter().filter(|k| k.phase() == phase) {
        let mut moves = Vec::new();
        if kind == MoveKind::Identification {
            if c.op == Op::Subsumed
                && extensional(ctx, &c.sigma, &c.tau, Side::Source).is_consistent()
                && extensional(ctx, &c.tau, &c.sigma, Side::Target).is_consistent()
            {
                moves.push(Move { kind, before: c.tau.clone(), after: c.tau.clone() });
            }
        } else {
            let before = match kind {
                MoveKind::TauGeneralization | MoveKind::TauRefinement => &c.tau,
                _ => &c.sigma,
            };
            for after in move_targets(ctx, c, kind) {
                if legal_direction(ctx, kind, before, &after) {
                    moves.push(Move { kind, before: before.clone(), after });
                }
            }
        }
        for m in moves {
            let (sigma, tau, op) = moved(c, &m);
            let validity = report(ctx, &k, &base, &others, &sigma, &tau, op);
            let text = format!("{} {} {}", sigma.to_text(&ctx.prefixes), op, tau.to_text(&ctx.prefixes));
            out.push(Proposal { r#move: m, op, text, validity });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "action")]
pub enum Decision {
    Accept,
    Discard { reason: Option<String> },
    Apply { kind: MoveKind, term: Option<String> },
}

/// Applies a decision and returns the updated correspondence.
pub fn apply_decision(
    ctx: &Context,
    accepted: &[&Correspondence],
    c: &Correspondence,
    d: &Decision,
) -> Result<Correspondence> {
    if c.status.is_final() {
        return Err(Error::IllegalTransition(format!("candidate {} is already {:?}", c.id, c.status).to_lowercase()));
    }
    let mut next = c.clone();
    match d {
        Decision::Discard { reason } => {
            next.status = Status::Discarded;
            next.history.push(HistoryEntry { action: Action::Discard, r#move: None, reason: reason.clone() });
        }
        Decision::Accept => {
            let v = check_validity(ctx, accepted, c)?;
            if let Some(reason) = v.trivial {
                return Err(Error::TrivialAccept(format!("candidate {}: {reason}", c.id)));
            }
            next.merged_into = accepted.iter().filter(|a| a.id != c.id).find(|a| a.same_statement(c)).map(|a| a.id);
            next.status = Status::Accepted;
            next.history.push(HistoryEntry { action: Action::Accept, r#move: None, reason: None });
        }
        Decision::Apply { kind, term } => {
            if !phase_allowed(c.status, kind.phase()) {
                return Err(Error::IllegalTransition(
                    format!("{} is not allowed after status {:?}", kind.name(), c.status).to_lowercase(),
                ));
            }
            let m = if *kind == MoveKind::Identification {
                if c.op != Op::Subsumed {
                    return Err(Error::IllegalMove(format!("candidate {} is already an equivalence", c.id)));
                }
                if !extensional(ctx, &c.tau, &c.sigma, Side::Target).is_consistent() {
                    return Err(Error::IllegalMove(format!("the converse of candidate {} has counterexamples", c.id)));
                }
                Move { kind: *kind, before: c.tau.clone(), after: c.tau.clone() }
            } else {
                let text =
                    term.as_deref().ok_or_else(|| Error::IllegalMove(format!("{} needs a term", kind.name())))?;
                let after = ctx.parse_term(text, c.kind())?.normalized();
                let before = match kind {
                    MoveKind::TauGeneralization | MoveKind::TauRefinement => c.tau.clone(),
                    _ => c.sigma.clone(),
                };
                if !legal_direction(ctx, *kind, &before, &after) {
                    return Err(Error::IllegalMove(format!(
                        "{} does not lie {} {}",
                        after.to_text(&ctx.prefixes),
                        if matches!(kind, MoveKind::TauGeneralization | MoveKind::SigmaGeneralization) {
                            "strictly above"
                        } else {
                            "strictly below"
                        },
                        before.to_text(&ctx.prefixes)
                    )));
                }
                Move { kind: *kind, before, after }
            };
            let (sigma, tau, op) = moved(c, &m);
            next.sigma = sigma;
            next.tau = tau;
            next.op = op;
            next.status = match kind.phase() {
                Phase::Relax => Status::Relaxed,
                Phase::Strengthen => Status::Strengthened,
            };
            next.history.push(HistoryEntry { action: Action::Apply, r#move: Some(m), reason: None });
        }
    }
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StatementKind {
    SubClassOf,
    EquivalentClass,
    SubPropertyOf,
    EquivalentProperty,
}

impl StatementKind {
    pub fn predicate(self) -> Iri {
        match self {
            StatementKind::SubClassOf => vocab::subclass_of(),
            StatementKind::EquivalentClass => vocab::equivalent_class(),
            StatementKind::SubPropertyOf => vocab::subproperty_of(),
            StatementKind::EquivalentProperty => vocab::equivalent_property(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "class", content = "detail")]
pub enum Expressibility {
    Owl(StatementKind),
    RuleRequired,
    Rejected(String),
}

fn kinds_in(t: &Taxonomy, p: &PropertyTerm) -> BTreeSet<PropertyKind> {
    p.properties().into_iter().map(|q| t.property_kind(q).unwrap_or(PropertyKind::Object)).collect()
}

pub fn classify_expressibility(c: &Correspondence, t: &Taxonomy) -> Expressibility {
    let equivalent = c.op == Op::Equivalent;
    match (&c.sigma, &c.tau) {
        (CorrespondenceTerm::Class(_), CorrespondenceTerm::Class(_)) => {
            Expressibility::Owl(if equivalent { StatementKind::EquivalentClass } else { StatementKind::SubClassOf })
        }
        (CorrespondenceTerm::Property(s), CorrespondenceTerm::Property(r)) => {
            let (ks, kr) = (kinds_in(t, s), kinds_in(t, r));
            let datatype = ks.contains(&PropertyKind::Datatype) || kr.contains(&PropertyKind::Datatype);
            if datatype && (ks != kr || !s.is_atomic() || !r.is_atomic()) {
                return Expressibility::Rejected(
                    "datatype properties cannot be matched with object properties or relation terms".into(),
                );
            }
            if s.is_atomic() && r.is_atomic() {
                Expressibility::Owl(if equivalent {
                    StatementKind::EquivalentProperty
                } else {
                    StatementKind::SubPropertyOf
                })
            } else {
                Expressibility::RuleRequired
            }
        }
        _ => Expressibility::Rejected("class term paired with a relation term".into()),
    }
}

/// The OWL triple for an expressible correspondence.
pub fn owl_triple(c: &Correspondence, t: &Taxonomy) -> Option<Triple> {
    let Expressibility::Owl(kind) = classify_expressibility(c, t) else { return None };
    let iri = |x: &CorrespondenceTerm| match x {
        CorrespondenceTerm::Class(i) => i.clone(),
        CorrespondenceTerm::Property(p) => p.as_atomic().expect("atomic").clone(),
    };
    Some(Triple::new(NodeRef::Iri(iri(&c.sigma)), kind.predicate(), NodeRef::Iri(iri(&c.tau))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::Ontology;
    use crate::turtle::parse_turtle;

    fn pm() -> PrefixMap {
        let mut m = PrefixMap::standard();
        m.insert("s", "http://example.org/s#");
        m.insert("t", "http://example.org/t#");
        m.insert("ex", "http://example.org/");
        m
    }

    fn ctx(source_onto: &str, target_onto: &str, source: &str, target: &str) -> Context {
        let m = pm();
        let mut b = OntologyBundle::new();
        b.prefixes = m.clone();
        b.insert(Ontology { name: "s".into(), tier: Tier::Marketplace, store: parse_turtle(source_onto, &m).unwrap() });
        b.insert(Ontology { name: "t".into(), tier: Tier::Top, store: parse_turtle(target_onto, &m).unwrap() });
        let pair = ScenarioPair {
            name: "p".into(),
            source: ScenarioGraph::from_triples(&parse_turtle(source, &m).unwrap()),
            target: ScenarioGraph::from_triples(&parse_turtle(target, &m).unwrap()),
        };
        Context::new(b, vec![pair]).unwrap()
    }

    fn small() -> Context {
        ctx(
            "s:A a owl:Class; rdfs:subClassOf s:B. s:B a owl:Class. s:p a owl:ObjectProperty.",
            "t:X a owl:Class; rdfs:subClassOf t:Y. t:Y a owl:Class. t:q a owl:ObjectProperty; rdfs:subPropertyOf t:r. t:r a owl:ObjectProperty.",
            "ex:i a s:A; s:p ex:j.",
            "ex:i a t:X; t:q ex:j.",
        )
    }

    fn class(c: &Context, s: &str) -> CorrespondenceTerm {
        CorrespondenceTerm::Class(c.prefixes.expand_curie(s).unwrap())
    }

    #[test]
    fn identical_annotation_gives_one_candidate() {
        let c = ctx("ex:C a owl:Class.", "", "ex:i a ex:C.", "ex:i a ex:C.");
        let (cands, warnings) = generate_candidates(&c, &[]);
        assert_eq!(cands.len(), 1);
        assert!(warnings.is_empty());
        assert_eq!(cands[0].sigma, cands[0].tau);
    }

    #[test]
    fn disjoint_individuals_warn() {
        let c = ctx("", "", "ex:i a ex:C.", "ex:k a ex:D.");
        let (cands, warnings) = generate_candidates(&c, &[]);
        assert!(cands.is_empty());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn supersumed_is_canonicalized() {
        let c = small();
        let k = Correspondence::new(1, class(&c, "s:A"), class(&c, "t:X"), Op::Supersumed, "").unwrap();
        assert_eq!(k.sigma, class(&c, "t:X"));
        assert_eq!(k.op, Op::Subsumed);
        let mixed = Correspondence::new(
            2,
            class(&c, "s:A"),
            CorrespondenceTerm::Property(PropertyTerm::atom("http://example.org/s#p")),
            Op::Subsumed,
            "",
        );
        assert!(matches!(mixed, Err(Error::KindMismatch(_))));
    }

    #[test]
    fn top_target_is_trivial_and_cannot_be_accepted() {
        let c = small();
        let k = Correspondence::new(1, class(&c, "s:A"), class(&c, "owl:Thing"), Op::Subsumed, "").unwrap();
        let v = check_validity(&c, &[], &k).unwrap();
        assert!(v.is_trivial());
        assert!(matches!(apply_decision(&c, &[], &k, &Decision::Accept), Err(Error::TrivialAccept(_))));
    }

    #[test]
    fn counterexamples_name_individuals() {
        let c = ctx("", "", "ex:i a ex:C. ex:k a ex:C.", "ex:i a ex:D. ex:k a ex:E.");
        let k = Correspondence::new(1, class(&c, "ex:C"), class(&c, "ex:D"), Op::Subsumed, "").unwrap();
        let v = check_validity(&c, &[], &k).unwrap();
        let Extensional::Counterexample { items } = v.extensional else { panic!("expected counterexample") };
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].subject, "ex:k");
    }

    #[test]
    fn relax_and_strengthen_moves_respect_direction() {
        let c = small();
        let k = Correspondence::new(1, class(&c, "s:A"), class(&c, "t:X"), Op::Subsumed, "").unwrap();
        let relax = propose_moves(&c, &[], &k, Phase::Relax).unwrap();
        assert!(relax
            .iter()
            .any(|p| p.r#move.kind == MoveKind::TauGeneralization && p.r#move.after == class(&c, "t:Y")));
        let strengthen = propose_moves(&c, &[], &k, Phase::Strengthen).unwrap();
        assert!(strengthen
            .iter()
            .any(|p| p.r#move.kind == MoveKind::SigmaGeneralization && p.r#move.after == class(&c, "s:B")));
        assert!(strengthen.iter().any(|p| p.r#move.kind == MoveKind::Identification));
        for p in relax.iter().chain(&strengthen) {
            assert!(legal_direction(&c, p.r#move.kind, &p.r#move.before, &p.r#move.after));
        }
    }

    #[test]
    fn property_moves() {
        let c = small();
        let p = |s: &str| CorrespondenceTerm::Property(PropertyTerm::parse(s, &c.prefixes).unwrap());
        let k = Correspondence::new(1, p("s:p"), p("t:q"), Op::Subsumed, "").unwrap();
        let relax = propose_moves(&c, &[], &k, Phase::Relax).unwrap();
        assert!(relax.iter().any(|m| m.r#move.after == p("t:r")));
        assert!(!relax.iter().any(|m| m.r#move.after == p("and(s:p, subj(owl:Thing))")));
        assert!(relax.iter().any(|m| m.r#move.after == p("and(s:p, subj(s:A))")));
    }

    #[test]
    fn transitions() {
        let c = small();
        let k = Correspondence::new(1, class(&c, "s:A"), class(&c, "t:X"), Op::Subsumed, "").unwrap();
        let g = apply_decision(
            &c,
            &[],
            &k,
            &Decision::Apply { kind: MoveKind::SigmaGeneralization, term: Some("s:B".into()) },
        )
        .unwrap();
        assert_eq!(g.status, Status::Strengthened);
        let relax = Decision::Apply { kind: MoveKind::TauGeneralization, term: Some("t:Y".into()) };
        assert!(matches!(apply_decision(&c, &[], &g, &relax), Err(Error::IllegalTransition(_))));
        let wrong = Decision::Apply { kind: MoveKind::SigmaGeneralization, term: Some("s:A".into()) };
        assert!(matches!(apply_decision(&c, &[], &g, &wrong), Err(Error::IllegalMove(_))));
        let d = apply_decision(&c, &[], &g, &Decision::Discard { reason: Some("no".into()) }).unwrap();
        assert_eq!(d.status, Status::Discarded);
        assert!(matches!(apply_decision(&c, &[], &d, &Decision::Accept), Err(Error::IllegalTransition(_))));
    }

    #[test]
    fn expressibility() {
        let c = ctx("s:d a owl:DatatypeProperty. s:p a owl:ObjectProperty.", "t:q a owl:ObjectProperty.", "", "");
        let p = |s: &str| CorrespondenceTerm::Property(PropertyTerm::parse(s, &c.prefixes).unwrap());
        let mk = |a, b| Correspondence::new(1, a, b, Op::Subsumed, "").unwrap();
        assert_eq!(
            classify_expressibility(&mk(p("s:p"), p("t:q")), &c.taxonomy),
            Expressibility::Owl(StatementKind::SubPropertyOf)
        );
        assert_eq!(classify_expressibility(&mk(p("s:p"), p("inv(t:q)")), &c.taxonomy), Expressibility::RuleRequired);
        assert!(matches!(classify_expressibility(&mk(p("s:d"), p("t:q")), &c.taxonomy), Expressibility::Rejected(_)));
    }

    #[test]
    fn hints_parse() {
        let m = pm();
        let hints = parse_hints("# c\ns:p => chain(t:q, t:r)\n\nt:q <= s:p\n", &m).unwrap();
        assert_eq!(hints.len(), 2);
        assert_eq!(hints[1].sigma, PropertyTerm::parse("s:p", &m).unwrap());
        assert!(parse_hints("s:p t:q", &m).is_err());
    }
}
