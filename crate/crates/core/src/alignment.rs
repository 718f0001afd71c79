//! Accepted correspondences split by expressibility, their Turtle and rule
//! serializations, and reading alignments back from Turtle.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::engine::{classify_expressibility, owl_triple, Correspondence, Expressibility, Op, StatementKind};
use crate::error::Result;
use crate::prefix::PrefixMap;
use crate::rdf::Iri;
use crate::rules::{compile, rules_to_text, RewriteRule};
use crate::store::TripleStore;
use crate::taxonomy::Taxonomy;
use crate::term::{CorrespondenceTerm, PropertyTerm};
use crate::turtle::serialize_turtle;

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignmentSet {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub owl: Vec<Correspondence>,
    pub rule_required: Vec<Correspondence>,
    pub rules: Vec<RewriteRule>,
    pub rejected: Vec<(u32, String)>,
}

/// Membership key: normalized terms and operator, equivalences unordered.
pub type StatementKey = (CorrespondenceTerm, CorrespondenceTerm, Op);

pub fn statement_key(sigma: &CorrespondenceTerm, tau: &CorrespondenceTerm, op: Op) -> StatementKey {
    let (s, t) = (sigma.normalized(), tau.normalized());
    match op {
        Op::Supersumed => (t, s, Op::Subsumed),
        Op::Equivalent if t < s => (t, s, op),
        _ => (s, t, op),
    }
}

impl AlignmentSet {
    /// Builds the set from accepted correspondences in acceptance order.
    /// Merged duplicates are skipped.
    pub fn build<'a>(
        accepted: impl IntoIterator<Item = &'a Correspondence>,
        t: &Taxonomy,
        source: Vec<String>,
        target: Vec<String>,
    ) -> Result<Self> {
        let mut out = AlignmentSet { source, target, ..Default::default() };
        let mut seen = BTreeSet::new();
        for c in accepted {
            if c.merged_into.is_some() || !seen.insert(statement_key(&c.sigma, &c.tau, c.op)) {
                continue;
            }
            match classify_expressibility(c, t) {
                Expressibility::Owl(_) => out.owl.push(c.clone()),
                Expressibility::RuleRequired => {
                    let (CorrespondenceTerm::Property(s), CorrespondenceTerm::Property(r)) = (&c.sigma, &c.tau) else {
                        unreachable!("rule-required correspondences relate properties")
                    };
                    let name = format!("corr_{}", c.id);
                    out.rules.push(compile(&name, s, r)?);
                    if c.op == Op::Equivalent {
                        out.rules.push(compile(&format!("{name}_converse"), r, s)?);
                    }
                    out.rule_required.push(c.clone());
                }
                Expressibility::Rejected(reason) => out.rejected.push((c.id, reason)),
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.owl.len() + self.rule_required.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn keys(&self) -> BTreeSet<StatementKey> {
        self.owl.iter().chain(&self.rule_required).map(|c| statement_key(&c.sigma, &c.tau, c.op)).collect()
    }

    pub fn owl_store(&self, t: &Taxonomy) -> TripleStore {
        self.owl.iter().filter_map(|c| owl_triple(c, t)).collect()
    }

    pub fn to_turtle(&self, t: &Taxonomy, prefixes: &PrefixMap) -> String {
        serialize_turtle(&self.owl_store(t), prefixes)
    }

    pub fn rules_text(&self, prefixes: &PrefixMap) -> String {
        rules_to_text(&self.rules, prefixes)
    }
}

/// Statement keys of the alignment axioms in a Turtle store. Triples with
/// other predicates are ignored.
pub fn keys_from_store(store: &TripleStore) -> BTreeSet<StatementKey> {
    let kinds = [
        StatementKind::SubClassOf,
        StatementKind::EquivalentClass,
        StatementKind::SubPropertyOf,
        StatementKind::EquivalentProperty,
    ];
    let mut out = BTreeSet::new();
    for t in store.iter() {
        let Some(kind) = kinds.iter().find(|k| k.predicate() == t.predicate) else { continue };
        let (Some(s), Some(o)) = (t.subject.as_iri(), t.object.as_iri()) else { continue };
        let wrap = |i: &Iri| match kind {
            StatementKind::SubClassOf | StatementKind::EquivalentClass => CorrespondenceTerm::Class(i.clone()),
            _ => CorrespondenceTerm::Property(PropertyTerm::Atomic(i.clone())),
        };
        let op = match kind {
            StatementKind::SubClassOf | StatementKind::SubPropertyOf => Op::Subsumed,
            _ => Op::Equivalent,
        };
        out.insert(statement_key(&wrap(s), &wrap(o), op));
    }
    out
}
