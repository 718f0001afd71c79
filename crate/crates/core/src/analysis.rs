//! Alignment quality metrics and conformance of lower-tier classes with the
//! fundamental categories.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::alignment::{AlignmentSet, StatementKey};
use crate::bundle::{OntologyBundle, Tier};
use crate::rdf::{vocab, Iri};
use crate::taxonomy::Taxonomy;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    /// `None` when the alignment is empty.
    pub precision: Option<f64>,
    /// `None` when the reference is empty.
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
    pub intersection: usize,
    pub alignment_size: usize,
    pub reference_size: usize,
}

pub fn score_keys<K: Ord>(a: &BTreeSet<K>, r: &BTreeSet<K>) -> MetricsReport {
    let inter = a.intersection(r).count();
    let ratio = |n: usize, d: usize| (d > 0).then(|| n as f64 / d as f64);
    let precision = ratio(inter, a.len());
    let recall = ratio(inter, r.len());
    // 2PR/(P+R) reduces to 2|R∩A|/(|A|+|R|), which avoids compounding rounding.
    let f_measure = match (precision, recall) {
        (Some(_), Some(_)) if inter == 0 => Some(0.0),
        (Some(_), Some(_)) => Some(2.0 * inter as f64 / (a.len() + r.len()) as f64),
        _ => None,
    };
    MetricsReport {
        precision,
        recall,
        f_measure,
        intersection: inter,
        alignment_size: a.len(),
        reference_size: r.len(),
    }
}

/// Scores alignment `a` against reference `r`.
pub fn score(a: &AlignmentSet, r: &AlignmentSet) -> MetricsReport {
    score_keys::<StatementKey>(&a.keys(), &r.keys())
}

impl MetricsReport {
    pub fn to_text(&self) -> String {
        let show = |v: Option<f64>| v.map_or("undefined".to_string(), |x| x.to_string());
        format!(
            "precision = {}\nrecall = {}\nfMeasure = {}\nintersection = {}\nalignmentSize = {}\nreferenceSize = {}\n",
            show(self.precision),
            show(self.recall),
            show(self.f_measure),
            self.intersection,
            self.alignment_size,
            self.reference_size
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "verdict")]
pub enum TierVerdict {
    Category { categories: Vec<Iri> },
    Annotation,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TierEntry {
    pub class: Iri,
    pub ontology: String,
    #[serde(flatten)]
    pub verdict: TierVerdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TierReport {
    pub entries: Vec<TierEntry>,
    pub violations: Vec<Iri>,
}

/// Classes typed with the given category marker (matched by local name).
fn typed_as(bundle: &OntologyBundle, marker: &str) -> BTreeSet<Iri> {
    let ty = vocab::rdf_type();
    bundle
        .merged()
        .with_predicate(&ty)
        .filter(|t| t.object.as_iri().is_some_and(|o| o.local_name() == marker))
        .filter_map(|t| t.subject.as_iri().cloned())
        .collect()
}

/// The fundamental categories of a bundle, recognized by their category
/// markers.
#[derive(Clone, Debug, Default)]
pub struct Categories {
    pub paradigmatic: BTreeSet<Iri>,
    pub annotation: BTreeSet<Iri>,
}

impl Categories {
    pub fn of(bundle: &OntologyBundle) -> Self {
        Categories {
            paradigmatic: typed_as(bundle, "fundamental_paradigmatic_category"),
            annotation: typed_as(bundle, "fundamental_non_paradigmatic_category"),
        }
    }

    /// All paradigmatic categories above `class`; failing that, annotation.
    pub fn verdict(&self, t: &Taxonomy, class: &Iri) -> TierVerdict {
        let above: Vec<Iri> = self.paradigmatic.iter().filter(|c| t.subsumes(c, class)).cloned().collect();
        if !above.is_empty() {
            TierVerdict::Category { categories: above }
        } else if self.annotation.iter().any(|a| t.subsumes(a, class)) {
            TierVerdict::Annotation
        } else {
            TierVerdict::Unclassified
        }
    }
}

/// Verdicts for every class declared by a marketplace or subdomain ontology.
pub fn tier_check(bundle: &OntologyBundle, t: &Taxonomy) -> TierReport {
    let cats = Categories::of(bundle);
    let mut report = TierReport::default();
    let mut seen = BTreeSet::new();
    for o in bundle.ontologies.iter().filter(|o| matches!(o.tier, Tier::Marketplace | Tier::Subdomain)) {
        for class in o.declared_classes() {
            if !seen.insert(class.clone()) {
                continue;
            }
            let verdict = cats.verdict(t, &class);
            if verdict == TierVerdict::Unclassified {
                report.violations.push(class.clone());
            }
            report.entries.push(TierEntry { class, ontology: o.name.clone(), verdict });
        }
    }
    report
}
