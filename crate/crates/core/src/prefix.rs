use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rdf::{Iri, OWL, RDF, RDFS, XSD};

/// Ordered map from prefix label to namespace IRI.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixMap {
    entries: IndexMap<String, String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// `rdf`, `rdfs`, `owl`, `xsd` and `xs`.
    pub fn standard() -> Self {
        let mut m = PrefixMap::new();
        m.insert("rdf", RDF);
        m.insert("rdfs", RDFS);
        m.insert("owl", OWL);
        m.insert("xsd", XSD);
        m.insert("xs", XSD);
        m
    }

    /// Inserts or replaces a binding, keeping the original position on replace.
    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.entries.insert(prefix.into(), namespace.into());
    }

    /// Adds every binding of `other`; a label already bound to a different
    /// namespace is an error.
    pub fn merge(&mut self, other: &PrefixMap) -> Result<(), Error> {
        for (p, ns) in &other.entries {
            match self.entries.get(p) {
                Some(existing) if existing != ns => {
                    return Err(Error::PrefixConflict {
                        prefix: p.clone(),
                        first: existing.clone(),
                        second: ns.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    self.entries.insert(p.clone(), ns.clone());
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.entries.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn expand(&self, prefix: &str, local: &str) -> Option<Iri> {
        self.get(prefix).map(|ns| Iri::new(format!("{ns}{local}")))
    }

    /// Expands `prefix:local` or `<iri>` text.
    pub fn expand_curie(&self, text: &str) -> Result<Iri, Error> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return if is_absolute(inner) { Ok(Iri::new(inner)) } else { Err(Error::RelativeIri(inner.to_string())) };
        }
        let (prefix, local) = text.split_once(':').ok_or_else(|| Error::MalformedCurie(text.to_string()))?;
        if !is_prefix_label(prefix) || !is_local_name(local) {
            return Err(Error::MalformedCurie(text.to_string()));
        }
        self.expand(prefix, local).ok_or_else(|| Error::UnknownPrefix(prefix.to_string()))
    }

    /// Shortest valid `prefix:local` form using the longest matching namespace,
    /// or `None` if no namespace fits. Ties on length go to the first-declared
    /// prefix.
    pub fn compact(&self, iri: &Iri) -> Option<String> {
        let s = iri.as_str();
        let mut best: Option<(&str, &str)> = None;
        for (p, ns) in &self.entries {
            if let Some(local) = s.strip_prefix(ns.as_str()) {
                if !is_local_name(local) {
                    continue;
                }
                if best.is_none_or(|(_, bns)| ns.len() > bns.len()) {
                    best = Some((p.as_str(), ns.as_str()));
                }
            }
        }
        best.map(|(p, ns)| format!("{p}:{}", &s[ns.len()..]))
    }

    /// `prefix:local` if possible, otherwise `<iri>`.
    pub fn display(&self, iri: &Iri) -> String {
        self.compact(iri).unwrap_or_else(|| format!("<{iri}>"))
    }
}

pub(crate) fn is_absolute(iri: &str) -> bool {
    match iri.find(':') {
        Some(i) if i > 0 => {
            let scheme = &iri[..i];
            scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && scheme.chars().all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c))
                && !iri.contains([' ', '<', '>', '"'])
        }
        _ => false,
    }
}

pub(crate) fn is_prefix_label(p: &str) -> bool {
    let mut chars = p.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'),
        _ => false,
    }
}

pub(crate) fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'
}

/// Local names are non-empty, start with a letter, digit or underscore, and
/// do not end with a dot.
pub(crate) fn is_local_name(l: &str) -> bool {
    let mut chars = l.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    l.chars().all(is_local_char) && !l.ends_with('.')
}
