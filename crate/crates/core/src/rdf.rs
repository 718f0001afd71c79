//! RDF terms shared by every module: IRIs, node references, literals, triples.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// An absolute IRI. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(s: impl AsRef<str>) -> Self {
        Iri(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#`, `/` or `:`.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/', ':']) {
            Some(i) => &s[i + 1..],
            None => s,
        }
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Iri {
    fn from(s: &str) -> Self {
        Iri::new(s)
    }
}

/// Well-known vocabulary terms.
pub mod vocab {
    use super::{Iri, OWL, RDF, RDFS, XSD};

    fn iri(ns: &str, local: &str) -> Iri {
        Iri::new(format!("{ns}{local}"))
    }

    pub fn rdf_type() -> Iri {
        iri(RDF, "type")
    }
    pub fn subclass_of() -> Iri {
        iri(RDFS, "subClassOf")
    }
    pub fn subproperty_of() -> Iri {
        iri(RDFS, "subPropertyOf")
    }
    pub fn rdfs_class() -> Iri {
        iri(RDFS, "Class")
    }
    pub fn owl_class() -> Iri {
        iri(OWL, "Class")
    }
    pub fn equivalent_class() -> Iri {
        iri(OWL, "equivalentClass")
    }
    pub fn equivalent_property() -> Iri {
        iri(OWL, "equivalentProperty")
    }
    pub fn object_property() -> Iri {
        iri(OWL, "ObjectProperty")
    }
    pub fn datatype_property() -> Iri {
        iri(OWL, "DatatypeProperty")
    }
    pub fn thing() -> Iri {
        iri(OWL, "Thing")
    }
    pub fn top_object_property() -> Iri {
        iri(OWL, "topObjectProperty")
    }
    pub fn top_data_property() -> Iri {
        iri(OWL, "topDataProperty")
    }
    pub fn xsd_string() -> Iri {
        iri(XSD, "string")
    }
    pub fn xsd_decimal() -> Iri {
        iri(XSD, "decimal")
    }
    pub fn xsd_integer() -> Iri {
        iri(XSD, "integer")
    }
}

/// Subject or object position that names a resource.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum NodeRef {
    Iri(Iri),
    Blank(String),
}

impl NodeRef {
    pub fn iri(s: impl AsRef<str>) -> Self {
        NodeRef::Iri(Iri::new(s))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            NodeRef::Iri(i) => Some(i),
            NodeRef::Blank(_) => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, NodeRef::Blank(_))
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Iri(i) => write!(f, "<{i}>"),
            NodeRef::Blank(b) => write!(f, "_:{b}"),
        }
    }
}

/// A typed literal. The lexical form is kept verbatim, so decimals such as
/// `2.5764` never pass through a float.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Iri,
}

impl Literal {
    pub fn string(s: impl Into<String>) -> Self {
        Literal { lexical: s.into(), datatype: vocab::xsd_string() }
    }

    pub fn decimal(s: impl Into<String>) -> Self {
        Literal { lexical: s.into(), datatype: vocab::xsd_decimal() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Object {
    Node(NodeRef),
    Literal(Literal),
}

impl Object {
    pub fn iri(s: impl AsRef<str>) -> Self {
        Object::Node(NodeRef::iri(s))
    }

    pub fn as_node(&self) -> Option<&NodeRef> {
        match self {
            Object::Node(n) => Some(n),
            Object::Literal(_) => None,
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        self.as_node().and_then(NodeRef::as_iri)
    }
}

impl From<NodeRef> for Object {
    fn from(n: NodeRef) -> Self {
        Object::Node(n)
    }
}

impl From<Literal> for Object {
    fn from(l: Literal) -> Self {
        Object::Literal(l)
    }
}

/// The predicate is an [`Iri`] by construction, never a blank node or literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: NodeRef,
    pub predicate: Iri,
    pub object: Object,
}

impl Triple {
    pub fn new(subject: NodeRef, predicate: Iri, object: impl Into<Object>) -> Self {
        Triple { subject, predicate, object: object.into() }
    }
}
