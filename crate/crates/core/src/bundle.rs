//! Named ontology stores, their tiers, and the manifest that ties a fixture
//! directory together.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::PrefixMap;
use crate::rdf::{vocab, Iri};
use crate::store::TripleStore;
use crate::taxonomy::Taxonomy;
use crate::turtle::parse_turtle_with_prefixes;

/// Position of an ontology in the multi-tier system, most general first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Top,
    Fundamentals,
    Marketplace,
    Subdomain,
}

#[derive(Clone, Debug)]
pub struct Ontology {
    pub name: String,
    pub tier: Tier,
    pub store: TripleStore,
}

impl Ontology {
    /// Classes and properties this ontology declares or places in a hierarchy.
    pub fn declared_terms(&self) -> BTreeSet<Iri> {
        let markers = [vocab::owl_class(), vocab::rdfs_class(), vocab::object_property(), vocab::datatype_property()];
        let hierarchy = [vocab::subclass_of(), vocab::subproperty_of()];
        let rdf_type = vocab::rdf_type();
        self.store
            .iter()
            .filter(|t| {
                (t.predicate == rdf_type && t.object.as_iri().is_some_and(|o| markers.contains(o)))
                    || hierarchy.contains(&t.predicate)
            })
            .filter_map(|t| t.subject.as_iri().cloned())
            .collect()
    }

    /// Declared classes only.
    pub fn declared_classes(&self) -> BTreeSet<Iri> {
        let markers = [vocab::owl_class(), vocab::rdfs_class()];
        let rdf_type = vocab::rdf_type();
        let sub = vocab::subclass_of();
        self.store
            .iter()
            .filter(|t| {
                (t.predicate == rdf_type && t.object.as_iri().is_some_and(|o| markers.contains(o)))
                    || t.predicate == sub
            })
            .filter_map(|t| t.subject.as_iri().cloned())
            .collect()
    }
}

/// A named set of ontology stores. Merging is a set union, so the derived
/// taxonomy does not depend on load order.
#[derive(Clone, Debug, Default)]
pub struct OntologyBundle {
    pub ontologies: Vec<Ontology>,
    pub prefixes: PrefixMap,
}

impl OntologyBundle {
    pub fn new() -> Self {
        OntologyBundle { ontologies: Vec::new(), prefixes: PrefixMap::standard() }
    }

    /// Adds or replaces the ontology with the same name.
    pub fn insert(&mut self, ontology: Ontology) {
        match self.ontologies.iter_mut().find(|o| o.name == ontology.name) {
            Some(slot) => *slot = ontology,
            None => self.ontologies.push(ontology),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Ontology> {
        self.ontologies.iter().find(|o| o.name == name)
    }

    pub fn merged(&self) -> TripleStore {
        let mut out = TripleStore::new();
        for o in &self.ontologies {
            out.extend(&o.store);
        }
        out
    }

    pub fn taxonomy(&self) -> Result<Taxonomy> {
        Taxonomy::from_stores(self.ontologies.iter().map(|o| &o.store))
    }

    /// Taxonomy of the bundle plus extra axioms (e.g. an accepted alignment).
    pub fn taxonomy_with(&self, extra: &TripleStore) -> Result<Taxonomy> {
        Taxonomy::from_stores(self.ontologies.iter().map(|o| &o.store).chain(std::iter::once(extra)))
    }

    /// Names of the ontologies declaring `iri`.
    pub fn declaring(&self, iri: &Iri) -> Vec<&Ontology> {
        self.ontologies.iter().filter(|o| o.declared_terms().contains(iri)).collect()
    }

    /// Parses one Turtle file into the bundle, collecting its prefixes.
    pub fn load_file(&mut self, name: &str, tier: Tier, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (store, prefixes) = parse_turtle_with_prefixes(&text, &self.prefixes)?;
        self.prefixes.merge(&prefixes)?;
        self.insert(Ontology { name: name.to_string(), tier, store });
        Ok(())
    }

    /// Loads `dir/bundle.toml` if present, otherwise every `*.ttl` in `dir`
    /// (sorted by file name, marketplace tier).
    pub fn load_dir(dir: &Path) -> Result<(Self, Option<Manifest>)> {
        let manifest_path = dir.join(Manifest::FILE_NAME);
        let mut bundle = OntologyBundle::new();
        if manifest_path.exists() {
            let manifest = Manifest::read(&manifest_path)?;
            for o in &manifest.ontology {
                bundle.load_file(&o.name, o.tier, &dir.join(&o.file))?;
            }
            return Ok((bundle, Some(manifest)));
        }
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "ttl"))
            .collect();
        files.sort();
        for f in files {
            let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            bundle.load_file(&name, Tier::Marketplace, &f)?;
        }
        Ok((bundle, None))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OntologyEntry {
    pub name: String,
    pub file: PathBuf,
    pub tier: Tier,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioPairEntry {
    pub name: String,
    pub source: PathBuf,
    pub target: PathBuf,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct WorkspaceEntry {
    pub hints: Option<PathBuf>,
    pub rules: Option<PathBuf>,
}

/// `bundle.toml`: ontologies with tiers, scenario pairs, default hints/rules.
/// Paths are relative to the manifest's directory.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub ontology: Vec<OntologyEntry>,
    #[serde(default)]
    pub scenario_pair: Vec<ScenarioPairEntry>,
    #[serde(default)]
    pub workspace: WorkspaceEntry,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "bundle.toml";

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
