//! Graph rewriting rules for correspondences that OWL cannot express.
//!
//! A rule reads "for every match of the `when` pattern there exist nodes for
//! the `fresh` variables such that the `ensure` atoms hold":
//!
//! ```text
//! rule NAME {
//!   when { edge(?x, p, ?y); type(?x, C) }
//!   ensure { fresh ?z : D; edge(?z, q, ?x) }
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::prefix::PrefixMap;
use crate::rdf::{vocab, Iri, NodeRef};
use crate::scenario::ScenarioGraph;
use crate::taxonomy::Taxonomy;
use crate::term::{normalize, PropertyTerm};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "atom", rename_all = "lowercase")]
pub enum Atom {
    Edge { subject: String, property: Iri, object: String },
    Type { var: String, class: Iri },
}

impl Atom {
    fn vars(&self) -> Vec<&str> {
        match self {
            Atom::Edge { subject, object, .. } => vec![subject, object],
            Atom::Type { var, .. } => vec![var],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fresh {
    pub var: String,
    pub classes: Vec<Iri>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteRule {
    pub name: String,
    pub antecedent: Vec<Atom>,
    pub fresh: Vec<Fresh>,
    pub consequent: Vec<Atom>,
}

pub type Binding = BTreeMap<String, NodeRef>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingVerdict {
    pub binding: Binding,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub rule: String,
    pub bindings: Vec<BindingVerdict>,
}

impl MatchResult {
    pub fn violated(&self) -> impl Iterator<Item = &Binding> {
        self.bindings.iter().filter(|b| !b.satisfied).map(|b| &b.binding)
    }

    pub fn all_satisfied(&self) -> bool {
        self.bindings.iter().all(|b| b.satisfied)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skolemized {
    pub binding: Binding,
    pub nodes: BTreeMap<String, NodeRef>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterializeReport {
    pub rule: String,
    pub added: Vec<Skolemized>,
}

impl RewriteRule {
    fn validate(&self, line: usize) -> Result<()> {
        let err = |message: String| Err(Error::Rule { line, message });
        if self.antecedent.is_empty() {
            return err(format!("rule {} has an empty `when` block", self.name));
        }
        let bound: BTreeSet<&str> = self.antecedent.iter().flat_map(Atom::vars).collect();
        let mut fresh = BTreeSet::new();
        for f in &self.fresh {
            if bound.contains(f.var.as_str()) || !fresh.insert(f.var.as_str()) {
                return err(format!("fresh variable ?{} is already bound", f.var));
            }
        }
        for v in self.consequent.iter().flat_map(Atom::vars) {
            if !bound.contains(v) && !fresh.contains(v) {
                return err(format!("unbound variable ?{v} in rule {}", self.name));
            }
        }
        Ok(())
    }

    pub fn to_text(&self, prefixes: &PrefixMap) -> String {
        let atom = |a: &Atom| match a {
            Atom::Edge { subject, property, object } => {
                format!("edge(?{subject}, {}, ?{object})", prefixes.display(property))
            }
            Atom::Type { var, class } => format!("type(?{var}, {})", prefixes.display(class)),
        };
        let block = |lines: Vec<String>| lines.iter().map(|l| format!("    {l}")).collect::<Vec<_>>().join(";\n");
        let when = block(self.antecedent.iter().map(atom).collect());
        let mut ensure: Vec<String> = self
            .fresh
            .iter()
            .map(|f| {
                let classes: Vec<String> = f.classes.iter().map(|c| prefixes.display(c)).collect();
                if classes.is_empty() {
                    format!("fresh ?{}", f.var)
                } else {
                    format!("fresh ?{} : {}", f.var, classes.join(", "))
                }
            })
            .collect();
        ensure.extend(self.consequent.iter().map(atom));
        format!("rule {} {{\n  when {{\n{when}\n  }}\n  ensure {{\n{}\n  }}\n}}\n", self.name, block(ensure))
    }
}

/// Renders rules separated by blank lines.
pub fn rules_to_text(rules: &[RewriteRule], prefixes: &PrefixMap) -> String {
    rules.iter().map(|r| r.to_text(prefixes)).collect::<Vec<_>>().join("\n")
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    Colon,
    Punct(char),
}

fn lex(doc: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    for (ln, raw) in doc.lines().enumerate() {
        let line = ln + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                break;
            } else if "{}();,".contains(c) {
                out.push((Tok::Punct(c), line));
                i += 1;
            } else if c == ':' && chars.get(i + 1).is_none_or(|n| n.is_whitespace()) {
                out.push((Tok::Colon, line));
                i += 1;
            } else if c == '?' {
                let start = i + 1;
                i = start;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if i == start {
                    return Err(Error::Rule { line, message: "empty variable name".into() });
                }
                out.push((Tok::Var(chars[start..i].iter().collect()), line));
            } else {
                let start = i;
                if c == '<' {
                    while i < chars.len() && chars[i] != '>' {
                        i += 1;
                    }
                    i += 1;
                } else {
                    while i < chars.len() && !chars[i].is_whitespace() && !"{}();,".contains(chars[i]) {
                        i += 1;
                    }
                }
                out.push((Tok::Word(chars[start..i.min(chars.len())].iter().collect()), line));
            }
        }
    }
    Ok(out)
}

struct RuleParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    prefixes: &'a PrefixMap,
}

impl RuleParser<'_> {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map(|t| t.1).unwrap_or(1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Rule { line: self.line(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            _ => {
                self.pos -= 1;
                self.err(format!("expected `{c}`"))
            }
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match self.next() {
            Some(Tok::Word(w)) if w == kw => Ok(()),
            _ => {
                self.pos -= 1;
                self.err(format!("expected `{kw}`"))
            }
        }
    }

    fn var(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(v),
            _ => {
                self.pos -= 1;
                self.err("expected a ?variable")
            }
        }
    }

    fn iri(&mut self) -> Result<Iri> {
        let line = self.line();
        match self.next() {
            Some(Tok::Word(w)) => {
                self.prefixes.expand_curie(&w).map_err(|e| Error::Rule { line, message: e.to_string() })
            }
            _ => {
                self.pos -= 1;
                self.err("expected a prefixed name")
            }
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let line = self.line();
        let Some(Tok::Word(head)) = self.next() else {
            self.pos -= 1;
            return self.err("expected an atom");
        };
        self.expect_punct('(')?;
        let atom = match head.as_str() {
            "edge" => {
                let subject = self.var()?;
                self.expect_punct(',')?;
                let property = self.iri()?;
                self.expect_punct(',')?;
                let object = self.var()?;
                Atom::Edge { subject, property, object }
            }
            "type" => {
                let var = self.var()?;
                self.expect_punct(',')?;
                let class = self.iri()?;
                Atom::Type { var, class }
            }
            other => return Err(Error::Rule { line, message: format!("unknown atom `{other}`") }),
        };
        self.expect_punct(')')?;
        Ok(atom)
    }

    /// `{ item (; item)* ;? }`
    fn block<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.expect_punct('{')?;
        let mut out = Vec::new();
        loop {
            if self.peek() == Some(&Tok::Punct('}')) {
                self.pos += 1;
                return Ok(out);
            }
            out.push(item(self)?);
            match self.next() {
                Some(Tok::Punct(';')) => {}
                Some(Tok::Punct('}')) => return Ok(out),
                _ => {
                    self.pos -= 1;
                    return self.err("expected `;` or `}`");
                }
            }
        }
    }

    fn rule(&mut self) -> Result<RewriteRule> {
        let line = self.line();
        self.expect_keyword("rule")?;
        let name = match self.next() {
            Some(Tok::Word(w)) if w.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') => w,
            _ => {
                self.pos -= 1;
                return self.err("expected a rule name");
            }
        };
        self.expect_punct('{')?;
        self.expect_keyword("when")?;
        let antecedent = self.block(Self::atom)?;
        self.expect_keyword("ensure")?;
        let mut fresh = Vec::new();
        let items = self.block(|p| {
            if p.peek() == Some(&Tok::Word("fresh".into())) {
                p.pos += 1;
                let var = p.var()?;
                let mut classes = Vec::new();
                if p.peek() == Some(&Tok::Colon) {
                    p.pos += 1;
                    classes.push(p.iri()?);
                    while p.peek() == Some(&Tok::Punct(',')) {
                        p.pos += 1;
                        classes.push(p.iri()?);
                    }
                }
                Ok(Err(Fresh { var, classes }))
            } else {
                Ok(Ok(p.atom()?))
            }
        })?;
        let mut consequent = Vec::new();
        for item in items {
            match item {
                Ok(a) => consequent.push(a),
                Err(f) => fresh.push(f),
            }
        }
        self.expect_punct('}')?;
        let rule = RewriteRule { name, antecedent, fresh, consequent };
        rule.validate(line)?;
        Ok(rule)
    }
}

pub fn parse_rules(doc: &str, prefixes: &PrefixMap) -> Result<Vec<RewriteRule>> {
    let mut p = RuleParser { toks: lex(doc)?, pos: 0, prefixes };
    let mut out: Vec<RewriteRule> = Vec::new();
    while p.peek().is_some() {
        let line = p.line();
        let rule = p.rule()?;
        if out.iter().any(|r| r.name == rule.name) {
            return Err(Error::Rule { line, message: format!("duplicate rule name `{}`", rule.name) });
        }
        out.push(rule);
    }
    Ok(out)
}

fn edge_holds(g: &ScenarioGraph, t: &Taxonomy, s: &NodeRef, p: &Iri, o: &NodeRef) -> bool {
    g.edges().iter().any(|e| &e.source == s && &e.target == o && t.property_subsumes(p, &e.property))
}

/// Extends `b` to every assignment satisfying `atoms`, in order.
fn solve(
    g: &ScenarioGraph,
    t: &Taxonomy,
    atoms: &[Atom],
    b: &mut Binding,
    out: &mut dyn FnMut(&Binding) -> bool,
) -> bool {
    let Some((first, rest)) = atoms.split_first() else {
        return out(b);
    };
    match first {
        Atom::Type { var, class } => match b.get(var).cloned() {
            Some(n) => g.has_class(&n, class, t) && solve(g, t, rest, b, out),
            None => {
                for n in g.instances(class, t) {
                    b.insert(var.clone(), n);
                    if solve(g, t, rest, b, out) {
                        b.remove(var);
                        return true;
                    }
                }
                b.remove(var);
                false
            }
        },
        Atom::Edge { subject, property, object } => {
            let (s, o) = (b.get(subject).cloned(), b.get(object).cloned());
            if let (Some(s), Some(o)) = (&s, &o) {
                return edge_holds(g, t, s, property, o) && solve(g, t, rest, b, out);
            }
            let mut seen = BTreeSet::new();
            for e in g.edges() {
                if !t.property_subsumes(property, &e.property)
                    || s.as_ref().is_some_and(|s| s != &e.source)
                    || o.as_ref().is_some_and(|o| o != &e.target)
                    || (subject == object && e.source != e.target)
                    || !seen.insert((&e.source, &e.target))
                {
                    continue;
                }
                b.insert(subject.clone(), e.source.clone());
                b.insert(object.clone(), e.target.clone());
                let stop = solve(g, t, rest, b, out);
                if s.is_none() {
                    b.remove(subject);
                }
                if o.is_none() {
                    b.remove(object);
                }
                if stop {
                    return true;
                }
            }
            false
        }
    }
}

/// Antecedent atoms reordered so edges bind variables before type filters.
fn ordered(atoms: &[Atom]) -> Vec<Atom> {
    let mut v = atoms.to_vec();
    v.sort_by_key(|a| matches!(a, Atom::Type { .. }));
    v
}

fn consequent_atoms(rule: &RewriteRule) -> Vec<Atom> {
    let mut atoms = ordered(&rule.consequent);
    for f in &rule.fresh {
        for c in &f.classes {
            atoms.push(Atom::Type { var: f.var.clone(), class: c.clone() });
        }
        if f.classes.is_empty() && !rule.consequent.iter().any(|a| a.vars().contains(&f.var.as_str())) {
            atoms.push(Atom::Type { var: f.var.clone(), class: vocab::thing() });
        }
    }
    atoms
}

/// Antecedent matches, each with a verdict on whether existing nodes can
/// witness the consequent.
pub fn check(rule: &RewriteRule, g: &ScenarioGraph, t: &Taxonomy) -> MatchResult {
    let mut bindings = BTreeSet::new();
    solve(g, t, &ordered(&rule.antecedent), &mut Binding::new(), &mut |b| {
        bindings.insert(b.clone());
        false
    });
    let consequent = consequent_atoms(rule);
    let bindings = bindings
        .into_iter()
        .map(|binding| {
            let mut b = binding.clone();
            let satisfied = solve(g, t, &consequent, &mut b, &mut |_| true);
            BindingVerdict { binding, satisfied }
        })
        .collect();
    MatchResult { rule: rule.name.clone(), bindings }
}

/// Deterministic label for the witness of `var` under `binding`.
pub fn skolem_label(rule: &str, binding: &Binding, var: &str) -> String {
    let mut h = Sha256::new();
    for (k, v) in binding {
        h.update(format!("{k}={v};").as_bytes());
    }
    h.update(var.as_bytes());
    let digest = hex::encode(h.finalize());
    format!("sk_{rule}_{}", &digest[..16])
}

/// Adds skolem witnesses for every violated binding. The input graph is
/// left untouched; bindings are computed against it, not incrementally.
pub fn materialize(rule: &RewriteRule, g: &ScenarioGraph, t: &Taxonomy) -> (ScenarioGraph, MaterializeReport) {
    let result = check(rule, g, t);
    let mut out = g.clone();
    let mut report = MaterializeReport { rule: rule.name.clone(), added: Vec::new() };
    for binding in result.violated() {
        let mut full = binding.clone();
        let mut nodes = BTreeMap::new();
        for f in &rule.fresh {
            let node = NodeRef::Blank(skolem_label(&rule.name, binding, &f.var));
            out.add_node(node.clone());
            for c in &f.classes {
                out.add_label(node.clone(), c.clone());
            }
            full.insert(f.var.clone(), node.clone());
            nodes.insert(f.var.clone(), node);
        }
        for a in &rule.consequent {
            match a {
                Atom::Edge { subject, property, object } => {
                    let (s, o) = (&full[subject], &full[object]);
                    if !edge_holds(&out, t, s, property, o) {
                        out.add_edge(s.clone(), property.clone(), o.clone());
                    }
                }
                Atom::Type { var, class } => {
                    if !out.has_class(&full[var], class, t) {
                        out.add_label(full[var].clone(), class.clone());
                    }
                }
            }
        }
        report.added.push(Skolemized { binding: binding.clone(), nodes });
    }
    (out, report)
}

struct Compiler {
    atoms: Vec<Atom>,
    fresh: Vec<String>,
    prefix: &'static str,
}

impl Compiler {
    fn var(&mut self) -> String {
        let v = format!("{}{}", self.prefix, self.fresh.len() + 1);
        self.fresh.push(v.clone());
        v
    }

    fn term(&mut self, term: &PropertyTerm, x: &str, y: &str) {
        match term {
            PropertyTerm::Atomic(p) => {
                if *p != vocab::top_object_property() {
                    self.atoms.push(Atom::Edge { subject: x.into(), property: p.clone(), object: y.into() });
                }
            }
            PropertyTerm::Inverse(inner) => self.term(inner, y, x),
            PropertyTerm::Chain(a, b) => {
                let m = self.var();
                self.term(a, x, &m);
                self.term(b, &m, y);
            }
            PropertyTerm::Intersection(parts) => parts.iter().for_each(|p| self.term(p, x, y)),
            PropertyTerm::SubjectRestriction(c) => self.restrict(x, c),
            PropertyTerm::ObjectRestriction(c) => self.restrict(y, c),
        }
    }

    fn restrict(&mut self, v: &str, c: &Iri) {
        if *c != vocab::thing() {
            self.atoms.push(Atom::Type { var: v.into(), class: c.clone() });
        }
    }
}

/// Rule stating that every `sigma` pair is a `tau` pair. Both terms are
/// normalized first; chain midpoints of `sigma` become universally bound
/// variables, those of `tau` become fresh witnesses.
pub fn compile(name: &str, sigma: &PropertyTerm, tau: &PropertyTerm) -> Result<RewriteRule> {
    let mut when = Compiler { atoms: Vec::new(), fresh: Vec::new(), prefix: "v" };
    when.term(&normalize(sigma), "x", "y");
    let mut ensure = Compiler { atoms: Vec::new(), fresh: Vec::new(), prefix: "z" };
    ensure.term(&normalize(tau), "x", "y");

    let mut fresh: Vec<Fresh> = ensure.fresh.iter().map(|v| Fresh { var: v.clone(), classes: Vec::new() }).collect();
    let mut consequent = Vec::new();
    for a in ensure.atoms {
        match a {
            Atom::Type { var, class } if ensure.fresh.contains(&var) => {
                let f = fresh.iter_mut().find(|f| f.var == var).expect("fresh variable");
                if !f.classes.contains(&class) {
                    f.classes.push(class);
                }
            }
            a => consequent.push(a),
        }
    }
    let rule = RewriteRule { name: name.to_string(), antecedent: when.atoms, fresh, consequent };
    rule.validate(0)?;
    Ok(rule)
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

    const SHARED: &str = "rule shared {
  when {
    edge(?x, ex:involves, ?y);
    type(?x, ex:R)
  }
  ensure {
    fresh ?z : ex:M;
    edge(?z, ex:part, ?x);
    edge(?z, ex:part, ?y)
  }
}
";

    fn graph(doc: &str) -> ScenarioGraph {
        ScenarioGraph::from_triples(&parse_turtle(doc, &pm()).unwrap())
    }

    #[test]
    fn parses_and_prints_back() {
        let rules = parse_rules(SHARED, &pm()).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].antecedent.len(), 2);
        assert_eq!(rules[0].fresh.len(), 1);
        assert_eq!(rules[0].consequent.len(), 2);
        assert_eq!(rules[0].to_text(&pm()), SHARED);
        assert!(parse_rules("  # nothing\n", &pm()).unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let unbound = "rule r {\n when { edge(?x, ex:p, ?y) }\n ensure { edge(?x, ex:q, ?w) }\n}";
        assert!(matches!(parse_rules(unbound, &pm()), Err(Error::Rule { .. })));
        let bad_prefix = "rule r {\n when {\n edge(?x, nope:p, ?y) }\n ensure { edge(?x, ex:q, ?y) }\n}";
        assert!(matches!(parse_rules(bad_prefix, &pm()), Err(Error::Rule { line: 3, .. })));
        let empty = "rule r { when { } ensure { } }";
        assert!(matches!(parse_rules(empty, &pm()), Err(Error::Rule { .. })));
    }

    #[test]
    fn shared_witness_satisfies() {
        let rule = &parse_rules(SHARED, &pm()).unwrap()[0];
        let g = graph("ex:a a ex:R; ex:involves ex:b. ex:m a ex:M; ex:part ex:a, ex:b.");
        let r = check(rule, &g, &Taxonomy::empty());
        assert_eq!(r.bindings.len(), 1);
        assert!(r.all_satisfied());
    }

    #[test]
    fn materialize_reaches_a_fixpoint() {
        let rule = &parse_rules(SHARED, &pm()).unwrap()[0];
        let t = Taxonomy::empty();
        let g = graph("ex:a a ex:R; ex:involves ex:b, ex:c.");
        assert_eq!(check(rule, &g, &t).violated().count(), 2);
        let (g1, report) = materialize(rule, &g, &t);
        assert_eq!(report.added.len(), 2);
        assert!(check(rule, &g1, &t).all_satisfied());
        let (g2, again) = materialize(rule, &g1, &t);
        assert!(again.added.is_empty());
        assert_eq!(g1, g2);
        assert_eq!(g, graph("ex:a a ex:R; ex:involves ex:b, ex:c."));
    }

    #[test]
    fn skolems_are_deterministic() {
        let b: Binding = [("x".to_string(), NodeRef::iri("http://example.org/a"))].into();
        assert_eq!(skolem_label("r", &b, "z"), skolem_label("r", &b, "z"));
        assert_ne!(skolem_label("r", &b, "z"), skolem_label("r", &b, "w"));
        assert!(skolem_label("r", &b, "z").starts_with("sk_r_"));
    }

    #[test]
    fn compiles_chain_into_fresh_witness() {
        let m = pm();
        let sigma = PropertyTerm::parse("and(ex:involves, subj(ex:R), obj(ex:O))", &m).unwrap();
        let tau = PropertyTerm::parse("chain(inv(and(subj(ex:M), ex:part)), ex:part)", &m).unwrap();
        let rule = compile("corr_9", &sigma, &tau).unwrap();
        let expected = "rule corr_9 {
  when {
    edge(?x, ex:involves, ?y);
    type(?x, ex:R);
    type(?y, ex:O)
  }
  ensure {
    fresh ?z1 : ex:M;
    edge(?z1, ex:part, ?x);
    edge(?z1, ex:part, ?y)
  }
}
";
        assert_eq!(rule.to_text(&m), expected);
        assert_eq!(parse_rules(expected, &m).unwrap()[0], rule);
    }
}
