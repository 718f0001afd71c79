//! Reader and writer for the Turtle subset used by fixtures and outputs.
//!
//! Supported: `@prefix`, prefixed names, `<absolute-iri>`, `a`, `;`, `,`,
//! `[ ... ]` blank nodes, `_:label` blank nodes, double-quoted strings with an
//! optional `^^` datatype, bare integer/decimal literals and `#` comments.
//! Collections, long strings, language tags, `@base` and relative IRIs are
//! rejected with a positioned syntax error.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::prefix::{is_absolute, is_local_char, is_prefix_label, PrefixMap};
use crate::rdf::{vocab, Iri, Literal, NodeRef, Object, Triple};
use crate::store::TripleStore;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    PrefixKw,
    IriRef(String),
    PName(String, String),
    Blank(String),
    A,
    Str(String),
    Carets,
    Number(String),
    Dot,
    Semi,
    Comma,
    LBracket,
    RBracket,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(doc: &'a str) -> Self {
        Lexer { chars: doc.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax { line, column, message: message.into() }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '#' {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    break;
                }
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                '.' => {
                    self.bump();
                    if self.peek().is_some_and(|d| d.is_ascii_digit()) {
                        return Err(self.err(line, column, "decimal literals need a leading digit"));
                    }
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                '(' | ')' => {
                    return Err(self.err(line, column, "RDF collections are not supported"));
                }
                '\'' => {
                    return Err(self.err(line, column, "single-quoted strings are not supported"));
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err(line, column, "expected `^^`"));
                    }
                    Tok::Carets
                }
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some(c) if c.is_whitespace() => {
                                return Err(self.err(line, column, "whitespace inside IRI"))
                            }
                            Some(c) => iri.push(c),
                            None => return Err(self.err(line, column, "unterminated IRI")),
                        }
                    }
                    if !is_absolute(&iri) {
                        return Err(self.err(line, column, format!("relative IRI <{iri}> is not supported")));
                    }
                    Tok::IriRef(iri)
                }
                '"' => self.string(line, column)?,
                '@' => {
                    self.bump();
                    let word = self.word();
                    match word.as_str() {
                        "prefix" => Tok::PrefixKw,
                        "base" => return Err(self.err(line, column, "@base is not supported")),
                        _ => return Err(self.err(line, column, format!("unsupported directive @{word}"))),
                    }
                }
                '_' if self.lookahead_is("_:") => {
                    self.bump();
                    self.bump();
                    let label = self.local();
                    if label.is_empty() {
                        return Err(self.err(line, column, "empty blank node label"));
                    }
                    Tok::Blank(label)
                }
                c if c.is_ascii_digit() || c == '+' || c == '-' => self.number(line, column)?,
                c if c.is_ascii_alphabetic() || c == ':' => {
                    let prefix = self.word();
                    if self.peek() == Some(':') {
                        self.bump();
                        if !is_prefix_label(&prefix) {
                            return Err(self.err(line, column, format!("invalid prefix `{prefix}`")));
                        }
                        let local = self.local();
                        Tok::PName(prefix, local)
                    } else if prefix == "a" {
                        Tok::A
                    } else if prefix == "true" || prefix == "false" {
                        return Err(self.err(line, column, "boolean literals are not supported"));
                    } else if prefix.eq_ignore_ascii_case("prefix") || prefix.eq_ignore_ascii_case("base") {
                        return Err(self.err(line, column, "SPARQL-style directives are not supported"));
                    } else {
                        return Err(self.err(line, column, format!("unexpected word `{prefix}`")));
                    }
                }
                other => return Err(self.err(line, column, format!("unexpected character `{other}`"))),
            };
            out.push(Spanned { tok, line, column });
        }
        Ok(out)
    }

    fn lookahead_is(&self, s: &str) -> bool {
        let mut it = self.chars.clone();
        s.chars().all(|c| it.next() == Some(c))
    }

    fn word(&mut self) -> String {
        let mut w = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                w.push(c);
                self.bump();
            } else {
                break;
            }
        }
        w
    }

    /// Local name; a trailing `.` belongs to the statement, not the name.
    fn local(&mut self) -> String {
        let mut probe = self.chars.clone();
        let mut raw = String::new();
        while let Some(&c) = probe.peek() {
            if is_local_char(c) {
                raw.push(c);
                probe.next();
            } else {
                break;
            }
        }
        let keep = raw.trim_end_matches('.').len();
        let local: String = raw.chars().take(keep).collect();
        for _ in 0..local.chars().count() {
            self.bump();
        }
        local
    }

    fn string(&mut self, line: usize, column: usize) -> Result<Tok> {
        self.bump();
        if self.lookahead_is("\"\"") {
            return Err(self.err(line, column, "long (triple-quoted) strings are not supported"));
        }
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some(c) => return Err(self.err(self.line, self.column, format!("unknown escape `\\{c}`"))),
                    None => return Err(self.err(line, column, "unterminated string")),
                },
                Some('\n') | None => return Err(self.err(line, column, "unterminated string")),
                Some(c) => s.push(c),
            }
        }
        if self.peek() == Some('@') {
            return Err(self.err(self.line, self.column, "language tags are not supported"));
        }
        Ok(Tok::Str(s))
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Tok> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        let digits = |lx: &mut Self, s: &mut String| {
            let mut n = 0;
            while let Some(c) = lx.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    lx.bump();
                    n += 1;
                } else {
                    break;
                }
            }
            n
        };
        if digits(self, &mut s) == 0 {
            return Err(self.err(line, column, "malformed number"));
        }
        // `2.5764.` ends in the statement dot; only consume `.` followed by a digit.
        let mut it = self.chars.clone();
        if it.next() == Some('.') && it.next().is_some_and(|c| c.is_ascii_digit()) {
            s.push('.');
            self.bump();
            digits(self, &mut s);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            return Err(self.err(line, column, "double literals are not supported"));
        }
        Ok(Tok::Number(s))
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: PrefixMap,
    store: TripleStore,
    blank_counter: usize,
    named_blanks: HashMap<String, String>,
    last: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<Spanned> {
        let s = self.toks.get(self.pos).cloned();
        if let Some(sp) = &s {
            self.last = (sp.line, sp.column);
            self.pos += 1;
        }
        s
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.last)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.here();
        Error::Syntax { line, column, message: message.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn fresh_blank(&mut self) -> NodeRef {
        let label = format!("b{}", self.blank_counter);
        self.blank_counter += 1;
        NodeRef::Blank(label)
    }

    fn pname(&self, prefix: &str, local: &str) -> Result<Iri> {
        self.prefixes.expand(prefix, local).ok_or_else(|| {
            let (line, column) = self.last;
            Error::Syntax { line, column, message: format!("unknown prefix `{prefix}`") }
        })
    }

    fn document(&mut self) -> Result<()> {
        while let Some(tok) = self.peek().cloned() {
            if tok == Tok::PrefixKw {
                self.next();
                let Some(Spanned { tok: Tok::PName(p, local), .. }) = self.next() else {
                    return Err(self.err("expected `prefix:` after @prefix"));
                };
                if !local.is_empty() {
                    return Err(self.err("prefix declaration must end with `:`"));
                }
                let Some(Spanned { tok: Tok::IriRef(ns), .. }) = self.next() else {
                    return Err(self.err("expected namespace IRI"));
                };
                self.prefixes.insert(p, ns);
                self.expect(Tok::Dot, "`.` after prefix declaration")?;
            } else {
                self.statement()?;
            }
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<()> {
        let subject = match self.peek() {
            Some(Tok::LBracket) => {
                self.next();
                let b = self.fresh_blank();
                if self.peek() != Some(&Tok::RBracket) {
                    self.pred_obj_list(&b)?;
                }
                self.expect(Tok::RBracket, "`]`")?;
                if self.peek() == Some(&Tok::Dot) {
                    self.next();
                    return Ok(());
                }
                b
            }
            _ => self.resource("subject")?,
        };
        self.pred_obj_list(&subject)?;
        self.expect(Tok::Dot, "`.` at end of statement")
    }

    fn resource(&mut self, role: &str) -> Result<NodeRef> {
        match self.next().map(|s| s.tok) {
            Some(Tok::IriRef(i)) => Ok(NodeRef::Iri(Iri::new(i))),
            Some(Tok::PName(p, l)) => Ok(NodeRef::Iri(self.pname(&p, &l)?)),
            Some(Tok::Blank(label)) => {
                if let Some(mapped) = self.named_blanks.get(&label) {
                    return Ok(NodeRef::Blank(mapped.clone()));
                }
                let fresh = self.fresh_blank();
                if let NodeRef::Blank(f) = &fresh {
                    self.named_blanks.insert(label, f.clone());
                }
                Ok(fresh)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err(format!("expected {role}")))
            }
        }
    }

    fn pred_obj_list(&mut self, subject: &NodeRef) -> Result<()> {
        loop {
            let predicate = match self.peek() {
                Some(Tok::A) => {
                    self.next();
                    vocab::rdf_type()
                }
                Some(Tok::IriRef(_)) | Some(Tok::PName(..)) => match self.resource("predicate")? {
                    NodeRef::Iri(i) => i,
                    NodeRef::Blank(_) => unreachable!(),
                },
                _ => return Err(self.err("expected predicate")),
            };
            loop {
                let object = self.object()?;
                self.store.insert(Triple::new(subject.clone(), predicate.clone(), object));
                if self.peek() == Some(&Tok::Comma) {
                    self.next();
                } else {
                    break;
                }
            }
            if self.peek() == Some(&Tok::Semi) {
                while self.peek() == Some(&Tok::Semi) {
                    self.next();
                }
                if matches!(self.peek(), Some(Tok::Dot) | Some(Tok::RBracket)) {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Object> {
        match self.peek().cloned() {
            Some(Tok::LBracket) => {
                self.next();
                let b = self.fresh_blank();
                if self.peek() != Some(&Tok::RBracket) {
                    self.pred_obj_list(&b)?;
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Object::Node(b))
            }
            Some(Tok::Str(s)) => {
                self.next();
                let datatype = if self.peek() == Some(&Tok::Carets) {
                    self.next();
                    match self.resource("datatype IRI") {
                        Ok(NodeRef::Iri(i)) => i,
                        _ => return Err(self.err("datatype must be an IRI")),
                    }
                } else {
                    vocab::xsd_string()
                };
                Ok(Object::Literal(Literal { lexical: s, datatype }))
            }
            Some(Tok::Number(n)) => {
                self.next();
                let datatype = if n.contains('.') { vocab::xsd_decimal() } else { vocab::xsd_integer() };
                Ok(Object::Literal(Literal { lexical: n, datatype }))
            }
            Some(Tok::A) => Err(self.err("`a` is only valid as a predicate")),
            _ => Ok(Object::Node(self.resource("object")?)),
        }
    }
}

/// Parses `doc` with `prefixes` pre-declared. Returns the triples and the
/// prefix map extended by the document's own declarations.
pub fn parse_turtle_with_prefixes(doc: &str, prefixes: &PrefixMap) -> Result<(TripleStore, PrefixMap)> {
    let toks = Lexer::new(doc).tokens()?;
    let mut p = Parser {
        toks,
        pos: 0,
        prefixes: prefixes.clone(),
        store: TripleStore::new(),
        blank_counter: 0,
        named_blanks: HashMap::new(),
        last: (1, 1),
    };
    p.document()?;
    Ok((p.store, p.prefixes))
}

pub fn parse_turtle(doc: &str, prefixes: &PrefixMap) -> Result<TripleStore> {
    parse_turtle_with_prefixes(doc, prefixes).map(|(s, _)| s)
}

/// Writes `store` as Turtle using `prefixes` for compaction.
///
/// Output is deterministic: subjects sorted, `rdf:type` first, other
/// predicates and objects sorted. Blank nodes referenced exactly once are
/// written inline as `[ ... ]`; the rest keep a `_:label`.
pub fn serialize_turtle(store: &TripleStore, prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    for (p, ns) in prefixes.iter() {
        let _ = writeln!(out, "@prefix {p}: <{ns}> .");
    }
    if store.is_empty() {
        return out;
    }

    let rdf_type = vocab::rdf_type();
    let mut by_subject: BTreeMap<&NodeRef, BTreeMap<(bool, &Iri), BTreeSet<&Object>>> = BTreeMap::new();
    let mut object_refs: HashMap<&str, usize> = HashMap::new();
    for t in store.iter() {
        by_subject
            .entry(&t.subject)
            .or_default()
            .entry((t.predicate != rdf_type, &t.predicate))
            .or_default()
            .insert(&t.object);
        if let Object::Node(NodeRef::Blank(b)) = &t.object {
            *object_refs.entry(b.as_str()).or_default() += 1;
        }
    }

    let mut w = Writer {
        prefixes,
        by_subject: &by_subject,
        inline: object_refs.iter().filter(|(_, n)| **n == 1).map(|(b, _)| b.to_string()).collect(),
        emitted: BTreeSet::new(),
        out: String::new(),
    };

    let mut roots: Vec<&NodeRef> = by_subject.keys().copied().filter(|s| !w.is_inline(s)).collect();
    roots.sort_by_key(|s| (s.is_blank(), *s));
    for s in roots {
        w.statement(s);
    }
    // Inline candidates never reached from a root sit on a blank-node cycle.
    loop {
        let pending: Option<String> = by_subject
            .keys()
            .filter_map(|s| match s {
                NodeRef::Blank(b) if !w.emitted.contains(b) => Some(b.clone()),
                _ => None,
            })
            .next();
        let Some(b) = pending else { break };
        w.inline.remove(&b);
        w.statement(&NodeRef::Blank(b));
    }

    out.push('\n');
    out.push_str(&w.out);
    out
}

struct Writer<'a> {
    prefixes: &'a PrefixMap,
    by_subject: &'a BTreeMap<&'a NodeRef, BTreeMap<(bool, &'a Iri), BTreeSet<&'a Object>>>,
    inline: BTreeSet<String>,
    emitted: BTreeSet<String>,
    out: String,
}

impl Writer<'_> {
    fn is_inline(&self, n: &NodeRef) -> bool {
        matches!(n, NodeRef::Blank(b) if self.inline.contains(b))
    }

    fn statement(&mut self, subject: &NodeRef) {
        if let NodeRef::Blank(b) = subject {
            self.emitted.insert(b.clone());
        }
        let head = self.node(subject);
        let body = self.pred_objs(subject, 1);
        self.out.push_str(&head);
        self.out.push(' ');
        self.out.push_str(&body);
        self.out.push_str(".\n");
    }

    fn pred_objs(&mut self, subject: &NodeRef, depth: usize) -> String {
        let indent = "   ".repeat(depth);
        let Some(preds) = self.by_subject.get(subject) else { return String::new() };
        let mut lines = Vec::new();
        for ((not_type, p), objs) in preds {
            let verb = if *not_type { self.prefixes.display(p) } else { "a".to_string() };
            let rendered: Vec<String> = objs.iter().map(|o| self.object(o, depth)).collect();
            lines.push(format!("{verb} {}", rendered.join(", ")));
        }
        lines.join(&format!(";\n{indent}"))
    }

    fn object(&mut self, o: &Object, depth: usize) -> String {
        match o {
            Object::Literal(l) => literal(l, self.prefixes),
            Object::Node(n @ NodeRef::Blank(b)) if self.inline.contains(b) && !self.emitted.contains(b) => {
                self.emitted.insert(b.clone());
                if !self.by_subject.contains_key(n) {
                    return "[]".to_string();
                }
                let inner = "   ".repeat(depth + 2);
                let body = self.pred_objs(n, depth + 2);
                format!("[\n{inner}{body}\n{}]", "   ".repeat(depth + 1))
            }
            Object::Node(n) => self.node(n),
        }
    }

    fn node(&self, n: &NodeRef) -> String {
        match n {
            NodeRef::Iri(i) => self.prefixes.display(i),
            NodeRef::Blank(b) => format!("_:{b}"),
        }
    }
}

fn literal(l: &Literal, prefixes: &PrefixMap) -> String {
    let bare_ok = |s: &str, allow_dot: bool| {
        let body = s.strip_prefix(['+', '-']).unwrap_or(s);
        match body.split_once('.') {
            Some((a, b)) if allow_dot => {
                !a.is_empty() && !b.is_empty() && (a.chars().chain(b.chars())).all(|c| c.is_ascii_digit())
            }
            Some(_) => false,
            None => !body.is_empty() && !allow_dot && body.chars().all(|c| c.is_ascii_digit()),
        }
    };
    if (l.datatype == vocab::xsd_decimal() && bare_ok(&l.lexical, true))
        || (l.datatype == vocab::xsd_integer() && bare_ok(&l.lexical, false))
    {
        return l.lexical.clone();
    }
    let mut s = String::with_capacity(l.lexical.len() + 2);
    s.push('"');
    for c in l.lexical.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\r' => s.push_str("\\r"),
            '\t' => s.push_str("\\t"),
            c => s.push(c),
        }
    }
    s.push('"');
    s.push_str("^^");
    s.push_str(&prefixes.display(&l.datatype));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_prefixes() -> PrefixMap {
        let mut m = PrefixMap::standard();
        m.insert("osmo", "http://emmc.info/vimmp/ontology/osmo#");
        m.insert("molmod", "https://example.org/molmod#");
        m.insert("emmo-models", "http://emmo.info/emmo/0.9.10/models#");
        m.insert("emmo-mereotopology", "http://emmo.info/emmo/0.9.10/mereotopology#");
        m
    }

    const AMMONIA: &str = r#"molmod:AMMONIA a osmo:einecs_listed_material;
   osmo:has_ec_number "231-635-3"^^xs:string.  # identifies ammonia
"#;

    #[test]
    fn ammonia_block_yields_two_triples() {
        let m = std_prefixes();
        let s = parse_turtle(AMMONIA, &m).unwrap();
        assert_eq!(s.len(), 2);
        let ec = m.expand_curie("osmo:has_ec_number").unwrap();
        let t = s.with_predicate(&ec).next().unwrap();
        assert_eq!(t.object, Object::Literal(Literal::string("231-635-3")));
        assert!(s.iter().any(|t| t.predicate == vocab::rdf_type()));
    }

    #[test]
    fn empty_document() {
        assert!(parse_turtle("", &PrefixMap::new()).unwrap().is_empty());
        assert!(parse_turtle("# only a comment\n", &PrefixMap::new()).unwrap().is_empty());
    }

    #[test]
    fn bracketed_blank_node_expands_commas() {
        let doc = "molmod:AMMONIA emmo-models:has_model [\n a emmo-models:physics_based_model;\n \
                   emmo-mereotopology:has_proper_part molmod:NH3_POTENTIAL,\n molmod:NH3_RIGID_UNIT\n ].";
        let s = parse_turtle(doc, &std_prefixes()).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.blank_labels().into_iter().collect::<Vec<_>>(), vec!["b0".to_string()]);
        let blank_subject = s.iter().filter(|t| t.subject == NodeRef::Blank("b0".into())).count();
        assert_eq!(blank_subject, 3);
    }

    #[test]
    fn decimal_survives_round_trip() {
        let m = std_prefixes();
        let s = parse_turtle("molmod:X osmo:is_decimal 2.5764.", &m).unwrap();
        let t = s.iter().next().unwrap();
        assert_eq!(t.object, Object::Literal(Literal::decimal("2.5764")));
        let text = serialize_turtle(&s, &m);
        assert!(text.contains(" 2.5764."), "{text}");
    }

    #[test]
    fn lists_match_expanded_form() {
        let m = std_prefixes();
        let compact = parse_turtle("molmod:A a osmo:x, osmo:y; osmo:p molmod:B.", &m).unwrap();
        let expanded = parse_turtle("molmod:A a osmo:x.\nmolmod:A a osmo:y.\nmolmod:A osmo:p molmod:B.", &m).unwrap();
        assert_eq!(compact, expanded);
    }

    #[test]
    fn errors_carry_position() {
        let m = std_prefixes();
        match parse_turtle("molmod:A a\n  nope:x.", &m) {
            Err(Error::Syntax { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("nope"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_turtle("molmod:A osmo:p ( molmod:B ).", &m), Err(Error::Syntax { .. })));
        assert!(matches!(parse_turtle("molmod:A osmo:p \"x\"@en.", &m), Err(Error::Syntax { .. })));
        assert!(matches!(parse_turtle("molmod:A osmo:p <rel>.", &m), Err(Error::Syntax { .. })));
        assert!(matches!(parse_turtle("molmod:A osmo:p \"\"\"x\"\"\".", &m), Err(Error::Syntax { .. })));
        assert!(matches!(parse_turtle("molmod:A osmo:p molmod:B", &m), Err(Error::Syntax { .. })));
    }

    #[test]
    fn empty_store_serializes_to_prefixes_only() {
        let m = std_prefixes();
        let text = serialize_turtle(&TripleStore::new(), &m);
        assert!(text.lines().all(|l| l.starts_with("@prefix")));
        assert_eq!(text.lines().count(), m.len());
    }

    #[test]
    fn blank_cycles_and_shared_blanks_round_trip() {
        let m = std_prefixes();
        let doc = "_:x osmo:p _:y. _:y osmo:p _:x. molmod:A osmo:q _:z. molmod:B osmo:q _:z.";
        let s = parse_turtle(doc, &m).unwrap();
        let text = serialize_turtle(&s, &m);
        let back = parse_turtle(&text, &m).unwrap();
        assert!(s.is_isomorphic(&back), "{text}");
    }

    #[test]
    fn string_escapes_round_trip() {
        let m = std_prefixes();
        let s = parse_turtle(r#"molmod:A osmo:n "a \"q\" \\ b"^^xs:string."#, &m).unwrap();
        let back = parse_turtle(&serialize_turtle(&s, &m), &m).unwrap();
        assert_eq!(s, back);
    }
}
