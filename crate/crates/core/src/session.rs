//! A workspace (bundle, scenario pairs, hints, rules) with one alignment
//! session on top: the candidate queue, the decisions taken so far and the
//! append-only log that reproduces them.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alignment::AlignmentSet;
use crate::bundle::{Manifest, OntologyBundle, Tier};
use crate::engine::{
    apply_decision, check_validity, generate_candidates, parse_hints, propose_moves, Action, Context, Correspondence,
    Decision, Hint, MoveKind, Phase, Proposal, ScenarioPair, Status, ValidityReport,
};
use crate::error::{Error, Result};
use crate::rules::{parse_rules, RewriteRule};
use crate::scenario::ScenarioGraph;
use crate::turtle::parse_turtle_with_prefixes;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogRecord {
    pub step: usize,
    pub candidate_id: u32,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_kind: Option<MoveKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub timestamp: String,
}

impl LogRecord {
    pub fn decision(&self) -> Result<Decision> {
        Ok(match self.action {
            Action::Accept => Decision::Accept,
            Action::Discard => Decision::Discard { reason: self.reason.clone() },
            Action::Apply => Decision::Apply {
                kind: self
                    .move_kind
                    .ok_or_else(|| Error::SessionLog { line: self.step, message: "apply without moveKind".into() })?,
                term: self.term_text.clone(),
            },
        })
    }

    fn new(step: usize, candidate_id: u32, d: &Decision, timestamp: String) -> Self {
        let mut r = LogRecord {
            step,
            candidate_id,
            action: Action::Accept,
            move_kind: None,
            term_text: None,
            reason: None,
            timestamp,
        };
        match d {
            Decision::Accept => {}
            Decision::Discard { reason } => {
                r.action = Action::Discard;
                r.reason = reason.clone();
            }
            Decision::Apply { kind, term } => {
                r.action = Action::Apply;
                r.move_kind = Some(*kind);
                r.term_text = term.clone();
            }
        }
        r
    }
}

/// Where to find the pieces of a workspace.
#[derive(Clone, Debug, Default)]
pub struct WorkspaceConfig {
    pub bundle_dir: PathBuf,
    pub pairs: Vec<(String, PathBuf, PathBuf)>,
    pub hints: Option<PathBuf>,
    pub rules: Option<PathBuf>,
}

impl WorkspaceConfig {
    /// Defaults from `dir/bundle.toml`, if present.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut cfg = WorkspaceConfig { bundle_dir: dir.to_path_buf(), ..Default::default() };
        let manifest = dir.join(Manifest::FILE_NAME);
        if manifest.exists() {
            let m = Manifest::read(&manifest)?;
            cfg.pairs =
                m.scenario_pair.iter().map(|p| (p.name.clone(), dir.join(&p.source), dir.join(&p.target))).collect();
            cfg.hints = m.workspace.hints.map(|h| dir.join(h));
            cfg.rules = m.workspace.rules.map(|r| dir.join(r));
        }
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_scenario(bundle: &mut OntologyBundle, path: &Path) -> Result<ScenarioGraph> {
    let (store, prefixes) = parse_turtle_with_prefixes(&read(path)?, &bundle.prefixes)?;
    bundle.prefixes.merge(&prefixes)?;
    Ok(ScenarioGraph::from_triples(&store))
}

#[derive(Clone, Debug)]
pub struct Workspace {
    pub ctx: Context,
    pub hints: Vec<Hint>,
    pub rules: Vec<RewriteRule>,
    pub candidates: Vec<Correspondence>,
    pub warnings: Vec<String>,
    pub log: Vec<LogRecord>,
    accepted: Vec<u32>,
    log_path: Option<PathBuf>,
}

impl Workspace {
    pub fn open(cfg: &WorkspaceConfig) -> Result<Self> {
        let (mut bundle, _) = OntologyBundle::load_dir(&cfg.bundle_dir)?;
        let mut pairs = Vec::new();
        for (name, s, t) in &cfg.pairs {
            let source = load_scenario(&mut bundle, s)?;
            let target = load_scenario(&mut bundle, t)?;
            pairs.push(ScenarioPair { name: name.clone(), source, target });
        }
        let hints = match &cfg.hints {
            Some(p) => parse_hints(&read(p)?, &bundle.prefixes)?,
            None => Vec::new(),
        };
        let rules = match &cfg.rules {
            Some(p) => parse_rules(&read(p)?, &bundle.prefixes)?,
            None => Vec::new(),
        };
        Ok(Self::new(Context::new(bundle, pairs)?, hints, rules))
    }

    pub fn new(ctx: Context, hints: Vec<Hint>, rules: Vec<RewriteRule>) -> Self {
        let (candidates, warnings) = generate_candidates(&ctx, &hints);
        Workspace { ctx, hints, rules, candidates, warnings, log: Vec::new(), accepted: Vec::new(), log_path: None }
    }

    /// Fresh session over the same inputs.
    pub fn restart(&self) -> Self {
        Self::new(self.ctx.clone(), self.hints.clone(), self.rules.clone())
    }

    /// Persists every later decision to `path` before it takes effect.
    pub fn persist_to(&mut self, path: impl Into<PathBuf>) {
        self.log_path = Some(path.into());
    }

    pub fn candidate(&self, id: u32) -> Result<&Correspondence> {
        self.candidates.iter().find(|c| c.id == id).ok_or(Error::UnknownCandidate(id))
    }

    /// Accepted correspondences in acceptance order, merged duplicates excluded.
    pub fn accepted(&self) -> Vec<&Correspondence> {
        self.accepted
            .iter()
            .filter_map(|id| self.candidates.iter().find(|c| c.id == *id))
            .filter(|c| c.merged_into.is_none())
            .collect()
    }

    pub fn check(&self, id: u32) -> Result<ValidityReport> {
        check_validity(&self.ctx, &self.accepted(), self.candidate(id)?)
    }

    pub fn suggest(&self, id: u32, phase: Phase) -> Result<Vec<Proposal>> {
        propose_moves(&self.ctx, &self.accepted(), self.candidate(id)?, phase)
    }

    pub fn decide(&mut self, id: u32, d: &Decision, timestamp: impl Into<String>) -> Result<&Correspondence> {
        let next = apply_decision(&self.ctx, &self.accepted(), self.candidate(id)?, d)?;
        let record = LogRecord::new(self.log.len() + 1, id, d, timestamp.into());
        if let Some(path) = &self.log_path {
            let line = serde_json::to_string(&record).expect("log records serialize");
            let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
            writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
        }
        if next.status == Status::Accepted {
            self.accepted.push(id);
        }
        let slot = self.candidates.iter_mut().find(|c| c.id == id).expect("candidate exists");
        *slot = next;
        self.log.push(record);
        Ok(slot)
    }

    /// Applies every record of a JSONL session log in order.
    pub fn replay(&mut self, doc: &str) -> Result<()> {
        for (i, line) in doc.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let at = |message: String| Error::SessionLog { line: i + 1, message };
            let record: LogRecord = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
            if record.step != self.log.len() + 1 {
                return Err(at(format!("expected step {}, found {}", self.log.len() + 1, record.step)));
            }
            let d = record.decision().map_err(|e| at(e.to_string()))?;
            self.decide(record.candidate_id, &d, record.timestamp.clone()).map_err(|e| at(e.to_string()))?;
        }
        Ok(())
    }

    pub fn log_jsonl(&self) -> String {
        self.log.iter().map(|r| serde_json::to_string(r).expect("log records serialize") + "\n").collect()
    }

    pub fn alignment(&self) -> Result<AlignmentSet> {
        let (target, source): (Vec<_>, Vec<_>) = self.ctx.bundle.ontologies.iter().partition(|o| o.tier == Tier::Top);
        AlignmentSet::build(
            self.accepted(),
            &self.ctx.taxonomy,
            source.iter().map(|o| o.name.clone()).collect(),
            target.iter().map(|o| o.name.clone()).collect(),
        )
    }

    /// Turtle and rules text of the current alignment.
    pub fn artifacts(&self) -> Result<(String, String)> {
        let a = self.alignment()?;
        Ok((a.to_turtle(&self.ctx.taxonomy, &self.ctx.prefixes), a.rules_text(&self.ctx.prefixes)))
    }
}
