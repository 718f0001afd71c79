//! Command-line front end and HTTP service for the alignment engine.

pub mod api;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use alignforge::alignment::keys_from_store;
use alignforge::analysis::{score_keys, tier_check};
use alignforge::engine::{classify_expressibility, Action, Decision, MoveKind, Phase};
use alignforge::prefix::PrefixMap;
use alignforge::rules::{check, materialize, parse_rules, RewriteRule};
use alignforge::scenario::{export_class_list, import_csv, ColumnMap, EdgeCodeTable, ScenarioGraph};
use alignforge::session::{load_scenario, Workspace, WorkspaceConfig};
use alignforge::taxonomy::Direction;
use alignforge::turtle::{parse_turtle_with_prefixes, serialize_turtle};
use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const FIXTURES_ENV: &str = "ALIGNFORGE_FIXTURES";

/// A problem with how the command was invoked; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "alignforge", version, about = "Human-steered ontology alignment")]
pub struct Cli {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Role {
    Source,
    Target,
}

#[derive(Args, Debug, Default)]
pub struct Inputs {
    /// Fixture directory with bundle.toml or *.ttl ontologies.
    #[arg(long, global = true, env = FIXTURES_ENV)]
    pub bundle: Option<PathBuf>,
    /// Scenario graph; pair each with --as.
    #[arg(long = "scenario", global = true)]
    pub scenarios: Vec<PathBuf>,
    /// Role of the matching --scenario.
    #[arg(long = "as", global = true, value_enum)]
    pub roles: Vec<Role>,
    /// Candidate hints, one `σ => τ` per line.
    #[arg(long, global = true)]
    pub hints: Option<PathBuf>,
    /// Rewrite rules file.
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Session log (JSON lines).
    #[arg(long, global = true)]
    pub session: Option<PathBuf>,
    /// Output directory (alignment export), file (rules-apply, import-csv)
    /// or session log directory (serve).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 8080)]
    pub port: u16,
    /// CSV column map; defaults to csv/colmap.toml in the bundle.
    #[arg(long, global = true)]
    pub colmap: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Relax,
    Strengthen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ActionArg {
    Accept,
    Discard,
    Apply,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a Turtle file and print it in canonical form.
    Parse { file: PathBuf },
    /// Print the class (or property) hierarchy.
    Taxonomy {
        /// Only the transitive reduction, one `sub ⊑ super` per line.
        #[arg(long)]
        reduce: bool,
        #[arg(long)]
        properties: bool,
    },
    /// List candidate correspondences.
    Candidates,
    /// Validity report for one candidate.
    Check { id: u32 },
    /// Moves for one candidate with their post-move verdicts.
    Suggest {
        id: u32,
        #[arg(long, value_enum, default_value = "relax")]
        phase: PhaseArg,
    },
    /// Record a decision in the session log.
    Decide {
        id: u32,
        #[arg(long, value_enum)]
        action: ActionArg,
        /// tau-generalization, sigma-refinement, sigma-generalization,
        /// tau-refinement or identification.
        #[arg(long = "move")]
        move_kind: Option<String>,
        #[arg(long)]
        term: Option<String>,
        #[arg(long)]
        reason: Option<String>,
    },
    /// OWL expressibility of one candidate.
    Classify { id: u32 },
    /// Write alignment.ttl and alignment.rules for the session.
    ExportAlignment,
    /// Check rules against the scenario graphs.
    RulesCheck,
    /// Materialize rules on the scenario graphs.
    RulesApply,
    /// Precision, recall and F-measure of an alignment against a reference.
    Metrics {
        #[arg(long)]
        alignment: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Conformance of lower-tier classes with the fundamental categories.
    TierCheck,
    /// Convert a flowchart CSV export to a Turtle scenario graph.
    ImportCsv { file: PathBuf },
    /// One line per individual with classes and relations.
    ExportClasslist { file: PathBuf },
    /// Run the HTTP JSON API.
    Serve {
        /// Directory with the workbench's static assets.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Replay a session log and write its alignment artifacts.
    Replay,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl Inputs {
    pub fn bundle_dir(&self) -> Result<PathBuf> {
        let dir = self.bundle.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
        if !dir.is_dir() {
            return Err(usage(format!(
                "fixture directory {} not found (use --bundle or {FIXTURES_ENV})",
                dir.display()
            )));
        }
        Ok(dir)
    }

    fn existing(&self, p: &Path) -> Result<PathBuf> {
        if p.exists() {
            Ok(p.to_path_buf())
        } else {
            Err(usage(format!("{} not found", p.display())))
        }
    }

    pub fn config(&self) -> Result<WorkspaceConfig> {
        let mut cfg = WorkspaceConfig::from_dir(&self.bundle_dir()?)?;
        if !self.scenarios.is_empty() {
            if self.roles.len() != self.scenarios.len() {
                return Err(usage("every --scenario needs an --as source|target"));
            }
            cfg.pairs.clear();
            let (mut source, mut target) = (None, None);
            for (path, role) in self.scenarios.iter().zip(&self.roles) {
                let path = self.existing(path)?;
                match role {
                    Role::Source => source = Some(path),
                    Role::Target => target = Some(path),
                }
                if let (Some(s), Some(t)) = (&source, &target) {
                    cfg.pairs.push((format!("pair{}", cfg.pairs.len() + 1), s.clone(), t.clone()));
                    source = None;
                    target = None;
                }
            }
            if source.is_some() || target.is_some() {
                return Err(usage("scenarios must come in source/target pairs"));
            }
        }
        if let Some(h) = &self.hints {
            cfg.hints = Some(self.existing(h)?);
        }
        if let Some(r) = &self.rules {
            cfg.rules = Some(self.existing(r)?);
        }
        Ok(cfg)
    }

    /// Workspace with the session log (if any) replayed.
    pub fn workspace(&self) -> Result<Workspace> {
        let mut ws = Workspace::open(&self.config()?)?;
        if let Some(path) = &self.session {
            if path.exists() {
                let log = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ws.replay(&log)?;
            }
        }
        Ok(ws)
    }

    fn session_path(&self) -> Result<&Path> {
        self.session.as_deref().ok_or_else(|| usage("--session FILE is required"))
    }

    fn existing_session(&self) -> Result<&Path> {
        let p = self.session_path()?;
        if !p.exists() {
            return Err(usage(format!("{} not found", p.display())));
        }
        Ok(p)
    }
}

fn json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Writes the alignment artifacts to `out` (or returns them for stdout).
fn write_artifacts(ws: &Workspace, out: Option<&Path>) -> Result<String> {
    let (ttl, rules) = ws.artifacts()?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("alignment.ttl"), &ttl)?;
            fs::write(dir.join("alignment.rules"), &rules)?;
            let n = parse_rules(&rules, &ws.ctx.prefixes)?.len();
            let stmts = ws.alignment()?.owl.len();
            Ok(format!(
                "wrote {} ({stmts} statements) and {} ({n} rules)\n",
                dir.join("alignment.ttl").display(),
                dir.join("alignment.rules").display()
            ))
        }
        None => Ok(format!("{ttl}\n{rules}")),
    }
}

/// Scenario graphs named on the command line, or every loaded pair, merged.
fn scenario_graph(inputs: &Inputs, ws: &Workspace) -> Result<(ScenarioGraph, PrefixMap)> {
    let mut bundle = ws.ctx.bundle.clone();
    bundle.prefixes = ws.ctx.prefixes.clone();
    let mut g = ScenarioGraph::new();
    if inputs.scenarios.is_empty() {
        for p in &ws.ctx.pairs {
            g = g.merge(&p.source).merge(&p.target);
        }
    } else {
        for s in &inputs.scenarios {
            g = g.merge(&load_scenario(&mut bundle, &inputs.existing(s)?)?);
        }
    }
    Ok((g, bundle.prefixes))
}

fn rule_set(inputs: &Inputs, ws: &Workspace) -> Result<Vec<RewriteRule>> {
    if ws.rules.is_empty() && inputs.rules.is_none() {
        return Err(usage("no rules: pass --rules FILE"));
    }
    Ok(ws.rules.clone())
}

fn load_csv(inputs: &Inputs, file: &Path, prefixes: &PrefixMap) -> Result<ScenarioGraph> {
    let colmap_path = match &inputs.colmap {
        Some(p) => inputs.existing(p)?,
        None => inputs.bundle_dir()?.join("csv/colmap.toml"),
    };
    let colmap = ColumnMap::from_toml(
        &fs::read_to_string(&colmap_path).with_context(|| format!("reading {}", colmap_path.display()))?,
    )?;
    let doc = fs::read_to_string(inputs.existing(file)?)?;
    Ok(import_csv(&doc, &EdgeCodeTable::default(), &colmap, prefixes)?)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RuleOutcome<'a> {
    rule: &'a str,
    bindings: usize,
    violated: Vec<std::collections::BTreeMap<String, String>>,
}

/// Runs one command and returns its standard output. Returns the exit
/// status to use when the command itself reports a failed check.
pub fn run(cli: &Cli) -> Result<(String, i32)> {
    let inputs = &cli.inputs;
    let out = match &cli.command {
        Command::Parse { file } => {
            let text = fs::read_to_string(inputs.existing(file)?)?;
            let (store, prefixes) = parse_turtle_with_prefixes(&text, &PrefixMap::standard())?;
            serialize_turtle(&store, &prefixes)
        }
        Command::Taxonomy { reduce, properties } => {
            let (bundle, _) = alignforge::bundle::OntologyBundle::load_dir(&inputs.bundle_dir()?)?;
            let t = bundle.taxonomy()?;
            let p = &bundle.prefixes;
            let lattices =
                if *properties { vec![&t.object_properties, &t.datatype_properties] } else { vec![&t.classes] };
            let mut s = String::new();
            for l in lattices {
                if *reduce {
                    for (a, b) in l.transitive_reduction() {
                        s += &format!("{} ⊑ {}\n", p.display(&a), p.display(&b));
                    }
                } else {
                    for iri in l.iris().filter(|i| !l.is_top(i)) {
                        let up: Vec<String> = l.neighbors(iri, Direction::Up).iter().map(|u| p.display(u)).collect();
                        s += &format!("{}: {}\n", p.display(iri), up.join(", "));
                    }
                }
            }
            s
        }
        Command::Candidates => {
            let ws = inputs.workspace()?;
            for w in &ws.warnings {
                eprintln!("warning: {w}");
            }
            ws.candidates
                .iter()
                .map(|c| {
                    format!(
                        "{:>3} {:<12} {}  # {}\n",
                        c.id,
                        format!("{:?}", c.status).to_lowercase(),
                        c.to_text(&ws.ctx.prefixes),
                        c.provenance
                    )
                })
                .collect()
        }
        Command::Check { id } => json(&inputs.workspace()?.check(*id)?),
        Command::Suggest { id, phase } => {
            let phase = match phase {
                PhaseArg::Relax => Phase::Relax,
                PhaseArg::Strengthen => Phase::Strengthen,
            };
            json(&inputs.workspace()?.suggest(*id, phase)?)
        }
        Command::Decide { id, action, move_kind, term, reason } => {
            let path = inputs.session_path()?.to_path_buf();
            let mut ws = inputs.workspace()?;
            let decision = match action {
                ActionArg::Accept => Decision::Accept,
                ActionArg::Discard => Decision::Discard { reason: reason.clone() },
                ActionArg::Apply => {
                    let name = move_kind.as_deref().ok_or_else(|| usage("--action apply needs --move KIND"))?;
                    let kind = MoveKind::from_name(name).ok_or_else(|| usage(format!("unknown move kind {name}")))?;
                    Decision::Apply { kind, term: term.clone() }
                }
            };
            ws.persist_to(path);
            let c = ws.decide(*id, &decision, now())?;
            json(c)
        }
        Command::Classify { id } => {
            let ws = inputs.workspace()?;
            json(&classify_expressibility(ws.candidate(*id)?, &ws.ctx.taxonomy))
        }
        Command::ExportAlignment => {
            inputs.existing_session()?;
            write_artifacts(&inputs.workspace()?, inputs.out.as_deref())?
        }
        Command::Replay => {
            inputs.existing_session()?;
            let ws = inputs.workspace()?;
            let mut s = String::new();
            for c in &ws.candidates {
                let state = match (c.merged_into, c.status) {
                    (Some(m), _) => format!("merged into {m}"),
                    (None, st) => format!("{st:?}").to_lowercase(),
                };
                s += &format!("{:>3} {state}: {}\n", c.id, c.to_text(&ws.ctx.prefixes));
            }
            s + &write_artifacts(&ws, inputs.out.as_deref())?
        }
        Command::RulesCheck => {
            let ws = inputs.workspace()?;
            let rules = rule_set(inputs, &ws)?;
            let (g, prefixes) = scenario_graph(inputs, &ws)?;
            let mut failed = false;
            let outcomes: Vec<RuleOutcome> = rules
                .iter()
                .map(|r| {
                    let m = check(r, &g, &ws.ctx.taxonomy);
                    failed |= !m.all_satisfied();
                    RuleOutcome {
                        rule: &r.name,
                        bindings: m.bindings.len(),
                        violated: m
                            .violated()
                            .map(|b| {
                                b.iter()
                                    .map(|(k, v)| (k.clone(), alignforge::engine::node_text(v, &prefixes)))
                                    .collect()
                            })
                            .collect(),
                    }
                })
                .collect();
            return Ok((json(&outcomes), i32::from(failed)));
        }
        Command::RulesApply => {
            let ws = inputs.workspace()?;
            let rules = rule_set(inputs, &ws)?;
            let (mut g, prefixes) = scenario_graph(inputs, &ws)?;
            let mut reports = Vec::new();
            for r in &rules {
                let (next, report) = materialize(r, &g, &ws.ctx.taxonomy);
                g = next;
                reports.push(report);
            }
            let ttl = serialize_turtle(&g.to_triples(), &prefixes);
            match &inputs.out {
                Some(path) => {
                    fs::write(path, ttl).with_context(|| format!("writing {}", path.display()))?;
                    json(&reports)
                }
                None => ttl,
            }
        }
        Command::Metrics { alignment, reference } => {
            let read = |p: &Path| -> Result<_> {
                let text = fs::read_to_string(inputs.existing(p)?)?;
                Ok(parse_turtle_with_prefixes(&text, &PrefixMap::standard())?.0)
            };
            let a = keys_from_store(&read(alignment)?);
            let r = keys_from_store(&read(reference)?);
            score_keys(&a, &r).to_text()
        }
        Command::TierCheck => {
            let (bundle, _) = alignforge::bundle::OntologyBundle::load_dir(&inputs.bundle_dir()?)?;
            let report = tier_check(&bundle, &bundle.taxonomy()?);
            let code = i32::from(!report.violations.is_empty());
            return Ok((json(&report), code));
        }
        Command::ImportCsv { file } => {
            let (bundle, _) = alignforge::bundle::OntologyBundle::load_dir(&inputs.bundle_dir()?)?;
            let g = load_csv(inputs, file, &bundle.prefixes)?;
            let ttl = serialize_turtle(&g.to_triples(), &bundle.prefixes);
            match &inputs.out {
                Some(path) => {
                    fs::write(path, ttl)?;
                    format!("{} nodes, {} edges\n", g.node_count(), g.edges().len())
                }
                None => ttl,
            }
        }
        Command::ExportClasslist { file } => {
            let (mut bundle, _) = alignforge::bundle::OntologyBundle::load_dir(&inputs.bundle_dir()?)?;
            let g = if file.extension().is_some_and(|e| e == "csv") {
                load_csv(inputs, file, &bundle.prefixes)?
            } else {
                load_scenario(&mut bundle, &inputs.existing(file)?)?
            };
            export_class_list(&g, &bundle.taxonomy()?, &bundle.prefixes)
        }
        Command::Serve { static_dir } => {
            let ws = inputs.workspace()?;
            let state = api::AppState::new(ws.restart(), inputs.out.clone(), static_dir.clone());
            if let Some(path) = &inputs.session {
                let mut resumed = ws;
                resumed.persist_to(path);
                eprintln!("session {} resumed from {}", state.adopt(resumed), path.display());
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(api::serve(state, inputs.port))?;
            String::new()
        }
    };
    Ok((out, 0))
}

/// Decision record as accepted by the service; same fields as a log line.
pub fn decision_from_parts(
    action: Action,
    move_kind: Option<MoveKind>,
    term: Option<String>,
    reason: Option<String>,
) -> Result<Decision, String> {
    Ok(match action {
        Action::Accept => Decision::Accept,
        Action::Discard => Decision::Discard { reason },
        Action::Apply => Decision::Apply { kind: move_kind.ok_or("apply needs moveKind")?, term },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("alignforge").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn scenarios_must_pair_up() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.ttl");
        fs::write(&f, "").unwrap();
        let f = f.to_str().unwrap();
        let d = dir.path().to_str().unwrap();
        let cli = parse(&["--bundle", d, "--scenario", f, "--as", "source", "candidates"]);
        let err = cli.inputs.config().unwrap_err();
        assert!(err.downcast_ref::<Usage>().is_some());

        let cli =
            parse(&["--bundle", d, "--scenario", f, "--as", "target", "--scenario", f, "--as", "source", "candidates"]);
        let cfg = cli.inputs.config().unwrap();
        assert_eq!(cfg.pairs.len(), 1);
        assert_eq!(cfg.pairs[0].0, "pair1");
    }

    #[test]
    fn apply_needs_a_move_kind() {
        assert!(decision_from_parts(Action::Apply, None, None, None).is_err());
        assert_eq!(decision_from_parts(Action::Accept, None, None, None), Ok(Decision::Accept));
    }
}
