//! Command-line front end: parses arguments, loads the group, runs one
//! subcommand and renders its result as text or as a JSON document.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use ceinv_core::invariants::{big_to_json, check_relations, group_to_json, Delta1Report};
use ceinv_core::relations::{format_relations, format_sidecar, relation_matrix};
use ceinv_core::{
    build_universe, canonicalize, compute_universal_truncation, equivalent, evaluate_trace, generate_relations,
    is_one_sided, AbelianElement, Assignment, Eq3, EquivEvidence, Equivalence, Error, EventTrace, FgAbelianGroup,
    GroupContext, Kind, Radius, RelationKind, SymbolTuple, SymbolUniverse, UniverseConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Exit status for malformed input or configuration.
pub const EXIT_INPUT: i32 = 2;
/// Exit status when a configured resource limit is exceeded.
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ceinv", version, about = "Symbol calculus for order-one invariants of surface immersions")]
pub struct Cli {
    #[command(flatten)]
    pub config: JobConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Doc,
}

#[derive(Debug, Args)]
pub struct JobConfig {
    /// Group specification: a JSON file path, or inline JSON starting with `{`.
    /// Defaults to the trivial group.
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Ball radius for universe entries and degree support (`inf` for a whole
    /// finite group). Defaults to `inf` for finite groups and 1 otherwise.
    #[arg(long, global = true)]
    pub ball: Option<Radius>,
    /// Degree coefficients range over `[-C, C]`.
    #[arg(long, global = true, default_value_t = 0)]
    pub coeff: u32,
    /// Symbol kinds of the universe, e.g. `EH`.
    #[arg(long, global = true, default_value = "EHTQ")]
    pub kinds: String,
    /// Word radius of fp witness searches.
    #[arg(long, global = true, default_value_t = 2)]
    pub radius: usize,
    /// `text` for reading, `doc` for a JSON document.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Cap on raw symbols and classes; exceeding it exits with status 3.
    #[arg(long, global = true, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_universe: u64,
    /// Cap on generated relations; exceeding it exits with status 3.
    #[arg(long, global = true, default_value_t = 2_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_relations: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical form of a symbol or `[S1; S2; ...]` tuple.
    Canon { tuple: String },
    /// Decide whether two tuples are equivalent.
    Equiv { a: String, b: String },
    /// Decide whether the stratum of an H or Q symbol is one-sided.
    OneSided { symbol: String },
    /// Relations among the universe classes, one `kind | c*idx ...` line each.
    Relations {
        /// Also write the relation matrix as coordinate triplets.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Also write the `index symbol` table.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Structure of the truncated universal group and the universal assignment.
    Universal,
    /// Check an assignment against every relation of the universe.
    Delta1 { assignment: PathBuf },
    /// Evaluate an event trace under an assignment (the universal one by default).
    Trace {
        trace: PathBuf,
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::ResourceLimit(_)) { EXIT_LIMIT } else { EXIT_INPUT };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_INPUT, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError { code: EXIT_INPUT, message: format!("{}: {e}", path.display()) })
}

impl JobConfig {
    pub fn context(&self) -> Result<GroupContext, CliError> {
        match self.group.as_deref().map(str::trim) {
            None => Ok(GroupContext::trivial()),
            Some(text) if text.starts_with('{') => Ok(GroupContext::parse(text)?),
            Some(path) => Ok(GroupContext::parse(&read(Path::new(path))?)?),
        }
    }

    pub fn universe_config(&self, ctx: &GroupContext) -> Result<UniverseConfig, CliError> {
        let radius = self.ball.unwrap_or(if ctx.order().is_some() { Radius::Infinite } else { Radius::Finite(1) });
        let mut cfg = UniverseConfig::new(radius, self.coeff, &Kind::parse_set(&self.kinds)?);
        cfg.search_radius = self.radius;
        cfg.max_size = self.max_universe.try_into().unwrap_or(usize::MAX);
        Ok(cfg)
    }

    fn universe(&self, ctx: &GroupContext) -> Result<SymbolUniverse, CliError> {
        Ok(build_universe(ctx, &self.universe_config(ctx)?)?)
    }

    fn max_relations(&self) -> usize {
        self.max_relations.try_into().unwrap_or(usize::MAX)
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// the payload to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
        CliError { code, message: e.to_string() }
    })?;
    let payload = execute(&cli)?;
    out.write_all(payload.as_bytes())?;
    Ok(())
}

fn render(format: Format, text: String, doc: Value) -> String {
    match format {
        Format::Text => text,
        Format::Doc => serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n",
    }
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = &cli.config;
    let ctx = cfg.context()?;
    match &cli.command {
        Command::Canon { tuple } => {
            let t = SymbolTuple::parse(&ctx, tuple)?;
            let c = canonicalize(&ctx, &t, cfg.radius)?;
            let shown = if c.tuple.len() == 1 { c.tuple.symbols()[0].format(&ctx) } else { c.tuple.format(&ctx) };
            let hex: String = c.encoding.iter().map(|b| format!("{b:02x}")).collect();
            Ok(render(
                cfg.format,
                format!("{shown}\nstatus: {}\n", c.status),
                json!({ "canonical": shown, "status": c.status.to_string(), "encoding": hex }),
            ))
        }
        Command::Equiv { a, b } => {
            let (a, b) = (SymbolTuple::parse(&ctx, a)?, SymbolTuple::parse(&ctx, b)?);
            Ok(verdict_payload(&ctx, cfg.format, &equivalent(&ctx, &a, &b, cfg.radius)?))
        }
        Command::OneSided { symbol } => {
            let s = ceinv_core::Symbol::parse(&ctx, symbol)?;
            Ok(verdict_payload(&ctx, cfg.format, &is_one_sided(&ctx, &s, cfg.radius)?))
        }
        Command::Relations { matrix, sidecar } => {
            let u = cfg.universe(&ctx)?;
            let rels = generate_relations(&u, &RelationKind::ALL, cfg.max_relations())?;
            if let Some(path) = matrix {
                std::fs::write(path, relation_matrix(&u, &rels)?.to_string())?;
            }
            if let Some(path) = sidecar {
                std::fs::write(path, format_sidecar(&u))?;
            }
            let doc = json!({
                "window": window_doc(&u),
                "symbols": u.symbols().iter().map(|s| s.format(&ctx)).collect::<Vec<_>>(),
                "relations": rels.iter().map(|r| json!({ "kind": r.kind.name(), "provenance": r.provenance, "terms": r.terms })).collect::<Vec<_>>(),
            });
            Ok(render(cfg.format, format_relations(&rels), doc))
        }
        Command::Universal => {
            let gu = compute_universal_truncation(cfg.universe(&ctx)?, cfg.max_relations())?;
            let u = &gu.universe;
            let mut text = window_text(u);
            writeln!(text, "universe: {} symbols", u.len()).unwrap();
            writeln!(text, "relations: {}", gu.relations.len()).unwrap();
            writeln!(text, "group: {}", gu.group).unwrap();
            writeln!(text, "free_rank: {}", gu.group.free_rank).unwrap();
            writeln!(text, "torsion: [{}]", join(gu.group.torsion.iter())).unwrap();
            text.push_str("gU:\n");
            for (s, v) in u.symbols().iter().zip(&gu.g_u.values) {
                writeln!(text, "  {} -> {v}", s.format(&ctx)).unwrap();
            }
            let doc = json!({
                "window": window_doc(u),
                "universe_size": u.len(),
                "relation_count": gu.relations.len(),
                "group": group_to_json(&gu.group),
                "assignment": gu.g_u.to_json(u),
            });
            Ok(render(cfg.format, text, doc))
        }
        Command::Delta1 { assignment } => {
            let u = cfg.universe(&ctx)?;
            let a = load_assignment(&u, &read(assignment)?)?;
            let rels = generate_relations(&u, &RelationKind::ALL, cfg.max_relations())?;
            let report = check_relations(&a, &rels)?;
            Ok(delta1_payload(cfg.format, &u, &a.target, rels.len(), &report))
        }
        Command::Trace { trace, assignment } => {
            let u = cfg.universe(&ctx)?;
            let events = EventTrace::parse(&ctx, &read(trace)?)?;
            let (u, a) = match assignment {
                Some(path) => {
                    let a = load_assignment(&u, &read(path)?)?;
                    (u, a)
                }
                None => {
                    let gu = compute_universal_truncation(u, cfg.max_relations())?;
                    (gu.universe, gu.g_u)
                }
            };
            let value = evaluate_trace(&events, &a, &u)?;
            let text = format!("group: {}\nevents: {}\nvalue: {value}\n", a.target, events.events.len());
            let doc = json!({
                "window": window_doc(&u),
                "target": group_to_json(&a.target),
                "events": events.events.len(),
                "value": element_doc(&value),
            });
            Ok(render(cfg.format, text, doc))
        }
    }
}

/// Accepts a bare assignment document or a `universal` report containing one.
fn load_assignment(u: &SymbolUniverse, text: &str) -> Result<Assignment, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError { code: EXIT_INPUT, message: format!("assignment: {e}") })?;
    let inner = doc.get("assignment").unwrap_or(&doc);
    Ok(Assignment::from_json(u, &inner.to_string())?)
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn element_doc(x: &AbelianElement) -> Value {
    Value::Array(x.coords().iter().map(big_to_json).collect())
}

fn window_text(u: &SymbolUniverse) -> String {
    let c = u.config();
    let kinds: String = c.kinds.iter().map(|k| k.as_char()).collect();
    format!("window: ball={} coeff={} kinds={} status={}\n", c.radius, c.coeff_bound, kinds, u.status())
}

fn window_doc(u: &SymbolUniverse) -> Value {
    let c = u.config();
    json!({
        "ball": c.radius.to_string(),
        "coeff": c.coeff_bound,
        "kinds": c.kinds.iter().map(|k| k.as_char()).collect::<String>(),
        "status": u.status().to_string(),
        "truncated": true,
    })
}

fn verdict_name(v: Eq3) -> &'static str {
    match v {
        Eq3::True => "true",
        Eq3::False => "false",
        Eq3::Unknown => "unknown",
    }
}

fn evidence_name(e: EquivEvidence) -> String {
    match e {
        EquivEvidence::Witness => "witness".into(),
        EquivEvidence::CanonicalForms => "canonical-forms".into(),
        EquivEvidence::SignPattern => "sign-pattern".into(),
        EquivEvidence::Quotient(q) => format!("quotient {q}"),
        EquivEvidence::Exhausted => "search-exhausted".into(),
    }
}

fn verdict_payload(ctx: &GroupContext, format: Format, r: &Equivalence) -> String {
    let mut text = format!("verdict: {}\nevidence: {}\n", verdict_name(r.verdict), evidence_name(r.evidence));
    let mut doc = json!({ "verdict": verdict_name(r.verdict), "evidence": evidence_name(r.evidence) });
    if let Some(w) = &r.witness {
        writeln!(text, "witness: {}", w.format(ctx)).unwrap();
        doc["witness"] = json!({
            "h": ctx.format(&w.left),
            "k": w.right.iter().map(|k| ctx.format(k)).collect::<Vec<_>>(),
            "tuple_perm": w.tuple_perm,
            "entry_perms": w.entry_perms,
        });
    }
    render(format, text, doc)
}

fn delta1_payload(format: Format, u: &SymbolUniverse, target: &FgAbelianGroup, checked: usize, r: &Delta1Report) -> String {
    let verdict = if r.pass { "pass" } else { "fail" };
    let mut text = window_text(u);
    writeln!(text, "target: {target}\nrelations checked: {checked}\nverdict: {verdict}\nviolations: {}", r.violations.len()).unwrap();
    for (rel, residue) in &r.violations {
        writeln!(text, "  {} => {residue}", rel.format()).unwrap();
    }
    let doc = json!({
        "window": window_doc(u),
        "target": group_to_json(target),
        "relations_checked": checked,
        "verdict": verdict,
        "violations": r.violations.iter().map(|(rel, v)| json!({
            "relation": rel.format(),
            "provenance": rel.provenance,
            "residue": element_doc(v),
        })).collect::<Vec<_>>(),
    });
    render(format, text, doc)
}
