//! The `mu` command.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mu_core::kb::{load_kb, Severity};
use mu_core::network::{BeliefState, NodeKind, Observations, RawValue};
use mu_core::planner::DispositionKind;
use mu_core::query::{Direction, DiscriminationMode, EffectMode, Structural};

use crate::error::ServiceError;
use crate::kbs::KbRegistry;
use crate::manager::SessionManager;
use crate::protocol::{Ceiling, QueryRequest, Recommendation};
use crate::session::{new_session_id, no_persist, Session};

#[derive(Debug, Parser)]
#[command(name = "mu", version, about = "Consultations over qualitative inference networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a knowledge base.
    Validate {
        /// KB file, or the id of a bundled KB.
        kb: String,
    },
    /// Conduct a consultation at the terminal.
    Consult {
        kb: String,
        /// Prompt for each answer. Without it, answers are read line by line.
        #[arg(long)]
        interactive: bool,
        /// Write the trace document here when the session ends.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a workup against a patient profile.
    Run {
        kb: String,
        /// JSON object mapping finding ids to values.
        #[arg(long)]
        patient: PathBuf,
        /// Trace document output; `-` for stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        cycle_limit: usize,
    },
    /// Ask a control question about a KB under some observations.
    Query {
        kb: String,
        /// Observation to apply first; repeatable.
        #[arg(long = "observe", value_name = "FINDING=VALUE")]
        observe: Vec<String>,
        /// Apply every value of a patient profile first.
        #[arg(long)]
        patient: Option<PathBuf>,
        #[command(subcommand)]
        question: Question,
    },
    /// Serve the HTTP protocol under /v1.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of session event logs.
        #[arg(long)]
        data_dir: PathBuf,
        /// Extra KB file to offer; repeatable.
        #[arg(long = "kb")]
        kbs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Increase,
    Decrease,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Auto,
    Semantic,
    Heuristic,
}

#[derive(Debug, Subcommand)]
pub enum Question {
    /// Value of a parameter.
    State { node: String, parameter: String },
    /// Minimal findings that would move a node's belief.
    Change {
        target: String,
        #[arg(value_enum)]
        direction: DirectionArg,
        /// e.g. `monetary=low,risk=free`
        #[arg(long)]
        ceiling: Option<String>,
    },
    /// Nodes a finding can influence.
    Effect {
        finding: String,
        #[arg(long)]
        semantic: bool,
    },
    /// Evidence that separates two hypotheses.
    Discriminate {
        h1: String,
        h2: String,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
    },
    /// Nodes satisfying a predicate.
    Focus {
        #[arg(long)]
        kind: Option<String>,
        /// Parameter expression, e.g. `belief at-least supported`.
        #[arg(long)]
        condition: Option<String>,
        #[arg(long, conflicts_with = "detracts")]
        supports: Option<String>,
        #[arg(long)]
        detracts: Option<String>,
    },
}


enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { kb } => validate(&kb),
        Command::Consult { kb, interactive, trace } => {
            let (kbs, id) = registry_with(&kb)?;
            let stdin = std::io::stdin();
            let mut out = std::io::stdout();
            let session = consult(&kbs, &id, &mut stdin.lock(), &mut out, interactive)?;
            if let Some(path) = trace {
                write_json(&path, &session.trace())?;
            }
            Ok(())
        }
        Command::Run {
            kb,
            patient,
            trace,
            cycle_limit,
        } => {
            let (kbs, id) = registry_with(&kb)?;
            let patient = read_patient(&patient)?;
            let session = run_patient(&kbs, &id, &patient, cycle_limit)?;
            let doc = session.trace();
            emit(&format!("actions: {}", doc.trace.actions().join(", ")));
            if let Some(d) = &doc.trace.disposition {
                emit(&format!("disposition: {}", serde_json::to_string(d).expect("serializable")));
            }
            if let Some(path) = trace {
                write_json(&path, &doc)?;
            }
            Ok(())
        }
        Command::Query {
            kb,
            observe,
            patient,
            question,
        } => {
            let (kbs, id) = registry_with(&kb)?;
            let net = kbs.get(&id)?;
            let mut obs = Observations::new();
            if let Some(p) = patient {
                for (f, v) in read_patient(&p)? {
                    if let Some(v) = v {
                        obs.insert(f.clone(), net.normalize(&f, &v).map_err(ServiceError::from)?);
                    }
                }
            }
            for item in &observe {
                let (f, v) = item
                    .split_once('=')
                    .ok_or_else(|| Failure::Runtime(format!("`{item}` is not FINDING=VALUE")))?;
                obs.insert(f.to_string(), net.normalize(f, &RawValue::from(v)).map_err(ServiceError::from)?);
            }
            let state = BeliefState::with_observations(&net, obs).map_err(ServiceError::from)?;
            let request = question_request(question)?;
            let result = request.run(&net, &state)?;
            emit(&serde_json::to_string_pretty(&result).expect("serializable"));
            Ok(())
        }
        Command::Serve { port, data_dir, kbs } => {
            let mut registry = KbRegistry::bundled();
            for path in &kbs {
                registry.insert_file(path).map_err(|e| Failure::Invalid(e.to_string()))?;
            }
            let manager = SessionManager::open(registry, &data_dir)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::http::serve(manager, port))?;
            Ok(())
        }
    }
}

fn validate(kb: &str) -> Result<(), Failure> {
    let text = kb_text(kb)?;
    match load_kb(&text) {
        Ok(loaded) => {
            for w in &loaded.warnings {
                emit(&format!("{kb}:{w}"));
            }
            let net = &loaded.network;
            emit(&format!(
                "{kb}: ok ({} findings, {} clusters, {} hypotheses, {} links, {} actions)",
                net.of_kind(NodeKind::Finding).count(),
                net.of_kind(NodeKind::Cluster).count(),
                net.of_kind(NodeKind::Hypothesis).count(),
                net.links().len(),
                net.actions().len()
            ));
            Ok(())
        }
        Err(diags) => {
            for d in &diags {
                emit(&format!("{kb}:{d}"));
            }
            let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
            Err(Failure::Invalid(format!("{kb}: {errors} error(s)")))
        }
    }
}

/// Prints a line to stdout. A closed pipe is not an error.
fn emit(line: &str) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn kb_text(kb: &str) -> Result<String, Failure> {
    let path = Path::new(kb);
    if path.exists() {
        return Ok(std::fs::read_to_string(path)?);
    }
    mu_core::bundled::bundled(kb)
        .map(str::to_string)
        .ok_or_else(|| Failure::Runtime(format!("`{kb}` is neither a file nor a bundled KB")))
}

/// The bundled KBs plus `kb` if it is a file; returns the id to use.
fn registry_with(kb: &str) -> Result<(KbRegistry, String), Failure> {
    let mut kbs = KbRegistry::bundled();
    if !Path::new(kb).exists() {
        kbs.get(kb)?;
        return Ok((kbs, kb.to_string()));
    }
    let text = kb_text(kb)?;
    match kbs.insert_text(None, &text) {
        Ok(id) => Ok((kbs, id)),
        Err(diags) => {
            let lines: Vec<String> = diags.iter().map(|d| format!("{kb}:{d}")).collect();
            Err(Failure::Invalid(lines.join("\n")))
        }
    }
}

/// A patient profile: finding id → answer, `null` for unknown.
pub type Patient = BTreeMap<String, Option<RawValue>>;

pub fn read_patient(path: &Path) -> Result<Patient, ServiceError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| ServiceError::malformed(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    if path == Path::new("-") {
        emit(&text);
    } else {
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}

/// Drives an in-memory session with answers from a patient profile until it
/// terminates or `cycle_limit` actions have been taken.
pub fn run_patient(kbs: &KbRegistry, kb: &str, patient: &Patient, cycle_limit: usize) -> Result<Session, ServiceError> {
    let mut persist = no_persist();
    let mut session = Session::create(&new_session_id(), kb, kbs, &mut persist)?;
    let answer = |f: &str| patient.get(f).cloned().flatten();
    loop {
        match session.recommendation(&mut persist)?.recommendation {
            Recommendation::Terminal { .. } => break,
            Recommendation::Presenting { findings, .. } => {
                for f in findings {
                    session.record_finding(&f, answer(&f).as_ref(), &mut persist)?;
                }
            }
            Recommendation::Action { chosen, .. } => {
                if session.workup().trace().entries.len() >= cycle_limit {
                    session.terminate(DispositionKind::CycleLimitExceeded, &mut persist)?;
                    break;
                }
                let answers: Vec<(String, RawValue)> = chosen
                    .asks
                    .iter()
                    .filter_map(|f| answer(f).map(|v| (f.clone(), v)))
                    .collect();
                if answers.is_empty() {
                    session.record_finding(&chosen.asks[0], None, &mut persist)?;
                }
                for (f, v) in answers {
                    session.record_finding(&f, Some(&v), &mut persist)?;
                }
            }
        }
    }
    Ok(session)
}

/// The terminal prompt loop. Each answer line is a value for the finding
/// asked, blank or `?` for unknown, `FINDING=VALUE` to volunteer anything
/// else, or one of `:state`, `:why`, `:quit`.
pub fn consult(
    kbs: &KbRegistry,
    kb: &str,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    prompts: bool,
) -> Result<Session, ServiceError> {
    let mut persist = no_persist();
    let mut session = Session::create(&new_session_id(), kb, kbs, &mut persist)?;
    writeln!(out, "session {} on {kb}", session.id())?;
    'outer: loop {
        let rec = session.recommendation(&mut persist)?.recommendation;
        let (asks, rationale) = match &rec {
            Recommendation::Terminal { disposition } => {
                writeln!(
                    out,
                    "done ({}): confirmed [{}], disconfirmed [{}]",
                    serde_json::to_value(disposition.kind).expect("serializable").as_str().unwrap_or(""),
                    disposition.confirmed.join(", "),
                    disposition.disconfirmed.join(", ")
                )?;
                break;
            }
            Recommendation::Presenting { findings, rationale } => {
                writeln!(out, "presenting findings: {}", findings.join(", "))?;
                (findings.clone(), rationale.clone())
            }
            Recommendation::Action {
                focus,
                action,
                chosen,
                rationale,
                ..
            } => {
                writeln!(
                    out,
                    "focus {} ({}, {}); next {} {} costing {}",
                    focus.node,
                    focus.tier.name(),
                    focus.belief,
                    action.kind.keyword(),
                    action.id,
                    action.cost
                )?;
                (chosen.asks.clone(), rationale.clone())
            }
        };
        for f in asks {
            loop {
                if prompts {
                    let symbols = session
                        .network()
                        .index_of(&f)
                        .and_then(|i| session.network().domain(i))
                        .map(|d| d.symbols().join("|"))
                        .unwrap_or_default();
                    write!(out, "{f} [{symbols}]? ")?;
                    out.flush()?;
                }
                let mut line = String::new();
                if input.read_line(&mut line)? == 0 {
                    session.terminate(DispositionKind::NoUsefulAction, &mut persist)?;
                    writeln!(out, "input closed; session ended")?;
                    break 'outer;
                }
                let line = line.trim();
                let outcome = match line {
                    ":quit" | ":q" => {
                        session.terminate(DispositionKind::NoUsefulAction, &mut persist)?;
                        writeln!(out, "session ended")?;
                        break 'outer;
                    }
                    ":why" => {
                        writeln!(out, "{rationale}")?;
                        continue;
                    }
                    ":state" => {
                        for (node, level) in &session.state().beliefs {
                            writeln!(out, "  {node}: {level}")?;
                        }
                        continue;
                    }
                    "" | "?" => session.record_finding(&f, None, &mut persist),
                    _ => match line.split_once('=') {
                        Some((g, v)) => match session.record_finding(g.trim(), Some(&RawValue::from(v.trim())), &mut persist) {
                            Ok(r) => {
                                print_diff(out, &r.diff)?;
                                continue 'outer;
                            }
                            Err(e) => Err(e),
                        },
                        None => session.record_finding(&f, Some(&RawValue::from(line)), &mut persist),
                    },
                };
                match outcome {
                    Ok(r) => {
                        print_diff(out, &r.diff)?;
                        break;
                    }
                    Err(e) => writeln!(out, "error: {e}")?,
                }
            }
        }
    }
    Ok(session)
}

fn print_diff(out: &mut dyn Write, diff: &[mu_core::network::BeliefChange]) -> std::io::Result<()> {
    for c in diff {
        writeln!(out, "  {}: {} -> {}", c.node, c.old, c.new)?;
    }
    Ok(())
}

fn question_request(q: Question) -> Result<QueryRequest, Failure> {
    Ok(match q {
        Question::State { node, parameter } => QueryRequest::State { node, parameter },
        Question::Change {
            target,
            direction,
            ceiling,
        } => QueryRequest::Change {
            target,
            direction: match direction {
                DirectionArg::Increase => Direction::Increase,
                DirectionArg::Decrease => Direction::Decrease,
            },
            ceiling: ceiling.map(|c| parse_ceiling(&c)).transpose()?,
        },
        Question::Effect { finding, semantic } => QueryRequest::Effect {
            finding,
            mode: if semantic { EffectMode::Semantic } else { EffectMode::Syntactic },
        },
        Question::Discriminate { h1, h2, mode } => QueryRequest::Discriminate {
            h1,
            h2,
            mode: match mode {
                ModeArg::Auto => DiscriminationMode::Auto,
                ModeArg::Semantic => DiscriminationMode::Semantic,
                ModeArg::Heuristic => DiscriminationMode::Heuristic,
            },
        },
        Question::Focus {
            kind,
            condition,
            supports,
            detracts,
        } => QueryRequest::Focus {
            kind: kind
                .map(|k| k.parse::<NodeKind>().map_err(|e| Failure::Runtime(e.to_string())))
                .transpose()?,
            condition,
            structural: supports.map(Structural::Supports).or(detracts.map(Structural::Detracts)),
        },
    })
}

fn parse_ceiling(text: &str) -> Result<Ceiling, Failure> {
    let mut c = Ceiling::default();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (dim, grade) = part
            .split_once('=')
            .ok_or_else(|| Failure::Runtime(format!("`{part}` is not DIMENSION=GRADE")))?;
        let grade = grade.trim().parse().map_err(|e: mu_core::belief::UnknownName| Failure::Runtime(e.to_string()))?;
        match dim.trim() {
            "monetary" => c.monetary = Some(grade),
            "risk" => c.risk = Some(grade),
            "discomfort" => c.discomfort = Some(grade),
            other => return Err(Failure::Runtime(format!("unknown cost dimension `{other}`"))),
        }
    }
    Ok(c)
}
