//! Command implementations behind the `streamsec` binary. Each command
//! returns its output and exit code instead of printing, so tests can call
//! them directly.

use std::fmt::Write as _;
use std::path::Path;

use crate::component::{check_interfaces, compose, run, Composite, RunError, StepError, Trace};
use crate::message::MsgType;
use crate::scenario::{parse_params, parse_scenario, Scenario};
use crate::stream::Time;
use crate::tls::{self, ScenarioKind, TlsLabels, TlsParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_LEAK: i32 = 2;
pub const EXIT_INTERFACE: i32 = 3;
pub const EXIT_ASSUMPTION: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_OBSERVER: i32 = 65;
/// A step failed for a reason other than a broken assumption.
pub const EXIT_RUNTIME: i32 = 70;

pub const DEFAULT_HORIZON: Time = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

/// What a command printed and how it exits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn fail(code: i32, message: impl std::fmt::Display) -> Outcome {
        Outcome { code, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub scenario: String,
    pub horizon: Time,
    pub secrecy_holds: bool,
    /// `(target label, earliest time unit)`.
    pub leaks: Vec<(String, Time)>,
    /// `(channel, time unit)` of every abort event.
    pub aborts: Vec<(String, Time)>,
    pub interface_ok: bool,
    pub assumption_violation: Option<String>,
    pub runtime_error: Option<String>,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        if !self.interface_ok {
            EXIT_INTERFACE
        } else if self.assumption_violation.is_some() {
            EXIT_ASSUMPTION
        } else if self.runtime_error.is_some() {
            EXIT_RUNTIME
        } else if !self.leaks.is_empty() {
            EXIT_LEAK
        } else {
            EXIT_OK
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Style {
        Style { color: std::env::var("STREAMSEC_COLOR").is_ok_and(|v| v == "1") }
    }

    fn paint(self, good: bool, s: &str) -> String {
        match (self.color, good) {
            (false, _) => s.to_string(),
            (true, true) => format!("\x1b[32m{s}\x1b[0m"),
            (true, false) => format!("\x1b[31m{s}\x1b[0m"),
        }
    }
}

fn load_params(params: Option<&Path>) -> Result<TlsParams, String> {
    let labels = match params {
        None => TlsLabels::default(),
        Some(path) => {
            let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_params(&src).map_err(|e| format!("{}: {e}", path.display()))?
        }
    };
    TlsParams::new(&labels).map_err(|e| e.to_string())
}

/// A built-in scenario name or the path of a scenario file.
pub fn load_scenario(scenario: &str, params: Option<&Path>) -> Result<Scenario, String> {
    let p = load_params(params)?;
    if let Ok(kind) = scenario.parse::<ScenarioKind>() {
        return Ok(tls::builtin(kind, &p));
    }
    let path = Path::new(scenario);
    if !path.is_file() {
        let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
        return Err(format!("unknown scenario {scenario} (expected {} or a scenario file)", names.join(", ")));
    }
    let src = std::fs::read_to_string(path).map_err(|e| format!("{scenario}: {e}"))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(scenario);
    parse_scenario(&src, stem, &p).map_err(|e| format!("{scenario}: {e}"))
}

fn aborts(trace: &Trace) -> Vec<(String, Time)> {
    let mut out: Vec<(String, Time)> = trace
        .channels
        .values()
        .filter(|c| c.ty == MsgType::Event && c.name.starts_with("abort"))
        .flat_map(|c| c.stream.iter().map(move |(t, _)| (c.name.clone(), t)))
        .collect();
    out.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    out.dedup();
    out
}

/// Leaks of the scenario's targets into its observer's knowledge.
pub fn leaks(scenario: &Scenario, composite: &Composite, trace: &Trace) -> Vec<(String, Time)> {
    let Some(observer) = &scenario.observer else { return Vec::new() };
    let Some(kb) = trace.knowledge_of(composite, observer) else { return Vec::new() };
    kb.leak_check(&scenario.targets, trace.horizon)
        .into_iter()
        .map(|l| (l.target.item().label().to_string(), l.time))
        .collect()
}

/// Composes and runs a scenario, returning the verdict and whatever trace
/// was produced.
pub fn evaluate(scenario: &Scenario, horizon: Time) -> (Verdict, Option<Trace>, Vec<String>) {
    let mut verdict = Verdict {
        scenario: scenario.name.clone(),
        horizon,
        secrecy_holds: true,
        leaks: Vec::new(),
        aborts: Vec::new(),
        interface_ok: true,
        assumption_violation: None,
        runtime_error: None,
    };
    let composite = match compose(scenario.parts.clone(), scenario.connections.clone()) {
        Ok(c) => c,
        Err(e) => {
            verdict.interface_ok = false;
            return (verdict, None, vec![e.to_string()]);
        }
    };
    let trace = match run(&composite, horizon) {
        Ok(trace) => trace,
        Err(e) => {
            match e.source_error() {
                StepError::AssumptionViolated { .. } => verdict.assumption_violation = Some(e.to_string()),
                _ => verdict.runtime_error = Some(e.to_string()),
            }
            let partial = e.partial().clone();
            verdict.aborts = aborts(&partial);
            return (verdict, Some(partial), vec![e.to_string()]);
        }
    };
    verdict.leaks = leaks(scenario, &composite, &trace);
    verdict.secrecy_holds = verdict.leaks.is_empty();
    verdict.aborts = aborts(&trace);
    (verdict, Some(trace), Vec::new())
}

fn render_text(verdict: &Verdict, trace: Option<&Trace>, style: Style) -> String {
    let mut out = trace.map(Trace::render).unwrap_or_default();
    let _ = writeln!(out, "---");
    let _ = writeln!(out, "scenario: {}", verdict.scenario);
    let _ = writeln!(out, "horizon: {}", verdict.horizon);
    let _ = writeln!(
        out,
        "interface: {}",
        style.paint(verdict.interface_ok, if verdict.interface_ok { "ok" } else { "mismatch" })
    );
    if let Some(v) = &verdict.assumption_violation {
        let _ = writeln!(out, "assumption: {}", style.paint(false, v));
    }
    if let Some(v) = &verdict.runtime_error {
        let _ = writeln!(out, "error: {}", style.paint(false, v));
    }
    for (ch, t) in &verdict.aborts {
        let _ = writeln!(out, "abort: {ch} at t={t}");
    }
    for (target, t) in &verdict.leaks {
        let _ = writeln!(out, "leak: {target} at t={t}");
    }
    let secrecy = if verdict.secrecy_holds { "holds" } else { "violated" };
    let _ = writeln!(out, "secrecy: {}", style.paint(verdict.secrecy_holds, secrecy));
    out
}

fn render_structured(verdict: &Verdict, trace: Option<&Trace>) -> String {
    let mut out = String::new();
    if let Some(trace) = trace {
        for (t, ch, m) in trace.events() {
            let _ = writeln!(out, "record=message t={t} channel={ch} type={} value={m}", m.msg_type());
        }
    }
    for (ch, t) in &verdict.aborts {
        let _ = writeln!(out, "record=abort channel={ch} t={t}");
    }
    for (target, t) in &verdict.leaks {
        let _ = writeln!(out, "record=leak target={target} t={t}");
    }
    let _ = writeln!(
        out,
        "record=verdict scenario={} horizon={} interface_ok={} assumption_ok={} runtime_ok={} secrecy_holds={} exit={}",
        verdict.scenario,
        verdict.horizon,
        verdict.interface_ok,
        verdict.assumption_violation.is_none(),
        verdict.runtime_error.is_none(),
        verdict.secrecy_holds,
        verdict.exit_code()
    );
    out
}

/// `run <scenario> [--horizon N] [--format text|structured] [--params FILE]`
pub fn cmd_run(scenario: &str, horizon: Option<Time>, format: Format, params: Option<&Path>) -> Outcome {
    let sc = match load_scenario(scenario, params) {
        Ok(sc) => sc,
        Err(e) => return Outcome::fail(EXIT_USAGE, e),
    };
    let horizon = horizon.or(sc.horizon).unwrap_or(DEFAULT_HORIZON);
    let (verdict, trace, errors) = evaluate(&sc, horizon);
    let stdout = match format {
        Format::Text => render_text(&verdict, trace.as_ref(), Style::from_env()),
        Format::Structured => render_structured(&verdict, trace.as_ref()),
    };
    let stderr = errors.iter().map(|e| format!("error: {e}\n")).collect();
    Outcome { code: verdict.exit_code(), stdout, stderr }
}

/// `check-interfaces <scenario>`: one line per wire, exit 3 on any error.
pub fn cmd_check_interfaces(scenario: &str, params: Option<&Path>) -> Outcome {
    let sc = match load_scenario(scenario, params) {
        Ok(sc) => sc,
        Err(e) => return Outcome::fail(EXIT_USAGE, e),
    };
    let style = Style::from_env();
    let report = check_interfaces(&sc.parts, &sc.connections);
    let mut out = String::new();
    let ty = |t: Option<MsgType>| t.map_or_else(|| "?".to_string(), |t| t.to_string());
    for w in &report.wires {
        let tag = style.paint(w.error.is_none(), if w.error.is_none() { "ok  " } else { "FAIL" });
        let _ = write!(out, "{tag} {} : {} -> {}", w.connection, ty(w.producer_ty), ty(w.consumer_ty));
        if let Some(e) = &w.error {
            let _ = write!(out, " ({e})");
        }
        out.push('\n');
    }
    let mut stderr = String::new();
    for e in &report.errors {
        let _ = writeln!(stderr, "error: {e}");
    }
    let _ = writeln!(out, "{} wires, {} errors", report.wires.len(), report.errors.len());
    let code = if report.ok() { EXIT_OK } else { EXIT_INTERFACE };
    Outcome { code, stdout: out, stderr }
}

/// `knowledge <scenario> <t>`: the observer's analysed knowledge at `t`.
pub fn cmd_knowledge(scenario: &str, t: Time, params: Option<&Path>) -> Outcome {
    let sc = match load_scenario(scenario, params) {
        Ok(sc) => sc,
        Err(e) => return Outcome::fail(EXIT_USAGE, e),
    };
    let Some(observer) = sc.observer.clone() else {
        return Outcome::fail(EXIT_NO_OBSERVER, format!("scenario {} has no adversary", sc.name));
    };
    let composite = match compose(sc.parts.clone(), sc.connections.clone()) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(EXIT_INTERFACE, e),
    };
    let trace = match run(&composite, t) {
        Ok(trace) => trace,
        Err(e @ RunError::Step { source: StepError::AssumptionViolated { .. }, .. }) => {
            return Outcome::fail(EXIT_ASSUMPTION, e)
        }
        Err(e) => return Outcome::fail(EXIT_RUNTIME, e),
    };
    let kb = trace.knowledge_of(&composite, &observer).expect("observer is a part");
    Outcome { code: EXIT_OK, stdout: kb.at(t).dump(), stderr: String::new() }
}
