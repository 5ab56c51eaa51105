//! Scenario description files and atom-label parameter files.
//!
//! ```text
//! # comment
//! [component Client]
//! builtin = client          # client, server, adversary, fixed-client, fixed-server
//! causality = strong        # override
//! keys = CKey^-1            # K_P, comma separated labels
//! secrets = N, secretD      # S_P
//! locals = <CKey>; <C, S>   # LS_P, semicolon separated expressions
//!
//! [wiring]
//! Client.init -> Server.init
//!
//! [scenario]
//! name = demo
//! horizon = 10
//! observer = Adversary
//! targets = secretD
//! ```
//!
//! The builtin defaults to the section name (`FixedClient` reads as
//! `fixed-client`). Without an `observer` key, the single adversary part (if
//! any) observes; without `targets`, the observer is checked against
//! `secretD`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::component::{Causality, ComponentSpec, Connection};
use crate::knowledge::{KnowledgeError, SecrecyTarget};
use crate::stream::Time;
use crate::term::{AtomKind, AtomTable, Expression, TermError};
use crate::text::{parse_expression, ParseError};
use crate::tls::{self, ParamError, TlsLabels, TlsParams};

/// Everything needed to compose, run and judge one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub parts: Vec<ComponentSpec>,
    pub connections: Vec<Connection>,
    /// Component whose knowledge is checked against the targets.
    pub observer: Option<String>,
    pub targets: Vec<SecrecyTarget>,
    pub horizon: Option<Time>,
    pub atoms: AtomTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FileErrorKind {
    #[error("unknown section {0}")]
    UnknownSection(String),
    #[error("duplicate section {0}")]
    DuplicateSection(String),
    #[error("entry outside any section")]
    NoSection,
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("expected `key = value`")]
    ExpectedAssignment,
    #[error("expected `component.port -> component.port`")]
    ExpectedWire,
    #[error("unknown builtin component {0}")]
    UnknownBuiltin(String),
    #[error("causality must be strong or weak, got {0}")]
    BadCausality(String),
    #[error("{label} is a {kind}, expected a {expected}")]
    WrongKind { label: String, kind: AtomKind, expected: &'static str },
    #[error("invalid number {0}")]
    BadNumber(String),
    #[error("observer {0} is not a component of the scenario")]
    UnknownObserver(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct FileError {
    pub line: usize,
    pub kind: FileErrorKind,
}

fn err<T>(line: usize, kind: impl Into<FileErrorKind>) -> Result<T, FileError> {
    Err(FileError { line, kind: kind.into() })
}

fn at<T, E: Into<FileErrorKind>>(line: usize, r: Result<T, E>) -> Result<T, FileError> {
    r.map_err(|e| FileError { line, kind: e.into() })
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn assignment(line: usize, l: &str) -> Result<(&str, &str), FileError> {
    match l.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => err(line, FileErrorKind::ExpectedAssignment),
    }
}

/// Parses `name = label` overrides of the protocol atom labels.
pub fn parse_params(input: &str) -> Result<TlsLabels, FileError> {
    let mut labels = TlsLabels::default();
    let mut seen = BTreeSet::new();
    for (line, l) in lines(input) {
        let (k, v) = assignment(line, l)?;
        if !seen.insert(k) {
            return err(line, FileErrorKind::DuplicateKey(k.to_string()));
        }
        at(line, labels.set(k, v))?;
    }
    at(0, TlsParams::new(&labels))?;
    Ok(labels)
}

fn builtin_spec(name: &str, p: &TlsParams) -> Option<ComponentSpec> {
    let key: String = name.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_lowercase();
    let spec = match key.as_str() {
        "client" => tls::make_client(p),
        "server" => tls::make_server(p),
        "adversary" => tls::make_adversary(p),
        "fixedclient" => tls::make_fixed_client(p),
        "fixedserver" => tls::make_fixed_server(p),
        _ => return None,
    };
    Some(spec)
}

fn labels(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

#[derive(Default)]
struct Section {
    name: String,
    line: usize,
    builtin: Option<(usize, String)>,
    causality: Option<(usize, String)>,
    keys: Option<(usize, String)>,
    secrets: Option<(usize, String)>,
    locals: Option<(usize, String)>,
}

impl Section {
    fn build(self, p: &TlsParams) -> Result<ComponentSpec, FileError> {
        let (line, builtin) = self.builtin.clone().unwrap_or((self.line, self.name.clone()));
        let Some(mut spec) = builtin_spec(&builtin, p) else {
            return err(line, FileErrorKind::UnknownBuiltin(builtin));
        };
        spec.name = self.name;
        if let Some((line, v)) = self.causality {
            spec.causality = match v.as_str() {
                "strong" => Causality::Strong,
                "weak" => Causality::Weak,
                _ => return err(line, FileErrorKind::BadCausality(v)),
            };
        }
        let atoms = p.atoms();
        if let Some((line, v)) = self.keys {
            spec.private_keys.clear();
            for l in labels(&v) {
                let a = at(line, atoms.lookup(l))?;
                if !a.is_key() {
                    return err(line, FileErrorKind::WrongKind { label: l.into(), kind: a.kind(), expected: "key" });
                }
                spec.private_keys.insert(a.clone());
            }
        }
        if let Some((line, v)) = self.secrets {
            spec.unguessable.clear();
            for l in labels(&v) {
                let a = at(line, atoms.lookup(l))?;
                if a.kind() != AtomKind::Secret {
                    return err(line, FileErrorKind::WrongKind { label: l.into(), kind: a.kind(), expected: "secret" });
                }
                spec.unguessable.insert(a.clone());
            }
        }
        if let Some((line, v)) = self.locals {
            spec.local_secrets = v
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| at(line, parse_expression(s, atoms)))
                .collect::<Result<Vec<Expression>, _>>()?;
        }
        Ok(spec)
    }
}

fn set(slot: &mut Option<(usize, String)>, line: usize, key: &str, v: &str) -> Result<(), FileError> {
    if slot.is_some() {
        return err(line, FileErrorKind::DuplicateKey(key.to_string()));
    }
    *slot = Some((line, v.to_string()));
    Ok(())
}

enum Current {
    None,
    Component(Section),
    Wiring,
    Scenario,
}

/// Parses a scenario file. `default_name` names the scenario when the file
/// does not.
pub fn parse_scenario(input: &str, default_name: &str, p: &TlsParams) -> Result<Scenario, FileError> {
    let mut sections: Vec<Section> = Vec::new();
    let mut connections = Vec::new();
    let mut name: Option<(usize, String)> = None;
    let mut horizon: Option<(usize, String)> = None;
    let mut observer: Option<(usize, String)> = None;
    let mut targets: Option<(usize, String)> = None;
    let mut seen_sections = BTreeSet::new();
    let mut current = Current::None;

    for (line, l) in lines(input) {
        if let Some(header) = l.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            let header = header.split_whitespace().collect::<Vec<_>>().join(" ");
            if !seen_sections.insert(header.clone()) {
                return err(line, FileErrorKind::DuplicateSection(header));
            }
            if let Current::Component(s) = std::mem::replace(&mut current, Current::None) {
                sections.push(s);
            }
            current = match header.split_once(' ') {
                Some(("component", n)) if !n.contains(' ') => {
                    Current::Component(Section { name: n.to_string(), line, ..Section::default() })
                }
                None if header == "wiring" => Current::Wiring,
                None if header == "scenario" => Current::Scenario,
                _ => return err(line, FileErrorKind::UnknownSection(header)),
            };
            continue;
        }
        match &mut current {
            Current::None => return err(line, FileErrorKind::NoSection),
            Current::Component(s) => {
                let (k, v) = assignment(line, l)?;
                let slot = match k {
                    "builtin" => &mut s.builtin,
                    "causality" => &mut s.causality,
                    "keys" => &mut s.keys,
                    "secrets" => &mut s.secrets,
                    "locals" => &mut s.locals,
                    _ => return err(line, FileErrorKind::UnknownKey(k.to_string())),
                };
                set(slot, line, k, v)?;
            }
            Current::Wiring => connections.push(wire(line, l)?),
            Current::Scenario => {
                let (k, v) = assignment(line, l)?;
                let slot = match k {
                    "name" => &mut name,
                    "horizon" => &mut horizon,
                    "observer" => &mut observer,
                    "targets" => &mut targets,
                    _ => return err(line, FileErrorKind::UnknownKey(k.to_string())),
                };
                set(slot, line, k, v)?;
            }
        }
    }
    if let Current::Component(s) = current {
        sections.push(s);
    }

    let mut adversaries = Vec::new();
    let mut parts = Vec::new();
    for s in sections {
        let builtin = s.builtin.as_ref().map_or(s.name.as_str(), |(_, b)| b.as_str());
        if builtin.eq_ignore_ascii_case("adversary") {
            adversaries.push(s.name.clone());
        }
        parts.push(s.build(p)?);
    }

    let observer = match observer {
        Some((line, o)) => {
            if !parts.iter().any(|x| x.name == o) {
                return err(line, FileErrorKind::UnknownObserver(o));
            }
            Some(o)
        }
        None if adversaries.len() == 1 => adversaries.pop(),
        None => None,
    };

    let mut secrecy = Vec::new();
    if let Some(o) = &observer {
        match targets {
            Some((line, v)) => {
                for l in labels(&v) {
                    let a = at(line, p.atoms().lookup(l))?.clone();
                    secrecy.push(at(line, SecrecyTarget::new(a, [o.clone()]))?);
                }
            }
            None => secrecy.push(SecrecyTarget::new(p.secret_d.clone(), [o.clone()]).expect("secret")),
        }
    }

    let horizon = match horizon {
        Some((line, v)) => Some(v.parse::<Time>().or_else(|_| err(line, FileErrorKind::BadNumber(v)))?),
        None => None,
    };

    Ok(Scenario {
        name: name.map_or_else(|| default_name.to_string(), |(_, n)| n),
        parts,
        connections,
        observer,
        targets: secrecy,
        horizon,
        atoms: p.atoms().clone(),
    })
}

fn port(s: &str) -> Option<(&str, &str)> {
    let (c, p) = s.trim().split_once('.')?;
    let ok = |x: &str| !x.is_empty() && x.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-');
    (ok(c) && ok(p)).then_some((c, p))
}

fn wire(line: usize, l: &str) -> Result<Connection, FileError> {
    let parsed = l.split_once("->").and_then(|(a, b)| Some((port(a)?, port(b)?)));
    match parsed {
        Some((a, b)) => Ok(Connection::new(a, b)),
        None => err(line, FileErrorKind::ExpectedWire),
    }
}
