//! Declarative component specifications.
//!
//! A component is a set of guarded transitions over its current input
//! intervals and local variables. All transitions whose guards hold fire
//! together; locals they do not update keep their value and outputs they do
//! not mention stay empty. Strongly causal components emit at `t + 1`,
//! weakly causal ones within `t`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::message::{InitMessage, MsgType};
use crate::term::{Atom, Expression, Item, Position};

pub mod compose;
pub mod dsl;
mod eval;
pub mod run;

pub use compose::{
    check_interfaces, compose, ks_union_check, Composite, Connection, InterfaceError, InterfaceReport, KsReport,
    PortRef, Wire, WireCheck,
};
pub use eval::{initial_emissions, step, EvalError, Inputs, StepError, StepOutcome};
pub use run::{run, ChannelTrace, RunError, StepRecord, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Causality {
    Strong,
    Weak,
}

impl fmt::Display for Causality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Causality::Strong => "strong",
            Causality::Weak => "weak",
        })
    }
}

/// A local variable value or an intermediate term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// Enumeration constant such as `st0`.
    Sym(Arc<str>),
    Item(Item),
    Expr(Expression),
    Init(InitMessage),
    Event,
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(s.into())
    }

    pub fn atom(a: &Atom) -> Value {
        Value::Item(Item::Atom(a.clone()))
    }

    /// Items read as one-element expressions.
    pub fn to_expression(&self) -> Option<Expression> {
        match self {
            Value::Item(i) => Some(Expression::singleton(i.clone())),
            Value::Expr(e) => Some(e.clone()),
            _ => None,
        }
    }

    /// Structural equality, with `x` and `<x>` identified.
    pub fn same(&self, other: &Value) -> bool {
        match (self.to_expression(), other.to_expression()) {
            (Some(a), Some(b)) => a == b,
            _ => self == other,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Sym(s) => f.write_str(s),
            Value::Item(i) => i.fmt(f),
            Value::Expr(e) => e.fmt(f),
            Value::Init(im) => im.fmt(f),
            Value::Event => f.write_str("event"),
        }
    }
}

/// Term language of guards, updates and emissions.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(Value),
    Local(String),
    /// A where-clause or transition-level binding.
    Bound(String),
    /// First message of the current interval on an input channel.
    Input(String),
    Enc(Box<Term>, Box<Term>),
    Decr(Box<Term>, Box<Term>),
    Sign(Box<Term>, Box<Term>),
    Ext(Box<Term>, Box<Term>),
    Elem(Box<Term>, Position),
    /// Concatenation; items count as one-element expressions.
    Seq(Vec<Term>),
    Im(Box<Term>, Box<Term>, Box<Term>),
    UngValue(Box<Term>),
    KeyOf(Box<Term>),
    MsgOf(Box<Term>),
}

impl Term {
    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Const(_) | Term::Local(_) | Term::Bound(_) | Term::Input(_) => {}
            Term::Enc(a, b) | Term::Decr(a, b) | Term::Sign(a, b) | Term::Ext(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Elem(a, _) | Term::UngValue(a) | Term::KeyOf(a) | Term::MsgOf(a) => a.visit(f),
            Term::Seq(ts) => ts.iter().for_each(|t| t.visit(f)),
            Term::Im(a, b, c) => {
                a.visit(f);
                b.visit(f);
                c.visit(f);
            }
        }
    }
}

/// Transition guards.
#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    True,
    /// `s^t = <>`
    Empty(String),
    /// `s^t != <>`
    NonEmpty(String),
    /// False when either side fails to evaluate.
    Eq(Term, Term),
    /// Negation of [`Cond::Eq`]: true when either side fails.
    Ne(Term, Term),
    Not(Box<Cond>),
    All(Vec<Cond>),
    Any(Vec<Cond>),
}

impl Cond {
    fn visit<'a>(&'a self, on_cond: &mut impl FnMut(&'a Cond), on_term: &mut impl FnMut(&'a Term)) {
        on_cond(self);
        match self {
            Cond::True | Cond::Empty(_) | Cond::NonEmpty(_) => {}
            Cond::Eq(a, b) | Cond::Ne(a, b) => {
                a.visit(on_term);
                b.visit(on_term);
            }
            Cond::Not(c) => c.visit(on_cond, on_term),
            Cond::All(cs) | Cond::Any(cs) => cs.iter().for_each(|c| c.visit(on_cond, on_term)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Emit {
    Term(Term),
    /// Copy the whole current interval of an input channel.
    Forward(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub label: String,
    pub guard: Cond,
    pub bindings: Vec<(String, Term)>,
    pub updates: Vec<(String, Term)>,
    pub emissions: Vec<(String, Emit)>,
}

impl Transition {
    pub fn new(label: &str) -> Transition {
        Transition {
            label: label.to_string(),
            guard: Cond::True,
            bindings: Vec::new(),
            updates: Vec::new(),
            emissions: Vec::new(),
        }
    }

    pub fn when(mut self, guard: Cond) -> Self {
        self.guard = guard;
        self
    }

    pub fn bind(mut self, name: &str, term: Term) -> Self {
        self.bindings.push((name.to_string(), term));
        self
    }

    pub fn set(mut self, local: &str, term: Term) -> Self {
        self.updates.push((local.to_string(), term));
        self
    }

    pub fn emit(mut self, channel: &str, term: Term) -> Self {
        self.emissions.push((channel.to_string(), Emit::Term(term)));
        self
    }

    pub fn forward(mut self, output: &str, input: &str) -> Self {
        self.emissions.push((output.to_string(), Emit::Forward(input.to_string())));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub ty: MsgType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalDecl {
    pub name: String,
    pub ty: String,
    /// Allowed symbols for enumeration-typed locals.
    pub domain: Option<Vec<String>>,
    pub init: Option<Value>,
}

/// `msg_n(channel)` in an assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MsgBound<'a> {
    pub channel: &'a str,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("channel {0} is declared as both input and output")]
    InputOutputOverlap(String),
    #[error("duplicate declaration of {0}")]
    Duplicate(String),
    #[error("{context}: unknown local {name}")]
    UnknownLocal { context: String, name: String },
    #[error("{context}: unknown binding {name}")]
    UnknownBinding { context: String, name: String },
    #[error("{context}: unknown input channel {name}")]
    UnknownInput { context: String, name: String },
    #[error("{context}: unknown output channel {name}")]
    UnknownOutput { context: String, name: String },
    #[error("initial value {value} of {local} is outside its domain")]
    OutsideDomain { local: String, value: String },
}

/// A component: interface, locals, assumption, transitions, and its key and
/// secret sets `K_P`, `S_P`, `LS_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub name: String,
    pub causality: Causality,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub locals: Vec<LocalDecl>,
    pub assumption: Vec<(String, usize)>,
    /// Emissions at time 0, before any input is read.
    pub initial_output: Vec<(String, Term)>,
    /// Where-clause, evaluated once per step and visible to every transition.
    pub where_clause: Vec<(String, Term)>,
    pub transitions: Vec<Transition>,
    pub private_keys: BTreeSet<Atom>,
    pub unguessable: BTreeSet<Atom>,
    pub local_secrets: Vec<Expression>,
}

impl ComponentSpec {
    pub fn new(name: &str, causality: Causality) -> ComponentSpec {
        ComponentSpec {
            name: name.to_string(),
            causality,
            inputs: Vec::new(),
            outputs: Vec::new(),
            locals: Vec::new(),
            assumption: Vec::new(),
            initial_output: Vec::new(),
            where_clause: Vec::new(),
            transitions: Vec::new(),
            private_keys: BTreeSet::new(),
            unguessable: BTreeSet::new(),
            local_secrets: Vec::new(),
        }
    }

    pub fn input(mut self, name: &str, ty: MsgType) -> Self {
        self.inputs.push(Port { name: name.to_string(), ty });
        self
    }

    pub fn output(mut self, name: &str, ty: MsgType) -> Self {
        self.outputs.push(Port { name: name.to_string(), ty });
        self
    }

    /// An enumeration-typed local with its value set and initial value.
    pub fn state(mut self, name: &str, ty: &str, domain: &[&str], init: &str) -> Self {
        self.locals.push(LocalDecl {
            name: name.to_string(),
            ty: ty.to_string(),
            domain: Some(domain.iter().map(|s| s.to_string()).collect()),
            init: Some(Value::sym(init)),
        });
        self
    }

    /// A term-valued local, undefined until first assigned.
    pub fn local(mut self, name: &str, ty: &str) -> Self {
        self.locals.push(LocalDecl { name: name.to_string(), ty: ty.to_string(), domain: None, init: None });
        self
    }

    pub fn assume_msg(mut self, channel: &str, n: usize) -> Self {
        self.assumption.push((channel.to_string(), n));
        self
    }

    pub fn initially(mut self, channel: &str, term: Term) -> Self {
        self.initial_output.push((channel.to_string(), term));
        self
    }

    pub fn define(mut self, name: &str, term: Term) -> Self {
        self.where_clause.push((name.to_string(), term));
        self
    }

    pub fn transition(mut self, t: Transition) -> Self {
        self.transitions.push(t);
        self
    }

    pub fn keys(mut self, keys: impl IntoIterator<Item = Atom>) -> Self {
        self.private_keys.extend(keys);
        self
    }

    pub fn secrets(mut self, secrets: impl IntoIterator<Item = Atom>) -> Self {
        self.unguessable.extend(secrets);
        self
    }

    pub fn knows(mut self, terms: impl IntoIterator<Item = Expression>) -> Self {
        self.local_secrets.extend(terms);
        self
    }

    /// `KS_P = K_P ∪ S_P`.
    pub fn ks(&self) -> BTreeSet<Atom> {
        self.private_keys.union(&self.unguessable).cloned().collect()
    }

    pub fn input_port(&self, name: &str) -> Option<&Port> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output_port(&self, name: &str) -> Option<&Port> {
        self.outputs.iter().find(|p| p.name == name)
    }

    pub fn msg_bounds(&self) -> impl Iterator<Item = MsgBound<'_>> {
        self.assumption.iter().map(|(channel, n)| MsgBound { channel, n: *n })
    }

    /// Initial local valuation; uninitialised locals are absent.
    pub fn initial_locals(&self) -> BTreeMap<String, Value> {
        self.locals.iter().filter_map(|l| l.init.clone().map(|v| (l.name.clone(), v))).collect()
    }

    /// Checks the interface is well formed and every name a transition uses
    /// is declared.
    pub fn validate(&self) -> Result<(), SpecError> {
        let mut seen = BTreeSet::new();
        for port in self.inputs.iter().chain(&self.outputs) {
            if !seen.insert(port.name.as_str()) {
                return Err(if self.input_port(&port.name).is_some() && self.output_port(&port.name).is_some() {
                    SpecError::InputOutputOverlap(port.name.clone())
                } else {
                    SpecError::Duplicate(port.name.clone())
                });
            }
        }
        let mut locals = BTreeSet::new();
        for l in &self.locals {
            if !locals.insert(l.name.as_str()) {
                return Err(SpecError::Duplicate(l.name.clone()));
            }
            if let (Some(domain), Some(Value::Sym(v))) = (&l.domain, &l.init) {
                if !domain.iter().any(|d| **d == **v) {
                    return Err(SpecError::OutsideDomain { local: l.name.clone(), value: v.to_string() });
                }
            }
        }
        for (channel, _) in &self.assumption {
            self.check_input("assumption", channel)?;
        }

        let mut bound: BTreeSet<&str> = BTreeSet::new();
        for (channel, term) in &self.initial_output {
            self.check_output("initial output", channel)?;
            self.check_term("initial output", term, &bound)?;
        }
        for (name, term) in &self.where_clause {
            self.check_term("where clause", term, &bound)?;
            bound.insert(name);
        }
        for t in &self.transitions {
            let ctx = t.label.as_str();
            let mut bound = bound.clone();
            for (name, term) in &t.bindings {
                self.check_term(ctx, term, &bound)?;
                bound.insert(name);
            }
            let mut channels = Vec::new();
            let mut leaves = Vec::new();
            t.guard.visit(
                &mut |c| {
                    if let Cond::Empty(ch) | Cond::NonEmpty(ch) = c {
                        channels.push(ch);
                    }
                },
                &mut |term| leaves.push(term),
            );
            for ch in channels {
                self.check_input(ctx, ch)?;
            }
            for term in leaves {
                self.check_leaf(ctx, term, &bound)?;
            }
            for (local, term) in &t.updates {
                if !locals.contains(local.as_str()) {
                    return Err(SpecError::UnknownLocal { context: ctx.to_string(), name: local.clone() });
                }
                self.check_term(ctx, term, &bound)?;
            }
            for (channel, emit) in &t.emissions {
                self.check_output(ctx, channel)?;
                match emit {
                    Emit::Term(term) => self.check_term(ctx, term, &bound)?,
                    Emit::Forward(input) => self.check_input(ctx, input)?,
                }
            }
        }
        Ok(())
    }

    fn check_input(&self, context: &str, name: &str) -> Result<(), SpecError> {
        match self.input_port(name) {
            Some(_) => Ok(()),
            None => Err(SpecError::UnknownInput { context: context.to_string(), name: name.to_string() }),
        }
    }

    fn check_output(&self, context: &str, name: &str) -> Result<(), SpecError> {
        match self.output_port(name) {
            Some(_) => Ok(()),
            None => Err(SpecError::UnknownOutput { context: context.to_string(), name: name.to_string() }),
        }
    }

    fn check_term(&self, context: &str, term: &Term, bound: &BTreeSet<&str>) -> Result<(), SpecError> {
        let mut result = Ok(());
        term.visit(&mut |t| {
            if result.is_ok() {
                result = self.check_leaf(context, t, bound);
            }
        });
        result
    }

    fn check_leaf(&self, context: &str, term: &Term, bound: &BTreeSet<&str>) -> Result<(), SpecError> {
        match term {
            Term::Local(name) if !self.locals.iter().any(|l| &l.name == name) => {
                Err(SpecError::UnknownLocal { context: context.to_string(), name: name.clone() })
            }
            Term::Bound(name) if !bound.contains(name.as_str()) => {
                Err(SpecError::UnknownBinding { context: context.to_string(), name: name.clone() })
            }
            Term::Input(name) => self.check_input(context, name),
            _ => Ok(()),
        }
    }
}
