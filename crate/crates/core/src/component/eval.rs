use std::collections::BTreeMap;

use thiserror::Error;

use crate::message::{InitMessage, Message, MsgType};
use crate::stream::Time;
use crate::term::{self, Atom, Encryptor, Expression, Item, TermError};

use super::{ComponentSpec, Cond, Emit, Term, Value};

/// Current-interval contents of a component's input channels. Missing
/// channels read as empty.
pub type Inputs = BTreeMap<String, Vec<Message>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("channel {0} is empty in this interval")]
    EmptyInterval(String),
    #[error("{0} is undefined")]
    Undefined(String),
    #[error("expected {expected}, found {found}")]
    Type { expected: &'static str, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("assumption msg_{bound}({channel}) violated: {found} messages at t={t}")]
    AssumptionViolated { channel: String, bound: usize, found: usize, t: Time },
    #[error("transitions {first} and {second} disagree on {target}")]
    ConflictingUpdates { target: String, first: String, second: String },
    #[error("{transition}: {source}")]
    Eval { transition: String, source: EvalError },
    #[error("{transition}: {value} is outside the domain of {local}")]
    OutsideDomain { transition: String, local: String, value: String },
    #[error("{transition}: channel {channel} carries {expected}, got {found}")]
    TypeMismatch { transition: String, channel: String, expected: MsgType, found: MsgType },
}

/// Result of one step: the next locals and what to emit.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub locals: BTreeMap<String, Value>,
    pub emissions: BTreeMap<String, Vec<Message>>,
    /// Labels of the transitions that fired, in declaration order.
    pub fired: Vec<String>,
    /// Successfully evaluated bindings of fired transitions.
    pub bindings: BTreeMap<String, Value>,
}

type Bindings = BTreeMap<String, Result<Value, EvalError>>;

struct Env<'a> {
    locals: &'a BTreeMap<String, Value>,
    inputs: &'a Inputs,
    bindings: Bindings,
}

impl Env<'_> {
    fn eval(&self, term: &Term) -> Result<Value, EvalError> {
        match term {
            Term::Const(v) => Ok(v.clone()),
            Term::Local(name) => self.locals.get(name).cloned().ok_or_else(|| EvalError::Undefined(name.clone())),
            Term::Bound(name) => match self.bindings.get(name) {
                Some(r) => r.clone(),
                None => Err(EvalError::Undefined(name.clone())),
            },
            Term::Input(channel) => match self.inputs.get(channel).and_then(|xs| xs.first()) {
                Some(Message::Expr(e)) => Ok(Value::Expr(e.clone())),
                Some(Message::Init(im)) => Ok(Value::Init(im.clone())),
                Some(Message::Event) => Ok(Value::Event),
                None => Err(EvalError::EmptyInterval(channel.clone())),
            },
            Term::Enc(k, p) => Ok(Value::Expr(term::enc(&self.encryptor(k)?, &self.expression(p)?))),
            Term::Decr(k, e) => Ok(Value::Expr(term::decr(&self.encryptor(k)?, &self.expression(e)?)?)),
            Term::Sign(k, p) => Ok(Value::Expr(term::sign(&self.encryptor(k)?, &self.expression(p)?))),
            Term::Ext(k, e) => Ok(Value::Expr(term::ext(&self.encryptor(k)?, &self.expression(e)?)?)),
            Term::Elem(e, pos) => Ok(Value::Item(term::element(&self.expression(e)?, *pos)?)),
            Term::Seq(ts) => {
                let mut items = Vec::new();
                for t in ts {
                    items.extend(self.expression(t)?.into_items());
                }
                Ok(Value::Expr(Expression::new(items)))
            }
            Term::Im(u, k, m) => {
                let (u, k, m) = (self.atom(u)?, self.atom(k)?, self.expression(m)?);
                let found = format!("im({u}, {k}, {m})");
                InitMessage::new(u, k, m).map(Value::Init).ok_or(EvalError::Type { expected: "secret and key", found })
            }
            Term::UngValue(t) => Ok(Value::atom(self.init(t)?.ung_value())),
            Term::KeyOf(t) => Ok(Value::atom(self.init(t)?.key())),
            Term::MsgOf(t) => Ok(Value::Expr(self.init(t)?.msg().clone())),
        }
    }

    fn expression(&self, term: &Term) -> Result<Expression, EvalError> {
        let v = self.eval(term)?;
        v.to_expression().ok_or_else(|| EvalError::Type { expected: "expression", found: v.to_string() })
    }

    fn atom(&self, term: &Term) -> Result<Atom, EvalError> {
        let v = self.eval(term)?;
        let atom = match &v {
            Value::Item(Item::Atom(a)) => Some(a.clone()),
            Value::Expr(e) => e.as_single().and_then(Item::as_atom).cloned(),
            _ => None,
        };
        atom.ok_or_else(|| EvalError::Type { expected: "atom", found: v.to_string() })
    }

    fn encryptor(&self, term: &Term) -> Result<Encryptor, EvalError> {
        Ok(Encryptor::new(self.atom(term)?)?)
    }

    fn init(&self, term: &Term) -> Result<InitMessage, EvalError> {
        match self.eval(term)? {
            Value::Init(im) => Ok(im),
            v => Err(EvalError::Type { expected: "init message", found: v.to_string() }),
        }
    }

    fn holds(&self, cond: &Cond) -> bool {
        match cond {
            Cond::True => true,
            Cond::Empty(ch) => self.inputs.get(ch).is_none_or(Vec::is_empty),
            Cond::NonEmpty(ch) => self.inputs.get(ch).is_some_and(|xs| !xs.is_empty()),
            Cond::Eq(a, b) => self.equal(a, b),
            Cond::Ne(a, b) => !self.equal(a, b),
            Cond::Not(c) => !self.holds(c),
            Cond::All(cs) => cs.iter().all(|c| self.holds(c)),
            Cond::Any(cs) => cs.iter().any(|c| self.holds(c)),
        }
    }

    fn equal(&self, a: &Term, b: &Term) -> bool {
        match (self.eval(a), self.eval(b)) {
            (Ok(x), Ok(y)) => x.same(&y),
            _ => false,
        }
    }

    fn bind_all(&mut self, defs: &[(String, Term)]) {
        for (name, term) in defs {
            let v = self.eval(term);
            self.bindings.insert(name.clone(), v);
        }
    }
}

fn to_message(v: Value) -> Result<Message, EvalError> {
    match v {
        Value::Item(i) => Ok(Message::Expr(Expression::singleton(i))),
        Value::Expr(e) => Ok(Message::Expr(e)),
        Value::Init(im) => Ok(Message::Init(im)),
        Value::Event => Ok(Message::Event),
        Value::Sym(s) => Err(EvalError::Type { expected: "message", found: s.to_string() }),
    }
}

fn check_type(spec: &ComponentSpec, transition: &str, channel: &str, m: &Message) -> Result<(), StepError> {
    let expected = spec.output_port(channel).map(|p| p.ty);
    match expected {
        Some(ty) if ty != m.msg_type() => Err(StepError::TypeMismatch {
            transition: transition.to_string(),
            channel: channel.to_string(),
            expected: ty,
            found: m.msg_type(),
        }),
        _ => Ok(()),
    }
}

/// The time-0 emissions of a component.
pub fn initial_emissions(spec: &ComponentSpec) -> Result<BTreeMap<String, Vec<Message>>, StepError> {
    let locals = spec.initial_locals();
    let inputs = Inputs::new();
    let env = Env { locals: &locals, inputs: &inputs, bindings: Bindings::new() };
    let mut out: BTreeMap<String, Vec<Message>> = BTreeMap::new();
    for (channel, term) in &spec.initial_output {
        let m = env
            .eval(term)
            .and_then(to_message)
            .map_err(|source| StepError::Eval { transition: "init".into(), source })?;
        check_type(spec, "init", channel, &m)?;
        out.entry(channel.clone()).or_default().push(m);
    }
    Ok(out)
}

/// Evaluates one time unit of `spec`.
///
/// The caller decides when the emissions land (`t + 1` for strongly causal
/// components, `t` for weakly causal ones).
pub fn step(
    spec: &ComponentSpec,
    locals: &BTreeMap<String, Value>,
    inputs: &Inputs,
    t: Time,
) -> Result<StepOutcome, StepError> {
    for bound in spec.msg_bounds() {
        let found = inputs.get(bound.channel).map_or(0, Vec::len);
        if found > bound.n {
            return Err(StepError::AssumptionViolated { channel: bound.channel.to_string(), bound: bound.n, found, t });
        }
    }

    let mut env = Env { locals, inputs, bindings: Bindings::new() };
    env.bind_all(&spec.where_clause);
    let shared = env.bindings.clone();

    let mut updates: BTreeMap<String, (String, Value)> = BTreeMap::new();
    let mut emissions: BTreeMap<String, (String, Vec<Message>)> = BTreeMap::new();
    let mut fired = Vec::new();
    let mut bindings = BTreeMap::new();

    for tr in &spec.transitions {
        env.bindings = shared.clone();
        env.bind_all(&tr.bindings);
        if !env.holds(&tr.guard) {
            continue;
        }
        fired.push(tr.label.clone());
        let eval_err = |source| StepError::Eval { transition: tr.label.clone(), source };

        for (name, _) in &tr.bindings {
            if let Some(Ok(v)) = env.bindings.get(name) {
                bindings.insert(name.clone(), v.clone());
            }
        }

        for (local, term) in &tr.updates {
            let v = env.eval(term).map_err(eval_err)?;
            let decl = spec.locals.iter().find(|l| &l.name == local);
            if let (Some(domain), Value::Sym(s)) = (decl.and_then(|d| d.domain.as_ref()), &v) {
                if !domain.iter().any(|d| **d == **s) {
                    return Err(StepError::OutsideDomain {
                        transition: tr.label.clone(),
                        local: local.clone(),
                        value: s.to_string(),
                    });
                }
            }
            match updates.get(local) {
                Some((first, prev)) if !prev.same(&v) => {
                    return Err(StepError::ConflictingUpdates {
                        target: local.clone(),
                        first: first.clone(),
                        second: tr.label.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    updates.insert(local.clone(), (tr.label.clone(), v));
                }
            }
        }

        for (channel, emit) in &tr.emissions {
            let messages = match emit {
                Emit::Term(term) => vec![env.eval(term).and_then(to_message).map_err(eval_err)?],
                Emit::Forward(input) => inputs.get(input).cloned().unwrap_or_default(),
            };
            for m in &messages {
                check_type(spec, &tr.label, channel, m)?;
            }
            match emissions.get(channel) {
                Some((first, prev)) if *prev != messages => {
                    return Err(StepError::ConflictingUpdates {
                        target: channel.clone(),
                        first: first.clone(),
                        second: tr.label.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    emissions.insert(channel.clone(), (tr.label.clone(), messages));
                }
            }
        }
    }

    let mut next = locals.clone();
    for (local, (_, v)) in updates {
        next.insert(local, v);
    }
    Ok(StepOutcome {
        locals: next,
        emissions: emissions.into_iter().filter(|(_, (_, ms))| !ms.is_empty()).map(|(ch, (_, ms))| (ch, ms)).collect(),
        fired,
        bindings,
    })
}
