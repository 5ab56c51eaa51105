//! Short constructors for writing component specifications in Rust.

use crate::term::{Atom, Expression, Position};

use super::{Cond, Term, Value};

pub fn local(name: &str) -> Term {
    Term::Local(name.to_string())
}

pub fn bound(name: &str) -> Term {
    Term::Bound(name.to_string())
}

/// `ft s^t`
pub fn input(channel: &str) -> Term {
    Term::Input(channel.to_string())
}

pub fn sym(s: &str) -> Term {
    Term::Const(Value::sym(s))
}

pub fn atom(a: &Atom) -> Term {
    Term::Const(Value::atom(a))
}

pub fn expr(e: Expression) -> Term {
    Term::Const(Value::Expr(e))
}

pub fn event() -> Term {
    Term::Const(Value::Event)
}

pub fn seq(terms: Vec<Term>) -> Term {
    Term::Seq(terms)
}

pub fn enc(k: Term, payload: Term) -> Term {
    Term::Enc(Box::new(k), Box::new(payload))
}

pub fn decr(k: Term, e: Term) -> Term {
    Term::Decr(Box::new(k), Box::new(e))
}

pub fn sign(k: Term, payload: Term) -> Term {
    Term::Sign(Box::new(k), Box::new(payload))
}

pub fn ext(k: Term, e: Term) -> Term {
    Term::Ext(Box::new(k), Box::new(e))
}

pub fn ft(e: Term) -> Term {
    Term::Elem(Box::new(e), Position::First)
}

pub fn snd(e: Term) -> Term {
    Term::Elem(Box::new(e), Position::Second)
}

pub fn trd(e: Term) -> Term {
    Term::Elem(Box::new(e), Position::Third)
}

pub fn im(ung_value: Term, key: Term, msg: Term) -> Term {
    Term::Im(Box::new(ung_value), Box::new(key), Box::new(msg))
}

pub fn ung_value(init: Term) -> Term {
    Term::UngValue(Box::new(init))
}

pub fn key_of(init: Term) -> Term {
    Term::KeyOf(Box::new(init))
}

pub fn msg_of(init: Term) -> Term {
    Term::MsgOf(Box::new(init))
}

pub fn empty(channel: &str) -> Cond {
    Cond::Empty(channel.to_string())
}

pub fn nonempty(channel: &str) -> Cond {
    Cond::NonEmpty(channel.to_string())
}

pub fn eq(a: Term, b: Term) -> Cond {
    Cond::Eq(a, b)
}

pub fn ne(a: Term, b: Term) -> Cond {
    Cond::Ne(a, b)
}

pub fn all(cs: Vec<Cond>) -> Cond {
    Cond::All(cs)
}

pub fn any(cs: Vec<Cond>) -> Cond {
    Cond::Any(cs)
}
