//! Values carried on channels.

use std::fmt;
use std::str::FromStr;

use crate::term::{concat, Atom, AtomKind, Expression, Item};

/// Channel type tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MsgType {
    Event,
    Expression,
    InitMessage,
}

impl fmt::Display for MsgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MsgType::Event => "Event",
            MsgType::Expression => "Expression",
            MsgType::InitMessage => "InitMessage",
        })
    }
}

impl FromStr for MsgType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Event" => Ok(MsgType::Event),
            "Expression" => Ok(MsgType::Expression),
            "InitMessage" => Ok(MsgType::InitMessage),
            other => Err(format!("unknown message type {other}")),
        }
    }
}

/// `im(ungValue, key, msg)`: the protocol initiation record.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InitMessage {
    ung_value: Atom,
    key: Atom,
    msg: Expression,
}

impl InitMessage {
    /// `None` unless `ung_value` is a secret and `key` a key.
    pub fn new(ung_value: Atom, key: Atom, msg: Expression) -> Option<InitMessage> {
        (ung_value.kind() == AtomKind::Secret && key.kind() == AtomKind::Key).then_some(InitMessage {
            ung_value,
            key,
            msg,
        })
    }

    pub fn ung_value(&self) -> &Atom {
        &self.ung_value
    }

    pub fn key(&self) -> &Atom {
        &self.key
    }

    pub fn msg(&self) -> &Expression {
        &self.msg
    }

    /// The terms an observer learns from this record: `<ungValue, key> ^ msg`.
    pub fn to_expression(&self) -> Expression {
        let head = Expression::new(vec![Item::Atom(self.ung_value.clone()), Item::Atom(self.key.clone())]);
        concat(&head, &self.msg)
    }
}

impl fmt::Display for InitMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "im({}, {}, {})", self.ung_value, self.key, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Message {
    Expr(Expression),
    Init(InitMessage),
    Event,
}

impl Message {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Message::Expr(_) => MsgType::Expression,
            Message::Init(_) => MsgType::InitMessage,
            Message::Event => MsgType::Event,
        }
    }

    /// What an observer of this message can analyse. Events carry no terms.
    pub fn to_expression(&self) -> Expression {
        match self {
            Message::Expr(e) => e.clone(),
            Message::Init(im) => im.to_expression(),
            Message::Event => Expression::empty(),
        }
    }
}

impl From<Expression> for Message {
    fn from(e: Expression) -> Self {
        Message::Expr(e)
    }
}

impl From<InitMessage> for Message {
    fn from(im: InitMessage) -> Self {
        Message::Init(im)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Expr(e) => e.fmt(f),
            Message::Init(im) => im.fmt(f),
            Message::Event => f.write_str("event"),
        }
    }
}
