//! Synchronous simulation of a composite over a finite horizon.
//!
//! Each time unit, weakly causal parts run first in dataflow order so their
//! same-time outputs are visible to everyone reading interval `t`; strongly
//! causal parts then read the complete interval and emit into `t + 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::knowledge::KnowledgeBase;
use crate::message::{Message, MsgType};
use crate::stream::{Time, TimedStream};

use super::compose::{Composite, PortRef};
use super::eval::{initial_emissions, step, Inputs, StepError};
use super::{Causality, Value};

/// One component step at one time unit.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub component: String,
    pub t: Time,
    pub fired: Vec<String>,
    pub before: BTreeMap<String, Value>,
    pub after: BTreeMap<String, Value>,
    pub inputs: Inputs,
    pub emissions: BTreeMap<String, Vec<Message>>,
    /// Interval the emissions are scheduled into.
    pub emit_at: Time,
    pub bindings: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub name: String,
    pub ty: MsgType,
    pub producer: PortRef,
    pub consumers: Vec<PortRef>,
    pub stream: TimedStream<Message>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub horizon: Time,
    pub channels: BTreeMap<String, ChannelTrace>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("{component} at t={t}: {source}")]
    Step {
        component: String,
        t: Time,
        source: StepError,
        /// Everything recorded before the failing step.
        partial: Box<Trace>,
    },
}

impl RunError {
    pub fn source_error(&self) -> &StepError {
        match self {
            RunError::Step { source, .. } => source,
        }
    }

    pub fn partial(&self) -> &Trace {
        match self {
            RunError::Step { partial, .. } => partial,
        }
    }
}

impl Trace {
    pub fn channel(&self, name: &str) -> Option<&TimedStream<Message>> {
        self.channels.get(name).map(|c| &c.stream)
    }

    /// Messages on `channel` during interval `t`.
    pub fn at(&self, channel: &str, t: Time) -> &[Message] {
        self.channel(channel).map_or(&[], |s| s.interval(t))
    }

    /// `(time, channel, message)` in time order, then channel name.
    pub fn events(&self) -> Vec<(Time, &str, &Message)> {
        let mut out: Vec<(Time, &str, &Message)> =
            self.channels.values().flat_map(|c| c.stream.iter().map(move |(t, m)| (t, c.name.as_str(), m))).collect();
        out.sort_by_key(|(t, ch, _)| (*t, *ch));
        out
    }

    /// One `t=<n> <channel> : <message>` line per message.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (t, ch, m) in self.events() {
            let _ = writeln!(out, "t={t} {ch} : {m}");
        }
        out
    }

    pub fn steps_of<'a>(&'a self, component: &'a str) -> impl Iterator<Item = &'a StepRecord> {
        self.steps.iter().filter(move |s| s.component == component)
    }

    /// What `component` knows after the run: its `KS` and `LS` sets plus
    /// every message that reached one of its input ports, stamped with the
    /// interval it arrived in.
    pub fn knowledge_of(&self, composite: &Composite, component: &str) -> Option<KnowledgeBase> {
        let part = composite.part(component)?;
        let mut kb = KnowledgeBase::new(part.ks(), part.local_secrets.iter().cloned());
        let mut seen: Vec<(Time, &Message)> = Vec::new();
        for port in &part.inputs {
            let Some(channel) = composite.feed(component, &port.name) else { continue };
            if let Some(stream) = self.channel(channel) {
                seen.extend(stream.iter());
            }
        }
        seen.sort_by_key(|(t, _)| *t);
        for (t, m) in seen {
            kb = kb.observe(t, m.to_expression());
        }
        Some(kb)
    }
}

/// Simulates `c` over time units `0..=horizon`. Emissions scheduled past the
/// horizon are dropped.
pub fn run(c: &Composite, horizon: Time) -> Result<Trace, RunError> {
    let mut trace = Trace {
        horizon,
        channels: c
            .wires()
            .map(|w| {
                (
                    w.name.clone(),
                    ChannelTrace {
                        name: w.name.clone(),
                        ty: w.ty,
                        producer: w.producer.clone(),
                        consumers: w.consumers.clone(),
                        stream: TimedStream::new(),
                    },
                )
            })
            .collect(),
        steps: Vec::new(),
    };

    let parts = c.parts();
    let mut locals: Vec<BTreeMap<String, Value>> = parts.iter().map(|p| p.initial_locals()).collect();

    for p in parts {
        let out = initial_emissions(p).map_err(|source| RunError::Step {
            component: p.name.clone(),
            t: 0,
            source,
            partial: Box::new(trace.clone()),
        })?;
        deliver(&mut trace, out, 0);
    }

    let schedule = c.schedule();
    for t in 0..=horizon {
        for &i in &schedule {
            let p = &parts[i];
            let inputs: Inputs = p
                .inputs
                .iter()
                .map(|port| {
                    let messages = c.feed(&p.name, &port.name).map(|ch| trace.at(ch, t).to_vec());
                    (port.name.clone(), messages.unwrap_or_default())
                })
                .collect();
            let outcome = step(p, &locals[i], &inputs, t).map_err(|source| RunError::Step {
                component: p.name.clone(),
                t,
                source,
                partial: Box::new(trace.clone()),
            })?;
            let emit_at = match p.causality {
                Causality::Strong => t + 1,
                Causality::Weak => t,
            };
            if emit_at <= horizon {
                deliver(&mut trace, outcome.emissions.clone(), emit_at);
            }
            trace.steps.push(StepRecord {
                component: p.name.clone(),
                t,
                fired: outcome.fired,
                before: std::mem::replace(&mut locals[i], outcome.locals.clone()),
                after: outcome.locals,
                inputs,
                emissions: outcome.emissions,
                emit_at,
                bindings: outcome.bindings,
            });
        }
    }
    Ok(trace)
}

fn deliver(trace: &mut Trace, emissions: BTreeMap<String, Vec<Message>>, t: Time) {
    for (channel, messages) in emissions {
        if let Some(c) = trace.channels.get_mut(&channel) {
            for m in messages {
                c.stream.emit(t, m);
            }
        }
    }
}
