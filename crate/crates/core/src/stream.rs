//! Finite prefixes of timed streams: per time unit, an ordered list of
//! messages. Unpopulated intervals read as empty.

use std::collections::BTreeMap;

pub type Time = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedStream<M> {
    intervals: BTreeMap<Time, Vec<M>>,
}

impl<M> Default for TimedStream<M> {
    fn default() -> Self {
        TimedStream { intervals: BTreeMap::new() }
    }
}

impl<M> TimedStream<M> {
    pub fn new() -> Self {
        Self::default()
    }

    /// The messages transmitted during time unit `t`.
    pub fn interval(&self, t: Time) -> &[M] {
        self.intervals.get(&t).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Appends `message` to interval `t`, after anything already there.
    pub fn emit(&mut self, t: Time, message: M) {
        self.intervals.entry(t).or_default().push(message);
    }

    /// Last time unit holding a message.
    pub fn horizon(&self) -> Option<Time> {
        self.intervals.keys().next_back().copied()
    }

    /// At most `n` messages in every interval up to `horizon`.
    pub fn msg_bound(&self, n: usize, horizon: Time) -> bool {
        self.intervals.range(..=horizon).all(|(_, xs)| length(xs) <= n)
    }

    /// Populated intervals in time order.
    pub fn iter(&self) -> impl Iterator<Item = (Time, &M)> {
        self.intervals.iter().flat_map(|(t, xs)| xs.iter().map(move |m| (*t, m)))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

impl<M: Clone> TimedStream<M> {
    /// The prefix up to and including `t`.
    pub fn truncate(&self, t: Time) -> Self {
        TimedStream { intervals: self.intervals.range(..=t).map(|(k, v)| (*k, v.clone())).collect() }
    }
}

/// `#xs`.
pub fn length<M>(xs: &[M]) -> usize {
    xs.len()
}
