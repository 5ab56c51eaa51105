//! Adversary knowledge and deducibility.
//!
//! Deciding `knows` is done in two phases. Analysis saturates the observed
//! terms under decomposition: sequences split into their items, ciphertexts
//! open when the inverse key is known, and signatures yield their payload
//! when the verification key is known. Synthesis then asks whether a target
//! can be assembled from the saturated set by concatenation, encryption and
//! signing with known keys. Every analysis step adds a strict subterm of
//! something already present, so saturation terminates; synthesis recurses on
//! the target's structure.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::stream::Time;
use crate::term::{Atom, Expression, Item};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnowledgeError {
    #[error("{0} belongs to the observer's own keys and secrets")]
    OwnKeyOrSecret(String),
    #[error("{0} is not a key or a secret")]
    NotKeyOrSecret(String),
}

/// A saturated set of items: closed under the analysis rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Analysis {
    known: BTreeSet<Item>,
}

impl Analysis {
    pub fn saturate<'a>(seeds: impl IntoIterator<Item = &'a Expression>) -> Analysis {
        let mut known = BTreeSet::new();
        // locked terms keyed by the atom that opens them
        let mut waiting: BTreeMap<Atom, Vec<Expression>> = BTreeMap::new();
        let mut queue: Vec<Item> = seeds.into_iter().flat_map(|e| e.items().iter().cloned()).collect();

        while let Some(item) = queue.pop() {
            if known.contains(&item) {
                continue;
            }
            match &item {
                Item::Atom(a) => {
                    if let Some(unlocked) = waiting.remove(a) {
                        queue.extend(unlocked.into_iter().flat_map(Expression::into_items));
                    }
                }
                Item::Enc(k, payload) | Item::Sig(k, payload) => {
                    // Encryptions need the decryption key; signatures need the
                    // verification key. Both are the inverse of the key used.
                    if let Some(opener) = k.inverse() {
                        let opener = opener.atom().clone();
                        if known.contains(&Item::Atom(opener.clone())) {
                            queue.extend(payload.items().iter().cloned());
                        } else {
                            waiting.entry(opener).or_default().push(payload.clone());
                        }
                    }
                }
            }
            known.insert(item);
        }
        Analysis { known }
    }

    pub fn contains(&self, item: &Item) -> bool {
        self.known.contains(item)
    }

    pub fn knows_atom(&self, atom: &Atom) -> bool {
        self.known.contains(&Item::Atom(atom.clone()))
    }

    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.known.iter()
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    /// Whether every item of `target` can be synthesized. `<>` always can.
    pub fn derivable(&self, target: &Expression) -> bool {
        target.items().iter().all(|i| self.synthesizable(i))
    }

    fn synthesizable(&self, item: &Item) -> bool {
        if self.known.contains(item) {
            return true;
        }
        match item {
            Item::Atom(_) => false,
            Item::Enc(k, payload) | Item::Sig(k, payload) => self.knows_atom(k.atom()) && self.derivable(payload),
        }
    }

    /// Sorted canonical renderings, one per line.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self.known.iter().map(ToString::to_string).collect();
        lines.sort();
        lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

/// What one component knows: its own keys and secrets, a-priori terms, and
/// everything it has received, stamped with the time unit of receipt.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    own: BTreeSet<Atom>,
    initial: Vec<Expression>,
    observed: Vec<(Time, Expression)>,
    analyzed: OnceLock<Arc<Analysis>>,
}

impl KnowledgeBase {
    /// `own` is the observer's `KS` set; it seeds the knowledge and is
    /// excluded from [`KnowledgeBase::know_item`] queries.
    pub fn new(own: impl IntoIterator<Item = Atom>, initial: impl IntoIterator<Item = Expression>) -> KnowledgeBase {
        let own: BTreeSet<Atom> = own.into_iter().collect();
        let mut seeds: Vec<Expression> = own.iter().map(|a| Expression::singleton(a.clone())).collect();
        seeds.extend(initial);
        KnowledgeBase { own, initial: seeds, ..KnowledgeBase::default() }
    }

    pub fn from_terms(initial: impl IntoIterator<Item = Expression>) -> KnowledgeBase {
        KnowledgeBase::new(std::iter::empty(), initial)
    }

    pub fn observe(&self, t: Time, e: Expression) -> KnowledgeBase {
        let mut observed = self.observed.clone();
        observed.push((t, e));
        KnowledgeBase { own: self.own.clone(), initial: self.initial.clone(), observed, analyzed: OnceLock::new() }
    }

    /// The knowledge available at time unit `t`.
    pub fn at(&self, t: Time) -> KnowledgeBase {
        KnowledgeBase {
            own: self.own.clone(),
            initial: self.initial.clone(),
            observed: self.observed.iter().filter(|(u, _)| *u <= t).cloned().collect(),
            analyzed: OnceLock::new(),
        }
    }

    pub fn own(&self) -> &BTreeSet<Atom> {
        &self.own
    }

    pub fn initial(&self) -> &[Expression] {
        &self.initial
    }

    pub fn observed(&self) -> &[(Time, Expression)] {
        &self.observed
    }

    pub fn terms(&self) -> impl Iterator<Item = &Expression> {
        self.initial.iter().chain(self.observed.iter().map(|(_, e)| e))
    }

    pub fn analyze(&self) -> &Analysis {
        self.analyzed.get_or_init(|| Arc::new(Analysis::saturate(self.terms())))
    }

    pub fn derivable(&self, target: &Expression) -> bool {
        self.analyze().derivable(target)
    }

    /// `know(m)` for a key or secret outside the observer's own `KS` set.
    pub fn know_item(&self, m: &Atom) -> Result<bool, KnowledgeError> {
        if !m.kind().is_key_or_secret() {
            return Err(KnowledgeError::NotKeyOrSecret(m.label().to_string()));
        }
        if self.own.contains(m) {
            return Err(KnowledgeError::OwnKeyOrSecret(m.label().to_string()));
        }
        Ok(self.derivable(&Expression::singleton(m.clone())))
    }

    /// Earliest time unit `<= t` at which `target` becomes derivable.
    pub fn earliest(&self, target: &Expression, t: Time) -> Option<Time> {
        let mut times: Vec<Time> = self.observed.iter().map(|(u, _)| *u).filter(|u| *u <= t).collect();
        times.push(0);
        times.sort_unstable();
        times.dedup();
        times.into_iter().find(|u| self.at(*u).derivable(target))
    }

    /// Targets derivable by time `t`, each with its earliest leak time.
    pub fn leak_check(&self, targets: &[SecrecyTarget], t: Time) -> Vec<Leak> {
        targets
            .iter()
            .filter_map(|target| {
                let e = Expression::singleton(target.item.clone());
                self.earliest(&e, t).map(|time| Leak { target: target.clone(), time })
            })
            .collect()
    }

    pub fn dump(&self) -> String {
        self.analyze().dump()
    }
}

/// A key or secret that must stay out of an observer's knowledge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecrecyTarget {
    item: Atom,
    owner_exclusion: BTreeSet<String>,
}

impl SecrecyTarget {
    /// `owner_exclusion` names the components whose `KS` sets must not
    /// contain the item.
    pub fn new(item: Atom, owner_exclusion: impl IntoIterator<Item = String>) -> Result<SecrecyTarget, KnowledgeError> {
        if !item.kind().is_key_or_secret() {
            return Err(KnowledgeError::NotKeyOrSecret(item.label().to_string()));
        }
        Ok(SecrecyTarget { item, owner_exclusion: owner_exclusion.into_iter().collect() })
    }

    pub fn item(&self) -> &Atom {
        &self.item
    }

    pub fn owner_exclusion(&self) -> &BTreeSet<String> {
        &self.owner_exclusion
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leak {
    pub target: SecrecyTarget,
    pub time: Time,
}
