//! Symbolic message terms.
//!
//! Atoms are partitioned into data values, keys, unguessable secrets and
//! specification variables. Encryption and signing are free constructors;
//! decryption and signature extraction are the matching destructors and only
//! succeed with the inverse key, so the two Dolev-Yao equations
//!
//! ```text
//! decr(inv(K), enc(K, e)) = e
//! ext(K, sign(inv(K), e)) = e
//! ```
//!
//! hold by construction and nothing else does.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// The four disjoint atom universes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Data,
    Key,
    Secret,
    Var,
}

impl AtomKind {
    /// Keys and secrets, the `KS` universe.
    pub fn is_key_or_secret(self) -> bool {
        matches!(self, AtomKind::Key | AtomKind::Secret)
    }
}

impl fmt::Display for AtomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AtomKind::Data => "data",
            AtomKind::Key => "key",
            AtomKind::Secret => "secret",
            AtomKind::Var => "var",
        })
    }
}

/// An atomic term. Keys carry the label of their inverse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    kind: AtomKind,
    label: Arc<str>,
    inverse: Option<Arc<str>>,
}

impl Atom {
    pub fn data(label: &str) -> Atom {
        Atom { kind: AtomKind::Data, label: label.into(), inverse: None }
    }

    pub fn secret(label: &str) -> Atom {
        Atom { kind: AtomKind::Secret, label: label.into(), inverse: None }
    }

    pub fn var(label: &str) -> Atom {
        Atom { kind: AtomKind::Var, label: label.into(), inverse: None }
    }

    /// A symmetric key: its own inverse.
    pub fn symmetric_key(label: &str) -> Atom {
        Atom { kind: AtomKind::Key, label: label.into(), inverse: Some(label.into()) }
    }

    /// An asymmetric key pair `(public, private)`. The private half is named
    /// `<label>^-1`.
    pub fn key_pair(label: &str) -> (Atom, Atom) {
        let private = format!("{label}^-1");
        let public = Atom { kind: AtomKind::Key, label: label.into(), inverse: Some(private.as_str().into()) };
        let private = Atom { kind: AtomKind::Key, label: private.as_str().into(), inverse: Some(label.into()) };
        (public, private)
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_key(&self) -> bool {
        self.kind == AtomKind::Key
    }

    pub fn is_symmetric(&self) -> bool {
        self.inverse.as_deref() == Some(&*self.label)
    }

    /// The inverse key, if this atom is a key.
    pub fn inverse(&self) -> Option<Atom> {
        let inverse = self.inverse.as_ref()?;
        Some(Atom { kind: AtomKind::Key, label: inverse.clone(), inverse: Some(self.label.clone()) })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// An atom usable as an encryption or signing key: kind `Key` or `Var`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Encryptor(Atom);

impl Encryptor {
    pub fn new(atom: Atom) -> Result<Encryptor, TermError> {
        match atom.kind {
            AtomKind::Key | AtomKind::Var => Ok(Encryptor(atom)),
            kind => Err(TermError::NotAnEncryptor { label: atom.label.to_string(), kind }),
        }
    }

    pub fn atom(&self) -> &Atom {
        &self.0
    }

    /// Variables have no inverse.
    pub fn inverse(&self) -> Option<Encryptor> {
        self.0.inverse().map(Encryptor)
    }
}

impl TryFrom<Atom> for Encryptor {
    type Error = TermError;

    fn try_from(atom: Atom) -> Result<Self, Self::Error> {
        Encryptor::new(atom)
    }
}

impl fmt::Display for Encryptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One element of an expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Atom(Atom),
    Enc(Encryptor, Expression),
    Sig(Encryptor, Expression),
}

impl Item {
    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Item::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Nesting depth: atoms are depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Item::Atom(_) => 0,
            Item::Enc(_, p) | Item::Sig(_, p) => 1 + p.depth(),
        }
    }

    /// Every atom occurring in this item, encryptors included.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Item::Atom(a) => out.push(a.clone()),
            Item::Enc(k, p) | Item::Sig(k, p) => {
                out.push(k.atom().clone());
                for item in p.items() {
                    item.collect_atoms(out);
                }
            }
        }
    }
}

impl From<Atom> for Item {
    fn from(atom: Atom) -> Self {
        Item::Atom(atom)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Atom(a) => a.fmt(f),
            Item::Enc(k, p) => write!(f, "enc({k}, {p})"),
            Item::Sig(k, p) => write!(f, "sig({k}, {p})"),
        }
    }
}

/// A finite sequence of items. `<>` is the empty expression.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expression(Vec<Item>);

impl Expression {
    pub fn empty() -> Expression {
        Expression(Vec::new())
    }

    pub fn new(items: Vec<Item>) -> Expression {
        Expression(items)
    }

    pub fn singleton(item: impl Into<Item>) -> Expression {
        Expression(vec![item.into()])
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn into_items(self) -> Vec<Item> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.iter().map(Item::depth).max().unwrap_or(0)
    }

    /// The single item of a one-element expression.
    pub fn as_single(&self) -> Option<&Item> {
        match self.0.as_slice() {
            [item] => Some(item),
            _ => None,
        }
    }
}

impl From<Vec<Item>> for Expression {
    fn from(items: Vec<Item>) -> Self {
        Expression(items)
    }
}

impl FromIterator<Item> for Expression {
    fn from_iter<T: IntoIterator<Item = Item>>(iter: T) -> Self {
        Expression(iter.into_iter().collect())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            item.fmt(f)?;
        }
        f.write_str(">")
    }
}

/// 1-based accessor positions used by the specifications (`ft`, `snd`, `trd`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    First,
    Second,
    Third,
}

impl Position {
    pub fn index(self) -> usize {
        match self {
            Position::First => 0,
            Position::Second => 1,
            Position::Third => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("expression is not a single encryption term")]
    NotAnEncryption,
    #[error("expression is not a single signature term")]
    NotASignature,
    #[error("key {used} does not invert {expected}")]
    WrongKey { used: String, expected: String },
    #[error("expression of length {len} has no element at position {position}")]
    OutOfRange { position: usize, len: usize },
    #[error("{label} is a {kind} atom and cannot encrypt or sign")]
    NotAnEncryptor { label: String, kind: AtomKind },
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("unknown atom {0}")]
    UnknownAtom(String),
    #[error("atom label {0} is already registered")]
    DuplicateLabel(String),
    #[error("invalid atom label {0:?}")]
    InvalidLabel(String),
}

/// `<enc(k, e)>`.
pub fn enc(k: &Encryptor, e: &Expression) -> Expression {
    Expression::singleton(Item::Enc(k.clone(), e.clone()))
}

/// Opens `<enc(k', p)>` when `k` is the inverse of `k'`.
pub fn decr(k: &Encryptor, e: &Expression) -> Result<Expression, TermError> {
    match e.as_single() {
        Some(Item::Enc(used, payload)) => open(k, used, payload),
        _ => Err(TermError::NotAnEncryption),
    }
}

/// `<sig(k, e)>`.
pub fn sign(k: &Encryptor, e: &Expression) -> Expression {
    Expression::singleton(Item::Sig(k.clone(), e.clone()))
}

/// Verifies `<sig(k', p)>` against `k` (the inverse of `k'`) and returns `p`.
pub fn ext(k: &Encryptor, e: &Expression) -> Result<Expression, TermError> {
    match e.as_single() {
        Some(Item::Sig(used, payload)) => open(k, used, payload),
        _ => Err(TermError::NotASignature),
    }
}

fn open(k: &Encryptor, used: &Encryptor, payload: &Expression) -> Result<Expression, TermError> {
    if used.inverse().as_ref() == Some(k) {
        Ok(payload.clone())
    } else {
        Err(TermError::WrongKey { used: k.to_string(), expected: used.to_string() })
    }
}

pub fn concat(a: &Expression, b: &Expression) -> Expression {
    a.0.iter().chain(b.0.iter()).cloned().collect()
}

pub fn element(e: &Expression, position: Position) -> Result<Item, TermError> {
    e.0.get(position.index()).cloned().ok_or(TermError::OutOfRange { position: position.index() + 1, len: e.len() })
}

const RESERVED: &[&str] = &["enc", "sig", "im", "event"];

fn valid_label(label: &str) -> bool {
    let base = label.strip_suffix("^-1").unwrap_or(label);
    !base.is_empty() && base.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED.contains(&base)
}

/// Registry of the atoms used by a scenario. Labels are unique.
#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    atoms: BTreeMap<String, Atom>,
}

impl AtomTable {
    pub fn new() -> AtomTable {
        AtomTable::default()
    }

    pub fn insert(&mut self, atom: Atom) -> Result<(), TermError> {
        if !valid_label(atom.label()) {
            return Err(TermError::InvalidLabel(atom.label().to_string()));
        }
        if self.atoms.contains_key(atom.label()) {
            return Err(TermError::DuplicateLabel(atom.label().to_string()));
        }
        self.atoms.insert(atom.label().to_string(), atom);
        Ok(())
    }

    pub fn add_data(&mut self, label: &str) -> Result<Atom, TermError> {
        let atom = Atom::data(label);
        self.insert(atom.clone())?;
        Ok(atom)
    }

    pub fn add_secret(&mut self, label: &str) -> Result<Atom, TermError> {
        let atom = Atom::secret(label);
        self.insert(atom.clone())?;
        Ok(atom)
    }

    pub fn add_var(&mut self, label: &str) -> Result<Atom, TermError> {
        let atom = Atom::var(label);
        self.insert(atom.clone())?;
        Ok(atom)
    }

    pub fn add_symmetric_key(&mut self, label: &str) -> Result<Atom, TermError> {
        let atom = Atom::symmetric_key(label);
        self.insert(atom.clone())?;
        Ok(atom)
    }

    /// Registers both halves of an asymmetric pair; returns `(public, private)`.
    pub fn add_key_pair(&mut self, label: &str) -> Result<(Atom, Atom), TermError> {
        let (public, private) = Atom::key_pair(label);
        if self.atoms.contains_key(private.label()) {
            return Err(TermError::DuplicateLabel(private.label().to_string()));
        }
        self.insert(public.clone())?;
        self.insert(private.clone())?;
        Ok((public, private))
    }

    pub fn get(&self, label: &str) -> Option<&Atom> {
        self.atoms.get(label)
    }

    pub fn lookup(&self, label: &str) -> Result<&Atom, TermError> {
        self.get(label).ok_or_else(|| TermError::UnknownAtom(label.to_string()))
    }

    pub fn key_inverse(&self, label: &str) -> Result<Atom, TermError> {
        self.get(label).and_then(Atom::inverse).ok_or_else(|| TermError::UnknownKey(label.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}
