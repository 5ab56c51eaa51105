//! The TLS handshake case study: Client, Server and a man-in-the-middle
//! Adversary, plus the corrected Client and Server that close the attack.
//!
//! Channel schedule of a run: `init` at 0, then `resp` carries the nonce echo
//! at 1, the CA certificate at 2 and the session-key ciphertext at 3; the
//! client answers on `xchd` (or aborts) at 4.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::component::dsl::*;
use crate::component::{Causality, ComponentSpec, Connection, Term, Transition};
use crate::knowledge::SecrecyTarget;
use crate::message::MsgType;
use crate::term::{Atom, AtomTable, Expression, Item, TermError};

pub const CLIENT: &str = "Client";
pub const SERVER: &str = "Server";
pub const ADVERSARY: &str = "Adversary";

/// Labels of the protocol atoms. Defaults are the names used in the
/// protocol description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TlsLabels {
    pub n: String,
    pub secret_d: String,
    pub c_key: String,
    pub s_key: String,
    pub ca_key: String,
    pub a_key: String,
    pub gen_key: String,
    pub c: String,
    pub s: String,
}

impl Default for TlsLabels {
    fn default() -> Self {
        TlsLabels {
            n: "N".into(),
            secret_d: "secretD".into(),
            c_key: "CKey".into(),
            s_key: "SKey".into(),
            ca_key: "CAKey".into(),
            a_key: "AKey".into(),
            gen_key: "genKey".into(),
            c: "C".into(),
            s: "S".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("unknown parameter {0}")]
    UnknownParameter(String),
    #[error(transparent)]
    Label(#[from] TermError),
}

impl TlsLabels {
    pub const NAMES: [&'static str; 9] = ["N", "secretD", "CKey", "SKey", "CAKey", "AKey", "genKey", "C", "S"];

    /// Overrides one label by its default name.
    pub fn set(&mut self, name: &str, label: &str) -> Result<(), ParamError> {
        let slot = match name {
            "N" => &mut self.n,
            "secretD" => &mut self.secret_d,
            "CKey" => &mut self.c_key,
            "SKey" => &mut self.s_key,
            "CAKey" => &mut self.ca_key,
            "AKey" => &mut self.a_key,
            "genKey" => &mut self.gen_key,
            "C" => &mut self.c,
            "S" => &mut self.s,
            _ => return Err(ParamError::UnknownParameter(name.to_string())),
        };
        *slot = label.to_string();
        Ok(())
    }
}

/// The atoms of one protocol instance. Private halves are `*_inv`.
#[derive(Debug, Clone)]
pub struct TlsParams {
    pub n: Atom,
    pub secret_d: Atom,
    pub c_key: Atom,
    pub c_key_inv: Atom,
    pub s_key: Atom,
    pub s_key_inv: Atom,
    pub ca_key: Atom,
    pub ca_key_inv: Atom,
    pub a_key: Atom,
    pub a_key_inv: Atom,
    pub gen_key: Atom,
    pub c: Atom,
    pub s: Atom,
    atoms: AtomTable,
}

impl Default for TlsParams {
    fn default() -> Self {
        TlsParams::new(&TlsLabels::default()).expect("default labels are distinct and valid")
    }
}

impl TlsParams {
    pub fn new(labels: &TlsLabels) -> Result<TlsParams, ParamError> {
        let mut atoms = AtomTable::new();
        let n = atoms.add_secret(&labels.n)?;
        let secret_d = atoms.add_secret(&labels.secret_d)?;
        let (c_key, c_key_inv) = atoms.add_key_pair(&labels.c_key)?;
        let (s_key, s_key_inv) = atoms.add_key_pair(&labels.s_key)?;
        let (ca_key, ca_key_inv) = atoms.add_key_pair(&labels.ca_key)?;
        let (a_key, a_key_inv) = atoms.add_key_pair(&labels.a_key)?;
        let gen_key = atoms.add_symmetric_key(&labels.gen_key)?;
        let c = atoms.add_data(&labels.c)?;
        let s = atoms.add_data(&labels.s)?;
        Ok(TlsParams {
            n,
            secret_d,
            c_key,
            c_key_inv,
            s_key,
            s_key_inv,
            ca_key,
            ca_key_inv,
            a_key,
            a_key_inv,
            gen_key,
            c,
            s,
            atoms,
        })
    }

    pub fn atoms(&self) -> &AtomTable {
        &self.atoms
    }

    /// `Sign(CAKey^-1, <S, SKey>)`.
    pub fn certificate(&self) -> Expression {
        crate::term::sign(
            &crate::term::Encryptor::new(self.ca_key_inv.clone()).expect("key"),
            &Expression::new(vec![Item::Atom(self.s.clone()), Item::Atom(self.s_key.clone())]),
        )
    }
}

fn a(atom: &Atom) -> Term {
    crate::component::dsl::atom(atom)
}

fn one(atom: &Atom) -> Expression {
    Expression::singleton(atom.clone())
}

fn client_spec(p: &TlsParams, fixed: bool) -> ComponentSpec {
    let header = all(vec![empty("abortS"), nonempty("resp")]);
    let nonce_ok = eq(snd(bound("res")), a(&p.n));
    let key_ok = eq(trd(bound("res")), a(&p.c_key));
    let res_ok = if fixed { all(vec![nonce_ok, key_ok]) } else { nonce_ok };
    let res_bad = if fixed {
        any(vec![ne(snd(bound("res")), a(&p.n)), ne(trd(bound("res")), a(&p.c_key))])
    } else {
        ne(snd(bound("res")), a(&p.n))
    };

    ComponentSpec::new(CLIENT, Causality::Strong)
        .input("abortS", MsgType::Event)
        .input("resp", MsgType::Expression)
        .output("init", MsgType::InitMessage)
        .output("xchd", MsgType::Expression)
        .output("abortC", MsgType::Event)
        .state("check", "StateC", &["st0", "st1", "st2"], "st0")
        .local("enc", "Keys")
        .initially("init", im(a(&p.n), a(&p.c_key), sign(a(&p.c_key_inv), seq(vec![a(&p.c), a(&p.c_key)]))))
        .define("secr", ext(a(&p.ca_key), input("resp")))
        .define("res", ext(local("enc"), decr(a(&p.c_key_inv), input("resp"))))
        .transition(Transition::new("2").when(nonempty("abortS")).set("check", sym("st0")))
        .transition(
            Transition::new("3")
                .when(all(vec![header.clone(), eq(local("check"), sym("st0"))]))
                .set("check", sym("st1")),
        )
        .transition(
            Transition::new("4")
                .when(all(vec![header.clone(), eq(local("check"), sym("st1")), eq(ft(bound("secr")), a(&p.s))]))
                .set("check", sym("st2"))
                .set("enc", snd(bound("secr"))),
        )
        .transition(
            Transition::new("5")
                .when(all(vec![header, eq(local("check"), sym("st2")), res_ok]))
                .emit("xchd", enc(ft(bound("res")), seq(vec![a(&p.secret_d)])))
                .set("check", sym("st0")),
        )
        .transition(
            Transition::new("6")
                .when(all(vec![
                    empty("abortS"),
                    any(vec![
                        all(vec![
                            eq(local("check"), sym("st1")),
                            any(vec![empty("resp"), all(vec![nonempty("resp"), ne(ft(bound("secr")), a(&p.s))])]),
                        ]),
                        all(vec![
                            eq(local("check"), sym("st2")),
                            any(vec![empty("resp"), all(vec![nonempty("resp"), res_bad])]),
                        ]),
                    ]),
                ]))
                .emit("abortC", event())
                .set("check", sym("st0")),
        )
        .keys([p.c_key_inv.clone()])
        .secrets([p.n.clone(), p.secret_d.clone()])
        .knows([one(&p.c_key), one(&p.ca_key), one(&p.c), one(&p.s)])
}

fn server_spec(p: &TlsParams, fixed: bool) -> ComponentSpec {
    let presented = key_of(input("init"));
    let idle = all(vec![empty("abortC"), eq(local("stateS"), sym("initS")), nonempty("init")]);
    let payload = if fixed {
        seq(vec![a(&p.gen_key), local("uValue"), local("kValue")])
    } else {
        seq(vec![a(&p.gen_key), local("uValue")])
    };

    ComponentSpec::new(SERVER, Causality::Strong)
        .input("init", MsgType::InitMessage)
        .input("abortC", MsgType::Event)
        .input("xchd", MsgType::Expression)
        .output("resp", MsgType::Expression)
        .output("abortS", MsgType::Event)
        .state("stateS", "StateS", &["initS", "waitS", "sendS1", "sendS2"], "initS")
        .local("kValue", "Keys")
        .local("uValue", "Secret")
        .assume_msg("init", 1)
        .assume_msg("xchd", 1)
        .define("signed", snd(ext(key_of(input("init")), msg_of(input("init")))))
        .transition(Transition::new("1").when(nonempty("abortC")).set("stateS", sym("initS")))
        .transition(
            Transition::new("2")
                .when(all(vec![idle.clone(), ne(bound("signed"), presented.clone())]))
                .emit("abortS", event()),
        )
        .transition(
            Transition::new("3")
                .when(all(vec![idle, eq(bound("signed"), presented.clone())]))
                .emit("resp", seq(vec![ung_value(input("init"))]))
                .set("stateS", sym("sendS1"))
                .set("uValue", ung_value(input("init")))
                .set("kValue", presented),
        )
        .transition(
            Transition::new("4")
                .when(all(vec![empty("abortC"), eq(local("stateS"), sym("sendS1"))]))
                .emit("resp", sign(a(&p.ca_key_inv), seq(vec![a(&p.s), a(&p.s_key)])))
                .set("stateS", sym("sendS2")),
        )
        .transition(
            Transition::new("5")
                .when(all(vec![empty("abortC"), eq(local("stateS"), sym("sendS2"))]))
                .emit("resp", enc(local("kValue"), sign(a(&p.s_key_inv), payload)))
                .set("stateS", sym("waitS")),
        )
        .keys([p.s_key_inv.clone(), p.gen_key.clone()])
        .knows([p.certificate(), one(&p.s_key), one(&p.s)])
}

/// The original client.
pub fn make_client(p: &TlsParams) -> ComponentSpec {
    client_spec(p, false)
}

/// The client that also checks the key the server signed.
pub fn make_fixed_client(p: &TlsParams) -> ComponentSpec {
    client_spec(p, true)
}

/// The original server.
pub fn make_server(p: &TlsParams) -> ComponentSpec {
    server_spec(p, false)
}

/// The server that signs the key it received alongside the session key.
pub fn make_fixed_server(p: &TlsParams) -> ComponentSpec {
    server_spec(p, true)
}

/// A zero-delay man in the middle between client and server.
pub fn make_adversary(p: &TlsParams) -> ComponentSpec {
    let opened = decr(a(&p.a_key_inv), input("resp1"));
    ComponentSpec::new(ADVERSARY, Causality::Weak)
        .input("abortC1", MsgType::Event)
        .input("abortS1", MsgType::Event)
        .input("xchd1", MsgType::Expression)
        .input("resp1", MsgType::Expression)
        .input("init1", MsgType::InitMessage)
        .output("abortC2", MsgType::Event)
        .output("abortS2", MsgType::Event)
        .output("xchd2", MsgType::Expression)
        .output("resp2", MsgType::Expression)
        .output("init2", MsgType::InitMessage)
        .local("aCKey", "Keys")
        .local("aSKey", "Keys")
        .state("stateA", "AdvStates", &["initA", "sendA1", "sendA2"], "initA")
        .assume_msg("resp1", 2)
        .assume_msg("xchd1", 1)
        .transition(Transition::new("1").forward("abortC2", "abortC1"))
        .transition(Transition::new("2").forward("abortS2", "abortS1"))
        .transition(Transition::new("3").forward("xchd2", "xchd1"))
        .transition(Transition::new("4").when(nonempty("init1")).set("aCKey", key_of(input("init1"))).emit(
            "init2",
            im(ung_value(input("init1")), a(&p.a_key), sign(a(&p.a_key_inv), seq(vec![a(&p.c), a(&p.a_key)]))),
        ))
        .transition(
            Transition::new("5")
                .when(all(vec![nonempty("resp1"), eq(local("stateA"), sym("initA"))]))
                .set("stateA", sym("sendA1"))
                .forward("resp2", "resp1"),
        )
        .transition(
            Transition::new("6")
                .when(all(vec![nonempty("resp1"), eq(local("stateA"), sym("sendA1"))]))
                .set("stateA", sym("sendA2"))
                .set("aSKey", snd(ext(a(&p.ca_key), input("resp1"))))
                .forward("resp2", "resp1"),
        )
        .transition(
            Transition::new("7")
                .when(all(vec![nonempty("resp1"), eq(local("stateA"), sym("sendA2"))]))
                .bind("aKey", ft(ext(local("aSKey"), opened.clone())))
                .set("stateA", sym("initA"))
                .emit("resp2", enc(local("aCKey"), opened)),
        )
        .keys([p.a_key_inv.clone()])
        .knows([one(&p.ca_key), p.certificate(), one(&p.a_key), one(&p.c), one(&p.s)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioKind {
    Honest,
    Attack,
    FixedHonest,
    FixedAttack,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] =
        [ScenarioKind::Honest, ScenarioKind::Attack, ScenarioKind::FixedHonest, ScenarioKind::FixedAttack];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Honest => "honest",
            ScenarioKind::Attack => "attack",
            ScenarioKind::FixedHonest => "fixed-honest",
            ScenarioKind::FixedAttack => "fixed-attack",
        }
    }

    pub fn fixed(self) -> bool {
        matches!(self, ScenarioKind::FixedHonest | ScenarioKind::FixedAttack)
    }

    pub fn attacked(self) -> bool {
        matches!(self, ScenarioKind::Attack | ScenarioKind::FixedAttack)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown scenario {s}"))
    }
}

/// Client and server talking directly.
pub fn honest_wiring() -> Vec<Connection> {
    vec![
        Connection::new((CLIENT, "init"), (SERVER, "init")),
        Connection::new((SERVER, "resp"), (CLIENT, "resp")),
        Connection::new((CLIENT, "xchd"), (SERVER, "xchd")),
        Connection::new((CLIENT, "abortC"), (SERVER, "abortC")),
        Connection::new((SERVER, "abortS"), (CLIENT, "abortS")),
    ]
}

/// Every channel routed through the adversary.
pub fn attack_wiring() -> Vec<Connection> {
    vec![
        Connection::new((CLIENT, "init"), (ADVERSARY, "init1")),
        Connection::new((ADVERSARY, "init2"), (SERVER, "init")),
        Connection::new((SERVER, "resp"), (ADVERSARY, "resp1")),
        Connection::new((ADVERSARY, "resp2"), (CLIENT, "resp")),
        Connection::new((CLIENT, "xchd"), (ADVERSARY, "xchd1")),
        Connection::new((ADVERSARY, "xchd2"), (SERVER, "xchd")),
        Connection::new((CLIENT, "abortC"), (ADVERSARY, "abortC1")),
        Connection::new((ADVERSARY, "abortC2"), (SERVER, "abortC")),
        Connection::new((SERVER, "abortS"), (ADVERSARY, "abortS1")),
        Connection::new((ADVERSARY, "abortS2"), (CLIENT, "abortS")),
    ]
}

/// Parts, wiring, observer and secrecy targets of a built-in scenario.
pub fn builtin(kind: ScenarioKind, p: &TlsParams) -> crate::scenario::Scenario {
    let (client, server) =
        if kind.fixed() { (make_fixed_client(p), make_fixed_server(p)) } else { (make_client(p), make_server(p)) };
    let (parts, connections, observer) = if kind.attacked() {
        (vec![client, make_adversary(p), server], attack_wiring(), Some(ADVERSARY.to_string()))
    } else {
        (vec![client, server], honest_wiring(), None)
    };
    let targets = observer
        .iter()
        .map(|o| SecrecyTarget::new(p.secret_d.clone(), [o.clone()]).expect("secretD is a secret"))
        .collect();
    crate::scenario::Scenario {
        name: kind.name().to_string(),
        parts,
        connections,
        observer,
        targets,
        horizon: None,
        atoms: p.atoms().clone(),
    }
}
