//! Shared test helpers: random term generation and a brute-force knowledge
//! oracle that works on whole expressions.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use streamsec::component::{ks_union_check, Causality, ComponentSpec, Composite, Connection};
use streamsec::message::MsgType;
use streamsec::term::{concat, enc, sign, Atom, Encryptor, Expression, Item};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eight atoms: two key pairs, a symmetric key, two secrets, one name.
pub struct Pool {
    pub atoms: Vec<Atom>,
    pub keys: Vec<Atom>,
}

impl Pool {
    pub fn new() -> Pool {
        let (k1, k1i) = Atom::key_pair("K1");
        let (k2, k2i) = Atom::key_pair("K2");
        let s = Atom::symmetric_key("Ks");
        let keys = vec![k1, k1i, k2, k2i, s];
        let mut atoms = keys.clone();
        atoms.extend([Atom::secret("n1"), Atom::secret("n2"), Atom::data("A")]);
        Pool { atoms, keys }
    }

    /// An item whose nesting depth is at most `depth`.
    pub fn item(&self, rng: &mut TestRng, depth: usize) -> Item {
        if depth == 0 || rng.gen_bool(0.45) {
            return Item::Atom(self.atoms.choose(rng).unwrap().clone());
        }
        let k = Encryptor::new(self.keys.choose(rng).unwrap().clone()).unwrap();
        let payload = self.expression(rng, depth - 1, 1);
        if rng.gen_bool(0.5) {
            Item::Enc(k, payload)
        } else {
            Item::Sig(k, payload)
        }
    }

    /// An expression of `min..=3` items, nesting at most `depth`.
    pub fn expression(&self, rng: &mut TestRng, depth: usize, min: usize) -> Expression {
        let len = rng.gen_range(min..=3);
        Expression::new((0..len).map(|_| self.item(rng, depth)).collect())
    }
}

fn contiguous(e: &Expression) -> Vec<Expression> {
    let items = e.items();
    let mut out = vec![Expression::empty()];
    for i in 0..items.len() {
        for j in i + 1..=items.len() {
            out.push(Expression::new(items[i..j].to_vec()));
        }
    }
    out
}

fn universe_of(e: &Expression, out: &mut BTreeSet<Expression>) {
    for sub in contiguous(e) {
        out.insert(sub);
    }
    for item in e.items() {
        match item {
            Item::Atom(_) => {}
            Item::Enc(k, p) | Item::Sig(k, p) => {
                out.insert(Expression::singleton(k.atom().clone()));
                if let Some(inv) = k.inverse() {
                    out.insert(Expression::singleton(inv.atom().clone()));
                }
                universe_of(p, out);
            }
        }
    }
}

fn single(a: &Atom) -> Expression {
    Expression::singleton(a.clone())
}

/// Forward closure of the deduction rules over the finite universe of
/// contiguous subsequences of every subterm of the knowledge base and the
/// target. Each rule is applied to whole expressions:
///
/// - projection: any prefix or suffix of a known expression is known
/// - concatenation of two known expressions
/// - decryption with the known inverse key, signature extraction with the
///   known verification key
/// - encryption and signing of a known expression with a known key
///
/// Every rule's conclusion lies in the universe, so the closure restricted
/// to it is exact.
pub fn oracle_derivable(kb: &[Expression], target: &Expression) -> bool {
    oracle_answers(kb, std::slice::from_ref(target))[0]
}

/// [`oracle_derivable`] for several targets over one closure.
pub fn oracle_answers(kb: &[Expression], targets: &[Expression]) -> Vec<bool> {
    let mut set = BTreeSet::new();
    for e in kb.iter().chain(targets) {
        universe_of(e, &mut set);
    }
    let universe: Vec<Expression> = set.into_iter().collect();
    let index = |e: &Expression| universe.binary_search(e).ok();

    // premises -> conclusion, all as universe indices
    let mut rules: Vec<(Vec<usize>, usize)> = Vec::new();
    for (u, e) in universe.iter().enumerate() {
        let items = e.items();
        for i in 0..=items.len() {
            for part in [&items[..i], &items[i..]] {
                let p = index(&Expression::new(part.to_vec())).expect("contiguous parts are in the universe");
                rules.push((vec![u], p));
            }
        }
        for i in 1..items.len() {
            let a = index(&Expression::new(items[..i].to_vec())).unwrap();
            let b = index(&Expression::new(items[i..].to_vec())).unwrap();
            rules.push((vec![a, b], u));
        }
        if let Some(Item::Enc(k, p)) | Some(Item::Sig(k, p)) = e.as_single() {
            let payload = index(p).unwrap();
            let key = index(&single(k.atom())).unwrap();
            rules.push((vec![key, payload], u));
            if let Some(inv) = k.inverse() {
                let opener = index(&single(inv.atom())).unwrap();
                rules.push((vec![u, opener], payload));
            }
        }
    }

    let mut known = vec![false; universe.len()];
    for e in kb {
        known[index(e).unwrap()] = true;
    }
    known[index(&Expression::empty()).unwrap()] = true;
    loop {
        let mut changed = false;
        for (premises, conclusion) in &rules {
            if !known[*conclusion] && premises.iter().all(|p| known[*p]) {
                known[*conclusion] = true;
                changed = true;
            }
        }
        if !changed {
            return targets.iter().map(|t| known[index(t).unwrap()]).collect();
        }
    }
}

fn key_of(a: &Atom) -> Encryptor {
    Encryptor::new(a.clone()).unwrap()
}

pub fn random_kb(pool: &Pool, r: &mut TestRng) -> Vec<Expression> {
    let n = r.gen_range(0..=6);
    (0..n).map(|_| pool.expression(r, 3, 1)).collect()
}

pub fn subterms(e: &Expression, out: &mut Vec<Expression>) {
    out.push(e.clone());
    for item in e.items() {
        out.push(Expression::singleton(item.clone()));
        if let Item::Enc(_, p) | Item::Sig(_, p) = item {
            subterms(p, out);
        }
    }
}

pub fn queries(pool: &Pool, kb: &[Expression], r: &mut TestRng) -> Vec<Expression> {
    let mut q: Vec<Expression> = pool.atoms.iter().map(single).collect();
    for e in kb {
        subterms(e, &mut q);
    }
    for _ in 0..6 {
        q.push(pool.expression(r, 2, 0));
    }
    for _ in 0..4 {
        let key = pool.keys.choose(r).unwrap();
        let body = q.choose(r).unwrap().clone();
        q.push(if r.gen_bool(0.5) { enc(&key_of(key), &body) } else { sign(&key_of(key), &body) });
        let a = q.choose(r).unwrap().clone();
        let b = q.choose(r).unwrap().clone();
        q.push(concat(&a, &b));
    }
    q
}

const TYPES: [MsgType; 3] = [MsgType::Event, MsgType::Expression, MsgType::InitMessage];

pub fn random_parts(r: &mut TestRng) -> (Vec<ComponentSpec>, Vec<Connection>) {
    let keys: Vec<Atom> = (0..6).map(|i| Atom::key_pair(&format!("k{i}")).1).collect();
    let secrets: Vec<Atom> = (0..6).map(|i| Atom::secret(&format!("s{i}"))).collect();
    let n = r.gen_range(2..=4);
    let mut parts = Vec::new();
    for i in 0..n {
        let causality = if r.gen_bool(0.3) { Causality::Weak } else { Causality::Strong };
        let mut p = ComponentSpec::new(&format!("P{i}"), causality);
        for j in 0..r.gen_range(0..=3) {
            p = p.input(&format!("i{i}_{j}"), *TYPES.choose(r).unwrap());
        }
        for j in 0..r.gen_range(0..=3) {
            p = p.output(&format!("o{i}_{j}"), *TYPES.choose(r).unwrap());
        }
        let ks: Vec<Atom> = keys.iter().filter(|_| r.gen_bool(0.3)).cloned().collect();
        let ss: Vec<Atom> = secrets.iter().filter(|_| r.gen_bool(0.3)).cloned().collect();
        parts.push(p.keys(ks).secrets(ss));
    }
    let mut connections = Vec::new();
    let mut fed = BTreeSet::new();
    for producer in &parts {
        for out in &producer.outputs {
            for consumer in &parts {
                for inp in &consumer.inputs {
                    if inp.ty == out.ty && !fed.contains(&inp.name) && r.gen_bool(0.4) {
                        fed.insert(inp.name.clone());
                        connections.push(Connection::new((&producer.name, &out.name), (&consumer.name, &inp.name)));
                    }
                }
            }
        }
    }
    (parts, connections)
}

/// The six properties, computed directly from the parts and checked as
/// stated: membership in the union goes back to some part, membership in a
/// part goes up to the union, absence everywhere stays absent, and external
/// channels come from the parts. Returns one line per violation.
pub fn union_violations(c: &Composite, probes: &[Atom]) -> Vec<String> {
    let mut bad = Vec::new();
    let parts = c.parts();
    let k_c = c.private_keys();
    let s_c = c.unguessable();
    let ks_c = c.ks();
    for xb in &k_c {
        if !parts.iter().any(|p| p.private_keys.contains(xb)) {
            bad.push(format!("(1) {xb} in K but in no part"));
        }
    }
    for xb in &s_c {
        if !parts.iter().any(|p| p.unguessable.contains(xb)) {
            bad.push(format!("(2) {xb} in S but in no part"));
        }
    }
    for p in parts {
        if !p.private_keys.is_subset(&k_c) {
            bad.push(format!("(3) K of {} not in K", p.name));
        }
        if !p.unguessable.is_subset(&s_c) {
            bad.push(format!("(4) S of {} not in S", p.name));
        }
    }
    for xb in probes {
        if parts.iter().all(|p| !p.ks().contains(xb)) && ks_c.contains(xb) {
            bad.push(format!("(5) {xb} in KS but in no part"));
        }
    }
    let ins: BTreeSet<String> = parts.iter().flat_map(|p| p.inputs.iter().map(|x| x.name.clone())).collect();
    let outs: BTreeSet<String> = parts.iter().flat_map(|p| p.outputs.iter().map(|x| x.name.clone())).collect();
    if !c.external_inputs().is_subset(&ins) || !c.external_outputs().is_subset(&outs) {
        bad.push("(6) external channel outside the parts".into());
    }
    for x in c.external_inputs() {
        if c.connections().iter().any(|w| w.consumer.port == x) {
            bad.push(format!("(6) wired input {x} counted as external"));
        }
    }
    if !ks_union_check(c).all_hold() {
        bad.push(format!("ks_union_check {:?}", ks_union_check(c).properties));
    }
    bad
}
