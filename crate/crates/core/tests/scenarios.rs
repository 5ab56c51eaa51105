mod support;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use streamsec::cli::{evaluate, EXIT_ASSUMPTION};
use streamsec::component::dsl::event;
use streamsec::component::{compose, run, step, Causality, ComponentSpec, Composite, Inputs, Trace};
use streamsec::message::{Message, MsgType};
use streamsec::scenario::Scenario;
use streamsec::stream::Time;
use streamsec::term::{decr, Encryptor, Expression};
use streamsec::tls::{self, ScenarioKind, TlsParams};
use support::rng;

fn scenario(kind: ScenarioKind) -> (TlsParams, Composite, Trace) {
    let p = TlsParams::default();
    let sc = tls::builtin(kind, &p);
    let c = compose(sc.parts, sc.connections).unwrap();
    let trace = run(&c, 10).unwrap();
    (p, c, trace)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/data/{name}.trace", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn traces_match_golden_files() {
    for kind in ScenarioKind::ALL {
        let (_, _, trace) = scenario(kind);
        assert_eq!(trace.render(), golden(kind.name()), "{kind}");
    }
}

#[test]
fn runs_are_deterministic() {
    for kind in ScenarioKind::ALL {
        let (_, _, a) = scenario(kind);
        let (_, _, b) = scenario(kind);
        assert_eq!(a, b);
    }
}

#[test]
fn idle_steps_change_nothing_and_emit_nothing() {
    let mut idle = 0;
    for kind in ScenarioKind::ALL {
        let (_, c, trace) = scenario(kind);
        for s in trace.steps.iter().filter(|s| s.fired.is_empty()) {
            idle += 1;
            assert_eq!(s.before, s.after, "{kind}: {} at t={}", s.component, s.t);
            assert!(s.emissions.is_empty(), "{kind}: {} at t={}", s.component, s.t);
            let part = c.part(&s.component).unwrap();
            if part.causality == Causality::Strong && s.emit_at <= trace.horizon {
                for out in &part.outputs {
                    assert!(trace.at(&out.name, s.emit_at).is_empty(), "{kind}: {} at t={}", out.name, s.emit_at);
                }
            }
        }
    }
    assert!(idle > 20);
}

#[test]
fn server_recovers_the_secret_on_honest_runs() {
    for kind in [ScenarioKind::Honest, ScenarioKind::FixedHonest] {
        let (p, _, trace) = scenario(kind);
        let Message::Expr(x) = &trace.at("xchd", 4)[0] else { panic!("xchd is an expression") };
        let g = Encryptor::new(p.gen_key.clone()).unwrap();
        assert_eq!(decr(&g, x), Ok(Expression::singleton(p.secret_d.clone())));
        for ch in ["abortC", "abortS"] {
            assert!(trace.channel(ch).unwrap().is_empty());
        }
    }
}

fn first_known(kind: ScenarioKind, label: &str) -> Option<Time> {
    let (p, c, trace) = scenario(kind);
    let kb = trace.knowledge_of(&c, tls::ADVERSARY).unwrap();
    let atom = p.atoms().get(label).unwrap().clone();
    kb.earliest(&Expression::singleton(atom), trace.horizon)
}

#[test]
fn adversary_learns_session_key_with_the_ciphertext() {
    // The only message carrying genKey reaches the adversary on resp at t=3.
    assert_eq!(first_known(ScenarioKind::Attack, "genKey"), Some(3));
    assert_eq!(first_known(ScenarioKind::FixedAttack, "genKey"), Some(3));
}

#[test]
fn secret_leaks_at_four_only_without_the_fix() {
    assert_eq!(first_known(ScenarioKind::Attack, "secretD"), Some(4));
    let (p, c, _) = scenario(ScenarioKind::FixedAttack);
    let trace = run(&c, 20).unwrap();
    let kb = trace.knowledge_of(&c, tls::ADVERSARY).unwrap();
    for t in 0..=20 {
        assert_eq!(kb.at(t).know_item(&p.secret_d), Ok(false));
    }
    assert_eq!(trace.at("abortC", 4), &[Message::Event]);
}

#[test]
fn secret_is_outside_adversary_ks() {
    let p = TlsParams::default();
    for kind in [ScenarioKind::Attack, ScenarioKind::FixedAttack] {
        let sc = tls::builtin(kind, &p);
        let adv = sc.parts.iter().find(|x| x.name == tls::ADVERSARY).unwrap();
        assert!(!adv.ks().contains(&p.secret_d));
    }
}

/// Everything a component emits is its own key or secret or derivable
/// from what it knew and received by then.
#[test]
fn emissions_are_backed_by_knowledge() {
    for kind in ScenarioKind::ALL {
        let (_, c, trace) = scenario(kind);
        for part in c.parts() {
            let kb = trace.knowledge_of(&c, &part.name).unwrap();
            for out in &part.outputs {
                for (t, m) in trace.channel(&out.name).unwrap().iter() {
                    let e = m.to_expression();
                    let own = e.as_single().and_then(|i| i.as_atom()).is_some_and(|a| part.ks().contains(a));
                    assert!(own || kb.at(t).derivable(&e), "{kind}: {} emits {m} at t={t}", part.name);
                }
            }
        }
    }
}

fn simulate(
    spec: &ComponentSpec,
    inputs: &BTreeMap<Time, Inputs>,
    horizon: Time,
) -> Vec<(Time, BTreeMap<String, Vec<Message>>)> {
    let mut locals = spec.initial_locals();
    let mut out = Vec::new();
    for t in 0..=horizon {
        let Ok(o) = step(spec, &locals, inputs.get(&t).unwrap_or(&Inputs::new()), t) else { break };
        locals = o.locals;
        out.push((t + 1, o.emissions));
    }
    out
}

#[test]
fn strong_outputs_ignore_future_inputs() {
    let (_, c, trace) = scenario(ScenarioKind::Attack);
    let mut r = rng(12);
    let pool: Vec<Message> = trace.events().into_iter().map(|(_, _, m)| m.clone()).collect();
    for name in [tls::CLIENT, tls::SERVER] {
        let spec = c.part(name).unwrap();
        let recorded: BTreeMap<Time, Inputs> = trace.steps_of(name).map(|s| (s.t, s.inputs.clone())).collect();
        let base = simulate(spec, &recorded, 8);
        for cut in 0..6 {
            for _ in 0..20 {
                let mut perturbed = recorded.clone();
                for t in cut + 1..=8 {
                    let inputs = perturbed.entry(t).or_default();
                    for port in &spec.inputs {
                        let choices: Vec<&Message> = pool.iter().filter(|m| m.msg_type() == port.ty).collect();
                        let msgs = match choices.choose(&mut r) {
                            Some(m) if r.gen_bool(0.5) => vec![(*m).clone()],
                            _ => vec![],
                        };
                        inputs.insert(port.name.clone(), msgs);
                    }
                }
                let other = simulate(spec, &perturbed, 8);
                let upto = |v: &[(Time, BTreeMap<String, Vec<Message>>)]| {
                    v.iter().filter(|(t, _)| *t <= cut + 1).cloned().collect::<Vec<_>>()
                };
                assert_eq!(upto(&base), upto(&other), "{name} cut {cut}");
            }
        }
    }
}

#[test]
fn broken_assumption_stops_the_run() {
    let p = TlsParams::default();
    let chatty =
        ComponentSpec::new("Chatty", Causality::Strong).output("abortC", MsgType::Event).initially("abortC", event());
    let mut server = tls::make_server(&p);
    server.assumption.push(("abortC".into(), 0));
    let sc = Scenario {
        name: "chatty".into(),
        parts: vec![chatty, server],
        connections: vec![streamsec::component::Connection::new(("Chatty", "abortC"), ("Server", "abortC"))],
        observer: None,
        targets: vec![],
        horizon: None,
        atoms: p.atoms().clone(),
    };
    let (verdict, trace, errors) = evaluate(&sc, 5);
    assert_eq!(verdict.exit_code(), EXIT_ASSUMPTION);
    assert!(verdict.assumption_violation.unwrap().contains("Server at t=0"));
    assert!(trace.is_some());
    assert_eq!(errors.len(), 1);
}

fn manifest(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

#[test]
fn scenario_files_reproduce_builtins() {
    let p = TlsParams::default();
    for kind in ScenarioKind::ALL {
        let path = manifest(&format!("scenarios/{}.scn", kind.name()));
        let sc = streamsec::cli::load_scenario(path.to_str().unwrap(), None).unwrap();
        let b = tls::builtin(kind, &p);
        assert_eq!(sc.parts, b.parts, "{kind}");
        assert_eq!(sc.connections, b.connections, "{kind}");
        assert_eq!(sc.observer, b.observer, "{kind}");
        let c = compose(sc.parts, sc.connections).unwrap();
        assert_eq!(run(&c, 10).unwrap().render(), golden(kind.name()), "{kind}");
    }
}

#[test]
fn broken_wirings_are_rejected_by_name() {
    let dir = manifest("tests/data/broken");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let src = std::fs::read_to_string(&path).unwrap();
        let expect = src.lines().next().and_then(|l| l.strip_prefix("# expect: ")).unwrap();
        let out = streamsec::cli::cmd_check_interfaces(path.to_str().unwrap(), None);
        assert_eq!(out.code, streamsec::cli::EXIT_INTERFACE, "{}", path.display());
        let all = format!("{}{}", out.stdout, out.stderr);
        assert!(all.contains(expect), "{}: {all}", path.display());
        seen += 1;
    }
    assert!(seen >= 7);
}
