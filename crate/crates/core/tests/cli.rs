use std::path::Path;
use std::process::{Command, Output};

fn streamsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamsec"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("STREAMSEC_COLOR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split(' ').find_map(|kv| kv.strip_prefix(key)?.strip_prefix('=')).unwrap()
}

#[test]
fn attack_leaks_and_fix_holds() {
    let attack = streamsec(&["run", "attack"]);
    assert_eq!(code(&attack), 2);
    assert!(stdout(&attack).contains("leak: secretD at t=4\n"));
    assert!(stdout(&attack).ends_with("secrecy: violated\n"));

    let fixed = streamsec(&["run", "fixed-attack"]);
    assert_eq!(code(&fixed), 0);
    assert!(stdout(&fixed).contains("abort: abortC at t=4\n"));
    assert!(stdout(&fixed).ends_with("secrecy: holds\n"));

    for honest in ["honest", "fixed-honest"] {
        let o = streamsec(&["run", honest]);
        assert_eq!(code(&o), 0);
        assert!(!stdout(&o).contains("abort:"));
    }
}

#[test]
fn text_and_structured_agree() {
    for s in ["honest", "attack", "fixed-honest", "fixed-attack", "scenarios/strong-spy.scn"] {
        let text = streamsec(&["run", s, "--horizon", "9"]);
        let rec = streamsec(&["run", s, "--horizon", "9", "--format", "structured"]);
        assert_eq!(code(&text), code(&rec), "{s}");
        let text = stdout(&text);
        let rec = stdout(&rec);
        let (events, summary) = text.split_once("---\n").unwrap();

        let messages: Vec<String> = rec
            .lines()
            .filter(|l| l.starts_with("record=message "))
            .map(|l| format!("t={} {} : {}", field(l, "t"), field(l, "channel"), l.split_once(" value=").unwrap().1))
            .collect();
        assert_eq!(messages, events.lines().collect::<Vec<_>>(), "{s}");

        let leaks: Vec<String> = rec
            .lines()
            .filter(|l| l.starts_with("record=leak "))
            .map(|l| format!("leak: {} at t={}", field(l, "target"), field(l, "t")))
            .collect();
        let text_leaks: Vec<&str> = summary.lines().filter(|l| l.starts_with("leak: ")).collect();
        assert_eq!(leaks, text_leaks, "{s}");

        let verdict = rec.lines().find(|l| l.starts_with("record=verdict ")).unwrap();
        let holds = field(verdict, "secrecy_holds") == "true";
        assert_eq!(summary.ends_with("secrecy: holds\n"), holds, "{s}");
    }
}

#[test]
fn horizon_zero_shows_only_the_opening() {
    let o = streamsec(&["run", "honest", "--horizon", "0"]);
    assert_eq!(code(&o), 0);
    let (events, _) = stdout(&o).split_once("---\n").map(|(a, b)| (a.to_string(), b.to_string())).unwrap();
    assert_eq!(events.lines().count(), 1);
    assert!(events.starts_with("t=0 init : "));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["run", "nowhere"][..],
        &["run", "attack", "--horizon", "soon"],
        &["run", "attack", "--format", "xml"],
        &["fly"],
        &[],
        &["run", "attack", "--params", "missing.params"],
    ] {
        assert_eq!(code(&streamsec(args)), 64, "{args:?}");
    }
    assert_eq!(code(&streamsec(&["--help"])), 0);
}

#[test]
fn knowledge_needs_an_observer() {
    let o = streamsec(&["knowledge", "honest", "3"]);
    assert_eq!(code(&o), 65);
    assert!(!o.stderr.is_empty());
}

#[test]
fn knowledge_reports_adversary_view() {
    let before = stdout(&streamsec(&["knowledge", "attack", "2"]));
    let after = stdout(&streamsec(&["knowledge", "attack", "3"]));
    let last = stdout(&streamsec(&["knowledge", "attack", "4"]));
    assert!(!before.lines().any(|l| l == "genKey"));
    assert!(after.lines().any(|l| l == "genKey"));
    assert!(!after.lines().any(|l| l == "secretD"));
    assert!(last.lines().any(|l| l == "secretD"));
    for l in before.lines() {
        assert!(after.lines().any(|m| m == l), "{l} forgotten");
    }
}

#[test]
fn interface_check_lists_every_wire() {
    let o = streamsec(&["check-interfaces", "honest"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("ok  ")).count(), 5);
    assert!(out.contains("5 wires, 0 errors"));

    let broken = streamsec(&["check-interfaces", "tests/data/broken/type-clash.scn"]);
    assert_eq!(code(&broken), 3);
    assert!(stdout(&broken).lines().any(|l| l.starts_with("FAIL") && l.contains("Server.resp -> Client.abortS")));
}

#[test]
fn params_rename_atoms() {
    let params = "scenarios/labels.params";
    assert!(Path::new(env!("CARGO_MANIFEST_DIR")).join(params).exists());
    let o = streamsec(&["run", "attack", "--params", params]);
    assert_eq!(code(&o), 2);
    let out = stdout(&o);
    assert!(out.contains("leak: payload at t=4\n"));
    assert!(out.contains("enc(sessionKey, <payload>)"));
    assert!(!out.contains("secretD"));
    let k = stdout(&streamsec(&["knowledge", "attack", "3", "--params", params]));
    assert!(k.lines().any(|l| l == "sessionKey"));
}

#[test]
fn scenario_files_run_like_builtins() {
    for kind in ["honest", "attack", "fixed-honest", "fixed-attack"] {
        let a = streamsec(&["run", kind, "--horizon", "10"]);
        let b = streamsec(&["run", &format!("scenarios/{kind}.scn")]);
        assert_eq!(code(&a), code(&b));
        let events = |o: &Output| stdout(o).split_once("---\n").unwrap().0.to_string();
        assert_eq!(events(&a), events(&b), "{kind}");
    }
}
