use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cobra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cobra"))
        .args(args)
        .env_remove("COBRA_MODEL_CAP")
        .output()
        .unwrap()
}

fn cobra_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cobra"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&cobra(&["check", "--gen", "ccp:4"])), 0);
    assert_eq!(code(&cobra(&["check", &data("ccp4.cobra")])), 0);

    let o = cobra(&["check", &data("broken.cobra")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("ill-formed: t1(coin1,coin2)"), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 true outcomes"));

    assert_eq!(code(&cobra(&["check", "nosuchfile"])), 2);
    let o = cobra(&["check", &data("syntax_error.cobra")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:1: error"));
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(code(&cobra(&["check", "--gen", "mm:2"])), 2);
    assert_eq!(code(&cobra(&["check", "--gen", "ccp:4", &data("ccp4.cobra")])), 2);
    assert_eq!(code(&cobra(&["solve", "--gen", "ccp:4", "--strategy", "quickest"])), 2);
    assert_eq!(
        code(&cobra(&["bench", "--gen", "ccp:4", "--strategy", "optimal-avg"])),
        2
    );
}

#[test]
fn solve_reports_known_complexities() {
    let o = cobra(&["solve", "--gen", "ccp:4", "--strategy", "max-models"]);
    assert_eq!(stdout(&o), "avg 2.25000 worst 3\n");
    let o = cobra(&["solve", "--gen", "mm:2:8:pos", "--strategy", "optimal-worst"]);
    assert!(stdout(&o).ends_with("worst 2\n"));
    let o = cobra(&["solve", "--gen", "mm:4:4", "--strategy", "optimal-avg"]);
    assert_eq!(stdout(&o), "avg 2.78516 worst 3\n");
    let o = cobra(&["solve", "--gen", "mm:4:4", "--strategy", "optimal-avg", "--exact"]);
    assert_eq!(stdout(&o), "avg 713/256 worst 3\n");
    let o = cobra(&["solve", &data("ccp4.cobra"), "--strategy", "optimal-avg", "--exact"]);
    assert_eq!(stdout(&o), "avg 9/4 worst 3\n");
}

#[test]
fn resource_limits_exit_3() {
    assert_eq!(code(&cobra(&["solve", "--gen", "ccp:13", "--depth-cap", "2"])), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_cobra"))
        .args(["check", "--gen", "ccp:13"])
        .env("COBRA_MODEL_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_cobra"))
        .args(["check", "--gen", "ccp:4"])
        .env("COBRA_MODEL_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn exports_are_written() {
    let dir = std::env::temp_dir().join(format!("cobra-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("tree.dot");
    let json = dir.join("tree.json");
    let graphs = dir.join("graphs");
    let o = cobra(&[
        "solve",
        "--gen",
        "ccp:4",
        "--dot",
        dot.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
        "--dump-graphs",
        graphs.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let dot = std::fs::read_to_string(dot).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("shape=ellipse").count(), 8);
    let json = std::fs::read_to_string(json).unwrap();
    assert!(json.contains("\"root\": 0"));
    assert!(json.contains("\"experiment\": \"t1\""));
    for f in ["base.dot", "knowledge.dot", "experiment0.dot", "experiment1.dot"] {
        assert!(graphs.join(f).exists(), "{f}");
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bench_first_round() {
    let o = cobra(&["bench", "--gen", "ccp:26", "--rounds", "1", "--csv"]);
    assert_eq!(stdout(&o), "round,phase1_avg,phase2_avg\n1,13.00,13.00\n");
    let o = cobra(&["bench", "--gen", "mm:4:6", "--rounds", "1", "--csv"]);
    assert!(stdout(&o).ends_with(",5.00\n"), "{}", stdout(&o));
    let o = cobra(&["bench", "--gen", "ccp:6", "--rounds", "3"]);
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn play_sessions() {
    let o = cobra_stdin(&["play", "--gen", "ccp:4"], "=\n=\n<\n");
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("secret: x4 y after 3 experiments"),
        "{}",
        stdout(&o)
    );

    let o = cobra_stdin(&["play", "--gen", "ccp:4"], "1\nmodels\n=\n=\nquit\n");
    let s = stdout(&o);
    assert!(s.contains("4 codes remaining"), "{s}");
    assert!(s.contains("inconsistent with previous answers"), "{s}");
    assert!(!s.contains("secret:"));

    let o = cobra_stdin(&["play", "--gen", "ccp:4"], "<\nundo\n");
    assert!(stdout(&o).contains("8 codes remaining"));

    let o = cobra_stdin(&["play", "--gen", "ccp:4"], "9\nheavy\n");
    assert_eq!(stdout(&o).matches("unknown outcome").count(), 2);
}

#[test]
fn play_is_deterministic() {
    let script = "2\nundo\n0\nmodels\n1\n";
    for strategy in ["ent-models", "optimal-avg"] {
        let a = cobra_stdin(&["play", "--gen", "ccp:6", "--strategy", strategy], script);
        let b = cobra_stdin(&["play", "--gen", "ccp:6", "--strategy", strategy], script);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn simulate_matches_solve() {
    let o = cobra(&["simulate", "--gen", "ccp:4"]);
    assert!(stdout(&o).ends_with("secrets 8 max 3 mean 2.25000\n"));
    for strategy in ["exp-models", "parts", "optimal-worst"] {
        let s = stdout(&cobra(&[
            "solve",
            "--gen",
            "mm:2:4:col",
            "--strategy",
            strategy,
            "--exact",
        ]));
        let sim = stdout(&cobra(&[
            "simulate",
            "--gen",
            "mm:2:4:col",
            "--strategy",
            strategy,
            "--exact",
        ]));
        let (avg, worst) = {
            let w: Vec<&str> = s.split_whitespace().collect();
            (w[1].to_string(), w[3].to_string())
        };
        assert!(sim.ends_with(&format!("max {worst} mean {avg}\n")), "{s} / {sim}");
    }
    let o = cobra(&["simulate", "--gen", "mm:4:4", "--strategy", "optimal-avg"]);
    assert!(stdout(&o).ends_with("secrets 256 max 3 mean 2.78516\n"));
}

#[test]
fn simulate_single_and_sampled() {
    let o = cobra(&["simulate", "--gen", "ccp:4", "--secret", "x4,y"]);
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 3, "{s}");
    assert!(s.contains("3 t1(coin1,coin4) <"));

    let o = cobra(&["simulate", "--gen", "ccp:4", "--secret", "x1 x2"]);
    assert_eq!(code(&o), 2);
    let o = cobra(&["simulate", "--gen", "ccp:4", "--secret", "z"]);
    assert_eq!(code(&o), 2);

    let a = cobra(&["simulate", "--gen", "mm:3:3", "--sample", "5", "--seed", "7"]);
    let b = cobra(&["simulate", "--gen", "mm:3:3", "--sample", "5", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("secrets 5 "));
}
