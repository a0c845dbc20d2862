use std::path::PathBuf;
use std::process::{Command, Output};

fn netlist(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../netlists").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circsem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    netlist(name).to_string_lossy().into_owned()
}

#[test]
fn por_loop_settles_to_one() {
    let o = run(&["sim", &path("por_loop.net"), "--ticks", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "o\n1\n1\n1\n");
}

#[test]
fn coassociativity_of_copying() {
    let o = run(&["equiv", &path("diag_left.net"), &path("diag_right.net"), "--horizon", "4", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Equivalent"));
}

#[test]
fn bot_initialised_delay_is_not_total() {
    let o = run(&["totality", &path("bot_delay.net"), "--horizon", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NotTotal"));
    assert!(stdout(&o).contains("tick 0"));
}

#[test]
fn json_reports() {
    let o = run(&["totality", &path("accumulator.net"), "--horizon", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "total");
    assert_eq!(v["traces_checked"], 8);

    let o = run(&["totality", &path("bot_delay.net"), "--horizon", "2", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["witness"]["tick"], 0);
}

#[test]
fn distinguishing_witness_is_printed() {
    let dir = std::env::temp_dir().join(format!("circsem-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let id = dir.join("id.net");
    let not = dir.join("not.net");
    std::fs::write(&id, "input a: bool;\noutput o = a;\n").unwrap();
    std::fs::write(&not, "input a: bool;\nlet n = not(a);\noutput o = n;\n").unwrap();
    let o = run(&["equiv", id.to_str().unwrap(), not.to_str().unwrap(), "--horizon", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("Distinguished at tick 0"), "{text}");
    assert!(text.contains("inputs:\na\n0\n"), "{text}");
}

#[test]
fn contractivity_check() {
    assert_eq!(run(&["check", &path("toggle.net")]).status.code(), Some(0));
    let o = run(&["check", &path("xor_loop.net")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not contractive"));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("circsem-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.net");
    std::fs::write(&bad, "input a: bool;\noutput o = b;\n").unwrap();
    let o = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(":2:"), "{err}");
    assert_eq!(run(&["sim", &path("por_loop.net")]).status.code(), Some(2));
}

#[test]
fn longer_runs_extend_shorter_ones() {
    let dir = std::env::temp_dir().join(format!("circsem-cli-sim-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("acc.csv");
    std::fs::write(&input, "a\n1\n0\n1\n1\n0\n1\n").unwrap();
    let acc = path("accumulator.net");
    let full = stdout(&run(&["sim", &acc, "--in", input.to_str().unwrap(), "--ticks", "6"]));
    for t in 0..6 {
        let part = stdout(&run(&["sim", &acc, "--in", input.to_str().unwrap(), "--ticks", &t.to_string()]));
        assert!(full.starts_with(&part));
        assert_eq!(part.lines().count(), t + 1);
    }
}

#[test]
fn fmt_is_a_fixed_point() {
    for name in ["traffic.net", "counter.net", "por_user.net"] {
        let once = stdout(&run(&["fmt", &path(name)]));
        let dir = std::env::temp_dir().join(format!("circsem-cli-fmt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join(name);
        std::fs::write(&f, &once).unwrap();
        assert_eq!(stdout(&run(&["fmt", f.to_str().unwrap()])), once);
    }
}

#[test]
fn laws_catch_the_mutant() {
    let o = run(&["laws", "--cap", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all laws hold"));
    let o = run(&["laws", "--cap", "2", "--budget", "20000", "--samples", "50", "--operator", "last-fixed-point"]);
    assert_eq!(o.status.code(), Some(1));
}
