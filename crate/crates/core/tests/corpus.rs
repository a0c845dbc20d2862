use std::fs;
use std::path::PathBuf;

use circsem::circuit::Circuit;
use circsem::domain::{LValue, Signature};
use circsem::netlist::{parse_netlist, print_netlist};
use circsem::sim::{simulate, PrefixTrace};
use circsem::stream::{parse_stream, write_stream};

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../netlists");
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "net"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn load(name: &str) -> Circuit {
    let (_, src) = corpus().into_iter().find(|(n, _)| n == name).unwrap();
    parse_netlist(&src).unwrap()
}

fn run(name: &str, input: &str, ticks: usize) -> String {
    let c = load(name);
    let trace = parse_stream(input, &c.inputs).unwrap();
    let out = simulate(&c, &trace, ticks).unwrap();
    let names: Vec<&str> = c.outputs.iter().map(|o| o.name.as_str()).collect();
    let types: Vec<_> = c.outputs.iter().map(|o| o.ty.clone()).collect();
    write_stream(&names, &types, &out)
}

#[test]
fn every_netlist_round_trips() {
    let files = corpus();
    assert!(files.len() >= 10);
    for (name, src) in files {
        let c = parse_netlist(&src).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        let printed = print_netlist(&c);
        assert_eq!(parse_netlist(&printed).unwrap(), c, "{name}");
        assert_eq!(print_netlist(&parse_netlist(&printed).unwrap()), printed, "{name}");
    }
}

#[test]
fn golden_runs() {
    assert_eq!(run("accumulator.net", "a\n1\n0\n1\n1\n", 4), "parity\n0\n1\n1\n0\n");
    assert_eq!(run("bot_delay.net", "a\n1\n0\n1\n", 3), "o\n_\n1\n0\n");
    assert_eq!(run("traffic.net", "go\n1\n1\n0\n1\n1\n", 5), "light\nred\ngreen\namber\namber\nred\n");
    assert_eq!(run("xor_loop.net", "a\n0\n1\n", 2), "y\n_\n_\n");
}

#[test]
fn undefined_cells_follow_the_gates() {
    assert_eq!(run("por_table.net", "a,b\n_,1\n1,_\n_,0\n0,0\n", 4), "o\n1\n1\n_\n0\n");
    assert_eq!(run("accumulator.net", "a\n1\n_\n1\n", 3), "parity\n0\n1\n_\n");
}

#[test]
fn zero_input_circuits_run_on_empty_rows() {
    let c = load("toggle.net");
    let empty = PrefixTrace::new(Signature::empty()).padded(5);
    let out = simulate(&c, &empty, 5).unwrap();
    let vals: Vec<LValue> = out.ticks().iter().map(|r| r[0]).collect();
    assert_eq!(vals, [0, 1, 0, 1, 0].map(LValue::Val));
}
