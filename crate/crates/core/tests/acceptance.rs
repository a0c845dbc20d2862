//! Acceptance checks. Each criterion prints one line:
//! `PASS`, `FAIL`, or `UNMET` for a criterion that cannot be met as stated.
//! The process fails if any line is `FAIL`.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use circsem::analysis::{check_equiv, check_totality, AnalysisLimits, Strategy};
use circsem::domain::{lfp_run, trace, BaseType, Kleene, LValue, MonotoneFn, Signature, Tuple};
use circsem::eval::{denote, eval_comb};
use circsem::gates::por_gate;
use circsem::generate::{random_circuit, random_feedback_body, unit_to_vardelay, Delays, GenOptions};
use circsem::laws::{check_all, enumerate_monotone, random_monotone, LastFixedPoint, Law, LawConfig};
use circsem::netlist::{parse_netlist, print_netlist};
use circsem::sim::{check_causality, simulate, CausalityOptions, PrefixTrace};

const POR_LOOP_TICKS: usize = 16;
const POR_LOOP_LIMIT: Duration = Duration::from_millis(1);
const LFP_LIMIT: Duration = Duration::from_secs(60);
const LFP_SAMPLES_AT_THREE: usize = 100_000;
const COHERENCE_CIRCUITS: usize = 200;
const COHERENCE_LIMIT: Duration = Duration::from_secs(60);
const LAWS_LIMIT: Duration = Duration::from_secs(300);
const CAUSALITY_PAIRS: usize = 1000;
const DELAY_INPUTS: usize = 200;
const DELAY_TICKS: usize = 32;
const TOTALITY_CIRCUITS: usize = 150;
const TOTALITY_HORIZON: usize = 8;
const TOTALITY_SAMPLES: usize = 1000;
const FIGURE_HORIZON: usize = 5;

enum Verdict {
    Pass(String),
    Fail(String),
    Unmet(String),
}

fn netlist_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../netlists")
}

fn load(name: &str) -> circsem::circuit::Circuit {
    let src = fs::read_to_string(netlist_dir().join(name)).expect("corpus file");
    parse_netlist(&src).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

fn v(x: u32) -> LValue {
    LValue::Val(x)
}

fn por_loop() -> Verdict {
    let c = load("por_loop.net");
    let empty = PrefixTrace::new(Signature::empty()).padded(POR_LOOP_TICKS);
    let start = Instant::now();
    let out = simulate(&c, &empty, POR_LOOP_TICKS).expect("simulates");
    let took = start.elapsed();
    let ones = out.ticks().iter().all(|row| row == &vec![v(1)]);
    let msg = format!("{} ticks, all Val(1): {ones}, {took:?} (limit {POR_LOOP_LIMIT:?})", out.len());
    if ones && out.len() == POR_LOOP_TICKS && took < POR_LOOP_LIMIT {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn por_table() -> Verdict {
    let b = LValue::Bot;
    // rows: first argument, columns: second argument, in the order bot, 0, 1
    let expected = [[b, b, v(1)], [b, v(0), v(1)], [v(1), v(1), v(1)]];
    let points = [b, v(0), v(1)];
    let gate = por_gate();
    let builtin = load("por_table.net");
    let user = load("por_user.net");
    let mut wrong = Vec::new();
    for (i, &x) in points.iter().enumerate() {
        for (j, &y) in points.iter().enumerate() {
            let want = vec![expected[i][j]];
            let got = [
                ("gate", gate.apply(&[x, y])),
                ("por_table.net", eval_comb(&builtin, &[x, y]).expect("evaluates")),
                ("por_user.net", eval_comb(&user, &[x, y]).expect("evaluates")),
            ];
            for (who, out) in got {
                if out != want {
                    wrong.push(format!("{who} at ({x:?}, {y:?})"));
                }
            }
        }
    }
    if wrong.is_empty() {
        Verdict::Pass("9/9 entries from the gate, the builtin netlist and the table netlist".into())
    } else {
        Verdict::Fail(format!("mismatches: {}", wrong.join(", ")))
    }
}

/// Every fixed point and every pre-fixed point, by scanning the whole domain.
fn brute_force(f: &MonotoneFn) -> (Option<Tuple>, Option<Tuple>) {
    let all: Vec<Tuple> = f.dom().tuples().collect();
    let below = |x: &Tuple, y: &Tuple| x.iter().zip(y).all(|(a, b)| a.leq(*b));
    let fixed: Vec<&Tuple> = all.iter().filter(|x| &f.apply(x) == *x).collect();
    let pre: Vec<&Tuple> = all.iter().filter(|x| below(&f.apply(x), x)).collect();
    let least = |set: &[&Tuple]| set.iter().find(|m| set.iter().all(|x| below(m, x))).map(|m| (*m).clone());
    (least(&fixed), least(&pre))
}

#[derive(Default)]
struct LfpTally {
    functions: u64,
    mismatches: u64,
    bound_violations: u64,
    max_applications: usize,
}

impl LfpTally {
    fn check(&mut self, f: &MonotoneFn) {
        self.functions += 1;
        let run = lfp_run(f).expect("monotone endomap");
        let (least_fixed, least_pre) = brute_force(f);
        if least_fixed.as_ref() != Some(&run.value) || least_pre.as_ref() != Some(&run.value) {
            self.mismatches += 1;
        }
        let k = f.dom().len();
        if run.applications > k + 1 || run.applications as u128 > 1u128 << k {
            self.bound_violations += 1;
        }
        self.max_applications = self.max_applications.max(run.applications);
    }
}

fn lfp_universe() -> (LfpTally, LfpTally, Duration) {
    let start = Instant::now();
    let bool_ty = BaseType::bool();
    let mut exhaustive = LfpTally::default();
    for n in 0..=2 {
        let sig = Signature::repeat(&bool_ty, n);
        for f in enumerate_monotone(&sig, &sig, u64::MAX).expect("enumerable") {
            exhaustive.check(&f);
        }
    }
    let mut sampled = LfpTally::default();
    let sig = Signature::repeat(&bool_ty, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..LFP_SAMPLES_AT_THREE {
        sampled.check(&random_monotone(&sig, &sig, &mut rng).expect("samplable"));
    }
    (exhaustive, sampled, start.elapsed())
}

fn lfp_oracle(ex: &LfpTally, sa: &LfpTally, took: Duration) -> Verdict {
    let msg = format!(
        "0-2 wires exhaustive: {} functions, {} mismatches; 3 wires sampled: {} functions, {} mismatches; {took:?}",
        ex.functions, ex.mismatches, sa.functions, sa.mismatches
    );
    if ex.mismatches + sa.mismatches > 0 || took > LFP_LIMIT {
        Verdict::Fail(msg)
    } else {
        Verdict::Unmet(format!("{msg}; 3 wires has 129615^3 functions, too many to enumerate"))
    }
}

fn iteration_bound(ex: &LfpTally, sa: &LfpTally) -> Verdict {
    let msg = format!(
        "{} violations of wires+1 and 2^wires; at most {} applications",
        ex.bound_violations + sa.bound_violations,
        ex.max_applications.max(sa.max_applications)
    );
    if ex.bound_violations + sa.bound_violations > 0 {
        Verdict::Fail(msg)
    } else {
        Verdict::Unmet(format!("{msg}; same universe, 3 wires sampled only"))
    }
}

fn coherence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = 0;
    for _ in 0..COHERENCE_CIRCUITS {
        let (c, k) = random_feedback_body(&mut rng);
        let looped = denote(&c.trace_loop(k).expect("loopable")).expect("denotes");
        let traced = trace(&denote(&c).expect("denotes"), k).expect("traceable");
        if !looped.table_eq(&traced) {
            bad += 1;
        }
    }
    let took = start.elapsed();
    let msg = format!("{COHERENCE_CIRCUITS} circuits, {bad} mismatches, {took:?}");
    if bad == 0 && took < COHERENCE_LIMIT {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn laws() -> Verdict {
    let start = Instant::now();
    let cfg = LawConfig::default();
    let report = check_all(&Kleene, &cfg).expect("law suite runs");
    let required = [Law::NaturalityA, Law::NaturalityX, Law::Bekic, Law::Yanking];
    let failing: Vec<&str> = required
        .iter()
        .filter(|l| !report.get(**l).is_some_and(|r| r.passed() && r.sampled.is_empty()))
        .map(|l| l.name())
        .collect();
    let mutant = check_all(&LastFixedPoint, &cfg).expect("law suite runs");
    let caught: Vec<&str> = mutant.caught_by().iter().map(|l| l.name()).collect();
    let took = start.elapsed();
    let cases: Vec<String> = required
        .iter()
        .filter_map(|l| report.get(*l))
        .map(|r| format!("{} {}", r.law.name(), r.cases))
        .collect();
    let msg = format!(
        "cases: {}; failing: {failing:?}; all laws hold: {}; mutant caught by {caught:?}; {took:?}",
        cases.join(", "),
        report.passed()
    );
    if failing.is_empty() && !caught.is_empty() && took < LAWS_LIMIT {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn random_trace(rng: &mut ChaCha8Rng, sig: &Signature, ticks: usize, bot_weight: f64) -> PrefixTrace {
    let rows = (0..ticks).map(|_| sig.random_tuple(rng, bot_weight)).collect();
    PrefixTrace::from_ticks(sig.clone(), rows).expect("conforming rows")
}

fn causality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let opts = GenOptions::default();
    let mut violations = 0;
    for i in 0..CAUSALITY_PAIRS {
        let c = random_circuit(&mut rng, &opts);
        let ticks = rng.gen_range(1..=12);
        let input = random_trace(&mut rng, &c.in_sig(), ticks, 0.15);
        let copts = CausalityOptions { samples: 2, seed: i as u64 };
        if !check_causality(&c, &input, ticks, &copts).expect("simulates").holds() {
            violations += 1;
        }
    }
    let msg = format!("{CAUSALITY_PAIRS} circuit/trace pairs, {violations} violations");
    if violations == 0 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn delay_coherence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = GenOptions { delays: Delays::Unit, ..GenOptions::default() };
    let mut compared = 0;
    let mut delays = 0;
    let mut bad = 0;
    while compared < DELAY_INPUTS {
        let c = random_circuit(&mut rng, &opts);
        if !c.has_delays() {
            continue;
        }
        delays += 1;
        let twin = unit_to_vardelay(&c, &mut rng);
        for _ in 0..2 {
            let input = random_trace(&mut rng, &c.in_sig(), DELAY_TICKS, 0.1);
            if simulate(&c, &input, DELAY_TICKS).expect("simulates") != simulate(&twin, &input, DELAY_TICKS).expect("simulates") {
                bad += 1;
            }
            compared += 1;
        }
    }
    let msg = format!("{compared} inputs over {delays} circuits with delays, T = {DELAY_TICKS}, {bad} differences");
    if bad == 0 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn totality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let opts = GenOptions { contractive: true, total: true, ..GenOptions::default() };
    let limits = AnalysisLimits::default();
    let (mut not_total, mut exhaustive, mut looped) = (0, 0, 0);
    for i in 0..TOTALITY_CIRCUITS {
        let c = random_circuit(&mut rng, &opts);
        assert!(c.is_contractive().holds());
        looped += usize::from(!c.loops.is_empty());
        let strategy = if c.inputs.len() <= 1 {
            exhaustive += 1;
            Strategy::Exhaustive
        } else {
            Strategy::Randomized { samples: TOTALITY_SAMPLES, seed: i as u64 }
        };
        if !check_totality(&c, TOTALITY_HORIZON, strategy, &limits).expect("analysable").is_total() {
            not_total += 1;
        }
    }
    let msg = format!(
        "{TOTALITY_CIRCUITS} contractive circuits ({looped} with loops, {exhaustive} exhaustive, rest {TOTALITY_SAMPLES} samples), horizon {TOTALITY_HORIZON}, {not_total} NotTotal"
    );
    if not_total == 0 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn figures() -> Verdict {
    let limits = AnalysisLimits::default();
    let equiv = |l: &str, r: &str| {
        check_equiv(&load(l), &load(r), FIGURE_HORIZON, Strategy::Exhaustive, &limits)
            .expect("comparable")
            .is_equivalent()
    };
    let diag = equiv("diag_left.net", "diag_right.net");
    let rearr = equiv("rearrange_left.net", "rearrange_right.net");
    let distinct = load("rearrange_left.net").dump() != load("rearrange_right.net").dump();
    let msg = format!("diagonal equivalent: {diag}, rearrangement equivalent: {rearr}, dumps differ: {distinct} (horizon {FIGURE_HORIZON}, bot inputs included)");
    if diag && rearr && distinct {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn round_trip() -> Verdict {
    let mut files: Vec<PathBuf> = fs::read_dir(netlist_dir())
        .expect("corpus directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "net"))
        .collect();
    files.sort();
    let mut bad = Vec::new();
    for path in &files {
        let c = parse_netlist(&fs::read_to_string(path).expect("readable")).expect("corpus parses");
        let printed = print_netlist(&c);
        let again = parse_netlist(&printed).expect("printed netlist parses");
        if again != c || print_netlist(&again) != printed || print_netlist(&c) != printed {
            bad.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    let msg = format!("{} corpus files, failing: {bad:?}", files.len());
    if bad.is_empty() && !files.is_empty() {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, v: Verdict| {
        let (tag, msg) = match v {
            Verdict::Pass(m) => ("PASS", m),
            Verdict::Fail(m) => {
                failed += 1;
                ("FAIL", m)
            }
            Verdict::Unmet(m) => ("UNMET", m),
        };
        println!("[{tag:>5}] {name}: {msg}");
    };
    report("parallel-or feedback", por_loop());
    report("por table", por_table());
    let (ex, sa, took) = lfp_universe();
    report("fixed-point oracle", lfp_oracle(&ex, &sa, took));
    report("iteration bound", iteration_bound(&ex, &sa));
    report("coherence", coherence());
    report("law suite", laws());
    report("causality", causality());
    report("delay coherence", delay_coherence());
    report("totality soundness", totality());
    report("copy and rearrangement equivalences", figures());
    report("netlist round trip", round_trip());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
