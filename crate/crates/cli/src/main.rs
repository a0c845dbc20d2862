use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use circsem::analysis::{
    check_equiv, check_totality, totality_guarantee, AnalysisLimits, Equivalence, Guarantee, Strategy, Totality,
};
use circsem::circuit::{Circuit, Contractivity};
use circsem::domain::{BaseType, Kleene, Ty};
use circsem::laws::{check_all, LastFixedPoint, LawConfig};
use circsem::netlist::{parse_netlist, print_netlist};
use circsem::sim::{PrefixTrace, Simulator};
use circsem::stream::{parse_stream, write_stream};

#[derive(Parser)]
#[command(name = "circsem", version, about = "Semantics engine for circuits with feedback and delays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a netlist and report whether every loop passes through a delay.
    Check { file: PathBuf },
    /// Simulate a netlist and print the output stream.
    Sim {
        file: PathBuf,
        /// Input stream file; may be omitted for circuits without inputs.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        ticks: usize,
        /// Extend a short (or missing) input stream with undefined rows.
        #[arg(long)]
        pad_bot: bool,
    },
    /// Check the fixed-point and trace laws exhaustively over small wire types.
    Laws {
        /// Largest wire type in the universe, in atoms.
        #[arg(long, default_value_t = 2)]
        cap: usize,
        /// Function combinations checked exhaustively per universe instance.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Random combinations drawn when a universe instance is over budget.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed-point operator under test.
        #[arg(long, value_enum, default_value_t = Operator::Least)]
        operator: Operator,
    },
    /// Compare two netlists tick by tick.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        search: Search,
    },
    /// Check that defined inputs always give defined outputs.
    Totality {
        file: PathBuf,
        #[command(flatten)]
        search: Search,
    },
    /// Print the structural dump of a netlist as JSON.
    Dump { file: PathBuf },
    /// Print a netlist in canonical form.
    Fmt { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Operator {
    Least,
    LastFixedPoint,
}

#[derive(Args)]
struct Search {
    #[arg(long)]
    horizon: usize,
    /// Enumerate every input trace (the default).
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    /// Check this many random input traces instead.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print a JSON report.
    #[arg(long)]
    json: bool,
}

impl Search {
    fn strategy(&self) -> Strategy {
        match self.samples {
            Some(samples) => Strategy::Randomized { samples, seed: self.seed },
            None => Strategy::Exhaustive,
        }
    }
}

enum Failure {
    /// The property does not hold.
    Property,
    /// Bad input, bad usage or an internal error.
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load(path: &Path) -> Result<Circuit, Failure> {
    let src = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_netlist(&src).map_err(|e| {
        let lines: Vec<String> = e.0.iter().map(|p| format!("{}:{p}", path.display())).collect();
        Failure::Usage(lines.join("\n"))
    })
}

fn show_stream(c_names: Vec<&str>, types: Vec<Ty>, trace: &PrefixTrace) -> String {
    write_stream(&c_names, &types, trace)
}

fn inputs_stream(c: &Circuit, trace: &PrefixTrace) -> String {
    show_stream(
        c.inputs.iter().map(|p| p.name.as_str()).collect(),
        c.inputs.iter().map(|p| p.ty.clone()).collect(),
        trace,
    )
}

fn check(file: &Path) -> Result<(), Failure> {
    let c = load(file)?;
    println!(
        "valid: {} inputs, {} outputs, {} nodes, {} loops",
        c.inputs.len(),
        c.outputs.len(),
        c.nodes.len(),
        c.loops.len()
    );
    match c.is_contractive() {
        Contractivity::Contractive => {
            println!("contractive: every loop passes through a delay");
            Ok(())
        }
        Contractivity::DelayFreeCycle(cycle) => {
            let path: Vec<String> = cycle.iter().map(|w| w.to_string()).collect();
            println!("not contractive: delay-free cycle {}", path.join(" -> "));
            Err(Failure::Property)
        }
    }
}

fn sim(file: &Path, input: Option<&Path>, ticks: usize, pad_bot: bool) -> Result<(), Failure> {
    let c = load(file)?;
    let mut trace = match input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_stream(&text, &c.inputs).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None if c.inputs.is_empty() || pad_bot => PrefixTrace::new(c.in_sig()).padded(0),
        None => return Err(Failure::Usage("the circuit has inputs; pass --in or --pad-bot".into())),
    };
    if c.inputs.is_empty() {
        trace = trace.padded(ticks);
    }
    if pad_bot {
        trace = trace.padded(ticks);
    }
    let out = Simulator::new(&c)?.run(&trace, ticks)?;
    print!(
        "{}",
        show_stream(
            c.outputs.iter().map(|p| p.name.as_str()).collect(),
            c.outputs.iter().map(|p| p.ty.clone()).collect(),
            &out
        )
    );
    Ok(())
}

fn laws(cap: usize, budget: u64, samples: usize, seed: u64, operator: Operator) -> Result<(), Failure> {
    if cap == 0 {
        return Err(Failure::Usage("--cap must be at least 1".into()));
    }
    let mut universe: Vec<Ty> = vec![BaseType::unit()];
    if cap >= 2 {
        universe.push(BaseType::bool());
    }
    for n in 3..=cap {
        universe.push(BaseType::sized(format!("e{n}"), n)?);
    }
    let cfg = LawConfig {
        universe,
        case_budget: budget,
        samples,
        seed,
        ..LawConfig::default()
    };
    let report = match operator {
        Operator::Least => check_all(&Kleene, &cfg)?,
        Operator::LastFixedPoint => check_all(&LastFixedPoint, &cfg)?,
    };
    print!("{}", report.to_text());
    if report.passed() {
        println!("all laws hold");
        Ok(())
    } else {
        Err(Failure::Property)
    }
}

fn equiv(left: &Path, right: &Path, search: &Search) -> Result<(), Failure> {
    let (c1, c2) = (load(left)?, load(right)?);
    let report = check_equiv(&c1, &c2, search.horizon, search.strategy(), &AnalysisLimits::default())?;
    if search.json {
        println!("{}", report.to_json(&c1));
    } else {
        match &report.verdict {
            Equivalence::Equivalent => println!(
                "Equivalent up to horizon {} ({} traces)",
                report.horizon, report.traces_checked
            ),
            Equivalence::Distinguished { inputs, tick, left, right } => {
                let outs = c1.out_sig();
                println!("Distinguished at tick {tick}: {} vs {}", outs.show(left), outs.show(right));
                println!("inputs:");
                print!("{}", inputs_stream(&c1, inputs));
            }
        }
    }
    if report.is_equivalent() {
        Ok(())
    } else {
        Err(Failure::Property)
    }
}

fn totality(file: &Path, search: &Search) -> Result<(), Failure> {
    let c = load(file)?;
    let report = check_totality(&c, search.horizon, search.strategy(), &AnalysisLimits::default())?;
    if search.json {
        println!("{}", report.to_json(&c));
    } else {
        match &report.verdict {
            Totality::Total => println!("Total up to horizon {} ({} traces)", report.horizon, report.traces_checked),
            Totality::NotTotal { inputs, tick, port } => {
                println!("NotTotal: output `{}` is undefined at tick {tick}", c.outputs[*port].name);
                println!("inputs:");
                print!("{}", inputs_stream(&c, inputs));
            }
        }
        match totality_guarantee(&c)? {
            Guarantee::Guaranteed => println!("static guarantee: total at every horizon"),
            Guarantee::NotContractive(_) => println!("static guarantee: none (a loop avoids every delay)"),
            Guarantee::Precondition(why) => println!("static guarantee: none ({why})"),
        }
    }
    if report.is_total() {
        Ok(())
    } else {
        Err(Failure::Property)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Check { file } => check(&file),
        Command::Sim { file, input, ticks, pad_bot } => sim(&file, input.as_deref(), ticks, pad_bot),
        Command::Laws { cap, budget, samples, seed, operator } => laws(cap, budget, samples, seed, operator),
        Command::Equiv { left, right, search } => equiv(&left, &right, &search),
        Command::Totality { file, search } => totality(&file, &search),
        Command::Dump { file } => {
            println!("{}", load(&file)?.dump().to_json());
            Ok(())
        }
        Command::Fmt { file } => {
            print!("{}", print_netlist(&load(&file)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
