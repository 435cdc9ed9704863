use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hedcheck::dfl::{parse, sym_sim, AssignmentList, Program, SymSimConfig};
use hedcheck::modular::{reduce_mod, RingConfig};
use hedcheck::pipeline::{expand, min_feasible_ii, mutate, pipeline_transform, to_dfl, LatencyModel};
use hedcheck::sec::{sec_piped, InputOrder, SecConfig, SegmentLimit, Verdict};
use hedcheck::Manager;

/// Equivalence checking of datapath programs with Horner expansion diagrams.
#[derive(Parser)]
#[command(name = "hedcheck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check two programs for equivalence (exit 0 = equivalent, 1 = not).
    Check(CheckArgs),
    /// Print the single-assignment list of a program.
    Simulate(SimulateArgs),
    /// Print the canonical polynomial of an output over the inputs.
    Canon(CanonArgs),
    /// Software-pipeline a program and print the rescheduled source.
    Pipeline(PipelineArgs),
    /// Apply one seeded mutation and print the mutated source.
    Mutate(MutateArgs),
}

#[derive(Args)]
struct Frontend {
    /// Maximum number of statements produced by loop unrolling.
    #[arg(long, default_value_t = SymSimConfig::default().unroll_limit)]
    unroll_limit: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    /// By first read.
    FirstAppearance,
    /// By declaration in the source files.
    File,
}

#[derive(Args)]
struct CheckArgs {
    spec: PathBuf,
    #[arg(value_name = "IMPL")]
    implementation: PathBuf,
    /// Compare modulo 2^N; over the integers when absent (equivalence over
    /// the integers implies equivalence at every width).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..=64))]
    width: Option<u32>,
    /// Diagram node budget per segment.
    #[arg(long, value_name = "K", env = "HEDCHECK_MAX_NODES", default_value_t = 1_000_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_nodes: u64,
    /// Input variable order.
    #[arg(long, value_enum, default_value_t = Order::FirstAppearance)]
    order: Order,
    /// File pairing spec outputs with impl outputs, one `spec impl` pair
    /// per line; outputs are paired by name when absent.
    #[arg(long, value_name = "FILE")]
    outputs_map: Option<PathBuf>,
    /// Write the JSON report to this file.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(flatten)]
    frontend: Frontend,
}

#[derive(Args)]
struct SimulateArgs {
    program: PathBuf,
    /// Print the list as JSON.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    frontend: Frontend,
}

#[derive(Args)]
struct CanonArgs {
    program: PathBuf,
    /// Reduce modulo 2^N; over the integers when absent.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..=64))]
    width: Option<u32>,
    /// Output to print; every output when absent.
    #[arg(long, value_name = "NAME")]
    output: Option<String>,
    #[command(flatten)]
    frontend: Frontend,
}

#[derive(Args)]
struct PipelineArgs {
    program: PathBuf,
    /// Initiation interval; the smallest feasible one when absent.
    #[arg(long, value_name = "N")]
    ii: Option<u32>,
    /// JSON latency model, e.g. {"addLatency": 1, "mulLatency": 2, "multipliers": 5}.
    #[arg(long, value_name = "FILE")]
    latency: Option<PathBuf>,
    /// Write the schedule as JSON to this file.
    #[arg(long, value_name = "FILE")]
    schedule: Option<PathBuf>,
    #[command(flatten)]
    frontend: Frontend,
}

#[derive(Args)]
struct MutateArgs {
    program: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the mutation descriptor as JSON to this file.
    #[arg(long, value_name = "FILE")]
    descriptor: Option<PathBuf>,
    #[command(flatten)]
    frontend: Frontend,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load(path: &Path, frontend: &Frontend) -> Result<(Program, AssignmentList)> {
    let program = parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let cfg = SymSimConfig { unroll_limit: frontend.unroll_limit };
    let list = sym_sim(&program, &cfg).with_context(|| format!("in {}", path.display()))?;
    Ok((program, list))
}

fn outputs_map(path: &Path) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (k, line) in read(path)?.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
        match cols[..] {
            [s, i] => pairs.push((s.to_string(), i.to_string())),
            _ => bail!("{}:{}: expected two output names", path.display(), k + 1),
        }
    }
    Ok(pairs)
}

fn check(args: &CheckArgs) -> Result<Verdict> {
    let (_, spec) = load(&args.spec, &args.frontend)?;
    let (_, imp) = load(&args.implementation, &args.frontend)?;
    let cfg = SecConfig {
        ring: args.width.map(RingConfig::new).transpose()?,
        limit: SegmentLimit::Nodes(usize::try_from(args.max_nodes).unwrap_or(usize::MAX)),
        output_map: args.outputs_map.as_deref().map(outputs_map).transpose()?,
        input_order: match args.order {
            Order::FirstAppearance => InputOrder::FirstAppearance,
            Order::File => InputOrder::Declaration,
        },
        ..SecConfig::default()
    };
    let report = sec_piped(&spec, &imp, &cfg)?;
    if let Some(path) = &args.report {
        write(path, &(report.to_json() + "\n"))?;
    }
    for note in &report.inexact {
        eprintln!("warning: {note}");
    }
    println!("{}", report.verdict);
    for u in &report.unmatched {
        println!("  {}: {} - {} = {}", u.output, u.spec, u.implementation, u.difference);
    }
    let c = &report.counters;
    eprintln!(
        "segments {}, internal searches {}, cut variables {}, peak nodes {}, {} ms",
        c.segments, c.internal_equ_calls, c.cut_vars, c.peak_node_count, report.elapsed_ms
    );
    Ok(report.verdict)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let (_, list) = load(&args.program, &args.frontend)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&list)?);
    } else {
        print!("{}", list.to_text());
    }
    Ok(())
}

fn canon(args: &CanonArgs) -> Result<()> {
    let (_, list) = load(&args.program, &args.frontend)?;
    if let Some(name) = &args.output {
        if list.output(name).is_none() {
            bail!("no output named `{name}`");
        }
    }
    let ring = args.width.map(RingConfig::new).transpose()?;
    let mut m = Manager::new();
    for (name, value) in expand(&mut m, &list)? {
        if args.output.as_ref().is_some_and(|o| *o != name) {
            continue;
        }
        let value = match &ring {
            Some(r) => reduce_mod(&mut m, &value, r)?,
            None => value,
        };
        let text = m.format(&value)?;
        if args.output.is_some() {
            println!("{text}");
        } else {
            println!("{name} = {text}");
        }
    }
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let (program, list) = load(&args.program, &args.frontend)?;
    let lm = match &args.latency {
        Some(path) => LatencyModel::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))?,
        None => LatencyModel::default(),
    };
    let ii = match args.ii {
        Some(ii) => ii,
        None => min_feasible_ii(&list, &lm)?,
    };
    let r = pipeline_transform(&list, &lm, ii)?;
    if let Some(path) = &args.schedule {
        write(path, &(serde_json::to_string_pretty(&r.schedule)? + "\n"))?;
    }
    println!("// initiation interval {ii}, {} cycles", r.schedule.length());
    print!("{}", to_dfl(&r.list, &program, Some(&r.schedule.cycles())));
    Ok(())
}

fn mutate_cmd(args: &MutateArgs) -> Result<()> {
    let (program, list) = load(&args.program, &args.frontend)?;
    let (mutant, d) = mutate(&list, args.seed)?;
    if let Some(path) = &args.descriptor {
        write(path, &(serde_json::to_string_pretty(&d)? + "\n"))?;
    }
    println!("// {:?} at `{}`: `{}` became `{}`", d.kind, d.lhs, d.before, d.after);
    print!("{}", to_dfl(&mutant, &program, None));
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Check(a) => Ok(match check(a)? {
            Verdict::Equivalent => ExitCode::SUCCESS,
            Verdict::Unequivalent => ExitCode::from(1),
        }),
        Command::Simulate(a) => simulate(a).map(|_| ExitCode::SUCCESS),
        Command::Canon(a) => canon(a).map(|_| ExitCode::SUCCESS),
        Command::Pipeline(a) => pipeline(a).map(|_| ExitCode::SUCCESS),
        Command::Mutate(a) => mutate_cmd(a).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    run(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
