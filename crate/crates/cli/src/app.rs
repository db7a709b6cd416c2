//! Command-line surface.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use imprepair::engine::{naive_explore, repair, Mode, RepairOptions, RepairSession};
use imprepair::engine::{eval_assign_class, eval_value_class};
use imprepair::space::{build_space, Patch, PatchSpace};
use imprepair::LocationId;

use crate::bundle::{load_bundle, DefectBundle};
use crate::stats::{emit_patches, emit_stats, StatsReport};

#[derive(Debug, Parser)]
#[command(
    name = "imprepair",
    about = "Test-driven repair of small imperative programs with test-equivalence partitioning",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    First,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Partition,
    Naive,
}

#[derive(Debug, Args)]
struct RepairArgs {
    /// Bundle directory (program.imp, tests.txt, optional config.txt)
    bundle: PathBuf,
    /// Stop at the first repair or explore the whole space
    #[arg(long, value_enum, default_value_t = ModeArg::First)]
    mode: ModeArg,
    /// Partitioned exploration or plain per-candidate enumeration
    #[arg(long, value_enum, default_value_t = StrategyArg::Partition)]
    strategy: StrategyArg,
    /// Restrict schemas to these statement locations (overrides config)
    #[arg(long, value_delimiter = ',')]
    locs: Option<Vec<u32>>,
    /// Write the stats CSV here
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write one serialized patch per line here
    #[arg(long)]
    patches: Option<PathBuf>,
    /// Step budget per execution (overrides config)
    #[arg(long)]
    fuel: Option<u64>,
    /// Dump analysis events to stderr
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    /// Bundle directory
    bundle: PathBuf,
    /// Name of the test to run
    #[arg(long)]
    test: String,
    /// Serialized patch, e.g. "REPLACE 2 WITH i mod 2 = 1"
    #[arg(long)]
    patch: String,
    #[arg(long)]
    fuel: Option<u64>,
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Search the bundle's patch space for plausible repairs
    Repair(RepairArgs),
    /// Compute the test-equivalence class of one patch on one test
    Partition(PartitionArgs),
    /// Validate a bundle and print its summary
    Check { bundle: PathBuf },
}

const EXIT_OK: i32 = 0;
const EXIT_NO_PATCH: i32 = 1;
const EXIT_ERROR: i32 = 2;

/// Runs the CLI on explicit arguments (the first element is the program
/// name) and returns the process exit code.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the error path too
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.cmd {
        Cmd::Repair(args) => cmd_repair(args),
        Cmd::Partition(args) => cmd_partition(args),
        Cmd::Check { bundle } => cmd_check(bundle),
    }
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_ERROR
}

fn load_and_build(
    bundle_dir: &PathBuf,
    locs: Option<Vec<u32>>,
    fuel: Option<u64>,
) -> Result<(DefectBundle, PatchSpace), String> {
    let mut bundle = load_bundle(bundle_dir).map_err(|e| e.to_string())?;
    if let Some(locs) = locs {
        bundle.schemas.locations =
            Some(locs.into_iter().map(LocationId).collect::<BTreeSet<_>>());
    }
    if let Some(fuel) = fuel {
        bundle.fuel = fuel;
    }
    let space =
        build_space(&bundle.program, &bundle.schemas, &bundle.synth).map_err(|e| e.to_string())?;
    Ok((bundle, space))
}

fn print_traces(session: &RepairSession) {
    for rec in &session.traces {
        eprintln!("== {} on {}", rec.patch, rec.test);
        for ev in &rec.events {
            eprintln!("   {ev}");
        }
    }
}

fn cmd_repair(args: RepairArgs) -> i32 {
    let (bundle, space) = match load_and_build(&args.bundle, args.locs, args.fuel) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let opts = RepairOptions {
        mode: match args.mode {
            ModeArg::First => Mode::First,
            ModeArg::Full => Mode::Full,
        },
        fuel: bundle.fuel,
        trace: args.trace,
    };
    let result = match args.strategy {
        StrategyArg::Partition => repair(&bundle.program, &bundle.tests, &space, &bundle.cost_fn, &opts),
        StrategyArg::Naive => {
            naive_explore(&bundle.program, &bundle.tests, &space, &bundle.cost_fn, &opts)
        }
    };
    let session = match result {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    if args.trace {
        print_traces(&session);
    }

    let report = StatsReport::from_session(&bundle.name, &session);
    println!(
        "{} candidates, {} explored, {} test executions, {} plausible",
        report.candidates_total, report.candidates_explored, report.test_executions, report.plausible
    );
    match session.repairs.first() {
        Some(first) => {
            println!("repair: {}", first.serialize());
            for extra in session.repairs.iter().skip(1) {
                println!("also plausible: {}", extra.serialize());
            }
        }
        None => println!("no plausible patch in the search space"),
    }

    if let Some(path) = &args.stats {
        if let Err(e) = emit_stats(&report, path) {
            return fail(format!("writing {}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.patches {
        if let Err(e) = emit_patches(&session.repairs, path) {
            return fail(format!("writing {}: {e}", path.display()));
        }
    }

    if session.repairs.is_empty() {
        EXIT_NO_PATCH
    } else {
        EXIT_OK
    }
}

fn cmd_partition(args: PartitionArgs) -> i32 {
    let (bundle, space) = match load_and_build(&args.bundle, None, args.fuel) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let patch: Patch = match args.patch.parse() {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let Some(test) = bundle.tests.iter().find(|t| t.name == args.test) else {
        return fail(format!("no test named `{}` in the bundle", args.test));
    };
    let Some((_, group)) = space.group_of(&patch) else {
        return fail(format!("patch `{patch}` is not in the bundle's search space"));
    };
    let eval = match &patch {
        Patch::InsertAssign { .. } => {
            eval_assign_class(&bundle.program, &patch, test, group, bundle.fuel, args.trace)
        }
        _ => eval_value_class(&bundle.program, &patch, test, group, bundle.fuel, args.trace),
    };
    let eval = match eval {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    if args.trace {
        eprintln!("== {} on {}", patch.serialize(), test.name);
        for ev in &eval.events {
            eprintln!("   {ev}");
        }
    }
    println!("test {} verdict {}", test.name, eval.verdict);
    let mut members: Vec<String> =
        eval.class.patches().iter().map(|p| p.serialize()).collect();
    members.sort();
    println!("class of {} member(s):", members.len());
    for m in members {
        println!("  {m}");
    }
    EXIT_OK
}

fn cmd_check(bundle_dir: PathBuf) -> i32 {
    let bundle = match load_bundle(&bundle_dir) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let space = match build_space(&bundle.program, &bundle.schemas, &bundle.synth) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    println!(
        "bundle {}: {} statements, {} tests, {} candidate patches in {} groups",
        bundle.name,
        bundle.program.statement_count(),
        bundle.tests.len(),
        space.total(),
        space.groups.len()
    );
    EXIT_OK
}
