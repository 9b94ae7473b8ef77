mod bench;

use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use transport_core::certify::{self, VerifyError, Witness};
use transport_core::gen::{Family, GenSpec, DEFAULT_MASS_MAX};
use transport_core::instance::{self, Instance, SolutionError};
use transport_core::{InitMethod, SolveOptions, Variant};

use crate::bench::{BenchArgs, BenchRow};

/// Generate, solve, verify and benchmark balanced transportation problems.
#[derive(Parser)]
#[command(name = "tpsolve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Gen(GenArgs),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Check a solution file against an instance (exit 1: infeasible, 2: not optimal).
    Verify(VerifyArgs),
    /// Solve batches of generated instances and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Instance family: usq (square uniform), urect (rectangular uniform) or grid.
    #[arg(long, default_value = "usq")]
    family: Family,
    /// Number of sources (uniform families).
    #[arg(long)]
    m: Option<usize>,
    /// Number of destinations (uniform families; defaults to m).
    #[arg(long)]
    n: Option<usize>,
    /// Grid side; the instance has g*g sources and destinations.
    #[arg(long)]
    g: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Masses are drawn from 1..=mass-max.
    #[arg(long, default_value_t = DEFAULT_MASS_MAX)]
    mass_max: i64,
    /// Costs are drawn from 1..=cost-max (default: max(m, n)).
    #[arg(long)]
    cost_max: Option<i64>,
    /// Output instance file.
    #[arg(long)]
    out: PathBuf,
}

/// Solver flags shared by `solve` and `bench`.
#[derive(Args, Clone)]
pub struct SolverArgs {
    /// Starting basis: nwc, mmr or vam.
    #[arg(long, default_value = "mmr")]
    pub init: InitMethod,
    /// Shortlist size, or `auto` for 10 * (m + n).
    #[arg(long, default_value = "auto", value_parser = parse_alpha)]
    pub alpha: Alpha,
    /// Stop after this many macro-iterations (ns: pivots).
    #[arg(long)]
    pub max_macro_it: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alpha {
    Auto,
    Fixed(usize),
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    if s == "auto" {
        return Ok(Alpha::Auto);
    }
    match s.parse::<usize>() {
        Ok(0) => Err("alpha must be at least 1".into()),
        Ok(a) => Ok(Alpha::Fixed(a)),
        Err(_) => Err(format!("`{s}` is neither a positive integer nor `auto`")),
    }
}

impl SolverArgs {
    pub fn options(&self, variant: Variant, seed: Option<u64>) -> SolveOptions {
        SolveOptions {
            variant,
            init: self.init,
            alpha: match self.alpha {
                Alpha::Auto => None,
                Alpha::Fixed(a) => Some(a),
            },
            max_macro_iterations: self.max_macro_it,
            seed,
            trace: false,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Solution file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append one CSV row with the run statistics.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Instance label used in the report (default: the file name).
    #[arg(long)]
    label: Option<String>,
    /// Seed to echo in the report.
    #[arg(long)]
    seed: Option<u64>,
    /// iio+ (with coloring), iio- or ns.
    #[arg(long, default_value = "iio+")]
    variant: Variant,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Solution file.
    #[arg(long)]
    solution: PathBuf,
    /// Also require optimality.
    #[arg(long)]
    check_optimal: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which verify reserves for "not optimal"
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a).map(|_| ExitCode::SUCCESS),
        Command::Solve(a) => cmd_solve(&a).map(|_| ExitCode::SUCCESS),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => bench::cmd_bench(&a).map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(3)
    })
}

fn read_instance_file(path: &Path) -> Result<Instance> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    instance::read_instance(BufReader::new(file)).with_context(|| format!("cannot read {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec = match args.family {
        Family::GridQuadratic => {
            let Some(g) = args.g else { bail!("--family grid needs --g") };
            GenSpec::grid(g, args.seed)
        }
        family => {
            let Some(m) = args.m else { bail!("--family {family} needs --m") };
            let n = args.n.unwrap_or(m);
            GenSpec {
                family,
                m,
                n,
                ..GenSpec::uniform_rect(m, n, args.seed)
            }
        }
    };
    let spec = GenSpec {
        mass_max: args.mass_max,
        cost_max: args.cost_max,
        ..spec
    };
    let inst = spec.generate()?;
    let mut w = create(&args.out)?;
    instance::write_instance(&inst, &mut w)?;
    w.flush()?;
    eprintln!("wrote {}x{} instance to {}", inst.m, inst.n, args.out.display());
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let inst = read_instance_file(&args.input)?;
    let options = args.solver.options(args.variant, args.seed);
    let out = transport_core::solve(&inst, &options)?;
    let report = &out.report;
    let summary = format!("objective {}\noptimal {}\n", report.objective, report.optimal);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            instance::write_solution(report.objective, &out.solution, &mut w)?;
            w.flush()?;
            print!("{summary}");
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            instance::write_solution(report.objective, &out.solution, &mut w)?;
            w.flush()?;
            eprint!("{summary}");
        }
    }
    if let Some(path) = &args.report {
        let label = args.label.clone().unwrap_or_else(|| {
            args.input
                .file_name()
                .map_or_else(|| args.input.display().to_string(), |f| f.to_string_lossy().into_owned())
        });
        let row = BenchRow::from_run(&label, None, (inst.m, inst.n), &options, Ok(report));
        let exists = path.metadata().is_ok_and(|m| m.len() > 0);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("cannot open {}", path.display()))?;
        let mut w = csv::WriterBuilder::new().has_headers(!exists).from_writer(file);
        w.serialize(row)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let inst = read_instance_file(&args.input)?;
    let file = File::open(&args.solution).with_context(|| format!("cannot open {}", args.solution.display()))?;
    let (stated, solution) = instance::read_solution(BufReader::new(file))
        .with_context(|| format!("cannot read {}", args.solution.display()))?;
    if let Err(e) = inst.check_feasible(&solution) {
        println!("infeasible: {}", describe(&e));
        return Ok(ExitCode::from(1));
    }
    let objective = inst.objective(&solution)?;
    if let Some(z) = stated {
        if z != objective {
            println!("infeasible: stated objective {z} but the flows cost {objective}");
            return Ok(ExitCode::from(1));
        }
    }
    if !args.check_optimal {
        println!("feasible, objective {objective}");
        return Ok(ExitCode::SUCCESS);
    }
    match certify::verify(&inst, &solution) {
        Ok(_) => {
            println!("optimal, objective {objective}");
            Ok(ExitCode::SUCCESS)
        }
        Err(VerifyError::Infeasible(e)) => {
            println!("infeasible: {}", describe(&e));
            Ok(ExitCode::from(1))
        }
        Err(VerifyError::NotOptimal(w)) => {
            match w {
                Witness::ReducedCost {
                    source,
                    destination,
                    reduced_cost,
                } => println!(
                    "not optimal: reduced cost r({},{}) = {reduced_cost}",
                    source + 1,
                    destination + 1
                ),
                Witness::Cycle { cells, cost_change } => {
                    let cells: Vec<String> = cells.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).collect();
                    println!(
                        "not optimal: cycle {} changes the cost by {cost_change} per unit",
                        cells.join(" ")
                    );
                }
            }
            Ok(ExitCode::from(2))
        }
    }
}

/// Solution errors with 1-based indices.
fn describe(e: &SolutionError) -> String {
    match *e {
        SolutionError::Imbalance {
            side,
            index,
            expected,
            actual,
        } => format!("{side} {} ships {actual} but must ship {expected}", index + 1),
        SolutionError::NegativeFlow { row, col, flow } => format!("negative flow {flow} at ({}, {})", row + 1, col + 1),
        SolutionError::IndexOutOfRange { row, col, m, n } => {
            format!("entry ({}, {}) outside a {m}x{n} instance", row + 1, col + 1)
        }
        SolutionError::Overflow => e.to_string(),
    }
}
