//! Batch benchmarks.
//!
//! CSV columns, one row per (instance, variant) run followed by one `avg-`
//! row per (family, size, variant) group:
//!
//! | column | meaning |
//! |---|---|
//! | instance | `<family>-<m>x<n>-s<seed>` or `avg-<family>-<m>x<n>` |
//! | family, m, n, seed | generator parameters (seed empty on averages) |
//! | variant, init, alpha | solver options (alpha resolved to a number) |
//! | runs | 1, or the number of successful runs averaged |
//! | optimal | run finished with a proof of optimality (averages: all did) |
//! | objective | optimal cost (averages: mean) |
//! | pivots, pivots_phase1, pivots_phase2, pivots_simplex | pivot counts |
//! | macro_iterations | Phase 1 + Phase 2 rounds |
//! | time_seconds | wall time of the solve alone |
//! | p_length_phase1, p_length_phase2 | mean cycle path length in nodes |
//! | colored_nodes_phase1 | mean nodes recolored per Phase-1 push |
//! | involved_nodes_phase2 | mean nodes rehung per Phase-2 pivot |
//! | error | empty unless the run failed |

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use transport_core::gen::{Family, GenSpec};
use transport_core::{SolveOptions, SolveReport, Variant};

use crate::SolverArgs;

#[derive(Args)]
pub struct BenchArgs {
    /// Instance families (comma separated): usq, urect, grid.
    #[arg(long, value_delimiter = ',', default_value = "usq")]
    families: Vec<Family>,
    /// Sizes (comma separated): `k` for usq, `MxN` for urect, the side `g` for grid.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<String>,
    /// Instances per size.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Seed of the first instance of each size.
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Solver variants (comma separated): iio+, iio-, ns.
    #[arg(long, value_delimiter = ',', default_value = "iio+,ns")]
    variants: Vec<Variant>,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV output (default: standard output).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Worker threads; each solve stays single-threaded.
    #[arg(long, env = "TPSOLVE_THREADS")]
    threads: Option<usize>,
}

/// An integer or a mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Num {
    Int(i128),
    Real(f64),
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Num::Int(v) => s.serialize_i128(v),
            Num::Real(v) => s.serialize_f64(v),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub seed: Option<u64>,
    pub variant: String,
    pub init: String,
    pub alpha: usize,
    pub runs: usize,
    pub optimal: Option<bool>,
    pub objective: Option<Num>,
    pub pivots: Option<Num>,
    pub pivots_phase1: Option<Num>,
    pub pivots_phase2: Option<Num>,
    pub pivots_simplex: Option<Num>,
    pub macro_iterations: Option<Num>,
    pub time_seconds: Option<f64>,
    pub p_length_phase1: Option<f64>,
    pub p_length_phase2: Option<f64>,
    pub colored_nodes_phase1: Option<f64>,
    pub involved_nodes_phase2: Option<f64>,
    pub error: String,
}

impl BenchRow {
    pub fn from_run(
        label: &str,
        family: Option<Family>,
        (m, n): (usize, usize),
        options: &SolveOptions,
        report: Result<&SolveReport, String>,
    ) -> Self {
        let mut row = BenchRow {
            instance: label.to_owned(),
            family: family.map(|f| f.to_string()).unwrap_or_default(),
            m,
            n,
            seed: options.seed,
            variant: options.variant.to_string(),
            init: options.init.to_string(),
            alpha: options.alpha.unwrap_or(10 * (m + n)).max(1),
            runs: 0,
            optimal: None,
            objective: None,
            pivots: None,
            pivots_phase1: None,
            pivots_phase2: None,
            pivots_simplex: None,
            macro_iterations: None,
            time_seconds: None,
            p_length_phase1: None,
            p_length_phase2: None,
            colored_nodes_phase1: None,
            involved_nodes_phase2: None,
            error: String::new(),
        };
        match report {
            Ok(r) => {
                let int = |v: u64| Some(Num::Int(v as i128));
                row.runs = 1;
                row.optimal = Some(r.optimal);
                row.objective = Some(Num::Int(r.objective));
                row.pivots = int(r.pivots_total);
                row.pivots_phase1 = int(r.pivots_phase1);
                row.pivots_phase2 = int(r.pivots_phase2);
                row.pivots_simplex = int(r.pivots_simplex);
                row.macro_iterations = int(r.macro_iterations);
                row.time_seconds = Some(r.wall_time.as_secs_f64());
                row.p_length_phase1 = Some(r.avg_path_length_phase1);
                row.p_length_phase2 = Some(r.avg_path_length_phase2);
                row.colored_nodes_phase1 = Some(r.avg_colored_nodes_phase1);
                row.involved_nodes_phase2 = Some(r.avg_involved_nodes_phase2);
            }
            Err(e) => row.error = e,
        }
        row
    }
}

/// Mean of the successful rows of one group.
fn average(label: String, rows: &[&BenchRow]) -> BenchRow {
    let ok: Vec<&BenchRow> = rows.iter().copied().filter(|r| r.error.is_empty()).collect();
    let first = rows[0];
    let count = ok.len();
    let mean_num = |f: fn(&BenchRow) -> Option<Num>| -> Option<Num> {
        if count == 0 {
            return None;
        }
        let sum: f64 = ok
            .iter()
            .map(|r| match f(r) {
                Some(Num::Int(v)) => v as f64,
                Some(Num::Real(v)) => v,
                None => 0.0,
            })
            .sum();
        Some(Num::Real(sum / count as f64))
    };
    let mean = |f: fn(&BenchRow) -> Option<f64>| -> Option<f64> {
        (count > 0).then(|| ok.iter().map(|r| f(r).unwrap_or(0.0)).sum::<f64>() / count as f64)
    };
    BenchRow {
        instance: label,
        family: first.family.clone(),
        m: first.m,
        n: first.n,
        seed: None,
        variant: first.variant.clone(),
        init: first.init.clone(),
        alpha: first.alpha,
        runs: count,
        optimal: (count > 0).then(|| ok.iter().all(|r| r.optimal == Some(true))),
        objective: mean_num(|r| r.objective),
        pivots: mean_num(|r| r.pivots),
        pivots_phase1: mean_num(|r| r.pivots_phase1),
        pivots_phase2: mean_num(|r| r.pivots_phase2),
        pivots_simplex: mean_num(|r| r.pivots_simplex),
        macro_iterations: mean_num(|r| r.macro_iterations),
        time_seconds: mean(|r| r.time_seconds),
        p_length_phase1: mean(|r| r.p_length_phase1),
        p_length_phase2: mean(|r| r.p_length_phase2),
        colored_nodes_phase1: mean(|r| r.colored_nodes_phase1),
        involved_nodes_phase2: mean(|r| r.involved_nodes_phase2),
        error: if count == rows.len() {
            String::new()
        } else {
            format!("{} of {} runs failed", rows.len() - count, rows.len())
        },
    }
}

/// One generated instance of the bench grid.
struct Job {
    family: Family,
    size_label: String,
    spec: GenSpec,
}

fn parse_size(family: Family, size: &str, seed: u64) -> Result<(String, GenSpec)> {
    let parse = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad size `{size}`"));
    Ok(match family {
        Family::UniformSquare => {
            let k = parse(size)?;
            (format!("{k}x{k}"), GenSpec::uniform_square(k, seed))
        }
        Family::UniformRect => {
            let Some((m, n)) = size.split_once('x') else {
                bail!("urect sizes look like MxN, got `{size}`")
            };
            let (m, n) = (parse(m)?, parse(n)?);
            (format!("{m}x{n}"), GenSpec::uniform_rect(m, n, seed))
        }
        Family::GridQuadratic => {
            let g = parse(size)?;
            (format!("g{g}"), GenSpec::grid(g, seed))
        }
    })
}

/// Runs every (instance, variant) pair and returns run rows followed by
/// group averages.
pub fn run_bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    let mut jobs = Vec::new();
    for &family in &args.families {
        for size in &args.sizes {
            for seed in args.first_seed..args.first_seed + args.seeds {
                let (size_label, spec) = parse_size(family, size, seed)?;
                jobs.push(Job {
                    family,
                    size_label,
                    spec,
                });
            }
        }
    }
    let run_job = |job: &Job| -> Vec<BenchRow> {
        let label = format!("{}-{}-s{}", job.family, job.size_label, job.spec.seed);
        let inst = match job.spec.generate() {
            Ok(inst) => inst,
            Err(e) => {
                return args
                    .variants
                    .iter()
                    .map(|&v| {
                        BenchRow::from_run(
                            &label,
                            Some(job.family),
                            (job.spec.m, job.spec.n),
                            &args.solver.options(v, Some(job.spec.seed)),
                            Err(e.to_string()),
                        )
                    })
                    .collect();
            }
        };
        args.variants
            .iter()
            .map(|&v| {
                let options = args.solver.options(v, Some(job.spec.seed));
                let start = Instant::now();
                let result = transport_core::solve(&inst, &options);
                let elapsed = start.elapsed();
                match result {
                    Ok(out) => {
                        let mut report = out.report;
                        report.wall_time = elapsed;
                        BenchRow::from_run(&label, Some(job.family), (inst.m, inst.n), &options, Ok(&report))
                    }
                    Err(e) => BenchRow::from_run(&label, Some(job.family), (inst.m, inst.n), &options, Err(e.to_string())),
                }
            })
            .collect()
    };
    let threads = args.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("cannot start worker threads")?;
    let per_job: Vec<Vec<BenchRow>> = pool.install(|| jobs.par_iter().map(run_job).collect());
    let mut rows: Vec<BenchRow> = per_job.into_iter().flatten().collect();
    let mut groups: Vec<(String, String, Vec<usize>)> = Vec::new();
    for (idx, (job_idx, v)) in (0..jobs.len())
        .flat_map(|j| args.variants.iter().map(move |v| (j, v)))
        .enumerate()
    {
        let key = format!("{}-{}", jobs[job_idx].family, jobs[job_idx].size_label);
        let variant = v.to_string();
        match groups.iter_mut().find(|(k, var, _)| *k == key && *var == variant) {
            Some(g) => g.2.push(idx),
            None => groups.push((key, variant, vec![idx])),
        }
    }
    let averages: Vec<BenchRow> = groups
        .iter()
        .map(|(key, _, members)| {
            let members: Vec<&BenchRow> = members.iter().map(|&i| &rows[i]).collect();
            average(format!("avg-{key}"), &members)
        })
        .collect();
    rows.extend(averages);
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let rows = run_bench(args)?;
    let sink: Box<dyn Write> = match &args.report {
        Some(path) => Box::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let failed = rows.iter().filter(|r| r.runs == 1 && !r.error.is_empty()).count();
    if failed > 0 {
        eprintln!("{failed} runs failed; see the error column");
    }
    Ok(())
}
