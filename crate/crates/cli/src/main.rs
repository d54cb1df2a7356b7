//! `consensus-spectra` command-line front end.

mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use consensus_spectra::bounds::{full_report, reversible_rate_bound, small_variation_rate_bound, CSV_HEADER};
use consensus_spectra::graphs::io::read_graph;
use consensus_spectra::graphs::random::rng;
use consensus_spectra::graphs::{make_family, ScheduleKind};
use consensus_spectra::matrices::{perron_with, MatrixDump};
use consensus_spectra::sim::{ot_two_star_schedule, random_x0, simulate};
use consensus_spectra::spectral::{reversible_eigen, reversible_spectrum_with};
use consensus_spectra::table::{table_rows, TableRow, TABLE_CSV_HEADER, TABLE_FAMILIES};
use consensus_spectra::{DirectedGraph, Family, GraphSchedule, Rule, RuleParams, Tolerances};

#[derive(Parser, Debug)]
#[command(name = "consensus-spectra", version, about = "Spectral and geometric bounds for averaging algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override `key=value`; repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VALUE", global = true)]
    tol_override: Vec<String>,
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Computed rate gaps of the example families next to the reference values.
    Table {
        /// Family to tabulate; repeatable. Defaults to all table families.
        #[arg(long)]
        family: Vec<Family>,
        #[arg(long)]
        size: Option<usize>,
        /// Comma-separated size parameters.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Every bound for one graph and rule, or rate bounds for a schedule.
    Bounds {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        schedule_file: Option<PathBuf>,
        /// Write the matrix as JSON to this path.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        /// Write the exact spectrum as JSON to this path.
        #[arg(long)]
        dump_spectrum: Option<PathBuf>,
    },
    /// Runs the averaging iteration and estimates its rate.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        schedule_file: Option<PathBuf>,
        /// Built-in schedule used when no file is given.
        #[arg(long, value_enum, default_value_t = ScheduleChoice::Constant)]
        schedule: ScheduleChoice,
        /// Extra-edge probability of generated schedules.
        #[arg(long, default_value_t = 0.2)]
        extra_edge_prob: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// `random`, `consensus`, `eigenvector` or comma-separated values.
        #[arg(long, default_value = "random")]
        x0: String,
    },
    /// Runs a verification suite; exits nonzero on any failure.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
    },
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    graph_file: Option<PathBuf>,
    #[arg(long, default_value = "equal_neighbor")]
    rule: Rule,
    /// FixedWeight bounds `q_i`: one value for all nodes or one per node.
    #[arg(long, value_delimiter = ',')]
    q: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScheduleChoice {
    Constant,
    OtTwoStar,
    Generated,
}

impl GraphArgs {
    fn graph(&self) -> Result<(String, DirectedGraph)> {
        match (&self.graph_file, self.family) {
            (Some(p), None) => Ok((p.display().to_string(), read_graph(p)?)),
            (None, Some(f)) => {
                let size = self.size.with_context(|| format!("--size is required with --family {f}"))?;
                Ok((format!("{f}_{size}"), make_family(f, size)?))
            }
            (Some(_), Some(_)) => bail!("give either --graph-file or --family, not both"),
            (None, None) => bail!("a graph is required: --family with --size, or --graph-file"),
        }
    }

    fn params(&self, n: usize) -> Result<RuleParams> {
        Ok(match self.q.len() {
            0 => RuleParams::default(),
            1 => RuleParams::with_q(vec![self.q[0]; n]),
            k if k == n => RuleParams::with_q(self.q.clone()),
            k => bail!("--q has {k} values for {n} nodes"),
        })
    }
}

/// Size parameters used when none are given, the smallest with `n >= 64`.
fn default_size(f: Family) -> usize {
    match f {
        Family::Hypercube | Family::BinaryTree => 6,
        Family::Grid => 8,
        Family::Barbell => 17,
        Family::Butterfly => 32,
        Family::Ring => 65,
        _ => 64,
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn json(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_table(common: &Common, tol: &Tolerances, family: &[Family], size: Option<usize>, sizes: &[usize]) -> Result<bool> {
    let families: Vec<Family> = if family.is_empty() { TABLE_FAMILIES.to_vec() } else { family.to_vec() };
    let mut sizes: Vec<usize> = sizes.to_vec();
    sizes.extend(size);
    let jobs: Vec<(Family, usize)> = families
        .iter()
        .flat_map(|&f| {
            let s = if sizes.is_empty() { vec![default_size(f)] } else { sizes.clone() };
            s.into_iter().map(move |s| (f, s))
        })
        .collect();
    let rows: Vec<TableRow> = jobs
        .par_iter()
        .map(|&(f, s)| table_rows(f, s, tol).with_context(|| format!("{f} size {s}")))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let text = match common.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = format!("{TABLE_CSV_HEADER}\n");
            for r in &rows {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
    };
    emit(common, &text)?;
    let disagree = rows.iter().filter(|r| r.agrees == Some(false)).count();
    log::info!("{} rows, {disagree} outside the agreement tolerance", rows.len());
    Ok(true)
}

#[derive(Serialize)]
struct ScheduleBounds {
    schedule: String,
    rule: Rule,
    reversible: Option<consensus_spectra::RateBounds>,
    /// Why the reversible corollaries do not apply.
    reason: Option<String>,
    small_variation: consensus_spectra::bounds::SmallVariation,
}

fn cmd_bounds(
    common: &Common,
    tol: &Tolerances,
    graph: &GraphArgs,
    schedule_file: Option<&Path>,
    dump_matrix: Option<&Path>,
    dump_spectrum: Option<&Path>,
) -> Result<bool> {
    if let Some(path) = schedule_file {
        let s = GraphSchedule::from_json_file(path)?;
        let params = graph.params(s.n())?;
        let (reversible, reason) = match reversible_rate_bound(&s, graph.rule, &params, tol) {
            Ok(b) => (Some(b), None),
            Err(e @ consensus_spectra::Error::Assumption { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        let out = ScheduleBounds {
            schedule: path.display().to_string(),
            rule: graph.rule,
            reversible,
            reason,
            small_variation: small_variation_rate_bound(&s, graph.rule, &params, tol)?,
        };
        let text = match common.format {
            Format::Json => json(&out)?,
            Format::Csv => {
                let mut s = String::from("quantity,value\n");
                if let Some(b) = &out.reversible {
                    for (k, v) in [
                        ("corollary", b.corollary),
                        ("theorem", b.theorem),
                        ("algorithm", b.algorithm),
                        ("kappa", b.kappa),
                        ("kappa_tilde", b.kappa_tilde),
                    ] {
                        s.push_str(&format!("{k},{v}\n"));
                    }
                    if let Some(c) = b.complete_graph {
                        s.push_str(&format!("complete_graph,{c}\n"));
                    }
                }
                let sv = &out.small_variation;
                s.push_str(&format!("nu,{}\nsup_sigma2,{}\nsmall_variation,{}\nvacuous,{}\n", sv.nu, sv.sup_sigma2, sv.bound, sv.vacuous));
                s
            }
        };
        emit(common, &text)?;
        return Ok(true);
    }

    let (id, g) = graph.graph()?;
    let params = graph.params(g.n())?;
    let report = full_report(&id, &g, graph.rule, &params, tol)?;
    if dump_matrix.is_some() || dump_spectrum.is_some() {
        let a = graph.rule.matrix(&g, &params)?;
        if let Some(p) = dump_matrix {
            write_json(p, &MatrixDump::new(&a, Some(graph.rule), Some(id.clone())))?;
        }
        if let Some(p) = dump_spectrum {
            let pi = perron_with(&a, tol)?;
            let target = if report.reversible { a.clone() } else { a.adjoint(&pi).matmul(&a) };
            write_json(p, &reversible_spectrum_with(&target, &pi, tol)?)?;
        }
    }
    let text = match common.format {
        Format::Json => json(&report)?,
        Format::Csv => format!("{CSV_HEADER}\n{}\n", report.csv_row()),
    };
    emit(common, &text)?;
    for c in report.failed_checks() {
        log::error!("{}: bound {} does not cover {}", c.name, c.bound, c.exact);
    }
    Ok(report.sound)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    common: &Common,
    tol: &Tolerances,
    graph: &GraphArgs,
    schedule_file: Option<&Path>,
    choice: ScheduleChoice,
    extra_edge_prob: f64,
    steps: usize,
    x0: &str,
) -> Result<bool> {
    let (name, schedule) = match (schedule_file, choice) {
        (Some(p), _) => (p.display().to_string(), GraphSchedule::from_json_file(p)?),
        (None, ScheduleChoice::OtTwoStar) => {
            let n = graph.size.context("--size is required for the two-star schedule")?;
            (format!("ot_two_star_{n}"), ot_two_star_schedule(n)?)
        }
        (None, ScheduleChoice::Generated) => {
            let n = graph.size.context("--size is required for a generated schedule")?;
            let s = GraphSchedule::generated(n, common.seed, steps, extra_edge_prob)?;
            (format!("generated_{n}_seed{}", common.seed), s)
        }
        (None, ScheduleChoice::Constant) => {
            let (id, g) = graph.graph()?;
            (id, GraphSchedule::constant(g))
        }
    };
    let n = schedule.n();
    let params = graph.params(n)?;
    let start: Vec<f64> = match x0 {
        "random" => random_x0(n, &mut rng(common.seed)),
        "consensus" => vec![1.0; n],
        "eigenvector" => {
            if schedule.kind() != ScheduleKind::Constant {
                bail!("an eigenvector start needs a constant schedule");
            }
            let a = graph.rule.matrix(&schedule.graphs()[0], &params)?;
            let pi = perron_with(&a, tol)?;
            reversible_eigen(&a, &pi, tol)?.vector(1).to_vec()
        }
        list => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad x0 entry `{v}`")))
            .collect::<Result<_>>()?,
    };
    let mut traj = simulate(&schedule, graph.rule, &params, &start, steps, tol)?;
    traj.schedule_ref = Some(name);
    traj.seed = (x0 == "random" || choice == ScheduleChoice::Generated).then_some(common.seed);
    let text = match common.format {
        Format::Json => json(&traj)?,
        Format::Csv => format!("# {}\n{}", serde_json::to_string(&traj.header())?, traj.csv()),
    };
    emit(common, &text)?;
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool> {
    let mut tol = Tolerances::default();
    for o in &cli.common.tol_override {
        tol.set(o)?;
    }
    let c = &cli.common;
    match &cli.command {
        Command::Table { family, size, sizes } => cmd_table(c, &tol, family, *size, sizes),
        Command::Bounds {
            graph,
            schedule_file,
            dump_matrix,
            dump_spectrum,
        } => cmd_bounds(
            c,
            &tol,
            graph,
            schedule_file.as_deref(),
            dump_matrix.as_deref(),
            dump_spectrum.as_deref(),
        ),
        Command::Simulate {
            graph,
            schedule_file,
            schedule,
            extra_edge_prob,
            steps,
            x0,
        } => cmd_simulate(c, &tol, graph, schedule_file.as_deref(), *schedule, *extra_edge_prob, *steps, x0),
        Command::Verify { suite } => {
            let outcome = verify::run(*suite, c.seed, &tol)?;
            let text = match c.format {
                Format::Json => json(&outcome)?,
                Format::Csv => outcome.csv(),
            };
            emit(c, &text)?;
            eprintln!("{}", outcome.summary());
            Ok(outcome.failures.is_empty())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var("CONSENSUS_SPECTRA_THREADS") {
        match v.parse::<usize>() {
            Ok(k) if k > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                    log::warn!("thread pool: {e}");
                }
            }
            _ => log::warn!("ignoring CONSENSUS_SPECTRA_THREADS={v}"),
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
