//! `roster`: instance generation, exact solving, LP exchange, GA runs and experiments.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use roster_core::ga::{run, write_trace_csv, GaConfig, StopVersion};
use roster_core::harness::{parse_pairs, report_from_dir, run_experiment, ExperimentConfig};
use roster_core::improve::{
    build_graph, identity_operator, repair_operator, ImprovementOperator, NeuralOperator,
};
use roster_core::instance_gen::{build_dataset, gen_instance, write_dataset, SplitSpec};
use roster_core::io::{
    read_instance, read_json, read_schedule, write_instance, write_json, write_schedule,
};
use roster_core::model::{evaluate, fitness, is_optimal};
use roster_core::oracle::{export_lp, import_solution, solve_exact};
use roster_core::{Instance, Schedule};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "roster",
    version,
    about = "Staff rostering with a hybrid genetic algorithm"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImproverArg {
    None,
    Repair,
    Neural,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    V1,
    V2,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance.
    GenInstance {
        #[arg(long)]
        employees: usize,
        #[arg(long)]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an improvement dataset from a directory of instances.
    ///
    /// Optima come from `<name>.optimal.json` next to each instance, or from the exact solver.
    GenDataset {
        #[arg(long)]
        instances_dir: PathBuf,
        #[arg(long, default_value_t = 250)]
        per_optimal: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        split: String,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write the graph encoding of every record input as `<split>.graphs.jsonl`.
        #[arg(long)]
        with_graphs: bool,
    },
    /// Certify the minimum soft penalty of a tiny instance.
    SolveExact {
        #[arg(long)]
        instance: PathBuf,
        /// Optimal schedule output.
        #[arg(long)]
        out: PathBuf,
        /// Write the instance with `reference_min_soft` filled in.
        #[arg(long)]
        instance_out: Option<PathBuf>,
        #[arg(long, default_value_t = u64::MAX)]
        budget: u64,
    },
    /// Write the integer program of an instance in LP format.
    ExportLp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an external solver's `x_e_d_s` solution and convert it to a schedule.
    ImportSolution {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the instance with `reference_min_soft` set to the solution's objective.
        #[arg(long)]
        instance_out: Option<PathBuf>,
    },
    /// Evaluate a schedule against an instance.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Run the genetic algorithm once.
    RunGa {
        #[arg(long)]
        instance: PathBuf,
        /// GA configuration JSON; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        use_improver: Option<ImproverArg>,
        #[arg(long)]
        neural_endpoint: Option<String>,
        /// Spawn the neural operator and talk to it over stdin/stdout.
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        neural_command: Option<Vec<String>>,
        #[arg(long, default_value_t = 30_000)]
        neural_timeout_ms: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        stop: Option<StopArg>,
        #[arg(long)]
        pop_size: Option<usize>,
        #[arg(long)]
        max_epochs: Option<usize>,
        #[arg(long)]
        max_patience: Option<usize>,
        #[arg(long)]
        max_wall_seconds: Option<f64>,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        summary_out: Option<PathBuf>,
        #[arg(long)]
        best_out: Option<PathBuf>,
    },
    /// Run an experiment grid.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild aggregate and summary files from a finished experiment.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, default_value = "")]
        pairs: String,
        #[arg(long, default_value_t = 1000)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Cmd::GenInstance {
            employees,
            days,
            seed,
            out,
        } => {
            let inst = gen_instance(employees, days, seed);
            inst.validate()?;
            write_instance(&out, &inst)?;
        }
        Cmd::GenDataset {
            instances_dir,
            per_optimal,
            seed,
            split,
            out_dir,
            with_graphs,
        } => {
            gen_dataset(
                &instances_dir,
                per_optimal,
                seed,
                &split,
                &out_dir,
                with_graphs,
            )?;
        }
        Cmd::SolveExact {
            instance,
            out,
            instance_out,
            budget,
        } => {
            let mut inst = read_instance(&instance)?;
            let r = solve_exact(&inst, budget)?;
            write_schedule(&out, &r.schedule)?;
            if let Some(p) = instance_out {
                inst.reference_min_soft = Some(r.min_soft);
                write_instance(p, &inst)?;
            }
            print_json(&json!({ "min_soft": r.min_soft, "transitions": r.node_count }))?;
        }
        Cmd::ExportLp { instance, out } => {
            export_lp(&read_instance(&instance)?, &out)?;
        }
        Cmd::ImportSolution {
            instance,
            solution,
            out,
            instance_out,
        } => {
            let mut inst = read_instance(&instance)?;
            let (schedule, objective) = import_solution(&inst, &solution)?;
            if let Some(p) = out {
                write_schedule(p, &schedule)?;
            }
            if let Some(p) = instance_out {
                inst.reference_min_soft = Some(objective);
                write_instance(p, &inst)?;
            }
            print_json(&json!({ "objective": objective }))?;
        }
        Cmd::Evaluate { instance, schedule } => {
            let inst = read_instance(&instance)?;
            let s = read_schedule(&schedule)?;
            print_json(&evaluation(&s, &inst)?)?;
        }
        Cmd::RunGa {
            instance,
            config,
            use_improver,
            neural_endpoint,
            neural_command,
            neural_timeout_ms,
            seed,
            stop,
            pop_size,
            max_epochs,
            max_patience,
            max_wall_seconds,
            trace_out,
            summary_out,
            best_out,
        } => {
            let inst = read_instance(&instance)?;
            let mut cfg: GaConfig = match config {
                Some(p) => read_json(p)?,
                None => GaConfig::default(),
            };
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = stop {
                cfg.stop_cond_version = match v {
                    StopArg::V1 => StopVersion::V1,
                    StopArg::V2 => StopVersion::V2,
                };
            }
            if let Some(v) = pop_size {
                cfg.pop_size = v;
            }
            if let Some(v) = max_epochs {
                cfg.nb_max_epochs = v;
            }
            if let Some(v) = max_patience {
                cfg.max_patience = v;
            }
            if max_wall_seconds.is_some() {
                cfg.max_wall_seconds = max_wall_seconds;
            }
            let kind = use_improver.unwrap_or(if cfg.use_improver {
                ImproverArg::Repair
            } else {
                ImproverArg::None
            });
            cfg.use_improver = !matches!(kind, ImproverArg::None);
            let timeout = Duration::from_millis(neural_timeout_ms);
            let mut op: Box<dyn ImprovementOperator> = match kind {
                ImproverArg::None => Box::new(identity_operator()),
                ImproverArg::Repair => Box::new(repair_operator()),
                ImproverArg::Neural => match (neural_endpoint, neural_command) {
                    (Some(addr), None) => Box::new(NeuralOperator::connect(&addr, timeout)?),
                    (None, Some(argv)) => {
                        let mut cmd = Command::new(&argv[0]);
                        cmd.args(&argv[1..]);
                        Box::new(NeuralOperator::spawn(cmd, timeout)?)
                    }
                    _ => bail!("--use-improver neural needs --neural-endpoint or --neural-command"),
                },
            };
            let trace = run(&inst, &cfg, &mut op)?;
            if let Some(p) = trace_out {
                write_trace_csv(p, &trace.records)?;
            }
            if let Some(p) = &best_out {
                write_schedule(p, &trace.best_schedule)?;
            }
            let summary = json!({
                "stop_reason": trace.stop_reason,
                "epochs": trace.epochs(),
                "first_optimal_epoch": trace.first_optimal_epoch,
                "best_fitness": trace.best_fitness,
                "elapsed_seconds": trace.elapsed_seconds,
                "best": evaluation(&trace.best_schedule, &inst)?,
                "config": cfg,
            });
            if let Some(p) = summary_out {
                write_json(p, &summary)?;
            }
            print_json(&summary)?;
        }
        Cmd::Experiment {
            config,
            workers,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            let report = run_experiment(&cfg, &out)?;
            eprintln!("{} runs written to {}", report.runs.len(), out.display());
        }
        Cmd::Report {
            runs,
            pairs,
            window,
            out,
        } => {
            let pairs = parse_pairs(&pairs)?;
            let report = report_from_dir(&runs, &pairs, window)?;
            report.write(&out)?;
        }
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn evaluation(s: &Schedule, inst: &Instance) -> Result<serde_json::Value> {
    let r = evaluate(s, inst)?;
    Ok(json!({
        "feasible": r.is_feasible(),
        "optimal": inst.reference_min_soft.map(|_| is_optimal(s, inst)).transpose()?,
        "hard_total": r.hard_total,
        "c2": r.c2_count,
        "c3": r.c3_count,
        "c4": r.c4_count,
        "c5": r.c5_count,
        "soft_unnormalized": r.soft_unnormalized,
        "soft_normalized": r.soft_normalized,
        "fitness": fitness(s, inst)?,
    }))
}

fn gen_dataset(
    dir: &Path,
    per_optimal: usize,
    seed: u64,
    split: &str,
    out_dir: &Path,
    with_graphs: bool,
) -> Result<()> {
    let split = SplitSpec::parse(split)?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| {
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        name.ends_with(".json") && !name.ends_with(".optimal.json")
    });
    files.sort();
    if files.is_empty() {
        bail!("no instance files in {}", dir.display());
    }
    let mut solved = Vec::new();
    let mut instance_files = Vec::new();
    for path in &files {
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        let mut inst = read_instance(path)?;
        let optimal_file = dir.join(format!("{id}.optimal.json"));
        let optimal = if optimal_file.exists() {
            read_schedule(&optimal_file)?
        } else {
            solve_exact(&inst, u64::MAX)
                .with_context(|| {
                    format!("{id} has no {id}.optimal.json and cannot be solved exactly")
                })?
                .schedule
        };
        if inst.reference_min_soft.is_none() {
            inst.reference_min_soft = Some(evaluate(&optimal, &inst)?.soft_unnormalized);
        }
        let rel = format!("instances/{id}.json");
        write_instance(out_dir.join(&rel), &inst)?;
        instance_files.push((id.clone(), rel));
        solved.push((id, inst, optimal));
    }
    let splits = build_dataset(&solved, per_optimal, seed, split)?;
    write_dataset(out_dir, &splits, instance_files, seed, per_optimal, split)?;
    if with_graphs {
        let by_id: BTreeMap<&str, &Instance> = solved
            .iter()
            .map(|(id, inst, _)| (id.as_str(), inst))
            .collect();
        for (name, recs) in [
            ("train", &splits.train),
            ("valid", &splits.valid),
            ("test", &splits.test),
        ] {
            let mut buf = Vec::new();
            for r in recs {
                serde_json::to_writer(
                    &mut buf,
                    &build_graph(&r.input, by_id[r.instance_id.as_str()])?,
                )?;
                buf.push(b'\n');
            }
            fs::write(out_dir.join(format!("{name}.graphs.jsonl")), buf)?;
        }
    }
    eprintln!("{} records written to {}", splits.len(), out_dir.display());
    Ok(())
}
