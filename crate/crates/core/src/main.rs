use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use edgeplace::format::{load_instance, save_instance};
use edgeplace::harness::{output_path, run_experiment, ExperimentPlan, WeightSpec};
use edgeplace::model::{shared_dataset_partition, ProblemInstance};
use edgeplace::objective::{is_feasible, placement_cost, transfer_time, FitnessWeights};
use edgeplace::optimizers::{Algorithm, OptimizerConfig, SelectionRule};
use edgeplace::oracle::exhaustive_search;
use edgeplace::run_strategy;
use edgeplace::workloads::{fixture_placement, generate, load_fixture, GeneratorSpec, FIXTURES};

#[derive(Parser)]
#[command(
    name = "edgeplace",
    version,
    about = "Shared dataset placement for edge/cloud workflows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and print a summary.
    Validate { instance: String },
    /// Optimize the placement of an instance's public datasets.
    Place(PlaceArgs),
    /// Score a given placement.
    Evaluate {
        instance: String,
        /// Comma-separated datacenter per dataset, or a named fixture placement.
        placement: String,
        /// Write the movement trace as CSV to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Generate a synthetic instance from a TOML spec.
    Generate {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a parameter sweep described by a TOML plan.
    Experiment {
        plan: PathBuf,
        /// Output CSV; defaults to the plan's `output` under $EDGEPLACE_OUT_DIR.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate every placement of a small instance.
    Oracle {
        instance: String,
        #[command(flatten)]
        weights: WeightArgs,
    },
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long, default_value_t = 0.5)]
    w_time: f64,
    #[arg(long, default_value_t = 0.5)]
    w_cost: f64,
    /// Transfer time normaliser; sampled from random placements if omitted.
    #[arg(long)]
    time_norm: Option<f64>,
    /// Cost normaliser; sampled from random placements if omitted.
    #[arg(long)]
    cost_norm: Option<f64>,
}

impl WeightArgs {
    fn resolve(&self, inst: &ProblemInstance) -> Result<FitnessWeights> {
        let spec = WeightSpec {
            w_time: self.w_time,
            w_cost: self.w_cost,
            time_norm: self.time_norm,
            cost_norm: self.cost_norm,
        };
        Ok(spec.resolve(inst)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Text,
    Metrics,
    Placement,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selection {
    Gbest,
    Previous,
}

#[derive(Args)]
struct PlaceArgs {
    instance: String,
    #[arg(long, default_value = "de-dpso")]
    algo: Algorithm,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    scale_factor: Option<f64>,
    #[arg(long)]
    cr_p: Option<f64>,
    #[arg(long)]
    cr_g: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, value_enum)]
    selection: Option<Selection>,
    #[arg(long, value_enum, default_value = "text")]
    format: Output,
    /// Write the movement trace as CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl PlaceArgs {
    fn config(&self) -> OptimizerConfig {
        let d = OptimizerConfig::default();
        OptimizerConfig {
            population: self.population.unwrap_or(d.population),
            max_iterations: self.iterations.unwrap_or(d.max_iterations),
            scale_factor: self.scale_factor.unwrap_or(d.scale_factor),
            cr_p: self.cr_p.unwrap_or(d.cr_p),
            cr_g: self.cr_g.unwrap_or(d.cr_g),
            convergence_window: self.window.unwrap_or(d.convergence_window),
            seed: self.seed,
            selection: match self.selection {
                Some(Selection::Previous) => SelectionRule::Previous,
                Some(Selection::Gbest) => SelectionRule::Gbest,
                None => d.selection,
            },
        }
    }
}

/// A fixture name or a path to an instance file.
fn instance(arg: &str) -> Result<ProblemInstance> {
    let path = Path::new(arg);
    if path.exists() {
        return load_instance(path).with_context(|| format!("loading {arg}"));
    }
    if FIXTURES.contains(&arg) {
        return Ok(load_fixture(arg)?);
    }
    bail!(
        "no instance file or fixture named `{arg}` (fixtures: {})",
        FIXTURES.join(", ")
    )
}

fn parse_placement(inst: &ProblemInstance, arg: &str, instance_arg: &str) -> Result<Vec<usize>> {
    if FIXTURES.contains(&instance_arg) && !arg.contains(',') && arg.parse::<usize>().is_err() {
        return Ok(fixture_placement(instance_arg, arg)?);
    }
    let p: Vec<usize> = arg
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("bad datacenter id `{s}`"))
        })
        .collect::<Result<_>>()?;
    if p.len() != inst.datasets().len() {
        bail!(
            "placement has {} entries, instance has {} datasets",
            p.len(),
            inst.datasets().len()
        );
    }
    Ok(p)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { instance: arg } => {
            let inst = instance(&arg)?;
            let p = shared_dataset_partition(&inst);
            let env = inst.env();
            println!(
                "ok: {} datacenters ({} cloud, {} edge), {} workflows, {} tasks, {} datasets",
                env.len(),
                env.cloud_ids().count(),
                env.edge_ids().count(),
                inst.workflows().len(),
                inst.tasks().len(),
                inst.datasets().len()
            );
            println!(
                "datasets: private={} public_unshared={} public_shared_local={} public_shared_crossregion={}",
                p.private.len(),
                p.public_unshared.len(),
                p.public_shared_local.len(),
                p.public_shared_crossregion.len()
            );
        }
        Command::Place(args) => {
            let inst = instance(&args.instance)?;
            let weights = args.weights.resolve(&inst)?;
            let report = run_strategy(&inst, args.algo, &args.config(), &weights)?;
            match args.format {
                Output::Text => print!("{}", report.to_text()),
                Output::Metrics => println!(
                    "{}\n{}",
                    edgeplace::StrategyReport::METRICS_HEADER,
                    report.metrics_row()
                ),
                Output::Placement => print!("{}", report.placement_csv()),
            }
            if let Some(path) = args.trace {
                std::fs::write(&path, report.trace.to_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Evaluate {
            instance: arg,
            placement,
            trace,
        } => {
            let inst = instance(&arg)?;
            let p = parse_placement(&inst, &placement, &arg)?;
            let (t, tr) = transfer_time(&inst, &p)?;
            let c = placement_cost(&inst, &p)?;
            let feas = is_feasible(&inst, &p);
            println!("t_trans: {t:.2} s");
            println!("c_cost: {:.2} $", c.total);
            println!("moves: {} ({:.2} GB)", tr.total_moves, tr.total_gb);
            println!(
                "feasible: {} (overflow {:.2} GB, misplaced private {:?})",
                feas.feasible, feas.overflow_gb, feas.misplaced_private
            );
            if let Some(path) = trace {
                std::fs::write(&path, tr.to_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Generate { spec, output, seed } => {
            let text = std::fs::read_to_string(&spec)
                .with_context(|| format!("reading {}", spec.display()))?;
            let mut gs: GeneratorSpec =
                toml::from_str(&text).with_context(|| format!("parsing {}", spec.display()))?;
            if let Some(s) = seed {
                gs.seed = s;
            }
            let inst = generate(&gs)?;
            save_instance(&inst, &output)
                .with_context(|| format!("writing {}", output.display()))?;
            println!(
                "wrote {}: {} datasets ({} public), {} tasks",
                output.display(),
                inst.datasets().len(),
                inst.public_dims().len(),
                inst.tasks().len()
            );
        }
        Command::Experiment { plan, output } => {
            let text = std::fs::read_to_string(&plan)
                .with_context(|| format!("reading {}", plan.display()))?;
            let plan = ExperimentPlan::from_toml(&text)?;
            let out_dir = std::env::var_os("EDGEPLACE_OUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            let path = output.unwrap_or_else(|| output_path(&plan, &out_dir));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            let outcome = run_experiment(&plan);
            std::fs::write(&path, &outcome.csv)
                .with_context(|| format!("writing {}", path.display()))?;
            outcome.result?;
            println!("wrote {}", path.display());
        }
        Command::Oracle {
            instance: arg,
            weights,
        } => {
            let inst = instance(&arg)?;
            let w = weights.resolve(&inst)?;
            let r = exhaustive_search(&inst, &w)?;
            let (t, _) = transfer_time(&inst, &r.best_position)?;
            let c = placement_cost(&inst, &r.best_position)?;
            println!("combinations: {}", r.combinations);
            println!("best_fitness: {:.6}", r.best_fitness);
            println!("t_trans: {t:.2} s");
            println!("c_cost: {:.2} $", c.total);
            println!("optimal placements: {}", r.optimal.len());
            let cells: Vec<String> = r.best_position.iter().map(|d| d.to_string()).collect();
            println!("placement: {}", cells.join(","));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
