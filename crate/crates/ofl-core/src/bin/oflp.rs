//! Command-line harness for the online facility location experiments.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ofl_core::bench::{
    run_experiment, run_predictor_eval, Algo, CostModel, ExperimentConfig, InstanceSource,
    PredictorEvalConfig, SyntheticSpec,
};
use ofl_core::hst::{generate_hst_instance, paper_parameters, HstInstanceSpec};
use ofl_core::instance::{
    write_graph_demands, write_graph_edges, write_graph_facilities, write_predictions,
};
use ofl_core::offline::{brute_force, mp_solve};
use ofl_core::predictors::RetrainPolicy;

#[derive(Parser)]
#[command(
    name = "oflp",
    about = "Online facility location with predictions: benchmarks and instance generators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a prediction-error sweep and write a CSV report.
    Sweep(SweepArgs),
    /// Evaluate the trained predictor on a train/test split.
    PredictorEval(PredictorEvalArgs),
    /// Generate a lower-bound tree instance (and optionally run on it).
    Hst(HstArgs),
    /// Solve an instance offline and dump the assignment.
    SolveOffline(SolveOfflineArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Euclidean demand points CSV (one row per demand, coordinates only).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Facilities CSV: `coord_1,...,coord_d[,cost]` or `vertex_id[,cost]`.
    #[arg(long)]
    facilities: Option<PathBuf>,
    /// Graph edge list (`u v weight` per line, undirected).
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Graph demand vertices (one id per line, arrival order).
    #[arg(long)]
    demands: Option<PathBuf>,
    /// Synthetic cluster instance, e.g.
    /// `clusters=3,n=400,sep=20,spread=0.05,rings=0,extra=2`.
    #[arg(long)]
    synth: Option<String>,
    /// Facility cost model applied after loading:
    /// `uniform[:c]`, `distance`, `log-uniform[:L]`.
    #[arg(long)]
    cost_model: Option<String>,
}

impl InstanceArgs {
    fn source(&self, seed: u64) -> Result<(String, InstanceSource)> {
        match (&self.synth, &self.points, &self.edges) {
            (Some(spec), None, None) => {
                let spec = parse_synth_spec(spec, seed)?;
                Ok((
                    format!("synthetic-k{}", spec.clusters),
                    InstanceSource::Synthetic(spec),
                ))
            }
            (None, Some(points), None) => {
                let facilities = self
                    .facilities
                    .clone()
                    .context("--facilities is required with --points")?;
                let label = points
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "euclidean".into());
                Ok((
                    label,
                    InstanceSource::EuclideanFiles {
                        points: points.clone(),
                        facilities,
                    },
                ))
            }
            (None, None, Some(edges)) => {
                let demands = self
                    .demands
                    .clone()
                    .context("--demands is required with --edges")?;
                let facilities = self
                    .facilities
                    .clone()
                    .context("--facilities is required with --edges")?;
                let label = edges
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "graph".into());
                Ok((
                    label,
                    InstanceSource::GraphFiles {
                        edges: edges.clone(),
                        demands,
                        facilities,
                    },
                ))
            }
            _ => bail!(
                "select exactly one instance source: --synth, --points (+ --facilities), \
                 or --edges (+ --demands, --facilities)"
            ),
        }
    }

    fn cost_model(&self) -> Result<Option<CostModel>> {
        self.cost_model
            .as_deref()
            .map(|s| s.parse::<CostModel>().map_err(Into::into))
            .transpose()
    }
}

fn parse_synth_spec(text: &str, seed: u64) -> Result<SyntheticSpec> {
    let mut spec = SyntheticSpec {
        seed,
        ..SyntheticSpec::default()
    };
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("expected key=value, got {:?}", part))?;
        let v = value.trim();
        match key.trim() {
            "clusters" | "k" => spec.clusters = v.parse()?,
            "n" | "demands" => spec.demands = v.parse()?,
            "dim" => spec.dim = v.parse()?,
            "sep" | "separation" => spec.separation = v.parse()?,
            "spread" => spec.spread = v.parse()?,
            "levels" => spec.scale_levels = v.parse()?,
            "decoy" | "decoy-dist" => spec.decoy_distance = v.parse()?,
            "leadoff" => spec.leadoff_offset = v.parse()?,
            "rings" => spec.ring_facilities = v.parse()?,
            "extra" => spec.extra_decoys = v.parse()?,
            "scatter" => spec.scatter_facilities = v.parse()?,
            "gen-seed" => spec.seed = v.parse()?,
            other => bail!("unknown synthetic parameter {:?}", other),
        }
    }
    Ok(spec)
}

fn parse_algos(text: &str) -> Result<Vec<Algo>> {
    let mut algos = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        algos.push(part.trim().parse::<Algo>()?);
    }
    if algos.is_empty() {
        bail!("no algorithms given");
    }
    Ok(algos)
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Error target for controlled predictions; repeatable.
    #[arg(long = "eta")]
    etas: Vec<f64>,
    /// Fixed prediction stream (one facility index per line); replaces
    /// controlled generation and must come without --eta.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Algorithms to run, comma separated.
    #[arg(long, default_value = "pam,meyerson,follow")]
    algos: String,
    /// Repetitions per sweep cell.
    #[arg(long, default_value_t = 10)]
    reps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictorEvalArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Training fraction in (0, 1).
    #[arg(long, default_value_t = 0.3)]
    split: f64,
    /// When the predictor re-solves: `doubling` or `never`.
    #[arg(long, default_value = "doubling")]
    retrain_policy: String,
    #[arg(long, default_value_t = 10)]
    reps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HstArgs {
    /// Derive the tree from a demand budget (at least 16).
    #[arg(long, conflicts_with_all = ["m", "height"])]
    n_target: Option<usize>,
    /// Distance shrink factor per level (>= 2).
    #[arg(long)]
    m: Option<u32>,
    /// Tree height.
    #[arg(long)]
    height: Option<u32>,
    /// Root-to-child distance; defaults to 1/m.
    #[arg(long)]
    root_dist: Option<f64>,
    /// Prediction scale in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    eta_inf: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the serialized instance
    /// (edges.txt, demands.csv, facilities.csv, predictions.txt).
    #[arg(long)]
    out_dir: PathBuf,
    /// Also run the algorithms on the generated instance.
    #[arg(long)]
    run: bool,
    /// Algorithms for --run.
    #[arg(long, default_value = "pam,meyerson,follow")]
    algos: String,
    /// Repetitions for --run.
    #[arg(long, default_value_t = 10)]
    reps: u32,
    /// CSV path for --run output; defaults to <out_dir>/report.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveOfflineArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Solver: `mp` (radius-based 3-approximation) or `brute` (exact,
    /// at most 20 facilities).
    #[arg(long, default_value = "mp")]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (`demand,facility,connection_cost` rows).
    #[arg(long)]
    out: PathBuf,
}

fn write_out(path: &PathBuf, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => {
            let (label, source) = args.instance.source(args.seed)?;
            let cfg = ExperimentConfig {
                label,
                source,
                algos: parse_algos(&args.algos)?,
                etas: args.etas,
                reps: args.reps,
                seed: args.seed,
                cost_model: args.instance.cost_model()?,
                predictions_file: args.predictions,
            };
            let report = run_experiment(&cfg)?;
            for w in &report.warnings {
                eprintln!("note: {}", w);
            }
            write_out(&args.out, &report.csv)?;
            eprintln!("wrote {}", args.out.display());
        }
        Command::PredictorEval(args) => {
            let (label, source) = args.instance.source(args.seed)?;
            let cfg = PredictorEvalConfig {
                label,
                source,
                split: args.split,
                retrain: args.retrain_policy.parse::<RetrainPolicy>()?,
                reps: args.reps,
                seed: args.seed,
                cost_model: args.instance.cost_model()?,
            };
            let report = run_predictor_eval(&cfg)?;
            for w in &report.warnings {
                eprintln!("note: {}", w);
            }
            write_out(&args.out, &report.csv)?;
            eprintln!("wrote {}", args.out.display());
        }
        Command::Hst(args) => {
            let spec = match (args.n_target, args.m, args.height) {
                (Some(n), None, None) => {
                    let mut spec = paper_parameters(n, args.eta_inf)?;
                    spec.seed = args.seed;
                    if let Some(d) = args.root_dist {
                        spec.root_distance = d;
                    }
                    spec
                }
                (None, Some(m), Some(height)) => HstInstanceSpec {
                    m,
                    height,
                    root_distance: args.root_dist.unwrap_or(1.0 / m as f64),
                    eta_inf: args.eta_inf,
                    seed: args.seed,
                },
                _ => bail!("give either --n-target or both --m and --height"),
            };
            let (inst, preds, leaf) = generate_hst_instance(&spec)?;
            fs::create_dir_all(&args.out_dir)?;
            write_graph_edges(&args.out_dir.join("edges.txt"), &inst)?;
            write_graph_demands(&args.out_dir.join("demands.csv"), &inst)?;
            write_graph_facilities(&args.out_dir.join("facilities.csv"), &inst)?;
            write_predictions(&args.out_dir.join("predictions.txt"), &preds)?;
            eprintln!(
                "tree: m={} height={} D={} -> {} vertices, {} demands, target facility {}, \
                 single-facility bound {:.6}",
                spec.m,
                spec.height,
                spec.root_distance,
                spec.vertex_count(),
                spec.demand_count(),
                leaf,
                spec.opt_upper_bound()
            );
            if args.run {
                let cfg = ExperimentConfig {
                    label: format!("hst-m{}-h{}", spec.m, spec.height),
                    source: InstanceSource::Hst(spec),
                    algos: parse_algos(&args.algos)?,
                    etas: Vec::new(),
                    reps: args.reps,
                    seed: args.seed,
                    cost_model: None,
                    predictions_file: None,
                };
                let report = run_experiment(&cfg)?;
                for w in &report.warnings {
                    eprintln!("note: {}", w);
                }
                let out = args
                    .out
                    .unwrap_or_else(|| args.out_dir.join("report.csv"));
                write_out(&out, &report.csv)?;
                eprintln!("wrote {}", out.display());
            }
        }
        Command::SolveOffline(args) => {
            let (_, source) = args.instance.source(args.seed)?;
            let (mut inst, _) = source.load()?;
            if let Some(model) = args.instance.cost_model()? {
                inst = inst.with_universe(ofl_core::bench::synth_noncost(
                    &inst, model, args.seed,
                )?);
            }
            let solution = match args.method.as_str() {
                "mp" => mp_solve(&inst)?,
                "brute" | "brute-force" => brute_force(&inst)?,
                other => bail!("unknown method {:?} (expected mp or brute)", other),
            };
            let mut csv = String::from("demand,facility,connection_cost\n");
            for (i, &f) in solution.assignment().iter().enumerate() {
                let d = inst
                    .space()
                    .distance(inst.demands()[i], inst.universe().site(f));
                csv.push_str(&format!("{},{},{:.6}\n", i, f, d));
            }
            write_out(&args.out, &csv)?;
            eprintln!(
                "open facilities: {:?}; opening {:.6} + connection {:.6} = {:.6}",
                solution.open_set(),
                solution.opening_cost(),
                solution.connection_cost(),
                solution.cost()
            );
            eprintln!("wrote {}", args.out.display());
        }
    }
    Ok(())
}
