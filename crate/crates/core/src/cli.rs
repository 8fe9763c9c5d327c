//! Command-line front end: `fit`, `eval`, `gen` and `bench`.
//!
//! All randomness comes from `--seed`. Per-trial seeds in `bench` are
//! `derive_seed(seed, trial)`; within a trial the instance uses
//! `derive_seed(trial_seed, 0)` and the builder `derive_seed(trial_seed, 1)`.
//! Machine-readable output goes to stdout as JSON lines or CSV, human
//! summaries to stderr. Exit codes: 0 success, 2 usage or validation error,
//! 3 internal invariant violation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::algorithm::{build_tree, Algorithm};
use crate::error::Error;
use crate::instances::{gen_lb_kmeans, gen_lb_l2medians, gen_mixture, Instance, LbOptions};
use crate::io::{read_centers, read_dataset, read_meta, write_instance, InstanceMeta};
use crate::points::{CenterSet, Dataset, Objective};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tree::{tree_cost, CenterMode, ThresholdTree};

#[derive(Debug, Parser)]
#[command(name = "threshold-tree", version, about = "Explainable clustering with threshold trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a threshold tree over a set of reference centers.
    Fit(FitArgs),
    /// Evaluate a tree on a dataset.
    Eval(EvalArgs),
    /// Generate an instance directory.
    Gen(GenArgs),
    /// Run seeded build-and-evaluate trials and report a CSV table.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgArg {
    L1,
    L1Fast,
    L2,
    KmeansEmbed,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::L1 => Algorithm::L1,
            AlgArg::L1Fast => Algorithm::L1Fast,
            AlgArg::L2 => Algorithm::L2,
            AlgArg::KmeansEmbed => Algorithm::KmeansEmbed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjArg {
    L1,
    L2,
    L2sq,
}

impl From<ObjArg> for Objective {
    fn from(o: ObjArg) -> Self {
        match o {
            ObjArg::L1 => Objective::L1,
            ObjArg::L2 => Objective::L2,
            ObjArg::L2sq => Objective::L2Squared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Reference,
    Optimal,
}

impl From<ModeArg> for CenterMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Reference => CenterMode::Reference,
            ModeArg::Optimal => CenterMode::Optimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Mixture,
    LbKmeans,
    LbL2,
}

impl KindArg {
    fn name(self) -> &'static str {
        match self {
            KindArg::Mixture => "mixture",
            KindArg::LbKmeans => "lb-kmeans",
            KindArg::LbL2 => "lb-l2",
        }
    }
}

#[derive(Debug, Args)]
pub struct AlgSelection {
    #[arg(long, value_enum)]
    pub alg: AlgArg,
    /// Defaults to the algorithm's own objective.
    #[arg(long, value_enum)]
    pub objective: Option<ObjArg>,
    /// Accept an algorithm/objective pair other than the designed one.
    #[arg(long)]
    pub allow_mismatch: bool,
}

impl AlgSelection {
    fn resolve(&self) -> Result<(Algorithm, Objective), CliError> {
        let alg = Algorithm::from(self.alg);
        let obj = self.objective.map(Objective::from).unwrap_or(alg.objective());
        if obj != alg.objective() && !self.allow_mismatch {
            return Err(CliError::usage(format!(
                "algorithm {alg} targets objective {} but {obj} was requested (pass --allow-mismatch to override)",
                alg.objective()
            )));
        }
        Ok((alg, obj))
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub sel: AlgSelection,
    #[arg(long)]
    pub centers: PathBuf,
    /// Optional dataset, used only to report costs.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub centers: PathBuf,
    #[arg(long, value_enum, default_value_t = ObjArg::L1)]
    pub objective: ObjArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Optimal)]
    pub center_mode: ModeArg,
    /// Instance metadata; defaults to `meta.json` next to the data file.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub spread: f64,
    /// Objective recorded for mixtures.
    #[arg(long, value_enum, default_value_t = ObjArg::L1)]
    pub objective: ObjArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Allow lower-bound parameters with eps >= 1.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value_t = 300.0)]
    pub d_const: f64,
    #[arg(long, default_value_t = 300.0)]
    pub eps_const: f64,
    /// Weight of the point placed on each center (default k²).
    #[arg(long)]
    pub colocated_weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub sel: AlgSelection,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Optimal)]
    pub center_mode: ModeArg,
    /// Fixed dataset; used together with --centers instead of generating.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub centers: Option<PathBuf>,
    /// Instance family generated afresh for every trial.
    #[arg(long, value_enum, default_value_t = KindArg::Mixture)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub spread: f64,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidTree(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::usage(format!("stdout: {e}")))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    }
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (alg, obj) = args.sel.resolve()?;
    let centers = read_centers(&args.centers)?;
    let data = args.data.as_deref().map(read_dataset).transpose()?;
    if let Some(d) = &data {
        if d.dim() != centers.dim() {
            return Err(Error::DimensionMismatch {
                expected: centers.dim(),
                found: d.dim(),
            }
            .into());
        }
    }
    let mut rng = rng_from_seed(args.seed);
    let start = Instant::now();
    let (tree, stats) = build_tree(alg, &centers, &mut rng)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    write_file(&args.out, &(tree.to_json() + "\n"))?;

    let mut line = json!({
        "command": "fit",
        "algorithm": alg.name(),
        "objective": obj.name(),
        "seed": args.seed,
        "k": tree.k(),
        "d": tree.dim(),
        "leaves": tree.num_leaves(),
        "iterations": stats.iterations,
        "depth": stats.depth,
        "wall_ms": wall_ms,
    });
    if let Some(d) = &data {
        let r = tree_cost(d, &centers, &tree, obj, CenterMode::Reference)?;
        line["tree_cost"] = json!(r.tree_cost);
        line["baseline_cost"] = json!(r.baseline_cost);
    }
    emit(out, &line.to_string())?;
    eprintln!(
        "fit: {} tree over k = {} centers, depth {}, {:.1} ms -> {}",
        alg,
        tree.k(),
        stats.depth,
        wall_ms,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalReport {
    objective: Objective,
    center_mode: &'static str,
    k: usize,
    n: usize,
    tree_cost: f64,
    reference_cost: f64,
    baseline_cost: f64,
    known_opt: Option<f64>,
    ratio_vs_baseline: Option<f64>,
    ratio_vs_known_opt: Option<f64>,
    empty_leaves: usize,
}

fn load_meta(args: &EvalArgs) -> Result<Option<InstanceMeta>, CliError> {
    if let Some(p) = &args.meta {
        return Ok(Some(read_meta(p)?));
    }
    let sibling = args
        .data
        .parent()
        .map(|d| d.join("meta.json"))
        .filter(|p| p.is_file());
    Ok(sibling.map(|p| read_meta(&p)).transpose()?)
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.tree)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.tree.display())))?;
    let tree = ThresholdTree::from_json(&text)?;
    let data = read_dataset(&args.data)?;
    let centers = read_centers(&args.centers)?;
    if tree.k() != centers.len() || tree.dim() != centers.dim() || data.dim() != centers.dim() {
        return Err(CliError::usage(format!(
            "inconsistent inputs: tree (k = {}, d = {}), centers (k = {}, d = {}), data (d = {})",
            tree.k(),
            tree.dim(),
            centers.len(),
            centers.dim(),
            data.dim()
        )));
    }
    tree.validate(&centers)
        .map_err(|e| CliError::usage(format!("tree was not built over these centers: {e}")))?;
    let obj = Objective::from(args.objective);
    let mode = CenterMode::from(args.center_mode);
    let meta = load_meta(args)?;
    let report = evaluate(&data, &centers, &tree, obj, mode, meta.and_then(|m| m.known_opt))?;
    let line = serde_json::to_string(&report).expect("report serializes");
    if let Some(p) = &args.out {
        write_file(p, &(line.clone() + "\n"))?;
    }
    emit(out, &line)?;
    eprintln!(
        "eval: tree cost {:.6e}, baseline {:.6e}",
        report.tree_cost, report.baseline_cost
    );
    Ok(())
}

fn evaluate(
    data: &Dataset,
    centers: &CenterSet,
    tree: &ThresholdTree,
    obj: Objective,
    mode: CenterMode,
    known_opt: Option<f64>,
) -> Result<EvalReport, CliError> {
    let r = tree_cost(data, centers, tree, obj, mode)?;
    Ok(EvalReport {
        objective: obj,
        center_mode: match mode {
            CenterMode::Reference => "reference",
            CenterMode::Optimal => "optimal",
        },
        k: centers.len(),
        n: data.len(),
        tree_cost: r.tree_cost,
        reference_cost: r.reference_cost,
        baseline_cost: r.baseline_cost,
        known_opt,
        ratio_vs_baseline: r.ratio,
        ratio_vs_known_opt: known_opt.filter(|&o| o > 0.0).map(|o| r.tree_cost / o),
        empty_leaves: r.leaf_sizes.iter().filter(|&&s| s == 0).count(),
    })
}

fn generate(
    kind: KindArg,
    k: usize,
    d: usize,
    n: usize,
    spread: f64,
    obj: Objective,
    lb: &LbOptions,
    seed: u64,
) -> Result<Instance, Error> {
    let mut rng = rng_from_seed(seed);
    match kind {
        KindArg::Mixture => gen_mixture(k, d, n, spread, obj, &mut rng),
        KindArg::LbKmeans => gen_lb_kmeans(k, &mut rng, lb),
        KindArg::LbL2 => gen_lb_l2medians(k, &mut rng, lb),
    }
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let lb = LbOptions {
        d_const: args.d_const,
        eps_const: args.eps_const,
        colocated_weight: args.colocated_weight,
        force: args.force,
    };
    let inst = generate(
        args.kind,
        args.k,
        args.d,
        args.n,
        args.spread,
        args.objective.into(),
        &lb,
        args.seed,
    )?;
    let meta = InstanceMeta::of(&inst, args.kind.name(), Some(args.seed));
    write_instance(&args.out, &inst, &meta)?;
    emit(out, &serde_json::to_string(&meta).expect("metadata serializes"))?;
    eprintln!(
        "gen: {} instance, k = {}, d = {}, {} rows -> {}",
        args.kind.name(),
        meta.k,
        meta.d,
        meta.n,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Clone)]
struct TrialRow {
    trial: usize,
    seed: u64,
    k: usize,
    d: usize,
    tree_cost: f64,
    baseline_cost: f64,
    ratio: Option<f64>,
    wall_ms: f64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (alg, obj) = args.sel.resolve()?;
    if args.trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let fixed = match (&args.data, &args.centers) {
        (Some(d), Some(c)) => Some((read_dataset(d)?, read_centers(c)?)),
        (None, None) => None,
        _ => return Err(CliError::usage("--data and --centers must be given together")),
    };
    if let Some((d, c)) = &fixed {
        if d.dim() != c.dim() {
            return Err(CliError::usage("data and centers differ in dimension"));
        }
    }
    let lb = LbOptions {
        force: args.force,
        ..LbOptions::default()
    };
    let mode = CenterMode::from(args.center_mode);

    let rows: Vec<TrialRow> = (0..args.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialRow, CliError> {
            let seed = derive_seed(args.seed, trial as u64);
            let generated;
            let (data, centers) = match &fixed {
                Some((d, c)) => (d, c),
                None => {
                    let inst = generate(
                        args.kind,
                        args.k,
                        args.d,
                        args.n,
                        args.spread,
                        obj,
                        &lb,
                        derive_seed(seed, 0),
                    )?;
                    generated = (inst.data, inst.centers);
                    (&generated.0, &generated.1)
                }
            };
            let mut rng = rng_from_seed(derive_seed(seed, 1));
            let start = Instant::now();
            let (tree, _) = build_tree(alg, centers, &mut rng)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let r = tree_cost(data, centers, &tree, obj, mode)?;
            Ok(TrialRow {
                trial,
                seed,
                k: centers.len(),
                d: centers.dim(),
                tree_cost: r.tree_cost,
                baseline_cost: r.baseline_cost,
                ratio: r.ratio,
                wall_ms,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("trial,seed,algorithm,k,d,tree_cost,baseline_cost,ratio,wall_ms,median_ratio\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.3},\n",
            r.trial,
            r.seed,
            alg,
            r.k,
            r.d,
            r.tree_cost,
            r.baseline_cost,
            fmt_opt(r.ratio),
            r.wall_ms
        ));
    }
    let n = rows.len() as f64;
    let mut ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    let median_ratio = median(&mut ratios);
    let first = &rows[0];
    csv.push_str(&format!(
        "summary,{},{},{},{},{},{},{},{:.3},{}\n",
        args.seed,
        alg,
        first.k,
        first.d,
        rows.iter().map(|r| r.tree_cost).sum::<f64>() / n,
        rows.iter().map(|r| r.baseline_cost).sum::<f64>() / n,
        fmt_opt(mean_ratio),
        rows.iter().map(|r| r.wall_ms).sum::<f64>(),
        fmt_opt(median_ratio)
    ));
    match &args.out {
        Some(p) => write_file(p, &csv)?,
        None => out
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::usage(format!("stdout: {e}")))?,
    }
    eprintln!(
        "bench: {} trials of {}, mean ratio {}, median ratio {}",
        rows.len(),
        alg,
        fmt_opt(mean_ratio),
        fmt_opt(median_ratio)
    );
    Ok(())
}
