//! Command-line front end: flat key=value configs in, CSV artifacts out.
//!
//! Four subcommands cover the workflows: `simulate` runs the synthetic
//! benchmark, `replay` scores recorded datasets, `graph-stats` prints
//! diagnostics for an edge list, and `demo-lower-bound` charts uniform
//! selection on the worst-case pools. Runs that take a config file echo the
//! fully resolved configuration next to their outputs, and rerunning from
//! that echo reproduces every CSV byte for byte.

use std::ffi::OsString;
use std::fs;
use std::io::ErrorKind as IoErrorKind;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::bench::{
    hard_instance_demo, run_experiment, write_raw_csv, write_summary_csv, ExperimentConfig,
    ModelKind, PolicyKind,
};
use crate::error::{Error, Result};
use crate::graph::{estimate_smallest_mis, greedy_clique_cover, Graph};
use crate::policies::SelectionMode;
use crate::replay::{
    format_table_text, load_dataset, replay_table, write_table_csv, ReplayConfig, ReplayDataset,
};
use crate::rng::substream;

#[derive(Parser, Debug)]
#[command(
    name = "asd",
    version,
    about = "Adaptive sequential discovery: benchmark and replay selection policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a simulated benchmark; writes raw.csv, summary.csv, resolved.cfg.
    Simulate(RunArgs),
    /// Score recorded datasets; writes replay_summary.csv, replay_table.txt,
    /// resolved.cfg.
    Replay(RunArgs),
    /// Print node, edge, clique-cover, and smallest-MIS statistics of an
    /// edge-list file.
    GraphStats {
        /// Edge-list file: one `u v` pair per line, `#` comments.
        #[arg(long)]
        edges: PathBuf,
        /// Random orderings tried for the smallest-MIS estimate.
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Chart uniform selection's final regret on the worst-case pools;
    /// writes lower_bound.csv.
    DemoLowerBound {
        /// Comma-separated budgets, one experiment each.
        #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
        t: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Mean advantage of the good arms.
        #[arg(long, default_value_t = 0.5)]
        gap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (falls back to ASD_OUT_DIR, then ".").
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Flat key=value config file ('#' comments, unique keys).
    #[arg(long)]
    config: PathBuf,
    /// Override one config key (repeatable, later wins).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (falls back to ASD_OUT_DIR, then ".").
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Parse flat config text: one `key=value` per line, `#` starts a comment,
/// blank lines are skipped, keys must be unique. Values end at the first
/// `#`, so they cannot contain one.
pub fn parse_config_text(file: &str, text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                file: file.into(),
                line: lineno + 1,
                message: "expected key=value".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse {
                file: file.into(),
                line: lineno + 1,
                message: "empty key".into(),
            });
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(Error::Parse {
                file: file.into(),
                line: lineno + 1,
                message: format!("duplicate key '{key}'"),
            });
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

/// Fold `--set key=value` overrides into parsed config pairs; an override
/// replaces the existing value or appends a new pair, later ones winning.
pub fn apply_overrides(pairs: &mut Vec<(String, String)>, sets: &[String]) -> Result<()> {
    for set in sets {
        let Some((key, value)) = set.split_once('=') else {
            return Err(Error::Config(format!(
                "override {set:?} is not of the form key=value"
            )));
        };
        let (key, value) = (key.trim(), value.trim().to_string());
        if key.is_empty() {
            return Err(Error::Config(format!("override {set:?} has an empty key")));
        }
        match pairs.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => pairs.push((key.to_string(), value)),
        }
    }
    Ok(())
}

/// Consumes config pairs against a schema; leftovers are unknown keys.
struct Schema {
    pairs: Vec<(String, String)>,
    used: Vec<bool>,
}

impl Schema {
    fn new(pairs: Vec<(String, String)>) -> Self {
        let used = vec![false; pairs.len()];
        Self { pairs, used }
    }

    fn take(&mut self, key: &str) -> Result<Option<String>> {
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if k == key {
                self.used[i] = true;
                if v.is_empty() {
                    return Err(Error::Config(format!("key '{key}' has an empty value")));
                }
                return Ok(Some(v.clone()));
            }
        }
        Ok(None)
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key)? {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("key '{key}': cannot parse {v:?}: {e}"))),
        }
    }

    fn finish(self) -> Result<()> {
        for (i, (k, _)) in self.pairs.iter().enumerate() {
            if !self.used[i] {
                return Err(Error::Config(format!("unknown key '{k}'")));
            }
        }
        Ok(())
    }
}

fn parse_policies(value: &str) -> Result<Vec<PolicyKind>> {
    value.split(',').map(|t| t.trim().parse()).collect()
}

fn policies_string(policies: &[PolicyKind]) -> String {
    policies
        .iter()
        .map(|p| p.name())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_mode(value: &str) -> Result<SelectionMode> {
    match value {
        "vids" => Ok(SelectionMode::DeterministicVids),
        "two-point" => Ok(SelectionMode::TwoPointIds),
        other => Err(Error::Config(format!(
            "unknown mode '{other}' (expected vids or two-point)"
        ))),
    }
}

fn mode_name(mode: SelectionMode) -> &'static str {
    match mode {
        SelectionMode::DeterministicVids => "vids",
        SelectionMode::TwoPointIds => "two-point",
    }
}

/// Build an experiment from config pairs: `model` picks the defaults, every
/// other key overrides one field. Unknown keys are rejected.
pub fn simulate_config(pairs: Vec<(String, String)>) -> Result<ExperimentConfig> {
    let mut schema = Schema::new(pairs);
    let model: ModelKind = schema
        .parse("model")?
        .ok_or_else(|| Error::Config("missing required key 'model'".into()))?;
    let mut cfg = ExperimentConfig::for_model(model);
    if let Some(v) = schema.parse("runs")? {
        cfg.runs = v;
    }
    if let Some(v) = schema.parse("horizon")? {
        cfg.horizon = v;
    }
    if let Some(v) = schema.parse("pool_size")? {
        cfg.pool_size = v;
    }
    if let Some(v) = schema.parse("dim")? {
        cfg.dim = v;
    }
    if let Some(v) = schema.parse("feature_sd")? {
        cfg.feature_sd = v;
    }
    if let Some(v) = schema.parse("noise_sd")? {
        cfg.noise_sd = v;
    }
    if let Some(v) = schema.parse("prior_sd")? {
        cfg.prior_sd = v;
    }
    if let Some(v) = schema.parse("graph_p")? {
        cfg.graph_p = v;
    }
    if let Some(v) = schema.parse("hub_fraction")? {
        cfg.hub_fraction = v;
    }
    if let Some(v) = schema.parse("matrix_rows")? {
        cfg.matrix_rows = v;
    }
    if let Some(v) = schema.parse("matrix_cols")? {
        cfg.matrix_cols = v;
    }
    if let Some(v) = schema.parse("matrix_rank")? {
        cfg.matrix_rank = v;
    }
    if let Some(v) = schema.parse("gap")? {
        cfg.gap = v;
    }
    if let Some(v) = schema.take("policies")? {
        cfg.policies = parse_policies(&v)?;
    }
    if let Some(v) = schema.parse("lambda")? {
        cfg.policy.lambda = v;
    }
    if let Some(v) = schema.parse("sample_count")? {
        cfg.policy.sample_count = v;
    }
    if let Some(v) = schema.parse("ucb_alpha")? {
        cfg.policy.ucb_alpha = v;
    }
    if let Some(v) = schema.take("mode")? {
        cfg.policy.mode = parse_mode(&v)?;
    }
    if let Some(v) = schema.parse("gibbs_burn_in")? {
        cfg.gibbs.burn_in = v;
    }
    if let Some(v) = schema.parse("gibbs_thinning")? {
        cfg.gibbs.thinning = v;
    }
    if let Some(v) = schema.parse("seed")? {
        cfg.base_seed = v;
    }
    schema.finish()?;
    Ok(cfg)
}

/// Render an experiment as config text that reparses to the same experiment.
pub fn resolved_simulate_config(cfg: &ExperimentConfig) -> String {
    format!(
        "model={}\nruns={}\nhorizon={}\npool_size={}\ndim={}\nfeature_sd={}\nnoise_sd={}\n\
         prior_sd={}\ngraph_p={}\nhub_fraction={}\nmatrix_rows={}\nmatrix_cols={}\n\
         matrix_rank={}\ngap={}\npolicies={}\nlambda={}\nsample_count={}\nucb_alpha={}\n\
         mode={}\ngibbs_burn_in={}\ngibbs_thinning={}\nseed={}\n",
        cfg.model,
        cfg.runs,
        cfg.horizon,
        cfg.pool_size,
        cfg.dim,
        cfg.feature_sd,
        cfg.noise_sd,
        cfg.prior_sd,
        cfg.graph_p,
        cfg.hub_fraction,
        cfg.matrix_rows,
        cfg.matrix_cols,
        cfg.matrix_rank,
        cfg.gap,
        policies_string(&cfg.policies),
        cfg.policy.lambda,
        cfg.policy.sample_count,
        cfg.policy.ucb_alpha,
        mode_name(cfg.policy.mode),
        cfg.gibbs.burn_in,
        cfg.gibbs.thinning,
        cfg.base_seed,
    )
}

/// A parsed replay config: where the data lives and how to score it.
#[derive(Clone, Debug)]
pub struct ReplayInvocation {
    pub features: PathBuf,
    pub yields: PathBuf,
    /// Targets to score; empty means every target in the file.
    pub targets: Vec<String>,
    pub policies: Vec<PolicyKind>,
    pub config: ReplayConfig,
}

/// Build a replay invocation from config pairs. `features` and `yields` are
/// required; everything else defaults to the standard protocol.
pub fn replay_invocation(pairs: Vec<(String, String)>) -> Result<ReplayInvocation> {
    let mut schema = Schema::new(pairs);
    let features = schema
        .take("features")?
        .ok_or_else(|| Error::Config("missing required key 'features'".into()))?;
    let yields = schema
        .take("yields")?
        .ok_or_else(|| Error::Config("missing required key 'yields'".into()))?;
    let targets = match schema.take("targets")? {
        Some(v) => v.split(',').map(|t| t.trim().to_string()).collect(),
        None => Vec::new(),
    };
    let policies = match schema.take("policies")? {
        Some(v) => parse_policies(&v)?,
        None => vec![
            PolicyKind::Ids,
            PolicyKind::Ts,
            PolicyKind::Ucb,
            PolicyKind::Random,
        ],
    };
    let mut config = ReplayConfig::default();
    if let Some(v) = schema.parse("runs")? {
        config.runs = v;
    }
    if let Some(v) = schema.parse("horizon_fraction")? {
        config.horizon_fraction = v;
    }
    if let Some(v) = schema.parse("horizon")? {
        config.horizon_override = Some(v);
    }
    if let Some(v) = schema.parse("assumed_noise_sd")? {
        config.assumed_noise_sd = v;
    }
    if let Some(v) = schema.parse("prior_sd")? {
        config.prior_sd = v;
    }
    if let Some(v) = schema.parse("lambda")? {
        config.policy.lambda = v;
    }
    if let Some(v) = schema.parse("sample_count")? {
        config.policy.sample_count = v;
    }
    if let Some(v) = schema.parse("ucb_alpha")? {
        config.policy.ucb_alpha = v;
    }
    if let Some(v) = schema.take("mode")? {
        config.policy.mode = parse_mode(&v)?;
    }
    if let Some(v) = schema.parse("seed")? {
        config.base_seed = v;
    }
    schema.finish()?;
    Ok(ReplayInvocation {
        features: features.into(),
        yields: yields.into(),
        targets,
        policies,
        config,
    })
}

/// Render a replay invocation as config text that reparses to the same run.
pub fn resolved_replay_config(inv: &ReplayInvocation) -> String {
    let mut out = format!(
        "features={}\nyields={}\ntargets={}\npolicies={}\nruns={}\nhorizon_fraction={}\n",
        inv.features.display(),
        inv.yields.display(),
        inv.targets.join(","),
        policies_string(&inv.policies),
        inv.config.runs,
        inv.config.horizon_fraction,
    );
    if let Some(t) = inv.config.horizon_override {
        out.push_str(&format!("horizon={t}\n"));
    }
    out.push_str(&format!(
        "assumed_noise_sd={}\nprior_sd={}\nlambda={}\nsample_count={}\nucb_alpha={}\nmode={}\nseed={}\n",
        inv.config.assumed_noise_sd,
        inv.config.prior_sd,
        inv.config.policy.lambda,
        inv.config.policy.sample_count,
        inv.config.policy.ucb_alpha,
        mode_name(inv.config.policy.mode),
        inv.config.base_seed,
    ));
    out
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ASD_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Read a text file, naming it in the error; the io error kind is preserved.
fn read_named(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn load_config_pairs(args: &RunArgs) -> Result<Vec<(String, String)>> {
    let text = read_named(&args.config)?;
    let mut pairs = parse_config_text(&args.config.display().to_string(), &text)?;
    apply_overrides(&mut pairs, &args.set)?;
    Ok(pairs)
}

fn run_simulate(args: &RunArgs) -> Result<()> {
    let cfg = simulate_config(load_config_pairs(args)?)?;
    cfg.validate()?;
    let out_dir = resolve_out_dir(args.out_dir.clone());
    fs::create_dir_all(&out_dir)?;
    let result = run_experiment(&cfg)?;
    let raw_path = out_dir.join("raw.csv");
    write_raw_csv(&result.records, fs::File::create(&raw_path)?)?;
    let summary_path = out_dir.join("summary.csv");
    write_summary_csv(&result.summaries, fs::File::create(&summary_path)?)?;
    let resolved_path = out_dir.join("resolved.cfg");
    fs::write(&resolved_path, resolved_simulate_config(&cfg))?;
    for summary in &result.summaries {
        println!(
            "{}: final regret {:.3} (sd {:.3}) over {} runs",
            summary.policy,
            summary.final_mean(),
            summary.final_sd(),
            cfg.runs
        );
    }
    println!(
        "wrote {}, {}, {}",
        raw_path.display(),
        summary_path.display(),
        resolved_path.display()
    );
    Ok(())
}

/// Keep only the requested targets in requested order (all, in file order,
/// when none were requested); `targets` ends up holding the resolved list.
fn select_targets(dataset: ReplayDataset, targets: &mut Vec<String>) -> Result<ReplayDataset> {
    if targets.is_empty() {
        *targets = dataset.targets.iter().map(|(n, _)| n.clone()).collect();
        return Ok(dataset);
    }
    let mut picked = Vec::with_capacity(targets.len());
    for (i, t) in targets.iter().enumerate() {
        if targets[..i].contains(t) {
            return Err(Error::Config(format!("target '{t}' listed twice")));
        }
        let entry = dataset
            .targets
            .iter()
            .find(|(n, _)| n == t)
            .cloned()
            .ok_or_else(|| Error::UnknownTarget(t.clone()))?;
        picked.push(entry);
    }
    Ok(ReplayDataset {
        targets: picked,
        ..dataset
    })
}

fn run_replay(args: &RunArgs) -> Result<()> {
    let mut inv = replay_invocation(load_config_pairs(args)?)?;
    inv.config.validate()?;
    let dataset = load_dataset(&inv.features, &inv.yields)?;
    let dataset = select_targets(dataset, &mut inv.targets)?;
    let out_dir = resolve_out_dir(args.out_dir.clone());
    fs::create_dir_all(&out_dir)?;
    let rows = replay_table(&dataset, &inv.policies, &inv.config)?;
    let csv_path = out_dir.join("replay_summary.csv");
    write_table_csv(&rows, fs::File::create(&csv_path)?)?;
    let table = format_table_text(&rows);
    let table_path = out_dir.join("replay_table.txt");
    fs::write(&table_path, &table)?;
    let resolved_path = out_dir.join("resolved.cfg");
    fs::write(&resolved_path, resolved_replay_config(&inv))?;
    print!("{table}");
    println!(
        "wrote {}, {}, {}",
        csv_path.display(),
        table_path.display(),
        resolved_path.display()
    );
    Ok(())
}

fn run_graph_stats(edges: &Path, trials: usize, seed: u64) -> Result<()> {
    let text = read_named(edges)?;
    let graph = Graph::parse_edge_list(&text)?;
    let cover = greedy_clique_cover(&graph).len();
    let mut rng = substream(seed, &[]);
    let mis = estimate_smallest_mis(&graph, trials, &mut rng);
    println!("nodes: {}", graph.node_count());
    println!("edges: {}", graph.edge_count());
    println!("greedy clique cover: {cover}");
    println!("smallest MIS estimate: {mis}");
    Ok(())
}

fn run_demo(t: &[usize], runs: usize, gap: f64, seed: u64, out_dir: Option<PathBuf>) -> Result<()> {
    let points = hard_instance_demo(t, runs, gap, seed)?;
    let out_dir = resolve_out_dir(out_dir);
    fs::create_dir_all(&out_dir)?;
    let path = out_dir.join("lower_bound.csv");
    let mut w = csv::Writer::from_writer(fs::File::create(&path)?);
    w.write_record(["budget", "regret_mean", "regret_sd"])?;
    for p in &points {
        w.write_record(&[
            p.budget.to_string(),
            p.regret_mean.to_string(),
            p.regret_sd.to_string(),
        ])?;
    }
    w.flush()?;
    for p in &points {
        println!(
            "t={}: final regret {:.3} (sd {:.3})",
            p.budget, p.regret_mean, p.regret_sd
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => run_simulate(&args),
        Command::Replay(args) => run_replay(&args),
        Command::GraphStats {
            edges,
            trials,
            seed,
        } => run_graph_stats(&edges, trials, seed),
        Command::DemoLowerBound {
            t,
            runs,
            gap,
            seed,
            out_dir,
        } => run_demo(&t, runs, gap, seed, out_dir),
    }
}

/// Exit codes: 0 success, 2 usage (clap), 3 missing file, 4 config or data
/// schema violation, 5 invalid parameter combination, 1 anything else.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(e) if e.kind() == IoErrorKind::NotFound => 3,
        Error::Parse { .. } | Error::Config(_) | Error::Dataset(_) | Error::UnknownTarget(_) => 4,
        Error::InvalidCombination(_)
        | Error::IncompatiblePolicy { .. }
        | Error::OutOfRange { .. }
        | Error::HorizonExceedsPool { .. }
        | Error::DimensionMismatch { .. }
        | Error::EmptyPool
        | Error::EmptySampleSet
        | Error::NonFinite(_)
        | Error::InvalidDistribution(_)
        | Error::JointTooLarge { .. } => 5,
        _ => 1,
    }
}

/// Parse arguments and run the chosen subcommand, returning the process exit
/// code. Failures print a single-line diagnostic to stderr.
pub fn parse_and_dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
