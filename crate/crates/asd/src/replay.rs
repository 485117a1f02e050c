//! Recorded-dataset evaluation: replay selection policies over measured
//! yields.
//!
//! A replay dataset pairs a descriptor table with one or more named yield
//! columns. Policies run against the recorded yields as a deterministic
//! environment while their internal model is a Bayesian linear regression on
//! the descriptors, and each `(target, policy)` cell reports the cumulative
//! regret after labeling a fixed fraction of the rows.

use std::io::Read;
use std::io::Write as IoWrite;

use crate::bench::{run_episode, Engine, EngineSettings, PolicyKind};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::policies::PolicyConfig;
use crate::pool::CandidatePool;
use crate::rng::{substream, PURPOSE_NOISE, PURPOSE_POLICY};

/// Aligned descriptor rows and yield columns for one recorded screen.
#[derive(Clone, Debug)]
pub struct ReplayDataset {
    /// Row identifiers, in file order.
    pub ids: Vec<String>,
    /// Descriptor matrix, row-aligned with `ids`.
    pub features: Vec<Vec<f64>>,
    /// `(name, yields)` per target, in file column order; yields lie in
    /// `[0, 1]` after the percent normalization.
    pub targets: Vec<(String, Vec<f64>)>,
}

impl ReplayDataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Descriptor count per row.
    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn target_names(&self) -> Vec<&str> {
        self.targets.iter().map(|(name, _)| name.as_str()).collect()
    }

    pub fn target(&self, name: &str) -> Result<&[f64]> {
        self.targets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::UnknownTarget(name.into()))
    }
}

/// Column names, row ids, and numeric rows of one parsed CSV table.
type Table = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

/// Parse one CSV table: header `id,<col>,...`, numeric cells thereafter.
fn read_table<R: Read>(reader: R, role: &'static str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Dataset(format!(
            "{role} file needs an id column plus at least one value column"
        )));
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let mut ids: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        let id = record.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::Dataset(format!("{role} row {row_no}: empty id")));
        }
        if ids.contains(&id) {
            return Err(Error::Dataset(format!(
                "{role} row {row_no}: duplicate id {id:?}"
            )));
        }
        let mut row = Vec::with_capacity(columns.len());
        for (j, cell) in record.iter().skip(1).enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                Error::Dataset(format!(
                    "{role} row {row_no} (id {id:?}), column {:?}: cannot parse {cell:?} as a number",
                    columns[j]
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Dataset(format!(
                    "{role} row {row_no} (id {id:?}), column {:?}: non-finite value",
                    columns[j]
                )));
            }
            row.push(value);
        }
        ids.push(id);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Dataset(format!("{role} file has no data rows")));
    }
    Ok((columns, ids, rows))
}

/// Load a dataset from open readers over the two CSV tables.
///
/// Row ids must appear in the same order in both files. Any yield column
/// holding a value above 1 is treated as percentages and divided by 100;
/// after that every yield must lie in `[0, 1]`, so loading an
/// already-normalized file changes nothing.
pub fn load_dataset_from_readers<F: Read, Y: Read>(features: F, yields: Y) -> Result<ReplayDataset> {
    let (_, feature_ids, feature_rows) = read_table(features, "features")?;
    let (target_names, yield_ids, yield_rows) = read_table(yields, "yields")?;
    if feature_ids.len() != yield_ids.len() {
        return Err(Error::Dataset(format!(
            "row count mismatch: {} feature rows vs {} yield rows",
            feature_ids.len(),
            yield_ids.len()
        )));
    }
    for (i, (f, y)) in feature_ids.iter().zip(&yield_ids).enumerate() {
        if f != y {
            return Err(Error::Dataset(format!(
                "row {} id mismatch: features say {f:?}, yields say {y:?}",
                i + 1
            )));
        }
    }
    let mut targets = Vec::with_capacity(target_names.len());
    for (j, name) in target_names.into_iter().enumerate() {
        let mut column: Vec<f64> = yield_rows.iter().map(|r| r[j]).collect();
        if column.iter().any(|&v| v > 1.0) {
            for v in &mut column {
                *v /= 100.0;
            }
        }
        for (i, &v) in column.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Dataset(format!(
                    "target {name:?} row {} (id {:?}): yield {v} outside [0, 1] after normalization",
                    i + 1,
                    feature_ids[i]
                )));
            }
        }
        targets.push((name, column));
    }
    Ok(ReplayDataset {
        ids: feature_ids,
        features: feature_rows,
        targets,
    })
}

/// Load a dataset from the two CSV files on disk.
pub fn load_dataset(
    features_path: impl AsRef<std::path::Path>,
    yields_path: impl AsRef<std::path::Path>,
) -> Result<ReplayDataset> {
    let features = open_named(features_path.as_ref())?;
    let yields = open_named(yields_path.as_ref())?;
    load_dataset_from_readers(features, yields)
}

/// Open a file, naming it in the error; the io error kind is preserved.
fn open_named(path: &std::path::Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Protocol knobs for replay evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ReplayConfig {
    /// Independent runs per stochastic policy; deterministic policies run once.
    pub runs: usize,
    /// Fraction of the rows to label; the horizon is `round(fraction * n)`.
    pub horizon_fraction: f64,
    /// Explicit horizon, overriding the fraction when set.
    pub horizon_override: Option<usize>,
    /// Noise scale the linear model assumes on the `[0, 1]` yield scale.
    pub assumed_noise_sd: f64,
    pub prior_sd: f64,
    pub policy: PolicyConfig,
    pub base_seed: u64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            runs: 10,
            horizon_fraction: 0.2,
            horizon_override: None,
            assumed_noise_sd: 0.1,
            prior_sd: 1.0,
            policy: PolicyConfig::default(),
            base_seed: 0,
        }
    }
}

impl ReplayConfig {
    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(self.horizon_fraction > 0.0 && self.horizon_fraction <= 1.0) {
            return Err(Error::OutOfRange {
                what: "horizon_fraction",
                range: "(0, 1]",
                value: self.horizon_fraction,
            });
        }
        if !(self.assumed_noise_sd > 0.0 && self.assumed_noise_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "assumed_noise_sd",
                range: "(0, inf)",
                value: self.assumed_noise_sd,
            });
        }
        if !(self.prior_sd > 0.0 && self.prior_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "prior_sd",
                range: "(0, inf)",
                value: self.prior_sd,
            });
        }
        Ok(())
    }

    fn horizon_for(&self, n: usize) -> Result<usize> {
        let horizon = match self.horizon_override {
            Some(t) => t,
            None => (self.horizon_fraction * n as f64).round() as usize,
        };
        if horizon == 0 || horizon > n {
            return Err(Error::InvalidCombination(format!(
                "replay horizon {horizon} must lie in [1, {n}]"
            )));
        }
        Ok(horizon)
    }
}

/// One `(target, policy)` cell of the replay table.
#[derive(Clone, Debug)]
pub struct ReplaySummary {
    pub target: String,
    pub policy: PolicyKind,
    pub horizon: usize,
    pub regret_mean: f64,
    /// Absent for deterministic policies, which have nothing to average.
    pub regret_sd: Option<f64>,
    /// Final cumulative regret of each run.
    pub finals: Vec<f64>,
}

/// Score one policy on one target: mean (and sample sd) of cumulative regret
/// after the horizon, over independent runs.
pub fn replay_run(
    dataset: &ReplayDataset,
    target: &str,
    policy: PolicyKind,
    cfg: &ReplayConfig,
) -> Result<ReplaySummary> {
    cfg.validate()?;
    let yields = dataset.target(target)?;
    let horizon = cfg.horizon_for(dataset.len())?;
    let env = Environment::replay(yields.to_vec())?;
    let base_pool = CandidatePool::from_features(dataset.features.clone());
    let settings = EngineSettings {
        prior_sd: cfg.prior_sd,
        assumed_noise_sd: Some(cfg.assumed_noise_sd),
        ..Default::default()
    };
    let runs = if policy.is_deterministic() { 1 } else { cfg.runs };
    let mut finals = Vec::with_capacity(runs);
    for run in 0..runs {
        let mut noise_rng = substream(cfg.base_seed, &[run as u64, policy.tag(), PURPOSE_NOISE]);
        let mut policy_rng = substream(cfg.base_seed, &[run as u64, policy.tag(), PURPOSE_POLICY]);
        let mut pool = base_pool.clone();
        let mut engine = Engine::for_policy(policy, &env, &pool, &settings, &mut policy_rng)?;
        let (_, ledger) = run_episode(
            &env,
            &mut pool,
            horizon,
            policy,
            &cfg.policy,
            &mut engine,
            &mut noise_rng,
            &mut policy_rng,
        )?;
        finals.push(ledger.final_regret());
    }
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    let sd = if policy.is_deterministic() {
        None
    } else if finals.len() > 1 {
        Some(
            (finals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (finals.len() - 1) as f64)
                .sqrt(),
        )
    } else {
        Some(0.0)
    };
    Ok(ReplaySummary {
        target: target.into(),
        policy,
        horizon,
        regret_mean: mean,
        regret_sd: sd,
        finals,
    })
}

/// Score every `(target, policy)` pair, targets in file order.
pub fn replay_table(
    dataset: &ReplayDataset,
    policies: &[PolicyKind],
    cfg: &ReplayConfig,
) -> Result<Vec<ReplaySummary>> {
    if policies.is_empty() {
        return Err(Error::Config("at least one policy is required".into()));
    }
    for (i, p) in policies.iter().enumerate() {
        if policies[..i].contains(p) {
            return Err(Error::Config(format!(
                "policy '{p}' listed twice; repeats would replay the same random stream"
            )));
        }
    }
    let mut rows = Vec::with_capacity(dataset.targets.len() * policies.len());
    for (name, _) in &dataset.targets {
        for &policy in policies {
            rows.push(replay_run(dataset, name, policy, cfg)?);
        }
    }
    Ok(rows)
}

/// Per-row best flag: within each target the lowest mean wins, ties going to
/// the earliest row.
pub fn best_flags(rows: &[ReplaySummary]) -> Vec<bool> {
    let mut flags = vec![false; rows.len()];
    let mut seen: Vec<&str> = Vec::new();
    for i in 0..rows.len() {
        let target = rows[i].target.as_str();
        if seen.contains(&target) {
            continue;
        }
        seen.push(target);
        let mut best = i;
        for (j, row) in rows.iter().enumerate().skip(i + 1) {
            if row.target == target && row.regret_mean < rows[best].regret_mean {
                best = j;
            }
        }
        flags[best] = true;
    }
    flags
}

/// `"6.53 (0.20)"`; deterministic cells read `"9.63 (-)"`.
pub fn format_cell(mean: f64, sd: Option<f64>) -> String {
    match sd {
        Some(s) => format!("{mean:.2} ({s:.2})"),
        None => format!("{mean:.2} (-)"),
    }
}

/// Aligned text table, one row per policy and one column per target, with
/// the best cell of each column marked `*`.
pub fn format_table_text(rows: &[ReplaySummary]) -> String {
    let flags = best_flags(rows);
    let mut targets: Vec<&str> = Vec::new();
    let mut policies: Vec<PolicyKind> = Vec::new();
    for row in rows {
        if !targets.contains(&row.target.as_str()) {
            targets.push(&row.target);
        }
        if !policies.contains(&row.policy) {
            policies.push(row.policy);
        }
    }
    let cell = |policy: PolicyKind, target: &str| -> String {
        rows.iter()
            .zip(&flags)
            .find(|(r, _)| r.policy == policy && r.target == target)
            .map(|(r, &best)| {
                let mut s = format_cell(r.regret_mean, r.regret_sd);
                if best {
                    s.push('*');
                }
                s
            })
            .unwrap_or_else(|| "-".into())
    };
    let mut widths = vec!["policy".len().max(policies.iter().map(|p| p.name().len()).max().unwrap_or(0))];
    for &target in &targets {
        let w = policies
            .iter()
            .map(|&p| cell(p, target).len())
            .max()
            .unwrap_or(0)
            .max(target.len());
        widths.push(w);
    }
    let mut out = String::new();
    let push_row = |cells: Vec<String>, out: &mut String| {
        for (i, text) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(text);
            if i + 1 < cells.len() {
                for _ in text.len()..widths[i] {
                    out.push(' ');
                }
            }
        }
        out.push('\n');
    };
    let header = std::iter::once("policy".to_string())
        .chain(targets.iter().map(|t| t.to_string()))
        .collect();
    push_row(header, &mut out);
    for &policy in &policies {
        let row = std::iter::once(policy.name().to_string())
            .chain(targets.iter().map(|&t| cell(policy, t)))
            .collect();
        push_row(row, &mut out);
    }
    out
}

/// Machine-readable table: `target,policy,regret_mean,regret_sd,is_best`,
/// with `regret_sd` empty on deterministic rows.
pub fn write_table_csv<W: IoWrite>(rows: &[ReplaySummary], writer: W) -> Result<()> {
    let flags = best_flags(rows);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["target", "policy", "regret_mean", "regret_sd", "is_best"])?;
    for (row, &best) in rows.iter().zip(&flags) {
        w.write_record(&[
            row.target.clone(),
            row.policy.name().to_string(),
            row.regret_mean.to_string(),
            row.regret_sd.map(|s| s.to_string()).unwrap_or_default(),
            best.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
