//! The `mawc` command-line front end.
//!
//! Every command writes its outputs and a `manifest.json` into `--out`.
//! Exit codes: 0 success, 2 user or configuration error, 3 resource limit,
//! 4 internal invariant failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::catalog;
use crate::error::{Error, Result};
use crate::prob::{binary_entropy, ChannelModel, ChannelSpec};
use crate::region::{
    achievable_region, alpha_grid, example2_capacity, example2_constraints, shannon_strategy_bound, RegionId,
    SearchConfig,
};
use crate::sim::{estimate_error, run_trial, SchemeTests, SimConfig, TrialSeeds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mawc", version, about = "Secrecy rate regions and wiretap coding simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute an achievable region polygon for a channel.
    Region {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        region: RegionId,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `search.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `search.grid`.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Reproduce a worked example as comparison tables.
    Example {
        which: ExampleId,
        /// Optional JSON parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Lattice resolution: input-law steps `1/r` in 1a, alpha steps `1/r` in 2.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run the block-Markov coding simulator.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the symbol-level transcript of trial 0.
        #[arg(long)]
        transcript: bool,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ExampleId {
    #[value(name = "1a")]
    #[serde(rename = "1a")]
    OneA,
    #[value(name = "1b")]
    #[serde(rename = "1b")]
    OneB,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
}

/// Input of `mawc region`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub channel: ChannelSpec,
    #[serde(default)]
    pub search: SearchConfig,
}

/// Input of `mawc example`; empty fields take per-example defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExampleParams {
    /// State or noise probabilities to tabulate.
    pub p: Vec<f64>,
    /// State probability of Example 2.
    pub q: Option<f64>,
    /// Grid step: input-law lattice in 1a, alpha grid in 2.
    pub step: Option<f64>,
}

/// Provenance record written next to every output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Present only when `SOURCE_DATE_EPOCH` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Rounds to 12 significant digits; negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Canonical JSON: sorted keys, floats at 12 significant digits, pretty
/// printed with a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let mut v = serde_json::to_value(config)?;
    round_value(&mut v);
    Ok(hex::encode(Sha256::digest(serde_json::to_string(&v)?)))
}

fn csv_num(x: f64) -> String {
    round_sig(x).to_string()
}

/// Output directory plus the files written so far.
struct OutputSet {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputSet {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputSet { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), body)?;
        self.files.push(OutputFile { path: name.to_string(), sha256: hex::encode(Sha256::digest(body)) });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &canonical_json(value)?)
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut body = header.join(",") + "\n";
        for r in rows {
            body += &r.join(",");
            body.push('\n');
        }
        self.write(name, &body)
    }

    fn finish<C: Serialize>(self, command: &str, config: &C, seed: Option<u64>) -> Result<()> {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok());
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: config_hash(config)?,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            outputs: self.files,
        };
        fs::write(self.dir.join("manifest.json"), canonical_json(&manifest)?)?;
        Ok(())
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn load_region_config(path: &Path) -> Result<(RegionConfig, ChannelModel)> {
    let cfg: RegionConfig = read_json(path)?;
    let channel = ChannelModel::try_from(&cfg.channel)?;
    Ok((cfg, channel))
}

fn cmd_region(config: &Path, region: RegionId, out: &Path, seed: Option<u64>, grid: Option<usize>) -> Result<()> {
    let (mut cfg, channel) = load_region_config(config)?;
    if let Some(s) = seed {
        cfg.search.seed = s;
    }
    if let Some(g) = grid {
        cfg.search.grid = g;
    }
    let result = achievable_region(&channel, region, &cfg.search)?;
    let mut outs = OutputSet::new(out)?;
    let axes = region.axes();
    let rows: Vec<Vec<String>> = result
        .polygon
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), csv_num(v[0]), csv_num(v[1])])
        .collect();
    outs.csv(&format!("region_{region}.csv"), &["vertex", axes[0], axes[1]], &rows)?;
    outs.json(&format!("region_{region}.json"), &result)?;
    #[derive(Serialize)]
    struct Effective<'a> {
        region: RegionId,
        config: &'a RegionConfig,
    }
    outs.finish("region", &Effective { region, config: &cfg }, Some(cfg.search.seed))
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} is not in [0, 1]")))
    }
}

fn example1a(params: &ExampleParams, outs: &mut OutputSet) -> Result<()> {
    let step = params.step.unwrap_or(1e-3);
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for &p in &params.p {
        check_prob(p)?;
        let ch = catalog::example1_channel(p)?;
        let aux = catalog::example1_scheme1_aux(&ch)?.to_spec();
        let region = achievable_region(&ch, RegionId::R11, &SearchConfig::fixed_only(vec![aux]))?;
        let point = (1.0 - p).min(1.0 - binary_entropy(p)?);
        let contains = region.polygon.contains([point, 0.0], 1e-6);
        let bound = shannon_strategy_bound(&ch, 2, step)?;
        let separated = bound < point - 1e-4;
        rows.push(vec![
            csv_num(p),
            csv_num(point),
            contains.to_string(),
            csv_num(bound),
            csv_num(point - bound),
            separated.to_string(),
        ]);
        table.push(serde_json::json!({
            "p": p, "scheme1_point": point, "scheme1_contains": contains,
            "scheme2_bound": bound, "gap": point - bound, "separated": separated,
        }));
    }
    outs.csv("example1a.csv", &["p", "scheme1_point", "scheme1_contains", "scheme2_bound", "gap", "separated"], &rows)?;
    outs.json("example1a.json", &table)
}

fn example1b(params: &ExampleParams, outs: &mut OutputSet) -> Result<()> {
    let mut rows = Vec::new();
    for &p in &params.p {
        check_prob(p)?;
        let ch = catalog::example1b_channel(p)?;
        let search = SearchConfig::fixed_only(vec![catalog::example1b_scheme2_aux(&ch)?.to_spec()]);
        let hp = binary_entropy(p)?;
        let mut contains = false;
        for id in [RegionId::R21, RegionId::R22, RegionId::R23] {
            contains |= achievable_region(&ch, id, &search)?.polygon.contains([0.0, hp], 1e-9);
        }
        rows.push(vec![csv_num(p), csv_num(hp), csv_num(1.0 - hp), (1.0 - hp >= hp).to_string(), contains.to_string()]);
    }
    outs.csv("example1b.csv", &["p", "h_p", "one_minus_h_p", "key_covers_rate", "scheme2_contains"], &rows)
}

fn example2(params: &ExampleParams, outs: &mut OutputSet) -> Result<()> {
    let q = params.q.unwrap_or(0.25);
    let grid = alpha_grid(params.step.unwrap_or(0.01))?;
    let mut rows = Vec::new();
    let mut polygons = Vec::new();
    for &p in &params.p {
        for &a in &grid {
            let b = example2_constraints(q, p, a)?;
            rows.push(
                [q, p, a, b.r1_secret, b.r1_plain, b.r1(), b.sum_secret, b.sum_plain, b.sum()]
                    .iter()
                    .map(|&x| csv_num(x))
                    .collect(),
            );
        }
        polygons.push(serde_json::json!({ "q": q, "p": p, "polygon": example2_capacity(q, p, &grid)? }));
    }
    outs.csv(
        "example2.csv",
        &["q", "p", "alpha", "r1_secret", "r1_plain", "r1", "sum_secret", "sum_plain", "sum"],
        &rows,
    )?;
    outs.json("example2_polygons.json", &polygons)
}

fn cmd_example(which: ExampleId, config: Option<&Path>, out: &Path, grid: Option<usize>) -> Result<()> {
    let mut params: ExampleParams = config.map(read_json).transpose()?.unwrap_or_default();
    if let Some(r) = grid {
        if r == 0 {
            return Err(Error::Domain("grid resolution must be positive".into()));
        }
        params.step = Some(1.0 / r as f64);
    }
    if params.p.is_empty() {
        params.p = match which {
            ExampleId::OneA => vec![0.6, 0.75, 0.9],
            ExampleId::OneB => vec![0.1],
            ExampleId::Two => vec![0.1],
        };
    }
    let mut outs = OutputSet::new(out)?;
    match which {
        ExampleId::OneA => example1a(&params, &mut outs)?,
        ExampleId::OneB => example1b(&params, &mut outs)?,
        ExampleId::Two => example2(&params, &mut outs)?,
    }
    #[derive(Serialize)]
    struct Effective<'a> {
        example: ExampleId,
        params: &'a ExampleParams,
    }
    outs.finish("example", &Effective { example: which, params: &params }, None)
}

fn cmd_simulate(config: &Path, trials: u64, out: &Path, seed: Option<u64>, transcript: bool) -> Result<()> {
    let mut cfg: SimConfig = read_json(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = estimate_error(&cfg, trials)?;
    let mut outs = OutputSet::new(out)?;
    outs.json("sim_report.json", &report)?;
    if transcript {
        let plan = cfg.plan()?;
        let tests = SchemeTests::new(&plan)?;
        let trial = run_trial(&plan, &tests, TrialSeeds::derive(plan.seed, 0), None)?;
        let mut rows = Vec::new();
        for t in &trial.transcripts {
            for i in 0..t.s.len() {
                rows.push(
                    [t.block, i, t.s[i], t.x1[i], t.x2[i], t.y[i], t.z[i]].iter().map(|v| v.to_string()).collect(),
                );
            }
        }
        outs.csv("transcript.csv", &["block", "index", "s", "x1", "x2", "y", "z"], &rows)?;
    }
    #[derive(Serialize)]
    struct Effective<'a> {
        trials: u64,
        transcript: bool,
        config: &'a SimConfig,
    }
    outs.finish("simulate", &Effective { trials, transcript, config: &cfg }, Some(cfg.seed))
}

/// Parses `path` as a simulation config when it has an `n` field, as a
/// region config when it has a `channel`, and as example parameters
/// otherwise; returns a one-line summary.
pub fn validate_config(path: &Path) -> Result<String> {
    let raw: Value = read_json(path)?;
    if raw.get("n").is_some() {
        let cfg: SimConfig =
            serde_json::from_value(raw).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let plan = cfg.plan()?;
        Ok(format!(
            "simulation config: n = {}, B = {}, last block {} symbols, {} codeword symbols per trial",
            plan.n,
            plan.blocks,
            plan.n_last,
            plan.total_length()
        ))
    } else if raw.get("channel").is_none() {
        let params: ExampleParams =
            serde_json::from_value(raw).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        if let Some(&bad) = params.p.iter().chain(&params.q).find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("probability {bad} is not in [0, 1]")));
        }
        if let Some(step) = params.step.filter(|s| !(*s > 0.0 && *s <= 0.5)) {
            return Err(Error::Domain(format!("step {step} is not in (0, 1/2]")));
        }
        Ok(format!("example parameters: {} probabilities", params.p.len()))
    } else {
        let (cfg, channel) = load_region_config(path)?;
        let c = channel.sizes();
        Ok(format!(
            "region config: |X1| = {}, |X2| = {}, |S| = {}, |Y| = {}, |Z| = {}; {} fixed chains, {} random samples",
            c.x1,
            c.x2,
            c.s,
            c.y,
            c.z,
            cfg.search.fixed.len(),
            cfg.search.random_samples
        ))
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_USER,
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Region { config, region, out, seed, grid } => cmd_region(&config, region, &out, seed, grid),
        Command::Example { which, config, out, grid } => cmd_example(which, config.as_deref(), &out, grid),
        Command::Simulate { config, trials, out, seed, transcript } => {
            cmd_simulate(&config, trials, &out, seed, transcript)
        }
        Command::Validate { config } => validate_config(&config).map(|msg| println!("{msg}")),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("mawc: {e}");
            exit_code(&e)
        }
    }
}
