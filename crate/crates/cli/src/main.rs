//! `big`: sampling, graph construction, bandwidth queries, interpolation,
//! asymptotic limits and the Monte Carlo experiments from the command line.
//!
//! Every subcommand accepts `--config <file.json>`; its keys are the long
//! flag names with dashes replaced by underscores, and flags given on the
//! command line win over the file. Failures print a JSON error object on
//! stderr and exit with status 1.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use big_core::asymptotics::{check_conditions, finite_m_prediction, limit_bandwidth, TVariant};
use big_core::density::io::{load_model_json, load_points_csv, write_points_csv};
use big_core::density::{indicator_from_boundary, sample, GmmModel, Hyperplane};
use big_core::graph::{build_graph, KernelParams};
use big_core::harness::{run_fig2, run_fig3, run_recovery_demo, ExperimentConfig};
use big_core::spectral::{bandwidth_estimate, cutoff_frequency, fourier_basis, GraphSignal, LabeledSet, DEFAULT_CUTOFF_ORDER};
use big_core::ssl::{harmonic_interpolate, interpolate_ls, interpolate_min_bandwidth, predict, DEFAULT_RESIDUAL_TOL};
use big_core::{Error, Result};

#[derive(Parser)]
#[command(name = "big", version, about = "Bandlimited interpolation on similarity graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw points from a Gaussian mixture and write them as CSV.
    Sample(SampleArgs),
    /// Build the Gaussian-kernel graph of a point cloud and write its edge list.
    BuildGraph(BuildGraphArgs),
    /// Bandwidth estimate of a half-space indicator.
    Bandwidth(BandwidthArgs),
    /// Predict labels of unlabeled points.
    Interpolate(InterpolateArgs),
    /// Large-sample limits and convergence diagnostics as JSON.
    Limits(LimitsArgs),
    /// Bandwidth against sample size.
    Fig2(ExperimentArgs),
    /// Bandwidth against boundary position.
    Fig3(ExperimentArgs),
    /// Label-growth recovery demo.
    RecoveryDemo(ExperimentArgs),
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Mixture JSON; the built-in two-dimensional reference mixture if absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Output CSV; stdout if absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleSettings {
    model: Option<PathBuf>,
    n: usize,
    #[serde(default)]
    seed: u64,
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BuildGraphArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    /// Drop weights below this value and store the graph sparsely.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation: Option<f64>,
    /// Output stem: writes `<out>.csv` (edges) and `<out>.json` (header).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildGraphSettings {
    points: PathBuf,
    sigma: f64,
    truncation: Option<f64>,
    out: PathBuf,
}

/// Half-space `normal . x < offset`; `normal` defaults to the first axis.
#[derive(Args, Serialize, Deserialize, Clone, Default)]
struct PlaneArgs {
    /// Comma-separated normal vector.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
}

impl PlaneArgs {
    fn plane(&self, dimension: usize) -> Result<Hyperplane> {
        let offset = self.offset.unwrap_or(0.0);
        match &self.normal {
            Some(n) => {
                if n.len() != dimension {
                    return Err(Error::DimensionMismatch { expected: dimension, got: n.len() });
                }
                Hyperplane::from_unnormalized(n.clone(), offset)
            }
            None => Hyperplane::axis_aligned(dimension, 0, offset),
        }
    }
}

#[derive(Args, Serialize)]
struct BandwidthArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    plane: PlaneArgs,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BandwidthSettings {
    points: PathBuf,
    sigma: f64,
    m: usize,
    #[serde(flatten)]
    plane: PlaneArgs,
}

#[derive(Args, Serialize)]
struct InterpolateArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<PathBuf>,
    /// CSV rows `index,value`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    /// big-ls, big-min or harmonic.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    /// Band limit for big-ls; the cutoff frequency of the labeled set if absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    /// Output CSV `index,score,label`; stdout if absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpolateSettings {
    points: PathBuf,
    labels: PathBuf,
    sigma: f64,
    #[serde(default = "default_method")]
    method: String,
    omega: Option<f64>,
    #[serde(default = "default_threshold")]
    threshold: f64,
    out: Option<PathBuf>,
}

fn default_method() -> String {
    "big-ls".into()
}

fn default_threshold() -> f64 {
    big_core::ssl::DEFAULT_THRESHOLD
}

#[derive(Args, Serialize)]
struct LimitsArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    /// Sample size for the condition report.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    plane: PlaneArgs,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsSettings {
    model: Option<PathBuf>,
    m: usize,
    sigma: f64,
    #[serde(default = "default_limits_n")]
    n: usize,
    #[serde(flatten)]
    plane: PlaneArgs,
}

fn default_limits_n() -> usize {
    2500
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON; missing keys keep the subcommand defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mixture JSON replacing the configured model.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    offsets: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    sample_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    min_side: Option<usize>,
    /// corrected or printed.
    #[arg(long)]
    variant: Option<TVariant>,
    #[arg(long)]
    label_step: Option<usize>,
}

impl ExperimentArgs {
    fn overrides(&self) -> Result<Value> {
        let mut m = Map::new();
        if let Some(p) = &self.model {
            m.insert("model".into(), serde_json::to_value(load_model_json(p)?)?);
        }
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        };
        put("offsets", self.offsets.as_ref().map(|v| json!(v)));
        put("sample_sizes", self.sample_sizes.as_ref().map(|v| json!(v)));
        put("orders", self.orders.as_ref().map(|v| json!(v)));
        put("sigma", self.sigma.map(|v| json!(v)));
        put("trials", self.trials.map(|v| json!(v)));
        put("base_seed", self.base_seed.map(|v| json!(v)));
        put("output_dir", self.output_dir.as_ref().map(|v| json!(v)));
        put("parallel", self.serial.then(|| json!(false)));
        put("min_side", self.min_side.map(|v| json!(v)));
        put("variant", self.variant.map(|v| json!(v)));
        put("label_step", self.label_step.map(|v| json!(v)));
        Ok(Value::Object(m))
    }

    fn resolve(&self, defaults: ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = defaults;
        if let Some(path) = &self.config {
            cfg = cfg.overlay_json(&std::fs::read_to_string(path)?)?;
        }
        cfg = cfg.overlay(self.overrides()?)?;
        if cfg.output_dir.is_none() {
            cfg.output_dir = Some(PathBuf::from("."));
        }
        Ok(cfg)
    }
}

/// File keys first, then flags on top.
fn merge<F: Serialize, S: DeserializeOwned>(config: Option<&Path>, flags: &F) -> Result<S> {
    let mut merged = match config {
        Some(path) => match serde_json::from_str::<Value>(&std::fs::read_to_string(path)?)? {
            Value::Object(m) => m,
            _ => return Err(Error::InvalidInput("config must be a JSON object".into())),
        },
        None => Map::new(),
    };
    if let Value::Object(f) = serde_json::to_value(flags)? {
        merged.extend(f);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::InvalidInput(format!("settings: {e}")))
}

fn load_model(path: Option<&Path>) -> Result<GmmModel> {
    match path {
        Some(p) => load_model_json(p),
        None => Ok(GmmModel::reference_2d()),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Reads `index,value` rows; a non-numeric first line is taken as a header.
fn read_labels(path: &Path, n: usize) -> Result<LabeledSet> {
    let text = std::fs::read_to_string(path)?;
    let (mut idx, mut vals) = (Vec::new(), Vec::new());
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut fields = t.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::InvalidInput(format!("labels line {}: expected `index,value`", lineno + 1)));
        };
        match (a.parse::<usize>(), b.parse::<f64>()) {
            (Ok(i), Ok(v)) => {
                idx.push(i);
                vals.push(v);
            }
            _ if lineno == 0 => continue,
            _ => return Err(Error::InvalidInput(format!("labels line {}: cannot parse `{t}`", lineno + 1))),
        }
    }
    LabeledSet::new(idx, vals, n)
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let s: SampleSettings = merge(args.config.as_deref(), args)?;
    let cloud = sample(&load_model(s.model.as_deref())?, s.n, s.seed)?;
    let mut out = open_out(s.out.as_deref())?;
    write_points_csv(&cloud, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_build_graph(args: &BuildGraphArgs) -> Result<()> {
    let s: BuildGraphSettings = merge(args.config.as_deref(), args)?;
    let cloud = load_points_csv(&s.points)?;
    let graph = build_graph(&cloud, &KernelParams::new(s.sigma, cloud.dimension())?, s.truncation)?;
    let mut edges = std::io::BufWriter::new(std::fs::File::create(s.out.with_extension("csv"))?);
    graph.write_edge_list(&mut edges)?;
    edges.flush()?;
    std::fs::write(s.out.with_extension("json"), serde_json::to_string_pretty(&graph.header())?)?;
    Ok(())
}

fn cmd_bandwidth(args: &BandwidthArgs) -> Result<()> {
    let s: BandwidthSettings = merge(args.config.as_deref(), args)?;
    let cloud = load_points_csv(&s.points)?;
    let plane = s.plane.plane(cloud.dimension())?;
    let indicator = indicator_from_boundary(&cloud, &plane)?;
    let graph = build_graph(&cloud, &KernelParams::new(s.sigma, cloud.dimension())?, None)?;
    let omega = bandwidth_estimate(&graph, &GraphSignal::from(&indicator), s.m)?;
    print_json(&json!({
        "omega": omega,
        "m": s.m,
        "sigma": s.sigma,
        "n": cloud.len(),
        "inside": indicator.count_ones(),
    }))
}

fn cmd_interpolate(args: &InterpolateArgs) -> Result<()> {
    let s: InterpolateSettings = merge(args.config.as_deref(), args)?;
    let cloud = load_points_csv(&s.points)?;
    let labeled = read_labels(&s.labels, cloud.len())?;
    let graph = build_graph(&cloud, &KernelParams::new(s.sigma, cloud.dimension())?, None)?;
    let scores = match s.method.as_str() {
        "big-ls" => {
            let omega = match s.omega {
                Some(w) => w,
                None => cutoff_frequency(&graph, &labeled, DEFAULT_CUTOFF_ORDER)?,
            };
            interpolate_ls(&fourier_basis(&graph)?, &labeled, omega)?
        }
        "big-min" => interpolate_min_bandwidth(&fourier_basis(&graph)?, &labeled, DEFAULT_RESIDUAL_TOL)?.signal,
        "harmonic" => harmonic_interpolate(&graph, &labeled)?,
        other => return Err(Error::InvalidInput(format!("unknown method {other:?}; expected big-ls, big-min or harmonic"))),
    };
    let labels = predict(&scores, s.threshold).labels;
    let mut out = open_out(s.out.as_deref())?;
    writeln!(out, "index,score,label")?;
    for (i, (score, label)) in scores.values().iter().zip(labels.values()).enumerate() {
        writeln!(out, "{i},{score:.16e},{}", *label as u8)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_limits(args: &LimitsArgs) -> Result<()> {
    let s: LimitsSettings = merge(args.config.as_deref(), args)?;
    let model = load_model(s.model.as_deref())?;
    let plane = s.plane.plane(model.dimension())?;
    let prediction = |v: TVariant| match finite_m_prediction(&model, &plane, s.m, s.sigma, v) {
        Ok(p) => json!({ "value": p }),
        Err(e) => json!({ "error": { "kind": e.kind(), "message": e.to_string() } }),
    };
    print_json(&json!({
        "limit_bandwidth": limit_bandwidth(&model, &plane)?,
        "finite_m_prediction": {
            "corrected": prediction(TVariant::Corrected),
            "printed": prediction(TVariant::Printed),
        },
        "conditions": check_conditions(s.n, s.sigma, s.m, model.dimension())?,
    }))
}

fn written(dir: &Path, stem: &str, charts: &[(String, String)]) -> Value {
    json!({
        "csv": dir.join(format!("{stem}.csv")),
        "charts": charts.iter().map(|(name, _)| dir.join(name)).collect::<Vec<_>>(),
    })
}

fn cmd_experiment(which: &str, args: &ExperimentArgs) -> Result<()> {
    match which {
        "fig2" | "fig3" => {
            let (defaults, runner): (_, fn(&ExperimentConfig) -> Result<_>) = if which == "fig2" {
                (ExperimentConfig::figure2(), run_fig2)
            } else {
                (ExperimentConfig::figure3(), run_fig3)
            };
            let cfg = args.resolve(defaults)?;
            let out = runner(&cfg)?;
            let dir = cfg.output_dir.as_deref().unwrap_or(Path::new("."));
            print_json(&written(dir, which, &out.charts))
        }
        _ => {
            let cfg = args.resolve(ExperimentConfig::recovery())?;
            let (report, raw) = run_recovery_demo(&cfg)?;
            let dir = cfg.output_dir.as_deref().unwrap_or(Path::new("."));
            let mut v = written(dir, "recovery", &raw.charts);
            v["rows"] = json!(report.rows.len());
            v["condition_met"] = json!(report.rows.last().map(|r| r.condition_met));
            print_json(&v)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::BuildGraph(a) => cmd_build_graph(a),
        Command::Bandwidth(a) => cmd_bandwidth(a),
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Limits(a) => cmd_limits(a),
        Command::Fig2(a) => cmd_experiment("fig2", a),
        Command::Fig3(a) => cmd_experiment("fig3", a),
        Command::RecoveryDemo(a) => cmd_experiment("recovery-demo", a),
    }
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim()),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
