//! Monte Carlo experiment runner: bandwidth-versus-sample-size and
//! bandwidth-versus-boundary-position sweeps, the bias check for the
//! quadratic-form statistic, and the sampling-theorem recovery demo.
//!
//! Every output is a pure function of the [`ExperimentConfig`]. Trial seeds
//! are derived from the base seed and the cell coordinates, and aggregates
//! are reduced in trial order, so serial and parallel runs agree bit for bit.

mod svg;

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use svg::{emit_svg, render_chart, Chart, ChartStyle, XAxis};

use crate::asymptotics::{bias_limit, finite_m_prediction, TVariant};
use crate::density::{indicator_from_boundary, sample, sup_on_boundary, GmmModel, Hyperplane};
use crate::error::{Error, Result};
use crate::graph::{build_graph, KernelParams};
use crate::spectral::{
    bandwidth_estimate, cutoff_frequency, exact_bandwidth, fourier_basis, log_power_form, GraphSignal, LabeledSet,
    DEFAULT_COEFF_TOL, DEFAULT_CUTOFF_ORDER,
};
use crate::ssl::{accuracy, harmonic_interpolate, interpolate_ls, interpolate_min_bandwidth, predict, DEFAULT_RESIDUAL_TOL, DEFAULT_THRESHOLD};

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: GmmModel,
    /// Boundary positions `c` of the planes `x_1 = c`.
    pub offsets: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub orders: Vec<usize>,
    pub sigma: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub parallel: bool,
    /// Trials with fewer points than this on either side are excluded.
    pub min_side: usize,
    pub variant: TVariant,
    /// Labeled-set growth step of the recovery demo.
    pub label_step: usize,
}

impl ExperimentConfig {
    /// `n` in {500, ..., 2500}, `m` in {10, 20, 30}, `x_1 = 0`, 100 trials.
    pub fn figure2() -> Self {
        Self {
            model: GmmModel::reference_2d(),
            offsets: vec![0.0],
            sample_sizes: vec![500, 1000, 1500, 2000, 2500],
            orders: vec![10, 20, 30],
            sigma: 0.1,
            trials: 100,
            base_seed: 2019,
            output_dir: None,
            parallel: true,
            min_side: 5,
            variant: TVariant::Corrected,
            label_step: 10,
        }
    }

    /// `c` from -3 to 3 in steps of 0.25 at `n = 2500`, `m = 20`.
    pub fn figure3() -> Self {
        Self {
            offsets: (0..=24).map(|i| -3.0 + 0.25 * i as f64).collect(),
            sample_sizes: vec![2500],
            orders: vec![20],
            ..Self::figure2()
        }
    }

    pub fn recovery() -> Self {
        Self {
            sample_sizes: vec![200],
            orders: vec![DEFAULT_CUTOFF_ORDER],
            sigma: 0.3,
            trials: 1,
            ..Self::figure2()
        }
    }

    /// Bias check of the quadratic-form statistic: `n = 2000`, `sigma = 0.05`, `m` in {1, 2, 3}, 200 trials.
    pub fn bias_check() -> Self {
        Self {
            sample_sizes: vec![2000],
            orders: vec![1, 2, 3],
            sigma: 0.05,
            trials: 200,
            ..Self::figure2()
        }
    }

    /// Parses `text` as a partial config whose keys replace those of `self`.
    pub fn overlay_json(&self, text: &str) -> Result<Self> {
        let patch: serde_json::Value = serde_json::from_str(text)?;
        self.overlay(patch)
    }

    pub fn overlay(&self, patch: serde_json::Value) -> Result<Self> {
        let serde_json::Value::Object(patch) = patch else {
            return Err(Error::InvalidInput("config must be a JSON object".into()));
        };
        let mut base = serde_json::to_value(self)?;
        let obj = base.as_object_mut().expect("config serializes to an object");
        for (k, v) in patch {
            obj.insert(k, v);
        }
        let cfg: Self = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::InvalidInput("sample sizes must be a nonempty list of positive counts".into()));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::InvalidInput("orders must be a nonempty list of positive integers".into()));
        }
        if self.offsets.is_empty() || self.offsets.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("offsets must be a nonempty list of finite values".into()));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.label_step == 0 {
            return Err(Error::InvalidInput("label_step must be at least 1".into()));
        }
        Ok(())
    }

    fn plane(&self, c: f64) -> Result<Hyperplane> {
        Hyperplane::axis_aligned(self.model.dimension(), 0, c)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one trial; independent of scheduling order.
pub fn trial_seed(base: u64, n: usize, m: usize, c: f64, trial: usize) -> u64 {
    [n as u64, m as u64, c.to_bits(), trial as u64]
        .iter()
        .fold(splitmix64(base), |h, &v| splitmix64(h ^ v))
}

/// Formats `v` with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let e = v.abs().log10().floor() as i32;
    if (-4..=11).contains(&e) {
        format!("{:.*}", (11 - e) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}

/// Sample mean and (n-1)-normalized standard deviation; `std = 0` for one
/// value and both NaN for none.
fn mean_std(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (values[0], 0.0),
        k => {
            let mean = values.iter().sum::<f64>() / k as f64;
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (mean, (ss / (k - 1) as f64).sqrt())
        }
    }
}

fn run_trials<T: Send, F>(config: &ExperimentConfig, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    if config.parallel {
        (0..config.trials).into_par_iter().map(f).collect()
    } else {
        (0..config.trials).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Trial {
    Omega(f64),
    Degenerate,
    Failed,
}

fn omega_trial(config: &ExperimentConfig, plane: &Hyperplane, n: usize, m: usize, c: f64, t: usize) -> Trial {
    let run = || -> Result<Trial> {
        let cloud = sample(&config.model, n, trial_seed(config.base_seed, n, m, c, t))?;
        let s = indicator_from_boundary(&cloud, plane)?;
        let ones = s.count_ones();
        if ones < config.min_side || n - ones < config.min_side {
            return Ok(Trial::Degenerate);
        }
        let graph = build_graph(&cloud, &KernelParams::new(config.sigma, cloud.dimension())?, None)?;
        Ok(Trial::Omega(bandwidth_estimate(&graph, &GraphSignal::from(&s), m)?))
    };
    run().unwrap_or(Trial::Failed)
}

/// One `(n, m, c)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub trials_used: usize,
    /// Degenerate or failed trials.
    pub trials_excluded: usize,
    pub mean_omega: f64,
    pub std_omega: f64,
    pub sup_p: f64,
    pub prediction_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub variant: TVariant,
    pub rows: Vec<SummaryRow>,
}

pub const SUMMARY_HEADER: &str = "n,m,c,trials_used,trials_excluded,mean_omega,std_omega,sup_p,prediction_m,variant";

impl SummaryStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for r in &self.rows {
            let pred = r.prediction_m.map(sig12).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.m,
                sig12(r.c),
                r.trials_used,
                r.trials_excluded,
                sig12(r.mean_omega),
                sig12(r.std_omega),
                sig12(r.sup_p),
                pred,
                self.variant.name()
            ));
        }
        out
    }

    pub fn filtered(&self, keep: impl Fn(&SummaryRow) -> bool) -> Self {
        Self { variant: self.variant, rows: self.rows.iter().filter(|r| keep(r)).cloned().collect() }
    }
}

/// Mean and spread of `omega_m` over the full `c x n x m` grid.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SummaryStats> {
    config.validate()?;
    let mut rows = Vec::new();
    for &c in &config.offsets {
        let plane = config.plane(c)?;
        let sup_p = sup_on_boundary(&config.model, &plane)?;
        for &n in &config.sample_sizes {
            for &m in &config.orders {
                let trials = run_trials(config, |t| omega_trial(config, &plane, n, m, c, t));
                let values: Vec<f64> = trials
                    .iter()
                    .filter_map(|t| match t {
                        Trial::Omega(w) => Some(*w),
                        _ => None,
                    })
                    .collect();
                let (mean_omega, std_omega) = mean_std(&values);
                rows.push(SummaryRow {
                    n,
                    m,
                    c,
                    trials_used: values.len(),
                    trials_excluded: trials.len() - values.len(),
                    mean_omega,
                    std_omega,
                    sup_p,
                    prediction_m: finite_m_prediction(&config.model, &plane, m, config.sigma, config.variant).ok(),
                });
            }
        }
    }
    Ok(SummaryStats { variant: config.variant, rows })
}

/// Summary, its CSV text and named SVG charts.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub stats: SummaryStats,
    pub csv: String,
    pub charts: Vec<(String, String)>,
}

impl FigureOutput {
    /// Writes `<stem>.csv` and every chart into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), &self.csv)?;
        for (name, svg) in &self.charts {
            std::fs::write(dir.join(name), svg)?;
        }
        Ok(())
    }
}

fn finish(config: &ExperimentConfig, stats: SummaryStats, charts: Vec<(String, String)>, stem: &str) -> Result<FigureOutput> {
    let out = FigureOutput { csv: stats.to_csv(), stats, charts };
    if let Some(dir) = &config.output_dir {
        out.write(dir, stem)?;
    }
    Ok(out)
}

/// Bandwidth against sample size; one chart per `(c, m)`.
pub fn run_fig2(config: &ExperimentConfig) -> Result<FigureOutput> {
    let stats = run_sweep(config)?;
    let mut charts = Vec::new();
    for (ci, &c) in config.offsets.iter().enumerate() {
        for &m in &config.orders {
            let sub = stats.filtered(|r| r.m == m && r.c == c);
            let style = ChartStyle { title: format!("omega_{m} vs n (x1 = {c})"), x_axis: XAxis::SampleSize };
            let name = if config.offsets.len() == 1 { format!("fig2_m{m}.svg") } else { format!("fig2_c{ci}_m{m}.svg") };
            charts.push((name, emit_svg(&sub, &style)?));
        }
    }
    finish(config, stats, charts, "fig2")
}

/// Bandwidth against boundary position; one chart per `(n, m)`.
pub fn run_fig3(config: &ExperimentConfig) -> Result<FigureOutput> {
    let stats = run_sweep(config)?;
    let mut charts = Vec::new();
    for &n in &config.sample_sizes {
        for &m in &config.orders {
            let sub = stats.filtered(|r| r.n == n && r.m == m);
            let style = ChartStyle { title: format!("omega_{m} vs boundary position (n = {n})"), x_axis: XAxis::Offset };
            charts.push((format!("fig3_n{n}_m{m}.svg"), emit_svg(&sub, &style)?));
        }
    }
    finish(config, stats, charts, "fig3")
}

/// Monte Carlo mean of `V = (1/(n sigma)) 1_S^T L^m 1_S` next to its limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasRow {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub trials: usize,
    pub mean_v: f64,
    pub std_v: f64,
    pub ci99_low: f64,
    pub ci99_high: f64,
    pub limit_corrected: f64,
    pub limit_printed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub rows: Vec<BiasRow>,
}

impl BiasReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,c,trials,mean_v,std_v,ci99_low,ci99_high,limit_corrected,limit_printed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.m,
                sig12(r.c),
                r.trials,
                sig12(r.mean_v),
                sig12(r.std_v),
                sig12(r.ci99_low),
                sig12(r.ci99_high),
                sig12(r.limit_corrected),
                sig12(r.limit_printed)
            ));
        }
        out
    }
}

/// Each trial draws one cloud and evaluates `V` for every configured order.
pub fn run_bias_check(config: &ExperimentConfig) -> Result<BiasReport> {
    config.validate()?;
    let mut rows = Vec::new();
    for &c in &config.offsets {
        let plane = config.plane(c)?;
        for &n in &config.sample_sizes {
            let per_trial = run_trials(config, |t| -> Result<Vec<f64>> {
                let cloud = sample(&config.model, n, trial_seed(config.base_seed, n, 0, c, t))?;
                let s = GraphSignal::from(&indicator_from_boundary(&cloud, &plane)?);
                let graph = build_graph(&cloud, &KernelParams::new(config.sigma, cloud.dimension())?, None)?;
                config
                    .orders
                    .iter()
                    .map(|&m| match log_power_form(&graph, &s, m) {
                        Ok(lf) => Ok(lf.exp() / (n as f64 * config.sigma)),
                        Err(Error::ZeroSignal) => Ok(0.0),
                        Err(e) => Err(e),
                    })
                    .collect()
            });
            let per_trial: Vec<Vec<f64>> = per_trial.into_iter().collect::<Result<_>>()?;
            for (k, &m) in config.orders.iter().enumerate() {
                let values: Vec<f64> = per_trial.iter().map(|v| v[k]).collect();
                let (mean_v, std_v) = mean_std(&values);
                let half = Z99 * std_v / (values.len() as f64).sqrt();
                rows.push(BiasRow {
                    n,
                    m,
                    c,
                    trials: values.len(),
                    mean_v,
                    std_v,
                    ci99_low: mean_v - half,
                    ci99_high: mean_v + half,
                    limit_corrected: bias_limit(&config.model, &plane, m, TVariant::Corrected)?,
                    limit_printed: bias_limit(&config.model, &plane, m, TVariant::Printed)?,
                });
            }
        }
    }
    Ok(BiasReport { rows })
}

/// One labeled-set size of the recovery demo. Errors are max-abs deviations
/// from the true indicator; NaN marks an interpolator that could not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryRow {
    pub labeled: usize,
    pub cutoff: f64,
    pub condition_met: bool,
    pub ls_error: f64,
    pub ls_accuracy: f64,
    pub min_error: f64,
    pub min_accuracy: f64,
    pub harmonic_error: f64,
    pub harmonic_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub n: usize,
    pub sigma: f64,
    pub c: f64,
    pub exact_bandwidth: f64,
    pub rows: Vec<RecoveryRow>,
}

impl RecoveryReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "labeled,cutoff,exact_bandwidth,condition_met,ls_error,ls_accuracy,min_error,min_accuracy,harmonic_error,harmonic_accuracy\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.labeled,
                sig12(r.cutoff),
                sig12(self.exact_bandwidth),
                r.condition_met,
                sig12(r.ls_error),
                sig12(r.ls_accuracy),
                sig12(r.min_error),
                sig12(r.min_accuracy),
                sig12(r.harmonic_error),
                sig12(r.harmonic_accuracy)
            ));
        }
        out
    }

    pub fn chart(&self) -> Chart {
        let rows: Vec<&RecoveryRow> = self.rows.iter().filter(|r| r.cutoff.is_finite()).collect();
        Chart {
            title: format!("cutoff frequency vs labeled nodes (n = {})", self.n),
            x_label: "labeled nodes".into(),
            y_label: "frequency".into(),
            x: rows.iter().map(|r| r.labeled as f64).collect(),
            mean: rows.iter().map(|r| r.cutoff).collect(),
            band: None,
            reference: vec![self.exact_bandwidth; rows.len()],
            prediction: Vec::new(),
            mean_label: "cutoff frequency".into(),
            reference_label: "bandwidth of indicator".into(),
            prediction_label: String::new(),
        }
    }
}

fn score(scores: Result<GraphSignal>, truth: &crate::spectral::IndicatorSignal) -> (f64, f64) {
    match scores {
        Ok(f) => {
            let err = f.values().iter().zip(truth.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (err, accuracy(&predict(&f, DEFAULT_THRESHOLD).labels, truth))
        }
        Err(_) => (f64::NAN, f64::NAN),
    }
}

/// Grows a random labeled set (sizes 1, step, 2 step, ...) until the
/// cutoff frequency of the labeled set exceeds the bandwidth of `1_S`,
/// interpolating at every size.
pub fn run_recovery_demo(config: &ExperimentConfig) -> Result<(RecoveryReport, FigureOutputRaw)> {
    config.validate()?;
    let n = config.sample_sizes[0];
    let c = config.offsets[0];
    let plane = config.plane(c)?;
    let seed = trial_seed(config.base_seed, n, 0, c, 0);
    let cloud = sample(&config.model, n, seed)?;
    let truth = indicator_from_boundary(&cloud, &plane)?;
    let graph = build_graph(&cloud, &KernelParams::new(config.sigma, cloud.dimension())?, None)?;
    let basis = fourier_basis(&graph)?;
    let signal = GraphSignal::from(&truth);
    let exact = if truth.count_ones() == 0 { 0.0 } else { exact_bandwidth(&basis, &signal, DEFAULT_COEFF_TOL)? };

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
    let mut sizes = vec![1];
    sizes.extend((1..).map(|k| k * config.label_step).take_while(|&s| s < n).filter(|&s| s > 1));
    sizes.push(n);
    sizes.dedup();

    let mut rows = Vec::new();
    for size in sizes {
        let labeled = LabeledSet::from_signal(order[..size].to_vec(), truth.values())?;
        let cutoff = cutoff_frequency(&graph, &labeled, DEFAULT_CUTOFF_ORDER)?;
        let (ls_error, ls_accuracy) = score(interpolate_ls(&basis, &labeled, cutoff), &truth);
        let (min_error, min_accuracy) = score(interpolate_min_bandwidth(&basis, &labeled, DEFAULT_RESIDUAL_TOL).map(|r| r.signal), &truth);
        let (harmonic_error, harmonic_accuracy) = score(harmonic_interpolate(&graph, &labeled), &truth);
        let condition_met = cutoff > exact;
        rows.push(RecoveryRow { labeled: size, cutoff, condition_met, ls_error, ls_accuracy, min_error, min_accuracy, harmonic_error, harmonic_accuracy });
        if condition_met {
            break;
        }
    }
    let report = RecoveryReport { n, sigma: config.sigma, c, exact_bandwidth: exact, rows };
    let raw = FigureOutputRaw { csv: report.to_csv(), charts: vec![("recovery.svg".into(), render_chart(&report.chart())?)] };
    if let Some(dir) = &config.output_dir {
        raw.write(dir, "recovery")?;
    }
    Ok((report, raw))
}

/// CSV text and charts without a sweep summary.
#[derive(Debug, Clone)]
pub struct FigureOutputRaw {
    pub csv: String,
    pub charts: Vec<(String, String)>,
}

impl FigureOutputRaw {
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), &self.csv)?;
        for (name, svg) in &self.charts {
            std::fs::write(dir.join(name), svg)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> ExperimentConfig {
        ExperimentConfig { sample_sizes: vec![300], orders: vec![4], trials, parallel: false, ..ExperimentConfig::figure2() }
    }

    #[test]
    fn seeds_depend_on_every_coordinate() {
        let s = trial_seed(1, 500, 10, 0.0, 3);
        assert_ne!(s, trial_seed(2, 500, 10, 0.0, 3));
        assert_ne!(s, trial_seed(1, 501, 10, 0.0, 3));
        assert_ne!(s, trial_seed(1, 500, 11, 0.0, 3));
        assert_ne!(s, trial_seed(1, 500, 10, 0.25, 3));
        assert_ne!(s, trial_seed(1, 500, 10, 0.0, 4));
        assert_eq!(s, trial_seed(1, 500, 10, 0.0, 3));
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(0.13279), "0.132790000000");
        assert_eq!(sig12(-2.5), "-2.50000000000");
        assert_eq!(sig12(2500.0), "2500.00000000");
        assert_eq!(sig12(1.5e-7), "1.50000000000e-7");
        assert_eq!(sig12(f64::NAN), "nan");
    }

    #[test]
    fn mean_std_edge_cases() {
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn single_trial_has_zero_std() {
        let stats = run_sweep(&small(1)).unwrap();
        assert_eq!(stats.rows.len(), 1);
        assert_eq!(stats.rows[0].std_omega, 0.0);
        assert_eq!(stats.rows[0].trials_used, 1);
        assert_eq!(stats.to_csv().lines().count(), 2);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let serial = run_fig2(&small(4)).unwrap();
        let parallel = run_fig2(&ExperimentConfig { parallel: true, ..small(4) }).unwrap();
        assert_eq!(serial.csv, parallel.csv);
        assert_eq!(serial.charts, parallel.charts);
        let again = run_fig2(&small(4)).unwrap();
        assert_eq!(serial.csv, again.csv);
    }

    #[test]
    fn tail_offsets_are_excluded() {
        let cfg = ExperimentConfig { offsets: vec![-6.0, 0.0], ..small(3) };
        let out = run_fig3(&cfg).unwrap();
        let tail = &out.stats.rows[0];
        assert_eq!(tail.trials_used, 0);
        assert_eq!(tail.trials_excluded, 3);
        assert!(tail.mean_omega.is_nan());
        assert_eq!(out.stats.rows[1].trials_used, 3);
        assert_eq!(out.charts.len(), 1);
    }

    #[test]
    fn grid_shape_matches_config() {
        let cfg = ExperimentConfig { sample_sizes: vec![100, 200], orders: vec![2, 3, 4], offsets: vec![0.0], ..small(2) };
        let out = run_fig2(&cfg).unwrap();
        assert_eq!(out.stats.rows.len(), 6);
        assert_eq!(out.charts.len(), 3);
        assert_eq!(out.stats.rows.iter().map(|r| r.trials_used + r.trials_excluded).sum::<usize>(), 12);
        assert_eq!(out.csv.lines().next().unwrap(), SUMMARY_HEADER);
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig { output_dir: Some(dir.path().to_path_buf()), ..small(2) };
        run_fig2(&cfg).unwrap();
        assert!(dir.path().join("fig2.csv").exists());
        assert!(dir.path().join("fig2_m4.svg").exists());
    }

    #[test]
    fn config_overlay_and_validation() {
        let cfg = ExperimentConfig::figure3().overlay_json(r#"{"trials": 7, "offsets": [0.5]}"#).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.offsets, vec![0.5]);
        assert_eq!(cfg.orders, vec![20]);
        assert!(ExperimentConfig::figure2().overlay_json(r#"{"trials": 0}"#).is_err());
        assert!(ExperimentConfig::figure2().overlay_json(r#"{"sigma": -1.0}"#).is_err());
        assert!(ExperimentConfig::figure2().overlay_json(r#"{"trails": 3}"#).is_err());
        let text = serde_json::to_string(&ExperimentConfig::figure2()).unwrap();
        assert_eq!(ExperimentConfig::recovery().overlay_json(&text).unwrap(), ExperimentConfig::figure2());
    }

    #[test]
    fn bias_check_small_run() {
        let cfg = ExperimentConfig { sample_sizes: vec![300], orders: vec![1, 2], trials: 3, sigma: 0.2, parallel: false, ..ExperimentConfig::bias_check() };
        let r = run_bias_check(&cfg).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows.iter().all(|row| row.mean_v > 0.0 && row.ci99_low <= row.mean_v));
        assert_eq!(r.rows[0].limit_printed, 0.0);
        assert_eq!(r.to_csv().lines().count(), 3);
    }

    #[test]
    fn recovery_demo_reaches_condition() {
        let cfg = ExperimentConfig { sample_sizes: vec![60], label_step: 10, ..ExperimentConfig::recovery() };
        let (report, raw) = run_recovery_demo(&cfg).unwrap();
        let last = report.rows.last().unwrap();
        assert!(last.condition_met);
        assert!(last.ls_error < 1e-6 && last.min_error < 1e-6);
        assert_eq!(last.ls_accuracy, 1.0);
        assert_eq!(report.rows[0].labeled, 1);
        assert!(raw.charts[0].1.starts_with("<svg"));
    }
}
