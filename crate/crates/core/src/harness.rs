//! Seeded Monte Carlo driver.
//!
//! A replication is fully determined by `(seed, point, replication)`:
//!
//! ```text
//! rep_seed = substream(seed, [point, replication])
//! signal   = substream(rep_seed, [0])
//! coords   = substream(rep_seed, [1])    (or substream(seed, [point, u64::MAX]) when fixed per point)
//! noise    = substream(rep_seed, [2])
//! ```
//!
//! so results do not depend on thread count or scheduling.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{
    estimate_hurst_with, estimate_rank_with, log_ratio_statistic, regression_weights, trajectory_value,
    validate_schedule, RegressionWeights, ScheduleCheck,
};
use crate::filters::daubechies_filters;
use crate::pyramid::{border_free_count, transform_range, SeriesMatrix};
use crate::rng::substream;
use crate::specmat::{spectra_from_details, WaveletSpectrum};
use crate::stats;
use crate::synth::{
    canonical_coordinates, check_mixing, random_coordinates, synth_noise, validate_exponents, LatentSampler,
    NoiseSpec, SignalKind,
};

/// Minimum number of replications accepted by [`clt_diagnostics`].
pub const CLT_MIN_RECORDS: usize = 100;

const TAG_SIGNAL: u64 = 0;
const TAG_COORDS: u64 = 1;
const TAG_NOISE: u64 = 2;

/// How the `p x r` coordinates matrix is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    /// Fresh random unit-norm columns in every replication.
    #[default]
    RandomPerReplication,
    /// One random draw per schedule point, shared by its replications.
    RandomPerPoint,
    /// First `r` canonical basis vectors.
    Canonical,
}

/// Model description; `p` comes from each schedule point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Ascending scaling exponents `h_1 <= ... <= h_r`.
    pub h: Vec<f64>,
    /// Rows of the `r x r` mixing matrix `P_H`; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_h: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub signal: SignalKind,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub coordinates: Coordinates,
}

impl ModelSpec {
    pub fn r(&self) -> usize {
        self.h.len()
    }

    pub fn p_h_matrix(&self) -> Result<DMatrix<f64>> {
        let r = self.r();
        match &self.p_h {
            None => Ok(DMatrix::identity(r, r)),
            Some(rows) => {
                if rows.len() != r || rows.iter().any(|row| row.len() != r) {
                    return Err(Error::Dimension(format!("p_h must be {r} x {r}")));
                }
                Ok(DMatrix::from_fn(r, r, |i, k| rows[i][k]))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.is_empty() {
            return Err(Error::InvalidInput("latent dimension r must be >= 1".into()));
        }
        if self.h.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("exponents must be ascending".into()));
        }
        validate_exponents(&self.h, self.signal)?;
        check_mixing(&self.p_h_matrix()?, self.r())?;
        self.noise.validate()
    }
}

/// One `(n, p, a)` point; the analysed octaves are
/// `scale_log2 + j1 ..= scale_log2 + j2` of the length-`n` series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulePoint {
    pub n: usize,
    pub p: usize,
    pub j1: u32,
    pub j2: u32,
    /// `log2 a`.
    #[serde(default)]
    pub scale_log2: u32,
    /// Intended `p a 2^j2 / n`; informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_c: Option<f64>,
}

impl SchedulePoint {
    /// Point whose deepest octave satisfies `p 2^J / n = c`, analysed over
    /// the `span` octaves ending at `J`.
    pub fn with_ratio(n: usize, p: usize, c: f64, span: u32) -> Result<Self> {
        let deep = (c * n as f64 / p as f64).log2();
        if !(deep.is_finite() && deep >= 1.0) || (deep - deep.round()).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "c n / p = {} is not a power of two >= 2",
                c * n as f64 / p as f64
            )));
        }
        let deep = deep.round() as u32;
        if span < 2 || span > deep {
            return Err(Error::InvalidInput(format!("span {span} must lie in 2..={deep}")));
        }
        Ok(SchedulePoint { n, p, j1: 1, j2: span, scale_log2: deep - span, target_c: Some(c) })
    }

    pub fn first_octave(&self) -> u32 {
        self.scale_log2 + self.j1
    }

    pub fn last_octave(&self) -> u32 {
        self.scale_log2 + self.j2
    }

    pub fn scale(&self) -> u64 {
        1u64 << self.scale_log2
    }

    /// `p 2^J / n` at the deepest absolute octave `J`.
    pub fn deep_ratio(&self) -> f64 {
        self.p as f64 * (1u64 << self.last_octave()) as f64 / self.n as f64
    }

    pub fn validate(&self, r: usize) -> Result<()> {
        if self.p < r {
            return Err(Error::Dimension(format!("p = {} is smaller than r = {r}", self.p)));
        }
        if self.j1 == 0 || self.j2 <= self.j1 {
            return Err(Error::InvalidInput(format!("octave window {}..={} needs j2 > j1 >= 1", self.j1, self.j2)));
        }
        if self.last_octave() >= 63 {
            return Err(Error::InvalidInput("octave too deep".into()));
        }
        if self.deep_ratio() > 1.0 {
            return Err(Error::InvalidInput(format!(
                "p 2^J / n = {} exceeds 1 at the deepest octave {}",
                self.deep_ratio(),
                self.last_octave()
            )));
        }
        Ok(())
    }
}

fn default_tau() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    /// Rank threshold.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Regression weights over `j1..=j2`; OLS when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Number of exponents to estimate; the model's `r` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Also record spectra from this absolute octave up to the window, for
    /// trajectory plots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_from: Option<u32>,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings { tau: default_tau(), weights: None, rank: None, trajectory_from: None }
    }
}

fn default_filter_order() -> usize {
    2
}

fn default_replications() -> usize {
    1
}

fn default_coverage_tol() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub schedule: Vec<SchedulePoint>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_filter_order")]
    pub filter_order: usize,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    /// Half-width used for the per-exponent coverage fractions.
    #[serde(default = "default_coverage_tol")]
    pub coverage_tol: f64,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replications == 0 {
            return Err(Error::InvalidInput("replications must be >= 1".into()));
        }
        if self.schedule.is_empty() {
            return Err(Error::InvalidInput("schedule is empty".into()));
        }
        daubechies_filters(self.filter_order)?;
        let taps = 2 * self.filter_order;
        let rank = self.rank();
        for (i, pt) in self.schedule.iter().enumerate() {
            pt.validate(self.model.r()).map_err(|e| tag_point(i, e))?;
            if rank == 0 || rank > pt.p {
                return Err(Error::Dimension(format!("point {i}: estimator rank {rank} outside 1..={}", pt.p)));
            }
            if let Some(w) = &self.estimator.weights {
                RegressionWeights::new(pt.first_octave(), pt.last_octave(), w.clone())?;
            }
            if let Some(t) = self.estimator.trajectory_from {
                if t == 0 {
                    return Err(Error::InvalidInput("trajectory_from must be >= 1".into()));
                }
            }
            let available = border_free_count(pt.n, pt.last_octave(), taps);
            if available < 2 {
                return Err(tag_point(i, Error::InsufficientSamples { octave: pt.last_octave(), available }));
            }
        }
        if !(self.estimator.tau > 0.0 && self.estimator.tau < 0.5) {
            return Err(Error::Domain(format!("tau {} outside (0, 1/2)", self.estimator.tau)));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.estimator.rank.unwrap_or(self.model.r())
    }

    fn weights(&self, pt: &SchedulePoint) -> Result<RegressionWeights> {
        match &self.estimator.weights {
            Some(w) => RegressionWeights::new(pt.first_octave(), pt.last_octave(), w.clone()),
            None => regression_weights(pt.first_octave(), pt.last_octave()),
        }
    }

    fn recorded_octaves(&self, pt: &SchedulePoint) -> (u32, u32) {
        let lo = self.estimator.trajectory_from.map_or(pt.first_octave(), |t| t.min(pt.first_octave()));
        (lo, pt.last_octave())
    }
}

fn tag_point(point: usize, e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("point {point}: {m}")),
        Error::Dimension(m) => Error::Dimension(format!("point {point}: {m}")),
        other => other,
    }
}

/// Everything stored about one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub point: usize,
    pub replication: usize,
    pub seed: u64,
    /// Absolute octaves with recorded spectra.
    pub octaves: Vec<u32>,
    pub n_j: Vec<usize>,
    /// Ascending eigenvalues per recorded octave.
    pub eigenvalues: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_hat: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_hat: Option<usize>,
    /// Per-index slopes (ascending index), `None` for vanishing eigenvalues.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReplicationRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn spectra(&self) -> Vec<WaveletSpectrum> {
        self.octaves
            .iter()
            .zip(&self.n_j)
            .zip(&self.eigenvalues)
            .map(|((&j, &n_j), ev)| WaveletSpectrum::from_eigenvalues(j, n_j, ev.clone()))
            .collect()
    }

    /// `q`-th largest eigenvalue (`q = 1` is the largest) at octave `j`.
    pub fn top_eigenvalue(&self, q: usize, j: u32) -> Option<f64> {
        let k = self.octaves.iter().position(|&o| o == j)?;
        let ev = &self.eigenvalues[k];
        (q >= 1 && q <= ev.len()).then(|| ev[ev.len() - q])
    }
}

struct PointContext {
    sampler: LatentSampler,
    fixed_coords: Option<DMatrix<f64>>,
}

fn point_context(cfg: &ExperimentConfig, point: usize) -> Result<PointContext> {
    let pt = &cfg.schedule[point];
    let m = &cfg.model;
    let sampler = LatentSampler::new(&m.h, &m.p_h_matrix()?, m.signal, pt.n)?;
    let fixed_coords = match m.coordinates {
        Coordinates::RandomPerReplication => None,
        Coordinates::RandomPerPoint => {
            Some(random_coordinates(pt.p, m.r(), substream(cfg.seed, &[point as u64, u64::MAX]))?)
        }
        Coordinates::Canonical => Some(canonical_coordinates(pt.p, m.r())?),
    };
    Ok(PointContext { sampler, fixed_coords })
}

/// `P X + Z`, built in place on the noise matrix.
fn synthesize(cfg: &ExperimentConfig, ctx: &PointContext, pt: &SchedulePoint, rep_seed: u64) -> Result<SeriesMatrix> {
    let x = ctx.sampler.sample(substream(rep_seed, &[TAG_SIGNAL]));
    let owned;
    let coords = match &ctx.fixed_coords {
        Some(c) => c,
        None => {
            owned = random_coordinates(pt.p, cfg.model.r(), substream(rep_seed, &[TAG_COORDS]))?;
            &owned
        }
    };
    let mut y = synth_noise(&cfg.model.noise, pt.p, pt.n, substream(rep_seed, &[TAG_NOISE]))?;
    for i in 0..pt.p {
        let row = y.row_mut(i);
        for q in 0..x.p() {
            let c = coords[(i, q)];
            if c != 0.0 {
                for (o, &v) in row.iter_mut().zip(x.row(q)) {
                    *o += c * v;
                }
            }
        }
    }
    Ok(y)
}

fn replicate(cfg: &ExperimentConfig, ctx: &PointContext, point: usize, replication: usize) -> ReplicationRecord {
    let pt = &cfg.schedule[point];
    let seed = substream(cfg.seed, &[point as u64, replication as u64]);
    let mut record = ReplicationRecord {
        point,
        replication,
        seed,
        octaves: Vec::new(),
        n_j: Vec::new(),
        eigenvalues: Vec::new(),
        h_hat: None,
        r_hat: None,
        slopes: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let y = synthesize(cfg, ctx, pt, seed)?;
        let f = daubechies_filters(cfg.filter_order)?;
        let (lo, hi) = cfg.recorded_octaves(pt);
        let details = transform_range(&y, lo, hi, &f)?;
        drop(y);
        let spectra = spectra_from_details(&details)?;
        drop(details);
        for s in &spectra {
            record.octaves.push(s.octave);
            record.n_j.push(s.n_j);
            record.eigenvalues.push(s.eigenvalues.clone());
        }
        let w = cfg.weights(pt)?;
        let rank = estimate_rank_with(&spectra, &w, cfg.estimator.tau)?;
        record.r_hat = Some(rank.r_hat);
        record.slopes = Some(rank.slopes.iter().map(|s| s.is_finite().then_some(*s)).collect());
        record.h_hat = Some(estimate_hurst_with(&spectra, &w, cfg.rank())?.h_hat);
        Ok(())
    })();
    if let Err(e) = outcome {
        let e = Error::Replication { point, replication, source: Box::new(e) };
        log::warn!("{e}");
        record.error = Some(e.to_string());
    }
    record
}

/// The observed series `Y` that replication `(point, replication)` analyses.
pub fn synthesize_point(cfg: &ExperimentConfig, point: usize, replication: usize) -> Result<SeriesMatrix> {
    cfg.validate()?;
    if point >= cfg.schedule.len() {
        return Err(Error::InvalidInput(format!("point {point} out of range")));
    }
    let ctx = point_context(cfg, point)?;
    let seed = substream(cfg.seed, &[point as u64, replication as u64]);
    synthesize(cfg, &ctx, &cfg.schedule[point], seed)
}

/// One replication of one schedule point.
pub fn run_point(cfg: &ExperimentConfig, point: usize, replication: usize) -> Result<ReplicationRecord> {
    cfg.validate()?;
    if point >= cfg.schedule.len() {
        return Err(Error::InvalidInput(format!("point {point} out of range")));
    }
    let ctx = point_context(cfg, point)?;
    Ok(replicate(cfg, &ctx, point, replication))
}

/// Mean and Monte Carlo standard deviation of a per-index quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// `null` with a single replication.
    pub sd: Option<f64>,
    pub se: Option<f64>,
}

impl MeanSd {
    fn of(x: &[f64]) -> Option<Self> {
        if x.is_empty() {
            return None;
        }
        let (sd, se) = if x.len() > 1 { (Some(stats::std_dev(x)), Some(stats::std_error(x))) } else { (None, None) };
        Some(MeanSd { mean: stats::mean(x), sd, se })
    }
}

/// Mean trajectory value at one `(point, q, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub point: usize,
    /// `1` is the largest eigenvalue.
    pub q: usize,
    pub j: u32,
    /// `(log2 lambda / j - 1) / 2`.
    pub value: f64,
    /// `log2 lambda / (2 j)`.
    pub log_ratio: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointAggregate {
    pub point: usize,
    pub schedule: SchedulePoint,
    pub replications: usize,
    pub failures: usize,
    pub complete: bool,
    /// Per exponent, ascending.
    pub h_hat: Vec<MeanSd>,
    /// Fraction of replications with `|h_hat_q - h_q| <= coverage_tol`.
    pub coverage: Vec<f64>,
    /// Histogram of `r_hat`.
    pub r_hat_counts: BTreeMap<usize, usize>,
    pub r_hat_correct: f64,
    pub schedule_check: Option<ScheduleCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<ReplicationRecord>,
    pub aggregates: Vec<PointAggregate>,
}

impl ExperimentResult {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn trajectories(&self) -> Vec<TrajectoryRow> {
        (0..self.config.schedule.len())
            .flat_map(|i| {
                let recs: Vec<&ReplicationRecord> = self.records.iter().filter(|r| r.point == i).collect();
                mean_trajectories(i, &recs)
            })
            .collect()
    }
}

/// Recompute the aggregate of one point from its records.
pub fn aggregate_point(cfg: &ExperimentConfig, point: usize, records: &[ReplicationRecord]) -> PointAggregate {
    let pt = &cfg.schedule[point];
    let recs: Vec<&ReplicationRecord> = records.iter().filter(|r| r.point == point).collect();
    let ok: Vec<&ReplicationRecord> = recs.iter().copied().filter(|r| r.is_ok()).collect();
    let rank = cfg.rank();
    let mut h_hat = Vec::with_capacity(rank);
    let mut coverage = Vec::with_capacity(rank);
    for q in 0..rank {
        let v: Vec<f64> = ok.iter().filter_map(|r| r.h_hat.as_ref().map(|h| h[q])).collect();
        if let Some(ms) = MeanSd::of(&v) {
            h_hat.push(ms);
        }
        if let Some(&target) = cfg.model.h.get(q).filter(|_| rank == cfg.model.r()) {
            let hit = v.iter().filter(|&&x| (x - target).abs() <= cfg.coverage_tol).count();
            coverage.push(if v.is_empty() { 0.0 } else { hit as f64 / v.len() as f64 });
        }
    }
    let mut r_hat_counts = BTreeMap::new();
    for r in ok.iter().filter_map(|r| r.r_hat) {
        *r_hat_counts.entry(r).or_insert(0) += 1;
    }
    let correct = r_hat_counts.get(&cfg.model.r()).copied().unwrap_or(0);
    let failures = recs.len() - ok.len();
    PointAggregate {
        point,
        schedule: pt.clone(),
        replications: recs.len(),
        failures,
        complete: failures == 0,
        h_hat,
        coverage,
        r_hat_correct: if ok.is_empty() { 0.0 } else { correct as f64 / ok.len() as f64 },
        r_hat_counts,
        schedule_check: validate_schedule(pt.n as u64, pt.scale(), pt.p as u64, &cfg.model.h, pt.j2).ok(),
    }
}

fn mean_trajectories(point: usize, recs: &[&ReplicationRecord]) -> Vec<TrajectoryRow> {
    let Some(first) = recs.iter().find(|r| r.is_ok()) else { return Vec::new() };
    let p = first.eigenvalues.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for q in 1..=p {
        for &j in &first.octaves {
            let mut vals = Vec::new();
            let mut ratios = Vec::new();
            for r in recs.iter().filter(|r| r.is_ok()) {
                if let Some(l) = r.top_eigenvalue(q, j) {
                    if let (Some(v), Some(lr)) = (trajectory_value(l, j), log_ratio_statistic(l, j)) {
                        vals.push(v);
                        ratios.push(lr);
                    }
                }
            }
            if !vals.is_empty() {
                out.push(TrajectoryRow {
                    point,
                    q,
                    j,
                    value: stats::mean(&vals),
                    log_ratio: stats::mean(&ratios),
                    count: vals.len(),
                });
            }
        }
    }
    out
}

/// Run every schedule point and replication. Replications run in parallel
/// on the current rayon pool; records are returned in `(point, replication)`
/// order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.schedule.len() * cfg.replications);
    for point in 0..cfg.schedule.len() {
        let ctx = point_context(cfg, point)?;
        let recs: Vec<ReplicationRecord> =
            (0..cfg.replications).into_par_iter().map(|rep| replicate(cfg, &ctx, point, rep)).collect();
        log::info!(
            "point {point}: {} replications, {} failed",
            recs.len(),
            recs.iter().filter(|r| !r.is_ok()).count()
        );
        records.extend(recs);
    }
    let aggregates = (0..cfg.schedule.len()).map(|i| aggregate_point(cfg, i, &records)).collect();
    Ok(ExperimentResult { config: cfg.clone(), records, aggregates })
}

/// Shape diagnostics of `sqrt(n_j) (log lambda - MC mean)` across replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltDiagnostics {
    /// `1` is the largest eigenvalue.
    pub q: usize,
    pub octave: u32,
    pub count: usize,
    pub n_j: usize,
    /// MC mean of the natural log-eigenvalue (the centering).
    pub mean_log: f64,
    /// Raw SD of the log-eigenvalue.
    pub sd_log: f64,
    /// `sqrt(n_j) * sd_log`.
    pub scaled_sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov–Smirnov distance of the standardized values to N(0, 1).
    pub ks: f64,
}

/// CLT diagnostics for the `q`-th largest eigenvalue at absolute octave `j`,
/// over the successful records. The centering is the Monte Carlo mean.
pub fn clt_diagnostics(records: &[ReplicationRecord], q: usize, j: u32) -> Result<CltDiagnostics> {
    let mut n_j = None;
    let mut logs = Vec::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let k = r.octaves.iter().position(|&o| o == j).ok_or(Error::MissingOctave(j))?;
        match n_j {
            None => n_j = Some(r.n_j[k]),
            Some(m) if m != r.n_j[k] => {
                return Err(Error::InvalidInput("records mix different sample sizes".into()));
            }
            _ => {}
        }
        let v = r.top_eigenvalue(q, j).ok_or_else(|| Error::Dimension(format!("no eigenvalue {q}")))?;
        if !(v > 0.0) {
            return Err(Error::DegenerateSpectrum { octave: j, index: q, value: v });
        }
        logs.push(v.ln());
    }
    clt_from_logs(&logs, q, j, n_j.unwrap_or(0))
}

/// [`clt_diagnostics`] on already extracted log-eigenvalues.
pub fn clt_from_logs(logs: &[f64], q: usize, j: u32, n_j: usize) -> Result<CltDiagnostics> {
    if logs.len() < CLT_MIN_RECORDS {
        return Err(Error::InvalidInput(format!(
            "CLT diagnostics need at least {CLT_MIN_RECORDS} replications, got {}",
            logs.len()
        )));
    }
    let sd = stats::std_dev(logs);
    Ok(CltDiagnostics {
        q,
        octave: j,
        count: logs.len(),
        n_j,
        mean_log: stats::mean(logs),
        sd_log: sd,
        scaled_sd: (n_j as f64).sqrt() * sd,
        skewness: stats::skewness(logs),
        excess_kurtosis: stats::excess_kurtosis(logs),
        ks: stats::ks_normal(logs),
    })
}
