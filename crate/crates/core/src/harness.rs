//! Monte Carlo experiment driver and CSV artifacts.
//!
//! Every replicate draws its times and values from `Seed { master, point:
//! sweep index, run }`, so results do not depend on scheduling. CSV files
//! start with a `#` provenance block (code version, command, config echo and
//! its SHA-256, conventions) and never contain wall-clock data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::aliasfree::{certify_band, theoretical_sampled_covariance, Band, CertifierSettings, ContourVerdict};
use crate::estimate::{
    compound_covariance_view, empirical_covariance_sequence, masry_estimate, CompoundMeasureView, CompoundPart,
    CovarianceSequence, EstimatorConfig, FrequencyGrid, RaisedCosine,
};
use crate::rng::Seed;
use crate::sampling::SamplingScheme;
use crate::simulate::{simulate_path, SynthesisMethod};
use crate::spectra::SpectrumModel;
use crate::{Error, Real, Result};

/// Fourier convention written into every report.
pub const CONVENTION: &str = "C(t) = ∫ φ(λ) e^{iλt} dλ, φ(λ) = (1/2π) ∫ C(t) e^{-iλt} dt";
/// Marginal law written into every report.
pub const SYNTHESIS: &str = "zero-mean Gaussian process values";

/// Peak centres of the simulation density.
pub const PEAK_CENTRES: [f64; 2] = [0.75 * std::f64::consts::PI, 1.75 * std::f64::consts::PI];
/// Half-width of each peak region.
pub const PEAK_HALF_WIDTH: f64 = 0.2;
/// Valley regions, where the simulation density is below 1% of its maximum.
pub const VALLEYS: [(f64, f64); 3] = [(1.0, 1.6), (2.9, 4.2), (6.0, 2.0 * std::f64::consts::PI)];

pub const D_SWEEP: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const THETA_SWEEP: [f64; 10] = [0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];

/// Whether `lambda` lies within a peak region (`|λ|` is used).
pub fn in_peak_region<T: Real>(lambda: T) -> bool {
    let l = lambda.abs().as_f64();
    PEAK_CENTRES.iter().any(|c| (l - c).abs() <= PEAK_HALF_WIDTH)
}

/// Whether `lambda` lies within the peak region around `centre`.
pub fn in_peak_around<T: Real>(lambda: T, centre: f64) -> bool {
    (lambda.abs().as_f64() - centre).abs() <= PEAK_HALF_WIDTH
}

pub fn in_valley_region<T: Real>(lambda: T) -> bool {
    let l = lambda.abs().as_f64();
    VALLEYS.iter().any(|&(lo, hi)| l >= lo && l <= hi)
}

/// Median of `values[j]` over `j` with `mask(grid[j])`; `None` if empty.
pub fn region_median<T: Real>(grid: &[T], values: &[T], mask: impl Fn(T) -> bool) -> Option<T> {
    let mut v: Vec<T> = grid
        .iter()
        .zip(values)
        .filter(|(&l, _)| mask(l))
        .map(|(_, &x)| x)
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let m = v.len();
    Some(if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) * T::lit(0.5)
    })
}

/// One `(d, θ)` design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub d: T,
    pub theta: T,
}

impl<T: Real> SweepPoint<T> {
    /// `θ = 0` is deterministic spacing `d`; `d = 0` is Poisson sampling.
    pub fn scheme(&self) -> Result<SamplingScheme<T>> {
        if self.theta == T::zero() {
            SamplingScheme::deterministic(self.d)
        } else {
            SamplingScheme::shifted_exponential(self.d, self.theta)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    pub model: SpectrumModel<T>,
    pub sweep: Vec<SweepPoint<T>>,
    /// Samples per path.
    pub n: usize,
    pub runs: usize,
    /// `b_n`.
    pub bandwidth: T,
    pub grid: FrequencyGrid<T>,
    pub master_seed: u64,
    pub synthesis: SynthesisMethod,
}

impl<T: Real> ExperimentConfig<T> {
    fn base(sweep: Vec<SweepPoint<T>>) -> Self {
        Self {
            model: SpectrumModel::Simulation,
            sweep,
            n: 1000,
            runs: 100,
            bandwidth: T::lit(1.0 / 50.0),
            grid: FrequencyGrid::default_grid(),
            master_seed: 1,
            synthesis: SynthesisMethod::Exact,
        }
    }

    /// `θ = 1`, `d ∈ {0, 0.5, 1, 2, 4, 8}`.
    pub fn d_sweep() -> Self {
        Self::base(D_SWEEP.iter().map(|&d| SweepPoint { d: T::lit(d), theta: T::one() }).collect())
    }

    /// `d = 1`, `θ ∈ {0, 0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10, 20}`.
    pub fn theta_sweep() -> Self {
        Self::base(
            THETA_SWEEP
                .iter()
                .map(|&theta| SweepPoint { d: T::one(), theta: T::lit(theta) })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::param("runs must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::param("n must be at least 2"));
        }
        if self.sweep.is_empty() {
            return Err(Error::param("sweep must not be empty"));
        }
        if !(self.bandwidth > T::zero()) {
            return Err(Error::param("bandwidth must be positive"));
        }
        for p in &self.sweep {
            p.scheme()?;
        }
        Ok(())
    }

    /// Flat `key=value` echo of the configuration.
    pub fn echo(&self) -> Vec<(String, String)> {
        let list = |f: &dyn Fn(&SweepPoint<T>) -> T| {
            self.sweep.iter().map(|p| f(p).to_string()).collect::<Vec<_>>().join(",")
        };
        vec![
            ("model".into(), self.model.to_string()),
            ("d".into(), list(&|p| p.d)),
            ("theta".into(), list(&|p| p.theta)),
            ("n".into(), self.n.to_string()),
            ("runs".into(), self.runs.to_string()),
            ("bn".into(), self.bandwidth.to_string()),
            ("kernel".into(), "raised-cosine".into()),
            ("grid".into(), self.grid.to_string()),
            ("seed".into(), self.master_seed.to_string()),
            ("synthesis".into(), self.synthesis.to_string()),
        ]
    }
}

/// Per-λ error decomposition of an ensemble of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct MseReport<T> {
    pub mean: Vec<T>,
    pub mse: Vec<T>,
    pub bias2: Vec<T>,
    /// Population variance across runs (divisor = run count).
    pub variance: Vec<T>,
    pub log10_mse: Vec<T>,
}

/// MSE, squared bias and variance of `ensemble` against `truth`, per λ.
pub fn mse_report<T: Real>(ensemble: &[Vec<T>], truth: &[T]) -> Result<MseReport<T>> {
    if ensemble.is_empty() {
        return Err(Error::param("empty ensemble"));
    }
    if ensemble.iter().any(|c| c.len() != truth.len()) {
        return Err(Error::param("ensemble curves and truth differ in length"));
    }
    let runs = T::from_usize_lossy(ensemble.len());
    let m = truth.len();
    let mut out = MseReport {
        mean: Vec::with_capacity(m),
        mse: Vec::with_capacity(m),
        bias2: Vec::with_capacity(m),
        variance: Vec::with_capacity(m),
        log10_mse: Vec::with_capacity(m),
    };
    for j in 0..m {
        let mean = ensemble.iter().map(|c| c[j]).sum::<T>() / runs;
        let mse = ensemble.iter().map(|c| (c[j] - truth[j]).powi(2)).sum::<T>() / runs;
        let variance = ensemble.iter().map(|c| (c[j] - mean).powi(2)).sum::<T>() / runs;
        out.mean.push(mean);
        out.mse.push(mse);
        out.bias2.push((mean - truth[j]).powi(2));
        out.variance.push(variance);
        out.log10_mse.push(mse.log10());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPointReport<T> {
    pub index: usize,
    pub point: SweepPoint<T>,
    pub scheme_id: String,
    /// `runs × grid` estimates; empty if the point failed.
    pub curves: Vec<Vec<T>>,
    pub summary: Option<MseReport<T>>,
    /// Failure label for the whole point.
    pub error: Option<String>,
    /// Not written to CSV.
    pub elapsed: Duration,
}

impl<T: Real> SweepPointReport<T> {
    /// Median MSE over the peak regions.
    pub fn peak_mse(&self, grid: &[T]) -> Option<T> {
        region_median(grid, &self.summary.as_ref()?.mse, in_peak_region)
    }

    /// Median MSE over the peak region around `centre`.
    pub fn peak_mse_around(&self, grid: &[T], centre: f64) -> Option<T> {
        region_median(grid, &self.summary.as_ref()?.mse, |l| in_peak_around(l, centre))
    }

    pub fn valley_mse(&self, grid: &[T]) -> Option<T> {
        region_median(grid, &self.summary.as_ref()?.mse, in_valley_region)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport<T> {
    pub config: ExperimentConfig<T>,
    pub grid: Vec<T>,
    pub truth: Vec<T>,
    pub points: Vec<SweepPointReport<T>>,
}

/// Runs every `(sweep point, run)` replicate in parallel and aggregates by
/// index.
pub fn run_sweep<T: Real>(config: &ExperimentConfig<T>) -> Result<ExperimentReport<T>> {
    config.validate()?;
    let grid = config.grid.values().to_vec();
    let truth: Vec<T> = grid.iter().map(|&l| config.model.psd(l)).collect();
    let points = config
        .sweep
        .iter()
        .enumerate()
        .map(|(index, &point)| run_point(config, index, point, &truth))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        grid,
        truth,
        points,
    })
}

fn run_point<T: Real>(
    config: &ExperimentConfig<T>,
    index: usize,
    point: SweepPoint<T>,
    truth: &[T],
) -> Result<SweepPointReport<T>> {
    let start = Instant::now();
    let scheme = point.scheme()?;
    let est = EstimatorConfig::new(RaisedCosine, config.bandwidth, scheme.beta(), config.grid.clone())?;
    let seed = Seed::new(config.master_seed).point(index as u64);
    let outcome: Result<Vec<Vec<T>>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let path = simulate_path(&config.model, &scheme, config.n, seed.run(run as u64), config.synthesis)?;
            masry_estimate(&path, &est)
        })
        .collect();
    let (curves, summary, error) = match outcome {
        Ok(curves) => {
            let summary = mse_report(&curves, truth)?;
            (curves, Some(summary), None)
        }
        Err(e @ Error::Numerical { .. }) => (Vec::new(), None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(SweepPointReport {
        index,
        point,
        scheme_id: scheme.to_string(),
        curves,
        summary,
        error,
        elapsed: start.elapsed(),
    })
}

/// [`run_sweep`] over the d-sweep points of `config` (θ = 1 by convention).
pub fn run_d_sweep<T: Real>(config: &ExperimentConfig<T>) -> Result<ExperimentReport<T>> {
    run_sweep(config)
}

/// [`run_sweep`] over the θ-sweep points of `config` (d = 1 by convention).
pub fn run_theta_sweep<T: Real>(config: &ExperimentConfig<T>) -> Result<ExperimentReport<T>> {
    run_sweep(config)
}

/// Configuration of the aliasing demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasingDemoConfig<T> {
    /// Triangle width of the first class-A member; the second has width `a/2`.
    pub a: T,
    pub scheme: SamplingScheme<T>,
    pub runs: usize,
    pub n: usize,
    pub max_lag: usize,
    pub master_seed: u64,
}

impl<T: Real> AliasingDemoConfig<T> {
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("a".into(), self.a.to_string()),
            ("scheme".into(), self.scheme.to_string()),
            ("runs".into(), self.runs.to_string()),
            ("n".into(), self.n.to_string()),
            ("max_lag".into(), self.max_lag.to_string()),
            ("seed".into(), self.master_seed.to_string()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AliasingReport<T> {
    pub config: AliasingDemoConfig<T>,
    /// `X₁ + X₂` and `X₁ + X₃`.
    pub models: [SpectrumModel<T>; 2],
    pub empirical: [CovarianceSequence<T>; 2],
    pub theoretical: [Vec<T>; 2],
    pub views: [CompoundMeasureView<T>; 2],
    /// `|Δr̂(n)| / √(SE₁² + SE₂²)` for each lag.
    pub z_scores: Vec<T>,
    pub distinguishable: bool,
}

/// `X₁ + X₂` and `X₁ + X₃` with `X₁` the simulation model scaled to unit
/// variance, `X₂` the triangle of width `a` and `X₃` the triangle of width
/// `a/2` (both unit variance).
pub fn aliasing_pair<T: Real>(a: T) -> Result<[SpectrumModel<T>; 2]> {
    let x1 = SpectrumModel::Simulation.with_variance(T::one())?;
    let x2 = crate::spectra::make_triangle_pair(a)?.model();
    let x3 = crate::spectra::make_triangle_pair(a * T::lit(0.5))?.model();
    Ok([
        SpectrumModel::sum(vec![x1.clone(), x2])?,
        SpectrumModel::sum(vec![x1, x3])?,
    ])
}

/// Aliasing experiment for a constrained scheme (`a ≤ d`).
pub fn run_aliasing_demo<T: Real>(config: &AliasingDemoConfig<T>) -> Result<AliasingReport<T>> {
    if config.a > config.scheme.d() {
        return Err(Error::param(format!(
            "aliasing demo needs a ≤ d, got a = {} and d = {}",
            config.a,
            config.scheme.d()
        )));
    }
    aliasing_experiment(config)
}

/// The same experiment without the `a ≤ d` requirement, used as the
/// alias-free control (e.g. Poisson sampling).
pub fn run_aliasing_control<T: Real>(config: &AliasingDemoConfig<T>) -> Result<AliasingReport<T>> {
    aliasing_experiment(config)
}

fn aliasing_experiment<T: Real>(config: &AliasingDemoConfig<T>) -> Result<AliasingReport<T>> {
    if config.runs < 2 {
        return Err(Error::param("aliasing demo needs at least two runs"));
    }
    if !(config.a > T::zero()) {
        return Err(Error::param("triangle width must be positive"));
    }
    if config.max_lag >= config.n {
        return Err(Error::param("max_lag must be below n"));
    }
    let models = aliasing_pair(config.a)?;
    let seed = Seed::new(config.master_seed);
    let mut empirical = Vec::with_capacity(2);
    let mut theoretical = Vec::with_capacity(2);
    let mut views = Vec::with_capacity(2);
    for (arm, model) in models.iter().enumerate() {
        let paths = (0..config.runs)
            .into_par_iter()
            .map(|run| {
                simulate_path(
                    model,
                    &config.scheme,
                    config.n,
                    seed.point(arm as u64).run(run as u64),
                    SynthesisMethod::Exact,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        empirical.push(empirical_covariance_sequence(&paths, config.max_lag)?);
        theoretical.push(
            (0..=config.max_lag)
                .map(|k| theoretical_sampled_covariance(model, &config.scheme, k))
                .collect::<Result<Vec<_>>>()?,
        );
        views.push(compound_covariance_view(model, &config.scheme)?);
    }
    let z_scores: Vec<T> = (0..=config.max_lag)
        .map(|k| {
            let diff = (empirical[0].values[k] - empirical[1].values[k]).abs();
            let se = (empirical[0].standard_errors[k].powi(2) + empirical[1].standard_errors[k].powi(2)).sqrt();
            diff / se
        })
        .collect();
    let distinguishable = z_scores.iter().any(|&z| z > T::lit(3.0));
    let [e0, e1]: [CovarianceSequence<T>; 2] = empirical.try_into().expect("two arms");
    let [t0, t1]: [Vec<T>; 2] = theoretical.try_into().expect("two arms");
    let [v0, v1]: [CompoundMeasureView<T>; 2] = views.try_into().expect("two arms");
    Ok(AliasingReport {
        config: config.clone(),
        models,
        empirical: [e0, e1],
        theoretical: [t0, t1],
        views: [v0, v1],
        z_scores,
        distinguishable,
    })
}

/// One certifier case.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifierCase<T> {
    pub label: &'static str,
    pub scheme: SamplingScheme<T>,
    /// Band multiplier `c` of `[-cπ/d, cπ/d]`.
    pub c: T,
    pub verdict: ContourVerdict<T>,
}

/// Shifted exponential with mean `2d` over `[-π/d, π/d]`, the two-point
/// scheme over `[-1.1π/d, 1.1π/d]` and deterministic spacing over
/// `[-π/d, π/d]`, all at `d = 1`.
pub fn run_certifier_demo<T: Real>(settings: CertifierSettings<T>) -> Result<Vec<CertifierCase<T>>> {
    let d = T::one();
    let cases = [
        ("shifted-exponential", SamplingScheme::shifted_exponential(d, d)?, T::one()),
        ("two-point", SamplingScheme::theorem4(d)?, T::lit(1.1)),
        ("deterministic", SamplingScheme::deterministic(d)?, T::one()),
    ];
    cases
        .into_iter()
        .map(|(label, scheme, c)| {
            let verdict = certify_band(&scheme, Band::symmetric(c, d)?, settings)?;
            Ok(CertifierCase { label, scheme, c, verdict })
        })
        .collect()
}

/// `#` header block shared by every CSV artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub config: Vec<(String, String)>,
    /// Extra `key: value` lines (e.g. model variance).
    pub notes: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command: impl Into<String>, config: Vec<(String, String)>) -> Self {
        Self {
            command: command.into(),
            config,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.notes.push((key.into(), value.to_string()));
        self
    }

    /// SHA-256 of the `key=value` lines joined by newlines.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.config {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# irrspec {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {}", self.command);
        for (k, v) in &self.config {
            let _ = writeln!(s, "# config: {k}={v}");
        }
        let _ = writeln!(s, "# config-sha256: {}", self.config_hash());
        let _ = writeln!(s, "# convention: {CONVENTION}");
        let _ = writeln!(s, "# synthesis: {SYNTHESIS}");
        for (k, v) in &self.notes {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s
    }
}

/// Writes `rows` under `header` columns, preceded by the provenance block.
pub fn write_csv(path: &Path, provenance: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    write_csv_to(fs::File::create(path)?, provenance, header, rows)
}

/// [`write_csv`] into any writer.
pub fn write_csv_to<W: std::io::Write>(
    mut out: W,
    provenance: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    out.write_all(provenance.header().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn num<T: Real>(x: T) -> String {
    x.to_string()
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes `curves.csv`, `mse.csv` and `summary.csv` for a sweep into `dir`.
pub fn write_sweep_report<T: Real>(report: &ExperimentReport<T>, dir: &Path, command: &str) -> Result<Vec<PathBuf>> {
    let prov = Provenance::new(command, report.config.echo()).note("variance", report.config.model.variance());
    let grid = &report.grid;
    let mut curves = Vec::new();
    let mut mse = Vec::new();
    let mut summary = Vec::new();
    for p in &report.points {
        let key = vec![p.index.to_string(), num(p.point.d), num(p.point.theta), p.scheme_id.clone()];
        for (run, c) in p.curves.iter().enumerate() {
            for (&l, &v) in grid.iter().zip(c) {
                let mut row = key.clone();
                row.extend([run.to_string(), num(l), num(v)]);
                curves.push(row);
            }
        }
        if let Some(s) = &p.summary {
            for (j, &l) in grid.iter().enumerate() {
                let mut row = key.clone();
                row.extend([
                    num(l),
                    num(report.truth[j]),
                    num(s.mean[j]),
                    num(s.mse[j]),
                    num(s.bias2[j]),
                    num(s.variance[j]),
                    num(s.log10_mse[j]),
                ]);
                mse.push(row);
            }
        }
        let mut row = key.clone();
        row.extend([
            p.curves.len().to_string(),
            opt(p.peak_mse(grid)),
            opt(p.valley_mse(grid)),
            p.error.as_ref().map_or("ok".to_string(), |e| format!("error: {e}")),
        ]);
        summary.push(row);
    }
    let files = [
        (
            "curves.csv",
            vec!["sweep_index", "d", "theta", "scheme", "run", "lambda", "phi_hat"],
            curves,
        ),
        (
            "mse.csv",
            vec![
                "sweep_index", "d", "theta", "scheme", "lambda", "phi_true", "mean", "mse", "bias2", "variance",
                "log10_mse",
            ],
            mse,
        ),
        (
            "summary.csv",
            vec![
                "sweep_index",
                "d",
                "theta",
                "scheme",
                "runs",
                "median_peak_mse",
                "median_valley_mse",
                "status",
            ],
            summary,
        ),
    ];
    let mut written = Vec::new();
    for (name, header, rows) in files {
        let path = dir.join(name);
        write_csv(&path, &prov, &header, &rows)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `covariance.csv` (lags) and `compound.csv` (compound views) for an
/// aliasing report.
pub fn write_aliasing_report<T: Real>(report: &AliasingReport<T>, dir: &Path, command: &str) -> Result<Vec<PathBuf>> {
    let prov = Provenance::new(command, report.config.echo())
        .note("model_12", &report.models[0])
        .note("model_13", &report.models[1])
        .note("variance", report.models[0].variance())
        .note("verdict", if report.distinguishable { "DISTINGUISHABLE" } else { "NOT DISTINGUISHABLE" });
    let rows: Vec<Vec<String>> = (0..=report.config.max_lag)
        .map(|k| {
            vec![
                k.to_string(),
                num(report.empirical[0].values[k]),
                num(report.empirical[0].standard_errors[k]),
                num(report.empirical[1].values[k]),
                num(report.empirical[1].standard_errors[k]),
                num(report.theoretical[0][k]),
                num(report.theoretical[1][k]),
                num(report.z_scores[k]),
            ]
        })
        .collect();
    let cov = dir.join("covariance.csv");
    write_csv(
        &cov,
        &prov,
        &["lag", "r_hat_12", "se_12", "r_hat_13", "se_13", "r_12", "r_13", "z"],
        &rows,
    )?;
    let mut rows = Vec::new();
    for (arm, v) in report.views.iter().enumerate() {
        let label = if arm == 0 { "12" } else { "13" };
        rows.push(vec![label.to_string(), "atom".into(), num(T::zero()), num(v.atom_at_zero)]);
        match &v.part {
            CompoundPart::Density { step, values } => {
                for (j, &x) in values.iter().enumerate() {
                    rows.push(vec![label.to_string(), "density".into(), num(*step * T::from_usize_lossy(j)), num(x)]);
                }
            }
            CompoundPart::Atoms(atoms) => {
                for &(u, m) in atoms {
                    rows.push(vec![label.to_string(), "atom".into(), num(u), num(m)]);
                }
            }
        }
    }
    let comp = dir.join("compound.csv");
    write_csv(&comp, &prov, &["model", "kind", "u", "value"], &rows)?;
    Ok(vec![cov, comp])
}

/// Contour rows `(λ, Re f′, Im f′)`.
pub fn contour_rows<T: Real>(verdict: &ContourVerdict<T>) -> Vec<Vec<String>> {
    verdict
        .polyline
        .iter()
        .map(|p| vec![num(p.lambda), num(p.z.re), num(p.z.im)])
        .collect()
}

/// One-line verdict summary.
pub fn verdict_line<T: Real>(verdict: &ContourVerdict<T>) -> String {
    format!(
        "divides_plane={} bounded_regions={} resolution={} conservative={}",
        verdict.divides_plane, verdict.bounded_region_count, verdict.resolution, verdict.conservative
    )
}

/// Writes one contour CSV per case plus `verdicts.csv`.
pub fn write_certifier_report<T: Real>(
    cases: &[CertifierCase<T>],
    settings: CertifierSettings<T>,
    dir: &Path,
    command: &str,
) -> Result<Vec<PathBuf>> {
    let config = vec![
        ("points".to_string(), settings.points.to_string()),
        ("resolution".to_string(), settings.resolution.to_string()),
    ];
    let mut written = Vec::new();
    let mut rows = Vec::new();
    for case in cases {
        let prov = Provenance::new(command, config.clone())
            .note("scheme", case.scheme.to_string())
            .note("band", format!("[-{}π/d, {}π/d]", case.c, case.c))
            .note("verdict", verdict_line(&case.verdict));
        let path = dir.join(format!("contour-{}.csv", case.label));
        write_csv(&path, &prov, &["lambda", "re_f", "im_f"], &contour_rows(&case.verdict))?;
        written.push(path);
        rows.push(vec![
            case.label.to_string(),
            case.scheme.to_string(),
            num(case.c),
            case.verdict.divides_plane.to_string(),
            case.verdict.bounded_region_count.to_string(),
            case.verdict.conservative.to_string(),
        ]);
    }
    let path = dir.join("verdicts.csv");
    write_csv(
        &path,
        &Provenance::new(command, config),
        &["case", "scheme", "c", "divides_plane", "bounded_regions", "conservative"],
        &rows,
    )?;
    written.push(path);
    Ok(written)
}
