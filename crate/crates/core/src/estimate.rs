//! Spectral estimation from irregular samples and related second-order
//! functionals.
//!
//! * [`masry_estimate`]: `φ̂(λ) = (1/(πβn)) Σ_{k<j} X(t_k)X(t_j) w(b_n(t_j - t_k)) cos(λ(t_j - t_k))`.
//! * [`empirical_covariance_sequence`]: `r̂(n)` averaged over runs with
//!   between-run standard errors.
//! * [`compound_covariance_view`]: the covariance measure of
//!   `Z(B) = Σ_{t_i ∈ B} X(t_i)`, an atom `βC(0)` plus density `βC(u)h(|u|)`.
//! * [`beutler_coefficients`] and [`beutler_plugin_distribution`]: the
//!   least-squares approximation of a one-sided indicator by powers of `f′`
//!   and the plug-in spectral distribution `Σ_k c_k r̂(k)`.
//! * [`masry_integral_rhs`]: `β²φ(λ) + ∫ φ(λ - ω) φ_c(ω) dω`.

use std::fmt;

use num_complex::Complex;

use crate::linalg::solve_hermitian;
use crate::quadrature::{trapezoid, trapezoid_checked, trapezoid_samples, QUADRATURE_NODES};
use crate::sampling::{RenewalDensity, SamplingScheme};
use crate::simulate::SampledPath;
use crate::spectra::SpectrumModel;
use crate::aliasfree::Band;
use crate::{Error, Real, Result};

/// Covariance averaging kernel `w` on `[-1, 1]`.
pub trait LagKernel<T>: Send + Sync {
    fn weight(&self, x: T) -> T;
    fn name(&self) -> &'static str;
}

/// `w(x) = (1 + cos πx)/2` on `[-1, 1]`, zero outside.
pub fn raised_cosine_kernel<T: Real>(x: T) -> T {
    if x.abs() > T::one() {
        T::zero()
    } else {
        (T::one() + (T::PI() * x).cos()) * T::lit(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RaisedCosine;

impl<T: Real> LagKernel<T> for RaisedCosine {
    fn weight(&self, x: T) -> T {
        raised_cosine_kernel(x)
    }

    fn name(&self) -> &'static str {
        "raised-cosine"
    }
}

/// How a frequency grid is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridLayout {
    Symmetric,
    NonNegative,
    /// Neither symmetric about 0 nor nonnegative.
    Other,
}

/// Ordered frequencies at which an estimate is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T> {
    values: Vec<T>,
    /// `(first, step)` when the grid is uniform.
    uniform: Option<(T, T)>,
}

impl<T: Real> FrequencyGrid<T> {
    /// `count` equally spaced points from `lo` to `hi` inclusive.
    pub fn linspace(lo: T, hi: T, count: usize) -> Result<Self> {
        if count == 0 || !lo.is_finite() || !hi.is_finite() || (count > 1 && !(hi > lo)) {
            return Err(Error::param(format!("bad frequency grid {lo}:{hi}:{count}")));
        }
        if count == 1 {
            return Ok(Self {
                values: vec![lo],
                uniform: Some((lo, T::zero())),
            });
        }
        let step = (hi - lo) / T::from_usize_lossy(count - 1);
        let values = (0..count)
            .map(|j| if j == count - 1 { hi } else { lo + step * T::from_usize_lossy(j) })
            .collect();
        Ok(Self {
            values,
            uniform: Some((lo, step)),
        })
    }

    /// Arbitrary increasing frequencies.
    pub fn from_values(values: Vec<T>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("frequency grid must be nonempty and finite"));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("frequency grid must be strictly increasing"));
        }
        Ok(Self { values, uniform: None })
    }

    /// The default grid: 512 points on `[0, 2π]`.
    pub fn default_grid() -> Self {
        Self::linspace(T::zero(), T::lit(2.0) * T::PI(), 512).expect("valid default grid")
    }

    /// Parses `lo:hi:count`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let bad = || Error::param(format!("grid `{spec}`: expected <lo>:<hi>:<count>"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::linspace(T::lit(lo), T::lit(hi), count)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn layout(&self) -> GridLayout {
        let n = self.values.len();
        if (0..n).all(|j| self.values[j] == -self.values[n - 1 - j]) {
            GridLayout::Symmetric
        } else if self.values[0] >= T::zero() {
            GridLayout::NonNegative
        } else {
            GridLayout::Other
        }
    }
}

impl<T: Real> fmt::Display for FrequencyGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.uniform {
            Some(_) => write!(
                f,
                "{}:{}:{}",
                self.values[0],
                self.values[self.values.len() - 1],
                self.values.len()
            ),
            None => write!(f, "custom({} points)", self.values.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig<T, K = RaisedCosine> {
    pub kernel: K,
    /// `b_n`, in 1/time.
    pub bandwidth: T,
    /// Mean sampling intensity used in the normalization.
    pub beta: T,
    pub grid: FrequencyGrid<T>,
}

impl<T: Real, K: LagKernel<T>> EstimatorConfig<T, K> {
    pub fn new(kernel: K, bandwidth: T, beta: T, grid: FrequencyGrid<T>) -> Result<Self> {
        if !(bandwidth > T::zero() && bandwidth.is_finite()) {
            return Err(Error::param(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::param(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            kernel,
            bandwidth,
            beta,
            grid,
        })
    }
}

/// Lag pairs `(t_j - t_k, X_k X_j w(b_n(t_j - t_k)))` with `b_n(t_j - t_k) ≤ 1`.
fn weighted_pairs<T: Real, K: LagKernel<T>>(times: &[T], values: &[T], bandwidth: T, kernel: &K) -> Vec<(T, T)> {
    let reach = T::one() / bandwidth;
    let mut pairs = Vec::new();
    let mut end = 0;
    for k in 0..times.len() {
        end = end.max(k + 1);
        while end < times.len() && times[end] - times[k] <= reach {
            end += 1;
        }
        for j in k + 1..end {
            let lag = times[j] - times[k];
            let w = kernel.weight(bandwidth * lag);
            if w != T::zero() {
                pairs.push((lag, values[k] * values[j] * w));
            }
        }
    }
    pairs
}

/// Evaluates the covariance-averaging estimator over `config.grid`.
///
/// Only pairs within `1/b_n` of each other are visited. On uniform grids the
/// cosines are advanced by complex rotation; accumulation runs over pairs in
/// time order for every grid point, so results are reproducible.
pub fn masry_estimate<T: Real, K: LagKernel<T>>(path: &SampledPath<T>, config: &EstimatorConfig<T, K>) -> Result<Vec<T>> {
    let n = path.times.len();
    if n < 2 || path.values.len() != n {
        return Err(Error::param(format!("estimator needs at least two samples, got {n}")));
    }
    let pairs = weighted_pairs(&path.times, &path.values, config.bandwidth, &config.kernel);
    let grid = config.grid.values();
    let mut acc = vec![T::zero(); grid.len()];
    match config.grid.uniform {
        Some((first, step)) => {
            for &(lag, xw) in &pairs {
                let rot = Complex::new(T::zero(), step * lag).exp();
                let mut z = Complex::new(T::zero(), first * lag).exp();
                for (j, a) in acc.iter_mut().enumerate() {
                    if j > 0 && j % 64 == 0 {
                        // Re-anchor to keep rotation error from accumulating.
                        z = Complex::new(T::zero(), grid[j] * lag).exp();
                    }
                    *a = *a + xw * z.re;
                    z = z * rot;
                }
            }
        }
        None => {
            for &(lag, xw) in &pairs {
                for (a, &l) in acc.iter_mut().zip(grid) {
                    *a = *a + xw * (l * lag).cos();
                }
            }
        }
    }
    let norm = T::one() / (T::PI() * config.beta * T::from_usize_lossy(n));
    Ok(acc.into_iter().map(|a| a * norm).collect())
}

/// `r̂(0..=max_lag)` with between-run standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSequence<T> {
    pub values: Vec<T>,
    /// Standard deviation of the per-run averages over `√runs`; NaN for a
    /// single run.
    pub standard_errors: Vec<T>,
    pub runs: usize,
}

/// Averages `X(t_{m+n}) X(t_m)` over `m` within each run, then over runs.
pub fn empirical_covariance_sequence<T: Real>(paths: &[SampledPath<T>], max_lag: usize) -> Result<CovarianceSequence<T>> {
    let first = paths.first().ok_or_else(|| Error::param("empty ensemble"))?;
    for p in paths {
        if p.model_id != first.model_id || p.scheme_id != first.scheme_id {
            return Err(Error::param(format!(
                "ensemble mixes ({}, {}) with ({}, {})",
                first.model_id, first.scheme_id, p.model_id, p.scheme_id
            )));
        }
        if max_lag >= p.values.len() {
            return Err(Error::param(format!(
                "max_lag {max_lag} must be below the path length {}",
                p.values.len()
            )));
        }
    }
    let per_run: Vec<Vec<T>> = paths
        .iter()
        .map(|p| {
            let x = &p.values;
            (0..=max_lag)
                .map(|lag| {
                    let count = x.len() - lag;
                    let s: T = (0..count).map(|m| x[m + lag] * x[m]).sum();
                    s / T::from_usize_lossy(count)
                })
                .collect()
        })
        .collect();
    let runs = paths.len();
    let rn = T::from_usize_lossy(runs);
    let mut values = Vec::with_capacity(max_lag + 1);
    let mut standard_errors = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mean = per_run.iter().map(|r| r[lag]).sum::<T>() / rn;
        let se = if runs > 1 {
            let var = per_run.iter().map(|r| (r[lag] - mean).powi(2)).sum::<T>() / (rn - T::one());
            (var / rn).sqrt()
        } else {
            T::nan()
        };
        values.push(mean);
        standard_errors.push(se);
    }
    Ok(CovarianceSequence {
        values,
        standard_errors,
        runs,
    })
}

/// Absolutely continuous or atomic part of the compound covariance measure
/// away from zero.
#[derive(Debug, Clone, PartialEq)]
pub enum CompoundPart<T> {
    /// `βC(u_j)h(u_j)` at `u_j = j·step`, `j = 0..`, for `u ≥ 0`.
    Density { step: T, values: Vec<T> },
    /// `(u, βC(u)·mass)` for the renewal atoms at `u > 0`.
    Atoms(Vec<(T, T)>),
}

/// Covariance measure `μ_z(du) = C(u)[β² du + μ_c(du)]` of the compound
/// process, split into the atom at zero and the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundMeasureView<T> {
    pub atom_at_zero: T,
    pub part: CompoundPart<T>,
    pub d: T,
    pub beta: T,
    pub scheme_id: String,
    pub model_id: String,
}

impl<T: Real> CompoundMeasureView<T> {
    /// Density at `u` (linear between grid nodes, zero beyond the grid).
    pub fn density(&self, u: T) -> Result<T> {
        let u = u.abs();
        match &self.part {
            CompoundPart::Atoms(_) => Err(Error::Unsupported(
                "compound measure of an atomic spacing law has no density".into(),
            )),
            CompoundPart::Density { step, values } => {
                if u < self.d {
                    return Ok(T::zero());
                }
                let x = u / *step;
                let j = x.floor().to_usize().unwrap_or(usize::MAX);
                if j + 1 >= values.len() {
                    return Ok(if j + 1 == values.len() { values[j] } else { T::zero() });
                }
                let f = x - x.floor();
                Ok(values[j] * (T::one() - f) + values[j + 1] * f)
            }
        }
    }

    /// `(1/2π)∫ e^{-iλu} μ_z(du)` without the atom at zero.
    pub fn transform_without_atom(&self, lambda: T) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        match &self.part {
            CompoundPart::Density { step, values } => {
                let cosines: Vec<T> = values
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v * (lambda * *step * T::from_usize_lossy(j)).cos())
                    .collect();
                trapezoid_samples(&cosines, *step) / T::PI()
            }
            CompoundPart::Atoms(atoms) => {
                atoms.iter().map(|&(u, m)| T::lit(2.0) * m * (lambda * u).cos()).sum::<T>() / two_pi
            }
        }
    }

    /// `φ_z(λ)`: the atom contributes the constant `βC(0)/2π`.
    pub fn spectral_density(&self, lambda: T) -> T {
        self.atom_at_zero / (T::lit(2.0) * T::PI()) + self.transform_without_atom(lambda)
    }
}

/// Builds the compound covariance view on the scheme's default renewal grid.
pub fn compound_covariance_view<T: Real>(model: &SpectrumModel<T>, scheme: &SamplingScheme<T>) -> Result<CompoundMeasureView<T>> {
    let renewal = scheme.default_renewal_density()?;
    let beta = scheme.beta();
    let part = match &renewal {
        RenewalDensity::Table(t) => CompoundPart::Density {
            step: t.step(),
            values: t
                .values()
                .iter()
                .enumerate()
                .map(|(j, &h)| beta * model.covariance(t.node(j)) * h)
                .collect(),
        },
        RenewalDensity::Atoms(a) => {
            CompoundPart::Atoms(a.atoms.iter().map(|&(u, m)| (u, beta * model.covariance(u) * m)).collect())
        }
    };
    Ok(CompoundMeasureView {
        atom_at_zero: beta * model.variance(),
        part,
        d: scheme.d(),
        beta,
        scheme_id: scheme.to_string(),
        model_id: model.to_string(),
    })
}

/// Least-squares fit of `1_{λ < λ₀}` on a band by `Σ_k c_k f′(λ)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeutlerFit<T> {
    /// `c_1, …, c_n`.
    pub coefficients: Vec<Complex<T>>,
    /// Root-mean-square residual on the grid.
    pub rms_residual: T,
    /// Condition estimate of the regularized normal matrix.
    pub condition: T,
    pub band: Band<T>,
}

impl<T: Real> BeutlerFit<T> {
    /// Cauchy–Schwarz bound `rms·√(|I| ∫_I φ²)` on the plug-in error for
    /// `model`, with the grid rms standing in for the L² residual.
    pub fn error_bound(&self, model: &SpectrumModel<T>) -> T {
        let width = self.band.hi - self.band.lo;
        let energy = trapezoid(|l| model.psd(l).powi(2), self.band.lo, self.band.hi, QUADRATURE_NODES);
        self.rms_residual * (width * energy).sqrt()
    }
}

/// Default number of points for [`beutler_grid`].
pub const BEUTLER_GRID_POINTS: usize = 512;
/// Default ridge for [`beutler_coefficients`].
pub const BEUTLER_RIDGE: f64 = 1e-8;
/// Condition estimates above this count as beyond ridge rescue.
const MAX_CONDITION: f64 = 1e14;

/// `points` uniform frequencies over the band with the one nearest `λ₀`
/// removed.
pub fn beutler_grid<T: Real>(band: Band<T>, lambda0: T, points: usize) -> Result<Vec<T>> {
    let grid = FrequencyGrid::linspace(band.lo, band.hi, points)?;
    let nearest = grid
        .values()
        .iter()
        .enumerate()
        .min_by(|a, b| (*a.1 - lambda0).abs().partial_cmp(&(*b.1 - lambda0).abs()).expect("finite grid"))
        .map(|(j, _)| j)
        .expect("nonempty grid");
    Ok(grid
        .values()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != nearest)
        .map(|(_, &l)| l)
        .collect())
}

/// Ridge-regularized complex least squares for `c_1..c_n`.
pub fn beutler_coefficients<T: Real>(
    scheme: &SamplingScheme<T>,
    band: Band<T>,
    lambda0: T,
    n: usize,
    grid: &[T],
    ridge: T,
) -> Result<BeutlerFit<T>> {
    if n == 0 {
        return Err(Error::param("need at least one coefficient"));
    }
    if !(lambda0 >= band.lo && lambda0 <= band.hi) {
        return Err(Error::param(format!("λ₀ = {lambda0} lies outside [{}, {}]", band.lo, band.hi)));
    }
    if grid.is_empty() || grid.iter().any(|&l| l < band.lo || l > band.hi) {
        return Err(Error::param("Beutler grid must be nonempty and inside the band"));
    }
    if !(ridge >= T::zero()) {
        return Err(Error::param("ridge must be nonnegative"));
    }
    let zero = Complex::new(T::zero(), T::zero());
    // Design rows: f′(λ)^k, k = 1..n.
    let design: Vec<Vec<Complex<T>>> = grid
        .iter()
        .map(|&l| {
            let f = scheme.spacing_charfn(l);
            let mut row = Vec::with_capacity(n);
            let mut p = f;
            for _ in 0..n {
                row.push(p);
                p = p * f;
            }
            row
        })
        .collect();
    let target: Vec<T> = grid.iter().map(|&l| if l < lambda0 { T::one() } else { T::zero() }).collect();
    let mut normal = vec![zero; n * n];
    let mut rhs = vec![zero; n];
    for (row, &y) in design.iter().zip(&target) {
        for i in 0..n {
            let ci = row[i].conj();
            rhs[i] = rhs[i] + ci * y;
            for j in 0..=i {
                normal[i * n + j] = normal[i * n + j] + ci * row[j];
            }
        }
    }
    for i in 0..n {
        normal[i * n + i] = normal[i * n + i] + Complex::new(ridge, T::zero());
        for j in 0..i {
            normal[j * n + i] = normal[i * n + j].conj();
        }
    }
    let (coefficients, condition) = solve_hermitian(&normal, &rhs).ok_or_else(|| {
        Error::numerical(
            "beutler_coefficients",
            format!("normal matrix not positive definite with ridge {ridge:e}"),
        )
    })?;
    if !(condition <= T::lit(MAX_CONDITION)) {
        return Err(Error::numerical(
            "beutler_coefficients",
            format!("normal matrix condition estimate {condition:e} beyond ridge rescue"),
        ));
    }
    let sq: T = design
        .iter()
        .zip(&target)
        .map(|(row, &y)| {
            let fit = row.iter().zip(&coefficients).fold(zero, |s, (a, c)| s + *a * *c);
            (fit - y).norm_sqr()
        })
        .sum();
    Ok(BeutlerFit {
        coefficients,
        rms_residual: (sq / T::from_usize_lossy(grid.len())).sqrt(),
        condition,
        band,
    })
}

/// `Re Σ_k c_k r̂(k)`, with `r_hat[k - 1] = r̂(k)`.
pub fn beutler_plugin_distribution<T: Real>(r_hat: &[T], coefficients: &[Complex<T>]) -> Result<T> {
    if r_hat.len() != coefficients.len() {
        return Err(Error::param(format!(
            "{} covariances for {} coefficients",
            r_hat.len(),
            coefficients.len()
        )));
    }
    Ok(r_hat.iter().zip(coefficients).map(|(&r, c)| c.re * r).sum())
}

/// Largest `|f_c|` tolerated over the last tenth of the renewal window,
/// relative to `β²`.
const FC_TAIL_TOLERANCE: f64 = 1e-4;

/// `β²φ(λ) + ∫ φ(λ - ω) φ_c(ω) dω`, with
/// `φ_c(ω) = (1/π)∫_0^U f_c(u) cos(ωu) du` over the renewal window `[0, U]`.
pub fn masry_integral_rhs<T: Real>(model: &SpectrumModel<T>, scheme: &SamplingScheme<T>, lambda: T) -> Result<T> {
    let beta = scheme.beta();
    let base = beta * beta * model.psd(lambda);
    if scheme.is_poisson() {
        return Ok(base);
    }
    let renewal = scheme.default_renewal_density()?;
    let table = renewal.table().ok_or_else(|| {
        Error::Unsupported("reduced covariance of an atomic spacing law has no density".into())
    })?;
    let fc: Vec<T> = table.values().iter().map(|&h| beta * (h - beta)).collect();
    let tail_start = fc.len() - fc.len() / 10;
    let tail = fc[tail_start..].iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if tail > T::lit(FC_TAIL_TOLERANCE) * beta * beta {
        return Err(Error::numerical(
            "masry_integral_rhs",
            format!("reduced covariance density {tail:e} at the window edge; window too small"),
        ));
    }
    let step = table.step();
    let nodes: Vec<T> = (0..fc.len()).map(|j| table.node(j)).collect();
    let phi_c = |omega: T| {
        let v: Vec<T> = fc.iter().zip(&nodes).map(|(&f, &u)| f * (omega * u).cos()).collect();
        trapezoid_samples(&v, step) / T::PI()
    };
    let w = model.quadrature_window();
    let conv = trapezoid_checked(
        |omega| model.psd(lambda - omega) * phi_c(omega),
        lambda - w,
        lambda + w,
        2048,
        T::lit(1e-4) * base.abs().max(beta * beta * T::lit(1e-3)),
        "masry_integral_rhs",
    )?;
    Ok(base + conv.value)
}
