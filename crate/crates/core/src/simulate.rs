//! Zero-mean stationary Gaussian values at irregular times.
//!
//! The exact method factors the covariance matrix `M_jk = C(t_j - t_k)`; the
//! spectral method superposes random-amplitude sinusoids drawn stratum by
//! stratum from the density of a bandlimited model.

use crate::linalg::Cholesky;
use crate::quadrature::trapezoid;
use crate::rng::{Seed, StreamRole};
use crate::sampling::SamplingScheme;
use crate::spectra::SpectrumModel;
use crate::{Error, Real, Result};

/// Largest point set the exact method accepts.
pub const MAX_EXACT_POINTS: usize = 4000;
/// First diagonal jitter, relative to `C(0)`.
pub const BASE_JITTER: f64 = 1e-10;
/// Number of ×10 jitter escalations after the first.
pub const JITTER_ESCALATIONS: u32 = 3;
/// Fewest trapezoid panels per stratum when integrating stratum masses.
const STRATUM_PANELS: usize = 32;
/// Fewest trapezoid panels across the whole band.
const BAND_PANELS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMethod {
    /// Covariance factorization.
    Exact,
    /// Stratified spectral superposition with the given number of components.
    Spectral { components: usize },
}

impl SynthesisMethod {
    /// `exact` or `spectral:<components>`.
    pub fn parse(id: &str) -> Result<Self> {
        match id.trim() {
            "exact" => Ok(SynthesisMethod::Exact),
            other => {
                let components = other
                    .strip_prefix("spectral:")
                    .and_then(|m| m.parse::<usize>().ok())
                    .filter(|&m| m > 0)
                    .ok_or_else(|| Error::param(format!("unknown synthesis method `{id}`")))?;
                Ok(SynthesisMethod::Spectral { components })
            }
        }
    }
}

impl std::fmt::Display for SynthesisMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SynthesisMethod::Exact => write!(f, "exact"),
            SynthesisMethod::Spectral { components } => write!(f, "spectral:{components}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub model_id: String,
    pub scheme_id: String,
    pub seed: Seed,
    /// Diagonal jitter that was needed for the factorization (0 if none).
    pub jitter: T,
    pub method: SynthesisMethod,
}

impl<T: Real> SampledPath<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::param("need at least one sampling time"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("sampling times must be finite"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("sampling times must be strictly increasing"));
    }
    Ok(())
}

fn standard_normals<T: Real>(n: usize, seed: Seed) -> Vec<T> {
    let mut rng = seed.rng(StreamRole::Values);
    (0..n).map(|_| T::sample_normal(&mut rng)).collect()
}

/// Exact Gaussian draw at `times` by Cholesky factorization of the covariance
/// matrix, adding `1e-10·C(0)` to the diagonal (then ×10, up to three times)
/// if the plain factorization fails.
pub fn sample_gaussian_path<T: Real>(model: &SpectrumModel<T>, times: &[T], seed: Seed) -> Result<SampledPath<T>> {
    check_times(times)?;
    let n = times.len();
    if n > MAX_EXACT_POINTS {
        return Err(Error::param(format!(
            "exact synthesis is limited to {MAX_EXACT_POINTS} points, got {n}; use the spectral method"
        )));
    }
    let mut cov = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let c = model.covariance(times[i] - times[j]);
            cov[i * n + j] = c;
            cov[j * n + i] = c;
        }
    }
    let c0 = model.variance();
    let mut jitter = T::zero();
    let mut attempt = Cholesky::factor(&cov, n, jitter);
    let mut level = T::lit(BASE_JITTER) * c0;
    for _ in 0..=JITTER_ESCALATIONS {
        if attempt.is_ok() {
            break;
        }
        jitter = level;
        attempt = Cholesky::factor(&cov, n, jitter);
        level = level * T::lit(10.0);
    }
    let chol = attempt.map_err(|e| {
        Error::numerical(
            "sample_gaussian_path",
            format!(
                "covariance matrix not positive definite after jitter {jitter:e}; minimum eigenvalue estimate {:e} at index {}",
                e.pivot, e.index
            ),
        )
    })?;
    let values = chol.mul_lower(&standard_normals(n, seed));
    Ok(SampledPath {
        times: times.to_vec(),
        values,
        model_id: model.to_string(),
        scheme_id: "explicit-times".into(),
        seed,
        jitter,
        method: SynthesisMethod::Exact,
    })
}

/// `X(t) = Σ_j σ_j (A_j cos λ_j t + B_j sin λ_j t)` with `[0, λ₀]` cut into
/// `components` equal strata, `λ_j` uniform in stratum `j` and `σ_j²` the
/// two-sided density mass of that stratum.
pub fn sample_path_spectral<T: Real>(
    model: &SpectrumModel<T>,
    times: &[T],
    components: usize,
    seed: Seed,
) -> Result<SampledPath<T>> {
    check_times(times)?;
    let band = model
        .band()
        .ok_or_else(|| Error::Unsupported(format!("spectral synthesis needs a bandlimited model, `{model}` is not")))?;
    if components == 0 {
        return Err(Error::param("spectral synthesis needs at least one component"));
    }
    let width = band / T::from_usize_lossy(components);
    let panels = STRATUM_PANELS.max(BAND_PANELS.div_ceil(components));
    let mut rng = seed.rng(StreamRole::Spectral);
    let mut terms = Vec::with_capacity(components);
    for j in 0..components {
        let lo = width * T::from_usize_lossy(j);
        let mass = T::lit(2.0) * trapezoid(|l| model.psd(l), lo, lo + width, panels);
        let sigma = mass.max(T::zero()).sqrt();
        let lambda = lo + width * T::sample_unit(&mut rng);
        let a = T::sample_normal(&mut rng);
        let b = T::sample_normal(&mut rng);
        terms.push((lambda, sigma * a, sigma * b));
    }
    let values = times
        .iter()
        .map(|&t| {
            terms
                .iter()
                .map(|&(l, a, b)| {
                    let (s, c) = (l * t).sin_cos();
                    a * c + b * s
                })
                .sum()
        })
        .collect();
    Ok(SampledPath {
        times: times.to_vec(),
        values,
        model_id: model.to_string(),
        scheme_id: "explicit-times".into(),
        seed,
        jitter: T::zero(),
        method: SynthesisMethod::Spectral { components },
    })
}

/// Draws `n` times from `scheme` and values at them, both from `seed`.
pub fn simulate_path<T: Real>(
    model: &SpectrumModel<T>,
    scheme: &SamplingScheme<T>,
    n: usize,
    seed: Seed,
    method: SynthesisMethod,
) -> Result<SampledPath<T>> {
    let times = scheme.draw_times(n, seed)?;
    let mut path = match method {
        SynthesisMethod::Exact => sample_gaussian_path(model, &times, seed)?,
        SynthesisMethod::Spectral { components } => sample_path_spectral(model, &times, components, seed)?,
    };
    path.scheme_id = scheme.to_string();
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{covariance_from_psd, make_triangle_pair};
    use approx::assert_relative_eq;

    fn seeds(count: u64) -> impl Iterator<Item = Seed> {
        (0..count).map(|r| Seed::new(11).run(r))
    }

    #[test]
    fn single_point_marginal_variance() {
        let m = SpectrumModel::<f64>::Simulation;
        let n = 100_000;
        let draws: Vec<f64> = seeds(n)
            .map(|s| sample_gaussian_path(&m, &[0.0], s).unwrap().values[0])
            .collect();
        let var = draws.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var / 4.0 - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn pair_beyond_support_uncorrelated() {
        let m = make_triangle_pair(1.0f64).unwrap().model();
        let n = 100_000;
        let mut acc = 0.0;
        for s in seeds(n) {
            let v = sample_gaussian_path(&m, &[0.0, 1.5], s).unwrap().values;
            acc += v[0] * v[1];
        }
        assert!((acc / n as f64).abs() < 0.01);
    }

    #[test]
    fn close_pair_matches_covariance() {
        let m = SpectrumModel::<f64>::Simulation;
        let n = 100_000;
        let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
        for s in seeds(n) {
            let v = sample_gaussian_path(&m, &[3.0, 3.25], s).unwrap().values;
            xy += v[0] * v[1];
            xx += v[0] * v[0];
            yy += v[1] * v[1];
        }
        let corr = xy / (xx * yy).sqrt();
        let truth = covariance_from_psd(&m, 0.25).unwrap() / 4.0;
        assert!((corr - truth).abs() < 0.01, "{corr} vs {truth}");
    }

    #[test]
    fn rejects_bad_times() {
        let m = SpectrumModel::<f64>::Simulation;
        assert!(matches!(sample_gaussian_path(&m, &[], Seed::new(1)), Err(Error::Parameter(_))));
        assert!(sample_gaussian_path(&m, &[1.0, 1.0], Seed::new(1)).is_err());
        let many: Vec<f64> = (0..4001).map(|k| k as f64).collect();
        assert!(matches!(sample_gaussian_path(&m, &many, Seed::new(1)), Err(Error::Parameter(_))));
    }

    #[test]
    fn dense_grid_needs_jitter() {
        // Nearly collinear columns of a smooth covariance.
        let m = SpectrumModel::<f64>::gaussian(1.0).unwrap();
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.05).collect();
        let p = sample_gaussian_path(&m, &times, Seed::new(3)).unwrap();
        assert!(p.jitter > 0.0 && p.jitter <= 1e-7);
        assert_eq!(p.values.len(), 40);
    }

    #[test]
    fn spectral_single_component() {
        let m = SpectrumModel::<f64>::Simulation;
        let n = 20_000;
        let mut acc = 0.0;
        for s in seeds(n) {
            acc += sample_path_spectral(&m, &[0.7], 1, s).unwrap().values[0].powi(2);
        }
        // One stratum covering the whole band carries all of the variance.
        let expect = 2.0 * trapezoid(|l| m.psd(l), 0.0, 2.0 * std::f64::consts::PI, BAND_PANELS);
        let se = expect * (2.0 / n as f64).sqrt();
        assert!((acc / n as f64 - expect).abs() < 4.0 * se);
        assert_relative_eq!(expect, 4.0, epsilon = 1e-3);
    }

    #[test]
    fn spectral_requires_band() {
        let m = make_triangle_pair(1.0f64).unwrap().model();
        assert!(matches!(
            sample_path_spectral(&m, &[0.0], 8, Seed::new(1)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn method_ids_round_trip() {
        for m in [SynthesisMethod::Exact, SynthesisMethod::Spectral { components: 256 }] {
            assert_eq!(SynthesisMethod::parse(&m.to_string()).unwrap(), m);
        }
        assert!(SynthesisMethod::parse("spectral:0").is_err());
        assert!(SynthesisMethod::parse("cholesky").is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let m = SpectrumModel::<f64>::Simulation;
        let s = SamplingScheme::shifted_exponential(1.0, 1.0).unwrap();
        for method in [SynthesisMethod::Exact, SynthesisMethod::Spectral { components: 64 }] {
            let a = simulate_path(&m, &s, 50, Seed::new(5).run(2), method).unwrap();
            let b = simulate_path(&m, &s, 50, Seed::new(5).run(2), method).unwrap();
            assert_eq!(a, b);
            let c = simulate_path(&m, &s, 50, Seed::new(5).run(3), method).unwrap();
            assert_ne!(a.values, c.values);
            assert!(a.times.windows(2).all(|w| w[1] - w[0] >= 1.0));
            assert_eq!(a.scheme_id, "shifted-exp:d=1,theta=1");
            assert_eq!(a.model_id, "sim5");
        }
    }
}
