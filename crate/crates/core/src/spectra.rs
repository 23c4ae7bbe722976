//! Power spectral densities and their covariance functions.
//!
//! Fourier convention used everywhere in the crate:
//! `C(t) = ∫ φ(λ) e^{iλt} dλ`, so `C(0) = ∫ φ` and
//! `φ(λ) = (1/2π) ∫ C(t) e^{-iλt} dt`. Frequencies are angular (rad per unit
//! time).
//!
//! Closed-form covariances are always evaluated directly; the quadrature route
//! ([`covariance_from_psd`]) exists to cross-check them and for models that
//! only provide a density.

use std::fmt;

use crate::quadrature::{trapezoid, trapezoid_checked, QUADRATURE_NODES};
use crate::special::{cosine_over_square_tail, sine_over_cube_tail};
use crate::{Error, Real, Result};

/// Below this value of `|aλ|` the triangle density uses its Taylor series.
const TRIANGLE_SERIES_CUTOFF: f64 = 1e-4;

/// Half-width, in units of `1/a`, of the quadrature window for triangle
/// densities. The remainder beyond the window is added analytically.
const TRIANGLE_WINDOW: f64 = 64.0;

/// Half-width, in standard deviations, of the window for Gaussian densities.
const GAUSSIAN_WINDOW: f64 = 12.0;

/// A stationary second-order model: a density together with its covariance.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumModel<T> {
    /// The two-bump bandlimited density used in the Monte Carlo studies
    /// (identifier `sim5`).
    Simulation,
    /// A member of the class of spectra whose covariance vanishes beyond `a`.
    ClassA(ClassAMember<T>),
    /// Unit-variance Gaussian density of standard deviation `width`
    /// (covariance `exp(-width² t² / 2)`); arbitrarily narrow widths
    /// approximate a spectral line at zero.
    Gaussian { width: T },
    /// `factor · inner` in both density and covariance (`factor ≥ 0`).
    Scaled { factor: T, inner: Box<SpectrumModel<T>> },
    /// Sum of independent processes.
    Sum(Vec<SpectrumModel<T>>),
}

/// Triangle covariance `C_a(t) = (1 - |t|/a)₊`, optionally convolved in the
/// frequency domain with another density (pointwise product of covariances).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAMember<T> {
    a: T,
    convolved_with: Option<Box<SpectrumModel<T>>>,
}

/// Builds the triangle pair `φ_a(λ) = (1 - cos aλ)/(π a λ²)`,
/// `C_a(t) = (1 - |t|/a)₊`.
pub fn make_triangle_pair<T: Real>(a: T) -> Result<ClassAMember<T>> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::param(format!("triangle width must be positive, got {a}")));
    }
    Ok(ClassAMember {
        a,
        convolved_with: None,
    })
}

/// Convolves the density of `member` with that of `other`.
///
/// The covariance of the result is `C_a(t)·C_other(t)`, still supported on
/// `[-a, a]`. Its density is evaluated as the cosine transform of that compact
/// covariance, which equals the frequency-domain convolution.
pub fn convolve_class_a<T: Real>(
    member: ClassAMember<T>,
    other: SpectrumModel<T>,
) -> Result<ClassAMember<T>> {
    if member.convolved_with.is_some() {
        return Err(Error::param("class-A member is already convolved"));
    }
    let v = other.variance();
    if !v.is_finite() || v < T::zero() {
        return Err(Error::param(format!("convolution partner has invalid variance {v}")));
    }
    let out = ClassAMember {
        a: member.a,
        convolved_with: Some(Box::new(other)),
    };
    // Cosine-transform convergence at the density peak.
    let tol = T::lit(1e-7) * (out.variance() * out.a).max(T::min_positive_value());
    trapezoid_checked(
        |t| out.covariance(t),
        T::zero(),
        out.a,
        QUADRATURE_NODES,
        tol,
        "class-A convolution",
    )?;
    Ok(out)
}

/// Density of the simulation model: the printed two-bump formula `g`,
/// reflected to be even (`g(|λ|)`) and cut off beyond `|λ| = 2π`.
pub fn eval_simulation_psd<T: Real>(lambda: T) -> T {
    let l = lambda.abs();
    let pi = T::PI();
    if l > T::lit(2.0) * pi {
        return T::zero();
    }
    let c = T::lit(2.0) * T::SQRT_2() / pi;
    let b1 = T::lit(4.0) * l - T::lit(3.0) * pi;
    let b2 = T::lit(4.0) * l - T::lit(7.0) * pi;
    c * (T::lit(4.0) * (-T::lit(8.0) * b1 * b1 / pi).exp()
        + T::lit(3.0) * (-T::lit(9.0) * b2 * b2 / (T::lit(2.0) * pi)).exp())
}

/// Closed-form covariance of the simulation model.
///
/// Each bump is a Gaussian of unit mass (`σ² = π/256` at `3π/4`, `σ² = π/144`
/// at `7π/4`), so `C(t) = 2[e^{-πt²/512} cos(3πt/4) + e^{-πt²/288} cos(7πt/4)]`.
/// The mass cut off beyond `2π` is below `1e-7`, i.e. `3e-8` of the variance.
fn simulation_covariance<T: Real>(t: T) -> T {
    let pi = T::PI();
    let t2 = t * t;
    T::lit(2.0)
        * ((-pi * t2 / T::lit(512.0)).exp() * (T::lit(0.75) * pi * t).cos()
            + (-pi * t2 / T::lit(288.0)).exp() * (T::lit(1.75) * pi * t).cos())
}

impl<T: Real> ClassAMember<T> {
    pub fn a(&self) -> T {
        self.a
    }

    pub fn convolved_with(&self) -> Option<&SpectrumModel<T>> {
        self.convolved_with.as_deref()
    }

    fn triangle(&self, t: T) -> T {
        let r = T::one() - t.abs() / self.a;
        r.max(T::zero())
    }

    pub fn covariance(&self, t: T) -> T {
        let base = self.triangle(t);
        match &self.convolved_with {
            Some(o) if base > T::zero() => base * o.covariance(t),
            _ => base,
        }
    }

    pub fn variance(&self) -> T {
        match &self.convolved_with {
            None => T::one(),
            Some(o) => o.variance(),
        }
    }

    pub fn psd(&self, lambda: T) -> T {
        match &self.convolved_with {
            None => {
                let x = self.a * lambda;
                let scale = self.a / (T::lit(2.0) * T::PI());
                if x.abs() < T::lit(TRIANGLE_SERIES_CUTOFF) {
                    // 2(1 - cos x)/x² = 1 - x²/12 + O(x⁴)
                    scale * (T::one() - x * x / T::lit(12.0))
                } else {
                    let s = (x / T::lit(2.0)).sin();
                    T::lit(2.0) * s * s / (T::PI() * self.a * lambda * lambda)
                }
            }
            Some(_) => {
                let f = |t: T| self.covariance(t) * (lambda * t).cos();
                trapezoid(f, T::zero(), self.a, QUADRATURE_NODES) / T::PI()
            }
        }
    }

    /// `∫_{|λ|>L} φ(λ) cos(λt) dλ` from the large-`λ` expansion of the
    /// density, which is exact for the bare triangle.
    fn psd_tail_cosine(&self, cutoff: T, t: T) -> T {
        // π φ(λ) ≈ (A + B cos aλ)/λ² - D sin(aλ)/λ³ with A = -C'(0+),
        // B = C'(a-), D = C''(a-).
        let (a_coef, b_coef, d_coef) = match &self.convolved_with {
            None => (T::one() / self.a, -T::one() / self.a, T::zero()),
            Some(_) => {
                // One-sided differences at the two kinks.
                let c = |t: T| self.covariance(t);
                let (two, three, four, five) = (T::lit(2.0), T::lit(3.0), T::lit(4.0), T::lit(5.0));
                let e = self.a * T::lit(1e-4);
                let d0 = (-three * c(T::zero()) + four * c(e) - c(two * e)) / (two * e);
                let da = (three * c(self.a) - four * c(self.a - e) + c(self.a - two * e)) / (two * e);
                let e2 = self.a * T::lit(1e-3);
                let dda = (two * c(self.a) - five * c(self.a - e2) + four * c(self.a - two * e2)
                    - c(self.a - three * e2))
                    / (e2 * e2);
                (-d0, da, dda)
            }
        };
        let two = T::lit(2.0);
        let sum_minus = self.a - t;
        let sum_plus = self.a + t;
        let cos_part = a_coef * cosine_over_square_tail(t, cutoff)
            + b_coef / two
                * (cosine_over_square_tail(sum_minus, cutoff) + cosine_over_square_tail(sum_plus, cutoff));
        let sin_part = d_coef / two
            * (sine_over_cube_tail(sum_plus, cutoff) + sine_over_cube_tail(sum_minus, cutoff));
        two / T::PI() * (cos_part - sin_part)
    }

    pub fn model(&self) -> SpectrumModel<T> {
        SpectrumModel::ClassA(self.clone())
    }
}

impl<T: Real> From<ClassAMember<T>> for SpectrumModel<T> {
    fn from(m: ClassAMember<T>) -> Self {
        SpectrumModel::ClassA(m)
    }
}

impl<T: Real> SpectrumModel<T> {
    pub fn gaussian(width: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::param(format!("gaussian width must be positive, got {width}")));
        }
        Ok(SpectrumModel::Gaussian { width })
    }

    pub fn scaled(self, factor: T) -> Result<Self> {
        if !(factor >= T::zero()) || !factor.is_finite() {
            return Err(Error::param(format!("scale factor must be non-negative, got {factor}")));
        }
        Ok(SpectrumModel::Scaled {
            factor,
            inner: Box::new(self),
        })
    }

    /// Rescales so that `covariance(0) == variance`.
    pub fn with_variance(self, variance: T) -> Result<Self> {
        let v = self.variance();
        if !(v > T::zero()) {
            return Err(Error::param("cannot rescale a zero-variance model"));
        }
        self.scaled(variance / v)
    }

    pub fn sum(parts: Vec<Self>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::param("sum of zero models"));
        }
        Ok(SpectrumModel::Sum(parts))
    }

    pub fn psd(&self, lambda: T) -> T {
        match self {
            SpectrumModel::Simulation => eval_simulation_psd(lambda),
            SpectrumModel::ClassA(m) => m.psd(lambda),
            SpectrumModel::Gaussian { width } => {
                let z = lambda / *width;
                (-z * z / T::lit(2.0)).exp() / (*width * (T::lit(2.0) * T::PI()).sqrt())
            }
            SpectrumModel::Scaled { factor, inner } => *factor * inner.psd(lambda),
            SpectrumModel::Sum(parts) => parts.iter().map(|p| p.psd(lambda)).sum(),
        }
    }

    pub fn covariance(&self, t: T) -> T {
        match self {
            SpectrumModel::Simulation => simulation_covariance(t),
            SpectrumModel::ClassA(m) => m.covariance(t),
            SpectrumModel::Gaussian { width } => {
                let z = *width * t;
                (-z * z / T::lit(2.0)).exp()
            }
            SpectrumModel::Scaled { factor, inner } => *factor * inner.covariance(t),
            SpectrumModel::Sum(parts) => parts.iter().map(|p| p.covariance(t)).sum(),
        }
    }

    /// `C(0)`.
    pub fn variance(&self) -> T {
        self.covariance(T::zero())
    }

    /// `λ₀` when the density vanishes outside `[-λ₀, λ₀]`.
    pub fn band(&self) -> Option<T> {
        match self {
            SpectrumModel::Simulation => Some(T::lit(2.0) * T::PI()),
            SpectrumModel::ClassA(_) | SpectrumModel::Gaussian { .. } => None,
            SpectrumModel::Scaled { inner, .. } => inner.band(),
            SpectrumModel::Sum(parts) => parts
                .iter()
                .map(|p| p.band())
                .try_fold(T::zero(), |acc, b| b.map(|b| acc.max(b))),
        }
    }

    /// `s` when the covariance vanishes outside `[-s, s]`.
    pub fn covariance_support(&self) -> Option<T> {
        match self {
            SpectrumModel::ClassA(m) => Some(m.a),
            SpectrumModel::Simulation | SpectrumModel::Gaussian { .. } => None,
            SpectrumModel::Scaled { inner, .. } => inner.covariance_support(),
            SpectrumModel::Sum(parts) => parts
                .iter()
                .map(|p| p.covariance_support())
                .try_fold(T::zero(), |acc, b| b.map(|b| acc.max(b))),
        }
    }

    /// Flattens scalings and sums into weighted leaf models.
    pub fn terms(&self) -> Vec<(T, &SpectrumModel<T>)> {
        let mut out = Vec::new();
        self.collect_terms(T::one(), &mut out);
        out
    }

    fn collect_terms<'a>(&'a self, weight: T, out: &mut Vec<(T, &'a SpectrumModel<T>)>) {
        match self {
            SpectrumModel::Scaled { factor, inner } => inner.collect_terms(weight * *factor, out),
            SpectrumModel::Sum(parts) => {
                for p in parts {
                    p.collect_terms(weight, out);
                }
            }
            leaf => out.push((weight, leaf)),
        }
    }

    /// Symmetric frequency window `[-W, W]` used for quadrature of a leaf.
    pub fn quadrature_window(&self) -> T {
        match self {
            SpectrumModel::Simulation => T::lit(2.0) * T::PI(),
            SpectrumModel::ClassA(m) => T::lit(TRIANGLE_WINDOW) / m.a,
            SpectrumModel::Gaussian { width } => T::lit(GAUSSIAN_WINDOW) * *width,
            _ => self
                .terms()
                .iter()
                .map(|(_, m)| m.quadrature_window())
                .fold(T::zero(), T::max),
        }
    }

    /// Analytic `∫_{|λ|>W} φ(λ) cos(λt) dλ` beyond a leaf's window.
    fn psd_tail_cosine(&self, cutoff: T, t: T) -> T {
        match self {
            SpectrumModel::ClassA(m) => m.psd_tail_cosine(cutoff, t),
            _ => T::zero(),
        }
    }

    /// Parses `sim5`, `triangle:a=<x>`, `triangle-conv:a=<x>,other=<id>`,
    /// `gauss:width=<x>`, `scaled:k=<x>,model=<id>` and `sum:<id>|<id>|...`.
    pub fn parse(id: &str) -> Result<Self> {
        let id = id.trim();
        let (head, rest) = id.split_once(':').unwrap_or((id, ""));
        let num = |key: &str, s: &str| -> Result<T> {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::param(format!("model `{id}`: bad number `{s}` for `{key}`")))?;
            Ok(T::lit(v))
        };
        match head {
            "sim5" if rest.is_empty() => Ok(SpectrumModel::Simulation),
            "triangle" => {
                let a = rest
                    .strip_prefix("a=")
                    .ok_or_else(|| Error::param(format!("model `{id}`: expected a=<x>")))?;
                Ok(make_triangle_pair(num("a", a)?)?.into())
            }
            "triangle-conv" => {
                let (a, other) = rest
                    .strip_prefix("a=")
                    .and_then(|r| r.split_once(",other="))
                    .ok_or_else(|| Error::param(format!("model `{id}`: expected a=<x>,other=<id>")))?;
                let member = make_triangle_pair(num("a", a)?)?;
                Ok(convolve_class_a(member, Self::parse(other)?)?.into())
            }
            "gauss" => {
                let w = rest
                    .strip_prefix("width=")
                    .ok_or_else(|| Error::param(format!("model `{id}`: expected width=<x>")))?;
                Self::gaussian(num("width", w)?)
            }
            "scaled" => {
                let (k, inner) = rest
                    .strip_prefix("k=")
                    .and_then(|r| r.split_once(",model="))
                    .ok_or_else(|| Error::param(format!("model `{id}`: expected k=<x>,model=<id>")))?;
                Self::parse(inner)?.scaled(num("k", k)?)
            }
            "sum" => Self::sum(rest.split('|').map(Self::parse).collect::<Result<_>>()?),
            _ => Err(Error::param(format!("unknown spectrum model `{id}`"))),
        }
    }
}

impl<T: Real> fmt::Display for SpectrumModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumModel::Simulation => write!(f, "sim5"),
            SpectrumModel::ClassA(m) => match &m.convolved_with {
                None => write!(f, "triangle:a={}", m.a),
                Some(o) => write!(f, "triangle-conv:a={},other={o}", m.a),
            },
            SpectrumModel::Gaussian { width } => write!(f, "gauss:width={width}"),
            SpectrumModel::Scaled { factor, inner } => write!(f, "scaled:k={factor},model={inner}"),
            SpectrumModel::Sum(parts) => {
                write!(f, "sum:")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// `C(t) = ∫ φ(λ) cos(λt) dλ` by trapezoid quadrature.
///
/// Each leaf is integrated over its own window with [`QUADRATURE_NODES`]
/// panels and checked against one node doubling; the slowly decaying tails of
/// class-A densities are added in closed form.
pub fn covariance_from_psd<T: Real>(model: &SpectrumModel<T>, t: T) -> Result<T> {
    let mut total = T::zero();
    for (weight, leaf) in model.terms() {
        if weight == T::zero() {
            continue;
        }
        let w = leaf.quadrature_window();
        let scale = leaf.variance().abs().max(T::one());
        let tol = T::lit(1e-7) * scale;
        let body = trapezoid_checked(
            |l| leaf.psd(l) * (l * t).cos(),
            -w,
            w,
            QUADRATURE_NODES,
            tol,
            "covariance_from_psd",
        )?;
        total = total + weight * (body.value + leaf.psd_tail_cosine(w, t));
    }
    Ok(total)
}

/// Shannon interpolation `Σ_{|n|≤N} C(nT) sinc(π(u - nT)/T)`, with
/// `sinc(0) = 1`. `samples[k]` holds `C(kT)` for `k = 0..=N`; negative lags use
/// evenness.
pub fn sinc_reconstruct<T: Real>(samples: &[T], spacing: T, u: T, truncation: usize) -> Result<T> {
    if truncation == 0 || samples.len() < truncation + 1 {
        return Err(Error::param(format!(
            "sinc reconstruction needs {} samples, got {}",
            truncation + 1,
            samples.len()
        )));
    }
    if !(spacing > T::zero()) {
        return Err(Error::param("sample spacing must be positive"));
    }
    let n_max = truncation as i64;
    let mut sum = T::zero();
    for n in -n_max..=n_max {
        let c = samples[n.unsigned_abs() as usize];
        let x = T::PI() * (u / spacing - T::lit(n as f64));
        let s = if x == T::zero() { T::one() } else { x.sin() / x };
        sum = sum + c * s;
    }
    Ok(sum)
}
