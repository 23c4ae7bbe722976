//! Renewal sampling schemes with a minimum inter-sample spacing.
//!
//! A scheme is a spacing law supported on `[d, ∞)`. From it we derive the
//! mean intensity `β`, the characteristic function `f′(λ) = E[e^{iλ·spacing}]`,
//! the renewal density `h(u) = Σ_n f^{(n)}(|u|)` and the reduced covariance
//! density `f_c(u) = β(h(u) - β)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::quadrature::trapezoid_samples;
use crate::rng::{Seed, StreamRole};
use crate::special::{ln_gamma, regularized_gamma_p};
use crate::{Error, Real, Result};

/// Iterated convolution stops once the next term's mass on the grid is below this.
pub const RENEWAL_TERM_MASS: f64 = 1e-10;

/// Default grid step as a fraction of `d` (of the mean spacing when `d = 0`).
const DEFAULT_STEP_FRACTION: f64 = 0.01;
/// Coarsest allowed grid step as a fraction of `d` (of the mean when `d = 0`).
const MAX_STEP_FRACTION: f64 = 0.1;
/// Default renewal window in mean spacings.
const DEFAULT_WINDOW_SPACINGS: f64 = 50.0;

/// Distribution of the excess `spacing - d`, or of the whole spacing for the
/// two-point law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpacingLaw<T> {
    /// `d + Exp(mean θ)`; `d = 0` is Poisson sampling.
    ShiftedExponential { theta: T },
    /// `gap1` with probability `p`, else `gap2` (absolute times, both `≥ d`).
    TwoPoint { p: T, gap1: T, gap2: T },
    /// `d + Gamma(shape, scale)`.
    ShiftedGamma { shape: T, scale: T },
    /// Every spacing equals `d`.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingScheme<T> {
    d: T,
    law: SpacingLaw<T>,
}

fn positive<T: Real>(name: &str, v: T) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative<T: Real>(name: &str, v: T) -> Result<T> {
    if v >= T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(format!("{name} must be non-negative and finite, got {v}")))
    }
}

impl<T: Real> SamplingScheme<T> {
    pub fn shifted_exponential(d: T, theta: T) -> Result<Self> {
        Ok(Self {
            d: non_negative("d", d)?,
            law: SpacingLaw::ShiftedExponential {
                theta: positive("theta", theta)?,
            },
        })
    }

    /// Poisson sampling with mean spacing `theta`.
    pub fn poisson(theta: T) -> Result<Self> {
        Self::shifted_exponential(T::zero(), theta)
    }

    /// Two-point law with absolute gaps.
    pub fn two_point(d: T, p: T, gap1: T, gap2: T) -> Result<Self> {
        let d = non_negative("d", d)?;
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::param(format!("p must lie in [0, 1], got {p}")));
        }
        let gap1 = positive("gap1", gap1)?;
        let gap2 = positive("gap2", gap2)?;
        if gap1 < d || gap2 < d {
            return Err(Error::param(format!(
                "two-point gaps ({gap1}, {gap2}) must be at least d = {d}"
            )));
        }
        Ok(Self {
            d,
            law: SpacingLaw::TwoPoint { p, gap1, gap2 },
        })
    }

    /// The two-point scheme with `P(d) = 0.68`, `P(2.1d) = 0.32`, whose
    /// characteristic-function contour does not divide the plane on
    /// `[-1.1π/d, 1.1π/d]`.
    pub fn theorem4(d: T) -> Result<Self> {
        let d = positive("d", d)?;
        Self::two_point(d, T::lit(0.68), d, T::lit(2.1) * d)
    }

    pub fn shifted_gamma(d: T, shape: T, scale: T) -> Result<Self> {
        Ok(Self {
            d: non_negative("d", d)?,
            law: SpacingLaw::ShiftedGamma {
                shape: positive("shape", shape)?,
                scale: positive("scale", scale)?,
            },
        })
    }

    pub fn deterministic(d: T) -> Result<Self> {
        Ok(Self {
            d: positive("d", d)?,
            law: SpacingLaw::Deterministic,
        })
    }

    /// Minimum spacing.
    pub fn d(&self) -> T {
        self.d
    }

    pub fn law(&self) -> SpacingLaw<T> {
        self.law
    }

    pub fn mean_spacing(&self) -> T {
        match self.law {
            SpacingLaw::ShiftedExponential { theta } => self.d + theta,
            SpacingLaw::TwoPoint { p, gap1, gap2 } => p * gap1 + (T::one() - p) * gap2,
            SpacingLaw::ShiftedGamma { shape, scale } => self.d + shape * scale,
            SpacingLaw::Deterministic => self.d,
        }
    }

    /// Mean intensity `β = 1 / E[spacing]`.
    pub fn beta(&self) -> T {
        T::one() / self.mean_spacing()
    }

    /// Whether the spacing law has a density (otherwise it is atomic).
    pub fn has_density(&self) -> bool {
        matches!(
            self.law,
            SpacingLaw::ShiftedExponential { .. } | SpacingLaw::ShiftedGamma { .. }
        )
    }

    pub fn is_poisson(&self) -> bool {
        matches!(self.law, SpacingLaw::ShiftedExponential { .. }) && self.d == T::zero()
    }

    /// Multiplier `l` such that the spacing density is positive on `[l·d, ∞)`;
    /// `None` for atomic laws.
    pub fn positivity_threshold(&self) -> Option<T> {
        self.has_density().then(T::one)
    }

    /// Largest spacing with positive probability, if bounded.
    pub fn max_spacing(&self) -> Option<T> {
        match self.law {
            SpacingLaw::TwoPoint { p, gap1, gap2 } => Some(if p == T::one() {
                gap1
            } else if p == T::zero() {
                gap2
            } else {
                gap1.max(gap2)
            }),
            SpacingLaw::Deterministic => Some(self.d),
            _ => None,
        }
    }

    /// `f′(λ) = E[e^{iλ·spacing}]`.
    pub fn spacing_charfn(&self, lambda: T) -> Complex<T> {
        let shift = Complex::new(T::zero(), lambda * self.d).exp();
        match self.law {
            SpacingLaw::ShiftedExponential { theta } => {
                shift / Complex::new(T::one(), -theta * lambda)
            }
            SpacingLaw::TwoPoint { p, gap1, gap2 } => {
                Complex::new(T::zero(), lambda * gap1).exp() * p
                    + Complex::new(T::zero(), lambda * gap2).exp() * (T::one() - p)
            }
            SpacingLaw::ShiftedGamma { shape, scale } => {
                shift * Complex::new(T::one(), -scale * lambda).powf(-shape)
            }
            SpacingLaw::Deterministic => shift,
        }
    }

    /// Characteristic function of the `k`-step spacing `t_{m+k} - t_m`.
    pub fn k_step_charfn(&self, k: u32, lambda: T) -> Complex<T> {
        self.spacing_charfn(lambda).powu(k)
    }

    /// One spacing drawn from the law.
    pub fn draw_spacing<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self.law {
            SpacingLaw::ShiftedExponential { theta } => {
                // Inverse CDF; 1 - U lies in (0, 1].
                let u = T::sample_unit(rng);
                self.d - theta * (T::one() - u).ln()
            }
            SpacingLaw::TwoPoint { p, gap1, gap2 } => {
                if T::sample_unit(rng) < p {
                    gap1
                } else {
                    gap2
                }
            }
            SpacingLaw::ShiftedGamma { shape, scale } => self.d + T::sample_gamma(rng, shape, scale),
            SpacingLaw::Deterministic => self.d,
        }
    }

    /// `n` sampling times starting at `t_1 = 0`, drawn from the
    /// [`StreamRole::Times`] stream of `seed`.
    pub fn draw_times(&self, n: usize, seed: Seed) -> Result<Vec<T>> {
        if n == 0 {
            return Err(Error::param("need at least one sampling time"));
        }
        let mut rng = seed.rng(StreamRole::Times);
        let mut times = Vec::with_capacity(n);
        let mut t = T::zero();
        times.push(t);
        for _ in 1..n {
            t = t + self.draw_spacing(&mut rng);
            times.push(t);
        }
        Ok(times)
    }

    /// Law of the `k`-step spacing `t_{m+k} - t_m`.
    pub fn k_step_law(&self, k: usize) -> KStepLaw<T> {
        let kk = T::from_usize_lossy(k);
        match self.law {
            SpacingLaw::ShiftedExponential { theta } => KStepLaw::ShiftedGamma {
                shift: kk * self.d,
                shape: kk,
                scale: theta,
            },
            SpacingLaw::ShiftedGamma { shape, scale } => KStepLaw::ShiftedGamma {
                shift: kk * self.d,
                shape: kk * shape,
                scale,
            },
            SpacingLaw::Deterministic => KStepLaw::Atoms(vec![(kk * self.d, T::one())]),
            SpacingLaw::TwoPoint { p, gap1, gap2 } => {
                let mut atoms = Vec::with_capacity(k + 1);
                for j in 0..=k {
                    // j draws of gap2, k - j of gap1.
                    let mass = (ln_binomial::<T>(k, j)
                        + pow_ln(p, k - j)
                        + pow_ln(T::one() - p, j))
                    .exp();
                    if mass > T::zero() {
                        let loc = T::from_usize_lossy(k - j) * gap1 + T::from_usize_lossy(j) * gap2;
                        atoms.push((loc, mass));
                    }
                }
                KStepLaw::Atoms(atoms)
            }
        }
    }

    /// Spacing CDF.
    fn spacing_cdf(&self, x: T) -> T {
        let z = x - self.d;
        if z < T::zero() {
            return T::zero();
        }
        match self.law {
            SpacingLaw::ShiftedExponential { theta } => -(-z / theta).exp_m1(),
            SpacingLaw::ShiftedGamma { shape, scale } => regularized_gamma_p(shape, z / scale),
            SpacingLaw::TwoPoint { .. } | SpacingLaw::Deterministic => {
                unreachable!("atomic laws have no cell discretization")
            }
        }
    }

    /// Default `(u_max, grid_step)` for [`Self::renewal_density`].
    pub fn default_renewal_grid(&self) -> (T, T) {
        let mean = self.mean_spacing();
        let unit = if self.d > T::zero() { self.d } else { mean };
        (T::lit(DEFAULT_WINDOW_SPACINGS) * mean, T::lit(DEFAULT_STEP_FRACTION) * unit)
    }

    /// Renewal density on `[0, u_max]`.
    ///
    /// For laws with a density, each spacing is discretized into cell masses
    /// centred on the grid nodes and `h` is accumulated from iterated
    /// convolutions (FFT), stopping when the next term's mass falls below
    /// [`RENEWAL_TERM_MASS`]. Atomic laws return their renewal measure as a
    /// list of atoms. Poisson sampling returns the exact `h ≡ β`.
    pub fn renewal_density(&self, u_max: T, grid_step: T) -> Result<RenewalDensity<T>> {
        let unit = if self.d > T::zero() { self.d } else { self.mean_spacing() };
        let limit = unit * T::lit(MAX_STEP_FRACTION);
        if !(grid_step > T::zero()) || grid_step > limit {
            return Err(Error::Resolution {
                what: "renewal grid step",
                got: grid_step.as_f64(),
                limit: limit.as_f64(),
            });
        }
        if !(u_max > self.d) || !(u_max > grid_step) {
            return Err(Error::param(format!("u_max = {u_max} must exceed d = {}", self.d)));
        }
        if self.has_density() {
            self.renewal_table(u_max, grid_step).map(RenewalDensity::Table)
        } else {
            Ok(RenewalDensity::Atoms(self.renewal_atoms(u_max)))
        }
    }

    pub fn default_renewal_density(&self) -> Result<RenewalDensity<T>> {
        let (u_max, step) = self.default_renewal_grid();
        self.renewal_density(u_max, step)
    }

    fn renewal_table(&self, u_max: T, step: T) -> Result<RenewalDensityTable<T>> {
        let nodes = (u_max / step).floor().to_usize().unwrap_or(0) + 1;
        let beta = self.beta();
        if self.is_poisson() {
            return Ok(RenewalDensityTable {
                step,
                values: vec![beta; nodes],
                d: self.d,
                beta,
                terms_used: 0,
                tail_bound: T::zero(),
            });
        }
        let half = step * T::lit(0.5);
        let node = |j: usize| step * T::from_usize_lossy(j);
        let cell: Vec<T> = (0..nodes)
            .map(|j| {
                let lo = (node(j) - half).max(T::zero());
                (self.spacing_cdf(node(j) + half) - self.spacing_cdf(lo)).max(T::zero())
            })
            .collect();
        // First node carrying spacing mass; the n-fold term starts at n times it.
        let first = cell.iter().position(|&m| m > T::zero()).unwrap_or(nodes);

        let len = (2 * nodes).next_power_of_two();
        let mut planner = FftPlanner::<T>::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let zero = Complex::new(T::zero(), T::zero());
        let mut kernel: Vec<Complex<T>> = cell.iter().map(|&m| Complex::new(m, T::zero())).collect();
        kernel.resize(len, zero);
        fwd.process(&mut kernel);
        let norm = T::one() / T::from_usize_lossy(len);

        let mut total = cell.clone();
        let mut term = cell.clone();
        let mut terms_used = 1usize;
        let mut tail_bound;
        let mut buf = vec![zero; len];
        loop {
            for (b, &v) in buf.iter_mut().zip(term.iter()) {
                *b = Complex::new(v, T::zero());
            }
            for b in buf[nodes..].iter_mut() {
                *b = zero;
            }
            fwd.process(&mut buf);
            for (b, k) in buf.iter_mut().zip(&kernel) {
                *b = *b * *k;
            }
            inv.process(&mut buf);
            let start = first.saturating_mul(terms_used + 1).min(nodes);
            for (j, v) in term.iter_mut().enumerate() {
                *v = if j < start {
                    T::zero()
                } else {
                    (buf[j].re * norm).max(T::zero())
                };
            }
            let mass: T = term.iter().copied().sum();
            tail_bound = mass;
            if mass < T::lit(RENEWAL_TERM_MASS) {
                break;
            }
            for (t, &v) in total.iter_mut().zip(&term) {
                *t = *t + v;
            }
            terms_used += 1;
            if terms_used > 100_000 {
                return Err(Error::numerical("renewal_density", "iterated convolution did not converge"));
            }
        }
        let values = total.into_iter().map(|m| m / step).collect();
        Ok(RenewalDensityTable {
            step,
            values,
            d: self.d,
            beta,
            terms_used,
            tail_bound,
        })
    }

    fn renewal_atoms(&self, u_max: T) -> RenewalAtoms<T> {
        let beta = self.beta();
        let (p, gap1, gap2) = match self.law {
            SpacingLaw::TwoPoint { p, gap1, gap2 } => (p, gap1, gap2),
            _ => (T::one(), self.d, self.d),
        };
        let q = T::one() - p;
        let min_gap = gap1.min(gap2);
        let mut merged: BTreeMap<u64, (T, T)> = BTreeMap::new();
        let mut n = 1usize;
        let mut tail_bound = T::zero();
        while T::from_usize_lossy(n) * min_gap <= u_max {
            // Binomial(n, 1 - p) count of gap2 draws.
            let mut mass_in_window = T::zero();
            let mut coef = p.powi(n as i32);
            for k in 0..=n {
                if k > 0 {
                    coef = if p == T::zero() {
                        if k == n { T::one() } else { T::zero() }
                    } else {
                        coef * T::from_usize_lossy(n - k + 1) / T::from_usize_lossy(k) * q / p
                    };
                }
                if coef == T::zero() {
                    continue;
                }
                let loc = T::from_usize_lossy(n - k) * gap1 + T::from_usize_lossy(k) * gap2;
                if loc > u_max {
                    continue;
                }
                mass_in_window = mass_in_window + coef;
                // Key on the location rounded to ~1e-9 relative so coincident
                // atoms merge.
                let key = (loc.as_f64() * 1e9).round() as u64;
                let e = merged.entry(key).or_insert((loc, T::zero()));
                e.1 = e.1 + coef;
            }
            tail_bound = mass_in_window;
            n += 1;
        }
        RenewalAtoms {
            atoms: merged.into_values().collect(),
            u_max,
            beta,
            terms_used: n - 1,
            tail_bound,
        }
    }

    /// Checks that `f_c + β² > 0` everywhere and that `f_c/(f_c + β²)` is
    /// integrable, on the default renewal grid.
    pub fn check_assumption_b1(&self) -> Result<B1Verdict<T>> {
        let density = self.default_renewal_density()?;
        let table = match density {
            RenewalDensity::Atoms(a) => {
                let first = a.atoms.first().map(|x| x.0).unwrap_or(self.d);
                let upper = if self.d > T::zero() { self.d } else { first };
                return Ok(B1Verdict::Violated {
                    witness: (T::zero(), upper),
                    reason: B1Failure::AtomicSpacing,
                });
            }
            RenewalDensity::Table(t) => t,
        };
        // f_c + β² = β h on the grid.
        if table.values.iter().any(|&h| !(h > T::zero())) {
            let first_pos = table.values.iter().position(|&h| h > T::zero());
            let upper = first_pos.map_or(table.u_max(), |j| table.node(j));
            return Ok(B1Verdict::Violated {
                witness: (T::zero(), upper),
                reason: B1Failure::ZeroRenewalDensity,
            });
        }
        let beta = table.beta;
        let ratio: Vec<T> = table
            .values
            .iter()
            .map(|&h| ((h - beta) / h).abs())
            .collect();
        let whole = trapezoid_samples(&ratio, table.step);
        let tail_start = ratio.len() * 3 / 4;
        let tail = trapezoid_samples(&ratio[tail_start..], table.step);
        if tail > T::lit(1e-3) * whole.max(T::one()) {
            return Ok(B1Verdict::Violated {
                witness: (table.node(tail_start), table.u_max()),
                reason: B1Failure::NotIntegrable,
            });
        }
        Ok(B1Verdict::Holds)
    }

    /// Parses `shifted-exp:d=<x>,theta=<y>`, `two-point:d=<x>,p=<p>,g1=<a>,g2=<b>`
    /// (gaps in multiples of `d`), `deterministic:d=<x>`,
    /// `shifted-gamma:d=<x>,shape=<k>,scale=<s>` and `poisson:theta=<y>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::param(format!("scheme `{spec}`: expected <family>:<key>=<value>,...")))?;
        let mut kv = BTreeMap::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::param(format!("scheme `{spec}`: bad item `{item}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::param(format!("scheme `{spec}`: bad number in `{item}`")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let mut take = |k: &str| {
            kv.remove(k)
                .map(T::lit)
                .ok_or_else(|| Error::param(format!("scheme `{spec}`: missing `{k}`")))
        };
        let scheme = match head {
            "shifted-exp" => Self::shifted_exponential(take("d")?, take("theta")?),
            "poisson" => Self::poisson(take("theta")?),
            "deterministic" => Self::deterministic(take("d")?),
            "shifted-gamma" => Self::shifted_gamma(take("d")?, take("shape")?, take("scale")?),
            "two-point" => {
                let d = take("d")?;
                let p = take("p")?;
                let (g1, g2) = (take("g1")?, take("g2")?);
                Self::two_point(d, p, g1 * d, g2 * d)
            }
            _ => Err(Error::param(format!("unknown scheme family `{head}`"))),
        }?;
        if let Some(k) = kv.keys().next() {
            return Err(Error::param(format!("scheme `{spec}`: unexpected key `{k}`")));
        }
        Ok(scheme)
    }
}

impl<T: Real> fmt::Display for SamplingScheme<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.d;
        match self.law {
            SpacingLaw::ShiftedExponential { theta } => write!(f, "shifted-exp:d={d},theta={theta}"),
            SpacingLaw::TwoPoint { p, gap1, gap2 } => {
                write!(f, "two-point:d={d},p={p},g1={},g2={}", gap1 / d, gap2 / d)
            }
            SpacingLaw::ShiftedGamma { shape, scale } => {
                write!(f, "shifted-gamma:d={d},shape={shape},scale={scale}")
            }
            SpacingLaw::Deterministic => write!(f, "deterministic:d={d}"),
        }
    }
}

/// `ln C(n, k)`.
fn ln_binomial<T: Real>(n: usize, k: usize) -> T {
    let f = |m: usize| ln_gamma(T::from_usize_lossy(m) + T::one());
    f(n) - f(k) - f(n - k)
}

/// `m · ln x`, with `0 · ln 0 = 0`.
fn pow_ln<T: Real>(x: T, m: usize) -> T {
    if m == 0 {
        T::zero()
    } else {
        T::from_usize_lossy(m) * x.ln()
    }
}

/// Distribution of a `k`-step spacing.
#[derive(Debug, Clone, PartialEq)]
pub enum KStepLaw<T> {
    /// `(location, probability)` pairs.
    Atoms(Vec<(T, T)>),
    /// `shift + Gamma(shape, scale)`; `shape = 0` is the point mass at `shift`.
    ShiftedGamma { shift: T, shape: T, scale: T },
}

/// Renewal density `h` tabulated on a uniform grid `u_j = j·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalDensityTable<T> {
    step: T,
    values: Vec<T>,
    d: T,
    beta: T,
    /// Number of convolution powers summed.
    pub terms_used: usize,
    /// Grid mass of the first omitted term.
    pub tail_bound: T,
}

impl<T: Real> RenewalDensityTable<T> {
    pub fn step(&self) -> T {
        self.step
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn node(&self, j: usize) -> T {
        self.step * T::from_usize_lossy(j)
    }

    pub fn u_max(&self) -> T {
        self.node(self.values.len() - 1)
    }

    /// `h(|u|)`: exactly zero below `d`, linear between nodes, `β` beyond the
    /// table.
    pub fn h(&self, u: T) -> T {
        let u = u.abs();
        if u < self.d {
            return T::zero();
        }
        let x = u / self.step;
        let j = x.floor();
        let ju = j.to_usize().unwrap_or(usize::MAX);
        if ju >= self.values.len() - 1 {
            return if ju == self.values.len() - 1 && x == j {
                self.values[ju]
            } else {
                self.beta
            };
        }
        let frac = x - j;
        if frac <= T::lit(1e-9) {
            return self.values[ju];
        }
        if frac >= T::one() - T::lit(1e-9) {
            return self.values[ju + 1];
        }
        self.values[ju] * (T::one() - frac) + self.values[ju + 1] * frac
    }

    /// `f_c(u) = β(h(|u|) - β)`; the atom `β δ₀` is [`Self::atom`].
    pub fn reduced_covariance_density(&self, u: T) -> T {
        self.beta * (self.h(u) - self.beta)
    }

    /// Mass of the atom at zero of the reduced covariance measure.
    pub fn atom(&self) -> T {
        self.beta
    }

    /// `∫_0^{u_max} h`, the expected number of renewals in `(0, u_max]`.
    pub fn integral(&self) -> T {
        trapezoid_samples(&self.values, self.step)
    }
}

/// Renewal measure of an atomic spacing law: `(location, mass)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalAtoms<T> {
    pub atoms: Vec<(T, T)>,
    pub u_max: T,
    pub beta: T,
    pub terms_used: usize,
    pub tail_bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RenewalDensity<T> {
    Table(RenewalDensityTable<T>),
    Atoms(RenewalAtoms<T>),
}

impl<T: Real> RenewalDensity<T> {
    pub fn beta(&self) -> T {
        match self {
            RenewalDensity::Table(t) => t.beta,
            RenewalDensity::Atoms(a) => a.beta,
        }
    }

    pub fn table(&self) -> Option<&RenewalDensityTable<T>> {
        match self {
            RenewalDensity::Table(t) => Some(t),
            RenewalDensity::Atoms(_) => None,
        }
    }

    /// `f_c(u)`; atomic renewal measures have no density.
    pub fn reduced_covariance_density(&self, u: T) -> Result<T> {
        match self {
            RenewalDensity::Table(t) => Ok(t.reduced_covariance_density(u)),
            RenewalDensity::Atoms(_) => Err(Error::Unsupported(
                "reduced covariance of an atomic spacing law has no density".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B1Failure {
    /// `h = 0` on an interval, so `f_c + β² = 0` there.
    ZeroRenewalDensity,
    /// Atomic spacing law: `h` has no density at all.
    AtomicSpacing,
    /// `f_c/(f_c + β²)` does not decay within the window.
    NotIntegrable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum B1Verdict<T> {
    Holds,
    Violated { witness: (T, T), reason: B1Failure },
}

impl<T> B1Verdict<T> {
    pub fn holds(&self) -> bool {
        matches!(self, B1Verdict::Holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn exp11() -> SamplingScheme<f64> {
        SamplingScheme::shifted_exponential(1.0, 1.0).unwrap()
    }

    #[test]
    fn deterministic_times() {
        let s = SamplingScheme::deterministic(1.0).unwrap();
        assert_eq!(s.draw_times(4, Seed::new(9)).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn shifted_exponential_spacing_moments() {
        let t = exp11().draw_times(10_001, Seed::new(1)).unwrap();
        let gaps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|&g| g >= 1.0));
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        // sd of Exp(1) is 1.
        assert!((mean - 2.0).abs() <= 3.0 / (gaps.len() as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn theorem4_mean_spacing() {
        let s = SamplingScheme::theorem4(1.0).unwrap();
        assert_relative_eq!(s.mean_spacing(), 1.352, epsilon = 1e-12);
        let n = 100_001;
        let t = s.draw_times(n, Seed::new(2)).unwrap();
        let mean = t[n - 1] / (n - 1) as f64;
        let sd = (0.68f64 * 0.32).sqrt() * 1.1;
        assert!((mean - 1.352).abs() <= 3.0 * sd / ((n - 1) as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn charfn_closed_forms() {
        let d = 1.0;
        let th4 = SamplingScheme::theorem4(d).unwrap();
        for &l in &[-2.0, 0.3, 1.7] {
            let expect = Complex::new(0.0, l * d).exp() * 0.68 + Complex::new(0.0, 2.1 * l * d).exp() * 0.32;
            let got = th4.spacing_charfn(l);
            assert_relative_eq!(got.re, expect.re, epsilon = 1e-14);
            assert_relative_eq!(got.im, expect.im, epsilon = 1e-14);
        }
        for s in [exp11(), th4, SamplingScheme::shifted_gamma(0.5, 2.0, 0.3).unwrap()] {
            let z = s.spacing_charfn(0.0);
            assert_relative_eq!(z.re, 1.0);
            assert_eq!(z.im, 0.0);
        }
        let l = PI / 2.1;
        assert_eq!(th4.k_step_charfn(2, l), th4.spacing_charfn(l).powu(2));
        assert_eq!(th4.k_step_charfn(1, l), th4.spacing_charfn(l));
    }

    #[test]
    fn charfn_monte_carlo() {
        // E[e^{iλX}] by averaging 10⁶ draws.
        let s = SamplingScheme::shifted_exponential(1.0, 0.8).unwrap();
        let mut rng = Seed::new(3).rng(StreamRole::Auxiliary);
        let draws: Vec<f64> = (0..1_000_000).map(|_| s.draw_spacing(&mut rng)).collect();
        let se = 3.0 / 1000.0;
        for &l in &[0.2, 0.7, 1.5, 3.0, 6.0] {
            let (re, im) = draws
                .iter()
                .fold((0.0, 0.0), |(a, b), &x| (a + (l * x).cos(), b + (l * x).sin()));
            let z = s.spacing_charfn(l);
            assert!((re / 1e6 - z.re).abs() < se && (im / 1e6 - z.im).abs() < se, "λ={l}");
        }
    }

    #[test]
    fn three_step_charfn_monte_carlo() {
        let s = exp11();
        let mut rng = Seed::new(4).rng(StreamRole::Auxiliary);
        let l = 0.7;
        let n = 1_000_000;
        let (mut re, mut im) = (0.0, 0.0);
        for _ in 0..n {
            let x: f64 = (0..3).map(|_| s.draw_spacing(&mut rng)).sum();
            re += (l * x).cos();
            im += (l * x).sin();
        }
        let z = s.k_step_charfn(3, l);
        let se = 1.0 / (n as f64).sqrt();
        assert!((re / n as f64 - z.re).abs() < 3.0 * se);
        assert!((im / n as f64 - z.im).abs() < 3.0 * se);
    }

    #[test]
    fn renewal_density_shifted_exponential() {
        let s = exp11();
        let RenewalDensity::Table(t) = s.default_renewal_density().unwrap() else {
            panic!("expected a table")
        };
        assert_eq!(t.h(0.5), 0.0);
        assert!(t.values()[..100].iter().all(|&v| v == 0.0));
        // Only the one-fold density reaches below 2d.
        assert_relative_eq!(t.h(1.5), (-0.5f64).exp(), epsilon = 1e-5);
        assert!((t.h(40.0) - 0.5).abs() <= 0.02 * 0.5);
        assert!(t.values().iter().all(|&v| v >= 0.0));
        assert!(t.terms_used > 10);
        assert!(t.tail_bound < RENEWAL_TERM_MASS);
        assert_relative_eq!(t.reduced_covariance_density(0.5), -0.25);
        assert!(t.reduced_covariance_density(95.0).abs() <= 0.02 * 0.25);
        assert_eq!(t.atom(), 0.5);
    }

    #[test]
    fn renewal_density_resolution_guard() {
        let s = exp11();
        assert!(matches!(s.renewal_density(100.0, 0.2), Err(Error::Resolution { .. })));
        assert!(matches!(s.renewal_density(0.5, 0.01), Err(Error::Parameter(_))));
    }

    #[test]
    fn renewal_density_matches_simulated_counts() {
        let s = SamplingScheme::shifted_gamma(0.5, 2.0, 0.4).unwrap();
        let (u_max, step) = (20.0, 0.005);
        let RenewalDensity::Table(t) = s.renewal_density(u_max, step).unwrap() else {
            panic!()
        };
        // E[N(0, u_max]] from simulated renewal sequences started at a renewal.
        let runs = 20_000;
        let mut rng = Seed::new(5).rng(StreamRole::Auxiliary);
        let counts: Vec<f64> = (0..runs)
            .map(|_| {
                let (mut x, mut k) = (0.0, 0.0);
                loop {
                    x += s.draw_spacing(&mut rng);
                    if x > u_max {
                        break k;
                    }
                    k += 1.0;
                }
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / runs as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let se = (var / runs as f64).sqrt();
        assert!((t.integral() - mean).abs() <= 3.0 * se, "{} vs {mean} ± {se}", t.integral());
    }

    #[test]
    fn atomic_renewal_measures() {
        let det = SamplingScheme::deterministic(1.0).unwrap();
        let RenewalDensity::Atoms(a) = det.renewal_density(5.0, 0.01).unwrap() else { panic!() };
        assert_eq!(a.atoms, vec![(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)]);
        let th4 = SamplingScheme::theorem4(1.0).unwrap();
        let RenewalDensity::Atoms(a) = th4.renewal_density(2.5, 0.01).unwrap() else { panic!() };
        let locs: Vec<f64> = a.atoms.iter().map(|x| x.0).collect();
        assert_eq!(locs.len(), 3);
        assert_relative_eq!(locs[0], 1.0);
        assert_relative_eq!(locs[1], 2.0);
        assert_relative_eq!(locs[2], 2.1);
        assert_relative_eq!(a.atoms[1].1, 0.68 * 0.68);
        assert!(th4.default_renewal_density().unwrap().reduced_covariance_density(0.5).is_err());
    }

    #[test]
    fn assumption_b1() {
        let v = exp11().check_assumption_b1().unwrap();
        assert_eq!(
            v,
            B1Verdict::Violated {
                witness: (0.0, 1.0),
                reason: B1Failure::ZeroRenewalDensity
            }
        );
        assert!(SamplingScheme::poisson(1.0f64).unwrap().check_assumption_b1().unwrap().holds());
        let det = SamplingScheme::deterministic(1.0f64).unwrap().check_assumption_b1().unwrap();
        assert!(matches!(det, B1Verdict::Violated { witness: (0.0, 1.0), .. }));
        let gamma0 = SamplingScheme::shifted_gamma(0.0f64, 2.0, 0.5).unwrap();
        assert!(gamma0.check_assumption_b1().unwrap().holds());
    }

    #[test]
    fn poisson_renewal_is_flat() {
        let s = SamplingScheme::poisson(2.0f64).unwrap();
        let t = s.default_renewal_density().unwrap();
        let t = t.table().unwrap();
        assert!(t.values().iter().all(|&h| h == 0.5));
        assert_eq!(t.reduced_covariance_density(3.3), 0.0);
    }

    #[test]
    fn k_step_laws() {
        let th4 = SamplingScheme::theorem4(1.0).unwrap();
        let KStepLaw::Atoms(a) = th4.k_step_law(3) else { panic!() };
        let total: f64 = a.iter().map(|x| x.1).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        assert_relative_eq!(a[0].1, 0.68f64.powi(3), epsilon = 1e-12);
        assert_relative_eq!(a[1].0, 4.1);
        assert_relative_eq!(a[1].1, 3.0 * 0.68 * 0.68 * 0.32, epsilon = 1e-12);
        assert_eq!(
            exp11().k_step_law(4),
            KStepLaw::ShiftedGamma { shift: 4.0, shape: 4.0, scale: 1.0 }
        );
        let det = SamplingScheme::deterministic(0.5).unwrap();
        assert_eq!(det.k_step_law(0), KStepLaw::Atoms(vec![(0.0, 1.0)]));
    }

    #[test]
    fn parse_and_display() {
        for id in [
            "shifted-exp:d=1,theta=1",
            "two-point:d=1,p=0.68,g1=1,g2=2.1",
            "deterministic:d=1",
            "shifted-gamma:d=1,shape=2,scale=0.5",
        ] {
            assert_eq!(SamplingScheme::<f64>::parse(id).unwrap().to_string(), id);
        }
        assert_eq!(
            SamplingScheme::<f64>::parse("two-point:d=1,p=0.68,g1=1,g2=2.1").unwrap(),
            SamplingScheme::theorem4(1.0).unwrap()
        );
        assert!(SamplingScheme::<f64>::parse("shifted-exp:d=1").is_err());
        assert!(SamplingScheme::<f64>::parse("shifted-exp:d=1,theta=0").is_err());
        assert!(SamplingScheme::<f64>::parse("two-point:d=1,p=0.5,g1=0.5,g2=2").is_err());
        assert!(SamplingScheme::<f64>::parse("shifted-exp:d=1,theta=1,zz=3").is_err());
    }

    #[test]
    fn single_precision_scheme() {
        let s = SamplingScheme::<f32>::shifted_exponential(1.0, 1.0).unwrap();
        let t = s.draw_times(100, Seed::new(1)).unwrap();
        assert!(t.windows(2).all(|w| w[1] - w[0] >= 1.0));
        assert!((s.spacing_charfn(0.0).re - 1.0).abs() < 1e-7);
    }
}
