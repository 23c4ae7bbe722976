//! Geometric alias-free certification.
//!
//! A renewal scheme is alias-free on a band `I` when the curve
//! `{f′(λ) : λ ∈ I}` leaves its complement in the complex plane connected.
//! The curve is traced adaptively, rasterized onto a square grid covering
//! `[-1.2, 1.2]²` and the complement is flood filled from the border.

use std::collections::{HashMap, HashSet, VecDeque};

use num_complex::Complex;
use rayon::prelude::*;

use crate::quadrature::{trapezoid_checked, QUADRATURE_NODES};
use crate::sampling::{KStepLaw, SamplingScheme};
use crate::special::regularized_gamma_p;
use crate::spectra::SpectrumModel;
use crate::{Error, Real, Result};

/// Half-width of the raster window.
pub const RASTER_HALF_WIDTH: f64 = 1.2;
/// Coarsest accepted raster cell.
pub const COARSEST_RESOLUTION: f64 = 1.0 / 64.0;
/// Fewest initial nodes accepted by [`trace_contour`].
pub const MIN_CONTOUR_POINTS: usize = 64;
/// Limit on bisection depth per initial interval.
const MAX_REFINE_DEPTH: u32 = 24;
/// Branches closer than this many cells without crossing mark a verdict
/// conservative.
const NEAR_CELLS: f64 = 2.0;

/// A closed frequency interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Band<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param(format!("band [{lo}, {hi}] must be finite and non-empty")));
        }
        Ok(Self { lo, hi })
    }

    /// `[-cπ/d, cπ/d]`.
    pub fn symmetric(c: T, d: T) -> Result<Self> {
        if !(d > T::zero()) {
            return Err(Error::param(format!("band in units of π/d needs d > 0, got d = {d}")));
        }
        if !(c > T::zero()) {
            return Err(Error::param(format!("band multiplier must be positive, got {c}")));
        }
        let w = c * T::PI() / d;
        Self::new(-w, w)
    }

    pub fn is_symmetric(&self) -> bool {
        self.lo == -self.hi
    }
}

/// Knobs of the certifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifierSettings<T> {
    /// Initial number of uniform λ nodes before refinement.
    pub points: usize,
    /// Raster cell size.
    pub resolution: T,
}

impl<T: Real> Default for CertifierSettings<T> {
    fn default() -> Self {
        Self {
            points: 1024,
            resolution: T::lit(1.0 / 128.0),
        }
    }
}

/// One traced point `(λ, f′(λ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint<T> {
    pub lambda: T,
    pub z: Complex<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourVerdict<T> {
    /// Band the polyline was traced over, if known.
    pub band: Option<Band<T>>,
    pub polyline: Vec<ContourPoint<T>>,
    pub divides_plane: bool,
    pub bounded_region_count: usize,
    pub resolution: T,
    /// Two distinct branches of the curve pass within two cells of each other
    /// without crossing there, so the raster may have closed a gap that is not
    /// closed in the plane.
    pub conservative: bool,
}

/// Traces `f′` over `band`, starting from `points` uniform nodes and bisecting
/// any interval whose image step exceeds `resolution / 2`.
pub fn trace_contour<T: Real>(
    scheme: &SamplingScheme<T>,
    band: Band<T>,
    points: usize,
    resolution: T,
) -> Result<Vec<ContourPoint<T>>> {
    if points < MIN_CONTOUR_POINTS {
        return Err(Error::param(format!(
            "contour needs at least {MIN_CONTOUR_POINTS} points, got {points}"
        )));
    }
    if !(resolution > T::zero()) {
        return Err(Error::param("resolution must be positive"));
    }
    let at = |lambda: T| ContourPoint {
        lambda,
        z: scheme.spacing_charfn(lambda),
    };
    let step = (band.hi - band.lo) / T::from_usize_lossy(points - 1);
    let node = |j: usize| {
        if j == points - 1 {
            band.hi
        } else {
            band.lo + step * T::from_usize_lossy(j)
        }
    };
    let limit = resolution * T::lit(0.5);
    let mut out = Vec::with_capacity(points);
    out.push(at(node(0)));
    for j in 1..points {
        let left = *out.last().expect("non-empty");
        refine(&at, left, at(node(j)), limit, 0, &mut out);
    }
    Ok(out)
}

fn refine<T: Real, F: Fn(T) -> ContourPoint<T>>(
    at: &F,
    left: ContourPoint<T>,
    right: ContourPoint<T>,
    limit: T,
    depth: u32,
    out: &mut Vec<ContourPoint<T>>,
) {
    if (right.z - left.z).norm() > limit && depth < MAX_REFINE_DEPTH {
        let mid = at((left.lambda + right.lambda) * T::lit(0.5));
        refine(at, left, mid, limit, depth + 1, out);
        refine(at, mid, right, limit, depth + 1, out);
    } else {
        out.push(right);
    }
}

struct Raster {
    n: usize,
    marked: Vec<bool>,
    /// Segment indices passing through each marked cell.
    visits: HashMap<usize, Vec<usize>>,
}

impl Raster {
    fn mark(&mut self, ix: i64, iy: i64, seg: usize) {
        let n = self.n as i64;
        if ix < 0 || iy < 0 || ix >= n || iy >= n {
            return;
        }
        let id = iy as usize * self.n + ix as usize;
        self.marked[id] = true;
        let v = self.visits.entry(id).or_default();
        if v.last() != Some(&seg) {
            v.push(seg);
        }
    }

    /// Marks every cell the segment passes through (grid units), including
    /// both side cells when it passes exactly through a corner.
    fn mark_segment(&mut self, p: (f64, f64), q: (f64, f64), seg: usize) {
        let (mut ix, mut iy) = (p.0.floor() as i64, p.1.floor() as i64);
        let (ex, ey) = (q.0.floor() as i64, q.1.floor() as i64);
        self.mark(ix, iy, seg);
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        let sx: i64 = if dx > 0.0 { 1 } else { -1 };
        let sy: i64 = if dy > 0.0 { 1 } else { -1 };
        let next = |c: i64, s: i64| if s > 0 { (c + 1) as f64 } else { c as f64 };
        let mut tx = if dx != 0.0 { (next(ix, sx) - p.0) / dx } else { f64::INFINITY };
        let mut ty = if dy != 0.0 { (next(iy, sy) - p.1) / dy } else { f64::INFINITY };
        let step_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
        let step_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
        let budget = (ex - ix).abs() + (ey - iy).abs() + 2;
        for _ in 0..budget {
            if ix == ex && iy == ey {
                break;
            }
            if tx < ty {
                ix += sx;
                tx += step_x;
            } else if ty < tx {
                iy += sy;
                ty += step_y;
            } else {
                self.mark(ix + sx, iy, seg);
                self.mark(ix, iy + sy, seg);
                ix += sx;
                iy += sy;
                tx += step_x;
                ty += step_y;
            }
            self.mark(ix, iy, seg);
        }
        self.mark(ex, ey, seg);
    }
}

/// Rasterizes `polyline` at cell size `resolution`, flood fills the
/// complement from the window border and counts the enclosed components.
pub fn divides_plane<T: Real>(polyline: &[ContourPoint<T>], resolution: T) -> Result<ContourVerdict<T>> {
    if polyline.is_empty() {
        return Err(Error::param("polyline is empty"));
    }
    let res = resolution.as_f64();
    if !(res > 0.0) || res > COARSEST_RESOLUTION {
        return Err(Error::Resolution {
            what: "raster cell size",
            got: res,
            limit: COARSEST_RESOLUTION,
        });
    }
    let n = (2.0 * RASTER_HALF_WIDTH / res).ceil() as usize;
    let to_grid = |z: Complex<T>| {
        (
            (z.re.as_f64() + RASTER_HALF_WIDTH) / res,
            (z.im.as_f64() + RASTER_HALF_WIDTH) / res,
        )
    };
    let mut raster = Raster {
        n,
        marked: vec![false; n * n],
        visits: HashMap::new(),
    };
    let pts: Vec<(f64, f64)> = polyline.iter().map(|p| to_grid(p.z)).collect();
    if pts.len() == 1 {
        raster.mark(pts[0].0.floor() as i64, pts[0].1.floor() as i64, 0);
    }
    for (k, w) in pts.windows(2).enumerate() {
        raster.mark_segment(w[0], w[1], k);
    }

    let bounded_region_count = count_enclosed(&raster.marked, n);
    let conservative = near_without_crossing(&raster, &pts);
    Ok(ContourVerdict {
        band: None,
        polyline: polyline.to_vec(),
        divides_plane: bounded_region_count > 0,
        bounded_region_count,
        resolution,
        conservative,
    })
}

/// Number of 4-connected unmarked components not reachable from the border.
fn count_enclosed(marked: &[bool], n: usize) -> usize {
    let mut seen = marked.to_vec();
    let mut queue = VecDeque::new();
    let neighbours = |id: usize| {
        let (x, y) = (id % n, id / n);
        let mut v = [usize::MAX; 4];
        if x > 0 {
            v[0] = id - 1;
        }
        if x + 1 < n {
            v[1] = id + 1;
        }
        if y > 0 {
            v[2] = id - n;
        }
        if y + 1 < n {
            v[3] = id + n;
        }
        v
    };
    let fill = |start: usize, seen: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        seen[start] = true;
        queue.push_back(start);
        while let Some(id) = queue.pop_front() {
            for nb in neighbours(id) {
                if nb != usize::MAX && !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
    };
    for i in 0..n {
        for id in [i, (n - 1) * n + i, i * n, i * n + n - 1] {
            if !seen[id] {
                fill(id, &mut seen, &mut queue);
            }
        }
    }
    let mut count = 0;
    for id in 0..n * n {
        if !seen[id] {
            count += 1;
            fill(id, &mut seen, &mut queue);
        }
    }
    count
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

fn segment_distance(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Looks for pairs of segments on distinct branches (separated by more than
/// a few cells of arclength) that come within [`NEAR_CELLS`] of each other
/// with no crossing between the two branches nearby. All lengths in cells.
fn near_without_crossing(raster: &Raster, pts: &[(f64, f64)]) -> bool {
    if pts.len() < 3 {
        return false;
    }
    let mut arc = vec![0.0; pts.len()];
    for k in 1..pts.len() {
        let (a, b) = (pts[k - 1], pts[k]);
        arc[k] = arc[k - 1] + ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    }
    let branch_gap = 3.0 * NEAR_CELLS;
    let reach = NEAR_CELLS.ceil() as i64;
    let n = raster.n as i64;
    let mut near = HashSet::new();
    let mut crossings = Vec::new();
    for (&id, segs) in &raster.visits {
        let (x, y) = ((id % raster.n) as i64, (id / raster.n) as i64);
        for oy in -reach..=reach {
            for ox in -reach..=reach {
                let (nx, ny) = (x + ox, y + oy);
                if nx < 0 || ny < 0 || nx >= n || ny >= n {
                    continue;
                }
                let Some(others) = raster.visits.get(&((ny * n + nx) as usize)) else {
                    continue;
                };
                for &i in segs {
                    for &j in others {
                        if j <= i || arc[j] - arc[i + 1] <= branch_gap {
                            continue;
                        }
                        if !near.insert((i, j)) {
                            continue;
                        }
                        let dist = segment_distance(pts[i], pts[i + 1], pts[j], pts[j + 1]);
                        // Coincident up to rounding counts as touching.
                        if dist <= 1e-9 {
                            crossings.push((i, j));
                        }
                    }
                }
            }
        }
    }
    near.iter().any(|&(i, j)| {
        let dist = segment_distance(pts[i], pts[i + 1], pts[j], pts[j + 1]);
        dist < NEAR_CELLS
            && !crossings.iter().any(|&(a, b)| {
                (arc[a] - arc[i]).abs() <= branch_gap && (arc[b] - arc[j]).abs() <= branch_gap
            })
    })
}

/// Traces and rasterizes the contour of `scheme` over `band`.
pub fn certify_band<T: Real>(
    scheme: &SamplingScheme<T>,
    band: Band<T>,
    settings: CertifierSettings<T>,
) -> Result<ContourVerdict<T>> {
    let polyline = trace_contour(scheme, band, settings.points, settings.resolution)?;
    let mut verdict = divides_plane(&polyline, settings.resolution)?;
    verdict.band = Some(band);
    Ok(verdict)
}

/// Result of [`max_aliasfree_band`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandSearch<T> {
    /// Largest `c` for which `[-cπ/d, cπ/d]` does not divide the plane.
    pub best: Option<T>,
    /// `(c, verdict)` for every scanned multiplier, in increasing `c`.
    pub verdicts: Vec<(T, ContourVerdict<T>)>,
}

/// Scans `c = step, 2·step, …, ≤ c_max` in parallel.
pub fn max_aliasfree_band<T: Real>(
    scheme: &SamplingScheme<T>,
    c_max: T,
    step: T,
    settings: CertifierSettings<T>,
) -> Result<BandSearch<T>> {
    if !(step > T::zero() && step <= c_max && c_max.is_finite()) {
        return Err(Error::param(format!("band search needs 0 < step ≤ c_max, got step {step}, c_max {c_max}")));
    }
    // A tiny allowance so c_max itself is scanned despite rounding.
    let count = ((c_max / step) * (T::one() + T::lit(1e-9))).floor().to_usize().unwrap_or(0);
    let verdicts = (1..=count)
        .into_par_iter()
        .map(|k| {
            let c = step * T::from_usize_lossy(k);
            let band = Band::symmetric(c, scheme.d())?;
            certify_band(scheme, band, settings).map(|v| (c, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = verdicts
        .iter()
        .filter(|(_, v)| !v.divides_plane)
        .map(|(c, _)| *c)
        .fold(None, |acc: Option<T>, c| Some(acc.map_or(c, |a| a.max(c))));
    Ok(BandSearch { best, verdicts })
}

/// Cells used for the time-domain expectation over a gamma-distributed
/// `n`-step spacing.
const SPACING_CELLS: usize = 8192;

/// Sampled covariance `r(n) = E[C(t_{m+n} - t_m)] = ∫ φ(λ) Re f′(λ)ⁿ dλ`.
///
/// Leaves with compactly supported covariance are integrated in the time
/// domain against the law of the `n`-step spacing (exactly zero once the
/// spacing cannot fall inside the support); all other leaves are integrated in
/// frequency over their quadrature window.
pub fn theoretical_sampled_covariance<T: Real>(
    model: &SpectrumModel<T>,
    scheme: &SamplingScheme<T>,
    n: usize,
) -> Result<T> {
    if n == 0 {
        return Ok(model.variance());
    }
    let mut total = T::zero();
    for (weight, leaf) in model.terms() {
        if weight == T::zero() {
            continue;
        }
        let part = match leaf.covariance_support() {
            Some(support) => time_domain_mean(leaf, scheme, n, support)?,
            None => frequency_domain_mean(leaf, scheme, n)?,
        };
        total = total + weight * part;
    }
    Ok(total)
}

/// `E[C(S_n)]` for a covariance vanishing beyond `support`.
fn time_domain_mean<T: Real>(
    leaf: &SpectrumModel<T>,
    scheme: &SamplingScheme<T>,
    n: usize,
    support: T,
) -> Result<T> {
    match scheme.k_step_law(n) {
        KStepLaw::Atoms(atoms) => Ok(atoms
            .iter()
            .filter(|(loc, _)| *loc < support)
            .map(|&(loc, mass)| mass * leaf.covariance(loc))
            .sum()),
        KStepLaw::ShiftedGamma { shift, shape, scale } => {
            if shift >= support {
                return Ok(T::zero());
            }
            // Riemann–Stieltjes midpoint sums against the CDF, checked by
            // doubling the cell count.
            let span = support - shift;
            let cdf = |x: T| regularized_gamma_p(shape, x / scale);
            let sum = |cells: usize| {
                let h = span / T::from_usize_lossy(cells);
                let mut acc = T::zero();
                let mut prev = T::zero();
                for k in 0..cells {
                    let hi = h * T::from_usize_lossy(k + 1);
                    let f = cdf(hi);
                    let mid = shift + h * (T::from_usize_lossy(k) + T::lit(0.5));
                    acc = acc + leaf.covariance(mid) * (f - prev);
                    prev = f;
                }
                acc
            };
            let coarse = sum(SPACING_CELLS);
            let fine = sum(2 * SPACING_CELLS);
            let tol = T::lit(1e-7) * leaf.variance().abs().max(T::one());
            if !((fine - coarse).abs() <= tol) {
                return Err(Error::numerical(
                    "theoretical_sampled_covariance",
                    format!("spacing-law quadrature changed by {:e}", (fine - coarse).abs()),
                ));
            }
            Ok(fine)
        }
    }
}

/// `∫ φ(λ) Re f′(λ)ⁿ dλ` over the leaf's quadrature window.
fn frequency_domain_mean<T: Real>(leaf: &SpectrumModel<T>, scheme: &SamplingScheme<T>, n: usize) -> Result<T> {
    let w = leaf.quadrature_window();
    // Keep at least 16 nodes per period of e^{iλ n·spacing}.
    let reach = scheme.max_spacing().unwrap_or_else(|| scheme.mean_spacing() * T::lit(4.0));
    let periods = (w * reach * T::from_usize_lossy(n) / T::PI()).to_usize().unwrap_or(0);
    let intervals = QUADRATURE_NODES.max((16 * periods).next_power_of_two());
    let tol = T::lit(1e-7) * leaf.variance().abs().max(T::one());
    let body = trapezoid_checked(
        |l| leaf.psd(l) * scheme.k_step_charfn(n as u32, l).re,
        -w,
        w,
        intervals,
        tol,
        "theoretical_sampled_covariance",
    )?;
    Ok(body.value)
}
