//! Direct sampling indicator functions on a rectangular grid.
//!
//! For a search point `x` the steering vector is `e^{−ik θ_n·x}` and the
//! correlation with a far-field row is `⟨ψ∞, steer⟩ = Σ_n ψ∞_n conj(steer_n)`.
//! Every map is divided by its grid maximum; all per-point sums run over
//! observations first, then incident directions, then frequencies.

pub mod io;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::forward::{observation_directions, FarFieldTensor};
use crate::scene::{distance, dot, Point, Scene};

/// Grid maxima below this produce an all-zero map.
const ZERO_MAP_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ImagingGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || !(x_min < x_max) || !(y_min < y_max) {
            return invalid("grid bounds must be finite with min < max");
        }
        if nx < 2 || ny < 2 {
            return invalid("grid needs at least 2 points per axis");
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        })
    }

    /// `[−h, h]²` with `n × n` points.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    /// Point `(ix, iy)`; row-major index is `iy * nx + ix`.
    pub fn point(&self, ix: usize, iy: usize) -> Point {
        [
            self.x_min + ix as f64 * self.dx(),
            self.y_min + iy as f64 * self.dy(),
        ]
    }

    pub fn point_at_index(&self, index: usize) -> Point {
        self.point(index % self.nx, index / self.nx)
    }

    /// Row-major grid index of the point closest to `p` (clamped to the grid).
    pub fn nearest_index(&self, p: Point) -> usize {
        let ix = ((p[0] - self.x_min) / self.dx()).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = ((p[1] - self.y_min) / self.dy()).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        iy * self.nx + ix
    }

    /// `f` at every grid point, row-major. Rows are evaluated in parallel.
    pub fn evaluate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(Point) -> f64 + Sync,
    {
        (0..self.ny)
            .into_par_iter()
            .flat_map_iter(|iy| {
                let f = &f;
                (0..self.nx).map(move |ix| f(self.point(ix, iy)))
            })
            .collect()
    }
}

/// A max-normalized map over an [`ImagingGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMap {
    grid: ImagingGrid,
    values: Vec<f64>,
    zero_map: bool,
}

impl IndicatorMap {
    /// Divides non-negative raw values by their maximum.
    pub fn from_raw(grid: ImagingGrid, raw: Vec<f64>) -> Result<Self> {
        if raw.len() != grid.len() {
            return invalid(format!("map has {} values, grid has {}", raw.len(), grid.len()));
        }
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return invalid("raw map values must be finite and non-negative");
        }
        let max = raw.iter().copied().fold(0.0, f64::max);
        if max < ZERO_MAP_FLOOR {
            return Ok(Self {
                grid,
                values: vec![0.0; raw.len()],
                zero_map: true,
            });
        }
        let values = raw.into_iter().map(|v| v / max).collect();
        Ok(Self {
            grid,
            values,
            zero_map: false,
        })
    }

    /// Takes already-normalized values as stored in a map file.
    pub fn from_normalized(grid: ImagingGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("map has {} values, grid has {}", values.len(), grid.len()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return invalid("normalized map values must lie in [0, 1]");
        }
        let zero_map = values.iter().all(|v| *v == 0.0);
        Ok(Self {
            grid,
            values,
            zero_map,
        })
    }

    pub fn grid(&self) -> &ImagingGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Set when the raw map was numerically zero everywhere.
    pub fn is_zero_map(&self) -> bool {
        self.zero_map
    }

    pub fn value_at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    /// Grid point and value of the global maximum (lowest index on ties).
    pub fn argmax(&self) -> (Point, f64) {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        (self.grid.point_at_index(i), v)
    }

    /// Largest value within `radius` of `center`, with its grid point.
    pub fn max_within(&self, center: Point, radius: f64) -> Option<(Point, f64)> {
        let mut best: Option<(Point, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            let p = self.grid.point_at_index(i);
            if distance(p, center) <= radius && best.is_none_or(|b| v > b.1) {
                best = Some((p, v));
            }
        }
        best
    }

    /// Largest value at points farther than `radius` from every center.
    pub fn artifact_level(&self, centers: &[Point], radius: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let p = self.grid.point_at_index(*i);
                centers.iter().all(|&c| distance(p, c) > radius)
            })
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    }
}

/// `e^{−ik θ_n·x}` for the `N` equispaced observation directions.
pub fn steering_vector(k: f64, n: usize, x: Point) -> Vec<Complex64> {
    observation_directions(n)
        .iter()
        .map(|&theta| Complex64::from_polar(1.0, -k * dot(theta, x)))
        .collect()
}

/// `Σ_n data_n · conj(steer_n)`.
pub fn correlate(data: &[Complex64], steer: &[Complex64]) -> Result<Complex64> {
    if data.len() != steer.len() {
        return invalid(format!(
            "correlation length mismatch: {} vs {}",
            data.len(),
            steer.len()
        ));
    }
    Ok(correlate_unchecked(data, steer))
}

fn correlate_unchecked(data: &[Complex64], steer: &[Complex64]) -> Complex64 {
    data.iter().zip(steer).map(|(a, b)| a * b.conj()).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_f(tensor: &FarFieldTensor, f: usize) -> Result<()> {
    if f >= tensor.config().frequency_count() {
        return invalid(format!("frequency index {f} out of range"));
    }
    Ok(())
}

fn check_l(tensor: &FarFieldTensor, l: usize) -> Result<()> {
    if l >= tensor.config().incident_count() {
        return invalid(format!("incident index {l} out of range"));
    }
    Ok(())
}

/// Unnormalized single-direction indicator at one point:
/// `|⟨ψ∞, steer⟩| / (‖ψ∞‖ ‖steer‖)` with discrete norms.
pub fn single_indicator_raw(row: &[Complex64], k: f64, x: Point) -> f64 {
    let steer = steering_vector(k, row.len(), x);
    let denom = norm(row) * norm(&steer);
    if denom == 0.0 {
        return 0.0;
    }
    correlate_unchecked(row, &steer).norm() / denom
}

/// Single frequency, single incident direction. An all-zero data row yields
/// the zero map (see [`IndicatorMap::is_zero_map`]).
pub fn indicator_single(tensor: &FarFieldTensor, f: usize, l: usize, grid: &ImagingGrid) -> Result<IndicatorMap> {
    check_f(tensor, f)?;
    check_l(tensor, l)?;
    let k = tensor.config().wavenumbers()[f];
    let row = tensor.row(f, l);
    let raw = grid.evaluate(|x| single_indicator_raw(row, k, x));
    IndicatorMap::from_raw(*grid, raw)
}

/// Pointwise maximum of the per-direction maps, renormalized.
pub fn indicator_if(tensor: &FarFieldTensor, f: usize, grid: &ImagingGrid) -> Result<IndicatorMap> {
    check_f(tensor, f)?;
    let mut acc = vec![0.0f64; grid.len()];
    for l in 0..tensor.config().incident_count() {
        let m = indicator_single(tensor, f, l, grid)?;
        for (a, v) in acc.iter_mut().zip(m.values()) {
            *a = a.max(*v);
        }
    }
    IndicatorMap::from_raw(*grid, acc)
}

/// `Ψ(x) = Σ_l e^{−ik d_l·x} ⟨ψ∞(·, d_l), steer(x)⟩` at one point.
pub fn aif_factor(tensor: &FarFieldTensor, f: usize, x: Point) -> Complex64 {
    let cfg = tensor.config();
    let k = cfg.wavenumbers()[f];
    let steer = steering_vector(k, cfg.observation_count(), x);
    (0..cfg.incident_count())
        .map(|l| {
            let d = cfg.incident_direction(l);
            Complex64::from_polar(1.0, -k * dot(d, x)) * correlate_unchecked(tensor.row(f, l), &steer)
        })
        .sum()
}

/// Multi-direction indicator `|Ψ(x)| / max |Ψ|`.
pub fn indicator_aif(tensor: &FarFieldTensor, f: usize, grid: &ImagingGrid) -> Result<IndicatorMap> {
    check_f(tensor, f)?;
    let raw = grid.evaluate(|x| aif_factor(tensor, f, x).norm());
    IndicatorMap::from_raw(*grid, raw)
}

/// `Σ_f e^{−ik_f d·x} ⟨ψ∞(·, d, k_f), steer_f(x)⟩` at one point.
pub fn mif_factor(tensor: &FarFieldTensor, l: usize, x: Point) -> Complex64 {
    let cfg = tensor.config();
    let d = cfg.incident_direction(l);
    cfg.wavenumbers()
        .iter()
        .enumerate()
        .map(|(f, &k)| {
            let steer = steering_vector(k, cfg.observation_count(), x);
            Complex64::from_polar(1.0, -k * dot(d, x)) * correlate_unchecked(tensor.row(f, l), &steer)
        })
        .sum()
}

/// Multi-frequency indicator for incident direction `l`; needs `F ≥ 2`.
pub fn indicator_mif(tensor: &FarFieldTensor, l: usize, grid: &ImagingGrid) -> Result<IndicatorMap> {
    check_l(tensor, l)?;
    if tensor.config().frequency_count() < 2 {
        return invalid("multi-frequency imaging needs at least 2 wavenumbers");
    }
    let raw = grid.evaluate(|x| mif_factor(tensor, l, x).norm());
    IndicatorMap::from_raw(*grid, raw)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub position: Point,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrackMatch {
    pub crack: usize,
    pub center: Point,
    /// Distance to, and value of, the closest reported peak.
    pub nearest: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub cracks: Vec<CrackMatch>,
}

impl PeakReport {
    pub fn with_scene(mut self, scene: &Scene) -> Self {
        self.cracks = scene
            .cracks
            .iter()
            .enumerate()
            .map(|(i, c)| CrackMatch {
                crack: i,
                center: c.center,
                nearest: self
                    .peaks
                    .iter()
                    .map(|p| (distance(p.position, c.center), p.value))
                    .min_by(|a, b| a.0.total_cmp(&b.0)),
            })
            .collect();
        self
    }

    /// True if every crack has a peak within `radius`.
    pub fn all_within(&self, radius: f64) -> bool {
        self.cracks
            .iter()
            .all(|c| c.nearest.is_some_and(|(d, _)| d <= radius))
    }
}

/// Grid-local maxima strictly above `floor`, value-descending, greedily
/// thinned so that kept peaks are at least `min_separation` apart. A point
/// qualifies if no neighbor exceeds it and at least one neighbor is lower.
pub fn find_local_maxima(map: &IndicatorMap, min_separation: f64, floor: f64) -> Result<PeakReport> {
    if !(min_separation > 0.0) {
        return invalid("peak separation must be positive");
    }
    let g = map.grid();
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let v = map.values();
    let mut candidates = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let i = (iy * nx + ix) as usize;
            let here = v[i];
            if !(here > floor) {
                continue;
            }
            let mut dominated = false;
            let mut strictly_above_one = false;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (jx, jy) = (ix + dx, iy + dy);
                    if jx < 0 || jy < 0 || jx >= nx || jy >= ny {
                        continue;
                    }
                    let nb = v[(jy * nx + jx) as usize];
                    if nb > here {
                        dominated = true;
                    } else if nb < here {
                        strictly_above_one = true;
                    }
                }
            }
            if !dominated && strictly_above_one {
                candidates.push(i);
            }
        }
    }
    candidates.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut peaks: Vec<Peak> = Vec::new();
    for i in candidates {
        let p = g.point_at_index(i);
        if peaks.iter().all(|q| distance(q.position, p) >= min_separation) {
            peaks.push(Peak {
                index: i,
                position: p,
                value: v[i],
            });
        }
    }
    Ok(PeakReport {
        peaks,
        cracks: Vec::new(),
    })
}

/// `(max |a − b|, rms(a − b))` over a shared grid.
pub fn map_distance(a: &IndicatorMap, b: &IndicatorMap) -> Result<(f64, f64)> {
    if a.grid() != b.grid() {
        return invalid("maps are defined on different grids");
    }
    let mut linf = 0.0f64;
    let mut sq = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        let d = (x - y).abs();
        linf = linf.max(d);
        sq += d * d;
    }
    Ok((linf, (sq / a.values().len() as f64).sqrt()))
}
