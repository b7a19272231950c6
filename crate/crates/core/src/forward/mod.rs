//! Full-wave far-field data for sound-soft cracks.
//!
//! The scattered field is written as `u_s = −S φ` with the single-layer
//! operator `S` over all cracks, and the density is fixed by `S φ = u_inc` on
//! the cracks so that the total field vanishes there. Each crack is mapped to
//! `[−1, 1]` and then through `s = cos τ`; the unknown is the smooth function
//! `g(τ) = ℓ φ(y(cos τ)) |sin τ|`, which absorbs the inverse square-root
//! behavior of `φ` at the crack tips. Collocation happens at the Chebyshev
//! points `τ_j = (2j+1)π/(2n)`. On each crack the logarithmic part of the
//! kernel is integrated exactly against the cosine interpolant of `g`; the
//! remaining smooth part and all crack-to-crack blocks use Gauss–Chebyshev
//! quadrature.

mod green;
mod linalg;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::scene::{direction, dot, reject_hard_violations, Point, Scene};

pub use green::{bessel_y0, fundamental_solution};
pub use linalg::LuFactors;

pub const DEFAULT_NODES_PER_CRACK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    nodes_per_crack: usize,
}

impl QuadratureSpec {
    pub fn new(nodes_per_crack: usize) -> Result<Self> {
        if nodes_per_crack < 8 || nodes_per_crack % 2 != 0 {
            return invalid(format!(
                "nodes per crack must be an even number >= 8, got {nodes_per_crack}"
            ));
        }
        Ok(Self { nodes_per_crack })
    }

    pub fn nodes_per_crack(&self) -> usize {
        self.nodes_per_crack
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_crack: DEFAULT_NODES_PER_CRACK,
        }
    }
}

/// Wavenumbers, incident directions, and the number of equispaced
/// observation directions `θ_n = [cos 2πn/N, sin 2πn/N]`, `n = 1..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionConfig {
    wavenumbers: Vec<f64>,
    observation_count: usize,
    incident_angles: Vec<f64>,
}

impl AcquisitionConfig {
    pub fn new(
        wavenumbers: Vec<f64>,
        observation_count: usize,
        incident_angles: Vec<f64>,
    ) -> Result<Self> {
        if observation_count < 8 {
            return invalid(format!(
                "need at least 8 observation directions, got {observation_count}"
            ));
        }
        if wavenumbers.is_empty() {
            return invalid("at least one wavenumber is required");
        }
        if wavenumbers.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
            return invalid("wavenumbers must be positive and finite");
        }
        if wavenumbers.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("wavenumbers must be strictly increasing");
        }
        if incident_angles.is_empty() {
            return invalid("at least one incident direction is required");
        }
        if incident_angles.iter().any(|a| !a.is_finite()) {
            return invalid("incident angles must be finite");
        }
        Ok(Self {
            wavenumbers,
            observation_count,
            incident_angles,
        })
    }

    /// Incident angles `2πl/L`, `l = 1..L`.
    pub fn uniform_incident_angles(count: usize) -> Vec<f64> {
        (1..=count)
            .map(|l| 2.0 * PI * l as f64 / count as f64)
            .collect()
    }

    /// Wavenumbers `2π/λ_f` for `F` wavelengths uniformly spaced on
    /// `[λ_min, λ_max]`, returned in increasing order.
    pub fn wavenumbers_from_wavelengths(lambda_min: f64, lambda_max: f64, count: usize) -> Vec<f64> {
        if count == 1 {
            return vec![2.0 * PI / lambda_min];
        }
        let mut ks: Vec<f64> = (0..count)
            .map(|f| {
                let lam = lambda_min + (lambda_max - lambda_min) * f as f64 / (count - 1) as f64;
                2.0 * PI / lam
            })
            .collect();
        ks.reverse();
        ks
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn observation_count(&self) -> usize {
        self.observation_count
    }

    pub fn incident_angles(&self) -> &[f64] {
        &self.incident_angles
    }

    pub fn frequency_count(&self) -> usize {
        self.wavenumbers.len()
    }

    pub fn incident_count(&self) -> usize {
        self.incident_angles.len()
    }

    pub fn incident_direction(&self, l: usize) -> Point {
        direction(self.incident_angles[l])
    }

    pub fn observation_angle(&self, n: usize) -> f64 {
        observation_angle(n, self.observation_count)
    }

    pub fn observation_directions(&self) -> Vec<Point> {
        observation_directions(self.observation_count)
    }
}

/// Angle of the `n`-th (0-based) of `count` observation directions.
pub fn observation_angle(n: usize, count: usize) -> f64 {
    2.0 * PI * (n + 1) as f64 / count as f64
}

pub fn observation_directions(count: usize) -> Vec<Point> {
    (0..count)
        .map(|n| direction(observation_angle(n, count)))
        .collect()
}

/// Far-field samples indexed `[frequency][incident][observation]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldTensor {
    config: AcquisitionConfig,
    values: Vec<Complex64>,
}

impl FarFieldTensor {
    pub fn zeros(config: AcquisitionConfig) -> Self {
        let len = config.frequency_count() * config.incident_count() * config.observation_count();
        Self {
            config,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_values(config: AcquisitionConfig, values: Vec<Complex64>) -> Result<Self> {
        let len = config.frequency_count() * config.incident_count() * config.observation_count();
        if values.len() != len {
            return invalid(format!(
                "tensor has {} entries, configuration needs {len}",
                values.len()
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return invalid("far-field entries must be finite");
        }
        Ok(Self { config, values })
    }

    pub fn config(&self) -> &AcquisitionConfig {
        &self.config
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn offset(&self, f: usize, l: usize) -> usize {
        (f * self.config.incident_count() + l) * self.config.observation_count()
    }

    pub fn get(&self, f: usize, l: usize, n: usize) -> Complex64 {
        self.values[self.offset(f, l) + n]
    }

    /// The `N` observations for frequency `f` and incident direction `l`.
    pub fn row(&self, f: usize, l: usize) -> &[Complex64] {
        let o = self.offset(f, l);
        &self.values[o..o + self.config.observation_count()]
    }

    pub fn map_values(&self, op: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            config: self.config.clone(),
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    /// Fills every `(f, l)` row with `rows(f, k_f, d_l)`. Rows are computed in
    /// parallel and each cell is written exactly once.
    pub fn build<F>(config: AcquisitionConfig, rows: F) -> Result<Self>
    where
        F: Fn(usize, f64, Point) -> Result<Vec<Complex64>> + Sync,
    {
        let fl: Vec<(usize, usize)> = (0..config.frequency_count())
            .flat_map(|f| (0..config.incident_count()).map(move |l| (f, l)))
            .collect();
        let computed: Vec<Vec<Complex64>> = fl
            .par_iter()
            .map(|&(f, l)| rows(f, config.wavenumbers[f], config.incident_direction(l)))
            .collect::<Result<_>>()?;
        let values: Vec<Complex64> = computed.into_iter().flatten().collect();
        Self::from_values(config, values)
    }
}

/// A factored discretization of the crack integral equation at one wavenumber.
#[derive(Debug, Clone)]
pub struct CrackSolver {
    k: f64,
    nodes: usize,
    /// Quadrature points on all cracks, crack-major.
    points: Vec<Point>,
    lu: Option<LuFactors>,
}

impl CrackSolver {
    pub fn new(scene: &Scene, k: f64, quad: QuadratureSpec) -> Result<Self> {
        if !scene.is_empty() {
            reject_hard_violations(scene, k)?;
            check_disjoint(scene)?;
        }
        let n = quad.nodes_per_crack();
        let taus: Vec<f64> = (0..n)
            .map(|j| (2 * j + 1) as f64 * PI / (2 * n) as f64)
            .collect();
        let cos_t: Vec<f64> = taus.iter().map(|t| t.cos()).collect();
        let points: Vec<Point> = scene
            .cracks
            .iter()
            .flat_map(|c| cos_t.iter().map(move |&s| c.point_at(s)))
            .collect();
        if scene.is_empty() {
            return Ok(Self {
                k,
                nodes: n,
                points,
                lu: None,
            });
        }

        let log_weights = log_weights(&taus);
        let w = PI / n as f64;
        let size = points.len();
        let mut a = vec![Complex64::new(0.0, 0.0); size * size];
        for (p, crack) in scene.cracks.iter().enumerate() {
            for (q, _) in scene.cracks.iter().enumerate() {
                for i in 0..n {
                    let row = (p * n + i) * size + q * n;
                    for j in 0..n {
                        a[row + j] = if p == q {
                            let d = (cos_t[i] - cos_t[j]).abs();
                            let (lg, sm) = green::log_split(k, crack.half_length, k * crack.half_length * d);
                            lg * log_weights[i * n + j] + sm * w
                        } else {
                            let r = crate::scene::distance(points[p * n + i], points[q * n + j]);
                            fundamental_solution(k, r) * w
                        };
                    }
                }
            }
        }
        let lu = LuFactors::factor(a, size)?;
        Ok(Self {
            k,
            nodes: n,
            points,
            lu: Some(lu),
        })
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn condition_estimate(&self) -> f64 {
        self.lu.as_ref().map_or(1.0, |lu| lu.condition_estimate())
    }

    /// Density samples `g(τ_j)` for incident direction `d`, crack-major.
    pub fn density(&self, d: Point) -> Vec<Complex64> {
        let Some(lu) = &self.lu else {
            return Vec::new();
        };
        let rhs: Vec<Complex64> = self
            .points
            .iter()
            .map(|&y| Complex64::from_polar(1.0, self.k * dot(d, y)))
            .collect();
        lu.solve(&rhs)
    }

    /// `ψ∞(θ, d)` for each observation direction `θ`.
    pub fn far_field(&self, d: Point, observations: &[Point]) -> Vec<Complex64> {
        if self.lu.is_none() {
            return vec![Complex64::new(0.0, 0.0); observations.len()];
        }
        let g = self.density(d);
        let w = PI / self.nodes as f64;
        let prefactor = -Complex64::new(1.0, 1.0) / (4.0 * (PI * self.k).sqrt()) * w;
        observations
            .iter()
            .map(|&theta| {
                let s: Complex64 = self
                    .points
                    .iter()
                    .zip(&g)
                    .map(|(&y, &gj)| Complex64::from_polar(1.0, -self.k * dot(theta, y)) * gj)
                    .sum();
                prefactor * s
            })
            .collect()
    }
}

/// Weights `W_ij` with `∫_0^π ln|cos t_i − cos τ| g(τ) dτ ≈ Σ_j W_ij g(τ_j)`,
/// exact for cosine polynomials of degree below `n`.
fn log_weights(taus: &[f64]) -> Vec<f64> {
    let n = taus.len();
    let nf = n as f64;
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for m in 1..n {
                let mf = m as f64;
                s += (mf * taus[i]).cos() * (mf * taus[j]).cos() / mf;
            }
            w[i * n + j] = -PI / nf * std::f64::consts::LN_2 - 2.0 * PI / nf * s;
        }
    }
    w
}

fn check_disjoint(scene: &Scene) -> Result<()> {
    let c = &scene.cracks;
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            let (a, b) = c[i].endpoints();
            let (p, q) = c[j].endpoints();
            if segments_intersect(a, b, p, q) {
                return invalid(format!("cracks {i} and {j} intersect"));
            }
        }
    }
    Ok(())
}

fn segments_intersect(a: Point, b: Point, p: Point, q: Point) -> bool {
    let cross = |o: Point, u: Point, v: Point| (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0]);
    let d1 = cross(p, q, a);
    let d2 = cross(p, q, b);
    let d3 = cross(a, b, p);
    let d4 = cross(a, b, q);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// `ψ∞(θ_n, d)`, `n = 1..N`, at wavenumber `k`.
pub fn far_field(
    scene: &Scene,
    k: f64,
    d: Point,
    config: &AcquisitionConfig,
    quad: QuadratureSpec,
) -> Result<Vec<Complex64>> {
    let solver = CrackSolver::new(scene, k, quad)?;
    Ok(solver.far_field(d, &config.observation_directions()))
}

/// Full-wave tensor for every wavenumber and incident direction in `config`.
/// The system is factored once per wavenumber.
pub fn simulate(scene: &Scene, config: &AcquisitionConfig, quad: QuadratureSpec) -> Result<FarFieldTensor> {
    let solvers: Vec<CrackSolver> = config
        .wavenumbers()
        .par_iter()
        .map(|&k| CrackSolver::new(scene, k, quad))
        .collect::<Result<_>>()?;
    let obs = config.observation_directions();
    FarFieldTensor::build(config.clone(), |f, _k, d| Ok(solvers[f].far_field(d, &obs)))
}

/// Max-norm change of the far field under successive node doublings,
/// starting from `base` nodes per crack: entry `j` compares `2^j·base` with
/// `2^{j+1}·base` nodes. Also returns the largest far-field magnitude seen.
pub fn self_convergence(
    scene: &Scene,
    k: f64,
    d: Point,
    config: &AcquisitionConfig,
    base: usize,
    doublings: usize,
) -> Result<(Vec<f64>, f64)> {
    let runs: Vec<Vec<Complex64>> = (0..=doublings)
        .map(|j| far_field(scene, k, d, config, QuadratureSpec::new(base << j)?))
        .collect::<Result<_>>()?;
    let scale = runs
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let diffs = runs
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok((diffs, scale))
}

/// True when every doubling shrinks the change by at least `factor`, except
/// once the coarser change is already at the round-off `floor`.
pub fn converges_by_factor(diffs: &[f64], factor: f64, floor: f64) -> bool {
    diffs.windows(2).all(|w| w[0] <= floor || w[0] >= factor * w[1])
}

/// `max_{n,l} |ψ∞(θ_n, d_l) − ψ∞(−d_l, −θ_n)|` at wavenumber `k`. The
/// incident set must coincide with the (even-sized) observation set.
pub fn reciprocity_residual(
    scene: &Scene,
    k: f64,
    config: &AcquisitionConfig,
    quad: QuadratureSpec,
) -> Result<f64> {
    let n = config.observation_count();
    if config.incident_count() != n || n % 2 != 0 {
        return invalid("reciprocity needs incident directions equal to an even-sized observation set");
    }
    for l in 0..n {
        let a = config.incident_direction(l);
        let b = direction(observation_angle(l, n));
        if crate::scene::distance(a, b) > 1e-12 {
            return invalid(format!("incident direction {l} differs from observation direction {l}"));
        }
    }
    let solver = CrackSolver::new(scene, k, quad)?;
    let obs = config.observation_directions();
    // table[l][n] = ψ∞(θ_n, d_l)
    let table: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|l| solver.far_field(config.incident_direction(l), &obs))
        .collect();
    let half = n / 2;
    let mut worst = 0.0f64;
    for l in 0..n {
        for m in 0..n {
            // −d_l = θ_{l+N/2}, −θ_m = d_{m+N/2}
            let swapped = table[(m + half) % n][(l + half) % n];
            worst = worst.max((table[l][m] - swapped).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::DsmError;
    use crate::scene::Crack;

    fn single(l: f64) -> Scene {
        Scene::new(vec![Crack::new([0.6, 0.2], l, 0.3).unwrap()]).unwrap()
    }

    fn config(n: usize) -> AcquisitionConfig {
        AcquisitionConfig::new(vec![4.0 * PI], n, vec![PI / 2.0]).unwrap()
    }

    #[test]
    fn log_weights_integrate_cosines_exactly() {
        let n = 16;
        let taus: Vec<f64> = (0..n).map(|j| (2 * j + 1) as f64 * PI / (2 * n) as f64).collect();
        let w = log_weights(&taus);
        // ∫_0^π ln|cos t − cos τ| cos(mτ) dτ = −π ln 2 (m = 0), −π cos(mt)/m (m ≥ 1)
        for m in 0..n {
            for i in 0..n {
                let got: f64 = (0..n).map(|j| w[i * n + j] * (m as f64 * taus[j]).cos()).sum();
                let want = if m == 0 {
                    -PI * std::f64::consts::LN_2
                } else {
                    -PI * (m as f64 * taus[i]).cos() / m as f64
                };
                assert!((got - want).abs() < 1e-12, "m={m} i={i}");
            }
        }
    }

    #[test]
    fn empty_scene_gives_zeros() {
        let v = far_field(&Scene::empty(), 4.0 * PI, [0.0, 1.0], &config(30), QuadratureSpec::default()).unwrap();
        assert_eq!(v.len(), 30);
        assert!(v.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn self_convergence_under_node_doubling() {
        let k = 4.0 * PI;
        // a small crack is resolved to round-off by 8 nodes, so the factor
        // test only bites on the larger ones
        for (l, base, doublings) in [(0.05, 8, 3), (0.5, 8, 3), (1.0, 8, 4)] {
            let s = single(l);
            let (e, scale) = self_convergence(&s, k, [0.0, 1.0], &config(30), base, doublings).unwrap();
            let floor = 64.0 * f64::EPSILON * scale;
            assert!(converges_by_factor(&e, 4.0, floor), "l={l}: {e:?}");
            assert!(*e.last().unwrap() < 1e-12 * scale.max(1.0), "l={l}: {e:?}");
        }
        let (e, _) = self_convergence(&single(1.0), k, [0.0, 1.0], &config(30), 8, 2).unwrap();
        assert!(e[0] > 1e-3 && e[0] >= 4.0 * e[1], "{e:?}");
    }

    #[test]
    fn convergence_factor_rule() {
        assert!(converges_by_factor(&[1.0, 0.2, 1e-9, 1e-16, 2e-16], 4.0, 1e-14));
        assert!(!converges_by_factor(&[1.0, 0.5], 4.0, 1e-14));
        assert!(!converges_by_factor(&[1.0, 1e-3, 1e-3], 4.0, 1e-14));
    }

    #[test]
    fn density_satisfies_boundary_condition_between_nodes() {
        // total field at off-node points on the crack should vanish
        let s = single(0.05);
        let k = 4.0 * PI;
        let solver = CrackSolver::new(&s, k, QuadratureSpec::new(32).unwrap()).unwrap();
        let d = [0.0, 1.0];
        let g = solver.density(d);
        let crack = s.cracks[0];
        // fine Gauss–Chebyshev evaluation of S g at interior points away from nodes
        // using the cosine interpolant of g
        let n = 32;
        let taus: Vec<f64> = (0..n).map(|j| (2 * j + 1) as f64 * PI / (2 * n) as f64).collect();
        let coef: Vec<Complex64> = (0..n)
            .map(|m| {
                let s: Complex64 = (0..n).map(|j| g[j] * (m as f64 * taus[j]).cos()).sum();
                s * if m == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 }
            })
            .collect();
        let interp = |tau: f64| -> Complex64 { (0..n).map(|m| coef[m] * (m as f64 * tau).cos()).sum() };
        for &t in &[0.37f64, 1.234, 2.5] {
            let x = crack.point_at(t.cos());
            // integrate Φ(x, y(cos τ)) g(τ) over τ with many panels of Gauss–Legendre
            let panels = 4000;
            let mut acc = Complex64::new(0.0, 0.0);
            let h = PI / panels as f64;
            for p in 0..panels {
                let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
                for (xi, wi) in [(-0.5773502691896258, 1.0), (0.5773502691896258, 1.0)] {
                    let tau = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                    let y = crack.point_at(tau.cos());
                    let r = crate::scene::distance(x, y);
                    acc += fundamental_solution(k, r) * interp(tau) * (0.5 * (b - a) * wi);
                }
            }
            let inc = Complex64::from_polar(1.0, k * dot(d, x));
            assert!((acc - inc).norm() < 1e-3, "residual {}", (acc - inc).norm());
        }
    }

    #[test]
    fn reciprocity_small_crack() {
        let s = single(0.05);
        let n = 16;
        let cfg = AcquisitionConfig::new(vec![4.0 * PI], n, AcquisitionConfig::uniform_incident_angles(n)).unwrap();
        let r32 = reciprocity_residual(&s, 4.0 * PI, &cfg, QuadratureSpec::new(32).unwrap()).unwrap();
        assert!(r32 < 1e-6, "{r32:e}");
        assert_eq!(
            reciprocity_residual(&Scene::empty(), 4.0 * PI, &cfg, QuadratureSpec::default()).unwrap(),
            0.0
        );
        let bad = AcquisitionConfig::new(vec![4.0 * PI], n, vec![0.1]).unwrap();
        assert!(reciprocity_residual(&s, 4.0 * PI, &bad, QuadratureSpec::default()).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(QuadratureSpec::new(6).is_err());
        assert!(QuadratureSpec::new(9).is_err());
        assert!(AcquisitionConfig::new(vec![1.0, 1.0], 30, vec![0.0]).is_err());
        assert!(AcquisitionConfig::new(vec![2.0, 1.0], 30, vec![0.0]).is_err());
        assert!(AcquisitionConfig::new(vec![1.0], 4, vec![0.0]).is_err());
        let a = Crack::new([0.0, 0.0], 0.5, 0.0).unwrap();
        let b = Crack::new([0.1, 0.0], 0.5, PI / 2.0).unwrap();
        let crossing = Scene::new(vec![a, b]).unwrap();
        // k chosen so the centers pass the separation check
        assert!(matches!(
            CrackSolver::new(&crossing, 10.0, QuadratureSpec::default()),
            Err(DsmError::InvalidInput(_))
        ));
        assert!(matches!(
            CrackSolver::new(&crossing, 1.0, QuadratureSpec::default()),
            Err(DsmError::SceneRejected(_))
        ));
    }

    #[test]
    fn wavelength_grid_is_increasing_in_k() {
        let ks = AcquisitionConfig::wavenumbers_from_wavelengths(0.3, 0.7, 5);
        assert_eq!(ks.len(), 5);
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
        assert!((ks[0] - 2.0 * PI / 0.7).abs() < 1e-12);
        assert!((ks[4] - 2.0 * PI / 0.3).abs() < 1e-12);
    }
}
