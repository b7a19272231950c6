//! Small-crack far-field formulas and closed-form predictions of the
//! indicator maps.
//!
//! The far-field formulas keep the leading `1/ln(ℓ/2)` term and, at second
//! order, the `ℓ²` tangential-derivative term. The predictors evaluate what the
//! indicator maps reduce to once the observation sum is replaced by its
//! Bessel-function limit; all of them are max-normalized, so only relative
//! weights between terms matter.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, DsmError, Result};
use crate::forward::{AcquisitionConfig, FarFieldTensor};
use crate::imaging::{ImagingGrid, IndicatorMap};
use crate::scene::{direction, distance, dot, Point, Scene};
use crate::specfun::{bessel_j_sequence_unbounded, i_pow, series_truncation, ORDER_CEILING};

// 8-point Gauss–Legendre on [−1, 1]
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn check_half_lengths(scene: &Scene) -> Result<()> {
    for (i, c) in scene.cracks.iter().enumerate() {
        if !(c.half_length < 2.0) {
            return Err(DsmError::Domain(format!(
                "crack {i}: half-length {} must be below 2 for the logarithmic expansion",
                c.half_length
            )));
        }
    }
    Ok(())
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return invalid(format!("wavenumber must be positive and finite, got {k}"));
    }
    Ok(())
}

fn common_half_length(scene: &Scene) -> Result<Option<f64>> {
    if scene.is_empty() {
        return Ok(None);
    }
    match scene.common_half_length() {
        Some(l) => Ok(Some(l)),
        None => invalid("the second-order terms need all cracks to share one half-length"),
    }
}

/// `Σ_m (2π/ln(ℓ_m/2)) e^{ik d·c_m} e^{−ik θ_n·c_m}` for each observation.
pub fn farfield_order1(scene: &Scene, k: f64, d: Point, config: &AcquisitionConfig) -> Result<Vec<Complex64>> {
    check_wavenumber(k)?;
    check_half_lengths(scene)?;
    Ok(order1_row(scene, k, d, &config.observation_directions()))
}

fn order1_row(scene: &Scene, k: f64, d: Point, obs: &[Point]) -> Vec<Complex64> {
    obs.iter()
        .map(|&theta| {
            scene
                .cracks
                .iter()
                .map(|c| {
                    let w = 2.0 * PI / (0.5 * c.half_length).ln();
                    Complex64::from_polar(w, k * (dot(d, c.center) - dot(theta, c.center)))
                })
                .sum()
        })
        .collect()
}

/// First-order formula plus `−πℓ²k² (d·t)(θ_n·t) e^{ik d·c_m} e^{−ik θ_n·c_m}`
/// per crack. All half-lengths must agree.
pub fn farfield_order2(scene: &Scene, k: f64, d: Point, config: &AcquisitionConfig) -> Result<Vec<Complex64>> {
    check_wavenumber(k)?;
    check_half_lengths(scene)?;
    common_half_length(scene)?;
    Ok(order2_row(scene, k, d, &config.observation_directions()))
}

fn order2_row(scene: &Scene, k: f64, d: Point, obs: &[Point]) -> Vec<Complex64> {
    obs.iter()
        .map(|&theta| {
            scene
                .cracks
                .iter()
                .map(|c| {
                    let l = c.half_length;
                    let t = c.tangent();
                    let w = 2.0 * PI / (0.5 * l).ln() - PI * l * l * k * k * dot(d, t) * dot(theta, t);
                    w * Complex64::from_polar(1.0, k * (dot(d, c.center) - dot(theta, c.center)))
                })
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// A whole tensor from the first- or second-order formula.
pub fn simulate_asymptotic(scene: &Scene, config: &AcquisitionConfig, order: Order) -> Result<FarFieldTensor> {
    check_half_lengths(scene)?;
    if order == Order::Second {
        common_half_length(scene)?;
    }
    let obs = config.observation_directions();
    FarFieldTensor::build(config.clone(), |_, k, d| {
        Ok(match order {
            Order::First => order1_row(scene, k, d, &obs),
            Order::Second => order2_row(scene, k, d, &obs),
        })
    })
}

/// The two parts of the single-direction correlation at one search point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureTerms {
    /// `(2π)²/ln(ℓ/2) Σ_m e^{ik d·c_m} J0(k|x−c_m|)`
    pub phi1: Complex64,
    /// `−2π² i k²ℓ² Σ_m (d·t_m) e^{ik d·c_m} (x̂_m·t_m) J1(k|x−c_m|)`, zero at `x = c_m`
    pub phi2: Complex64,
}

impl StructureTerms {
    pub fn total(&self) -> Complex64 {
        self.phi1 + self.phi2
    }
}

/// [`StructureTerms`] at `x`; all half-lengths must agree.
pub fn structure_terms(scene: &Scene, k: f64, d: Point, x: Point) -> Result<StructureTerms> {
    check_wavenumber(k)?;
    check_half_lengths(scene)?;
    let Some(l) = common_half_length(scene)? else {
        return Ok(StructureTerms {
            phi1: Complex64::new(0.0, 0.0),
            phi2: Complex64::new(0.0, 0.0),
        });
    };
    Ok(terms_at(scene, k, l, d, x))
}

fn terms_at(scene: &Scene, k: f64, l: f64, d: Point, x: Point) -> StructureTerms {
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for c in &scene.cracks {
        let r = distance(x, c.center);
        let j = bessel_j_sequence_unbounded(1, k * r);
        let phase = Complex64::from_polar(1.0, k * dot(d, c.center));
        s1 += phase * j[0];
        if r > 0.0 {
            let t = c.tangent();
            let xhat = [(x[0] - c.center[0]) / r, (x[1] - c.center[1]) / r];
            s2 += phase * (dot(d, t) * dot(xhat, t) * j[1]);
        }
    }
    StructureTerms {
        phi1: s1 * ((2.0 * PI).powi(2) / (0.5 * l).ln()),
        phi2: s2 * Complex64::new(0.0, -2.0 * PI * PI * k * k * l * l),
    }
}

/// `|Σ_m J0(k|x−c_m|)/ln(ℓ_m/2)|`, normalized.
pub fn predict_structure1(scene: &Scene, k: f64, grid: &ImagingGrid) -> Result<IndicatorMap> {
    check_wavenumber(k)?;
    check_half_lengths(scene)?;
    let raw = grid.evaluate(|x| {
        scene
            .cracks
            .iter()
            .map(|c| bessel_j_sequence_unbounded(0, k * distance(x, c.center))[0] / (0.5 * c.half_length).ln())
            .sum::<f64>()
            .abs()
    });
    IndicatorMap::from_raw(*grid, raw)
}

/// `|Φ1 + Φ2|`, normalized; all half-lengths must agree.
pub fn predict_structure2(scene: &Scene, k: f64, d: Point, grid: &ImagingGrid) -> Result<IndicatorMap> {
    check_wavenumber(k)?;
    check_half_lengths(scene)?;
    let Some(l) = common_half_length(scene)? else {
        return IndicatorMap::from_raw(*grid, vec![0.0; grid.len()]);
    };
    let raw = grid.evaluate(|x| terms_at(scene, k, l, d, x).total().norm());
    IndicatorMap::from_raw(*grid, raw)
}

/// Order of the Jacobi–Anger partial sums used by the multi-direction and
/// multi-frequency predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// `⌈z⌉ + 25` for the largest argument met at each point.
    #[default]
    Auto,
    Fixed(usize),
}

impl Truncation {
    fn check(self) -> Result<()> {
        match self {
            Truncation::Fixed(s) if s > ORDER_CEILING => Err(DsmError::UnsupportedOrder {
                order: s,
                ceiling: ORDER_CEILING,
            }),
            _ => Ok(()),
        }
    }

    pub fn order(self, z: f64) -> usize {
        match self {
            Truncation::Auto => series_truncation(z),
            Truncation::Fixed(s) => s,
        }
    }
}

/// Angle of `c − x`.
fn bearing(x: Point, c: Point) -> f64 {
    (c[1] - x[1]).atan2(c[0] - x[0])
}

/// `Σ_m w_m J0(z_m) [L J0(z_m) + 2 Σ_l Σ_s i^s J_s(z_m) cos(s(φ_m − θ_l))]`
/// with `w_m = (2π)²/ln(ℓ_m/2)` and `z_m = k|x − c_m|`.
pub fn predict_aif(
    scene: &Scene,
    k: f64,
    incident_angles: &[f64],
    grid: &ImagingGrid,
    truncation: Truncation,
) -> Result<IndicatorMap> {
    check_wavenumber(k)?;
    check_half_lengths(scene)?;
    truncation.check()?;
    if incident_angles.is_empty() {
        return invalid("at least one incident direction is needed");
    }
    let big_l = incident_angles.len() as f64;
    let raw = grid.evaluate(|x| {
        let mut total = Complex64::new(0.0, 0.0);
        for c in &scene.cracks {
            let w = (2.0 * PI).powi(2) / (0.5 * c.half_length).ln();
            let r = distance(x, c.center);
            let z = k * r;
            let s_max = truncation.order(z);
            let j = bessel_j_sequence_unbounded(s_max.max(1), z);
            let mut inner = Complex64::new(big_l * j[0], 0.0);
            if r > 0.0 {
                let phi = bearing(x, c.center);
                for s in 1..=s_max {
                    let cos_sum: f64 = incident_angles
                        .iter()
                        .map(|&theta| (s as f64 * (phi - theta)).cos())
                        .sum();
                    inner += 2.0 * i_pow(s) * (j[s] * cos_sum);
                }
            }
            total += w * j[0] * inner;
        }
        total.norm()
    });
    IndicatorMap::from_raw(*grid, raw)
}

/// `k_F Λ(k_F r) − k_1 Λ(k_1 r)`, divided by `k_F − k_1` so it equals 1 at `r = 0`.
pub fn mif_envelope(k1: f64, kf: f64, r: f64) -> Result<f64> {
    check_wavenumber(k1)?;
    if !(kf > k1 && kf.is_finite()) {
        return invalid("the wavenumber band needs k_F > k_1");
    }
    if !(r >= 0.0) {
        return Err(DsmError::Domain(format!("radius must be non-negative, got {r}")));
    }
    Ok((kf * lambda(kf * r) - k1 * lambda(k1 * r)) / (kf - k1))
}

fn lambda(x: f64) -> f64 {
    let j = bessel_j_sequence_unbounded(1, x);
    j[0] * j[0] + j[1] * j[1]
}

/// `|Ψ3 + Ψ4|` for the band `[k_1, k_F]` spanned by `wavenumbers` and
/// incident angle `theta`:
/// `Ψ3 = Σ_m w_m [k_F Λ(k_F r_m) − k_1 Λ(k_1 r_m)]`,
/// `Ψ4 = Σ_m w_m ∫ J1(kr_m)² + 2 Σ_s i^s J0(kr_m) J_s(kr_m) cos(s(φ_m − θ)) dk`.
/// The `k`-integral uses 8-point Gauss–Legendre panels, one per half
/// oscillation of the integrand.
pub fn predict_mif(
    scene: &Scene,
    wavenumbers: &[f64],
    theta: f64,
    grid: &ImagingGrid,
    truncation: Truncation,
) -> Result<IndicatorMap> {
    if wavenumbers.len() < 2 {
        return invalid("the multi-frequency predictor needs at least 2 wavenumbers");
    }
    for &k in wavenumbers {
        check_wavenumber(k)?;
    }
    if wavenumbers.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("wavenumbers must be strictly increasing");
    }
    check_half_lengths(scene)?;
    truncation.check()?;
    let k1 = wavenumbers[0];
    let kf = *wavenumbers.last().unwrap();
    let raw = grid.evaluate(|x| {
        let mut total = Complex64::new(0.0, 0.0);
        for c in &scene.cracks {
            let w = (2.0 * PI).powi(2) / (0.5 * c.half_length).ln();
            let r = distance(x, c.center);
            let psi3 = kf * lambda(kf * r) - k1 * lambda(k1 * r);
            let psi4 = if r > 0.0 {
                band_integral(k1, kf, r, bearing(x, c.center) - theta, truncation)
            } else {
                Complex64::new(0.0, 0.0)
            };
            total += w * (psi4 + psi3);
        }
        total.norm()
    });
    IndicatorMap::from_raw(*grid, raw)
}

fn band_integral(k1: f64, kf: f64, r: f64, angle: f64, truncation: Truncation) -> Complex64 {
    let panels = ((kf - k1) * r / PI).ceil() as usize + 1;
    let h = (kf - k1) / panels as f64;
    let s_max = truncation.order(kf * r);
    let cosines: Vec<f64> = (0..=s_max).map(|s| (s as f64 * angle).cos()).collect();
    let integrand = |k: f64| {
        let j = bessel_j_sequence_unbounded(s_max.max(1), k * r);
        let mut v = Complex64::new(j[1] * j[1], 0.0);
        for s in 1..=s_max {
            v += 2.0 * i_pow(s) * (j[0] * j[s] * cosines[s]);
        }
        v
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = k1 + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            acc += w * (integrand(mid - 0.5 * h * x) + integrand(mid + 0.5 * h * x));
        }
    }
    acc * (0.5 * h)
}

/// Height of the first local maximum that follows the first local minimum
/// of a radial profile sampled from the origin outwards.
pub fn first_side_lobe(profile: &[f64]) -> Option<f64> {
    let interior = 1..profile.len().saturating_sub(1);
    let min = interior
        .clone()
        .find(|&i| profile[i] <= profile[i - 1] && profile[i] <= profile[i + 1])?;
    interior
        .filter(|&i| i > min)
        .find(|&i| profile[i] >= profile[i - 1] && profile[i] >= profile[i + 1])
        .map(|i| profile[i])
}

/// `(2π/N) Σ_n e^{ik θ_n·x}`, which tends to `2π J0(k|x|)`.
pub fn uniform_direction_sum(n: usize, k: f64, x: Point) -> Complex64 {
    let sum: Complex64 = (0..n)
        .map(|i| {
            let theta = direction(crate::forward::observation_angle(i, n));
            Complex64::from_polar(1.0, k * dot(theta, x))
        })
        .sum();
    sum * (2.0 * PI / n as f64)
}

/// `(2π/N) Σ_n (φ·θ_n) e^{ik θ_n·x}`, which tends to `2πi (x̂·φ) J1(k|x|)`.
pub fn first_order_direction_sum(n: usize, k: f64, x: Point, phi: Point) -> Complex64 {
    let sum: Complex64 = (0..n)
        .map(|i| {
            let theta = direction(crate::forward::observation_angle(i, n));
            dot(phi, theta) * Complex64::from_polar(1.0, k * dot(theta, x))
        })
        .sum();
    sum * (2.0 * PI / n as f64)
}
