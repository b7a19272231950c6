//! Linear crack geometry.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{invalid, DsmError, Result};

pub type Point = [f64; 2];

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn rotate(p: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

/// Unit vector `[cos a, sin a]`.
pub fn direction(angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    [c, s]
}

/// A straight crack `{center + s·t : −ℓ ≤ s ≤ ℓ}` with `t = [cos φ, sin φ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crack {
    pub center: Point,
    pub half_length: f64,
    pub rotation: f64,
}

impl Crack {
    pub fn new(center: Point, half_length: f64, rotation: f64) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return invalid(format!("crack half-length must be positive, got {half_length}"));
        }
        if !center[0].is_finite() || !center[1].is_finite() || !rotation.is_finite() {
            return invalid("crack center and rotation must be finite");
        }
        Ok(Self {
            center,
            half_length,
            rotation,
        })
    }

    pub fn tangent(&self) -> Point {
        direction(self.rotation)
    }

    pub fn endpoints(&self) -> (Point, Point) {
        let t = self.tangent();
        let l = self.half_length;
        (
            [self.center[0] - l * t[0], self.center[1] - l * t[1]],
            [self.center[0] + l * t[0], self.center[1] + l * t[1]],
        )
    }

    /// Point at parameter `s ∈ [−1, 1]`.
    pub fn point_at(&self, s: f64) -> Point {
        let t = self.tangent();
        let a = s * self.half_length;
        [self.center[0] + a * t[0], self.center[1] + a * t[1]]
    }
}

pub fn crack_tangent(crack: &Crack) -> Point {
    crack.tangent()
}

pub fn crack_endpoints(crack: &Crack) -> (Point, Point) {
    crack.endpoints()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub cracks: Vec<Crack>,
}

impl Scene {
    /// Rejects repeated centers.
    pub fn new(cracks: Vec<Crack>) -> Result<Self> {
        for i in 0..cracks.len() {
            for j in (i + 1)..cracks.len() {
                if cracks[i].center == cracks[j].center {
                    return invalid(format!("cracks {i} and {j} share a center"));
                }
            }
        }
        Ok(Self { cracks })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cracks.is_empty()
    }

    /// `Some(ℓ)` when every crack has the same half-length.
    pub fn common_half_length(&self) -> Option<f64> {
        let first = self.cracks.first()?.half_length;
        self.cracks
            .iter()
            .all(|c| c.half_length == first)
            .then_some(first)
    }

    /// The same scene rotated about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            cracks: self
                .cracks
                .iter()
                .map(|c| Crack {
                    center: rotate(c.center, angle),
                    half_length: c.half_length,
                    rotation: c.rotation + angle,
                })
                .collect(),
        }
    }
}

/// The three-crack benchmark scene with half-lengths `(ℓ1, ℓ2, ℓ3)`.
///
/// Cracks 2 and 3 are given as rotated segments `R_α [s + a, s + b]`; they are
/// stored with center `R_α [a, b]`, angle `π/4 + α` and half-length `ℓ`
/// (not `√2·ℓ`, although the segment parameter moves at speed `√2`).
pub fn benchmark_scene(half_lengths: [f64; 3]) -> Scene {
    let c1 = Crack {
        center: [0.6, 0.2],
        half_length: half_lengths[0],
        rotation: 0.0,
    };
    let c2 = Crack {
        center: rotate([-0.4, -0.35], PI / 4.0),
        half_length: half_lengths[1],
        rotation: PI / 4.0 + PI / 4.0,
    };
    let c3 = Crack {
        center: rotate([-0.25, 0.6], 7.0 * PI / 6.0),
        half_length: half_lengths[2],
        rotation: PI / 4.0 + 7.0 * PI / 6.0,
    };
    Scene {
        cracks: vec![c1, c2, c3],
    }
}

/// Thresholds used by [`validate_scene`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneLimits {
    /// Required lower bound (strict) on `k·|c_m − c_m'|`.
    pub min_separation: f64,
    /// Required upper bound (strict) on `k·ℓ_m`.
    pub max_size: f64,
}

impl Default for SceneLimits {
    fn default() -> Self {
        Self {
            min_separation: 0.75,
            max_size: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// Asymptotic regime not met; data generation still proceeds.
    Warning,
    /// Cracks too close for the model; data generation refuses the scene.
    Hard,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Separation { first: usize, second: usize, value: f64 },
    Size { crack: usize, value: f64 },
}

impl Violation {
    pub fn severity(&self) -> Severity {
        match self {
            Violation::Separation { .. } => Severity::Hard,
            Violation::Size { .. } => Severity::Warning,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Separation {
                first,
                second,
                value,
            } => write!(f, "cracks {first} and {second}: k*|c1-c2| = {value} is not > 3/4"),
            Violation::Size { crack, value } => {
                write!(f, "crack {crack}: k*half_length = {value} is too large")
            }
        }
    }
}

pub fn validate_scene(scene: &Scene, k: f64) -> Result<Vec<Violation>> {
    validate_scene_with(scene, k, SceneLimits::default())
}

pub fn validate_scene_with(scene: &Scene, k: f64, limits: SceneLimits) -> Result<Vec<Violation>> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(DsmError::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let mut out = Vec::new();
    let cracks = &scene.cracks;
    for i in 0..cracks.len() {
        for j in (i + 1)..cracks.len() {
            let value = k * distance(cracks[i].center, cracks[j].center);
            if !(value > limits.min_separation) {
                out.push(Violation::Separation {
                    first: i,
                    second: j,
                    value,
                });
            }
        }
    }
    for (i, c) in cracks.iter().enumerate() {
        let value = k * c.half_length;
        if !(value < limits.max_size) {
            out.push(Violation::Size { crack: i, value });
        }
    }
    Ok(out)
}

/// Fails with [`DsmError::SceneRejected`] if any hard violation is present.
pub fn reject_hard_violations(scene: &Scene, k: f64) -> Result<Vec<Violation>> {
    let v = validate_scene(scene, k)?;
    let hard: Vec<_> = v
        .iter()
        .filter(|x| x.severity() == Severity::Hard)
        .cloned()
        .collect();
    if hard.is_empty() {
        Ok(v)
    } else {
        Err(DsmError::SceneRejected(hard))
    }
}
