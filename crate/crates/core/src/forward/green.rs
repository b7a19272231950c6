//! Pieces of the 2-D Helmholtz fundamental solution `Φ(r) = (i/4) H0⁽¹⁾(kr)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::specfun::bessel_j_sequence_unbounded;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `(J0(z), Ỹ(z))` where `Y0(z) = (2/π) ln(z/2) J0(z) + Ỹ(z)` and `Ỹ` is
/// smooth (even, entire). Valid for `z ≥ 0`.
pub fn j0_and_regular_y0(z: f64) -> (f64, f64) {
    if z <= 8.0 {
        // J0 = Σ (−q)^j/(j!)², Ỹ = (2/π)[γ J0 + Σ_{j≥1} (−1)^{j+1} H_j q^j/(j!)²], q = z²/4
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut j0 = 1.0;
        let mut harmonic_sum = 0.0;
        let mut h = 0.0;
        let mut j = 0;
        loop {
            j += 1;
            term *= -q / (j * j) as f64;
            h += 1.0 / j as f64;
            j0 += term;
            harmonic_sum -= h * term;
            if term.abs() * h < 1e-17 || j > 100 {
                break;
            }
        }
        (j0, 2.0 / PI * (EULER_GAMMA * j0 + harmonic_sum))
    } else {
        // Neumann series Ỹ = (2/π) γ J0 − (4/π) Σ_{j≥1} (−1)^j J_2j / j
        let top = 2 * ((z as usize + 60) / 2);
        let j = bessel_j_sequence_unbounded(top, z);
        let mut s = 0.0;
        for m in 1..=(top / 2) {
            let v = j[2 * m] / m as f64;
            s += if m % 2 == 0 { v } else { -v };
        }
        (j[0], 2.0 / PI * EULER_GAMMA * j[0] - 4.0 / PI * s)
    }
}

pub fn bessel_y0(z: f64) -> f64 {
    let (j0, reg) = j0_and_regular_y0(z);
    2.0 / PI * (0.5 * z).ln() * j0 + reg
}

/// `Φ(r) = (i/4) H0⁽¹⁾(kr)` for `r > 0`.
pub fn fundamental_solution(k: f64, r: f64) -> Complex64 {
    let z = k * r;
    let (j0, reg) = j0_and_regular_y0(z);
    let y0 = 2.0 / PI * (0.5 * z).ln() * j0 + reg;
    Complex64::new(-0.25 * y0, 0.25 * j0)
}

/// Split of `Φ` on a single straight crack of half-length `ℓ` parameterized by
/// `s = cos τ`: `Φ = L(z)·ln|cos t − cos τ| + S(z)` with
/// `z = kℓ|cos t − cos τ|`. Returns `(L, S)`.
pub fn log_split(k: f64, half_length: f64, z: f64) -> (f64, Complex64) {
    let (j0, reg) = j0_and_regular_y0(z);
    let log_part = -j0 / (2.0 * PI);
    let smooth = Complex64::new(
        -(0.5 * k * half_length).ln() * j0 / (2.0 * PI) - 0.25 * reg,
        0.25 * j0,
    );
    (log_part, smooth)
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from a standard special-function library
    const Y0_TABLE: [(f64, f64); 13] = [
        (0.01, -3.005455637083646),
        (0.1, -1.5342386513503667),
        (0.5, -0.4445187335067066),
        (1.0, 0.08825696421567697),
        (2.0, 0.5103756726497451),
        (5.0, -0.30851762524903303),
        (8.0, 0.22352148938756622),
        (10.0, 0.05567116728359961),
        (15.0, 0.20546429603891825),
        (20.0, 0.06264059680938369),
        (30.0, -0.11729573168666398),
        (45.0, 0.027060469763313603),
        (60.0, 0.047358952209449155),
    ];

    #[test]
    fn y0_matches_reference() {
        for (x, want) in Y0_TABLE {
            let got = bessel_y0(x);
            assert!((got - want).abs() < 1e-13, "Y0({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn series_and_neumann_branches_agree() {
        // the Neumann series is valid everywhere; the power series is used up to 8
        let neumann = |z: f64| {
            let top = 2 * ((z as usize + 60) / 2);
            let j = bessel_j_sequence_unbounded(top, z);
            let s: f64 = (1..=(top / 2))
                .map(|m| if m % 2 == 0 { j[2 * m] / m as f64 } else { -j[2 * m] / m as f64 })
                .sum();
            2.0 / PI * EULER_GAMMA * j[0] - 4.0 / PI * s
        };
        for &z in &[3.0, 6.5, 8.0, 9.0] {
            let (_, reg) = j0_and_regular_y0(z);
            assert!((reg - neumann(z)).abs() < 1e-13, "z={z}");
        }
    }

    #[test]
    fn split_reassembles_kernel() {
        let (k, l) = (12.5, 0.05);
        for &(t, tau) in &[(0.3, 1.1), (2.0, 0.2), (1.5, 1.5001)] {
            let d = (f64::cos(t) - f64::cos(tau)).abs();
            let (lg, sm) = log_split(k, l, k * l * d);
            let full = fundamental_solution(k, l * d);
            assert!((lg * d.ln() + sm - full).norm() < 1e-12);
        }
    }
}
