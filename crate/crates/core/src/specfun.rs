//! Cylindrical Bessel functions of the first kind and the constructs built on
//! them: the truncated Jacobi–Anger expansion and the envelope
//! `Λ(x) = J0(x)² + J1(x)²`.
//!
//! Evaluation uses the ascending power series for small arguments and Miller's
//! backward recurrence, normalized with `J0 + 2 Σ J_2j = 1`, everywhere else.
//! Both are accurate to about `1e-14` absolute for `|x| ≤ 100`.

use num_complex::Complex64;

use crate::error::{DsmError, Result};

/// Highest order accepted by [`bessel_j`] and [`bessel_j_sequence`].
pub const ORDER_CEILING: usize = 128;

/// Arguments up to this magnitude use the power series.
const SERIES_LIMIT: f64 = 8.0;

const RESCALE_ABOVE: f64 = 1e250;

/// `J_order(x)`.
pub fn bessel_j(order: usize, x: f64) -> Result<f64> {
    check_order(order)?;
    check_finite(x)?;
    if x.abs() <= SERIES_LIMIT {
        return Ok(power_series(order, x));
    }
    let seq = miller_sequence(order, x.abs());
    Ok(reflect(order, x, seq[order]))
}

/// `[J_0(x), J_1(x), …, J_max_order(x)]` in one backward sweep.
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_order(max_order)?;
    check_finite(x)?;
    if x.abs() <= SERIES_LIMIT {
        return Ok((0..=max_order).map(|n| power_series(n, x)).collect());
    }
    let mut seq = miller_sequence(max_order, x.abs());
    seq.truncate(max_order + 1);
    for (n, v) in seq.iter_mut().enumerate() {
        *v = reflect(n, x, *v);
    }
    Ok(seq)
}

/// Like [`bessel_j_sequence`] without the order ceiling, for `x ≥ 0`.
pub(crate) fn bessel_j_sequence_unbounded(max_order: usize, x: f64) -> Vec<f64> {
    debug_assert!(x >= 0.0 && x.is_finite());
    if x <= SERIES_LIMIT {
        return (0..=max_order).map(|n| power_series(n, x)).collect();
    }
    let mut seq = miller_sequence(max_order, x);
    seq.truncate(max_order + 1);
    seq
}

/// Truncation order used wherever a Bessel series is formally infinite:
/// `⌈|z|⌉ + 25`, capped at [`ORDER_CEILING`].
pub fn series_truncation(z: f64) -> usize {
    let s = z.abs().ceil() as usize + 25;
    s.min(ORDER_CEILING)
}

/// Truncated Jacobi–Anger expansion of `e^{i z cos φ}`:
/// `J0(z) + 2 Σ_{s=1..S} i^s J_s(z) cos(sφ)`.
pub fn jacobi_anger(z: f64, phi: f64, terms: usize) -> Result<Complex64> {
    if terms == 0 {
        return Err(DsmError::Domain("series truncation must be at least 1".into()));
    }
    let j = bessel_j_sequence(terms, z)?;
    let mut acc = Complex64::new(j[0], 0.0);
    for (s, js) in j.iter().enumerate().skip(1) {
        acc += 2.0 * i_pow(s) * js * (s as f64 * phi).cos();
    }
    Ok(acc)
}

/// `i^s` without accumulating rounding.
pub fn i_pow(s: usize) -> Complex64 {
    match s % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `Λ(x) = J0(x)² + J1(x)²`, non-increasing on `x ≥ 0` with `Λ(0) = 1`.
pub fn lambda_envelope(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(DsmError::Domain(format!(
            "lambda envelope needs x >= 0, got {x}"
        )));
    }
    let j = bessel_j_sequence(1, x)?;
    Ok(j[0] * j[0] + j[1] * j[1])
}

fn check_order(order: usize) -> Result<()> {
    if order > ORDER_CEILING {
        return Err(DsmError::UnsupportedOrder {
            order,
            ceiling: ORDER_CEILING,
        });
    }
    Ok(())
}

fn check_finite(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(DsmError::Domain(format!("Bessel argument must be finite, got {x}")));
    }
    Ok(())
}

fn reflect(order: usize, x: f64, v: f64) -> f64 {
    if x < 0.0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `Σ_j (-1)^j (x/2)^{2j+n} / (j! (j+n)!)`, summed until terms stop mattering.
fn power_series(order: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let mut j = 0usize;
    loop {
        j += 1;
        term *= -q / (j as f64 * (j + order) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || j > 200 {
            break;
        }
    }
    sum
}

/// Backward recurrence for `x > 0`. Returns at least `max_order + 1` values.
fn miller_sequence(max_order: usize, x: f64) -> Vec<f64> {
    let top = max_order.max(x.ceil() as usize);
    let start = 2 * ((top + 15 + (160.0 * top as f64).sqrt() as usize) / 2 + 1);
    let mut out = vec![0.0; max_order + 1];
    let two_over_x = 2.0 / x;

    let mut above = 0.0; // J_{n+1}
    let mut current = 1e-300; // J_n, arbitrary scale
    let mut norm = 0.0; // J_0 + 2 Σ J_2j in the running scale
    for n in (1..=start).rev() {
        let below = n as f64 * two_over_x * current - above;
        above = current;
        current = below;
        let idx = n - 1;
        if idx <= max_order {
            out[idx] = current;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            current /= RESCALE_ABOVE;
            above /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            for v in out.iter_mut().skip(idx) {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    norm += current; // J_0 term
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
