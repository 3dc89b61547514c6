//! Composite Simpson quadrature, scalar and matrix valued, with the grid
//! doubling used by every formula integral in this crate.

use num_complex::Complex64;

use crate::linalg::{max_abs, CMat};

/// Composite Simpson on `n` intervals (`n` even) over [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson with grid doubling until the relative change drops below `rtol`.
pub fn simpson_refined<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n0: usize, rtol: f64) -> f64 {
    let mut n = n0.max(8);
    let mut prev = simpson(&f, a, b, n);
    for _ in 0..12 {
        n *= 2;
        let next = simpson(&f, a, b, n);
        if (next - prev).abs() <= rtol * next.abs().max(1e-300) {
            return next;
        }
        prev = next;
    }
    prev
}

/// Matrix-valued composite Simpson on `n` intervals.
pub fn simpson_mat<F: Fn(f64) -> crate::Result<CMat>>(
    f: F,
    a: f64,
    b: f64,
    n: usize,
) -> crate::Result<CMat> {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a)? + f(b)?;
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc = acc + f(a + k as f64 * h)?.mapv(|z| z * w);
    }
    Ok(acc.mapv(|z| z * Complex64::new(h / 3.0, 0.0)))
}

/// Matrix-valued Simpson with grid doubling until the relative change (max
/// entry) drops below `rtol`.
pub fn simpson_mat_refined<F: Fn(f64) -> crate::Result<CMat>>(
    f: F,
    a: f64,
    b: f64,
    n0: usize,
    rtol: f64,
) -> crate::Result<CMat> {
    let mut n = n0.max(8);
    let mut prev = simpson_mat(&f, a, b, n)?;
    for _ in 0..8 {
        n *= 2;
        let next = simpson_mat(&f, a, b, n)?;
        let scale = max_abs(&next).max(1e-300);
        if max_abs(&(&next - &prev)) <= rtol * scale {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// Cumulative integral of uniformly sampled matrix values: `out[k]` ≈
/// ∫_{t_0}^{t_k}. Simpson on even prefixes; odd endpoints use the quadratic
/// through the last three samples.
pub fn cumulative_simpson(values: &[CMat], h: f64) -> Vec<CMat> {
    let n = values.len();
    assert!(n >= 1);
    let dim = values[0].dim();
    let mut out = Vec::with_capacity(n);
    out.push(CMat::zeros(dim));
    for k in 1..n {
        let prev = if k >= 2 { &out[k - 2] } else { &out[0] };
        if k == 1 {
            // quadratic through the first three points, integrated on [t0, t1]
            if n >= 3 {
                let inc = values[0].mapv(|z| z * (5.0 / 12.0))
                    + values[1].mapv(|z| z * (8.0 / 12.0))
                    + values[2].mapv(|z| z * (-1.0 / 12.0));
                out.push(inc.mapv(|z| z * h));
            } else {
                let inc = (&values[0] + &values[1]).mapv(|z| z * (h / 2.0));
                out.push(inc);
            }
            continue;
        }
        // Simpson over [t_{k-2}, t_k] added to the k−2 prefix
        let inc =
            (values[k - 2].clone() + values[k - 1].mapv(|z| z * 4.0) + values[k].mapv(|z| z * 1.0))
                .mapv(|z| z * (h / 3.0));
        out.push(prev + &inc);
    }
    out
}
