//! Smooth drive schedules with a flat start.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// θ(t) = f(t) / (f(t) + f(1−t)) with f(t) = exp(−1/t) for t > 0 and
/// f(0) = 0. C∞, monotone from 0 to 1, all derivatives vanish at both ends.
pub fn smooth_switch(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!(
            "smooth_switch argument {t} outside [0,1]"
        )));
    }
    Ok(switch_extended(t))
}

/// Same switch, extended constantly outside `[0,1]`. The extension is still C∞
/// because every derivative vanishes at the endpoints; paths built on it can
/// be finite-differenced right up to (and slightly past) the boundary.
pub fn switch_extended(t: f64) -> f64 {
    let f = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let (a, b) = (f(t), f(1.0 - t));
    if a + b == 0.0 {
        // only reachable through floating underflow far outside [0,1]
        return if t >= 0.5 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmoothSchedule {
    /// The flat-start switch above.
    FlatStartBump,
    /// Σ c_k t^k. No flat-start guarantee; the hypothesis report will say so.
    Polynomial { coefficients: Vec<f64> },
    /// Piecewise-cubic interpolation of user samples on `[0,1]`.
    UserSampled { times: Vec<f64>, values: Vec<f64> },
}

impl SmoothSchedule {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            SmoothSchedule::FlatStartBump => switch_extended(t),
            SmoothSchedule::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            SmoothSchedule::UserSampled { times, values } => interp_cubic(times, values, t),
        }
    }
}

/// Local 4-point Lagrange interpolation on a sorted sample grid, clamped at
/// the boundary.
pub fn interp_cubic(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    let n = ts.len();
    assert!(n >= 2 && n == vs.len());
    let t = t.clamp(ts[0], ts[n - 1]);
    let mut k = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    k = k.min(n - 2);
    if n < 4 {
        // linear fallback
        let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
        return vs[k] * (1.0 - w) + vs[k + 1] * w;
    }
    let lo = k.saturating_sub(1).min(n - 4);
    let mut out = 0.0;
    for i in lo..lo + 4 {
        let mut l = 1.0;
        for j in lo..lo + 4 {
            if j != i {
                l *= (t - ts[j]) / (ts[i] - ts[j]);
            }
        }
        out += vs[i] * l;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switch_endpoints_and_midpoint() {
        assert_eq!(smooth_switch(0.0).unwrap(), 0.0);
        assert_eq!(smooth_switch(1.0).unwrap(), 1.0);
        // symmetry f(t) ↔ f(1−t)
        assert!((smooth_switch(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(smooth_switch(-0.1).is_err());
        assert!(smooth_switch(1.1).is_err());
    }

    #[test]
    fn switch_monotone() {
        let mut prev = 0.0;
        for k in 0..=1000 {
            let v = smooth_switch(k as f64 / 1000.0).unwrap();
            assert!(v >= prev - 1e-16);
            prev = v;
        }
    }

    #[test]
    fn switch_flat_start_derivative() {
        // Finite-difference oracle at two step sizes.
        for h in [1e-4, 5e-5] {
            let t = 1e-3;
            let d = (switch_extended(t + h) - switch_extended(t - h)) / (2.0 * h);
            assert!(d.abs() <= 1e-8, "derivative {d:.3e} at step {h}");
        }
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let ts: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let f = |t: f64| 0.3 - 1.2 * t + 0.5 * t * t + 2.0 * t * t * t;
        let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        for &t in &[0.013, 0.31, 0.5, 0.77, 0.999] {
            assert!((interp_cubic(&ts, &vs, t) - f(t)).abs() < 1e-12);
        }
    }
}
