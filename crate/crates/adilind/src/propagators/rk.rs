//! One adaptive integrator for every two-parameter family in the crate:
//! an embedded Dormand-Prince 5(4) pair on the matrix-valued linear ODE
//! scale·Ẋ = 𝒢(t)·X, X(s) = I, with per-entry local error control.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs, CMat};

pub const DEFAULT_TOL: f64 = 1e-12;

/// The shared ODE shape scale·Ẋ = 𝒢(t)X. `scale` is ε for the driven
/// families and 1 for transport equations.
pub struct EvolutionProblem<'a> {
    pub family: String,
    pub scale: f64,
    pub generator: Box<dyn Fn(f64) -> Result<CMat> + 'a>,
}

impl<'a> EvolutionProblem<'a> {
    pub fn new(
        family: impl Into<String>,
        scale: f64,
        generator: impl Fn(f64) -> Result<CMat> + 'a,
    ) -> Self {
        Self {
            family: family.into(),
            scale,
            generator: Box::new(generator),
        }
    }
}

/// A two-parameter family X(t, s) sampled at fixed s on a list of times.
#[derive(Clone, Debug, Serialize)]
pub struct PropagatorTable {
    pub family: String,
    pub s: f64,
    pub times: Vec<f64>,
    #[serde(skip)]
    pub mats: Vec<CMat>,
    pub epsilon: f64,
    pub g: Option<f64>,
    pub tol: f64,
    /// Sum of accepted per-step error estimates: a rough global error bound.
    pub achieved_error: f64,
}

impl PropagatorTable {
    pub fn at(&self, t: f64) -> Result<&CMat> {
        self.times
            .iter()
            .position(|&u| (u - t).abs() < 1e-12)
            .map(|k| &self.mats[k])
            .ok_or_else(|| Error::OutOfRange(format!("time {t} not in table of {}", self.family)))
    }

    pub fn end(&self) -> &CMat {
        self.mats.last().expect("non-empty table")
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// max_k ‖X(t_k)* X(t_k) − I‖ (max-entry norm).
    pub fn unitarity_deficit(&self) -> f64 {
        let id = identity(self.dim());
        self.mats
            .iter()
            .map(|x| max_abs(&(crate::linalg::dagger(x).dot(x) - &id)))
            .fold(0.0, f64::max)
    }
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate the problem from `s`, recording X(t, s) at each requested output
/// time (which must be ≥ s, sorted ascending).
pub fn evolve(
    problem: &EvolutionProblem,
    s: f64,
    output_times: &[f64],
    tol: f64,
) -> Result<PropagatorTable> {
    assert!(tol > 0.0, "integrator tolerance must be positive");
    assert!(
        output_times.windows(2).all(|w| w[0] <= w[1]),
        "output times must be sorted"
    );
    if let Some(&t0) = output_times.first() {
        if t0 < s - 1e-12 {
            return Err(Error::OutOfRange(format!(
                "output time {t0} before initial time {s} in {}",
                problem.family
            )));
        }
    }

    let g0 = (problem.generator)(s)?;
    let n = g0.nrows();
    let mut x = identity(n);
    let mut t = s;
    let mut times = Vec::with_capacity(output_times.len());
    let mut mats = Vec::with_capacity(output_times.len());
    let mut accumulated = 0.0f64;

    let rhs = |u: f64, m: &CMat| -> Result<CMat> {
        Ok((problem.generator)(u)?.dot(m).mapv(|z| z / problem.scale))
    };

    let mut outputs = output_times.iter().copied().peekable();
    while let Some(&next) = outputs.peek() {
        if next <= s + 1e-15 {
            times.push(next);
            mats.push(x.clone());
            outputs.next();
        } else {
            break;
        }
    }
    let t_end = match output_times.last() {
        Some(&t) => t,
        None => {
            return Ok(PropagatorTable {
                family: problem.family.clone(),
                s,
                times,
                mats,
                epsilon: problem.scale,
                g: None,
                tol,
                achieved_error: 0.0,
            })
        }
    };

    // initial step ∝ the problem scale
    let mut h = (0.01 * problem.scale / (max_abs(&g0) + 1e-12))
        .min(t_end - t)
        .max(1e-10);
    let h_min = 1e-13 * (t_end - s).max(1.0);
    let mut k1 = rhs(t, &x)?;
    let mut steps = 0usize;

    while t < t_end - 1e-14 {
        steps += 1;
        if steps > 20_000_000 {
            return Err(Error::IntegrationFailure {
                family: problem.family.clone(),
                t,
                h,
                err: f64::NAN,
            });
        }
        // clip to the next output time without shrinking the natural step
        let mut h_try = h.min(t_end - t);
        let mut clipped = h_try < h;
        if let Some(&next) = outputs.peek() {
            if t + h_try > next {
                h_try = next - t;
                clipped = true;
            }
        }

        // stages
        let mut k = Vec::with_capacity(7);
        k.push(k1.clone());
        for i in 0..6 {
            let mut y = x.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[i][j];
                if a != 0.0 {
                    y = y + kj.mapv(|z| z * (a * h_try));
                }
            }
            k.push(rhs(t + C[i] * h_try, &y)?);
        }
        let mut x5 = x.clone();
        let mut err_mat = CMat::zeros((n, n));
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                x5 = x5 + kj.mapv(|z| z * (B5[j] * h_try));
            }
            let db = B5[j] - B4[j];
            if db != 0.0 {
                err_mat = err_mat + kj.mapv(|z| z * (db * h_try));
            }
        }
        let err = max_abs(&err_mat);

        if !err.is_finite() {
            return Err(Error::IntegrationFailure {
                family: problem.family.clone(),
                t,
                h: h_try,
                err,
            });
        }
        let factor = if err > 0.0 {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        if err <= tol {
            t += h_try;
            x = x5;
            accumulated += err;
            k1 = k[6].clone(); // FSAL
            while let Some(&next) = outputs.peek() {
                if (t - next).abs() < 1e-13 || t > next {
                    times.push(next);
                    mats.push(x.clone());
                    outputs.next();
                } else {
                    break;
                }
            }
            // a clipped accepted step must not drag the natural step down
            h = if clipped {
                h.max(h_try * factor)
            } else {
                h_try * factor
            };
        } else {
            h = h_try * factor;
            if h < h_min {
                return Err(Error::IntegrationFailure {
                    family: problem.family.clone(),
                    t,
                    h,
                    err,
                });
            }
        }
    }

    Ok(PropagatorTable {
        family: problem.family.clone(),
        s,
        times,
        mats,
        epsilon: problem.scale,
        g: None,
        tol,
        achieved_error: accumulated,
    })
}

/// Convenience: a single endpoint X(t, s).
pub fn evolve_to(problem: &EvolutionProblem, s: f64, t: f64, tol: f64) -> Result<CMat> {
    let table = evolve(problem, s, &[t], tol)?;
    Ok(table.mats.into_iter().next_back().expect("endpoint"))
}
