//! Instantaneous spectral data of a Hermitian operator path: grouped
//! eigenvalues, spectral projectors, gap, and a labeling that is continued
//! along the time grid by maximal-overlap matching.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::Superoperator;

use super::OperatorPath;

/// Overlap below which two matched projectors are considered distinct bands,
/// and the ambiguity window for the matching (both on rank-normalized scores).
const MATCH_FLOOR: f64 = 0.5;
const MATCH_AMBIGUITY: f64 = 0.1;

/// Spectral data at a single time, in frame label order.
#[derive(Clone, Debug)]
pub struct FramePoint {
    pub t: f64,
    /// Eigenvalues of each labeled group, ascending within the group.
    pub eigenvalues: Vec<Vec<f64>>,
    pub projectors: Vec<CMat>,
}

impl FramePoint {
    pub fn group_count(&self) -> usize {
        self.projectors.len()
    }

    /// Per-group eigenvalue, requiring every group to be a singleton.
    pub fn energies(&self) -> Result<Vec<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(j, g)| {
                if g.len() == 1 {
                    Ok(g[0])
                } else {
                    Err(Error::NonSingletonBand { band: j, t: self.t })
                }
            })
            .collect()
    }

    /// Minimum distance between distinct groups.
    pub fn gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for j in 0..self.eigenvalues.len() {
            for k in j + 1..self.eigenvalues.len() {
                for &a in &self.eigenvalues[j] {
                    for &b in &self.eigenvalues[k] {
                        gap = gap.min((a - b).abs());
                    }
                }
            }
        }
        gap
    }
}

#[derive(Clone, Debug)]
pub struct SpectralFrame {
    pub grid: Vec<f64>,
    pub points: Vec<FramePoint>,
    /// Grouping threshold actually used.
    pub threshold: f64,
    /// Minimum inter-group distance over the grid.
    pub gap: f64,
    /// Matching permutation applied between consecutive grid points;
    /// `permutations[k][j]` is the raw group index at `t_{k+1}` that was
    /// assigned label `j`.
    pub permutations: Vec<Vec<usize>>,
    path: OperatorPath,
    fd_step: f64,
}

impl SpectralFrame {
    /// Eigendecompose the path on the grid, cluster eigenvalues into groups
    /// separated by more than `threshold` (default 0.1 × spectral diameter),
    /// and continue the group labels along the grid by overlap matching.
    pub fn build(path: &OperatorPath, grid: &[f64], threshold: Option<f64>) -> Result<Self> {
        assert!(
            grid.len() >= 2,
            "spectral frame needs at least two grid points"
        );
        if !path.hermitian {
            return Err(Error::Hypothesis(
                "spectral frame requires a Hermitian path".into(),
            ));
        }
        let decomps: Vec<(Vec<f64>, CMat)> = grid
            .iter()
            .map(|&t| linalg::eigh(&path.eval(t)))
            .collect::<Result<_>>()?;
        let threshold = threshold.unwrap_or_else(|| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (vals, _) in &decomps {
                lo = lo.min(vals[0]);
                hi = hi.max(*vals.last().unwrap());
            }
            0.1 * (hi - lo).max(1e-12)
        });

        let mut points = Vec::with_capacity(grid.len());
        let mut permutations = Vec::with_capacity(grid.len() - 1);
        for (k, ((vals, vecs), &t)) in decomps.iter().zip(grid).enumerate() {
            let raw = group_point(t, vals, vecs, threshold);
            if k == 0 {
                points.push(raw);
                continue;
            }
            let prev: &FramePoint = &points[k - 1];
            if raw.group_count() != prev.group_count() {
                return Err(Error::LabelingFailed {
                    t,
                    reason: format!(
                        "group count changed from {} to {}; adjust the grouping threshold",
                        prev.group_count(),
                        raw.group_count()
                    ),
                });
            }
            let perm = match_groups(&prev.projectors, &raw.projectors, t)?;
            points.push(apply_permutation(raw, &perm));
            permutations.push(perm);
        }

        let gap = points.iter().map(|p| p.gap()).fold(f64::INFINITY, f64::min);
        let fd_step = path.fd_step;
        Ok(Self {
            grid: grid.to_vec(),
            points,
            threshold,
            gap,
            permutations,
            path: path.clone(),
            fd_step,
        })
    }

    pub fn dim(&self) -> usize {
        self.path.dim
    }

    /// The underlying Hermitian path value.
    pub fn path_eval(&self, t: f64) -> CMat {
        self.path.eval(t)
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn group_count(&self) -> usize {
        self.points[0].group_count()
    }

    pub fn singleton(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.eigenvalues.iter().all(|g| g.len() == 1))
    }

    fn nearest_grid_index(&self, t: f64) -> usize {
        let h = self.grid[1] - self.grid[0];
        let k = ((t - self.grid[0]) / h).round() as i64;
        k.clamp(0, self.grid.len() as i64 - 1) as usize
    }

    /// Labeled spectral data at an arbitrary time, anchored to the nearest
    /// grid point.
    pub fn eval(&self, t: f64) -> Result<FramePoint> {
        let k = self.nearest_grid_index(t);
        if (t - self.grid[k]).abs() < 1e-12 {
            return Ok(self.points[k].clone());
        }
        let (vals, vecs) = linalg::eigh(&self.path.eval(t))?;
        let raw = group_point(t, &vals, &vecs, self.threshold);
        if raw.group_count() != self.group_count() {
            return Err(Error::LabelingFailed {
                t,
                reason: format!(
                    "group count {} off the grid vs {}",
                    raw.group_count(),
                    self.group_count()
                ),
            });
        }
        let perm = match_groups(&self.points[k].projectors, &raw.projectors, t)?;
        Ok(apply_permutation(raw, &perm))
    }

    /// Group an externally supplied Hermitian eigendecomposition with this
    /// frame's threshold and label it against the frame at time `t`. Used for
    /// perturbed Hamiltonians whose bands shadow this frame's bands.
    pub fn label_decomposition(&self, t: f64, vals: &[f64], vecs: &CMat) -> Result<FramePoint> {
        let raw = group_point(t, vals, vecs, self.threshold);
        if raw.group_count() != self.group_count() {
            return Err(Error::LabelingFailed {
                t,
                reason: format!(
                    "group count {} vs frame's {}",
                    raw.group_count(),
                    self.group_count()
                ),
            });
        }
        let k = self.nearest_grid_index(t);
        let perm = match_groups(&self.points[k].projectors, &raw.projectors, t)?;
        Ok(apply_permutation(raw, &perm))
    }

    /// 4th-order central finite difference of the labeled projector.
    pub fn projector_derivative(&self, label: usize, t: f64) -> Result<CMat> {
        let h = self.fd_step;
        let p = |u: f64| -> Result<CMat> { Ok(self.eval(u)?.projectors[label].clone()) };
        let num = p(t - 2.0 * h)? - p(t - h)?.mapv(|z| 8.0 * z) + p(t + h)?.mapv(|z| 8.0 * z)
            - p(t + 2.0 * h)?;
        Ok(num.mapv(|z| z / (12.0 * h)))
    }

    /// K(t) = Σ_j P'_j(t) P_j(t), the generator of parallel transport.
    pub fn kato_generator(&self, t: f64) -> Result<CMat> {
        let point = self.eval(t)?;
        let d = self.dim();
        let mut k = CMat::zeros((d, d));
        for j in 0..point.group_count() {
            k = k + self.projector_derivative(j, t)?.dot(&point.projectors[j]);
        }
        Ok(k)
    }

    /// The pinching superoperator ρ ↦ Σ_j P_j(t) ρ P_j(t). Independent of the
    /// labeling, so safe to differentiate without matching concerns.
    pub fn pinching(&self, t: f64) -> Result<Superoperator> {
        Ok(Superoperator::pinching(&self.eval(t)?.projectors))
    }

    /// Generator [𝒫₀'(t), 𝒫₀(t)] of the superoperator parallel transport.
    pub fn transport_generator(&self, t: f64) -> Result<CMat> {
        let h = self.fd_step;
        let p0 = self.pinching(t)?.mat;
        let f = |u: f64| -> Result<CMat> { Ok(self.pinching(u)?.mat) };
        let dp0 = (f(t - 2.0 * h)? - f(t - h)?.mapv(|z| 8.0 * z) + f(t + h)?.mapv(|z| 8.0 * z)
            - f(t + 2.0 * h)?)
        .mapv(|z| z / (12.0 * h));
        Ok(dp0.dot(&p0) - p0.dot(&dp0))
    }
}

fn group_point(t: f64, vals: &[f64], vecs: &CMat, threshold: f64) -> FramePoint {
    let d = vals.len();
    let mut bounds = vec![0usize];
    for i in 1..d {
        if vals[i] - vals[i - 1] > threshold {
            bounds.push(i);
        }
    }
    bounds.push(d);
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        eigenvalues.push(vals[lo..hi].to_vec());
        let mut p = CMat::zeros((d, d));
        for i in lo..hi {
            let v = vecs.column(i);
            for r in 0..d {
                for c in 0..d {
                    p[[r, c]] += v[r] * v[c].conj();
                }
            }
        }
        projectors.push(p);
    }
    FramePoint {
        t,
        eigenvalues,
        projectors,
    }
}

/// Greedy maximal-overlap assignment of candidate groups to reference labels,
/// on scores Tr(R_j C_m) normalized by rank. Errors if the best and runner-up
/// candidates for some label are within the ambiguity window.
fn match_groups(reference: &[CMat], candidates: &[CMat], t: f64) -> Result<Vec<usize>> {
    let n = reference.len();
    let rank = |p: &CMat| linalg::trace(p).re.max(1.0);
    let mut scores = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        for m in 0..n {
            let overlap = reference[j]
                .iter()
                .zip(candidates[m].iter())
                .map(|(a, b): (&Complex64, &Complex64)| a.conj() * b)
                .sum::<Complex64>()
                .re;
            scores[[j, m]] = overlap / rank(&reference[j]).min(rank(&candidates[m]));
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for _ in 0..n {
        // best unassigned (label, candidate) pair
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for j in 0..n {
            if perm[j] != usize::MAX {
                continue;
            }
            for m in 0..n {
                if !used[m] && scores[[j, m]] > best.2 {
                    best = (j, m, scores[[j, m]]);
                }
            }
        }
        let (j, m, s) = best;
        let mut second = f64::NEG_INFINITY;
        for m2 in 0..n {
            if m2 != m && !used[m2] {
                second = second.max(scores[[j, m2]]);
            }
        }
        if second > f64::NEG_INFINITY && (s - second) < MATCH_AMBIGUITY {
            return Err(Error::LabelingAmbiguous { t, best: s, second });
        }
        if s < MATCH_FLOOR {
            return Err(Error::LabelingFailed {
                t,
                reason: format!("best overlap {s:.3} below {MATCH_FLOOR}"),
            });
        }
        perm[j] = m;
        used[m] = true;
    }
    Ok(perm)
}

fn apply_permutation(raw: FramePoint, perm: &[usize]) -> FramePoint {
    FramePoint {
        t: raw.t,
        eigenvalues: perm.iter().map(|&m| raw.eigenvalues[m].clone()).collect(),
        projectors: perm.iter().map(|&m| raw.projectors[m].clone()).collect(),
    }
}
