//! Assemble models from configuration: built-in families by name, or custom
//! models from inline matrices and CSV-sampled paths.

use std::path::Path;
use std::sync::Arc;

use adilind::linalg::CMat;
use adilind::model::{
    builtin_model, schedule::interp_cubic, LindbladModel, OperatorPath, SmoothSchedule,
};
use adilind::operators::hermiticity_deficit;
use anyhow::{bail, Context, Result};
use num_complex::Complex64;

use crate::config::{CustomModel, ModelConfig, PathSpec};

pub fn build_model(cfg: &ModelConfig, base_dir: &Path) -> Result<LindbladModel> {
    if cfg.name == "custom" {
        let custom = cfg.custom.as_ref().context("missing [model.custom]")?;
        return build_custom(cfg, custom, base_dir);
    }
    Ok(builtin_model(&cfg.name, &cfg.builtin_params())?)
}

fn build_custom(cfg: &ModelConfig, custom: &CustomModel, base_dir: &Path) -> Result<LindbladModel> {
    let d = custom.dim;
    let schedule = custom
        .schedule
        .clone()
        .unwrap_or(SmoothSchedule::FlatStartBump);
    let h = build_path(cfg, &custom.hamiltonian, &schedule, d, base_dir, true)
        .context("in [model.custom.hamiltonian]")?;
    let mut jumps = Vec::new();
    for (i, spec) in custom.jumps.iter().enumerate() {
        jumps.push(
            build_path(cfg, spec, &schedule, d, base_dir, false)
                .with_context(|| format!("in [model.custom.jumps] entry {i}"))?,
        );
    }
    Ok(LindbladModel::new("custom", h, jumps)?)
}

fn build_path(
    _cfg: &ModelConfig,
    spec: &PathSpec,
    schedule: &SmoothSchedule,
    dim: usize,
    base_dir: &Path,
    hermitian: bool,
) -> Result<OperatorPath> {
    let provided = [
        spec.constant.is_some(),
        spec.h0.is_some() || spec.h1.is_some(),
        spec.csv.is_some(),
    ];
    if provided.iter().filter(|x| **x).count() != 1 {
        bail!("specify exactly one of `constant`, `h0`/`h1`, or `csv`");
    }
    if let Some(m) = &spec.constant {
        let mat = checked_matrix(m, dim, hermitian)?;
        return Ok(OperatorPath::constant(mat, hermitian));
    }
    if spec.h0.is_some() || spec.h1.is_some() {
        let (Some(m0), Some(m1)) = (&spec.h0, &spec.h1) else {
            bail!("`h0` and `h1` must be given together");
        };
        let m0 = checked_matrix(m0, dim, hermitian)?;
        let m1 = checked_matrix(m1, dim, hermitian)?;
        let schedule = schedule.clone();
        return Ok(OperatorPath::from_fn(dim, hermitian, move |t| {
            &m0 + &m1.mapv(|z| z * schedule.eval(t))
        }));
    }
    let rel = spec.csv.as_deref().expect("csv present");
    let path = base_dir.join(rel);
    let (times, samples) = read_sampled(&path, dim)?;
    if hermitian {
        for (k, m) in samples.iter().enumerate() {
            if hermiticity_deficit(m) > 1e-9 {
                bail!("{}: sample {k} is not Hermitian", path.display());
            }
        }
    }
    // reparametrization: the sampled curve is driven through the schedule
    // (the flat-start switch unless configured otherwise)
    let samples = Arc::new(samples);
    let times = Arc::new(times);
    let schedule = schedule.clone();
    Ok(OperatorPath::from_fn(dim, hermitian, move |t| {
        let u = schedule.eval(t);
        CMat::from_shape_fn((dim, dim), |(r, c)| {
            let re: Vec<f64> = samples.iter().map(|m| m[[r, c]].re).collect();
            let im: Vec<f64> = samples.iter().map(|m| m[[r, c]].im).collect();
            Complex64::new(interp_cubic(&times, &re, u), interp_cubic(&times, &im, u))
        })
    }))
}

fn checked_matrix(m: &crate::config::MatrixJson, dim: usize, hermitian: bool) -> Result<CMat> {
    if m.dim != dim {
        bail!("matrix dim {} does not match model dim {dim}", m.dim);
    }
    let mat = m.to_mat()?;
    if hermitian && hermiticity_deficit(&mat) > 1e-9 {
        bail!("matrix tagged Hermitian is not Hermitian");
    }
    Ok(mat)
}

/// CSV layout: header `t,m00_re,m00_im,m01_re,…` with row-major entries.
fn read_sampled(path: &Path, dim: usize) -> Result<(Vec<f64>, Vec<CMat>)> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let expected = 1 + 2 * dim * dim;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != expected {
            bail!(
                "{}: row {} has {} columns, expected {expected}",
                path.display(),
                line + 2,
                record.len()
            );
        }
        let nums: Vec<f64> = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("{}: row {}", path.display(), line + 2))?;
        times.push(nums[0]);
        samples.push(CMat::from_shape_fn((dim, dim), |(r, c)| {
            let base = 1 + 2 * (r * dim + c);
            Complex64::new(nums[base], nums[base + 1])
        }));
    }
    if times.len() < 2 {
        bail!("{}: need at least two samples", path.display());
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        bail!(
            "{}: time column must be strictly increasing",
            path.display()
        );
    }
    Ok((times, samples))
}
