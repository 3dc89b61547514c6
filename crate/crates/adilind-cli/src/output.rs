//! Deterministic file writers: propagator tables as CSV with a JSON metadata
//! sidecar, real matrix tables, and sweep reports. Identical config + seed
//! must reproduce every file byte for byte, so no timestamps in files and all
//! floats printed with fixed full precision.

use std::fs;
use std::path::PathBuf;

use adilind::propagators::PropagatorTable;
use anyhow::{Context, Result};
use ndarray::Array2;
use serde_json::json;

pub struct Writer {
    dir: PathBuf,
    prefix: String,
    pub quiet: bool,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(
        dir: &str,
        model: &str,
        command: &str,
        eps: f64,
        g: f64,
        hash: &str,
        quiet: bool,
    ) -> Result<Self> {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let prefix = format!("{model}_{command}_eps{eps}_g{g}_{hash}");
        Ok(Self {
            dir,
            prefix,
            quiet,
            written: Vec::new(),
        })
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}", self.prefix))
    }

    pub fn write(&mut self, suffix: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(suffix);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        if !self.quiet {
            eprintln!("wrote {}", path.display());
        }
        self.written.push(path.clone());
        Ok(path)
    }

    /// Table CSV: columns (t, s, flattened entries as re/im pairs), plus a
    /// JSON sidecar with the family metadata.
    pub fn write_table(&mut self, table: &PropagatorTable, config_toml: &str) -> Result<()> {
        let n = table.dim();
        let mut csv = String::from("t,s");
        for r in 0..n {
            for c in 0..n {
                csv.push_str(&format!(",m{r}{c}_re,m{r}{c}_im"));
            }
        }
        csv.push('\n');
        for (k, &t) in table.times.iter().enumerate() {
            csv.push_str(&format!("{t:.17e},{:.17e}", table.s));
            for z in table.mats[k].iter() {
                csv.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
            }
            csv.push('\n');
        }
        self.write(&format!("{}.csv", table.family), &csv)?;

        let sidecar = json!({
            "schema_version": 1,
            "family": table.family,
            "epsilon": table.epsilon,
            "g": table.g,
            "s": table.s,
            "dim": n,
            "tol": table.tol,
            "achieved_error": table.achieved_error,
            "config": config_toml,
        });
        self.write(
            &format!("{}.json", table.family),
            &format!("{}\n", serde_json::to_string_pretty(&sidecar)?),
        )?;
        Ok(())
    }

    /// Real matrix family (splitting matrix, rates, populations): one row per
    /// time, row-major entries.
    pub fn write_real_table(
        &mut self,
        name: &str,
        times: &[f64],
        mats: &[Array2<f64>],
    ) -> Result<()> {
        let n = mats[0].nrows();
        let mut csv = String::from("t");
        for r in 0..n {
            for c in 0..n {
                csv.push_str(&format!(",m{r}{c}"));
            }
        }
        csv.push('\n');
        for (k, &t) in times.iter().enumerate() {
            csv.push_str(&format!("{t:.17e}"));
            for v in mats[k].iter() {
                csv.push_str(&format!(",{v:.17e}"));
            }
            csv.push('\n');
        }
        self.write(&format!("{name}.csv"), &csv)?;
        Ok(())
    }
}

pub fn check_line(name: &str, pass: Option<bool>, detail: &str) -> String {
    let verdict = match pass {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "n/a",
    };
    format!("  {name:<34} {verdict:<6} {detail}")
}
