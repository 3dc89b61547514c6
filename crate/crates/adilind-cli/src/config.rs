//! Run configuration: one structured TOML file with every default embedded,
//! resolvable to a reproducible, hashable description of a run.

use adilind::model::{BuiltinParams, DriveKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub model: ModelConfig,
    pub params: Params,
    pub tolerances: Tolerances,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: 1,
            seed: 7,
            model: ModelConfig::default(),
            params: Params::default(),
            tolerances: Tolerances::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Built-in name, or "custom" with the `custom` table filled in.
    pub name: String,
    pub delta: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub theta_max: f64,
    pub drive: DriveKind,
    pub model_seed: u64,
    pub drive_scale: f64,
    pub jump_scale: f64,
    pub grid_intervals: usize,
    pub custom: Option<CustomModel>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = BuiltinParams::default();
        Self {
            name: "qubit-sx".into(),
            delta: p.delta,
            gamma0: p.gamma0,
            gamma1: p.gamma1,
            theta_max: p.theta_max,
            drive: p.drive,
            model_seed: p.seed,
            drive_scale: p.drive_scale,
            jump_scale: p.jump_scale,
            grid_intervals: 200,
            custom: None,
        }
    }
}

impl ModelConfig {
    pub fn builtin_params(&self) -> BuiltinParams {
        BuiltinParams {
            delta: self.delta,
            gamma0: self.gamma0,
            gamma1: self.gamma1,
            theta_max: self.theta_max,
            seed: self.model_seed,
            drive_scale: self.drive_scale,
            jump_scale: self.jump_scale,
            drive: self.drive,
        }
    }
}

/// A matrix as row-major [re, im] pairs with its dimension.
pub use adilind::operators::MatrixJson;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub dim: usize,
    /// Drive schedule for interpolated pairs and for the reparametrization
    /// of sampled curves; the flat-start switch when absent.
    #[serde(default)]
    pub schedule: Option<adilind::model::SmoothSchedule>,
    pub hamiltonian: PathSpec,
    #[serde(default)]
    pub jumps: Vec<PathSpec>,
}

/// A time-dependent matrix: constant, a pair interpolated by the drive
/// schedule (M₀ + s(t)·M₁), or samples from a CSV file (time column followed
/// by row-major re/im entry columns), reparametrized by the flat-start switch.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    #[serde(default)]
    pub constant: Option<MatrixJson>,
    #[serde(default)]
    pub h0: Option<MatrixJson>,
    #[serde(default)]
    pub h1: Option<MatrixJson>,
    #[serde(default)]
    pub csv: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub epsilon: f64,
    pub g: f64,
    /// Time scale of the reduced dynamics.
    pub delta: f64,
    pub t: f64,
    /// Superadiabatic order.
    pub order: usize,
    pub dyson_order: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            g: 0.01,
            delta: 1.0,
            t: 1.0,
            order: 1,
            dyson_order: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub integrator: f64,
    pub cptp: f64,
    pub intertwining: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrator: 1e-12,
            cptp: 1e-7,
            intertwining: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub suite: String,
    /// Empty: use the suite's default grid.
    pub epsilons: Vec<f64>,
    pub times: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            suite: "transition".into(),
            epsilons: Vec::new(),
            times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub quiet: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            quiet: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema_version != 1 {
            anyhow::bail!("schema_version: expected 1, got {}", self.schema_version);
        }
        for (name, v) in [
            ("params.epsilon", self.params.epsilon),
            ("params.delta", self.params.delta),
            ("params.t", self.params.t),
            ("tolerances.integrator", self.tolerances.integrator),
            ("tolerances.cptp", self.tolerances.cptp),
        ] {
            if !(v > 0.0) {
                anyhow::bail!("{name} must be strictly positive, got {v}");
            }
        }
        if self.params.g < 0.0 {
            anyhow::bail!("params.g must be nonnegative, got {}", self.params.g);
        }
        if self.model.grid_intervals < 10 {
            anyhow::bail!("model.grid_intervals must be at least 10");
        }
        if self.model.name == "custom" && self.model.custom.is_none() {
            anyhow::bail!("model.name = \"custom\" requires a [model.custom] table");
        }
        Ok(())
    }

    /// Canonical serialized form; embedded in every report for provenance.
    /// The volatile output section is normalized away so reruns of the same
    /// physics produce byte-identical files regardless of destination.
    pub fn canonical_toml(&self) -> String {
        let mut normalized = self.clone();
        normalized.output = OutputConfig::default();
        toml::to_string_pretty(&normalized).expect("config serializes")
    }

    /// Timestamp-free run hash (first 8 hex chars of SHA-256 over the
    /// canonical form, with the output section normalized away so the same
    /// run lands on the same filenames wherever it is written).
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.canonical_toml().as_bytes());
        let out = h.finalize();
        out[..4].iter().map(|b| format!("{b:02x}")).collect()
    }
}
