use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("map is not linear: deviation {deviation:.3e} on random probe")]
    NonlinearAction { deviation: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("eigenvalue labeling ambiguous at t = {t}: best overlaps {best:.3} and {second:.3} too close; refine the grid")]
    LabelingAmbiguous { t: f64, best: f64, second: f64 },

    #[error("eigenvalue labeling failed at t = {t}: {reason}")]
    LabelingFailed { t: f64, reason: String },

    #[error("integration failure for {family} at t = {t}: step size underflow (h = {h:.3e}, local error {err:.3e})")]
    IntegrationFailure {
        family: String,
        t: f64,
        h: f64,
        err: f64,
    },

    #[error("spectral band {band} is not a singleton at t = {t}")]
    NonSingletonBand { band: usize, t: f64 },

    #[error("degenerate Hamiltonian eigenvalue at t = {t} (gap {gap:.3e})")]
    DegenerateEigenvalue { t: f64, gap: f64 },

    #[error("gap of the order-{order} corrected Hamiltonian collapsed at t = {t} ({gap:.3e} < {floor:.3e}); decrease epsilon")]
    GapCollapse {
        order: usize,
        t: f64,
        gap: f64,
        floor: f64,
    },

    #[error("kernel dimension is {dim}, expected 1")]
    KernelDimension { dim: usize },

    #[error("unknown built-in model `{0}`")]
    UnknownModel(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("symmetry condition violated: {0}")]
    Symmetry(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
