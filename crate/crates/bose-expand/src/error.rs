//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode budget exceeded: (2K+1)^d = {modes} > budget {budget}")]
    ModeBudget { modes: u128, budget: u128 },

    #[error("basis budget exceeded: dimension {dim} > budget {budget}")]
    BasisBudget { dim: u128, budget: u128 },

    #[error("potential positivity violated at k = 2π·{k:?}: v̂ = {value}")]
    PotentialPositivity { k: Vec<i32>, value: f64 },

    #[error("potential evenness violated at k = 2π·{k:?}: v̂(k) = {value} but v̂(-k) = {mirror}")]
    PotentialEvenness { k: Vec<i32>, value: f64, mirror: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unnormalized state: ‖φ‖ = {norm}")]
    Unnormalized { norm: f64 },

    #[error("iteration limit {max_iter} reached, last residual {residual:.3e}")]
    IterationLimit { max_iter: usize, residual: f64 },

    #[error("unsupported on this model: {0}")]
    Unsupported(String),

    #[error("excitation sector {sector} exceeds particle number {n}")]
    SectorTruncation { sector: usize, n: usize },

    #[error("Bogoliubov instability at p = 2π·{k:?}: A = {a} ≤ |B| = {b}")]
    Instability { k: Vec<i32>, a: f64, b: f64 },

    #[error("sector cutoff too small: normalization defect {defect:.3e} > {threshold:.3e}")]
    CutoffTooSmall { defect: f64, threshold: f64 },

    #[error("singular resolvent: ε = 0 on a nonzero mode")]
    SingularResolvent,

    #[error("power-law fit needs {needed}+ strictly same-sign nonzero points, got {got}")]
    FitDomain { needed: usize, got: usize },

    #[error("λ-derivative stencil not Richardson-converged: spread {spread:.3e} (values {values:?})")]
    DerivativeStencil { spread: f64, values: Vec<f64> },

    #[error("time step control failed: {0}")]
    StepSize(String),

    #[error("non-hermitian observable: max asymmetry {defect:.3e}")]
    NonHermitian { defect: f64 },

    #[error("degenerate observable: σ = 0")]
    DegenerateObservable,

    #[error("extrapolation did not converge: {0}")]
    Extrapolation(String),

    #[error("inadmissible test function: {0}")]
    BadTestFunction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
