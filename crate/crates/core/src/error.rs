use thiserror::Error;

/// Errors produced by the builders, iterations and post-processing routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site index {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("chain of {n_sites} sites exceeds the resource guard of {max_sites} sites")]
    TooManySites { n_sites: usize, max_sites: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("coupling `{name}` must be non-negative, got {value}")]
    NegativeCoupling { name: &'static str, value: f64 },

    #[error("total spin {s} is incompatible with {n_sites} sites")]
    IncompatibleSector { s: f64, n_sites: usize },

    #[error("operator violates the {symmetry} symmetry (commutator norm {norm:.3e})")]
    SymmetryViolation { symmetry: &'static str, norm: f64 },

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("vector length {len} is not a perfect square")]
    NotPerfectSquare { len: usize },

    #[error("generator is not Hermitian; use bilanczos for non-Hermitian generators")]
    GeneratorNotHermitian,

    #[error("seed vector norm {norm} is not 1 within tolerance")]
    SeedNotNormalized { norm: f64 },

    #[error("seed vector is annihilated by the generator (breakdown at step 0)")]
    SeedAnnihilated,

    #[error("re-orthogonalization failed at step {step}: bi-orthonormality residual {residual:.3e}")]
    ReorthFailure { step: usize, residual: f64 },

    #[error("basis storage would need {estimate_bytes} bytes, above the cap of {cap_bytes}")]
    MemoryBudget { estimate_bytes: usize, cap_bytes: usize },

    #[error("dense spectrum check limited to dimension {max_dim}, got {dim}")]
    SpectrumGuard { dim: usize, max_dim: usize },

    #[error("tridiagonal property violated at index {index}: {what} (residual {residual:.3e})")]
    PropertyViolation { index: usize, what: &'static str, residual: f64 },

    #[error("integrator failed to meet tolerance near t = {t}")]
    IntegratorFailure { t: f64 },

    #[error("oracle evolution limited to superoperator dimension {max_dim}, got {dim}")]
    OracleGuard { dim: usize, max_dim: usize },

    #[error("degenerate fit range [{start}, {end})")]
    DegenerateRange { start: usize, end: usize },

    #[error("eta model needs at least 3 non-collinear (alpha, gamma) points")]
    RankDeficient,

    #[error("empty averaging window")]
    EmptyWindow,

    #[error("support profile requires a full-space vector of dimension 4^N = {expected}, got {got}")]
    SectoredSupport { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear algebra backend error: {0}")]
    Backend(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
