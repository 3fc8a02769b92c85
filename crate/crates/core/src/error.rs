use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vectors live on different mode grids")]
    BasisMismatch,

    #[error("localization frame has rank {achieved} < {requested}; increase the radius or the grid resolution")]
    FrameRank { requested: usize, achieved: usize },

    #[error("Fock space would hold {requested} states, budget is {budget}")]
    DimensionBudget { requested: usize, budget: usize },

    #[error("Weyl operator with ||f|| = {norm:.3} is unreliable at n_max = {n_max} (limit n_max/8)")]
    TruncationRisk { norm: f64, n_max: usize },

    #[error("vector leaves the span of the mode family (residual {residual:.2e})")]
    OutsideModeSpan { residual: f64 },

    #[error("operation needs mode energies, which this Fock basis does not carry")]
    MissingEnergies,

    #[error("point {0} lies outside the open unit disk")]
    OutsideDisk(String),

    #[error("phi = {0} hits a logarithmic singularity of the damping function")]
    Singularity(f64),

    #[error("quadrature error estimate {estimate:.2e} exceeds tolerance {tolerance:.1e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("{0} slots exceed the partition enumeration cap of 12")]
    TooManySlots(usize),

    #[error("multi-index arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("series bound diverges (x = {x:.3} >= 1)")]
    Divergent { x: f64 },

    #[error("rejection sampler found no admissible configuration after {attempts} attempts")]
    Inadmissible { attempts: usize },

    #[error("dimension mismatch: {0}")]
    Shape(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
