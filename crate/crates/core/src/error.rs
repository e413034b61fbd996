use alloc::string::String;

/// Everything that can go wrong while building or solving a model.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transform argument {argument} is outside the domain of convergence (abscissa {abscissa})")]
    Domain { argument: f64, abscissa: f64 },

    #[error("kernel truncation deficit {deficit:e} exceeds bound {bound:e}; increase n_max")]
    Truncation { deficit: f64, bound: f64 },

    #[error("vacation law puts all mass on zero arrivals; use the standard queue (b = a)")]
    DegenerateVacation,

    #[error("kernel covers indices up to {available}, need {needed}")]
    KernelTooShort { needed: usize, available: usize },

    #[error("invalid capacity {0}")]
    InvalidCapacity(usize),

    #[error("recursion lost precision at index {index} (value {value:e}); raise the working precision")]
    PrecisionLoss { index: usize, value: f64 },

    #[error("no root of z = S*(λ-λz) in the requested interval: {0}")]
    NoRoot(String),

    #[error("model does not fall in a supported asymptotic regime: {0}")]
    Unclassifiable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Short variant name, used by front ends that report error kinds.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Domain { .. } => "DomainError",
            Error::Truncation { .. } => "TruncationError",
            Error::DegenerateVacation => "DegenerateVacation",
            Error::KernelTooShort { .. } => "KernelTooShort",
            Error::InvalidCapacity(_) => "InvalidCapacity",
            Error::PrecisionLoss { .. } => "PrecisionLoss",
            Error::NoRoot(_) => "NoRootError",
            Error::Unclassifiable(_) => "UnclassifiableError",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }

    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::PrecisionLoss { .. }
                | Error::NoRoot(_)
                | Error::Unclassifiable(_)
                | Error::Domain { .. }
                | Error::Truncation { .. }
                | Error::KernelTooShort { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
