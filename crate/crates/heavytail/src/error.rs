use thiserror::Error;

/// Errors produced by model construction, estimation, and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability argument {0} must lie in the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("reference tail is not the heaviest: factor index {factor_alpha} is below reference index {reference_alpha}")]
    ReferenceNotHeaviest {
        factor_alpha: f64,
        reference_alpha: f64,
    },

    #[error("tail coefficient undefined across incompatible slowly-varying families")]
    IncompatibleTailFamilies,

    #[error("model has no regularly-varying factor to serve as reference tail")]
    NoRegularlyVaryingFactor,

    #[error("estimator requires regularly-varying factors; model contains a Gaussian factor")]
    GaussianFactorUnsupported,

    #[error("draw vector has {got} entries but the model has {expected} factors")]
    DrawCountMismatch { expected: usize, got: usize },

    #[error("proposal {index} does not dominate its target factor on the target's support")]
    ProposalNotDominating { index: usize },

    #[error("proposal {index} has no closed-form density")]
    ProposalDensityUnavailable { index: usize },

    #[error("twist threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),

    #[error("residual aggregate bound requires tail index alpha > 1, got {0}")]
    PropositionInapplicable(f64),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error(
        "no exponential gain detected: fitted slope {beta1} >= 0 \
         (intercept {beta0}, tau^2 {tau2}, sigma^2 {sigma2}, censored cells {censored})"
    )]
    NoExponentialGain {
        beta0: f64,
        beta1: f64,
        tau2: f64,
        sigma2: f64,
        censored: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed model or config file: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
