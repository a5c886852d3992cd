use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why the pipeline refused to proceed after the unit-root stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Precondition {
    /// A variable is still non-stationary after first differencing.
    I2Variable(String),
    /// The dependent variable is already stationary in levels (strict mode only).
    DependentNotI1(String),
}

impl std::fmt::Display for Precondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precondition::I2Variable(name) => {
                write!(f, "{name} is integrated of order two or higher")
            }
            Precondition::DependentNotI1(name) => {
                write!(f, "dependent variable {name} is stationary in levels")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {value:?} at row {row}, column {col}")]
    Parse { row: usize, col: usize, value: String },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("years are not consecutive: {found} follows {previous}")]
    GapInYears { previous: i64, found: i64 },

    #[error("duplicate column {0:?}")]
    DuplicateColumn(String),

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("invalid series {name:?}: {reason}")]
    InvalidSeries { name: String, reason: String },

    #[error("lag {lag} is too large for a series of length {len}")]
    LagTooLarge { lag: usize, len: usize },

    #[error("order must be positive")]
    ZeroOrder,

    #[error("year ranges do not overlap")]
    EmptyIntersection,

    #[error("empty input")]
    EmptyInput,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("degenerate range for {0:?}")]
    DegenerateRange(String),

    #[error("column {0:?} is constant")]
    ConstantColumn(String),

    #[error("non-positive denominator {value} in {year}")]
    NonPositiveDenominator { year: i32, value: f64 },

    #[error("design matrix is rank deficient")]
    SingularDesign,

    #[error("{nobs} observations cannot identify {nparams} parameters")]
    InsufficientObservations { nobs: usize, nparams: usize },

    #[error("bandwidth {bandwidth} must be below the sample size {nobs}")]
    BandwidthTooLarge { bandwidth: usize, nobs: usize },

    #[error("models are not nested: {0}")]
    NestedModelMismatch(String),

    #[error("sample too short: need more than {needed} observations, have {available}")]
    SampleTooShort { needed: usize, available: usize },

    #[error("unsupported deterministic case {0}")]
    UnsupportedCase(String),

    #[error("no critical values tabulated for k = {0}")]
    KOutOfRange(usize),

    #[error("long-run multiplier undefined: 1 - sum(phi) = {0:e}")]
    UnitRootInDynamics(f64),

    #[error("lag order must be at least one")]
    InvalidLags,

    #[error("design has no non-constant regressor")]
    DegenerateDesign,

    #[error("no powers given for the RESET test")]
    EmptyPowers,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(Precondition),

    #[error("output directory {} is not writable: {reason}", path.display())]
    OutputDirNotWritable { path: PathBuf, reason: String },

    #[error("{}{stage}: {source}", model.as_deref().map(|m| format!("{m}, ")).unwrap_or_default())]
    Stage {
        model: Option<String>,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, model: Option<&str>, stage: &'static str) -> Error {
        Error::Stage {
            model: model.map(str::to_owned),
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with any stage annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_precondition(&self) -> bool {
        matches!(self.root(), Error::PreconditionViolated(_))
    }
}
