use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("basis index {index} out of range (valid 0..{count})")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("parameter {t} outside [{start}, {end}]")]
    ParameterOutOfRange { t: f64, start: f64, end: f64 },

    #[error("knot {t} would reach multiplicity {multiplicity} > degree {degree}")]
    MultiplicityOverflow {
        t: f64,
        multiplicity: usize,
        degree: usize,
    },

    #[error("cannot lower degree from {from} to {to}")]
    DegreeLowering { from: usize, to: usize },

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("merge failed: {0}")]
    Merge(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("closest point search did not converge (best residual {residual:e})")]
    ProjectionFailed { residual: f64 },

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("marker error: {0}")]
    Markers(String),

    #[error("incompatible curves: {0}")]
    Incompatible(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("parameterization folds (min scaled Jacobian {min_sj})")]
    Fold { min_sj: f64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of numerical procedures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::NoConvergence { .. }
                | Error::ProjectionFailed { .. }
                | Error::Quadrature(_)
                | Error::Bracket(_)
                | Error::Singular(_)
                | Error::Fold { .. }
                | Error::Markers(_)
        )
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
