use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// What went wrong while reading a delimited dataset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("input is empty")]
    EmptyInput,
    #[error("class column `{0}` not found in header")]
    MissingClassColumn(String),
    #[error("duplicate column `{0}` in header")]
    DuplicateColumn(String),
    #[error("expected {expected} fields, found {found}")]
    RaggedRow { expected: usize, found: usize },
    #[error("header has no feature columns")]
    NoFeatures,
    #[error("no data rows")]
    NoRows,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("product of level counts overflows 64 bits")]
    Overflow,
    #[error("instance does not conform to schema: {0}")]
    Nonconforming(String),
    #[error("invalid split fraction `{0}`: must lie strictly between 0 and 1")]
    InvalidFraction(String),
    #[error("dataset with N = {0} cannot be split (need N >= 2)")]
    TooSmall(u64),
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("graph is not decomposable (not chordal)")]
    NotDecomposable,
    #[error("graph has {graph} variables but schema has {schema}")]
    ArityMismatch { graph: usize, schema: usize },
    #[error("model was not fitted on this dataset")]
    ModelMismatch,
    #[error("models are not nested by at most one edge")]
    NotNested,
    #[error("degrees of freedom must be positive, got {0}")]
    InvalidDof(i64),
    #[error("invalid criterion configuration: {0}")]
    InvalidConfig(String),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("invalid model notation: {0}")]
    Notation(String),
    #[error("i/o error: {0}")]
    Io(String),
    /// An error raised inside one cell of an experiment grid.
    #[error("{cell}: {source}")]
    Cell { cell: String, source: Box<Error> },
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::Overflow => "overflow",
            Error::Nonconforming(_) => "nonconforming",
            Error::InvalidFraction(_) => "invalid_fraction",
            Error::TooSmall(_) => "too_small",
            Error::Graph(_) => "graph",
            Error::NotDecomposable => "not_decomposable",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::ModelMismatch => "model_mismatch",
            Error::NotNested => "not_nested",
            Error::InvalidDof(_) => "invalid_dof",
            Error::InvalidConfig(_) => "invalid_config",
            Error::EmptyTestSet => "empty_test_set",
            Error::Notation(_) => "notation",
            Error::Io(_) => "io",
            Error::Cell { source, .. } => source.code(),
        }
    }
}
