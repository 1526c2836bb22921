use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants fall into two families: statistical degeneracies (the data are
/// valid but the requested quantity is undefined) and usage / input errors.
/// [`Error::is_degenerate`] separates them; the CLI maps the first family to
/// exit code 2 and the second to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("total variance 1'S1 is zero; coefficient undefined")]
    ZeroTotalVariance,
    #[error("variance estimate is zero; studentized statistic undefined")]
    ZeroVariance,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("lambda3 requires a split of the items into two nonempty parts")]
    MissingSplit,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("lambda6 requires error variances (or enable smc-derived error variances)")]
    MissingErrorVariances,
    #[error("invalid error variances: {0}")]
    InvalidErrorVariances(String),
    #[error("gradient singular: {0} is zero")]
    SingularGradient(&'static str),
    #[error("permutation methods are only applicable for an equal number of items (got {k1} and {k2})")]
    UnequalItemCounts { k1: usize, k2: usize },
    #[error("exact enumeration needs {count} assignments, above the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("thresholds must be strictly increasing")]
    UnsortedThresholds,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse { row: usize, col: usize, message: String },
    #[error("missing data at (row, column): {}", format_cells(.0))]
    MissingData(Vec<(usize, usize)>),
    #[error("non-rectangular input: row {row} has {found} fields, expected {expected}")]
    NonRectangular { row: usize, expected: usize, found: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_cells(cells: &[(usize, usize)]) -> String {
    let shown: Vec<String> = cells
        .iter()
        .take(20)
        .map(|(r, c)| format!("({r}, {c})"))
        .collect();
    let mut out = shown.join(", ");
    if cells.len() > 20 {
        out.push_str(&format!(" and {} more", cells.len() - 20));
    }
    out
}

impl Error {
    /// True for errors caused by statistical degeneracy of otherwise valid data.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateInput(_)
                | Error::ZeroTotalVariance
                | Error::ZeroVariance
                | Error::NotPsd { .. }
                | Error::SingularGradient(_)
                | Error::UnequalItemCounts { .. }
                | Error::CapExceeded { .. }
        )
    }

    /// Short machine-readable tag used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::ZeroTotalVariance => "ZeroTotalVariance",
            Error::ZeroVariance => "ZeroVariance",
            Error::NonSymmetric(_) => "NonSymmetric",
            Error::NotPsd { .. } => "NotPSD",
            Error::MissingSplit => "MissingSplit",
            Error::InvalidSplit(_) => "InvalidSplit",
            Error::MissingErrorVariances => "MissingErrorVariances",
            Error::InvalidErrorVariances(_) => "InvalidErrorVariances",
            Error::SingularGradient(_) => "SingularGradient",
            Error::UnequalItemCounts { .. } => "UnequalItemCounts",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::UnsortedThresholds => "UnsortedThresholds",
            Error::Unsupported(_) => "Unsupported",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse { .. } => "ParseError",
            Error::MissingData(_) => "MissingData",
            Error::NonRectangular { .. } => "NonRectangular",
            Error::Io(_) => "Io",
        }
    }
}
