use core::fmt;

/// Errors shared by the numeric modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was NaN or infinite.
    NonFinite { what: &'static str },
    /// An argument fell outside its documented range.
    OutOfRange { what: &'static str },
    /// Requested eigenvalue is at or below the unreinforced disk eigenvalue
    /// `j_{0,0}^2`, where no reinforced radial solution exists.
    NotAdmissible { lambda1: f64 },
    /// An expression hit a zero denominator (e.g. `J0(a sqrt(lambda)) = 0`).
    Singular { what: &'static str },
    /// Bracketed root finding found no sign change.
    NoBracket { what: &'static str },
    /// A triangle with nonpositive signed area.
    DegenerateTriangle { index: usize },
    /// Vector/matrix/mesh dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// A nonzero vector was required.
    ZeroVector,
    /// Every element gradient vanished; the eigenfunction is degenerate.
    AllZeroGradients,
    /// An independent cross-validation route disagreed with the primary one.
    CrossCheckFailed { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { what } => write!(f, "non-finite input: {what}"),
            Error::OutOfRange { what } => write!(f, "out of range: {what}"),
            Error::NotAdmissible { lambda1 } => {
                write!(f, "lambda not admissible (<= j00^2): {lambda1}")
            }
            Error::Singular { what } => write!(f, "singular expression: {what}"),
            Error::NoBracket { what } => write!(f, "no sign change in bracket: {what}"),
            Error::DegenerateTriangle { index } => {
                write!(f, "triangle {index} has nonpositive area")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::ZeroVector => write!(f, "zero vector rejected"),
            Error::AllZeroGradients => write!(f, "all element gradients are zero"),
            Error::CrossCheckFailed { what } => write!(f, "cross-check failed: {what}"),
        }
    }
}
