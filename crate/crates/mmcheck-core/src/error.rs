use thiserror::Error;

/// Errors produced by parsing, construction and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed expression text.
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// Identifier that is not `x` and not a known function name.
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    /// Evaluation outside the domain of a function or oracle.
    #[error("domain error: {0}")]
    Domain(String),

    /// A derivative of higher order than the oracle can provide.
    #[error("derivative order {requested} exceeds available order {available}")]
    OrderExceeded { requested: u32, available: u32 },

    /// Evaluation at a pole or a zero denominator.
    #[error("singular point at {at}: {context}")]
    Singular { at: f64, context: String },

    /// Invalid point tuple (outside interval, too few points, NaN, ...).
    #[error("invalid points: {0}")]
    InvalidPoints(String),

    /// Residue requested at a pole the denominator does not record.
    #[error("pole {pole} with multiplicity {multiplicity} is not recorded in the denominator")]
    PoleMismatch { pole: f64, multiplicity: u32 },

    /// Contour integration set-up failure.
    #[error("contour error: {0}")]
    Contour(String),

    /// Complex evaluation requested for a function with no usable analytic continuation.
    #[error("function has no analytic continuation usable here")]
    NotAnalytic,

    /// Evaluation point that must lie outside the kernel support but does not.
    #[error("z = {z} lies inside the kernel support [{lo}, {hi}]")]
    InsideSupport { z: f64, lo: f64, hi: f64 },

    /// Any other invalid argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
