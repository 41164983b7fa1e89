//! Crate-wide error type.

use thiserror::Error;

use crate::cdga::ValidationReport;
use crate::strata::StratumId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("perversities bound to different strata posets")]
    PosetMismatch,

    #[error("unknown stratum `{0}`")]
    UnknownStratum(StratumId),

    #[error("duplicate stratum `{0}`")]
    DuplicateStratum(StratumId),

    #[error("stratum order is not a strict partial order (cycle through `{0}`)")]
    OrderNotStrict(StratumId),

    #[error("stratum `{0}` has no codimension, top perversity undefined")]
    MissingCodim(StratumId),

    #[error("perversity values must cover exactly the singular strata: {0}")]
    PerversityDomain(String),

    #[error("unknown basis element `{0}`")]
    UnknownBasisElement(String),

    #[error("duplicate basis element `{0}`")]
    DuplicateBasisElement(String),

    #[error("basis element `{element}` needs a perverse degree for every singular stratum")]
    PdegDomain { element: String },

    #[error("product entries must be listed with i <= j in basis order; got ({0}, {1})")]
    ProductPairOrder(String, String),

    #[error("product entry ({0}, {1}) listed twice")]
    DuplicateProduct(String, String),

    #[error("no two-sided unit of degree 0 found in the product table")]
    NoUnit,

    #[error("model validation failed: {0}")]
    Invalid(ValidationReport),

    #[error("coordinate vector has wrong length (got {got}, model has {expected})")]
    DimensionMismatch { got: usize, expected: usize },

    #[error("operation requires a homogeneous cochain; support spans degrees {0} and {1}")]
    MixedDegree(usize, usize),

    #[error("perversities are not comparable: {0}")]
    NotComparable(String),

    #[error("differential does not preserve the subspace (degree {degree})")]
    NonInvariantSubspace { degree: usize },

    #[error("cohomology class bookkeeping mismatch: {0}")]
    ClassBookkeeping(String),

    #[error("cochain of degree {got} where degree {expected} was required")]
    DegreeMismatch { got: usize, expected: usize },

    #[error("cochain is not a member of the Gysin term at the given perversity")]
    NotInGysinTerm,

    #[error("cochain is not a cocycle")]
    NotACocycle,

    #[error("Gysin term is not closed under the differential at degree {degree}")]
    GysinTermNotClosed { degree: usize },

    #[error("base isomorphism is not optimal; strata natures differ")]
    NotOptimal,

    #[error("models do not match the supplied base isomorphism: {0}")]
    IsoBinding(String),

    #[error("identity map requires matching basis signatures: {0}")]
    SignatureMismatch(String),

    #[error("invalid proportionality certificate: {0}")]
    BadCertificate(String),

    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Io(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
