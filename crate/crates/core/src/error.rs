//! Error taxonomy shared by every module of the crate.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// All failure modes of the library.
///
/// Domain errors flag parameters outside an operation's mathematical domain,
/// usage errors flag inconsistent shapes or horizons, and the remaining
/// variants carry the operator-theoretic failure modes (resolvent set,
/// series convergence, growth admissibility).
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter lies outside the operation's domain.
    Domain(&'static str),
    /// Two sequences were expected to share a horizon.
    HorizonMismatch { expected: usize, got: usize },
    /// The input sequence is too short for the requested operation.
    HorizonTooShort { needed: usize, got: usize },
    /// Vector or matrix dimensions disagree.
    DimMismatch { expected: usize, got: usize },
    /// A family and a problem disagree on order, dimension, or horizon.
    FamilyMismatch(&'static str),
    /// The shifted operator is singular within the pivot tolerance, i.e. the
    /// shift is not in the resolvent set as decided operationally.
    ResolventSet { shift: f64 },
    /// The requested construction method does not apply to this operator.
    MethodInapplicable(&'static str),
    /// An iterative computation hit its term or iteration cap.
    NoConvergence { context: &'static str, limit: usize },
    /// A declared growth bound exceeds what the Poisson transform admits.
    InadmissibleGrowth { omega: f64 },
    /// A computation produced a non-finite value.
    NonFinite { context: &'static str, index: usize },
    /// Declared callback data (e.g. a Lipschitz constant) failed its spot
    /// check.
    DeclarationViolated { context: &'static str, index: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::HorizonMismatch { expected, got } => {
                write!(f, "horizon mismatch: expected {expected}, got {got}")
            }
            Error::HorizonTooShort { needed, got } => {
                write!(f, "horizon too short: need at least {needed}, got {got}")
            }
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::FamilyMismatch(what) => write!(f, "family/problem mismatch: {what}"),
            Error::ResolventSet { shift } => {
                write!(f, "shift {shift} is not in the resolvent set (singular solve)")
            }
            Error::MethodInapplicable(why) => write!(f, "method inapplicable: {why}"),
            Error::NoConvergence { context, limit } => {
                write!(f, "{context}: no convergence within {limit} steps")
            }
            Error::InadmissibleGrowth { omega } => {
                write!(f, "growth bound omega = {omega} >= 1 is inadmissible")
            }
            Error::NonFinite { context, index } => {
                write!(f, "{context}: non-finite value at index {index}")
            }
            Error::DeclarationViolated { context, index } => {
                write!(f, "{context}: declared data violated at sample {index}")
            }
        }
    }
}

impl core::error::Error for Error {}
