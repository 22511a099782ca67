//! Error types shared across the crate.

use alloc::string::String;
use core::fmt;

/// Errors raised by the curvature algebra, the chart machinery and the
/// pointwise operator evaluations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input (dimensions, ranges, non-orthogonal matrices, ...).
    Argument(String),
    /// Symmetric-function order outside `0..=n`.
    OrderOutOfRange { order: usize, n: usize },
    /// A tuple left the cone Γ_r: `S_order` evaluated to `value ≤ 0`.
    ///
    /// `node` identifies the grid node for field-level checks and is `None`
    /// for pointwise algebra. The first violated order and its value are
    /// kept so a caller's line search can log how the cone was exited.
    Inadmissible {
        node: Option<usize>,
        order: usize,
        value: f64,
    },
    /// A quantity that must be positive was not; `node` names the offender.
    NonPositive { node: usize, value: f64 },
    /// The subsolution does not dominate the prescribed curvature.
    Subsolution { margin: f64 },
    /// Numerical breakdown (eigensolver stall, singular factorization, ...).
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::OrderOutOfRange { order, n } => {
                write!(f, "symmetric-function order {order} out of range 0..={n}")
            }
            Error::Inadmissible { node, order, value } => match node {
                Some(id) => write!(
                    f,
                    "inadmissible at node {id}: S_{order} = {value:e} is not positive"
                ),
                None => write!(f, "inadmissible tuple: S_{order} = {value:e} is not positive"),
            },
            Error::NonPositive { node, value } => {
                write!(f, "nonpositive value {value:e} at node {node}")
            }
            Error::Subsolution { margin } => {
                write!(f, "subsolution margin {margin:e} is not positive")
            }
            Error::Numeric(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
