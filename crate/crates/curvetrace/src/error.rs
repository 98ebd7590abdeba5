//! Error type shared by all modules.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Everything that can go wrong in this crate.
///
/// Variants carry enough context to name the violated precondition or the
/// diagnostic state at failure; callers match on them to decide between
/// configuration errors and numerical failures.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid specification violates its invariants (extents, node counts).
    InvalidGridSpec(String),
    /// Two fields from different grids were combined.
    GridMismatch,
    /// A weight or divisor field is identically zero.
    ZeroField(&'static str),
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// LU factorization hit a zero pivot.
    SingularMatrix { pivot_index: usize },
    /// Eigensolver failed to reach the residual tolerance.
    EigenNoConvergence { residual: f64, tolerance: f64 },
    /// A coefficient violated the solvability cap q < nu - margin.
    SlopeCapViolation { max_q: f64, cap: f64 },
    /// Newton iteration diverged; best iterate summarized.
    NewtonDiverged {
        xi: f64,
        mu: f64,
        residual: f64,
        iterations: usize,
    },
    /// Adaptive step fell below the floor; reports the last good parameter.
    StepUnderflow { parameter: &'static str, last_good: f64 },
    /// More than one sign change of mu' along a trace (violates the
    /// one-turning-point prediction; reported, never silently resolved).
    MultipleTurningPoints { locations: Vec<f64> },
    /// Trace does not reach far enough for an asymptotic measurement.
    InsufficientRange { reached: f64, required: f64 },
    /// An orthogonality or harmonic constraint was violated on input.
    ConstraintViolation { value: f64, bound: f64 },
    /// lambda is too close to a discrete eigenvalue for a stable solve.
    NearEigenvalue { lambda: f64, eigenvalue: f64 },
    /// A field required to be strictly positive is not.
    NotPositive { what: &'static str, min: f64 },
    /// Hypotheses fall outside the classified cases (boundary or excluded).
    Unclassifiable(String),
    /// Newton at mu = 0 kept collapsing to the trivial solution.
    OnlyTrivialSolution { retries: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGridSpec(why) => write!(f, "invalid grid spec: {why}"),
            Error::GridMismatch => write!(f, "fields live on different grids"),
            Error::ZeroField(what) => write!(f, "{what} is identically zero"),
            Error::InvalidArgument(why) => write!(f, "invalid argument: {why}"),
            Error::SingularMatrix { pivot_index } => {
                write!(f, "singular matrix: zero pivot at index {pivot_index}")
            }
            Error::EigenNoConvergence { residual, tolerance } => write!(
                f,
                "eigensolver did not converge: residual {residual:.3e} > tolerance {tolerance:.3e}"
            ),
            Error::SlopeCapViolation { max_q, cap } => write!(
                f,
                "coefficient exceeds solvability cap: max q = {max_q:.6e} >= nu - margin = {cap:.6e}"
            ),
            Error::NewtonDiverged { xi, mu, residual, iterations } => write!(
                f,
                "Newton diverged at xi = {xi:.6e} after {iterations} iterations \
                 (best mu = {mu:.6e}, residual {residual:.3e})"
            ),
            Error::StepUnderflow { parameter, last_good } => write!(
                f,
                "step underflow continuing in {parameter}; last good value {last_good:.6e}"
            ),
            Error::MultipleTurningPoints { locations } => {
                write!(f, "multiple turning points detected at xi = {locations:?}")
            }
            Error::InsufficientRange { reached, required } => write!(
                f,
                "trace reaches |xi| = {reached:.3e}, need {required:.3e} for asymptotics"
            ),
            Error::ConstraintViolation { value, bound } => write!(
                f,
                "constraint violated: |<u,f>| = {value:.3e} exceeds bound {bound:.3e}"
            ),
            Error::NearEigenvalue { lambda, eigenvalue } => write!(
                f,
                "lambda = {lambda:.12e} is within the exclusion margin of eigenvalue {eigenvalue:.12e}"
            ),
            Error::NotPositive { what, min } => {
                write!(f, "{what} must be strictly positive (min value {min:.6e})")
            }
            Error::Unclassifiable(why) => write!(f, "classification refused: {why}"),
            Error::OnlyTrivialSolution { retries } => write!(
                f,
                "only the trivial solution found after {retries} reseeded attempts"
            ),
        }
    }
}

impl core::error::Error for Error {}
