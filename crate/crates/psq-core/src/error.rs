//! Error types for the exact algebra, transformation engine and grid lab.

use thiserror::Error;

/// Errors from the exact star-product / coefficient layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AlgebraError {
    #[error("star product of two exponential-phase functions is not supported in the exact layer")]
    UnsupportedProduct,
    #[error("exponential phases differ; sum is not representable: {0} vs {1}")]
    PhaseMismatch(String, String),
    #[error("constant term is zero; Neumann inverse series does not exist")]
    NonInvertibleConstantTerm,
    #[error("not a unit of the coefficient ring: {0}")]
    NotInvertible(String),
    #[error("division by zero value bound to symbol {0}")]
    DivisionByZero(String),
    #[error("symbol {0} has no bound numeric value")]
    UnboundSymbol(String),
}

/// Errors from canonical-transformation construction and verification.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CtError {
    #[error("matrix is not symplectic: det = {0}, expected 1")]
    NotSymplectic(String),
    #[error("a+d+2 = 0: the compact generating function is singular for this matrix")]
    SingularCayley,
    #[error("decomposition requires d != 0; the interchange block must be handled separately")]
    DegenerateDecomposition,
    #[error("exponent depends on both q and p; use the two-sided relation check instead")]
    MixedPhase,
    #[error("variant `{0}` has no exact polynomial action")]
    UnsupportedVariant(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Errors from the numeric point-transformation solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PointSolveError {
    #[error("denominator 2 - i*m*f'(q) vanishes near q = {0}")]
    SingularDenominator(f64),
    #[error("no convergence at q = {q}: residual {residual:.3e} after {iters} iterations")]
    NoConvergence { q: f64, residual: f64, iters: usize },
    #[error("flow escaped (|q| > {bound:.1e}) at t = {t:.4} from q0 = {q0}")]
    FlowEscape { q0: f64, t: f64, bound: f64 },
    #[error("integrand singular (1 + Qtilde = 0) near q = {0}")]
    SingularIntegrand(f64),
    #[error("sample outside admissible domain: {0}")]
    DomainError(String),
    #[error("zero mode vanishes at sample q = {0}")]
    ZeroNode(f64),
}

/// Errors from the sampled-grid laboratory.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GridError {
    #[error("grid of {requested} points exceeds the configured limit {limit}")]
    ResourceLimit { requested: usize, limit: usize },
    #[error("resolved band too small ({modes} modes) for the requested tolerance")]
    UnderResolved { modes: usize },
    #[error("argument {0} outside the Airy working range")]
    OutOfRange(f64),
    #[error("grid dimensions or ranges are inconsistent: {0}")]
    ShapeMismatch(String),
    #[error("malformed grid file: {0}")]
    Format(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
