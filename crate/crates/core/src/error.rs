use thiserror::Error;

/// Errors surfaced by the library API.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scalar mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("matrix is not a product of singular-sequence blocks: {0}")]
    NotFactorable(String),
    #[error("invalid branch signature: {0}")]
    InvalidSignature(String),
    #[error("power series has non-unit constant term")]
    NonUnitConstant,
    #[error("substituent series has a nonzero constant term")]
    NonVanishingSubstituent,
    #[error("signature is not twisted: l - d is not a nonnegative multiple of r+s-1")]
    NotTwisted,
    #[error("fractional power cannot be represented exactly: {0}")]
    FractionalPower(String),
    #[error("exponent {0} is not a nonnegative integer")]
    NonIntegerExponent(String),
    #[error("type sequence does not terminate: gcd never reaches 1")]
    NonTerminating,
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error("germ parameters do not match: {0}")]
    ParameterMismatch(String),
    #[error("signature cannot be factored into a blow-up word: {0}")]
    WordMismatch(String),
    #[error("orbit overflowed at step {0}")]
    Overflow(usize),
    #[error("indeterminate point: denominator modulus {0:e} below threshold")]
    Indeterminate(f64),
    #[error("defining polynomial has a rational root {0}; field arithmetic would be degenerate")]
    ReducibleMinPoly(String),
    #[error("division by zero or non-invertible field element")]
    NotInvertible,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
