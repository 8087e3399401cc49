use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(u64, u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("gcd({0}, {1}) must be 1")]
    NotCoprime(u64, u64),
    #[error("exhaustive scan over modulus {0} exceeds the enumeration cap")]
    EnumerationCap(u64),
    #[error("matrix is singular modulo {0}")]
    SingularMatrix(u64),
    #[error("field of size {0} exceeds the supported cap")]
    FieldCap(u128),
    #[error("characteristic {0} is below 5, which this operation does not support")]
    SmallCharacteristic(u64),
    #[error("zero polynomial has no root set")]
    ZeroPolynomial,
    #[error("no extension of degree <= {0} contains the requested torsion")]
    TorsionDegreeCap(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
