use thiserror::Error;

/// Every failure the kernel can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero series")]
    DivisionByZero,
    #[error("constant operation not available in this backend: {0}")]
    PartialConstant(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("summability violation at {witness}: {reason}")]
    SummabilityViolation { witness: String, reason: String },
    #[error("contraction violation: image monomial {image} is not below {monomial}")]
    ContractionViolation { monomial: String, image: String },
    #[error("certificate error: {0}")]
    Certificate(String),
    #[error("evaluation refused ({verdict}): {detail}")]
    EvaluationRefused { verdict: String, detail: String },
    #[error("term budget exhausted")]
    OutOfFuel,
}

pub type Result<T> = std::result::Result<T, KernelError>;
