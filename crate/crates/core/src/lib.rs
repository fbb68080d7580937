//! A computer-algebra kernel for grid-based log-exp transseries.

pub mod calculus;
pub mod error;
pub mod monomials;
pub mod noetherian_lab;
pub mod powerseries;
pub mod series_core;
pub mod taylor;

pub use error::{KernelError, Result};
pub use monomials::Monomial;
pub use series_core::{Constant, GridCertificate, Term, TransSeries};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/monomials.md")]
    mod monomials {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/calculus.md")]
    mod calculus {}
    #[doc = include_str!("../../../book/src/power_series.md")]
    mod power_series {}
    #[doc = include_str!("../../../book/src/taylor.md")]
    mod taylor {}
    #[doc = include_str!("../../../book/src/noetherian.md")]
    mod noetherian {}
}
