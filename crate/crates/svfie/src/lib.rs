//! Numerical solver for linear stochastic Volterra-Fredholm integral
//! equations on `[0, 1)`:
//!
//! ```text
//! x(t) = f(t) + \int_a^b k(s,t) x(s) ds + \int_0^t k1(s,t) x(s) ds
//!             + \int_0^t k2(s,t) x(s) dB(s)
//! ```
//!
//! The unknown is expanded in the first `m = 2^k` Walsh functions; the
//! integral operators become small dense matrices (the operational
//! matrices), and each Brownian path reduces the equation to an `m x m`
//! linear solve. A block-pulse comparator, a left-point Ito oracle, seeded
//! Monte Carlo ensembles, convergence studies, and an a-priori error bound
//! round out the toolkit.
//!
//! # Modules
//!
//! | Module          | Provides                                                      |
//! |-----------------|---------------------------------------------------------------|
//! | [`basis`]       | Rademacher/Walsh/block-pulse evaluation, `T_W`, cell integrals |
//! | [`operational`] | Integration matrix `P`, stochastic matrix `P_S`, conjugation   |
//! | [`stochastic`]  | Seeded Brownian paths, Ito oracle, seed derivation             |
//! | [`problems`]    | Equation instances and the built-in registry                   |
//! | [`solver`]      | System assembly, LU solve, staircase reconstruction            |
//! | [`analysis`]    | Error norms, convergence rates, Monte Carlo, error bound       |
//!
//! # Example
//!
//! ```
//! use svfie::basis::Resolution;
//! use svfie::problems::registry_get;
//! use svfie::solver::solve_walsh;
//! use svfie::stochastic::BrownianPath;
//!
//! let res = Resolution::new(64)?;
//! let problem = registry_get("example2_det")?;
//! let result = solve_walsh(&problem, res, &BrownianPath::zero(res))?;
//! assert!((result.evaluate(0.5)? - 0.5f64.cos()).abs() < 0.05);
//! # Ok::<(), svfie::Error>(())
//! ```
//!
//! A longer guide with the underlying math lives in the `book/` directory of
//! the repository; its code listings are compiled and run as doc-tests of
//! this crate.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod operational;
pub mod problems;
pub mod solver;
pub mod stochastic;

pub use error::{Error, Result};

// Keep the book's code listings honest: every fenced Rust block in the
// guide chapters is compiled and executed by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/walsh-basis.md")]
    mod walsh_basis {}
    #[doc = include_str!("../../../book/src/operational-matrices.md")]
    mod operational_matrices {}
    #[doc = include_str!("../../../book/src/brownian-paths.md")]
    mod brownian_paths {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/error-analysis.md")]
    mod error_analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
