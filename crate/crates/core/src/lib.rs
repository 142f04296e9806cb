//! Riemann–Liouville fractional integrals and derivatives of `(t - d)^β`
//! for orders `0 ≤ α ≤ 1`, with lower limit `a` either at `d` or displaced
//! from it.
//!
//! ```
//! use fracpow::domain::{make_window, BetaIndex, PowerFunction};
//! use fracpow::series::{rlfi_series_displaced, SeriesConfig};
//!
//! let pf = PowerFunction::new(0.0, BetaIndex::integer(-1));
//! let win = make_window(2.0, &pf).unwrap();
//! let r = rlfi_series_displaced(&pf, &win, 1.0, 2.5, &SeriesConfig::default()).unwrap();
//! assert!((r.value - 1.25f64.ln()).abs() < 1e-10);
//! ```

pub mod cli;
pub mod domain;
pub mod error;
pub mod hypergeom;
pub mod oracle;
pub mod series;
pub mod special_fn;
pub mod sum;

pub use domain::{BetaIndex, EvalWindow, PowerFunction, Side};
pub use error::{Error, Result};
pub use series::{OperatorKind, Route, SeriesConfig, SeriesResult, Status};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/exponents.md")]
mod book_exponents {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/series.md")]
mod book_series {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/remainder.md")]
mod book_remainder {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/hypergeometric.md")]
mod book_hypergeometric {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/oracle.md")]
mod book_oracle {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/special-functions.md")]
mod book_special_functions {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
