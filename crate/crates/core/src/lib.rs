//! Dividend value functions, optimal barriers and Parisian ruin probabilities
//! for spectrally negative Lévy risk processes.
//!
//! Two risk models are supported: the Cramér–Lundberg process with
//! exponential claims and Brownian motion with drift. Both are closed under
//! exponential tilting, which is what makes every quantity in this crate
//! available in closed form (up to one-dimensional quadrature). Each closed
//! form has a Monte Carlo counterpart in [`simulate`].
//!
//! Two dividend regimes are covered:
//!
//! * [`dividend_ruin_delay`]: barrier strategy with Parisian ruin, i.e. ruin
//!   is declared only after the surplus has stayed negative for a window ζ.
//! * [`dividend_payment_delay`]: dividends are decided at the barrier but paid
//!   only after the surplus stayed above it for a delay d; ruin is classical.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dividend_payment_delay;
pub mod dividend_ruin_delay;
pub mod error;
pub mod levy_model;
pub mod numerics;
pub mod parisian_ruin;
pub mod scale;
pub mod simulate;

pub use error::{Error, Result};
pub use levy_model::{ModelConstants, RiskModel};
pub use parisian_ruin::{ParisianScale, ParisianSpec};
pub use scale::ScaleEval;
