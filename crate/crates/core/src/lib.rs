//! Equilibrium analysis for two imperfect bidding agents buying for the same
//! buyer in first-price auctions.
//!
//! Two agents bid side by side on behalf of one buyer against exogenous
//! competition whose highest rival bid is distributed with CDF `Q`. Each
//! agent's submitted bid is its planned bid times a multiplicative noise
//! term, so from either agent's point of view the twin's bid is a random
//! variable with CDF `N(x / b_opp)`. The crate computes best responses to a
//! fixed twin bid, runs sequential best-response dynamics to the game's
//! equilibrium, probes start-independence of the limit, reproduces a
//! closed-form capped-linear example with a continuum of equilibria, and
//! validates the analytic payoffs against seeded Monte Carlo simulation.
//!
//! ```
//! use sbs::distributions::Cdf;
//! use sbs::payoff::MarketConfig;
//! use sbs::dynamics;
//!
//! let market = MarketConfig::standard(
//!     1.0,
//!     Cdf::power(2.0, 1.0).unwrap(),
//!     Cdf::log_normal(0.3).unwrap(),
//!     Cdf::log_normal(0.3).unwrap(),
//! )
//! .unwrap();
//! let report = dynamics::equilibrium(&market, 0.0, 1e-9, 10_000).unwrap();
//! assert!(report.b1_star > 0.0 && report.b1_star < 1.0);
//! ```

pub mod best_response;
pub mod cli;
pub mod counterexample;
pub mod distributions;
pub mod dynamics;
mod error;
pub mod montecarlo;
pub mod payoff;
pub mod search;
pub mod tolerances;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
