//! Socially optimal reinsurance treaties for a network of insurers and one
//! reinsurer.
//!
//! The crate provides:
//! - empirical risk measures (VaR, ES, RVaR) and premium principles
//!   ([`measures`]),
//! - the admissible ceded-loss class, layer treaties and the two layer
//!   improvement constructions ([`treaties`]),
//! - joint scenario generation with controlled marginals and copulas plus
//!   exact finite-support joint laws ([`scenarios`]),
//! - exact and empirical checkers for stochastic orders and dependence
//!   concepts ([`orders`]),
//! - the network objective, its finite-dimensional layer reductions and
//!   derivative-free solvers ([`allocator`]),
//! - analytic separability and Bernoulli-mixture ceding results
//!   ([`closedform`]),
//! - the acceptance battery wired into both `cargo test` and the CLI
//!   ([`acceptance`]).

pub mod acceptance;
pub mod allocator;
pub mod closedform;
pub mod error;
pub mod measures;
pub mod orders;
pub mod rng;
pub mod scenarios;
pub mod treaties;

pub use allocator::{NetworkProblem, SolverConfig};
pub use error::{Error, Result};
pub use measures::{DistortionFunction, PremiumPrinciple, RiskMeasureSpec};
pub use scenarios::{CopulaSpec, Marginal, ScenarioMatrix};
pub use treaties::{CededFunction, CededLossFunction, LayerTreaty};
