//! Discrete-time exploratory mean-variance portfolio selection.
//!
//! The crate is split along the lines of the method itself:
//!
//! - [`analytic`]: closed-form optimal Gaussian policy and value function, and
//!   the policy-improvement iteration that reaches it in finitely many steps.
//! - [`oracle`]: brute-force backward induction with numerical quadrature over
//!   the control, used to cross-check the closed forms.
//! - [`market`]: excess-return generators, wealth dynamics, CSV ingestion.
//! - [`learner`]: the parametric reinforcement-learning algorithm with its
//!   analytic Bellman-error gradients and self-correcting Lagrange multiplier.
//! - [`baseline`]: the continuous-time EMV comparator on the same monthly grid.
//! - [`evaluation`]: performance statistics, the simulation study and the
//!   rolling-window backtest.

pub mod analytic;
pub mod baseline;
pub mod error;
pub mod evaluation;
pub mod learner;
pub mod market;
pub mod oracle;

pub use analytic::{GaussianPolicy, IterationFamily, MarketModel, ProblemSpec};
pub use error::{Error, Result};
pub use market::{ReturnModel, ReturnSeries, RngStream, YearMonth};
