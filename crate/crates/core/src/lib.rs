//! Simulation and verification of a pursuit-evasion game in truncated `l_2`
//! with a first-order pursuer and a second-order evader, both limited by
//! integral energy budgets.
//!
//! * [`state_space`]: vectors, inner product, balls.
//! * [`controls`]: piecewise-constant controls and exact energy functionals.
//! * [`dynamics`]: exact simulation of the hybrid game and its reduced form.
//! * [`reachability`]: attainability balls and extremal controls.
//! * [`strategy`]: phase constraint, the pursuer's strategy, capture checks.
//! * [`policies`]: admissible evader controls for experiments.
//! * [`cli`]: scenario files, batch runs and exports behind the binary.

pub mod cli;
pub mod controls;
pub mod dynamics;
pub mod error;
pub mod policies;
pub mod reachability;
pub mod state_space;
pub mod strategy;

pub use controls::{ControlSignal, EnergyReport, Grid};
pub use dynamics::{GameParams, Trajectory};
pub use error::{Error, Result};
pub use policies::{build_policy, PolicyKind, PolicySpec};
pub use reachability::{ExtremalMode, ReachReport, ReachSpec, Role};
pub use state_space::StateVector;
pub use strategy::{ChainDiagnostic, PhaseConstraint, PursuitReport};
