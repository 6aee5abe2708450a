//! Library of admissible evader controls used to exercise the strategy.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controls::{ControlSignal, Grid};
use crate::dynamics::GameParams;
use crate::error::{check_dim, invalid, Error, Result};
use crate::reachability::{evader_grid_radius, extremal_evader_control, ExtremalMode};
use crate::state_space::{inner, norm, StateVector};
use crate::strategy::PhaseConstraint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Zero,
    Constant,
    RadialExtremal,
    RandomAdmissible,
    ZBoundary,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Zero,
        PolicyKind::Constant,
        PolicyKind::RadialExtremal,
        PolicyKind::RandomAdmissible,
        PolicyKind::ZBoundary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Zero => "zero",
            PolicyKind::Constant => "constant",
            PolicyKind::RadialExtremal => "radial-extremal",
            PolicyKind::RandomAdmissible => "random-admissible",
            PolicyKind::ZBoundary => "z-boundary",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown policy kind `{s}`")))
    }
}

/// An evader control recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Zero,
    /// Constant control along `direction` using `(fraction Upsilon)^2` energy.
    Constant { direction: StateVector, fraction: f64 },
    /// Minimum-energy control steering the reduced evader to `target`.
    RadialExtremal { target: StateVector },
    /// Fixed-seed uniform samples rescaled to `(fraction Upsilon)^2` energy.
    RandomAdmissible { seed: u64, fraction: f64 },
    /// Extremal control toward the boundary of the phase constraint.
    ZBoundary,
}

impl PolicySpec {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::Zero => PolicyKind::Zero,
            PolicySpec::Constant { .. } => PolicyKind::Constant,
            PolicySpec::RadialExtremal { .. } => PolicyKind::RadialExtremal,
            PolicySpec::RandomAdmissible { .. } => PolicyKind::RandomAdmissible,
            PolicySpec::ZBoundary => PolicyKind::ZBoundary,
        }
    }

    /// Checks the recipe against the game it will be played in.
    pub fn validate(&self, params: &GameParams) -> Result<()> {
        match self {
            PolicySpec::Constant { direction, fraction } => {
                check_fraction(*fraction)?;
                check_dim(params.dim(), direction.dim())?;
                if direction.is_zero() {
                    return Err(invalid("constant policy needs a non-zero direction"));
                }
            }
            PolicySpec::RadialExtremal { target } => check_dim(params.dim(), target.dim())?,
            PolicySpec::RandomAdmissible { fraction, .. } => check_fraction(*fraction)?,
            PolicySpec::Zero | PolicySpec::ZBoundary => {}
        }
        Ok(())
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if (0.0..=1.0).contains(&fraction) {
        Ok(())
    } else {
        Err(invalid(format!("budget fraction must lie in [0, 1], got {fraction}")))
    }
}

/// Point of the phase-constraint hyperplane nearest to `e_0`, clamped along
/// `e_0 - p_0` into the evader ball reachable on `grid`.
pub fn z_boundary_target(params: &GameParams, grid: &Grid) -> Result<StateVector> {
    let z = PhaseConstraint::new(params)?;
    let e0 = params.e0();
    let len = norm(&z.direction);
    let unit = z.direction.scaled(1.0 / len);
    let offset = (z.rhs - 2.0 * inner(&z.direction, &e0)?) / (2.0 * len);
    let radius = evader_grid_radius(params.upsilon(), grid)?;
    Ok(e0.add_scaled(offset.clamp(-radius, radius), &unit))
}

pub fn build_policy(spec: &PolicySpec, params: &GameParams, grid_n: usize) -> Result<ControlSignal> {
    spec.validate(params)?;
    let (phi, upsilon, dim) = (params.phi(), params.upsilon(), params.dim());
    let grid = Grid::new(phi, grid_n)?;
    let signal = match spec {
        PolicySpec::Zero => ControlSignal::zeros(dim, phi, grid_n)?,
        PolicySpec::Constant { direction, fraction } => {
            let unit = direction.normalized().expect("validated non-zero");
            ControlSignal::constant(unit.scaled(fraction * upsilon / phi.sqrt()), phi, grid_n)?
        }
        PolicySpec::RadialExtremal { target } => {
            extremal_evader_control(&params.e0(), target, phi, upsilon, grid_n, ExtremalMode::Exact)?
        }
        PolicySpec::RandomAdmissible { seed, fraction } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let values = (0..grid_n)
                .map(|_| {
                    let coords = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
                    StateVector::new(coords)
                })
                .collect::<Result<Vec<_>>>()?;
            let raw = ControlSignal::new(values, phi)?;
            if *fraction == 0.0 || raw.l2_energy() == 0.0 {
                ControlSignal::zeros(dim, phi, grid_n)?
            } else {
                raw.scale_to_budget(fraction * upsilon)?
            }
        }
        PolicySpec::ZBoundary => {
            let target = z_boundary_target(params, &grid)?;
            extremal_evader_control(&params.e0(), &target, phi, upsilon, grid_n, ExtremalMode::Exact)?
        }
    };
    let report = signal.is_admissible(upsilon)?;
    if !report.admissible {
        return Err(Error::Infeasible(format!(
            "{} policy needs energy {} above the budget {} on a {grid_n}-step grid",
            spec.kind(),
            report.l2_energy,
            upsilon * upsilon
        )));
    }
    Ok(signal)
}
