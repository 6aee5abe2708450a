//! Attainability domains of both players and the controls that realise them.
//!
//! At time `phi` the pursuer can reach exactly the closed ball
//! `B(p_0, Gamma sqrt(phi))` and the reduced evader exactly
//! `B(e_0, Upsilon sqrt(phi^3 / 3))`.
//!
//! The evader's extremal control `3 (phi - t) d / phi^3` is linear in time and
//! cannot be represented on a piecewise-constant grid. Two discrete versions
//! are offered: `Sampled` evaluates it at step midpoints (terminal miss
//! shrinks like `dt^2`), `Exact` is the minimum-energy grid control that hits
//! the target exactly. The latter costs `1 / (1 - 1/(4 N^2))` times the
//! continuous minimum, so on an `N`-step grid the evader really reaches the
//! slightly smaller ball of radius [`evader_grid_radius`].

use std::fmt;

use crate::controls::{ControlSignal, Grid, DEFAULT_GRID_N};
use crate::dynamics::{integrate_first_order, integrate_reduced, GameParams};
use crate::error::{check_dim, invalid, Error, Result};
use crate::state_space::{distance, in_ball, norm, StateVector};

/// Grid used by [`verify_reach`] for the evader: `2^14` steps, where the
/// discretisation excess `1/(4N^2 - 1)` drops below the `1e-9` energy slack.
pub const EVADER_REACH_GRID_N: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Pursuer,
    Evader,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Pursuer => "pursuer",
            Role::Evader => "evader",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pursuer" => Ok(Role::Pursuer),
            "evader" => Ok(Role::Evader),
            other => Err(invalid(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtremalMode {
    /// Midpoint samples of the continuous extremal control.
    Sampled,
    /// Minimum-energy grid control with exact reach.
    #[default]
    Exact,
}

/// Attainability ball of one player.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachSpec {
    pub center: StateVector,
    pub radius: f64,
    pub role: Role,
}

impl ReachSpec {
    pub fn for_role(params: &GameParams, role: Role) -> Result<Self> {
        let (center, radius) = match role {
            Role::Pursuer => (params.p0().clone(), pursuer_radius(params.gamma(), params.phi())?),
            Role::Evader => (params.e0(), evader_radius(params.upsilon(), params.phi())?),
        };
        Ok(Self { center, radius, role })
    }

    pub fn contains(&self, x: &StateVector) -> Result<bool> {
        in_ball(x, &self.center, self.radius)
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {x}")))
    }
}

/// `Gamma sqrt(phi)`.
pub fn pursuer_radius(gamma: f64, phi: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    positive("phi", phi)?;
    Ok(gamma * phi.sqrt())
}

/// `Upsilon sqrt(phi^3 / 3)`.
pub fn evader_radius(upsilon: f64, phi: f64) -> Result<f64> {
    positive("upsilon", upsilon)?;
    positive("phi", phi)?;
    Ok(upsilon * (phi * phi * phi / 3.0).sqrt())
}

/// `sum_k w_k^2` over the reduced-game step weights.
fn weight_power(grid: &Grid) -> f64 {
    let mut acc = 0.0;
    for w in grid.reduced_weights() {
        acc += w * w;
    }
    acc
}

/// Radius of the evader ball reachable with admissible controls on `grid`.
pub fn evader_grid_radius(upsilon: f64, grid: &Grid) -> Result<f64> {
    positive("upsilon", upsilon)?;
    Ok(upsilon * (weight_power(grid) / grid.step()).sqrt())
}

/// Constant control `(target - p0) / phi` from the pursuer's reachability proof.
pub fn extremal_pursuer_control(
    p0: &StateVector,
    target: &StateVector,
    phi: f64,
    gamma: f64,
    grid_n: usize,
) -> Result<ControlSignal> {
    check_dim(p0.dim(), target.dim())?;
    let radius = pursuer_radius(gamma, phi)?;
    if !in_ball(target, p0, radius)? {
        return Err(Error::Infeasible(format!(
            "target {target} lies outside the pursuer ball of radius {radius}"
        )));
    }
    let value = (target - p0).scaled(1.0 / phi);
    ControlSignal::constant(value, phi, grid_n)
}

/// Evader control steering the reduced game from `e0` to `target`.
pub fn extremal_evader_control(
    e0: &StateVector,
    target: &StateVector,
    phi: f64,
    upsilon: f64,
    grid_n: usize,
    mode: ExtremalMode,
) -> Result<ControlSignal> {
    check_dim(e0.dim(), target.dim())?;
    let radius = evader_radius(upsilon, phi)?;
    if !in_ball(target, e0, radius)? {
        return Err(Error::Infeasible(format!(
            "target {target} lies outside the evader ball of radius {radius}"
        )));
    }
    let grid = Grid::new(phi, grid_n)?;
    let d = target - e0;
    let values = match mode {
        ExtremalMode::Sampled => {
            let scale = 3.0 / (phi * phi * phi);
            (0..grid_n)
                .map(|k| {
                    let mid = 0.5 * (grid.time(k) + grid.time(k + 1));
                    d.scaled(scale * (phi - mid))
                })
                .collect()
        }
        ExtremalMode::Exact => {
            let power = weight_power(&grid);
            grid.reduced_weights()
                .into_iter()
                .map(|w| d.scaled(w / power))
                .collect()
        }
    };
    ControlSignal::new(values, phi)
}

/// Outcome of steering one player to a target with its extremal control.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachReport {
    pub role: Role,
    pub grid_n: usize,
    pub target: StateVector,
    pub terminal: StateVector,
    pub miss: f64,
    pub energy: f64,
    pub budget: f64,
    pub admissible: bool,
}

impl ReachReport {
    pub fn tol_miss(&self) -> f64 {
        1e-12 * (1.0 + norm(&self.target))
    }

    pub fn reached(&self) -> bool {
        self.miss <= self.tol_miss()
    }

    pub fn passed(&self) -> bool {
        self.reached() && self.admissible
    }
}

/// Builds the role's extremal control, plays it, and re-checks admissibility.
pub fn verify_reach(params: &GameParams, role: Role, target: &StateVector) -> Result<ReachReport> {
    let grid_n = match role {
        Role::Pursuer => DEFAULT_GRID_N,
        Role::Evader => EVADER_REACH_GRID_N,
    };
    verify_reach_on_grid(params, role, target, grid_n)
}

pub fn verify_reach_on_grid(
    params: &GameParams,
    role: Role,
    target: &StateVector,
    grid_n: usize,
) -> Result<ReachReport> {
    check_dim(params.dim(), target.dim())?;
    let phi = params.phi();
    let (control, terminal, budget) = match role {
        Role::Pursuer => {
            let mu = extremal_pursuer_control(params.p0(), target, phi, params.gamma(), grid_n)?;
            let end = integrate_first_order(params.p0(), &mu).pop().unwrap();
            (mu, end, params.gamma())
        }
        Role::Evader => {
            let e0 = params.e0();
            let nu = extremal_evader_control(
                &e0,
                target,
                phi,
                params.upsilon(),
                grid_n,
                ExtremalMode::Exact,
            )?;
            let end = integrate_reduced(&e0, &nu).pop().unwrap();
            (nu, end, params.upsilon())
        }
    };
    let energy = control.is_admissible(budget)?;
    Ok(ReachReport {
        role,
        grid_n,
        target: target.clone(),
        miss: distance(&terminal, target)?,
        terminal,
        energy: energy.l2_energy,
        budget,
        admissible: energy.admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{reduced_offset, simulate_reduced};
    use approx::assert_relative_eq;

    fn v(c: &[f64]) -> StateVector {
        StateVector::new(c.to_vec()).unwrap()
    }

    fn params(phi: f64, gamma: f64, upsilon: f64) -> GameParams {
        GameParams::new(phi, gamma, upsilon, v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 0.5])).unwrap()
    }

    /// Minimum grid energy from the midpoint sum of `(phi - t)^2`:
    /// `dt * sum (phi - m_k)^2 = phi^3/3 - phi dt^2 / 12`.
    fn exact_mode_energy(dist: f64, phi: f64, n: usize) -> f64 {
        let dt = phi / n as f64;
        dist * dist / (phi.powi(3) / 3.0 - phi * dt * dt / 12.0)
    }

    #[test]
    fn radius_examples() {
        assert_eq!(pursuer_radius(2.0, 1.0).unwrap(), 2.0);
        assert_eq!(pursuer_radius(1.0, 4.0).unwrap(), 2.0);
        assert_relative_eq!(pursuer_radius(6.0, 2.0).unwrap(), 3.0 * pursuer_radius(2.0, 2.0).unwrap());
        assert_relative_eq!(evader_radius(1.0, 1.0).unwrap(), 0.5773502692, epsilon = 1e-10);
        assert_relative_eq!(evader_radius(1.0, 3.0).unwrap(), 3.0, max_relative = 1e-15);
        assert!(pursuer_radius(0.0, 1.0).is_err());
        assert!(evader_radius(1.0, -1.0).is_err());
    }

    #[test]
    fn evader_ball_is_smaller_exactly_when_upsilon_phi_over_root3_below_gamma() {
        for &(gamma, upsilon, phi) in &[(1.0, 1.0, 1.0), (0.5, 2.0, 3.0), (3.0, 0.2, 2.0), (1.0, 1.7, 1.0)] {
            let smaller = evader_radius(upsilon, phi).unwrap() < pursuer_radius(gamma, phi).unwrap();
            assert_eq!(smaller, upsilon * phi / 3f64.sqrt() < gamma);
        }
    }

    #[test]
    fn pursuer_extremal_examples() {
        let o = v(&[0.0, 0.0]);
        let zero = extremal_pursuer_control(&o, &o, 1.0, 2.0, 8).unwrap();
        assert_eq!(zero.l2_energy(), 0.0);

        let phi = 2.0_f64;
        let gamma: f64 = 1.5;
        let edge = v(&[gamma * phi.sqrt(), 0.0]);
        let mu = extremal_pursuer_control(&o, &edge, phi, gamma, 16).unwrap();
        assert_relative_eq!(mu.l2_energy(), gamma * gamma, max_relative = 1e-12);

        let mu = extremal_pursuer_control(&o, &v(&[1.0, 0.0]), 1.0, 2.0, 4).unwrap();
        assert!(mu.values().iter().all(|x| x == &v(&[1.0, 0.0])));
        let end = integrate_first_order(&o, &mu).pop().unwrap();
        assert_eq!(end, v(&[1.0, 0.0]));

        let outside = v(&[2.1, 0.0]);
        assert!(matches!(
            extremal_pursuer_control(&o, &outside, 1.0, 2.0, 4),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn evader_extremal_zero_target() {
        let e0 = v(&[1.0, 2.0]);
        for mode in [ExtremalMode::Sampled, ExtremalMode::Exact] {
            let nu = extremal_evader_control(&e0, &e0, 1.5, 1.0, 32, mode).unwrap();
            assert_eq!(nu.l2_energy(), 0.0);
        }
        let far = v(&[10.0, 2.0]);
        assert!(extremal_evader_control(&e0, &far, 1.5, 1.0, 32, ExtremalMode::Exact).is_err());
    }

    #[test]
    fn exact_mode_energy_matches_midpoint_oracle() {
        let (phi, upsilon) = (1.7, 0.9);
        let e0 = v(&[0.0, 0.0]);
        let r = evader_radius(upsilon, phi).unwrap();
        let target = v(&[r * 0.6, -r * 0.8]);
        let mut previous = f64::INFINITY;
        for n in [1, 2, 5, 64, 256, 1024, 4096] {
            let nu = extremal_evader_control(&e0, &target, phi, upsilon, n, ExtremalMode::Exact).unwrap();
            let energy = nu.l2_energy();
            assert_relative_eq!(energy, exact_mode_energy(r, phi, n), max_relative = 1e-12);
            assert!(energy <= previous);
            assert!(energy >= upsilon * upsilon * (1.0 - 1e-12));
            previous = energy;
            let hit = &e0 + &reduced_offset(&nu);
            assert!(distance(&hit, &target).unwrap() <= 1e-12 * (1.0 + r));
        }
    }

    #[test]
    fn exact_mode_boundary_energy_is_within_slack_on_fine_grid() {
        let (phi, upsilon) = (1.0, 1.0);
        let e0 = v(&[0.0, 0.0]);
        let target = v(&[evader_radius(upsilon, phi).unwrap(), 0.0]);
        let nu = extremal_evader_control(&e0, &target, phi, upsilon, EVADER_REACH_GRID_N, ExtremalMode::Exact)
            .unwrap();
        assert!(nu.l2_energy() <= upsilon * upsilon * (1.0 + 1e-9));
        // Coarse grids cannot reach the continuous boundary within budget.
        let coarse = extremal_evader_control(&e0, &target, phi, upsilon, 256, ExtremalMode::Exact).unwrap();
        assert!(!coarse.is_admissible(upsilon).unwrap().admissible);
    }

    #[test]
    fn exact_mode_converges_to_continuous_formula() {
        let (phi, upsilon) = (2.0, 1.0);
        let e0 = v(&[0.0]);
        let target = v(&[1.0]);
        let n = 2048;
        let nu = extremal_evader_control(&e0, &target, phi, upsilon, n, ExtremalMode::Exact).unwrap();
        let g = nu.grid();
        for k in [0, n / 3, n / 2, n - 1] {
            let mid = 0.5 * (g.time(k) + g.time(k + 1));
            let formula = 3.0 * (phi - mid) / phi.powi(3);
            assert!((nu.values()[k].coords()[0] - formula).abs() <= 1e-6);
        }
    }

    #[test]
    fn sampled_mode_miss_is_second_order() {
        // Midpoint rule on (phi - t)^2 errs by phi dt^2 / 12, so the miss is
        // |d| dt^2 / (4 phi^2).
        let (phi, upsilon) = (1.3, 1.0);
        let e0 = v(&[0.5, 0.5]);
        let d = v(&[0.3, -0.2]);
        let target = &e0 + &d;
        for n in [64, 128, 256, 512] {
            let nu = extremal_evader_control(&e0, &target, phi, upsilon, n, ExtremalMode::Sampled).unwrap();
            let miss = distance(&(&e0 + &reduced_offset(&nu)), &target).unwrap();
            let dt = phi / n as f64;
            assert_relative_eq!(miss, norm(&d) * dt * dt / (4.0 * phi * phi), max_relative = 1e-6);
        }
    }

    #[test]
    fn grid_radius_approaches_continuous_radius() {
        let upsilon = 1.3;
        for phi in [0.5, 1.0, 3.0] {
            let r = evader_radius(upsilon, phi).unwrap();
            for n in [1, 4, 256, 4096] {
                let g = Grid::new(phi, n).unwrap();
                let rn = evader_grid_radius(upsilon, &g).unwrap();
                let expected = r * (1.0 - 1.0 / (4.0 * (n * n) as f64)).sqrt();
                assert_relative_eq!(rn, expected, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn verify_reach_center_boundary_interior() {
        let p = params(1.4, 1.2, 0.8);
        for role in [Role::Pursuer, Role::Evader] {
            let spec = ReachSpec::for_role(&p, role).unwrap();
            let center = verify_reach(&p, role, &spec.center).unwrap();
            assert!(center.passed());
            assert_eq!(center.energy, 0.0);

            let edge = spec.center.add_scaled(spec.radius, &v(&[0.8, -0.6]));
            let rep = verify_reach(&p, role, &edge).unwrap();
            assert!(rep.passed(), "{role}: {rep:?}");
            assert_relative_eq!(rep.energy, rep.budget * rep.budget, max_relative = 1e-9);

            let inner = spec.center.add_scaled(0.5 * spec.radius, &v(&[0.0, 1.0]));
            let rep = verify_reach(&p, role, &inner).unwrap();
            assert!(rep.passed());
            assert!(rep.energy < rep.budget * rep.budget);
        }
    }

    #[test]
    fn verify_reach_agrees_with_full_simulation() {
        let p = params(0.7, 1.0, 2.0);
        let spec = ReachSpec::for_role(&p, Role::Evader).unwrap();
        let target = spec.center.add_scaled(0.9 * spec.radius, &v(&[1.0, 0.0]));
        let nu = extremal_evader_control(&spec.center, &target, 0.7, 2.0, 128, ExtremalMode::Exact).unwrap();
        let mu = ControlSignal::zeros(2, 0.7, 128).unwrap();
        let traj = simulate_reduced(&p, &mu, &nu).unwrap();
        assert!(distance(traj.terminal_e(), &target).unwrap() <= 1e-12 * (1.0 + norm(&target)));
    }
}
