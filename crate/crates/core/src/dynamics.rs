//! Exact simulation of the hybrid game and its reduced first-order form.
//!
//! Original game: pursuer `p' = mu`, evader `e'' = nu` with `e(0) = e^0`,
//! `e'(0) = e^1`. Reduced game: the evader moves by `e' = (phi - t) nu` from
//! `e_0 = e^0 + phi e^1`. Both have the same evader position at `t = phi`.
//!
//! Controls are piecewise constant, so each step is advanced with its closed
//! form; trajectories only record grid nodes.

use crate::controls::{ControlSignal, Grid};
use crate::error::{check_dim, invalid, Result};
use crate::state_space::{distance, norm, StateVector};

/// Horizon, budgets and initial states of one game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GameParams {
    phi: f64,
    gamma: f64,
    upsilon: f64,
    p0: StateVector,
    e_pos0: StateVector,
    e_vel0: StateVector,
}

impl GameParams {
    pub fn new(
        phi: f64,
        gamma: f64,
        upsilon: f64,
        p0: StateVector,
        e_pos0: StateVector,
        e_vel0: StateVector,
    ) -> Result<Self> {
        for (name, x) in [("phi", phi), ("gamma", gamma), ("upsilon", upsilon)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(invalid(format!("{name} must be finite and > 0, got {x}")));
            }
        }
        check_dim(p0.dim(), e_pos0.dim())?;
        check_dim(p0.dim(), e_vel0.dim())?;
        let reduced = reduce_initial_state(&e_pos0, &e_vel0, phi)?;
        if reduced.coords().iter().any(|c| !c.is_finite()) {
            return Err(invalid("reduced evader initial state overflows"));
        }
        Ok(Self {
            phi,
            gamma,
            upsilon,
            p0,
            e_pos0,
            e_vel0,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    pub fn dim(&self) -> usize {
        self.p0.dim()
    }

    pub fn p0(&self) -> &StateVector {
        &self.p0
    }

    pub fn e_pos0(&self) -> &StateVector {
        &self.e_pos0
    }

    pub fn e_vel0(&self) -> &StateVector {
        &self.e_vel0
    }

    /// Initial evader state of the reduced game, `e^0 + phi e^1`.
    pub fn e0(&self) -> StateVector {
        self.e_pos0.add_scaled(self.phi, &self.e_vel0)
    }

    /// Copy with a different pursuer budget.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(
            self.phi,
            gamma,
            self.upsilon,
            self.p0.clone(),
            self.e_pos0.clone(),
            self.e_vel0.clone(),
        )
    }

    pub(crate) fn check_signal(&self, u: &ControlSignal) -> Result<()> {
        check_dim(self.dim(), u.dim())?;
        if u.horizon() != self.phi {
            return Err(invalid(format!(
                "signal horizon {} does not match phi = {}",
                u.horizon(),
                self.phi
            )));
        }
        Ok(())
    }
}

/// Grid-node samples of one play of the game.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub p: Vec<StateVector>,
    pub e: Vec<StateVector>,
    /// Evader velocities; present for the original game only.
    pub e_vel: Option<Vec<StateVector>>,
}

impl Trajectory {
    pub fn terminal_p(&self) -> &StateVector {
        self.p.last().expect("trajectory has at least two nodes")
    }

    pub fn terminal_e(&self) -> &StateVector {
        self.e.last().expect("trajectory has at least two nodes")
    }

    pub fn dim(&self) -> usize {
        self.p[0].dim()
    }
}

/// `e_0 = e^0 + phi e^1`.
pub fn reduce_initial_state(
    e_pos0: &StateVector,
    e_vel0: &StateVector,
    phi: f64,
) -> Result<StateVector> {
    check_dim(e_pos0.dim(), e_vel0.dim())?;
    Ok(e_pos0.add_scaled(phi, e_vel0))
}

/// Node positions of a first-order player `x' = u` from `x0`.
pub(crate) fn integrate_first_order(x0: &StateVector, u: &ControlSignal) -> Vec<StateVector> {
    let dt = u.grid().step();
    let mut out = Vec::with_capacity(u.steps() + 1);
    out.push(x0.clone());
    for value in u.values() {
        let next = out.last().unwrap().add_scaled(dt, value);
        out.push(next);
    }
    out
}

/// Node positions of the reduced evader `e' = (phi - t) nu` from `e0`.
pub(crate) fn integrate_reduced(e0: &StateVector, nu: &ControlSignal) -> Vec<StateVector> {
    let grid = nu.grid();
    let mut out = Vec::with_capacity(nu.steps() + 1);
    out.push(e0.clone());
    for (k, value) in nu.values().iter().enumerate() {
        let next = out.last().unwrap().add_scaled(grid.reduced_weight(k), value);
        out.push(next);
    }
    out
}

/// `sum_k nu_k w_k = int_0^phi (phi - t) nu(t) dt`.
pub fn reduced_offset(nu: &ControlSignal) -> StateVector {
    let grid = nu.grid();
    let mut acc = StateVector::zeros(nu.dim());
    for (k, value) in nu.values().iter().enumerate() {
        acc = acc.add_scaled(grid.reduced_weight(k), value);
    }
    acc
}

fn check_pair(params: &GameParams, mu: &ControlSignal, nu: &ControlSignal) -> Result<Grid> {
    params.check_signal(mu)?;
    params.check_signal(nu)?;
    mu.check_same_grid(nu)?;
    Ok(mu.grid())
}

/// Plays the original hybrid game.
pub fn simulate_original(
    params: &GameParams,
    mu: &ControlSignal,
    nu: &ControlSignal,
) -> Result<Trajectory> {
    let grid = check_pair(params, mu, nu)?;
    let dt = grid.step();
    let p = integrate_first_order(params.p0(), mu);

    let n = grid.steps();
    let mut e = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    e.push(params.e_pos0().clone());
    v.push(params.e_vel0().clone());
    for (k, accel) in nu.values().iter().enumerate() {
        let next_e = e[k].add_scaled(dt, &v[k]).add_scaled(0.5 * dt * dt, accel);
        let next_v = v[k].add_scaled(dt, accel);
        e.push(next_e);
        v.push(next_v);
    }

    Ok(Trajectory {
        times: grid.times(),
        p,
        e,
        e_vel: Some(v),
    })
}

/// Plays the reduced first-order game.
pub fn simulate_reduced(
    params: &GameParams,
    mu: &ControlSignal,
    nu: &ControlSignal,
) -> Result<Trajectory> {
    let grid = check_pair(params, mu, nu)?;
    Ok(Trajectory {
        times: grid.times(),
        p: integrate_first_order(params.p0(), mu),
        e: integrate_reduced(&params.e0(), nu),
        e_vel: None,
    })
}

/// Tolerance on the terminal gap between the two games.
pub fn tol_equivalence(params: &GameParams) -> f64 {
    1e-12 * (1.0 + norm(&params.e0()))
}

/// Distance between the terminal evader states of the two games.
pub fn check_equivalence(params: &GameParams, nu: &ControlSignal) -> Result<f64> {
    let mu = ControlSignal::zeros(params.dim(), params.phi(), nu.steps())?;
    let original = simulate_original(params, &mu, nu)?;
    let reduced = simulate_reduced(params, &mu, nu)?;
    distance(original.terminal_e(), reduced.terminal_e())
}
