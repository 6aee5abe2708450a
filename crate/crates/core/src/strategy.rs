//! The pursuer's counter-strategy and its verification.
//!
//! With `d = e_0 - p_0` the pursuer plays
//! `Xi(t) = d / phi + (phi - t) nu(t)`: a constant drift closing the initial
//! gap plus a mirror of the reduced evader velocity. Integrated over
//! `[0, phi]` this gives `p(phi) = e(phi)` for every evader control. The
//! strategy is admissible under the phase constraint
//! `2 (d, e(phi)) <= phi (Gamma^2 - Upsilon^2 sqrt(phi^5 / 5)) + |e_0|^2 - |p_0|^2`
//! together with the bound `sqrt(int |nu|^4) <= Upsilon^2`. The second
//! condition does not follow from admissibility of `nu`, so it is reported
//! as a diagnostic line in [`ChainDiagnostic`] rather than assumed.

use crate::controls::{tol_energy, ControlSignal};
use crate::dynamics::{reduced_offset, simulate_original, GameParams, Trajectory};
use crate::error::{check_dim, invalid, Error, Result};
use crate::state_space::{distance, inner, norm, StateVector};

/// Capture slack: `1e-9 (1 + |e_0| + |p_0|)`.
pub fn tol_capture(params: &GameParams) -> f64 {
    1e-9 * (1.0 + norm(&params.e0()) + norm(params.p0()))
}

/// Membership slack for the phase constraint.
pub fn tol_z(rhs: f64) -> f64 {
    1e-12 * (1.0 + rhs.abs())
}

/// `sqrt(phi^5 / 5)`, the Cauchy-Schwarz constant of `(phi - t)^2`.
fn quintic_root(phi: f64) -> f64 {
    (phi.powi(5) / 5.0).sqrt()
}

/// Right-hand side of the phase constraint from raw quantities.
pub fn z_rhs_value(phi: f64, gamma: f64, upsilon: f64, e0: &StateVector, p0: &StateVector) -> Result<f64> {
    check_dim(e0.dim(), p0.dim())?;
    Ok(phi * (gamma * gamma - upsilon * upsilon * quintic_root(phi)) + e0.norm_sq() - p0.norm_sq())
}

/// Right-hand side of the phase constraint, with `e_0` the reduced initial state.
pub fn z_rhs(params: &GameParams) -> f64 {
    z_rhs_value(params.phi(), params.gamma(), params.upsilon(), &params.e0(), params.p0())
        .expect("params vectors share one dimension")
}

/// The half-space `Z = { zeta : 2 (e_0 - p_0, zeta) <= rhs }`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConstraint {
    pub direction: StateVector,
    pub rhs: f64,
}

impl PhaseConstraint {
    /// Fails when `e_0 = p_0`, where the set is not defined.
    pub fn new(params: &GameParams) -> Result<Self> {
        let direction = &params.e0() - params.p0();
        if direction.is_zero() {
            return Err(Error::Degenerate(
                "phase constraint is undefined when e0 = p0".to_string(),
            ));
        }
        Ok(Self {
            direction,
            rhs: z_rhs(params),
        })
    }

    pub fn lhs(&self, zeta: &StateVector) -> Result<f64> {
        Ok(2.0 * inner(&self.direction, zeta)?)
    }

    pub fn contains(&self, zeta: &StateVector) -> Result<bool> {
        Ok(self.lhs(zeta)? <= self.rhs + tol_z(self.rhs))
    }
}

pub fn in_phase_constraint(zeta: &StateVector, params: &GameParams) -> Result<bool> {
    PhaseConstraint::new(params)?.contains(zeta)
}

/// `Xi(t) = (e_0 - p_0) / phi + (phi - t) nu_value`.
///
/// The pursuer reads the evader's current control value, which is the
/// information pattern of a counter-strategy. Positions `p` and `e` are
/// part of the general strategy signature but are not used here.
pub fn strategy_value(params: &GameParams, nu_value: &StateVector, t: f64) -> Result<StateVector> {
    let phi = params.phi();
    if !(0.0..=phi).contains(&t) {
        return Err(invalid(format!("time {t} outside [0, {phi}]")));
    }
    check_dim(params.dim(), nu_value.dim())?;
    let drift = (&params.e0() - params.p0()).scaled(1.0 / phi);
    Ok(drift.add_scaled(phi - t, nu_value))
}

/// The pursuer control produced by the strategy against a given `nu`.
///
/// It is affine in `t` on every step, so it is kept as the evader signal
/// plus the game parameters and evaluated through [`strategy_value`].
#[derive(Debug, Clone)]
pub struct StrategySignal<'a> {
    params: &'a GameParams,
    nu: &'a ControlSignal,
}

impl<'a> StrategySignal<'a> {
    pub fn new(params: &'a GameParams, nu: &'a ControlSignal) -> Result<Self> {
        params.check_signal(nu)?;
        Ok(Self { params, nu })
    }

    /// Value on step `k` at time `t`.
    pub fn value(&self, k: usize, t: f64) -> Result<StateVector> {
        strategy_value(self.params, &self.nu.values()[k], t)
    }

    /// `int ||Xi||^2 dt` by two-point Gauss-Legendre on each step, exact for
    /// the quadratic integrand.
    pub fn l2_energy(&self) -> Result<f64> {
        let grid = self.nu.grid();
        let offset = 0.5 / 3f64.sqrt();
        let mut acc = 0.0;
        for k in 0..grid.steps() {
            let (a, b) = (grid.time(k), grid.time(k + 1));
            let (mid, len) = (0.5 * (a + b), b - a);
            for t in [mid - offset * len, mid + offset * len] {
                acc += 0.5 * len * self.value(k, t)?.norm_sq();
            }
        }
        Ok(acc)
    }

    /// Per-step displacements `d dt / phi + nu_k w_k`.
    pub fn displacements(&self) -> Vec<StateVector> {
        let grid = self.nu.grid();
        let dt = grid.step();
        let d = &self.params.e0() - self.params.p0();
        let phi = self.params.phi();
        self.nu
            .values()
            .iter()
            .enumerate()
            .map(|(k, value)| d.scaled(dt / phi).add_scaled(grid.reduced_weight(k), value))
            .collect()
    }
}

/// One line of the admissibility argument, evaluated as `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLine {
    pub label: char,
    pub statement: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
    /// The line is not implied by admissibility of the evader control.
    pub diagnostic: bool,
}

/// Lines (a)-(d) of the admissibility argument for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDiagnostic {
    pub lines: [ChainLine; 4],
}

impl ChainDiagnostic {
    pub fn line(&self, label: char) -> &ChainLine {
        self.lines
            .iter()
            .find(|l| l.label == label)
            .expect("chain labels are a-d")
    }

    /// Lines (a)-(c), the premises of the conclusion (d).
    pub fn premises_hold(&self) -> bool {
        self.lines[..3].iter().all(|l| l.passed)
    }

    pub fn conclusion_holds(&self) -> bool {
        self.lines[3].passed
    }
}

/// Result of playing the strategy against one evader control.
#[derive(Debug, Clone, PartialEq)]
pub struct PursuitReport {
    pub captured: bool,
    pub miss: f64,
    pub tol_capture: f64,
    pub strategy_energy: f64,
    pub gamma_sq: f64,
    pub strategy_admissible: bool,
    pub evader_energy: f64,
    pub evader_admissible: bool,
    /// `None` when `e_0 = p_0` and the phase constraint is not defined.
    pub z_satisfied: Option<bool>,
    pub chain: ChainDiagnostic,
    pub terminal_p: StateVector,
    pub terminal_e: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PursuitOutcome {
    pub report: PursuitReport,
    /// Pursuer under the strategy, evader in the original hybrid game.
    pub trajectory: Trajectory,
}

pub fn check_admissibility_chain(params: &GameParams, nu: &ControlSignal) -> Result<ChainDiagnostic> {
    params.check_signal(nu)?;
    let d = &params.e0() - params.p0();
    let offset = reduced_offset(nu);
    let weighted = nu.weighted_energy(params.phi())?;
    let energy = expanded_strategy_energy(params, &d, &offset, weighted)?;
    chain_from_parts(params, &d, &offset, weighted, nu.quartic_energy(), energy)
}

fn expanded_strategy_energy(
    params: &GameParams,
    d: &StateVector,
    offset: &StateVector,
    weighted: f64,
) -> Result<f64> {
    let phi = params.phi();
    Ok(d.norm_sq() / phi + 2.0 / phi * inner(d, offset)? + weighted)
}

fn chain_from_parts(
    params: &GameParams,
    d: &StateVector,
    offset: &StateVector,
    weighted: f64,
    quartic: f64,
    strategy_energy: f64,
) -> Result<ChainDiagnostic> {
    let (phi, gamma, upsilon) = (params.phi(), params.gamma(), params.upsilon());
    let root = quintic_root(phi);
    let line = |label, statement, lhs: f64, rhs: f64, diagnostic| ChainLine {
        label,
        statement,
        lhs,
        rhs,
        passed: lhs <= rhs,
        diagnostic,
    };
    let a = line(
        'a',
        "2 (e0 - p0, int (phi - t) nu) <= phi (Gamma^2 - Upsilon^2 sqrt(phi^5/5)) - |e0 - p0|^2",
        2.0 * inner(d, offset)?,
        phi * (gamma * gamma - upsilon * upsilon * root) - d.norm_sq(),
        false,
    );
    let b = line(
        'b',
        "int (phi - t)^2 |nu|^2 <= sqrt(phi^5/5) sqrt(int |nu|^4)",
        weighted,
        root * quartic.sqrt(),
        false,
    );
    let c = line('c', "sqrt(int |nu|^4) <= Upsilon^2", quartic.sqrt(), upsilon * upsilon, true);
    let mut conclusion = line('d', "int |Xi|^2 <= Gamma^2", strategy_energy, gamma * gamma, false);
    conclusion.passed = strategy_energy <= gamma * gamma + tol_energy(gamma);
    Ok(ChainDiagnostic {
        lines: [a, b, c, conclusion],
    })
}

/// Plays the strategy and returns only the report.
pub fn run_pursuit(params: &GameParams, nu: &ControlSignal) -> Result<PursuitReport> {
    Ok(play_pursuit(params, nu)?.report)
}

/// Plays the strategy against `nu` and verifies capture and admissibility.
pub fn play_pursuit(params: &GameParams, nu: &ControlSignal) -> Result<PursuitOutcome> {
    let strategy = StrategySignal::new(params, nu)?;
    let grid = nu.grid();

    // The pursuer's step displacement is integrated with the same closed form
    // as the reduced evader, so capture is an identity up to rounding.
    let mut p = Vec::with_capacity(grid.steps() + 1);
    p.push(params.p0().clone());
    for step in strategy.displacements() {
        let next = p.last().unwrap() + &step;
        p.push(next);
    }
    let mu_placeholder = ControlSignal::zeros(params.dim(), params.phi(), grid.steps())?;
    let mut trajectory = simulate_original(params, &mu_placeholder, nu)?;
    trajectory.p = p;

    let terminal_p = trajectory.terminal_p().clone();
    let terminal_e = trajectory.terminal_e().clone();
    let miss = distance(&terminal_p, &terminal_e)?;
    let tol = tol_capture(params);

    let d = &params.e0() - params.p0();
    let offset = reduced_offset(nu);
    let evader = nu.is_admissible(params.upsilon())?;
    let strategy_energy = expanded_strategy_energy(params, &d, &offset, evader.weighted_energy)?;
    let gamma = params.gamma();
    let chain = chain_from_parts(
        params,
        &d,
        &offset,
        evader.weighted_energy,
        evader.quartic_energy,
        strategy_energy,
    )?;

    let z_satisfied = match PhaseConstraint::new(params) {
        Ok(z) => Some(z.contains(&terminal_e)?),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };

    let report = PursuitReport {
        captured: miss <= tol,
        miss,
        tol_capture: tol,
        strategy_energy,
        gamma_sq: gamma * gamma,
        strategy_admissible: strategy_energy <= gamma * gamma + tol_energy(gamma),
        evader_energy: evader.l2_energy,
        evader_admissible: evader.admissible,
        z_satisfied,
        chain,
        terminal_p,
        terminal_e,
    };
    Ok(PursuitOutcome { report, trajectory })
}
