//! Piecewise-constant control signals and their energy functionals.
//!
//! A control is stored as one value per step of a uniform grid over
//! `[0, horizon]`. Every integral the game needs is a polynomial in `t` on
//! each step, so energies are computed in closed form per piece and carry no
//! quadrature error.

use crate::error::{check_dim, invalid, Error, Result};
use crate::state_space::StateVector;

/// Default number of grid steps.
pub const DEFAULT_GRID_N: usize = 256;

/// Slack on an energy budget: `1e-9 * budget^2`.
pub fn tol_energy(budget: f64) -> f64 {
    1e-9 * budget * budget
}

/// Uniform time grid `t_k = horizon * k / n`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    horizon: f64,
    n: usize,
}

impl Grid {
    pub fn new(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be finite and > 0, got {horizon}")));
        }
        if n == 0 {
            return Err(invalid("grid must have at least one step"));
        }
        Ok(Self { horizon, n })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n {
            self.horizon
        } else {
            self.horizon * k as f64 / self.n as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.time(k)).collect()
    }

    /// `int_{t_k}^{t_{k+1}} (horizon - t) dt`, the reduced-game step weight.
    pub fn reduced_weight(&self, k: usize) -> f64 {
        let (a, b) = self.remaining(k);
        (a - b) * (a + b) / 2.0
    }

    /// `int_{t_k}^{t_{k+1}} (horizon - t)^2 dt`.
    pub fn squared_weight(&self, k: usize) -> f64 {
        let (a, b) = self.remaining(k);
        (a - b) * (a * a + a * b + b * b) / 3.0
    }

    pub fn reduced_weights(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.reduced_weight(k)).collect()
    }

    /// Time left to the horizon at both ends of step `k`.
    fn remaining(&self, k: usize) -> (f64, f64) {
        (self.horizon - self.time(k), self.horizon - self.time(k + 1))
    }

    /// Same grid as `other`, up to the representation of the horizon.
    pub fn matches(&self, other: &Grid) -> bool {
        self.n == other.n && self.horizon == other.horizon
    }
}

/// A control `u : [0, horizon] -> l_2`, constant on each grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    values: Vec<StateVector>,
    grid: Grid,
}

/// Energies of a control and its admissibility against a budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `int ||u||^2 dt`
    pub l2_energy: f64,
    /// `int (horizon - t)^2 ||u||^2 dt`
    pub weighted_energy: f64,
    /// `int ||u||^4 dt`
    pub quartic_energy: f64,
    pub budget: f64,
    pub admissible: bool,
}

impl ControlSignal {
    pub fn new(values: Vec<StateVector>, horizon: f64) -> Result<Self> {
        let grid = Grid::new(horizon, values.len())?;
        let dim = values[0].dim();
        for v in &values {
            check_dim(dim, v.dim())?;
        }
        Ok(Self { values, grid })
    }

    pub fn constant(value: StateVector, horizon: f64, n: usize) -> Result<Self> {
        Grid::new(horizon, n)?;
        Self::new(vec![value; n], horizon)
    }

    pub fn zeros(dim: usize, horizon: f64, n: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Self::constant(StateVector::zeros(dim), horizon, n)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon
    }

    pub fn steps(&self) -> usize {
        self.grid.n
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn values(&self) -> &[StateVector] {
        &self.values
    }

    /// Value on `[t_k, t_{k+1})`; the last piece also covers `t = horizon`.
    pub fn eval(&self, t: f64) -> Result<&StateVector> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(invalid(format!("time {t} outside [0, {horizon}]")));
        }
        let k = ((t / self.grid.step()).floor() as usize).min(self.steps() - 1);
        Ok(&self.values[k])
    }

    pub fn l2_energy(&self) -> f64 {
        let dt = self.grid.step();
        let mut acc = 0.0;
        for v in &self.values {
            acc += v.norm_sq() * dt;
        }
        acc
    }

    pub fn weighted_energy(&self, horizon: f64) -> Result<f64> {
        if horizon != self.horizon() {
            return Err(invalid(format!(
                "signal horizon {} does not match {horizon}",
                self.horizon()
            )));
        }
        let mut acc = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            acc += v.norm_sq() * self.grid.squared_weight(k);
        }
        Ok(acc)
    }

    pub fn quartic_energy(&self) -> f64 {
        let dt = self.grid.step();
        let mut acc = 0.0;
        for v in &self.values {
            let s = v.norm_sq();
            acc += s * s * dt;
        }
        acc
    }

    pub fn is_admissible(&self, budget: f64) -> Result<EnergyReport> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(invalid(format!("budget must be finite and > 0, got {budget}")));
        }
        let l2_energy = self.l2_energy();
        Ok(EnergyReport {
            l2_energy,
            weighted_energy: self.weighted_energy(self.horizon())?,
            quartic_energy: self.quartic_energy(),
            budget,
            admissible: l2_energy <= budget * budget + tol_energy(budget),
        })
    }

    pub fn scaled(&self, s: f64) -> ControlSignal {
        ControlSignal {
            values: self.values.iter().map(|v| v.scaled(s)).collect(),
            grid: self.grid,
        }
    }

    /// Rescales the signal so its `l2` energy equals `budget^2`.
    pub fn scale_to_budget(&self, budget: f64) -> Result<ControlSignal> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(invalid(format!("budget must be finite and > 0, got {budget}")));
        }
        let energy = self.l2_energy();
        if energy == 0.0 {
            return Err(invalid("cannot scale the zero signal to a budget"));
        }
        Ok(self.scaled(budget / energy.sqrt()))
    }

    /// Pointwise sum of two signals on the same grid.
    pub fn try_add(&self, other: &ControlSignal) -> Result<ControlSignal> {
        self.check_same_grid(other)?;
        Ok(ControlSignal {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            grid: self.grid,
        })
    }

    /// The same function on a grid with every step split in two.
    pub fn refined(&self) -> ControlSignal {
        let values = self
            .values
            .iter()
            .flat_map(|v| [v.clone(), v.clone()])
            .collect();
        ControlSignal {
            values,
            grid: Grid {
                horizon: self.grid.horizon,
                n: 2 * self.grid.n,
            },
        }
    }

    pub fn check_same_grid(&self, other: &ControlSignal) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        if !self.grid.matches(&other.grid) {
            return Err(Error::InvalidInput(format!(
                "grid mismatch: {} steps over {} vs {} steps over {}",
                self.steps(),
                self.horizon(),
                other.steps(),
                other.horizon()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> StateVector {
        StateVector::new(c.to_vec()).unwrap()
    }

    fn signal(rows: &[&[f64]], horizon: f64) -> ControlSignal {
        ControlSignal::new(rows.iter().map(|r| v(r)).collect(), horizon).unwrap()
    }

    /// Three-point Gauss-Legendre per piece (exact to degree 5), driven only
    /// through `eval`, as an independent route to each energy functional.
    fn quadrature(u: &ControlSignal, f: impl Fn(f64, f64) -> f64) -> f64 {
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let g = u.grid();
        let mut acc = 0.0;
        for k in 0..u.steps() {
            let (a, b) = (g.time(k), g.time(k + 1));
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            for (x, w) in nodes.iter().zip(weights) {
                let t = mid + half * x;
                acc += w * half * f(t, u.eval(t).unwrap().norm_sq());
            }
        }
        acc
    }

    #[test]
    fn eval_picks_the_piece() {
        let u = signal(&[&[1.0, 0.0], &[2.0, 0.0]], 1.0);
        assert_eq!(u.eval(0.25).unwrap(), &v(&[1.0, 0.0]));
        assert_eq!(u.eval(0.75).unwrap(), &v(&[2.0, 0.0]));
        assert_eq!(u.eval(1.0).unwrap(), &v(&[2.0, 0.0]));
        assert!(u.eval(-0.1).is_err());
        assert!(u.eval(1.0001).is_err());
    }

    #[test]
    fn l2_energy_examples() {
        assert_eq!(ControlSignal::zeros(3, 2.0, 7).unwrap().l2_energy(), 0.0);
        let c = ControlSignal::constant(v(&[1.0, 2.0]), 3.0, 5).unwrap();
        assert_relative_eq!(c.l2_energy(), 5.0 * 3.0, max_relative = 1e-12);
        assert_eq!(signal(&[&[1.0], &[3.0]], 2.0).l2_energy(), 10.0);
    }

    #[test]
    fn weighted_energy_of_constant_is_grid_independent() {
        for n in [1, 2, 3, 17, 256, 1000] {
            let u = ControlSignal::constant(v(&[0.5, -1.5]), 2.5, n).unwrap();
            let expected = 2.5 * 2.5f64.powi(3) / 3.0;
            assert_relative_eq!(u.weighted_energy(2.5).unwrap(), expected, max_relative = 1e-12);
        }
        assert_eq!(ControlSignal::zeros(2, 1.0, 4).unwrap().weighted_energy(1.0).unwrap(), 0.0);
        let u = ControlSignal::zeros(2, 1.0, 4).unwrap();
        assert!(u.weighted_energy(2.0).is_err());
    }

    #[test]
    fn quartic_energy_examples() {
        assert_eq!(ControlSignal::zeros(1, 1.0, 3).unwrap().quartic_energy(), 0.0);
        let unit = ControlSignal::constant(v(&[0.6, 0.8]), 1.0, 9).unwrap();
        assert_relative_eq!(unit.quartic_energy(), 1.0, max_relative = 1e-12);
        assert_eq!(signal(&[&[1.0], &[2.0]], 1.0).quartic_energy(), 8.5);
    }

    #[test]
    fn admissibility_at_and_beyond_the_boundary() {
        let (gamma, phi) = (2.0, 3.0_f64);
        let dir = v(&[0.6, 0.8]);
        let boundary = ControlSignal::constant(dir.scaled(gamma / phi.sqrt()), phi, 64).unwrap();
        let rep = boundary.is_admissible(gamma).unwrap();
        assert_relative_eq!(rep.l2_energy, gamma * gamma, max_relative = 1e-12);
        assert!(rep.admissible);

        let over = ControlSignal::constant(dir.scaled(1.01 * gamma / phi.sqrt()), phi, 64).unwrap();
        let rep = over.is_admissible(gamma).unwrap();
        assert_relative_eq!(rep.l2_energy, 1.0201 * gamma * gamma, max_relative = 1e-12);
        assert!(!rep.admissible);

        assert!(ControlSignal::zeros(2, 1.0, 4).unwrap().is_admissible(0.1).unwrap().admissible);
        assert!(boundary.is_admissible(0.0).is_err());
        assert!(boundary.is_admissible(-1.0).is_err());
    }

    #[test]
    fn scale_to_budget_examples() {
        let u = signal(&[&[2.0], &[2.0]], 1.0);
        assert_eq!(u.l2_energy(), 4.0);
        let s = u.scale_to_budget(1.0).unwrap();
        assert_eq!(s, u.scaled(0.5));

        let at = u.scale_to_budget(2.0).unwrap();
        for (a, b) in at.values().iter().zip(u.values()) {
            assert_relative_eq!(a.coords()[0], b.coords()[0], max_relative = 1e-15);
        }
        assert!(ControlSignal::zeros(1, 1.0, 2).unwrap().scale_to_budget(1.0).is_err());
        assert!(u.scale_to_budget(0.0).is_err());
    }

    #[test]
    fn construction_errors() {
        assert!(ControlSignal::new(vec![], 1.0).is_err());
        assert!(ControlSignal::new(vec![v(&[1.0])], 0.0).is_err());
        assert!(ControlSignal::new(vec![v(&[1.0]), v(&[1.0, 2.0])], 1.0).is_err());
        assert!(ControlSignal::zeros(0, 1.0, 2).is_err());
    }

    #[test]
    fn grid_weights_sum_to_closed_forms() {
        let g = Grid::new(1.7, 33).unwrap();
        let w: f64 = g.reduced_weights().iter().sum();
        assert_relative_eq!(w, 1.7 * 1.7 / 2.0, max_relative = 1e-13);
        let q: f64 = (0..33).map(|k| g.squared_weight(k)).sum();
        assert_relative_eq!(q, 1.7f64.powi(3) / 3.0, max_relative = 1e-13);
        assert_eq!(g.time(33), 1.7);
    }

    fn arb_signal() -> impl Strategy<Value = ControlSignal> {
        (1usize..5, 1usize..40, 0.1..4.0f64).prop_flat_map(|(m, n, horizon)| {
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, m), n).prop_map(move |rows| {
                ControlSignal::new(
                    rows.into_iter().map(|r| StateVector::new(r).unwrap()).collect(),
                    horizon,
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn closed_forms_agree_with_quadrature(u in arb_signal()) {
            let phi = u.horizon();
            let l2 = quadrature(&u, |_, s| s);
            let weighted = quadrature(&u, |t, s| (phi - t).powi(2) * s);
            let quartic = quadrature(&u, |_, s| s * s);
            let tol = |x: f64| 1e-11 * (1.0 + x.abs());
            prop_assert!((u.l2_energy() - l2).abs() <= tol(l2));
            prop_assert!((u.weighted_energy(phi).unwrap() - weighted).abs() <= tol(weighted));
            prop_assert!((u.quartic_energy() - quartic).abs() <= tol(quartic));
        }

        #[test]
        fn weighted_energy_obeys_cauchy_schwarz(u in arb_signal()) {
            let phi = u.horizon();
            let lhs = u.weighted_energy(phi).unwrap();
            let rhs = (phi.powi(5) / 5.0).sqrt() * u.quartic_energy().sqrt();
            prop_assert!(lhs <= rhs * (1.0 + 1e-9));
        }

        #[test]
        fn energy_is_quadratic_in_scale(u in arb_signal(), s in -5.0..5.0f64) {
            let e = u.l2_energy();
            prop_assert!((u.scaled(s).l2_energy() - s * s * e).abs() <= 1e-12 * (1.0 + s * s * e));
        }

        #[test]
        fn refinement_preserves_energies(u in arb_signal()) {
            let r = u.refined();
            let phi = u.horizon();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            prop_assert!(close(u.l2_energy(), r.l2_energy()));
            prop_assert!(close(u.weighted_energy(phi).unwrap(), r.weighted_energy(phi).unwrap()));
            prop_assert!(close(u.quartic_energy(), r.quartic_energy()));
        }

        #[test]
        fn scaled_signal_hits_budget(u in arb_signal(), budget in 0.01..10.0f64) {
            prop_assume!(u.l2_energy() > 0.0);
            let s = u.scale_to_budget(budget).unwrap();
            prop_assert!((s.l2_energy() - budget * budget).abs() <= 1e-12 * budget * budget);
            let t = u.horizon() * 0.37;
            let (a, b) = (u.eval(t).unwrap(), s.eval(t).unwrap());
            for (x, y) in a.coords().iter().zip(b.coords()) {
                prop_assert!(x * y >= 0.0);
            }
        }
    }
}
