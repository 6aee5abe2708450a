//! Finite truncation of `l_2`.
//!
//! Every element of the sequence space is stored by its first `m`
//! coordinates. All formulas used by the game are dimension-agnostic, so
//! the truncation is exact for data supported on those coordinates.
//! Sums run in ascending index order with plain accumulation so results are
//! reproducible bit for bit.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, invalid, Result};

/// Largest truncation dimension accepted by default.
pub const MAX_DIM: usize = 1024;

/// A point of truncated `l_2`: position, velocity or control value.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coords: Vec<f64>,
}

impl StateVector {
    /// Builds a vector, rejecting empty, oversized or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("state vector must have at least one coordinate"));
        }
        if coords.len() > MAX_DIM {
            return Err(invalid(format!(
                "dimension {} exceeds the cap of {MAX_DIM}",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(invalid(format!("coordinate {} is not finite", i + 1)));
        }
        Ok(Self { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            coords: vec![0.0; dim],
        }
    }

    /// Unit vector along coordinate `axis` (zero-based).
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[axis] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.coords, &self.coords)
    }

    /// `self + s * other`, the workhorse of all per-step updates.
    pub fn add_scaled(&self, s: f64, other: &StateVector) -> StateVector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + s * b)
            .collect();
        StateVector { coords }
    }

    pub fn scaled(&self, s: f64) -> StateVector {
        StateVector {
            coords: self.coords.iter().map(|c| s * c).collect(),
        }
    }

    /// Unit vector in the direction of `self`; `None` for the zero vector.
    pub fn normalized(&self) -> Option<StateVector> {
        let n = norm(self);
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Inner product `(a, b) = sum a_i b_i`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(dot(&a.coords, &b.coords))
}

pub fn norm(a: &StateVector) -> f64 {
    a.norm_sq().sqrt()
}

/// Distance `||a - b||`.
pub fn distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let mut acc = 0.0;
    for (x, y) in a.coords.iter().zip(&b.coords) {
        let d = x - y;
        acc += d * d;
    }
    Ok(acc.sqrt())
}

/// Slack allowed on the radius of a closed ball.
pub fn tol_ball(radius: f64) -> f64 {
    1e-9 * (1.0 + radius)
}

/// Membership in the closed ball `B(center, radius)`, up to [`tol_ball`].
pub fn in_ball(x: &StateVector, center: &StateVector, radius: f64) -> Result<bool> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(invalid(format!("ball radius must be finite and >= 0, got {radius}")));
    }
    Ok(distance(x, center)? <= radius + tol_ball(radius))
}

impl Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul<&StateVector> for f64 {
    type Output = StateVector;
    fn mul(self, rhs: &StateVector) -> StateVector {
        rhs.scaled(self)
    }
}

impl Neg for &StateVector {
    type Output = StateVector;
    fn neg(self) -> StateVector {
        self.scaled(-1.0)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
