//! Brute-force reference implementations for verification.
//!
//! Nothing here touches the staircase representation of [`crate::state`]:
//! the relay bank keeps one explicit ±1 per cell and re-evaluates every relay
//! on every input, so agreement with the incremental operator is evidence.

use crate::density::DensityGrid;
use crate::error::{Error, Result};

/// Every relay stored explicitly; O(n²) per input.
#[derive(Debug, Clone)]
pub struct NaiveRelayBank {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    weights: Vec<f64>,
    states: Vec<i8>,
    offset: f64,
    u_min: f64,
    u_max: f64,
}

impl NaiveRelayBank {
    /// All relays start in `initial` (±1).
    pub fn new(density: &DensityGrid, initial: i8) -> Self {
        let states = vec![initial.signum(); density.weights().len()];
        Self::with_states(density, states)
    }

    /// Explicit initial relay states in cell storage order.
    pub fn with_states(density: &DensityGrid, states: Vec<i8>) -> Self {
        let mesh = density.mesh();
        let (alpha, beta) = mesh
            .cells()
            .map(|(i, j)| (mesh.alpha_threshold(i), mesh.beta_threshold(j)))
            .unzip();
        Self {
            alpha,
            beta,
            weights: density.weights().to_vec(),
            states,
            offset: density.offset(),
            u_min: mesh.u_min(),
            u_max: mesh.u_max(),
        }
    }

    /// Applies the threshold rule to every relay and returns the weighted sum.
    pub fn naive_step(&mut self, u: f64) -> f64 {
        let u = u.clamp(self.u_min, self.u_max);
        for k in 0..self.states.len() {
            if u >= self.alpha[k] {
                self.states[k] = 1;
            } else if u <= self.beta[k] {
                self.states[k] = -1;
            }
        }
        self.output()
    }

    pub fn output(&self) -> f64 {
        let sum: f64 = self
            .states
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| s as f64 * w)
            .sum();
        self.offset + sum
    }

    pub fn states(&self) -> &[i8] {
        &self.states
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From negative saturation upward.
    Ascending,
    /// From positive saturation downward.
    Descending,
}

/// Virgin branches of the uniform density on `[-1, 1] → [-1, 1]`.
pub fn uniform_branch(u: f64, direction: Direction) -> Result<f64> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::InvalidParameter(format!("input {u} outside [-1, 1]")));
    }
    Ok(match direction {
        Direction::Ascending => (u + 1.0).powi(2) / 2.0 - 1.0,
        Direction::Descending => 1.0 - (1.0 - u).powi(2) / 2.0,
    })
}

/// Exact Preisach operator for a constant density over the whole triangle
/// `u_min ≤ β ≤ α ≤ u_max`, kept as a stack of turning points. Every branch
/// leaving a turning point `(u_t, y_t)` is `y_t ± c·(u − u_t)² / 2`.
#[derive(Debug, Clone)]
pub struct UniformContinuum {
    u_min: f64,
    u_max: f64,
    curvature: f64,
    turns: Vec<(f64, f64)>,
    rising: bool,
    u: f64,
    y: f64,
}

impl UniformContinuum {
    /// Starts in saturation: negative when `from_below`, positive otherwise.
    pub fn new(domain: (f64, f64), y_range: (f64, f64), from_below: bool) -> Result<Self> {
        let (u_min, u_max) = domain;
        let (y_min, y_max) = y_range;
        if !(u_min < u_max && y_min < y_max) {
            return Err(Error::InvalidParameter("empty domain or range".into()));
        }
        let width = u_max - u_min;
        let curvature = 4.0 * (0.5 * (y_max - y_min)) / (width * width);
        let anchor = if from_below { (u_min, y_min) } else { (u_max, y_max) };
        Ok(Self {
            u_min,
            u_max,
            curvature,
            turns: vec![anchor],
            rising: from_below,
            u: anchor.0,
            y: anchor.1,
        })
    }

    pub fn apply(&mut self, u: f64) -> f64 {
        let u = u.clamp(self.u_min, self.u_max);
        if u == self.u {
            return self.y;
        }
        let rising = u > self.u;
        if rising != self.rising {
            self.turns.push((self.u, self.y));
            self.rising = rising;
        }
        while self.turns.len() >= 3 {
            let wall = self.turns[self.turns.len() - 2].0;
            let wiped = if rising { u >= wall } else { u <= wall };
            if !wiped {
                break;
            }
            self.turns.truncate(self.turns.len() - 2);
        }
        let (ut, yt) = *self.turns.last().unwrap();
        let half = 0.5 * self.curvature * (u - ut) * (u - ut);
        self.y = if rising { yt + half } else { yt - half };
        self.u = u;
        self.y
    }

    pub fn output(&self) -> f64 {
        self.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriangularMesh;
    use std::sync::Arc;

    #[test]
    fn branch_values() {
        assert_eq!(uniform_branch(0.0, Direction::Ascending).unwrap(), -0.5);
        assert_eq!(uniform_branch(1.0, Direction::Ascending).unwrap(), 1.0);
        assert_eq!(uniform_branch(-1.0, Direction::Descending).unwrap(), -1.0);
        assert_eq!(uniform_branch(0.0, Direction::Descending).unwrap(), 0.5);
        assert!(uniform_branch(1.01, Direction::Ascending).is_err());
    }

    #[test]
    fn saturating_bank() {
        let mesh = Arc::new(TriangularMesh::new(12, -1.0, 1.0).unwrap());
        let d = DensityGrid::uniform(mesh, (-1.0, 1.0)).unwrap();
        let mut bank = NaiveRelayBank::new(&d, -1);
        assert!((bank.output() + 1.0).abs() < 1e-12);
        assert!((bank.naive_step(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_relay_loop() {
        let mesh = Arc::new(TriangularMesh::new(1, -1.0, 1.0).unwrap());
        let d = DensityGrid::uniform(mesh, (-1.0, 1.0)).unwrap();
        let mut bank = NaiveRelayBank::new(&d, -1);
        let ys: Vec<f64> = [0.5, 0.999, 1.0, 0.0, -0.999, -1.0, 0.3]
            .iter()
            .map(|&u| bank.naive_step(u))
            .collect();
        assert_eq!(ys, vec![-1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn continuum_matches_branch_formulas() {
        let mut c = UniformContinuum::new((-1.0, 1.0), (-1.0, 1.0), true).unwrap();
        assert_eq!(c.apply(0.0), uniform_branch(0.0, Direction::Ascending).unwrap());
        c.apply(1.0);
        assert_eq!(c.apply(0.0), uniform_branch(0.0, Direction::Descending).unwrap());
        c.apply(-0.5);
        c.apply(0.5);
        let inner = c.output();
        c.apply(-0.5);
        c.apply(0.5);
        assert!((c.output() - inner).abs() < 1e-15);
        // passing the earlier maximum wipes the inner loop out
        assert!((c.apply(1.0) - 1.0).abs() < 1e-15);
    }
}
