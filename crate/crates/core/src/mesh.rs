//! Uniform triangular discretization of the Preisach half-plane.
//!
//! The input domain `[u_min, u_max]` is split into `n` equal intervals on both
//! axes. Cell `(i, j)` covers the α-interval `i` (rows, vertical) and the
//! β-interval `j` (columns, horizontal); only cells with `i >= j` exist, so the
//! mesh holds `n(n+1)/2` relays. The relay of cell `(i, j)` switches up once
//! the input reaches the upper α-edge of its row and down once the input falls
//! to the lower β-edge of its column.
//!
//! Cells are stored column-major: column `j` holds rows `j..n` contiguously.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TriangularMesh {
    n: usize,
    u_min: f64,
    u_max: f64,
    edges: Vec<f64>,
}

impl TriangularMesh {
    pub fn new(n: usize, u_min: f64, u_max: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("mesh needs at least one cell per axis".into()));
        }
        if !u_min.is_finite() || !u_max.is_finite() {
            return Err(Error::InvalidParameter("mesh bounds must be finite".into()));
        }
        if u_min >= u_max {
            return Err(Error::InvalidParameter(format!(
                "mesh bounds must satisfy u_min < u_max, got [{u_min}, {u_max}]"
            )));
        }
        let step = (u_max - u_min) / n as f64;
        let mut edges: Vec<f64> = (0..=n).map(|k| u_min + k as f64 * step).collect();
        edges[n] = u_max;
        Ok(Self { n, u_min, u_max, edges })
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Cell edge length Δ.
    pub fn spacing(&self) -> f64 {
        (self.u_max - self.u_min) / self.n as f64
    }

    /// Shared α/β edge coordinates, `n + 1` values from `u_min` to `u_max`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cell_count(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Up-switching threshold of every relay in row `i`.
    #[inline]
    pub fn alpha_threshold(&self, i: usize) -> f64 {
        self.edges[i + 1]
    }

    /// Down-switching threshold of every relay in column `j`.
    #[inline]
    pub fn beta_threshold(&self, j: usize) -> f64 {
        self.edges[j]
    }

    /// Offset of column `j` in the column-major cell layout.
    #[inline]
    pub fn column_offset(&self, j: usize) -> usize {
        j * self.n - j * j.saturating_sub(1) / 2
    }

    /// Flat index of cell `(i, j)`; requires `j <= i < n`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i < self.n);
        self.column_offset(j) + (i - j)
    }

    /// `(α-row, β-column)` of every cell, in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |j| (j..self.n).map(move |i| (i, j)))
    }

    /// `(β, α)` center of the square cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let half = 0.5 * self.spacing();
        (self.edges[j] + half, self.edges[i] + half)
    }

    /// Number of rows whose α-threshold is reached by input `u`.
    #[inline]
    pub fn rows_reached(&self, u: f64) -> usize {
        self.edges[1..].partition_point(|&e| e <= u)
    }

    /// Index of the first column whose β-threshold lies at or above `u`.
    #[inline]
    pub fn first_column_at_or_above(&self, u: f64) -> usize {
        self.edges[..self.n].partition_point(|&e| e < u)
    }

    /// Index `c` of the interval `[edge[c], edge[c+1])` holding `u`, clamped to the last cell.
    pub fn interval_of(&self, u: f64) -> usize {
        self.edges[1..self.n].partition_point(|&e| e <= u)
    }

    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.u_min, self.u_max)
    }
}
