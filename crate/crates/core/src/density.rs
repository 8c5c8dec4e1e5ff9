//! Preisach weights over the triangular mesh.
//!
//! Every cell carries one nonnegative weight. Weights are normalized at
//! construction so that twice their sum equals the output range, and an offset
//! of `(y_min + y_max) / 2` is kept so the operator output is
//! `offset + Σ_up w − Σ_down w`.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::batch;
use crate::error::{Error, Result};
use crate::mesh::TriangularMesh;

/// Mean and covariance of a two-dimensional normal density, both in `(β, α)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mu: [f64; 2],
    pub sigma: [[f64; 2]; 2],
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            mu: [-0.35, 0.35],
            sigma: [[0.05, 0.0], [0.0, 0.05]],
        }
    }
}

impl GaussianParams {
    pub fn validate(&self) -> Result<()> {
        let [[a, b], [c, d]] = self.sigma;
        if !(self.mu.iter().chain([a, b, c, d].iter()).all(|v| v.is_finite())) {
            return Err(Error::InvalidParameter("gaussian parameters must be finite".into()));
        }
        if b != c {
            return Err(Error::InvalidParameter("covariance must be symmetric".into()));
        }
        // Both eigenvalues positive <=> leading minor and determinant positive.
        if a <= 0.0 || a * d - b * c <= 0.0 {
            return Err(Error::InvalidParameter("covariance must be positive definite".into()));
        }
        Ok(())
    }

    /// Unnormalized density `exp(-dᵀ Σ⁻¹ d / 2)` at `(β, α)`.
    fn kernel(&self, beta: f64, alpha: f64) -> f64 {
        let [[a, b], [_, d]] = self.sigma;
        let det = a * d - b * b;
        let (x, y) = (beta - self.mu[0], alpha - self.mu[1]);
        let q = (d * x * x - 2.0 * b * x * y + a * y * y) / det;
        (-0.5 * q).exp()
    }
}

#[derive(Debug, Clone)]
pub struct DensityGrid {
    mesh: Arc<TriangularMesh>,
    weights: Vec<f64>,
    total_mass: f64,
    offset: f64,
    // Per-column cumulative sums from the diagonal upward; column j holds n - j + 1 entries.
    col_cum: Vec<f64>,
    // Per-row cumulative sums from column 0; row i holds i + 2 entries.
    row_cum: Vec<f64>,
    // rect_cum[I·(n+1) + J] = mass of rows < I and columns < J.
    rect_cum: Vec<f64>,
}

impl DensityGrid {
    /// Constant density: every cell gets `(y_max - y_min) / (2 · cell_count)`.
    pub fn uniform(mesh: Arc<TriangularMesh>, y_range: (f64, f64)) -> Result<Self> {
        let half = half_range(y_range)?;
        let w = half / mesh.cell_count() as f64;
        let weights = vec![w; mesh.cell_count()];
        Ok(Self::assemble(mesh, weights, y_range))
    }

    /// Normal density sampled at square-cell centers, truncated to the triangle.
    pub fn gaussian(
        mesh: Arc<TriangularMesh>,
        params: &GaussianParams,
        y_range: (f64, f64),
    ) -> Result<Self> {
        params.validate()?;
        let cells: Vec<(usize, usize)> = mesh.cells().collect();
        let area = mesh.spacing() * mesh.spacing();
        let raw = batch::map(&cells, |&(i, j)| {
            let (beta, alpha) = mesh.cell_center(i, j);
            params.kernel(beta, alpha) * area
        });
        Self::from_weights(mesh, raw, y_range)
    }

    /// Arbitrary nonnegative raw weights in storage order, rescaled to `y_range`.
    pub fn from_weights(
        mesh: Arc<TriangularMesh>,
        raw: Vec<f64>,
        y_range: (f64, f64),
    ) -> Result<Self> {
        let half = half_range(y_range)?;
        if raw.len() != mesh.cell_count() {
            return Err(Error::MeshMismatch);
        }
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
        }
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("density has no mass inside the mesh".into()));
        }
        let scale = half / total;
        let weights = raw.into_iter().map(|w| w * scale).collect();
        Ok(Self::assemble(mesh, weights, y_range))
    }

    fn assemble(mesh: Arc<TriangularMesh>, weights: Vec<f64>, y_range: (f64, f64)) -> Self {
        let n = mesh.n();
        let mut col_cum = Vec::with_capacity(mesh.cell_count() + n);
        for j in 0..n {
            let mut acc = 0.0;
            col_cum.push(acc);
            for i in j..n {
                acc += weights[mesh.index(i, j)];
                col_cum.push(acc);
            }
        }
        let mut row_cum = Vec::with_capacity(mesh.cell_count() + n);
        for i in 0..n {
            let mut acc = 0.0;
            row_cum.push(acc);
            for j in 0..=i {
                acc += weights[mesh.index(i, j)];
                row_cum.push(acc);
            }
        }
        let stride = n + 1;
        let mut rect_cum = vec![0.0; stride * stride];
        for i in 0..n {
            for jj in 0..n {
                let w = if jj <= i { weights[mesh.index(i, jj)] } else { 0.0 };
                rect_cum[(i + 1) * stride + jj + 1] =
                    w + rect_cum[i * stride + jj + 1] + rect_cum[(i + 1) * stride + jj] - rect_cum[i * stride + jj];
            }
        }
        let total_mass = weights.iter().sum();
        Self {
            mesh,
            weights,
            total_mass,
            offset: 0.5 * (y_range.0 + y_range.1),
            col_cum,
            row_cum,
            rect_cum,
        }
    }

    pub fn mesh(&self) -> &Arc<TriangularMesh> {
        &self.mesh
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[self.mesh.index(i, j)]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Output at the center of the range, `(y_min + y_max) / 2`.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn y_min(&self) -> f64 {
        self.offset - self.total_mass
    }

    pub fn y_max(&self) -> f64 {
        self.offset + self.total_mass
    }

    /// Mass of rows `[lo, hi)` in column `j`; rows are clipped to the triangle.
    #[inline]
    pub fn column_mass(&self, j: usize, lo: usize, hi: usize) -> f64 {
        let base = self.mesh.column_offset(j) + j;
        let lo = lo.max(j);
        if hi <= lo {
            return 0.0;
        }
        self.col_cum[base + hi - j] - self.col_cum[base + lo - j]
    }

    /// Mass of columns `[lo, hi)` in row `i`; columns are clipped to the triangle.
    #[inline]
    pub fn row_mass(&self, i: usize, lo: usize, hi: usize) -> f64 {
        let base = i * (i + 3) / 2;
        let hi = hi.min(i + 1);
        if hi <= lo {
            return 0.0;
        }
        self.row_cum[base + hi] - self.row_cum[base + lo]
    }

    #[inline]
    fn rect(&self, rows: usize, cols: usize) -> f64 {
        self.rect_cum[rows * (self.mesh.n() + 1) + cols]
    }

    /// Mass with `β ≤ b` and `α ≤ a` when each cell's weight is spread evenly
    /// over its part of the half-plane `β ≤ α`. Diagonal cells are triangles.
    pub fn lower_left_mass(&self, b: f64, a: f64) -> f64 {
        let mesh = &*self.mesh;
        let a = mesh.clamp(a);
        let b = mesh.clamp(b).min(a);
        let edges = mesh.edges();
        let ia = mesh.interval_of(a);
        let ib = mesh.interval_of(b);
        let fa = ((a - edges[ia]) / (edges[ia + 1] - edges[ia])).clamp(0.0, 1.0);
        let fb = ((b - edges[ib]) / (edges[ib + 1] - edges[ib])).clamp(0.0, 1.0);
        let full = self.rect(ia, ib);
        let row_part = fa * (self.rect(ia + 1, ib) - full);
        if ia == ib {
            let tri = 2.0 * fa * fb - fb * fb;
            return full + row_part + tri * self.weight(ib, ib);
        }
        let diag = self.weight(ib, ib);
        let col_band = self.rect(ia, ib + 1) - full - diag;
        let col_part = fb * col_band + (2.0 * fb - fb * fb) * diag;
        let corner = fa * fb * self.weight(ia, ib);
        full + row_part + col_part + corner
    }

    /// Lipschitz bound κ of the discretized operator: the largest single row or
    /// column mass, doubled and divided by the cell spacing.
    pub fn max_branch_slope(&self) -> f64 {
        let n = self.mesh.n();
        let band = (0..n)
            .map(|c| self.row_mass(c, 0, c + 1).max(self.column_mass(c, c, n)))
            .fold(0.0_f64, f64::max);
        2.0 * band / self.mesh.spacing()
    }

    /// Slope bound of the sub-cell operator. A diagonal triangle holds its weight
    /// on half the area, so a line through it can meet twice the areal density.
    pub fn max_sub_cell_slope(&self) -> f64 {
        let n = self.mesh.n();
        let band = (0..n)
            .map(|c| self.row_mass(c, 0, c + 1).max(self.column_mass(c, c, n)) + self.weight(c, c))
            .fold(0.0_f64, f64::max);
        2.0 * band / self.mesh.spacing()
    }

    /// Largest output jump one threshold crossing can cause.
    pub fn quantum(&self) -> f64 {
        self.max_branch_slope() * self.mesh.spacing()
    }

    /// Writes `alpha_center,beta_center,weight` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "alpha_center,beta_center,weight")?;
        for (k, (i, j)) in self.mesh.cells().enumerate() {
            let (beta, alpha) = self.mesh.cell_center(i, j);
            writeln!(out, "{alpha},{beta},{}", self.weights[k])?;
        }
        Ok(())
    }
}

fn half_range((y_min, y_max): (f64, f64)) -> Result<f64> {
    if !y_min.is_finite() || !y_max.is_finite() || y_min >= y_max {
        return Err(Error::InvalidParameter(format!(
            "output range must satisfy y_min < y_max, got [{y_min}, {y_max}]"
        )));
    }
    Ok(0.5 * (y_max - y_min))
}
