//! Relay memory of the discretized Preisach operator and its incremental update.
//!
//! The up-switched region is stored as one level per β-column: column `j`
//! has its relays in rows `j..level[j]` switched up and all others down. The
//! levels describe a staircase: the non-empty columns form a prefix and their
//! levels are non-increasing. An increasing input raises every column below
//! the new row count; a decreasing input empties every column at or right of
//! the input. Each update touches only the columns whose band actually
//! switches, and the output moves by twice the switched mass, read from the
//! per-column cumulative sums of the density.
//!
//! Inputs are clamped to the mesh domain; no relay exists outside of it.
//! Arbitrary finite steps are allowed, each one is treated as a monotone sweep
//! from the previous input to the new one.
//!
//! With interpolation on, the reported output comes from a second memory in
//! which every cell's weight is spread evenly over the cell instead of sitting
//! on one relay at its corner. That memory is the stack of alternating input
//! extrema left after wiping-out; the switched region of each step is a strip
//! bounded by the latest extremum, integrated in O(1) from the density's 2-D
//! prefix sums. The relay levels are updated in either mode.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::mesh::TriangularMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Negative saturation, input at `u_min`.
    AllDown,
    /// Positive saturation, input at `u_max`.
    AllUp,
    /// Interface on the anti-diagonal `α + β = u_min + u_max`, input at the domain center.
    #[default]
    Demagnetized,
}

#[derive(Debug, Clone)]
pub struct PreisachState {
    density: Arc<DensityGrid>,
    levels: Vec<usize>,
    u_prev: f64,
    y: f64,
    fine: Option<SubCellMemory>,
}

// Alternating extrema `maxima[0] > minima[0]`, `maxima[1] > ...`; the input is
// descending from the last maximum when there is one more maximum than minima.
#[derive(Debug, Clone, PartialEq)]
struct SubCellMemory {
    maxima: Vec<f64>,
    minima: Vec<f64>,
    u: f64,
    y: f64,
}

impl SubCellMemory {
    fn from_levels(density: &DensityGrid, levels: &[usize], y: f64) -> Self {
        let mesh = density.mesh();
        let edges = mesh.edges();
        let (mut maxima, mut minima) = (Vec::new(), Vec::new());
        let mut last = None;
        let mut j = 0;
        while j < levels.len() && levels[j] > j {
            if last != Some(levels[j]) {
                if last.is_some() {
                    minima.push(edges[j]);
                }
                maxima.push(edges[levels[j]]);
                last = Some(levels[j]);
            }
            j += 1;
        }
        let u = if maxima.is_empty() { mesh.u_min() } else { edges[j] };
        Self { maxima, minima, u, y }
    }

    // Extrema must alternate with shrinking swings around the current input.
    fn check(&self, u: f64) -> std::result::Result<(), String> {
        if self.u != u {
            return Err(format!("sub-cell input {} differs from relay input {u}", self.u));
        }
        let (p, q) = (self.maxima.len(), self.minima.len());
        if p != q && p != q + 1 {
            return Err(format!("{p} maxima against {q} minima"));
        }
        let decreasing = self.maxima.windows(2).all(|w| w[0] > w[1]);
        let increasing = self.minima.windows(2).all(|w| w[0] < w[1]);
        let interleaved = self.minima.iter().zip(&self.maxima).all(|(lo, hi)| lo < hi)
            && self.minima.iter().zip(self.maxima.iter().skip(1)).all(|(lo, hi)| lo < hi);
        if !(decreasing && increasing && interleaved) {
            return Err("sub-cell extrema do not nest".into());
        }
        let above = self.maxima.last().is_none_or(|&m| u <= m);
        let below = self.minima.last().is_none_or(|&m| u >= m);
        if !(above && below) {
            return Err(format!("input {u} escapes the innermost extrema"));
        }
        Ok(())
    }

    fn descending(&self) -> bool {
        self.maxima.len() > self.minima.len()
    }

    fn apply(&mut self, density: &DensityGrid, target: f64) {
        let p = |b: f64, a: f64| density.lower_left_mass(b, a);
        if target > self.u {
            if self.descending() {
                self.minima.push(self.u);
            }
            loop {
                let m = self.minima.last().copied().unwrap_or(f64::NEG_INFINITY);
                let limit = self.maxima.last().copied();
                let t = limit.map_or(target, |l| target.min(l));
                let u = self.u;
                let mass = (p(t, t) - p(m, t)) - (p(u, u) - p(m, u));
                self.y += 2.0 * mass;
                self.u = t;
                match limit {
                    Some(l) if target >= l => {
                        self.maxima.pop();
                        self.minima.pop();
                    }
                    _ => break,
                }
            }
        } else if target < self.u {
            if !self.descending() {
                self.maxima.push(self.u);
            }
            loop {
                let top = *self.maxima.last().expect("descending from a maximum");
                let limit = self.minima.last().copied();
                let t = limit.map_or(target, |l| target.max(l));
                let mass = p(self.u, top) - p(t, top);
                self.y -= 2.0 * mass;
                self.u = t;
                match limit {
                    Some(l) if target <= l => {
                        self.minima.pop();
                        self.maxima.pop();
                    }
                    _ => break,
                }
            }
        }
    }
}

/// Builds a state after checking that `density` lives on `mesh`.
pub fn init_state(
    mesh: &TriangularMesh,
    density: Arc<DensityGrid>,
    mode: InitMode,
) -> Result<PreisachState> {
    if density.mesh().as_ref() != mesh {
        return Err(Error::MeshMismatch);
    }
    Ok(PreisachState::new(density, mode))
}

impl PreisachState {
    pub fn new(density: Arc<DensityGrid>, mode: InitMode) -> Self {
        let mesh = density.mesh().clone();
        let n = mesh.n();
        let (levels, u_prev) = match mode {
            InitMode::AllDown => ((0..n).collect(), mesh.u_min()),
            InitMode::AllUp => (vec![n; n], mesh.u_max()),
            InitMode::Demagnetized => (
                demagnetized_levels(&density),
                0.5 * (mesh.u_min() + mesh.u_max()),
            ),
        };
        let mut state = Self { density, levels, u_prev, y: 0.0, fine: None };
        state.y = state.direct_output();
        state
    }

    /// Enables sub-cell switching in the reported output.
    pub fn with_interpolation(mut self, on: bool) -> Self {
        self.set_interpolation(on);
        self
    }

    /// Turning interpolation on seeds the sub-cell memory from the current
    /// relay staircase and sweeps it to the current input.
    pub fn set_interpolation(&mut self, on: bool) {
        if !on {
            self.fine = None;
        } else if self.fine.is_none() {
            let mut fine = SubCellMemory::from_levels(&self.density, &self.levels, self.y);
            fine.apply(&self.density, self.u_prev);
            self.fine = Some(fine);
        }
    }

    pub fn interpolation(&self) -> bool {
        self.fine.is_some()
    }

    /// Bound on `|Δy / Δu|` along monotone runs for the active readout.
    pub fn max_slope(&self) -> f64 {
        if self.fine.is_some() {
            self.density.max_sub_cell_slope()
        } else {
            self.density.max_branch_slope()
        }
    }

    pub fn density(&self) -> &Arc<DensityGrid> {
        &self.density
    }

    pub fn mesh(&self) -> &TriangularMesh {
        self.density.mesh()
    }

    /// Last applied input, after clamping.
    pub fn input(&self) -> f64 {
        self.u_prev
    }

    /// Per-column up levels; column `j` is up in rows `j..levels[j]`.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn is_up(&self, i: usize, j: usize) -> bool {
        i < self.levels[j]
    }

    /// Running output of the relay bank, without sub-cell interpolation.
    pub fn discrete_output(&self) -> f64 {
        self.y
    }

    /// Reported output: the relay bank, or the sub-cell memory when interpolation is on.
    pub fn output(&self) -> f64 {
        self.fine.as_ref().map_or(self.y, |f| f.y)
    }

    /// Advances the memory to input `u_new` and returns the change of [`output`](Self::output).
    pub fn apply_input(&mut self, u_new: f64) -> Result<f64> {
        if !u_new.is_finite() {
            return Err(Error::NonFinite("operator input"));
        }
        let u = self.density.mesh().clamp(u_new);
        let before = self.output();
        let dy = if u > self.u_prev {
            2.0 * self.raise(u)
        } else if u < self.u_prev {
            -2.0 * self.lower(u)
        } else {
            0.0
        };
        self.y += dy;
        self.u_prev = u;
        match self.fine.as_mut() {
            Some(fine) => {
                fine.apply(&self.density, u);
                Ok(fine.y - before)
            }
            None => Ok(dy),
        }
    }

    // Switches up every relay whose α-threshold is at most `u`; returns the switched mass.
    fn raise(&mut self, u: f64) -> f64 {
        let density = &self.density;
        let k = density.mesh().rows_reached(u);
        let mut switched = 0.0;
        for j in (0..k).rev() {
            let top = self.levels[j];
            if top >= k {
                break;
            }
            switched += density.column_mass(j, top, k);
            self.levels[j] = k;
        }
        switched
    }

    // Switches down every relay whose β-threshold is at least `u`; returns the switched mass.
    fn lower(&mut self, u: f64) -> f64 {
        let density = &self.density;
        let m = density.mesh().first_column_at_or_above(u);
        let mut switched = 0.0;
        for j in m..self.levels.len() {
            let top = self.levels[j];
            if top <= j {
                break;
            }
            switched += density.column_mass(j, j, top);
            self.levels[j] = j;
        }
        switched
    }

    /// Output by full summation over every relay: `offset + Σ_up w − Σ_down w`.
    pub fn direct_output(&self) -> f64 {
        let mesh = self.density.mesh();
        let weights = self.density.weights();
        let (mut up, mut down) = (0.0, 0.0);
        for (j, &level) in self.levels.iter().enumerate() {
            let base = mesh.column_offset(j);
            for i in j..mesh.n() {
                let w = weights[base + i - j];
                if i < level {
                    up += w;
                } else {
                    down += w;
                }
            }
        }
        self.density.offset() + (up - down)
    }

    /// Corner points `(β, α)` of the staircase interface, from the left domain
    /// edge to the diagonal. An empty up-region yields the single point `(u_min, u_min)`.
    pub fn interface_corners(&self) -> Vec<(f64, f64)> {
        let mesh = self.density.mesh();
        let edges = mesh.edges();
        let p = self.levels.iter().enumerate().take_while(|&(j, &l)| l > j).count();
        if p == 0 {
            return vec![(edges[0], edges[0])];
        }
        let mut pts = vec![(edges[0], edges[self.levels[0]])];
        for j in 1..p {
            let (prev, cur) = (self.levels[j - 1], self.levels[j]);
            if cur < prev {
                pts.push((edges[j], edges[prev]));
                pts.push((edges[j], edges[cur]));
            }
        }
        let last = edges[self.levels[p - 1]];
        pts.push((edges[p], last));
        if edges[p] < last {
            pts.push((edges[p], edges[p]));
        }
        pts
    }

    /// Staircase validity plus consistency of the memory with the last input.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mesh = self.density.mesh();
        let n = mesh.n();
        let mut prefix_open = true;
        let mut prev = n;
        for (j, &l) in self.levels.iter().enumerate() {
            if l < j || l > n {
                return Err(format!("level {l} of column {j} outside [{j}, {n}]"));
            }
            if l > j {
                if !prefix_open {
                    return Err(format!("column {j} up after an empty column"));
                }
                if l > prev {
                    return Err(format!("level rises at column {j}: {prev} -> {l}"));
                }
                prev = l;
            } else {
                prefix_open = false;
            }
        }
        if !(mesh.u_min() <= self.u_prev && self.u_prev <= mesh.u_max()) {
            return Err(format!("input {} outside the domain", self.u_prev));
        }
        let k = mesh.rows_reached(self.u_prev);
        if let Some(j) = (0..k).find(|&j| self.levels[j] < k) {
            return Err(format!("column {j} misses rows reached by input {}", self.u_prev));
        }
        let m = mesh.first_column_at_or_above(self.u_prev);
        if let Some(j) = (m..n).find(|&j| self.levels[j] > j) {
            return Err(format!("column {j} up although input {} is below it", self.u_prev));
        }
        if let Some(fine) = &self.fine {
            fine.check(self.u_prev)?;
        }
        Ok(())
    }

    /// Every relay as `(alpha_index, beta_index, weight, ±1)` in storage order.
    pub fn cell_states(&self) -> impl Iterator<Item = (usize, usize, f64, i8)> + '_ {
        let weights = self.density.weights();
        self.density
            .mesh()
            .cells()
            .zip(weights.iter())
            .map(move |((i, j), &w)| (i, j, w, if self.is_up(i, j) { 1 } else { -1 }))
    }

    /// Writes the interface as `beta,alpha` rows.
    pub fn write_corners_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "beta,alpha")?;
        for (beta, alpha) in self.interface_corners() {
            writeln!(out, "{beta},{alpha}")?;
        }
        Ok(())
    }

    /// Writes the full relay dump as `alpha_index,beta_index,weight,state` rows.
    pub fn write_cells_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "alpha_index,beta_index,weight,state")?;
        for (i, j, w, s) in self.cell_states() {
            writeln!(out, "{i},{j},{w},{s}")?;
        }
        Ok(())
    }
}

// Cells strictly below the anti-diagonal are up; cells on it are assigned
// greedily so the output lands as close to the range center as one cell allows.
fn demagnetized_levels(density: &DensityGrid) -> Vec<usize> {
    let mesh = density.mesh();
    let n = mesh.n();
    let mut levels: Vec<usize> = (0..n).map(|j| j.max((n - 1).saturating_sub(j))).collect();
    let mut balance = 0.0;
    for (i, j) in mesh.cells() {
        if i + j + 1 != n {
            let w = density.weight(i, j);
            if i + j + 1 < n {
                balance += w;
            } else {
                balance -= w;
            }
        }
    }
    for (j, level) in levels.iter_mut().enumerate() {
        let i = n - 1 - j;
        if i < j {
            break;
        }
        let w = density.weight(i, j);
        if balance <= 0.0 {
            *level = i + 1;
            balance += w;
        } else {
            balance -= w;
        }
    }
    levels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::GaussianParams;

    fn uniform(n: usize) -> Arc<DensityGrid> {
        let mesh = Arc::new(TriangularMesh::new(n, -1.0, 1.0).unwrap());
        Arc::new(DensityGrid::uniform(mesh, (-1.0, 1.0)).unwrap())
    }

    #[test]
    fn saturated_initial_outputs() {
        let d = uniform(400);
        assert!((PreisachState::new(d.clone(), InitMode::AllDown).output() + 1.0).abs() < 1e-12);
        assert!((PreisachState::new(d.clone(), InitMode::AllUp).output() - 1.0).abs() < 1e-12);
        let demag = PreisachState::new(d, InitMode::Demagnetized);
        assert_eq!(demag.output(), 0.0);
        assert_eq!(demag.input(), 0.0);
        demag.check_invariants().unwrap();
    }

    #[test]
    fn demagnetized_symmetric_gaussian_is_centered() {
        let mesh = Arc::new(TriangularMesh::new(51, -1.0, 1.0).unwrap());
        let d = Arc::new(DensityGrid::gaussian(mesh, &GaussianParams::default(), (-1.0, 1.0)).unwrap());
        let max_w = d.weights().iter().cloned().fold(0.0, f64::max);
        let s = PreisachState::new(d, InitMode::Demagnetized);
        assert!(s.output().abs() <= max_w);
        s.check_invariants().unwrap();
    }

    #[test]
    fn mesh_mismatch_is_rejected() {
        let d = uniform(10);
        let other = TriangularMesh::new(11, -1.0, 1.0).unwrap();
        assert!(matches!(init_state(&other, d.clone(), InitMode::AllDown), Err(Error::MeshMismatch)));
        assert!(init_state(d.mesh(), d.clone(), InitMode::AllDown).is_ok());
    }

    #[test]
    fn full_sweep_from_negative_saturation() {
        let mut s = PreisachState::new(uniform(400), InitMode::AllDown);
        let dy = s.apply_input(1.0).unwrap();
        assert!((dy - 2.0).abs() < 1e-12);
        assert!((s.output() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn virgin_branches_at_zero() {
        let d = uniform(400);
        let mut up = PreisachState::new(d.clone(), InitMode::AllDown);
        up.apply_input(0.0).unwrap();
        assert!((up.output() + 0.5).abs() <= 2.0 / 400.0);
        let mut down = PreisachState::new(d, InitMode::AllUp);
        down.apply_input(0.0).unwrap();
        assert!((down.output() - 0.5).abs() <= 2.0 / 400.0);
    }

    #[test]
    fn repeated_input_is_a_no_op() {
        let mut s = PreisachState::new(uniform(25), InitMode::Demagnetized);
        s.apply_input(0.3).unwrap();
        let levels = s.levels().to_vec();
        assert_eq!(s.apply_input(0.3).unwrap(), 0.0);
        assert_eq!(s.levels(), &levels[..]);
    }

    #[test]
    fn non_finite_input_leaves_state_untouched() {
        let mut s = PreisachState::new(uniform(25), InitMode::AllDown);
        s.apply_input(0.2).unwrap();
        let (levels, y, u) = (s.levels().to_vec(), s.output(), s.input());
        assert!(s.apply_input(f64::NAN).is_err());
        assert!(s.apply_input(f64::INFINITY).is_err());
        assert_eq!((s.levels(), s.output(), s.input()), (&levels[..], y, u));
    }

    #[test]
    fn out_of_domain_inputs_are_clamped() {
        let mut s = PreisachState::new(uniform(25), InitMode::AllDown);
        s.apply_input(7.0).unwrap();
        assert_eq!(s.input(), 1.0);
        assert!((s.output() - 1.0).abs() < 1e-12);
        assert_eq!(s.apply_input(50.0).unwrap(), 0.0);
        s.apply_input(-3.0).unwrap();
        assert_eq!(s.input(), -1.0);
        assert!((s.output() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn running_output_matches_direct_summation() {
        let mut s = PreisachState::new(uniform(25), InitMode::AllDown);
        for u in [0.0, 0.7, -0.3, 0.4] {
            s.apply_input(u).unwrap();
            assert!((s.output() - s.direct_output()).abs() < 1e-9);
            s.check_invariants().unwrap();
        }
    }

    #[test]
    fn corners_of_empty_region() {
        let s = PreisachState::new(uniform(25), InitMode::AllDown);
        assert_eq!(s.interface_corners(), vec![(-1.0, -1.0)]);
    }

    #[test]
    fn corners_after_one_reversal() {
        let d = uniform(25);
        let delta = d.mesh().spacing();
        let mut s = PreisachState::new(d, InitMode::AllDown);
        for u in [0.0, 0.7, -0.3] {
            s.apply_input(u).unwrap();
        }
        let c = s.interface_corners();
        // horizontal at α ≈ 0.7, vertical at β ≈ -0.3, ending on the diagonal
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].0, -1.0);
        assert!((c[0].1 - 0.7).abs() <= delta && c[0].1 <= 0.7);
        assert_eq!(c[0].1, c[1].1);
        assert!((c[1].0 + 0.3).abs() <= delta && c[1].0 >= -0.3);
        assert_eq!(c[1].0, c[2].0);
        assert_eq!(c[2].0, c[2].1);
    }

    #[test]
    fn corners_after_wiping_out() {
        let d = uniform(25);
        let delta = d.mesh().spacing();
        let mut s = PreisachState::new(d, InitMode::AllDown);
        for u in [0.0, 0.7, -0.3, 0.8] {
            s.apply_input(u).unwrap();
        }
        let c = s.interface_corners();
        assert_eq!(c.len(), 2);
        assert!((c[0].1 - 0.8).abs() <= delta);
        assert_eq!(c[0].1, c[1].1);
        assert_eq!(c[1].0, c[1].1);
    }

    #[test]
    fn interpolated_output_is_continuous_across_reversals() {
        let mut s = PreisachState::new(uniform(20), InitMode::AllDown).with_interpolation(true);
        let mut prev = s.output();
        let mut u = -1.0;
        let path: [f64; 7] = [0.43, -0.21, 0.17, -0.6, 0.9, 0.85, 0.88];
        for &target in &path {
            while (target - u).abs() > 1e-4 {
                u += 1e-4 * (target - u).signum();
                s.apply_input(u).unwrap();
                let y = s.output();
                assert!((y - prev).abs() < 1e-3, "jump {} at u = {u}", y - prev);
                prev = y;
            }
        }
    }

    #[test]
    fn interpolation_agrees_with_relays_on_cell_edges() {
        let d = uniform(10);
        let mut s = PreisachState::new(d.clone(), InitMode::AllDown).with_interpolation(true);
        let edges = d.mesh().edges().to_vec();
        for k in [7, 4, 8, 0, 10, 3] {
            let u = edges[k];
            s.apply_input(u).unwrap();
            assert!((s.output() - s.discrete_output()).abs() < 1e-12, "u = {u}: {} vs {}", s.output(), s.discrete_output());
        }
    }

    #[test]
    fn csv_exports() {
        let mut s = PreisachState::new(uniform(4), InitMode::AllDown);
        s.apply_input(0.6).unwrap();
        let mut corners = Vec::new();
        s.write_corners_csv(&mut corners).unwrap();
        assert!(String::from_utf8(corners).unwrap().starts_with("beta,alpha\n"));
        let mut cells = Vec::new();
        s.write_cells_csv(&mut cells).unwrap();
        let text = String::from_utf8(cells).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert!(text.contains("0,0,0.1,1"));
    }

    fn area_uniform(n: usize) -> Arc<DensityGrid> {
        let mesh = Arc::new(TriangularMesh::new(n, -1.0, 1.0).unwrap());
        let raw = mesh.cells().map(|(i, j)| if i == j { 0.5 } else { 1.0 }).collect();
        Arc::new(DensityGrid::from_weights(mesh, raw, (-1.0, 1.0)).unwrap())
    }

    #[test]
    fn sub_cell_memory_is_the_continuum_operator() {
        use crate::oracle::UniformContinuum;
        let mut s = PreisachState::new(area_uniform(7), InitMode::AllDown).with_interpolation(true);
        let mut c = UniformContinuum::new((-1.0, 1.0), (-1.0, 1.0), true).unwrap();
        for &u in &[0.31, -0.52, 0.123, -0.07, 0.2, 0.9, -0.95, 0.999, 0.5, 0.49, 0.51, -1.3] {
            s.apply_input(u).unwrap();
            let y = c.apply(u);
            assert!((s.output() - y).abs() < 1e-12, "u = {u}: {} vs {y}", s.output());
        }
    }

    #[test]
    fn sub_cell_memory_seeds_from_every_init_mode() {
        for mode in [InitMode::AllDown, InitMode::AllUp, InitMode::Demagnetized] {
            let s = PreisachState::new(uniform(16), mode);
            let fine = s.clone().with_interpolation(true);
            assert!((fine.output() - s.output()).abs() < 1e-12, "{mode:?}");
        }
    }
}
