#![allow(dead_code)]

use std::sync::Arc;

use preisach::{DensityGrid, GaussianParams, TriangularMesh};
use rand::Rng;

pub fn mesh(n: usize) -> Arc<TriangularMesh> {
    Arc::new(TriangularMesh::new(n, -1.0, 1.0).unwrap())
}

pub fn uniform(n: usize) -> Arc<DensityGrid> {
    Arc::new(DensityGrid::uniform(mesh(n), (-1.0, 1.0)).unwrap())
}

pub fn gaussian(n: usize) -> Arc<DensityGrid> {
    Arc::new(DensityGrid::gaussian(mesh(n), &GaussianParams::default(), (-1.0, 1.0)).unwrap())
}

/// `steps` inputs made of monotone runs toward random targets slightly beyond the domain.
pub fn piecewise_monotone<R: Rng>(rng: &mut R, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps);
    let mut u = rng.gen_range(-1.0..1.0);
    while out.len() < steps {
        let target: f64 = rng.gen_range(-1.05..1.05);
        let run = rng.gen_range(1..=40).min(steps - out.len());
        let mut cuts: Vec<f64> = (0..run).map(|_| rng.gen_range(0.0..1.0)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts[run - 1] = 1.0;
        let start = u;
        for c in cuts {
            u = start + (target - start) * c;
            out.push(u);
        }
    }
    out
}
