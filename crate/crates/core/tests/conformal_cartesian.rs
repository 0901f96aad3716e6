//! The radial conformal charge against a direct sum over a 3D lattice.

use std::sync::Arc;

use morawetz_core::{conformal_charge, Grid, ModelParams, RadialState, WeightKind};

fn phi(r: f64) -> f64 {
    0.8 * (-r * r).exp()
}

fn dphi(r: f64) -> f64 {
    -2.0 * r * phi(r)
}

fn psi(r: f64) -> f64 {
    0.5 * (1.0 - r * r) * (-0.7 * r * r).exp()
}

/// `‖xψ + t∇φ‖² + ‖(tψ + 2φ) x/|x| + |x|∇φ‖²` summed on a cube of side 12.
fn cartesian_q0(t: f64) -> f64 {
    let h = 0.1;
    let m = 60i32;
    let mut sum = 0.0;
    for i in -m..=m {
        for j in -m..=m {
            for k in -m..=m {
                let x = [i as f64 * h, j as f64 * h, k as f64 * h];
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                // Both vectors are radial; only their magnitudes matter.
                let a = r * psi(r) + t * dphi(r);
                let b = t * psi(r) + 2.0 * phi(r) + r * dphi(r);
                sum += a * a + b * b;
            }
        }
    }
    sum * h * h * h
}

fn radial_q0(t: f64) -> f64 {
    let grid = Arc::new(Grid::new(12.0, 12001).unwrap());
    let w = grid.nodes().iter().map(|&r| r * phi(r)).collect();
    let v = grid.nodes().iter().map(|&r| r * psi(r)).collect();
    let state = RadialState::new(grid, w, v, t).unwrap();
    let params = ModelParams::new(4.0, 0.5, WeightKind::PowR).unwrap();
    conformal_charge(&state, &params).unwrap().q0
}

#[test]
fn radial_reduction_matches_cartesian_sum() {
    for t in [0.0, 1.5, -3.0] {
        let (c, r) = (cartesian_q0(t), radial_q0(t));
        assert!((c / r - 1.0).abs() < 1e-4, "t = {t}: cartesian {c}, radial {r}");
    }
}
