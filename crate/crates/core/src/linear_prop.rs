//! Exact free radial wave propagation.
//!
//! For radial solutions of the linear wave equation in R^3, `w = r·u`
//! solves the 1D wave equation on the half-line with `w(0, t) = 0`, so the
//! odd extension of `w` evolves by d'Alembert's formula. The initial data are
//! represented by their piecewise-linear interpolants and the formula is
//! evaluated exactly for those, with no time stepping.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::state::RadialState;

/// Anything that can apply the free propagator `S_L(t)` to a state.
pub trait FreePropagator {
    /// Returns the state advanced by `t` (which may be negative) under the
    /// linear flow; the result carries time stamp `state.t + t`.
    fn propagate(&self, state: &RadialState, t: f64) -> Result<RadialState>;
}

/// d'Alembert propagator built from one initial state.
#[derive(Debug, Clone)]
pub struct FreeEvolver {
    grid: Arc<Grid>,
    w0: Vec<f64>,
    v0: Vec<f64>,
    dw0: Vec<f64>,
    /// `∫_0^{r_j} v0` for the piecewise-linear interpolant of `v0`.
    v_antiderivative: Vec<f64>,
    t0: f64,
}

impl FreeEvolver {
    pub fn new(state: &RadialState) -> Self {
        let grid = Arc::clone(state.grid_arc());
        let dr = grid.dr();
        let mut acc = 0.0;
        let mut v_antiderivative = Vec::with_capacity(state.len());
        v_antiderivative.push(0.0);
        for j in 1..state.len() {
            acc += 0.5 * (state.v[j - 1] + state.v[j]) * dr;
            v_antiderivative.push(acc);
        }
        Self {
            dw0: odd_central_derivative(&state.w, grid.dr()),
            grid,
            w0: state.w.clone(),
            v0: state.v.clone(),
            v_antiderivative,
            t0: state.t,
        }
    }

    /// Odd extension of the `w0` interpolant; zero beyond `r_max`.
    fn w_odd(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.grid.interpolate(&self.w0, x)
        } else {
            -self.grid.interpolate(&self.w0, -x)
        }
    }

    fn v_odd(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.grid.interpolate(&self.v0, x)
        } else {
            -self.grid.interpolate(&self.v0, -x)
        }
    }

    /// Even extension of the nodal slope of `w0`.
    fn dw_even(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.dw0, x.abs())
    }

    /// Antiderivative of the odd extension of `v0`, which is even.
    fn v_primitive(&self, x: f64) -> f64 {
        let x = x.abs();
        let g = &self.grid;
        if x >= g.r_max() {
            return *self.v_antiderivative.last().unwrap_or(&0.0);
        }
        let dr = g.dr();
        let j = ((x / dr).floor() as usize).min(g.len() - 2);
        let s = x - g.nodes()[j];
        let slope = (self.v0[j + 1] - self.v0[j]) / dr;
        self.v_antiderivative[j] + s * (self.v0[j] + 0.5 * slope * s)
    }

    /// `w(r, t0 + t)` at an arbitrary radius.
    pub fn w_at(&self, r: f64, t: f64) -> f64 {
        0.5 * (self.w_odd(r + t) + self.w_odd(r - t))
            + 0.5 * (self.v_primitive(r + t) - self.v_primitive(r - t))
    }

    /// `w_t(r, t0 + t)` at an arbitrary radius.
    pub fn v_at(&self, r: f64, t: f64) -> f64 {
        0.5 * (self.dw_even(r + t) - self.dw_even(r - t)) + 0.5 * (self.v_odd(r + t) + self.v_odd(r - t))
    }

    /// State at time `t0 + t`, sampled on the original grid.
    pub fn evolve(&self, t: f64) -> Result<RadialState> {
        if !t.is_finite() {
            return Err(CoreError::InvalidArgument(format!("evolution time {t} is not finite")));
        }
        if t == 0.0 {
            return RadialState::new(Arc::clone(&self.grid), self.w0.clone(), self.v0.clone(), self.t0);
        }
        let nodes = self.grid.nodes();
        let w = nodes.iter().map(|&r| self.w_at(r, t)).collect();
        let v = nodes.iter().map(|&r| self.v_at(r, t)).collect();
        RadialState::new(Arc::clone(&self.grid), w, v, self.t0 + t)
    }
}

/// Central differences of the odd extension of `w` (zero beyond the last
/// node), so the nodal slope at the origin is `w_1/dr`. This matches the
/// central difference of an evolved state wherever the reflected wave
/// crosses a node.
fn odd_central_derivative(w: &[f64], dr: f64) -> Vec<f64> {
    let n = w.len();
    let at = |j: isize| -> f64 {
        if j < 0 {
            -w[(-j) as usize]
        } else if j as usize >= n {
            0.0
        } else {
            w[j as usize]
        }
    };
    (0..n as isize)
        .map(|j| (at(j + 1) - at(j - 1)) / (2.0 * dr))
        .collect()
}

/// The d'Alembert propagator as a [`FreePropagator`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DAlembert;

impl FreePropagator for DAlembert {
    fn propagate(&self, state: &RadialState, t: f64) -> Result<RadialState> {
        free_evolve(state, t)
    }
}

/// Exact free evolution of `state` by `t`.
pub fn free_evolve(state: &RadialState, t: f64) -> Result<RadialState> {
    FreeEvolver::new(state).evolve(t)
}

/// `4π ∫ ½((w')^2 + w_t^2) dr`, the energy without the potential term.
pub fn linear_energy(state: &RadialState) -> f64 {
    let grid = state.grid();
    let dw = grid.derivative(&state.w);
    let density: Vec<f64> = dw
        .iter()
        .zip(&state.v)
        .map(|(d, v)| 0.5 * (d * d + v * v))
        .collect();
    4.0 * PI * grid.integrate(&density)
}

/// `‖(u, u_t)‖` in `Ḣ^1 × L^2`, i.e. `sqrt(2 · linear_energy)`.
pub fn energy_norm(state: &RadialState) -> f64 {
    (2.0 * linear_energy(state)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_data, DataFamily};
    use crate::params::{ModelParams, WeightKind};

    fn params() -> ModelParams {
        ModelParams::new(4.0, 3.0 / 7.0, WeightKind::PowR).unwrap()
    }

    fn state(family: DataFamily, r_max: f64, n: usize) -> RadialState {
        let g = Arc::new(Grid::new(r_max, n).unwrap());
        sample_data(&family, g, &params()).unwrap()
    }

    const BUMP: DataFamily = DataFamily::CompactBump {
        amplitude: 1.0,
        radius: 2.0,
    };

    const OUTGOING: DataFamily = DataFamily::OutgoingWave {
        amplitude: 1.0,
        center: 2.5,
        half_width: 0.5,
    };

    #[test]
    fn zero_state_stays_zero() {
        let g = Arc::new(Grid::new(10.0, 101).unwrap());
        let s = RadialState::zeros(g, 0.0);
        for t in [-3.0, 0.5, 7.0] {
            let e = free_evolve(&s, t).unwrap();
            assert!(e.w.iter().chain(&e.v).all(|&x| x == 0.0));
            assert_eq!(e.t, t);
        }
        assert_eq!(linear_energy(&s), 0.0);
    }

    #[test]
    fn time_zero_reproduces_nodes() {
        let s = state(OUTGOING, 10.0, 1001);
        let fe = FreeEvolver::new(&s);
        let g = s.grid();
        for (j, &r) in g.nodes().iter().enumerate() {
            assert_eq!(fe.w_at(r, 0.0), s.w[j]);
            assert_eq!(fe.v_at(r, 0.0), s.v[j]);
        }
    }

    #[test]
    fn outgoing_wave_translates() {
        let s = state(OUTGOING, 20.0, 2001);
        let e = free_evolve(&s, 5.0).unwrap();
        let g = s.grid();
        let err = g
            .nodes()
            .iter()
            .zip(&e.w)
            .map(|(&r, &w)| (w - OUTGOING.w0(r - 5.0)).abs())
            .fold(0.0, f64::max);
        // Node-aligned shift; only the primitive's trapezoid error remains.
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn outgoing_wave_error_is_second_order() {
        let errs: Vec<f64> = [501, 1001, 2001]
            .iter()
            .map(|&n| {
                let s = state(OUTGOING, 20.0, n);
                let e = free_evolve(&s, 5.0).unwrap();
                s.grid()
                    .nodes()
                    .iter()
                    .zip(&e.w)
                    .map(|(&r, &w)| (w - OUTGOING.w0(r - 5.0)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for order in crate::grid::observed_orders(&errs, 2.0) {
            assert!((order - 2.0).abs() < 0.2, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn group_property_round_trip() {
        let errs: Vec<f64> = [501, 1001, 2001]
            .iter()
            .map(|&n| {
                let s = state(BUMP, 20.0, n);
                let back = free_evolve(&free_evolve(&s, 7.3).unwrap(), -7.3).unwrap();
                assert!((back.t - s.t).abs() < 1e-12);
                s.w.iter()
                    .zip(&back.w)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[2] < 1e-4, "{errs:?}");
        assert!(errs[0] / errs[2] > 12.0, "round-trip error must shrink as dr^2: {errs:?}");
    }

    #[test]
    fn finite_speed_and_odd_symmetry() {
        let s = state(BUMP, 20.0, 2001);
        for t in [0.7, 3.0, -4.25, 9.0] {
            let e = free_evolve(&s, t).unwrap();
            assert_eq!(e.w[0], 0.0);
            // The interpolant of the data vanishes beyond the first node >= 2.
            let support = 2.0 + s.grid().dr();
            for (j, &r) in s.grid().nodes().iter().enumerate() {
                if r > support + t.abs() {
                    assert_eq!(e.w[j], 0.0, "r = {r}, t = {t}");
                }
            }
        }
    }

    #[test]
    fn gaussian_linear_energy() {
        let s = state(
            DataFamily::GaussianBump {
                amplitude: 1.0,
                scale: 1.0,
            },
            40.0,
            4001,
        );
        let exact = 0.5 * 6.0 * PI.powf(1.5) * 2f64.powf(-2.5);
        let e = linear_energy(&s);
        assert!((e / exact - 1.0).abs() < 1e-3, "{e} vs {exact}");
        assert!((e - 2.953).abs() < 1e-3);
    }

    #[test]
    fn linear_energy_is_conserved() {
        // Discrete energy of the interpolated evolution differs from the
        // initial one by O(dr^2) through the derivative stencils.
        let drift = |n: usize| {
            let s = state(BUMP, 40.0, n);
            let e0 = linear_energy(&s);
            [5.0, 7.3, -12.0]
                .iter()
                .map(|&t| (linear_energy(&free_evolve(&s, t).unwrap()) / e0 - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let coarse = drift(4001);
        let fine = drift(8001);
        assert!(coarse < 5e-5, "{coarse}");
        assert!(coarse / fine > 3.0, "{coarse} {fine}");
    }
}
