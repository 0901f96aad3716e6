//! Instantaneous functionals of a radial state.
//!
//! All spatial integrals are `4π ∫ (...) r^2 dr`. Local energy densities use
//! `u_r = (w' r - w)/r^2`; the global gradient energy uses the identity
//! `∫ u_r^2 r^2 dr = ∫ (w')^2 dr`, which avoids the `1/r` factors at the
//! origin.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::params::{AbsPow, ModelParams};
use crate::state::RadialState;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergySplit {
    /// `½ ∫ |∇u|^2`
    pub gradient: f64,
    /// `½ ∫ |u_t|^2`
    pub kinetic: f64,
    /// `1/(p+1) ∫ |u|^{p+1}`
    pub potential: f64,
    pub total: f64,
}

/// Conformal charge `Q = q0 + q1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChargePair {
    pub q0: f64,
    pub q1: f64,
}

impl ChargePair {
    pub fn total(&self) -> f64 {
        self.q0 + self.q1
    }
}

/// `|u|^{p+1} r^2` at every node.
fn potential_density(state: &RadialState, p: f64) -> Vec<f64> {
    let u = state.u();
    let pow = AbsPow::new(p + 1.0);
    u.iter()
        .zip(state.grid().nodes())
        .map(|(u, r)| pow.of(*u) * r * r)
        .collect()
}

pub fn energy(state: &RadialState, params: &ModelParams) -> EnergySplit {
    let grid = state.grid();
    let dw = grid.derivative(&state.w);
    let four_pi = 4.0 * PI;
    let grad_sq: Vec<f64> = dw.iter().map(|d| d * d).collect();
    let kin_sq: Vec<f64> = state.v.iter().map(|v| v * v).collect();
    let p = params.p();
    let gradient = 0.5 * four_pi * grid.integrate(&grad_sq);
    let kinetic = 0.5 * four_pi * grid.integrate(&kin_sq);
    let potential = four_pi * grid.integrate(&potential_density(state, p)) / (p + 1.0);
    EnergySplit {
        gradient,
        kinetic,
        potential,
        total: gradient + kinetic + potential,
    }
}

/// Energy density times `r^2`, `(½u_r^2 + ½u_t^2 + |u|^{p+1}/(p+1)) r^2`,
/// at every node, with `u_r` from local differencing.
pub fn energy_density(state: &RadialState, params: &ModelParams) -> Vec<f64> {
    let grid = state.grid();
    let dw = grid.derivative(&state.w);
    let p = params.p();
    let u = state.u();
    let pow = AbsPow::new(p + 1.0);
    let mut density: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            if r == 0.0 {
                return 0.0;
            }
            // r·u_r = w' - w/r, r·u_t = w_t
            let rur = dw[j] - state.w[j] / r;
            let rut = state.v[j];
            0.5 * (rur * rur + rut * rut) + pow.of(u[j]) * r * r / (p + 1.0)
        })
        .collect();
    density[0] = 0.0;
    density
}

/// Escaping energy `I(t) = ∫_{|x|>|t|} g(|x| - |t|) e(u) dx` at the state's
/// own time stamp, with `g(s) = s^κ` or `(1 + s)^κ` by weight kind.
///
/// The power weight is integrated exactly against the piecewise-linear
/// interpolant of the energy density, so the partial cell at `r = |t|` is
/// handled without sampling the weight's kink.
pub fn weighted_energy(state: &RadialState, params: &ModelParams) -> f64 {
    let density = energy_density(state, params);
    4.0 * PI
        * state.grid().integrate_shifted_power(
            &density,
            state.t.abs(),
            params.weight_kind().offset(),
            params.kappa(),
        )
}

/// `∫_{|x|>R} e(u) dx`.
pub fn exterior_energy(state: &RadialState, radius: f64, params: &ModelParams) -> Result<f64> {
    let grid = state.grid();
    if !(0.0..=grid.r_max()).contains(&radius) {
        return Err(CoreError::InvalidArgument(format!(
            "exterior radius {radius} outside [0, {}]",
            grid.r_max()
        )));
    }
    let density = energy_density(state, params);
    Ok(4.0 * PI * grid.integrate_from(&density, radius))
}

/// The quantity bounded by the radial pointwise decay lemma:
/// `∫ (|∇u|^2 + |u|^{p+1}) dx`.
pub fn decay_lemma_energy(split: &EnergySplit, params: &ModelParams) -> f64 {
    2.0 * split.gradient + (params.p() + 1.0) * split.potential
}

/// `sup_r r^{4/(p+3)} |u(r)| / E^{2/(p+3)}` with
/// `E = ∫ (|∇u|^2 + |u|^{p+1}) dx`; zero for the zero state.
pub fn pointwise_decay_ratio(state: &RadialState, params: &ModelParams) -> f64 {
    PointwiseDecay::new(state.grid(), params).ratio(state, params)
}

/// [`pointwise_decay_ratio`] with the radial weights `r^{4/(p+3)}`
/// tabulated once per grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseDecay {
    weights: Vec<f64>,
}

impl PointwiseDecay {
    pub fn new(grid: &Grid, params: &ModelParams) -> Self {
        let a = 4.0 / (params.p() + 3.0);
        Self {
            weights: grid.nodes().iter().map(|r| r.powf(a)).collect(),
        }
    }

    pub fn ratio(&self, state: &RadialState, params: &ModelParams) -> f64 {
        self.ratio_with(state, params, &energy(state, params))
    }

    /// As [`PointwiseDecay::ratio`], reusing an energy split of `state`.
    pub fn ratio_with(&self, state: &RadialState, params: &ModelParams, split: &EnergySplit) -> f64 {
        assert_eq!(self.weights.len(), state.len(), "weights tabulated on another grid");
        let p = params.p();
        let e = decay_lemma_energy(split, params);
        if e <= 0.0 {
            return 0.0;
        }
        let u = state.u();
        let sup = self
            .weights
            .iter()
            .zip(&u)
            .skip(1)
            .map(|(w, u)| w * u.abs())
            .fold(0.0, f64::max);
        sup / e.powf(2.0 / (p + 3.0))
    }
}

/// Explicit constant in the radial decay lemma obtained by tracking the
/// constants through its proof: `|u(r)| <= 2 (E/4π)^{2/(p+3)} r^{-4/(p+3)}`.
pub fn decay_ratio_bound(p: f64) -> f64 {
    2.0 * (4.0 * PI).powf(-2.0 / (p + 3.0))
}

/// Conformal charge at the state's time stamp, `φ = u`, `ψ = u_t`:
///
/// `q0 = ‖xψ + t∇φ‖^2 + ‖(tψ + 2φ) x/|x| + |x|∇φ‖^2`,
/// `q1 = 2/(p+1) ∫ (|x|^2 + t^2) |φ|^{p+1}`.
pub fn conformal_charge(state: &RadialState, params: &ModelParams) -> Result<ChargePair> {
    let grid = state.grid();
    let t = state.t;
    let p = params.p();
    let dw = grid.derivative(&state.w);
    // Multiplied by r^2:  (r v + t(w' - w/r))^2 + (t v + w + r w')^2.
    let q0_density: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            if r == 0.0 {
                return 0.0;
            }
            let (w, v, d) = (state.w[j], state.v[j], dw[j]);
            let a = r * v + t * (d - w / r);
            let b = t * v + w + r * d;
            a * a + b * b
        })
        .collect();
    let pot = potential_density(state, p);
    let q1_density: Vec<f64> = pot
        .iter()
        .zip(grid.nodes())
        .map(|(e, r)| (r * r + t * t) * e)
        .collect();
    let q0 = 4.0 * PI * grid.integrate(&q0_density);
    let q1 = 2.0 / (p + 1.0) * 4.0 * PI * grid.integrate(&q1_density);
    if !q0.is_finite() || !q1.is_finite() {
        return Err(CoreError::NonFinite {
            what: "conformal charge",
            index: 0,
        });
    }
    Ok(ChargePair { q0, q1 })
}

/// `4(3 - p) t/(p + 1) ∫ |u|^{p+1} dx`, the rate of change of the conformal
/// charge along a solution.
pub fn conformal_rate(state: &RadialState, params: &ModelParams) -> f64 {
    let p = params.p();
    let l = 4.0 * PI * state.grid().integrate(&potential_density(state, p));
    4.0 * (3.0 - p) * state.t / (p + 1.0) * l
}

/// `‖u‖^2` in `Ḣ^s(R^3)`, `0 <= s <= 1`, from the discrete sine transform of
/// `w = r·u` on the interior nodes (the last node is treated as a Dirichlet
/// zero).
///
/// With `w(r) = Σ_k b_k sin(kπ r/L)`, the squared norm is
/// `4π (L/2) Σ_k (kπ/L)^{2s} b_k^2`.
pub fn sobolev_norm_sq(state: &RadialState, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(CoreError::InvalidArgument(format!(
            "Sobolev index must lie in [0, 1], got {s}"
        )));
    }
    let grid = state.grid();
    let n = state.len();
    let len = grid.r_max();
    let coeffs = sine_coefficients(&state.w[1..n - 1]);
    let scale = 2.0 / len * grid.dr();
    let sum: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i + 1) as f64;
            let b = scale * c;
            (k * PI / len).powf(2.0 * s) * b * b
        })
        .sum();
    Ok(4.0 * PI * 0.5 * len * sum)
}

/// DST-I: `S_k = Σ_{j=1}^{N} x_j sin(π j k/(N + 1))`, `k = 1..N`, via a
/// complex FFT of the odd extension of length `2(N + 1)`.
fn sine_coefficients(x: &[f64]) -> Vec<f64> {
    let m = x.len() + 1;
    let mut buf = vec![Complex::new(0.0, 0.0); 2 * m];
    for (j, &xj) in x.iter().enumerate() {
        buf[j + 1] = Complex::new(xj, 0.0);
        buf[2 * m - (j + 1)] = Complex::new(-xj, 0.0);
    }
    FftPlanner::new().plan_fft_forward(2 * m).process(&mut buf);
    (1..m).map(|k| -0.5 * buf[k].im).collect()
}
