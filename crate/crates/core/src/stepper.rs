//! Explicit velocity-Verlet integration of
//! `w_tt - w_rr = -|w/r|^{p-1} (w/r) r` on `[0, r_max]` with `w(0) = 0`.

use log::warn;

use crate::error::{CoreError, Result};
use crate::params::{AbsPow, ModelParams, WeightKind};
use crate::linear_prop::FreePropagator;
use crate::state::RadialState;

/// Relative amplitude below which a node counts as outside the support when
/// checking whether a run can reach the outer boundary.
pub const SUPPORT_TOLERANCE: f64 = 1e-14;

/// Growth of `max|w|` within one step that is treated as a blow-up.
const INSTABILITY_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// `w = w_t = 0` at the last node.
    #[default]
    HardZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    cfl_lambda: f64,
    pub boundary: BoundaryPolicy,
    pub nonlinear: bool,
    /// Run even when the data's support plus the horizon exceeds `r_max`.
    pub allow_boundary_reach: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            cfl_lambda: 0.5,
            boundary: BoundaryPolicy::HardZero,
            nonlinear: true,
            allow_boundary_reach: false,
        }
    }
}

impl StepperConfig {
    pub fn new(cfl_lambda: f64) -> Result<Self> {
        if !(cfl_lambda > 0.0 && cfl_lambda <= 1.0) {
            return Err(CoreError::InvalidStepper(format!(
                "CFL number must lie in (0, 1], got {cfl_lambda}"
            )));
        }
        Ok(Self {
            cfl_lambda,
            ..Self::default()
        })
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_boundary_reach(mut self, allow: bool) -> Self {
        self.allow_boundary_reach = allow;
        self
    }

    pub fn cfl_lambda(&self) -> f64 {
        self.cfl_lambda
    }

    pub fn dt(&self, dr: f64) -> f64 {
        self.cfl_lambda * dr
    }
}

/// Receives every accepted state of an evolution.
pub trait Observer {
    /// Called once with the initial state and `dt = 0`, then after each step
    /// with the signed step just taken.
    fn observe(&mut self, state: &RadialState, dt: f64) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&RadialState, f64) -> Result<()>,
{
    fn observe(&mut self, state: &RadialState, dt: f64) -> Result<()> {
        self(state, dt)
    }
}

/// `F_j = -|u_j|^{p-1} u_j r_j` with `u_j = w_j / r_j`; `F_0 = 0`.
pub fn nonlinear_force(state: &RadialState, params: &ModelParams) -> Result<Vec<f64>> {
    let mut force = vec![0.0; state.len()];
    add_force(&state.w, state.grid().nodes(), params.p(), &mut force)?;
    Ok(force)
}

fn add_force(w: &[f64], nodes: &[f64], p: f64, out: &mut [f64]) -> Result<()> {
    let pow = AbsPow::new(p);
    for j in 1..w.len() {
        let r = nodes[j];
        let u = w[j] / r;
        if !u.is_finite() {
            return Err(CoreError::NonFinite {
                what: "nonlinear force",
                index: j,
            });
        }
        if u != 0.0 {
            out[j] -= u.signum() * pow.of(u) * r;
        }
    }
    Ok(())
}

/// Acceleration `D_2 w + F(w)` with both end nodes held at zero.
fn acceleration(
    w: &[f64],
    nodes: &[f64],
    dr: f64,
    cfg: &StepperConfig,
    params: &ModelParams,
    out: &mut [f64],
) -> Result<()> {
    let n = w.len();
    let inv = 1.0 / (dr * dr);
    out[0] = 0.0;
    for j in 1..n - 1 {
        out[j] = (w[j + 1] - 2.0 * w[j] + w[j - 1]) * inv;
    }
    out[n - 1] = 0.0;
    if cfg.nonlinear {
        add_force(&w[..n - 1], &nodes[..n - 1], params.p(), &mut out[..n - 1])?;
    }
    Ok(())
}

fn pin_boundaries(state: &mut RadialState, policy: BoundaryPolicy) {
    let n = state.len();
    state.w[0] = 0.0;
    state.v[0] = 0.0;
    match policy {
        BoundaryPolicy::HardZero => {
            state.w[n - 1] = 0.0;
            state.v[n - 1] = 0.0;
        }
    }
}

/// Verlet integrator that carries the acceleration of the current state
/// between steps.
struct Verlet<'a> {
    cfg: &'a StepperConfig,
    params: &'a ModelParams,
    acc: Vec<f64>,
}

impl<'a> Verlet<'a> {
    fn new(state: &RadialState, cfg: &'a StepperConfig, params: &'a ModelParams) -> Result<Self> {
        let mut acc = vec![0.0; state.len()];
        acceleration(&state.w, state.grid().nodes(), state.grid().dr(), cfg, params, &mut acc)?;
        Ok(Self { cfg, params, acc })
    }

    /// Kick-drift-kick in place.
    fn advance(&mut self, state: &mut RadialState, dt: f64) -> Result<()> {
        let before = state.max_abs_w();
        let half = 0.5 * dt;
        for (v, a) in state.v.iter_mut().zip(&self.acc) {
            *v += half * a;
        }
        for (w, v) in state.w.iter_mut().zip(&state.v) {
            *w += dt * v;
        }
        pin_boundaries(state, self.cfg.boundary);
        let grid = state.grid_arc().clone();
        acceleration(&state.w, grid.nodes(), grid.dr(), self.cfg, self.params, &mut self.acc)?;
        for (v, a) in state.v.iter_mut().zip(&self.acc) {
            *v += half * a;
        }
        pin_boundaries(state, self.cfg.boundary);
        state.t += dt;

        let after = state.max_abs_w();
        if !after.is_finite() {
            return Err(CoreError::Unstable {
                t: state.t,
                growth: f64::INFINITY,
            });
        }
        if before > 0.0 && after > INSTABILITY_GROWTH * before {
            return Err(CoreError::Unstable {
                t: state.t,
                growth: after / before,
            });
        }
        Ok(())
    }
}

/// One step of size `dt = λ·dr` forward in time.
pub fn step(state: &RadialState, cfg: &StepperConfig, params: &ModelParams) -> Result<RadialState> {
    step_by(state, cfg.dt(state.grid().dr()), cfg, params)
}

/// One step of signed size `dt`; `|dt|` must respect the CFL bound.
pub fn step_by(state: &RadialState, dt: f64, cfg: &StepperConfig, params: &ModelParams) -> Result<RadialState> {
    check_dt(dt, state.grid().dr())?;
    let mut next = state.clone();
    Verlet::new(state, cfg, params)?.advance(&mut next, dt)?;
    Ok(next)
}

fn check_dt(dt: f64, dr: f64) -> Result<()> {
    if !dt.is_finite() || dt.abs() > dr * (1.0 + 1e-12) {
        return Err(CoreError::InvalidStepper(format!(
            "|dt| = {} exceeds the CFL limit dr = {dr}",
            dt.abs()
        )));
    }
    Ok(())
}

/// Evolves `state` to absolute time `t_final` (forward or backward).
///
/// Steps have size `λ·dr`; the last one is shortened to land on `t_final`.
/// Step times are computed as `t_0 + k·dt`, so they do not accumulate
/// rounding drift.
pub fn evolve(
    state: &RadialState,
    t_final: f64,
    cfg: &StepperConfig,
    params: &ModelParams,
    observers: &mut [&mut dyn Observer],
) -> Result<RadialState> {
    if !t_final.is_finite() {
        return Err(CoreError::InvalidArgument(format!("target time {t_final} is not finite")));
    }
    let grid = state.grid_arc().clone();
    let span = t_final - state.t;
    let support = state.support_radius(SUPPORT_TOLERANCE);
    if support + span.abs() > grid.r_max() {
        let err = CoreError::BoundaryReach {
            support,
            horizon: span.abs(),
            r_max: grid.r_max(),
        };
        if cfg.allow_boundary_reach {
            warn!("{err}; continuing as requested");
        } else {
            return Err(err);
        }
    }

    let mut current = state.clone();
    pin_boundaries(&mut current, cfg.boundary);
    for obs in observers.iter_mut() {
        obs.observe(&current, 0.0)?;
    }
    if span == 0.0 {
        return Ok(current);
    }

    let h = cfg.dt(grid.dr()).copysign(span);
    let t0 = current.t;
    // Number of full steps; a remainder below 1e-9 of a step is absorbed.
    let full = ((span / h) * (1.0 + 1e-12)).floor() as u64;
    let remainder = span - full as f64 * h;
    let mut verlet = Verlet::new(&current, cfg, params)?;
    for k in 1..=full {
        verlet.advance(&mut current, h)?;
        current.t = t0 + k as f64 * h;
        for obs in observers.iter_mut() {
            obs.observe(&current, h)?;
        }
    }
    if remainder.abs() > 1e-9 * h.abs() {
        verlet.advance(&mut current, remainder)?;
        for obs in observers.iter_mut() {
            obs.observe(&current, remainder)?;
        }
    }
    current.t = t_final;
    Ok(current)
}

/// The stepper with the nonlinearity switched off, used as a free
/// propagator. Unlike the d'Alembert formula it shares the stepper's
/// dispersion error, so comparisons against nonlinear runs isolate the
/// effect of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteFreePropagator {
    cfg: StepperConfig,
}

impl DiscreteFreePropagator {
    pub fn new(cfg: &StepperConfig) -> Self {
        Self { cfg: cfg.linear() }
    }
}

impl FreePropagator for DiscreteFreePropagator {
    fn propagate(&self, state: &RadialState, t: f64) -> Result<RadialState> {
        // The force is switched off, so any admissible exponent will do.
        let params = ModelParams::new(4.0, 0.0, WeightKind::PowR)?;
        evolve(state, state.t + t, &self.cfg, &params, &mut [])
    }
}
