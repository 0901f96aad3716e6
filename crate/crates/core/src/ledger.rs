//! Space-time accumulators for the localized Morawetz inequality, the
//! escaped-energy bound, the exterior decay law and the global
//! `L^{2(p-1)}` integral.
//!
//! Time integrals use the trapezoid rule on the integrand sampled at every
//! accepted step. Integrals restricted to a time window (`|t| <= R` for the
//! escaped energy, dyadic windows for the `L^{2(p-1)}` profile) clip the
//! linear-in-time segment exactly at the window edge.

use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::functionals::energy_density;
use crate::params::{AbsPow, ModelParams};
use crate::state::RadialState;
use crate::stepper::Observer;

/// Number of dyadic windows below `t_max` in the `L^{2(p-1)}` profile.
const DYADIC_LEVELS: usize = 6;

/// Raw space-time integrals for one radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadiusAccumulators {
    pub radius: f64,
    /// `∫∫_{|x|<R} e(u) dx dt`
    pub interior_energy: f64,
    /// `∫∫_{|x|=R} |u|^2 dσ dt`
    pub sphere: f64,
    /// `∫∫_{|x|<R} |u|^{p+1} dx dt`
    pub interior_potential: f64,
    /// `∫∫_{|x|>R} |u|^{p+1}/|x| dx dt`
    pub exterior: f64,
    /// `∫_{-R}^{R} ∫_{|x|>R} e(u) dx dt`
    pub escaped_energy: f64,
}

impl RadiusAccumulators {
    fn add(&mut self, other: &RadiusAccumulators) {
        self.interior_energy += other.interior_energy;
        self.sphere += other.sphere;
        self.interior_potential += other.interior_potential;
        self.exterior += other.exterior;
        self.escaped_energy += other.escaped_energy;
    }
}

/// The four left-hand terms of the rewritten Morawetz inequality at one
/// radius, each with its coefficient applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzTerms {
    pub radius: f64,
    /// `(1/2R) ∫∫_{|x|<R} e(u)`
    pub interior_energy_avg: f64,
    /// `(1/4R^2) ∫∫_{|x|=R} |u|^2`
    pub sphere_trace: f64,
    /// `(p-3)/(2(p+1)R) ∫∫_{|x|<R} |u|^{p+1}`
    pub interior_potential: f64,
    /// `(p-1)/(2(p+1)) ∫∫_{|x|>R} |u|^{p+1}/|x|`
    pub exterior_morawetz: f64,
}

impl MorawetzTerms {
    pub fn sum(&self) -> f64 {
        self.interior_energy_avg + self.sphere_trace + self.interior_potential + self.exterior_morawetz
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample {
    abs_t: f64,
    l2p2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    params: ModelParams,
    t_max: f64,
    per_radius: Vec<RadiusAccumulators>,
    l2p2: f64,
    /// `(lo, hi, ∫_{lo <= |t| < hi} ∫ |u|^{2(p-1)})`
    windows: Vec<(f64, f64, f64)>,
    last: Option<(Sample, Vec<RadiusAccumulators>)>,
    steps: u64,
}

/// Integral over `[a, b] ∩ [lo, hi]` of the line through `(a, fa)`, `(b, fb)`.
fn clipped_segment(a: f64, fa: f64, b: f64, fb: f64, lo: f64, hi: f64) -> f64 {
    let (a, fa, b, fb) = if a <= b { (a, fa, b, fb) } else { (b, fb, a, fa) };
    let x0 = a.max(lo);
    let x1 = b.min(hi);
    if x1 <= x0 {
        return 0.0;
    }
    if b == a {
        return 0.0;
    }
    let at = |x: f64| fa + (fb - fa) * (x - a) / (b - a);
    0.5 * (at(x0) + at(x1)) * (x1 - x0)
}

impl Ledger {
    /// Tracks `radii` over runs of length up to `t_max` in each direction.
    pub fn new(radii: &[f64], t_max: f64, params: &ModelParams) -> Result<Self> {
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(CoreError::InvalidArgument(format!(
                "tracked radii must be positive and finite: {radii:?}"
            )));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(CoreError::InvalidArgument(format!("t_max must be positive, got {t_max}")));
        }
        let mut edges = vec![0.0];
        edges.extend((0..=DYADIC_LEVELS).rev().map(|k| t_max / 2f64.powi(k as i32)));
        let windows = edges.windows(2).map(|e| (e[0], e[1], 0.0)).collect();
        Ok(Self {
            params: *params,
            t_max,
            per_radius: radii
                .iter()
                .map(|&radius| RadiusAccumulators {
                    radius,
                    ..Default::default()
                })
                .collect(),
            l2p2: 0.0,
            windows,
            last: None,
            steps: 0,
        })
    }

    pub fn radii(&self) -> Vec<f64> {
        self.per_radius.iter().map(|a| a.radius).collect()
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn accumulators(&self) -> &[RadiusAccumulators] {
        &self.per_radius
    }

    pub fn accumulators_mut(&mut self) -> &mut [RadiusAccumulators] {
        &mut self.per_radius
    }

    /// `∫∫ |u|^{2(p-1)} dx dt` so far.
    pub fn l2p2(&self) -> f64 {
        self.l2p2
    }

    pub fn l2p2_windows(&self) -> &[(f64, f64, f64)] {
        &self.windows
    }

    /// Instantaneous integrands at one state. The escaped-energy slot holds
    /// the exterior energy `∫_{|x|>R} e`; the time clipping is applied when
    /// integrating.
    fn integrands(&self, state: &RadialState) -> (Sample, Vec<RadiusAccumulators>) {
        let grid = state.grid();
        let p = self.params.p();
        let u = state.u();
        let nodes = grid.nodes();
        let density = energy_density(state, &self.params);
        let pow = AbsPow::new(p + 1.0);
        let pow_l2 = AbsPow::new(2.0 * (p - 1.0));
        let pot_over_r: Vec<f64> = u.iter().zip(nodes).map(|(u, r)| pow.of(*u) * r).collect();
        let pot: Vec<f64> = pot_over_r.iter().zip(nodes).map(|(q, r)| q * r).collect();
        let l2: Vec<f64> = u.iter().zip(nodes).map(|(u, r)| pow_l2.of(*u) * r * r).collect();
        let four_pi = 4.0 * PI;
        let per_radius = self
            .per_radius
            .iter()
            .map(|acc| {
                let r = acc.radius;
                let w_at = grid.interpolate(&state.w, r);
                RadiusAccumulators {
                    radius: r,
                    interior_energy: four_pi * grid.integrate_between(&density, 0.0, r),
                    sphere: four_pi * w_at * w_at,
                    interior_potential: four_pi * grid.integrate_between(&pot, 0.0, r),
                    exterior: four_pi * grid.integrate_from(&pot_over_r, r),
                    escaped_energy: four_pi * grid.integrate_from(&density, r),
                }
            })
            .collect();
        let sample = Sample {
            abs_t: state.t.abs(),
            l2p2: four_pi * grid.integrate(&l2),
        };
        (sample, per_radius)
    }

    /// Adds the trapezoid contribution of the segment ending at `state`.
    /// The first call after construction (or after [`Ledger::reset_segment`])
    /// only records the integrand.
    pub fn accumulate(&mut self, state: &RadialState, dt: f64) {
        let (sample, current) = self.integrands(state);
        if let Some((prev, prev_vals)) = self.last.take() {
            if dt != 0.0 {
                let h = dt.abs();
                let trap = |a: f64, b: f64| 0.5 * (a + b) * h;
                for ((acc, a), b) in self.per_radius.iter_mut().zip(&prev_vals).zip(&current) {
                    acc.interior_energy += trap(a.interior_energy, b.interior_energy);
                    acc.sphere += trap(a.sphere, b.sphere);
                    acc.interior_potential += trap(a.interior_potential, b.interior_potential);
                    acc.exterior += trap(a.exterior, b.exterior);
                    acc.escaped_energy += clipped_segment(
                        prev.abs_t,
                        a.escaped_energy,
                        sample.abs_t,
                        b.escaped_energy,
                        0.0,
                        acc.radius,
                    );
                }
                self.l2p2 += trap(prev.l2p2, sample.l2p2);
                for (lo, hi, val) in self.windows.iter_mut() {
                    *val += clipped_segment(prev.abs_t, prev.l2p2, sample.abs_t, sample.l2p2, *lo, *hi);
                }
                self.steps += 1;
            }
        }
        self.last = Some((sample, current));
    }

    /// Forgets the last sample so the next call starts a new time segment
    /// (e.g. the backward run after the forward one).
    pub fn reset_segment(&mut self) {
        self.last = None;
    }

    /// Sum of two ledgers over the same radii, e.g. forward and backward
    /// runs from the same data.
    pub fn merge(&self, other: &Ledger) -> Result<Ledger> {
        if self.radii() != other.radii() || self.windows.len() != other.windows.len() {
            return Err(CoreError::InvalidArgument(
                "cannot merge ledgers with different radii or windows".into(),
            ));
        }
        let mut out = self.clone();
        for (a, b) in out.per_radius.iter_mut().zip(&other.per_radius) {
            a.add(b);
        }
        out.l2p2 += other.l2p2;
        for (a, b) in out.windows.iter_mut().zip(&other.windows) {
            a.2 += b.2;
        }
        out.steps += other.steps;
        out.last = None;
        Ok(out)
    }

    /// Morawetz terms with coefficients applied.
    pub fn terms(&self) -> Vec<MorawetzTerms> {
        let p = self.params.p();
        self.per_radius
            .iter()
            .map(|a| {
                let r = a.radius;
                MorawetzTerms {
                    radius: r,
                    interior_energy_avg: a.interior_energy / (2.0 * r),
                    sphere_trace: a.sphere / (4.0 * r * r),
                    interior_potential: (p - 3.0) / (2.0 * (p + 1.0) * r) * a.interior_potential,
                    exterior_morawetz: (p - 1.0) / (2.0 * (p + 1.0)) * a.exterior,
                }
            })
            .collect()
    }

    /// `(1/2R) ∫_{-R}^{R} ∫_{|x|>R} e(u) dx dt` per radius.
    pub fn key_estimate_rhs(&self) -> Vec<f64> {
        self.per_radius
            .iter()
            .map(|a| a.escaped_energy / (2.0 * a.radius))
            .collect()
    }
}

impl Observer for Ledger {
    fn observe(&mut self, state: &RadialState, dt: f64) -> Result<()> {
        self.accumulate(state, dt);
        Ok(())
    }
}

/// Per-radius check of the rewritten Morawetz inequality and of the escaped
/// energy bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzCheck {
    pub terms: MorawetzTerms,
    /// `E - (sum of the four terms)`
    pub residual: f64,
    /// `(1/2R) ∫_{-R}^{R} ∫_{|x|>R} e`
    pub key_rhs: f64,
    /// `key_rhs - exterior_morawetz`
    pub key_margin: f64,
    pub inequality_holds: bool,
    pub key_estimate_holds: bool,
}

/// Checks `sum <= E (1 + tol)` and `exterior <= key_rhs + tol·E` at every
/// tracked radius.
pub fn morawetz_report(ledger: &Ledger, energy: f64, tol: f64) -> Vec<MorawetzCheck> {
    ledger
        .terms()
        .into_iter()
        .zip(ledger.key_estimate_rhs())
        .map(|(terms, key_rhs)| {
            let residual = energy - terms.sum();
            let key_margin = key_rhs - terms.exterior_morawetz;
            MorawetzCheck {
                terms,
                residual,
                key_rhs,
                key_margin,
                inequality_holds: residual >= -tol * energy,
                key_estimate_holds: key_margin >= -tol * energy,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub radii: Vec<f64>,
    /// `∫∫_{|x|>R} |u|^{p+1}/|x|` at each fitted radius.
    pub values: Vec<f64>,
    /// Least-squares slope of `log M(R)` against `log R`.
    pub slope: f64,
    pub intercept: f64,
    /// `max_R M(R) R^κ / I(0)`.
    pub max_scaled: f64,
}

/// Fits the exterior Morawetz integral to a power of `R` over the tracked
/// radii inside `[r_lo, r_hi]`.
pub fn decay_fit(ledger: &Ledger, initial_weighted_energy: f64, kappa: f64, r_lo: f64, r_hi: f64) -> Result<DecayFit> {
    let selected: Vec<(f64, f64)> = ledger
        .accumulators()
        .iter()
        .filter(|a| a.radius >= r_lo && a.radius <= r_hi)
        .map(|a| (a.radius, a.exterior))
        .collect();
    if selected.iter().all(|(_, m)| *m <= 0.0) {
        return Err(CoreError::NoExteriorSignal);
    }
    if selected.len() < 4 || selected.iter().any(|(_, m)| *m <= 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "decay fit needs at least 4 radii in [{r_lo}, {r_hi}] with non-zero exterior integrals, got {selected:?}"
        )));
    }
    let xs: Vec<f64> = selected.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = selected.iter().map(|(_, m)| m.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_scaled = selected
        .iter()
        .map(|(r, m)| m * r.powf(kappa) / initial_weighted_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        radii: selected.iter().map(|s| s.0).collect(),
        values: selected.iter().map(|s| s.1).collect(),
        slope,
        intercept,
        max_scaled,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2p2Report {
    pub total: f64,
    /// `(lo, hi, contribution, fraction of total)` per dyadic window of `|t|`.
    pub windows: Vec<(f64, f64, f64, f64)>,
    /// Fraction contributed by `t_max/2 <= |t| <= t_max`.
    pub last_window_fraction: f64,
}

pub fn l2p2_report(ledger: &Ledger) -> L2p2Report {
    let total = ledger.l2p2();
    let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    let windows: Vec<_> = ledger
        .l2p2_windows()
        .iter()
        .map(|&(lo, hi, v)| (lo, hi, v, frac(v)))
        .collect();
    let last_window_fraction = windows.last().map(|w| w.3).unwrap_or(0.0);
    L2p2Report {
        total,
        windows,
        last_window_fraction,
    }
}
