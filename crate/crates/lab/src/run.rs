//! A single experiment: forward and backward evolutions from the data with
//! the diagnostic observers attached, followed by the end-of-run analyses.

use std::fs;
use std::path::Path;
use std::time::Instant;

use morawetz_core::functionals::{conformal_rate, decay_ratio_bound};
use morawetz_core::{
    conformal_charge, decay_fit, energy, evolve, exterior_energy, free_evolve, l2p2_report, morawetz_report,
    sample_data, scatter_extract, weighted_energy, CoreError, DAlembert, DiscreteFreePropagator, EnergySplit,
    FreePropagator, Ledger, ModelParams, Observer, PointwiseDecay, RadialState,
};
use serde::{Deserialize, Serialize};

use crate::config::{PropagatorKind, RunConfig};
use crate::error::{LabError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance of the Morawetz and escaped-energy checks.
pub const MORAWETZ_TOL: f64 = 1e-2;

/// Radii used for the exterior decay fit.
pub const DECAY_FIT_RANGE: (f64, f64) = (2.0, 16.0);

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const REPORT_FILE: &str = "report.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One time-series row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub e: f64,
    pub e_grad: f64,
    pub e_kin: f64,
    pub e_pot: f64,
    pub i_t: f64,
    pub ratio: f64,
    pub q0: f64,
    pub q1: f64,
    pub exterior: Vec<f64>,
}

/// Energy conserved by the evolution being run: without the nonlinearity the
/// potential term is not part of it.
fn run_energy(state: &RadialState, params: &ModelParams, nonlinear: bool) -> EnergySplit {
    let split = energy(state, params);
    if nonlinear {
        split
    } else {
        EnergySplit {
            potential: 0.0,
            total: split.gradient + split.kinetic,
            ..split
        }
    }
}

/// Per-step diagnostics along one direction of time.
struct Monitor<'a> {
    params: &'a ModelParams,
    nonlinear: bool,
    decay: PointwiseDecay,
    radii: &'a [f64],
    cadence: usize,
    steps: usize,
    rows: Vec<Row>,
    last_row_step: Option<usize>,
    e0: f64,
    i0: f64,
    prev_i: f64,
    max_drift: f64,
    max_rise: f64,
    max_i: f64,
    ratio_sup: f64,
    /// `(t, Q, dQ/dt predicted)` at every step.
    charge: Vec<(f64, f64, f64)>,
    last: Option<RadialState>,
}

impl<'a> Monitor<'a> {
    fn new(params: &'a ModelParams, nonlinear: bool, initial: &RadialState, radii: &'a [f64], cadence: usize) -> Self {
        Self {
            params,
            nonlinear,
            decay: PointwiseDecay::new(initial.grid(), params),
            radii,
            cadence,
            steps: 0,
            rows: Vec::new(),
            last_row_step: None,
            e0: 0.0,
            i0: 0.0,
            prev_i: 0.0,
            max_drift: 0.0,
            max_rise: 0.0,
            max_i: 0.0,
            ratio_sup: 0.0,
            charge: Vec::new(),
            last: None,
        }
    }

    fn row(&self, state: &RadialState) -> Result<Row> {
        let split = run_energy(state, self.params, self.nonlinear);
        let q = conformal_charge(state, self.params)?;
        let exterior = self
            .radii
            .iter()
            .map(|&r| exterior_energy(state, r, self.params))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Row {
            t: state.t,
            e: split.total,
            e_grad: split.gradient,
            e_kin: split.kinetic,
            e_pot: split.potential,
            i_t: weighted_energy(state, self.params),
            ratio: self.decay.ratio(state, self.params),
            q0: q.q0,
            q1: q.q1,
            exterior,
        })
    }

    fn finish(&mut self) -> Result<()> {
        if self.last_row_step != Some(self.steps) {
            if let Some(state) = self.last.take() {
                let row = self.row(&state)?;
                self.rows.push(row);
            }
        }
        Ok(())
    }
}

impl Observer for Monitor<'_> {
    fn observe(&mut self, state: &RadialState, dt: f64) -> morawetz_core::Result<()> {
        let first = self.last.is_none();
        if dt == 0.0 && !first {
            // start of a later segment: same state as the previous end
            return Ok(());
        }
        if !first {
            self.steps += 1;
        }
        let full = energy(state, self.params);
        let e = run_energy(state, self.params, self.nonlinear).total;
        let i = weighted_energy(state, self.params);
        let ratio = self.decay.ratio_with(state, self.params, &full);
        let q = conformal_charge(state, self.params)?;
        if first {
            self.e0 = e;
            self.i0 = i;
            self.prev_i = i;
            self.max_i = i;
        }
        if self.e0 > 0.0 {
            self.max_drift = self.max_drift.max((e / self.e0 - 1.0).abs());
        }
        if self.i0 > 0.0 {
            self.max_rise = self.max_rise.max((i - self.prev_i) / self.i0);
        }
        self.prev_i = i;
        self.max_i = self.max_i.max(i);
        self.ratio_sup = self.ratio_sup.max(ratio);
        self.charge.push((state.t, q.total(), conformal_rate(state, self.params)));
        if self.steps.is_multiple_of(self.cadence) {
            let row = self.row(state).map_err(|e| CoreError::Observer(e.to_string()))?;
            self.rows.push(row);
            self.last_row_step = Some(self.steps);
        }
        self.last = Some(state.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub p: f64,
    pub kappa: f64,
    pub kappa_critical: f64,
    /// `3(5-p)/(p+3)` as a reduced fraction when `p` is rational.
    pub kappa_critical_exact: Option<String>,
    pub critical_regularity: f64,
    pub critical_regularity_exact: Option<String>,
    pub above_threshold: bool,
}

impl ModelReport {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            p: params.p(),
            kappa: params.kappa(),
            kappa_critical: params.kappa_critical(),
            kappa_critical_exact: params.kappa_critical_rational().map(|r| r.to_string()),
            critical_regularity: params.critical_regularity(),
            critical_regularity_exact: params.critical_regularity_rational().map(|r| r.to_string()),
            above_threshold: params.above_threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub initial: f64,
    pub gradient: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `max_t |E(t)/E(0) - 1|` over both directions.
    pub max_relative_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapingReport {
    pub initial: f64,
    /// Largest single-step increase of `I(t)`, relative to `I(0)`.
    pub max_step_rise: f64,
    /// `max_t I(t)/I(0)`.
    pub max_over_initial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `sup_t sup_r r^{4/(p+3)} |u| / E^{2/(p+3)}`
    pub sup_ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    pub q0: f64,
    pub q1: f64,
    pub window: [f64; 2],
    /// `max |dQ/dt - rate| / |rate|` over the window, with centred
    /// differences between consecutive steps.
    pub max_relative_residual: f64,
    /// Largest single-step increase of `Q` for `t > 0`, relative to `Q(0)`.
    pub max_increase: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorawetzRow {
    pub radius: f64,
    pub interior_energy_avg: f64,
    pub sphere_trace: f64,
    pub interior_potential: f64,
    pub exterior_morawetz: f64,
    pub sum: f64,
    /// `E - sum`
    pub residual: f64,
    pub key_rhs: f64,
    /// `key_rhs - exterior_morawetz`
    pub key_margin: f64,
    pub inequality_holds: bool,
    pub key_estimate_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub max_scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2p2Out {
    pub total: f64,
    pub last_window_fraction: f64,
    pub windows: Vec<WindowRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterOut {
    pub propagator: PropagatorKind,
    pub times: Vec<f64>,
    /// `δ(T_k, T_{k+1})`
    pub consecutive: Vec<f64>,
    pub strictly_decreasing: bool,
    pub cauchy: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOut {
    pub dr: f64,
    /// `max_j |w_j(T) - w_exact(r_j, T)|`
    pub max_node_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub steps_forward: usize,
    pub steps_backward: usize,
    pub model: ModelReport,
    pub energy: EnergyReport,
    pub escaping: EscapingReport,
    pub decay_lemma: LemmaReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalReport>,
    pub morawetz: Vec<MorawetzRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_error: Option<String>,
    pub l2p2: L2p2Out,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleOut>,
}

impl Report {
    pub fn morawetz_ok(&self) -> bool {
        self.morawetz.iter().all(|m| m.inequality_holds)
    }

    pub fn key_estimate_ok(&self) -> bool {
        self.morawetz.iter().all(|m| m.key_estimate_holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config: RunConfig,
    /// κ-weighted energy of the data beyond `r_max`.
    pub discarded_tail: f64,
    pub report: Report,
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// Everything a run produces, before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub report: Report,
    pub rows: Vec<Row>,
    pub discarded_tail: f64,
    pub initial: RadialState,
    pub final_forward: RadialState,
    pub wall_clock_seconds: f64,
}

struct Direction {
    rows: Vec<Row>,
    steps: usize,
    drift: f64,
    rise: f64,
    max_i: f64,
    ratio_sup: f64,
    charge: Vec<(f64, f64, f64)>,
    ledger: Ledger,
    snapshots: Vec<RadialState>,
    last: RadialState,
}

fn run_direction(
    initial: &RadialState,
    config: &RunConfig,
    params: &ModelParams,
    radii: &[f64],
    sign: f64,
) -> Result<Direction> {
    let stepper = config.stepper()?;
    let mut ledger = Ledger::new(radii, config.t_max, params)?;
    let mut monitor = Monitor::new(params, config.nonlinear, initial, radii, config.cadence);
    let mut checkpoints: Vec<f64> = if sign > 0.0 {
        config.snapshot_times.clone()
    } else {
        Vec::new()
    };
    if checkpoints.last() != Some(&config.t_max) {
        checkpoints.push(config.t_max);
    }
    let mut snapshots = Vec::new();
    let mut state = initial.clone();
    for &t in &checkpoints {
        state = evolve(&state, sign * t, &stepper, params, &mut [&mut monitor, &mut ledger])?;
        if sign > 0.0 && config.snapshot_times.contains(&t) {
            snapshots.push(state.clone());
        }
    }
    monitor.finish()?;
    Ok(Direction {
        rows: monitor.rows,
        steps: monitor.steps,
        drift: monitor.max_drift,
        rise: monitor.max_rise,
        max_i: monitor.max_i,
        ratio_sup: monitor.ratio_sup,
        charge: monitor.charge,
        ledger,
        snapshots,
        last: state,
    })
}

fn conformal_report(charge: &[(f64, f64, f64)], window: [f64; 2]) -> Option<ConformalReport> {
    let q_start = charge.first()?.1;
    let mut worst = 0.0f64;
    let mut samples = 0;
    for k in 1..charge.len().saturating_sub(1) {
        let (t, _, rate) = charge[k];
        if t < window[0] || t > window[1] {
            continue;
        }
        let (ta, qa, _) = charge[k - 1];
        let (tb, qb, _) = charge[k + 1];
        let slope = (qb - qa) / (tb - ta);
        let err = (slope - rate).abs();
        let rel = if rate != 0.0 {
            err / rate.abs()
        } else if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(rel);
        samples += 1;
    }
    if samples == 0 {
        return None;
    }
    let scale = if q_start != 0.0 { q_start.abs() } else { 1.0 };
    let max_increase = charge
        .windows(2)
        .filter(|w| w[0].0 > 0.0)
        .map(|w| (w[1].1 - w[0].1) / scale)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(ConformalReport {
        q0: 0.0,
        q1: 0.0,
        window,
        max_relative_residual: worst,
        max_increase,
        samples,
    })
}

/// Runs the experiment in memory.
pub fn execute(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let params = config.params()?;
    let grid = config.grid()?;
    let family = config.family()?;
    let initial = sample_data(&family, grid, &params)?;
    let radii = config.resolved_radii();
    log::info!(
        "{}: {} nodes, dr = {}, t_max = {}",
        config.preset,
        config.n,
        initial.grid().dr(),
        config.t_max
    );

    let forward = run_direction(&initial, config, &params, &radii, 1.0)?;
    let backward = if config.backward {
        Some(run_direction(&initial, config, &params, &radii, -1.0)?)
    } else {
        None
    };

    let split = run_energy(&initial, &params, config.nonlinear);
    let i0 = weighted_energy(&initial, &params);
    let ledger = match &backward {
        Some(b) => forward.ledger.merge(&b.ledger)?,
        None => forward.ledger.clone(),
    };
    let morawetz = morawetz_report(&ledger, split.total, MORAWETZ_TOL)
        .into_iter()
        .map(|c| MorawetzRow {
            radius: c.terms.radius,
            interior_energy_avg: c.terms.interior_energy_avg,
            sphere_trace: c.terms.sphere_trace,
            interior_potential: c.terms.interior_potential,
            exterior_morawetz: c.terms.exterior_morawetz,
            sum: c.terms.sum(),
            residual: c.residual,
            key_rhs: c.key_rhs,
            key_margin: c.key_margin,
            inequality_holds: c.inequality_holds,
            key_estimate_holds: c.key_estimate_holds,
        })
        .collect();
    let (decay, decay_error) = match decay_fit(&ledger, i0, params.kappa(), DECAY_FIT_RANGE.0, DECAY_FIT_RANGE.1) {
        Ok(fit) => (
            Some(DecayReport {
                radii: fit.radii,
                values: fit.values,
                slope: fit.slope,
                intercept: fit.intercept,
                max_scaled: fit.max_scaled,
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    let l2 = l2p2_report(&ledger);
    let l2p2 = L2p2Out {
        total: l2.total,
        last_window_fraction: l2.last_window_fraction,
        windows: l2
            .windows
            .iter()
            .map(|&(lo, hi, value, fraction)| WindowRow {
                lo,
                hi,
                value,
                fraction,
            })
            .collect(),
    };

    let conformal = conformal_report(&forward.charge, config.conformal_window).map(|mut c| {
        let q = conformal_charge(&initial, &params).expect("finite data give a finite charge");
        c.q0 = q.q0;
        c.q1 = q.q1;
        c
    });

    let scatter = if forward.snapshots.is_empty() {
        None
    } else {
        let discrete;
        let prop: &dyn FreePropagator = match config.propagator {
            PropagatorKind::Discrete => {
                discrete = DiscreteFreePropagator::new(&config.stepper()?);
                &discrete
            }
            PropagatorKind::Dalembert => &DAlembert,
        };
        let rec = scatter_extract(&forward.snapshots, prop)?;
        Some(ScatterOut {
            propagator: config.propagator,
            times: rec.times.clone(),
            consecutive: rec.consecutive(),
            strictly_decreasing: rec.strictly_decreasing(),
            cauchy: rec.cauchy.clone(),
        })
    };

    let oracle = if config.oracle {
        let exact = free_evolve(&initial, forward.last.t)?;
        let err = forward
            .last
            .w
            .iter()
            .zip(&exact.w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Some(OracleOut {
            dr: initial.grid().dr(),
            max_node_error: err,
        })
    } else {
        None
    };

    let back = backward.as_ref();
    let report = Report {
        steps_forward: forward.steps,
        steps_backward: back.map_or(0, |b| b.steps),
        model: ModelReport::new(&params),
        energy: EnergyReport {
            initial: split.total,
            gradient: split.gradient,
            kinetic: split.kinetic,
            potential: split.potential,
            max_relative_drift: forward.drift.max(back.map_or(0.0, |b| b.drift)),
        },
        escaping: EscapingReport {
            initial: i0,
            max_step_rise: forward.rise.max(back.map_or(0.0, |b| b.rise)),
            max_over_initial: if i0 > 0.0 {
                forward.max_i.max(back.map_or(0.0, |b| b.max_i)) / i0
            } else {
                0.0
            },
        },
        decay_lemma: LemmaReport {
            sup_ratio: forward.ratio_sup.max(back.map_or(0.0, |b| b.ratio_sup)),
            bound: decay_ratio_bound(params.p()),
        },
        conformal,
        morawetz,
        decay,
        decay_error,
        l2p2,
        scatter,
        oracle,
    };

    let mut rows: Vec<Row> = match backward {
        Some(b) => b.rows.into_iter().skip(1).rev().collect(),
        None => Vec::new(),
    };
    rows.extend(forward.rows);

    Ok(RunOutput {
        config: config.clone(),
        report,
        rows,
        discarded_tail: family.discarded_tail(config.r_max, &params),
        initial,
        final_forward: forward.last,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn timeseries_header(radii: &[f64]) -> Vec<String> {
    let mut header: Vec<String> = ["t", "E", "E_grad", "E_kin", "E_pot", "I_t", "decay_ratio", "Q0", "Q1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(radii.iter().map(|r| format!("exterior_E_at_R={r}")));
    header
}

fn write_timeseries(path: &Path, radii: &[f64], rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| LabError::Serialize(e.to_string()))?;
    let csv_err = |e: csv::Error| LabError::Serialize(format!("{}: {e}", path.display()));
    w.write_record(timeseries_header(radii)).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![row.t, row.e, row.e_grad, row.e_kin, row.e_pot, row.i_t, row.ratio, row.q0, row.q1];
        rec.extend(&row.exterior);
        w.write_record(rec.iter().map(|x| x.to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

impl RunOutput {
    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            config: self.config.clone(),
            discarded_tail: self.discarded_tail,
            report: self.report.clone(),
            files: vec![TIMESERIES_FILE.into(), REPORT_FILE.into(), MANIFEST_FILE.into()],
            wall_clock_seconds: self.wall_clock_seconds,
        }
    }

    /// Writes the time series, the report and the manifest into `dir`.
    pub fn write(&self, dir: &Path) -> Result<RunManifest> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        write_timeseries(&dir.join(TIMESERIES_FILE), &self.config.resolved_radii(), &self.rows)?;
        let report = toml::to_string(&self.report).map_err(|e| LabError::Serialize(e.to_string()))?;
        let path = dir.join(REPORT_FILE);
        fs::write(&path, report).map_err(|e| LabError::io(path, e))?;
        let manifest = self.manifest();
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| LabError::Serialize(e.to_string()))?;
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, json + "\n").map_err(|e| LabError::io(path, e))?;
        Ok(manifest)
    }
}

/// Runs `config` and writes its files into `config.out_dir`.
pub fn run_experiment(config: &RunConfig) -> Result<RunManifest> {
    let out = execute(config)?;
    out.write(Path::new(&config.out_dir))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    fn small(name: &str) -> RunConfig {
        let mut cfg = preset(name).unwrap();
        cfg.r_max = 20.0;
        cfg.n = 401;
        cfg.t_max = 4.0;
        cfg.radii = vec![1.0, 2.0, 4.0, 8.0];
        cfg.snapshot_times.retain(|&t| t <= 4.0);
        cfg
    }

    #[test]
    fn zero_run_reports_zeros() {
        let out = execute(&preset("zero").unwrap()).unwrap();
        let r = &out.report;
        assert_eq!(r.energy.initial, 0.0);
        assert_eq!(r.escaping.initial, 0.0);
        assert_eq!(r.l2p2.total, 0.0);
        assert_eq!(r.decay_lemma.sup_ratio, 0.0);
        assert!(r.morawetz.iter().all(|m| m.sum == 0.0 && m.residual == 0.0 && m.key_rhs == 0.0));
        assert!(r.decay.is_none());
        assert!(r.decay_error.as_deref().unwrap().contains("no exterior signal"));
        assert!(out.rows.iter().all(|row| row.e == 0.0 && row.exterior.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn rows_cover_both_directions_in_order() {
        let cfg = small("morawetz");
        let out = execute(&cfg).unwrap();
        let ts: Vec<f64> = out.rows.iter().map(|r| r.t).collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]), "{ts:?}");
        assert_eq!(*ts.first().unwrap(), -4.0);
        assert_eq!(*ts.last().unwrap(), 4.0);
        assert!(ts.contains(&0.0));
        assert_eq!(out.report.steps_forward, out.report.steps_backward);
        assert_eq!(out.final_forward.t, 4.0);
    }

    #[test]
    fn snapshots_and_oracle() {
        let mut cfg = small("scatter");
        cfg.backward = false;
        let out = execute(&cfg).unwrap();
        let s = out.report.scatter.unwrap();
        assert_eq!(s.times, vec![2.0, 4.0]);
        assert_eq!(s.cauchy[0][0], 0.0);
        assert_eq!(s.cauchy[0][1], s.cauchy[1][0]);

        let cfg = small("linear-oracle");
        let out = execute(&cfg).unwrap();
        let o = out.report.oracle.unwrap();
        assert!(o.max_node_error < 1e-2, "{o:?}");
    }

    #[test]
    fn files_are_deterministic() {
        let cfg = small("morawetz");
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let out = execute(&cfg).unwrap();
        let m1 = out.write(a.path()).unwrap();
        let m2 = execute(&cfg).unwrap().write(b.path()).unwrap();
        for f in [TIMESERIES_FILE, REPORT_FILE] {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
        assert_eq!(m1.report, m2.report);
        let text = fs::read_to_string(a.path().join(TIMESERIES_FILE)).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("t,E,E_grad,E_kin,E_pot,I_t,decay_ratio,Q0,Q1,exterior_E_at_R=1"));
        let back: RunManifest =
            serde_json::from_str(&fs::read_to_string(a.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(back.schema_version, SCHEMA_VERSION);
        assert_eq!(back.config, cfg);
        let report: Report = toml::from_str(&fs::read_to_string(a.path().join(REPORT_FILE)).unwrap()).unwrap();
        assert_eq!(report, out.report);
    }

    #[test]
    fn conformal_window_statistics() {
        // Q = -t^2 with rate -2t: exact centred differences.
        let charge: Vec<_> = (0..=20).map(|k| {
            let t = k as f64 * 0.5;
            (t, -t * t, -2.0 * t)
        }).collect();
        let c = conformal_report(&charge, [1.0, 9.0]).unwrap();
        assert!(c.max_relative_residual < 1e-12);
        assert!(c.max_increase < 0.0);
        assert_eq!(c.samples, 17);
        assert!(conformal_report(&charge, [20.0, 30.0]).is_none());
    }
}
