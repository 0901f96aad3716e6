//! Free-wave profile extraction: pull snapshots of a nonlinear solution back
//! to `t = 0` with the free propagator and measure how far apart the
//! candidates are in `Ḣ^1 × L^2`.

use crate::error::{CoreError, Result};
use crate::linear_prop::{energy_norm, FreePropagator};
use crate::state::RadialState;

/// Fraction of the grid, at the outer end, that must stay quiet in every
/// snapshot.
const EDGE_FRACTION: f64 = 0.02;
/// Edge amplitude, relative to the snapshot's largest value, above which a
/// snapshot counts as contaminated by the outer boundary.
const EDGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ScatterRecord {
    pub times: Vec<f64>,
    /// `S_L(-T_k) (w, w_t)(T_k)`
    pub candidates: Vec<RadialState>,
    /// `δ(j, k) = ‖candidate_j - candidate_k‖_{Ḣ^1 × L^2}`
    pub cauchy: Vec<Vec<f64>>,
}

impl ScatterRecord {
    /// `δ(T_k, T_{k+1})` for consecutive extraction times.
    pub fn consecutive(&self) -> Vec<f64> {
        (0..self.times.len().saturating_sub(1))
            .map(|k| self.cauchy[k][k + 1])
            .collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.consecutive().windows(2).all(|w| w[1] < w[0])
    }
}

fn edge_amplitude(state: &RadialState) -> (f64, f64) {
    let n = state.len();
    let start = n - ((n as f64 * EDGE_FRACTION).ceil() as usize).max(2);
    let max_all = state
        .w
        .iter()
        .chain(&state.v)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let max_edge = state.w[start..]
        .iter()
        .chain(&state.v[start..])
        .fold(0.0f64, |m, x| m.max(x.abs()));
    (max_edge, max_all)
}

/// Pulls every snapshot back to time zero and tabulates pairwise
/// differences. Snapshots must be in increasing time order and clear of the
/// outer boundary.
pub fn scatter_extract(snapshots: &[RadialState], propagator: &dyn FreePropagator) -> Result<ScatterRecord> {
    if snapshots.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(CoreError::InvalidArgument(
            "snapshot times must be strictly increasing".into(),
        ));
    }
    let mut candidates = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let (edge, scale) = edge_amplitude(snap);
        if edge > EDGE_TOLERANCE * scale {
            return Err(CoreError::BoundaryContaminated { t: snap.t, edge });
        }
        let mut pulled = propagator.propagate(snap, -snap.t)?;
        pulled.t = 0.0;
        candidates.push(pulled);
    }
    let m = candidates.len();
    let mut cauchy = vec![vec![0.0; m]; m];
    for j in 0..m {
        for k in j + 1..m {
            let d = energy_norm(&candidates[j].difference(&candidates[k])?);
            cauchy[j][k] = d;
            cauchy[k][j] = d;
        }
    }
    Ok(ScatterRecord {
        times: snapshots.iter().map(|s| s.t).collect(),
        candidates,
        cauchy,
    })
}
