//! Named experiment configurations.

use crate::config::{PropagatorKind, RunConfig};
use crate::error::{LabError, Result};

pub const PRESETS: [&str; 7] = [
    "morawetz",
    "decay",
    "scatter",
    "conformal",
    "linear-oracle",
    "convergence",
    "zero",
];

pub fn preset(name: &str) -> Result<RunConfig> {
    let base = RunConfig {
        preset: name.to_string(),
        out_dir: format!("out/{name}"),
        ..RunConfig::default()
    };
    let cfg = match name {
        // Gaussian data, two-sided run to |t| = 20.
        "morawetz" => base,
        // Algebraic tail, admissible for every κ < 2; the tail reaches r_max.
        "decay" => RunConfig {
            data: "power_tail".into(),
            tail_exponent: 3.0,
            allow_boundary_reach: true,
            ..base
        },
        // Long forward run on a wider grid, pulled back at dyadic times.
        "scatter" => RunConfig {
            r_max: 50.0,
            n: 5001,
            t_max: 40.0,
            backward: false,
            radii: vec![1.0, 2.0, 4.0, 8.0],
            snapshot_times: vec![2.0, 4.0, 8.0, 16.0],
            cadence: 20,
            ..base
        },
        // The charge's rate is small at late times, so the grid is finer.
        "conformal" => RunConfig {
            r_max: 20.0,
            n: 16001,
            t_max: 10.5,
            backward: false,
            radii: vec![1.0, 2.0, 4.0, 8.0],
            cadence: 40,
            ..base
        },
        "linear-oracle" => RunConfig {
            nonlinear: false,
            oracle: true,
            data: "compact".into(),
            radius: 2.0,
            r_max: 20.0,
            n: 2001,
            t_max: 10.0,
            backward: false,
            radii: vec![1.0, 2.0, 4.0, 8.0],
            propagator: PropagatorKind::Dalembert,
            ..base
        },
        "convergence" => RunConfig {
            data: "compact".into(),
            radius: 2.0,
            r_max: 20.0,
            n: 1001,
            t_max: 5.0,
            backward: false,
            radii: vec![1.0, 2.0, 4.0],
            ..base
        },
        "zero" => RunConfig {
            data: "zero".into(),
            r_max: 20.0,
            n: 401,
            t_max: 5.0,
            radii: vec![1.0, 2.0, 4.0, 8.0],
            ..base
        },
        other => return Err(LabError::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}
