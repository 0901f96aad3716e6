//! Refinement studies: the same experiment at `dr, dr/2, dr/4, ...` with the
//! CFL number held fixed, and observed orders between consecutive levels.

use std::fs;
use std::path::Path;

use morawetz_core::grid::{observed_orders, self_convergence_orders};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::run::execute;

pub const CONVERGENCE_FILE: &str = "convergence.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: usize,
    pub dr: f64,
    pub energy_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<f64>,
    pub initial_weighted_energy: f64,
    /// Per radius: interior energy average, sphere trace, interior
    /// potential, exterior Morawetz term.
    pub morawetz_terms: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub quantity: String,
    pub orders: Vec<f64>,
    /// Whether the error (or the successive differences) shrank at every
    /// level; a `false` here flags the study without failing it.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub preset: String,
    pub levels: Vec<LevelRow>,
    pub slopes: Vec<SlopeRow>,
}

impl ConvergenceTable {
    pub fn slope(&self, quantity: &str) -> Option<&SlopeRow> {
        self.slopes.iter().find(|s| s.quantity == quantity)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        let text = toml::to_string(self).map_err(|e| LabError::Serialize(e.to_string()))?;
        let path = dir.join(CONVERGENCE_FILE);
        fs::write(&path, text).map_err(|e| LabError::io(path, e))
    }
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn error_row(quantity: &str, errors: &[f64]) -> SlopeRow {
    SlopeRow {
        quantity: quantity.into(),
        orders: observed_orders(errors, 2.0),
        monotone: decreasing(errors),
    }
}

fn self_row(quantity: &str, values: &[f64]) -> SlopeRow {
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    SlopeRow {
        quantity: quantity.into(),
        orders: self_convergence_orders(values, 2.0),
        monotone: decreasing(&diffs),
    }
}

/// The config at refinement level `k` (spacing divided by `2^k`).
pub fn refined(config: &RunConfig, level: u32) -> RunConfig {
    RunConfig {
        n: (config.n - 1) * 2usize.pow(level) + 1,
        cadence: config.cadence * 2usize.pow(level),
        ..config.clone()
    }
}

pub fn convergence_study(config: &RunConfig, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(LabError::Config(format!("a convergence study needs at least 3 levels, got {levels}")));
    }
    config.validate()?;
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels as u32 {
        let cfg = refined(config, level);
        log::info!("convergence level {level}: n = {}", cfg.n);
        let out = execute(&cfg)?;
        let r = &out.report;
        rows.push(LevelRow {
            n: cfg.n,
            dr: out.initial.grid().dr(),
            energy_drift: r.energy.max_relative_drift,
            oracle_error: r.oracle.as_ref().map(|o| o.max_node_error),
            initial_weighted_energy: r.escaping.initial,
            morawetz_terms: r
                .morawetz
                .iter()
                .map(|m| [m.interior_energy_avg, m.sphere_trace, m.interior_potential, m.exterior_morawetz])
                .collect(),
        });
    }

    let mut slopes = Vec::new();
    let drift: Vec<f64> = rows.iter().map(|r| r.energy_drift).collect();
    slopes.push(error_row("energy_drift", &drift));
    if let Some(errs) = rows.iter().map(|r| r.oracle_error).collect::<Option<Vec<_>>>() {
        slopes.push(error_row("oracle_error", &errs));
    }
    let i0: Vec<f64> = rows.iter().map(|r| r.initial_weighted_energy).collect();
    slopes.push(self_row("initial_weighted_energy", &i0));
    let names = ["interior_energy_avg", "sphere_trace", "interior_potential", "exterior_morawetz"];
    for (j, radius) in config.resolved_radii().iter().enumerate() {
        for (k, name) in names.iter().enumerate() {
            let values: Vec<f64> = rows.iter().map(|r| r.morawetz_terms[j][k]).collect();
            slopes.push(self_row(&format!("{name}(R={radius})"), &values));
        }
    }
    for s in slopes.iter().filter(|s| !s.monotone) {
        log::warn!("{}: non-monotone error sequence, orders {:?}", s.quantity, s.orders);
    }
    Ok(ConvergenceTable {
        preset: config.preset.clone(),
        levels: rows,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn needs_three_levels() {
        assert!(convergence_study(&preset("convergence").unwrap(), 2).is_err());
    }

    #[test]
    fn refinement_keeps_the_domain() {
        let cfg = preset("convergence").unwrap();
        let r = refined(&cfg, 2);
        assert_eq!(r.n, 4001);
        assert_eq!(r.r_max, cfg.r_max);
        assert_eq!(r.cfl, cfg.cfl);
    }

    #[test]
    fn flags_non_monotone() {
        let row = error_row("x", &[1.0, 0.25, 0.5]);
        assert!(!row.monotone);
        assert!((row.orders[0] - 2.0).abs() < 1e-12);
        assert!(self_row("y", &[1.0, 1.5, 1.625]).monotone);
    }
}
