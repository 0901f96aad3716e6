//! Independent runs in parallel, merged into one comparison table.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::run::{execute, RunOutput};

pub const SWEEP_FILE: &str = "sweep.csv";

/// A sweep file: base keys in `[base]`, one `[[runs]]` table of overrides
/// per run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    #[serde(default)]
    base: toml::Table,
    runs: Vec<toml::Table>,
}

pub fn load_sweep(path: &Path, base: &RunConfig) -> Result<Vec<RunConfig>> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_sweep(&text, base).map_err(|e| match e {
        LabError::Config(message) => LabError::Parse {
            path: path.into(),
            message,
        },
        other => other,
    })
}

pub fn parse_sweep(text: &str, base: &RunConfig) -> Result<Vec<RunConfig>> {
    let file: SweepFile = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
    let base = base.merged(&file.base)?;
    file.runs.iter().map(|r| base.merged(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub preset: String,
    pub data: String,
    pub p: f64,
    pub kappa: f64,
    pub tail_exponent: f64,
    pub kappa_critical: f64,
    pub kappa_critical_exact: String,
    pub critical_regularity: f64,
    pub critical_regularity_exact: String,
    pub energy: Option<f64>,
    pub initial_weighted_energy: Option<f64>,
    pub decay_slope: Option<f64>,
    pub decay_max_scaled: Option<f64>,
    pub l2p2_last_window_fraction: Option<f64>,
    pub lemma_sup_ratio: Option<f64>,
    pub morawetz_ok: Option<bool>,
    pub key_estimate_ok: Option<bool>,
    /// Empty on success.
    pub error: String,
}

impl SweepRow {
    fn new(index: usize, cfg: &RunConfig, outcome: &Result<RunOutput>) -> Self {
        let params = cfg.params().ok();
        let exact = |f: fn(&morawetz_core::ModelParams) -> Option<num_rational::Ratio<i64>>| {
            params.as_ref().and_then(f).map(|r| r.to_string()).unwrap_or_default()
        };
        let ok = outcome.as_ref().ok().map(|o| &o.report);
        SweepRow {
            index,
            preset: cfg.preset.clone(),
            data: cfg.data.clone(),
            p: cfg.p,
            kappa: cfg.kappa,
            tail_exponent: cfg.tail_exponent,
            kappa_critical: params.map_or(f64::NAN, |p| p.kappa_critical()),
            kappa_critical_exact: exact(|p| p.kappa_critical_rational()),
            critical_regularity: params.map_or(f64::NAN, |p| p.critical_regularity()),
            critical_regularity_exact: exact(|p| p.critical_regularity_rational()),
            energy: ok.map(|r| r.energy.initial),
            initial_weighted_energy: ok.map(|r| r.escaping.initial),
            decay_slope: ok.and_then(|r| r.decay.as_ref().map(|d| d.slope)),
            decay_max_scaled: ok.and_then(|r| r.decay.as_ref().map(|d| d.max_scaled)),
            l2p2_last_window_fraction: ok.map(|r| r.l2p2.last_window_fraction),
            lemma_sup_ratio: ok.map(|r| r.decay_lemma.sup_ratio),
            morawetz_ok: ok.map(|r| r.morawetz_ok()),
            key_estimate_ok: ok.map(|r| r.key_estimate_ok()),
            error: outcome.as_ref().err().map(|e| e.to_string()).unwrap_or_default(),
        }
    }
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub outputs: Vec<Result<RunOutput>>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.outputs.iter().filter(|o| o.is_err()).count()
    }

    /// Writes the comparison table and every successful run into
    /// `dir/run_<k>`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        for (k, out) in self.outputs.iter().enumerate() {
            if let Ok(out) = out {
                out.write(&dir.join(format!("run_{k}")))?;
            }
        }
        let path = dir.join(SWEEP_FILE);
        let mut w = csv::Writer::from_path(&path).map_err(|e| LabError::Serialize(e.to_string()))?;
        for row in &self.rows {
            w.serialize(row).map_err(|e| LabError::Serialize(e.to_string()))?;
        }
        w.flush().map_err(|e| LabError::io(&path, e))?;
        Ok(path)
    }
}

/// Runs every config; a failing run is recorded in its row and does not
/// stop the others.
pub fn sweep(configs: &[RunConfig]) -> SweepResult {
    let outputs: Vec<Result<RunOutput>> = configs.par_iter().map(execute).collect();
    let rows = configs
        .iter()
        .zip(&outputs)
        .enumerate()
        .map(|(k, (cfg, out))| SweepRow::new(k, cfg, out))
        .collect();
    SweepResult { rows, outputs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn sweep_file_layers_overrides() {
        let text = "[base]\ndata = \"zero\"\nn = 201\nr_max = 10.0\nt_max = 2.0\nradii = [1.0]\n\n[[runs]]\np = 3.2\n\n[[runs]]\np = 4.8\n";
        let cfgs = parse_sweep(text, &RunConfig::default()).unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[0].p, 3.2);
        assert_eq!(cfgs[1].p, 4.8);
        assert!(cfgs.iter().all(|c| c.n == 201 && c.data == "zero"));
        assert!(parse_sweep("[[runs]]\nbogus = 1\n", &RunConfig::default()).is_err());
    }

    #[test]
    fn errors_are_isolated_and_rationals_exact() {
        let good = preset("zero").unwrap();
        let bad = RunConfig { p: 6.0, ..good.clone() };
        let res = sweep(&[good, bad]);
        assert_eq!(res.failures(), 1);
        assert!(res.rows[0].error.is_empty());
        assert_eq!(res.rows[0].kappa_critical_exact, "3/7");
        assert_eq!(res.rows[0].critical_regularity_exact, "5/6");
        assert!(res.rows[1].error.contains("p"), "{}", res.rows[1].error);
        assert!(res.rows[1].energy.is_none());
    }

    #[test]
    fn single_run_sweep_matches_run() {
        let cfg = preset("zero").unwrap();
        let res = sweep(std::slice::from_ref(&cfg));
        let direct = execute(&cfg).unwrap();
        assert_eq!(res.outputs[0].as_ref().unwrap().report, direct.report);
        let dir = tempfile::tempdir().unwrap();
        let path = res.write(dir.path()).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.lines().next().unwrap().contains("kappa_critical_exact"));
        assert!(dir.path().join("run_0").join("manifest.json").exists());
    }
}
