//! Run configuration: a flat TOML key schema, command-line overrides and
//! validation against the core preconditions.

use std::path::Path;
use std::sync::Arc;

use morawetz_core::{DataFamily, Grid, ModelParams, StepperConfig, WeightKind};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Radii tracked when a config does not list any.
pub const DEFAULT_RADII: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorKind {
    /// The linear stepper on the same grid and CFL number.
    #[default]
    Discrete,
    /// Exact d'Alembert evolution of the piecewise-linear data.
    Dalembert,
}

/// Every key lives at the top level of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub p: f64,
    pub kappa: f64,
    pub weight_kind: String,
    pub r_max: f64,
    pub n: usize,
    pub cfl: f64,
    pub t_max: f64,
    pub nonlinear: bool,
    /// Also run from the data towards `-t_max` and merge the ledgers.
    pub backward: bool,
    pub allow_boundary_reach: bool,
    /// `gaussian`, `compact`, `power_tail`, `outgoing` or `zero`.
    pub data: String,
    pub amplitude: f64,
    pub scale: f64,
    pub radius: f64,
    pub tail_exponent: f64,
    pub center: f64,
    pub half_width: f64,
    /// Empty means the default dyadic radii inside `(0, r_max - t_max)`.
    pub radii: Vec<f64>,
    /// Write every `cadence`-th step to the time series.
    pub cadence: usize,
    /// Forward times at which the solution is pulled back to `t = 0`.
    pub snapshot_times: Vec<f64>,
    pub propagator: PropagatorKind,
    /// Compare the final forward state with the exact free evolution.
    pub oracle: bool,
    /// Window `[lo, hi]` of forward times for the conformal-charge check.
    pub conformal_window: [f64; 2],
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: "custom".into(),
            p: 4.0,
            kappa: 3.0 / 7.0,
            weight_kind: WeightKind::PowR.name().into(),
            r_max: 40.0,
            n: 4001,
            cfl: 0.5,
            t_max: 20.0,
            nonlinear: true,
            backward: true,
            allow_boundary_reach: false,
            data: "gaussian".into(),
            amplitude: 1.0,
            scale: 1.0,
            radius: 2.0,
            tail_exponent: 3.0,
            center: 10.0,
            half_width: 2.0,
            radii: Vec::new(),
            cadence: 10,
            snapshot_times: Vec::new(),
            propagator: PropagatorKind::Discrete,
            oracle: false,
            conformal_window: [1.0, 10.0],
            out_dir: "out".into(),
        }
    }
}

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_value(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    }
}

/// Splits `KEY=VALUE`.
pub fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| LabError::Config(format!("override `{s}` is not of the form KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(LabError::Config(format!("override `{s}` has an empty key")));
    }
    Ok((key.to_string(), parse_value(value.trim())))
}

impl RunConfig {
    fn to_table(&self) -> Result<toml::Table> {
        toml::Table::try_from(self).map_err(|e| LabError::Serialize(e.to_string()))
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
            LabError::Config(e.message().to_string())
        })
    }

    /// Layers the keys of `table` over `self`.
    pub fn merged(&self, table: &toml::Table) -> Result<Self> {
        let mut base = self.to_table()?;
        for (k, v) in table {
            base.insert(k.clone(), v.clone());
        }
        Self::from_table(base)
    }

    pub fn with_overrides(&self, overrides: &[(String, toml::Value)]) -> Result<Self> {
        let table: toml::Table = overrides.iter().cloned().collect();
        self.merged(&table)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        Self::default().merged(&table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Parse {
            path: path.into(),
            message: e.to_string(),
        })?;
        Self::default().merged(&table)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Serialize(e.to_string()))
    }

    pub fn params(&self) -> Result<ModelParams> {
        let kind = WeightKind::parse(&self.weight_kind).ok_or_else(|| LabError::ConfigKey {
            key: "weight_kind".into(),
            message: format!("expected pow_r or pow_one_plus_r, got `{}`", self.weight_kind),
        })?;
        Ok(ModelParams::new(self.p, self.kappa, kind)?)
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.r_max, self.n)?))
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        let cfg = StepperConfig::new(self.cfl)?.with_boundary_reach(self.allow_boundary_reach);
        Ok(if self.nonlinear { cfg } else { cfg.linear() })
    }

    pub fn family(&self) -> Result<DataFamily> {
        Ok(match self.data.as_str() {
            "gaussian" => DataFamily::GaussianBump {
                amplitude: self.amplitude,
                scale: self.scale,
            },
            "compact" => DataFamily::CompactBump {
                amplitude: self.amplitude,
                radius: self.radius,
            },
            "power_tail" => DataFamily::PowerTail {
                amplitude: self.amplitude,
                scale: self.scale,
                tail_exponent: self.tail_exponent,
            },
            "outgoing" => DataFamily::OutgoingWave {
                amplitude: self.amplitude,
                center: self.center,
                half_width: self.half_width,
            },
            "zero" => DataFamily::Zero,
            other => {
                return Err(LabError::ConfigKey {
                    key: "data".into(),
                    message: format!("unknown data family `{other}`"),
                })
            }
        })
    }

    /// Tracked radii after applying the default.
    pub fn resolved_radii(&self) -> Vec<f64> {
        if self.radii.is_empty() {
            let limit = self.r_max - self.t_max;
            DEFAULT_RADII.iter().copied().filter(|&r| r < limit).collect()
        } else {
            self.radii.clone()
        }
    }

    /// Checks every precondition before any compute starts.
    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        self.grid()?;
        self.stepper()?;
        let family = self.family()?;
        family.validate(&params)?;
        let key = |key: &str, message: String| LabError::ConfigKey {
            key: key.into(),
            message,
        };
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(key("t_max", format!("must be positive, got {}", self.t_max)));
        }
        if self.cadence == 0 {
            return Err(key("cadence", "must be at least 1".into()));
        }
        if !self.allow_boundary_reach {
            let reach = family.support_radius().map(|s| s + self.t_max);
            match reach {
                Some(r) if r <= self.r_max => {}
                Some(r) => {
                    return Err(key(
                        "t_max",
                        format!(
                            "support plus horizon {r} exceeds r_max = {}; enlarge r_max or set allow_boundary_reach",
                            self.r_max
                        ),
                    ))
                }
                None => {
                    return Err(key(
                        "allow_boundary_reach",
                        format!("`{}` data are not compactly supported; set allow_boundary_reach = true", self.data),
                    ))
                }
            }
        }
        let radii = self.resolved_radii();
        if radii.is_empty() {
            return Err(key("radii", "no tracked radius fits inside (0, r_max - t_max)".into()));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0 && **r < self.r_max)) {
            return Err(key("radii", format!("radius {r} outside (0, r_max)")));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(key("snapshot_times", "must be strictly increasing".into()));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|t| !(t.is_finite() && **t > 0.0 && **t <= self.t_max))
        {
            return Err(key("snapshot_times", format!("{t} outside (0, t_max]")));
        }
        if self.oracle && self.nonlinear {
            return Err(key("oracle", "the free-wave oracle needs nonlinear = false".into()));
        }
        let [lo, hi] = self.conformal_window;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return Err(key("conformal_window", format!("expected 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::default().resolved_radii(), DEFAULT_RADII.to_vec());
    }

    #[test]
    fn flat_keys_and_overrides() {
        let cfg = RunConfig::from_toml_str("p = 3.5\ndata = \"compact\"\nradii = [1.0, 3.0]").unwrap();
        assert_eq!(cfg.p, 3.5);
        assert_eq!(cfg.data, "compact");
        assert_eq!(cfg.radii, vec![1.0, 3.0]);
        let over = [parse_override("n=801").unwrap(), parse_override("data=zero").unwrap()];
        let cfg = cfg.with_overrides(&over).unwrap();
        assert_eq!(cfg.n, 801);
        assert_eq!(cfg.data, "zero");
        assert_eq!(cfg.p, 3.5);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str("q = 1").is_err());
        assert!(parse_override("novalue").is_err());
        assert!(RunConfig::default().with_overrides(&[parse_override("n=\"x\"").unwrap()]).is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            snapshot_times: vec![2.0, 4.0],
            ..RunConfig::default()
        };
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn preconditions_rejected() {
        let bad = |s: &str| {
            let cfg = RunConfig::default().with_overrides(&[parse_override(s).unwrap()]).unwrap();
            cfg.validate().unwrap_err()
        };
        bad("p=5.0");
        bad("cfl=1.5");
        bad("n=10");
        bad("t_max=40.0");
        bad("data=power_tail");
        bad("weight_kind=\"cube\"");
        bad("oracle=true");
        bad("snapshot_times=[4.0, 2.0]");
        bad("radii=[-1.0]");
        let err = RunConfig::default()
            .with_overrides(&[
                parse_override("data=power_tail").unwrap(),
                parse_override("allow_boundary_reach=true").unwrap(),
                parse_override("tail_exponent=0.5").unwrap(),
            ])
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(err.to_string().contains("kappa + 1"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
