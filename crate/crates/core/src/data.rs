//! Radial initial-data families.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::params::{ModelParams, WeightKind};
use crate::state::RadialState;

/// Exponent of the polynomial bump `(1 - x^2)^BUMP_POWER`; the bump is
/// `C^{BUMP_POWER - 1}` across the edge of its support.
const BUMP_POWER: i32 = 6;

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - x * x).powi(BUMP_POWER)
    }
}

fn bump_prime(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        -2.0 * BUMP_POWER as f64 * x * (1.0 - x * x).powi(BUMP_POWER - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataFamily {
    /// `u_0 = A e^{-(r/a)^2}`, `u_1 = 0`.
    GaussianBump { amplitude: f64, scale: f64 },
    /// `u_0 = A (1 - (r/a)^2)^6` for `r < a`, zero beyond; `u_1 = 0`.
    CompactBump { amplitude: f64, radius: f64 },
    /// `u_0 = A (1 + (r/a)^2)^{-γ/2}`, `u_1 = 0`.
    PowerTail {
        amplitude: f64,
        scale: f64,
        tail_exponent: f64,
    },
    /// Purely outgoing free wave: `w_0 = φ(r)`, `w_t = -φ'(r)` with
    /// `φ(x) = A (1 - ((x - c)/h)^2)^6` supported in `[c - h, c + h]`.
    OutgoingWave {
        amplitude: f64,
        center: f64,
        half_width: f64,
    },
    Zero,
}

impl DataFamily {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DataFamily::GaussianBump { .. } => "gaussian",
            DataFamily::CompactBump { .. } => "compact",
            DataFamily::PowerTail { .. } => "power_tail",
            DataFamily::OutgoingWave { .. } => "outgoing",
            DataFamily::Zero => "zero",
        }
    }

    /// Checks shape parameters and, for power tails, finiteness of the
    /// κ-weighted energy.
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(CoreError::InadmissibleData(format!(
                    "{name} must be finite and positive, got {x}"
                )))
            }
        };
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(CoreError::InadmissibleData(format!("{name} must be finite, got {x}")))
            }
        };
        match *self {
            DataFamily::GaussianBump { amplitude, scale } => {
                finite("amplitude", amplitude)?;
                positive("scale", scale)
            }
            DataFamily::CompactBump { amplitude, radius } => {
                finite("amplitude", amplitude)?;
                positive("radius", radius)
            }
            DataFamily::PowerTail {
                amplitude,
                scale,
                tail_exponent,
            } => {
                finite("amplitude", amplitude)?;
                positive("scale", scale)?;
                positive("tail exponent", tail_exponent)?;
                let kappa = params.kappa();
                let p = params.p();
                // |∇u_0|^2 r^κ r^2 ~ r^{κ - 2γ}; |u_0|^{p+1} r^κ r^2 ~ r^{κ + 2 - (p+1)γ}.
                if 2.0 * tail_exponent <= kappa + 1.0 {
                    return Err(CoreError::InadmissibleData(format!(
                        "power tail gamma = {tail_exponent} violates 2*gamma > kappa + 1 \
                         ({} <= {}): kappa-weighted gradient energy diverges",
                        2.0 * tail_exponent,
                        kappa + 1.0
                    )));
                }
                if (p + 1.0) * tail_exponent <= kappa + 3.0 {
                    return Err(CoreError::InadmissibleData(format!(
                        "power tail gamma = {tail_exponent} violates (p+1)*gamma > kappa + 3 \
                         ({} <= {}): kappa-weighted potential energy diverges",
                        (p + 1.0) * tail_exponent,
                        kappa + 3.0
                    )));
                }
                Ok(())
            }
            DataFamily::OutgoingWave {
                amplitude,
                center,
                half_width,
            } => {
                finite("amplitude", amplitude)?;
                positive("half width", half_width)?;
                if !(center - half_width > 0.0) {
                    return Err(CoreError::InadmissibleData(format!(
                        "outgoing profile must be supported away from the origin: \
                         center {center} - half width {half_width} <= 0"
                    )));
                }
                Ok(())
            }
            DataFamily::Zero => Ok(()),
        }
    }

    /// Radius beyond which the data vanish (or fall below double-precision
    /// relevance for Gaussians). `None` for algebraic tails.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            // e^{-x^2} < 1e-16 for x > 6.07
            DataFamily::GaussianBump { scale, .. } => Some(6.1 * scale),
            DataFamily::CompactBump { radius, .. } => Some(radius),
            DataFamily::PowerTail { .. } => None,
            DataFamily::OutgoingWave {
                center, half_width, ..
            } => Some(center + half_width),
            DataFamily::Zero => Some(0.0),
        }
    }

    /// `u_0(r)`; for the outgoing wave this is `φ(r)/r` away from the origin.
    pub fn u0(&self, r: f64) -> f64 {
        match *self {
            DataFamily::GaussianBump { amplitude, scale } => amplitude * (-(r / scale).powi(2)).exp(),
            DataFamily::CompactBump { amplitude, radius } => amplitude * bump(r / radius),
            DataFamily::PowerTail {
                amplitude,
                scale,
                tail_exponent,
            } => amplitude * (1.0 + (r / scale).powi(2)).powf(-0.5 * tail_exponent),
            DataFamily::OutgoingWave { .. } => {
                if r > 0.0 {
                    self.w0(r) / r
                } else {
                    0.0
                }
            }
            DataFamily::Zero => 0.0,
        }
    }

    /// `∂_r u_0(r)`.
    pub fn u0_prime(&self, r: f64) -> f64 {
        match *self {
            DataFamily::GaussianBump { amplitude, scale } => {
                let x = r / scale;
                -2.0 * amplitude * x / scale * (-x * x).exp()
            }
            DataFamily::CompactBump { amplitude, radius } => amplitude * bump_prime(r / radius) / radius,
            DataFamily::PowerTail {
                amplitude,
                scale,
                tail_exponent,
            } => {
                let x = r / scale;
                -amplitude * tail_exponent * x / scale * (1.0 + x * x).powf(-0.5 * tail_exponent - 1.0)
            }
            DataFamily::OutgoingWave {
                amplitude,
                center,
                half_width,
            } => {
                if r > 0.0 {
                    let phi = self.w0(r);
                    let dphi = amplitude * bump_prime((r - center) / half_width) / half_width;
                    (dphi * r - phi) / (r * r)
                } else {
                    0.0
                }
            }
            DataFamily::Zero => 0.0,
        }
    }

    /// `u_1(r)`.
    pub fn u1(&self, r: f64) -> f64 {
        match *self {
            DataFamily::OutgoingWave { .. } if r > 0.0 => self.v0(r) / r,
            _ => 0.0,
        }
    }

    /// `w_0(r) = r·u_0(r)`.
    pub fn w0(&self, r: f64) -> f64 {
        match *self {
            DataFamily::OutgoingWave {
                amplitude,
                center,
                half_width,
            } => amplitude * bump((r - center) / half_width),
            _ => r * self.u0(r),
        }
    }

    /// `w_1(r) = r·u_1(r)`.
    pub fn v0(&self, r: f64) -> f64 {
        match *self {
            DataFamily::OutgoingWave {
                amplitude,
                center,
                half_width,
            } => -amplitude * bump_prime((r - center) / half_width) / half_width,
            _ => 0.0,
        }
    }

    /// κ-weighted energy of the data beyond `r_max`, i.e. the part a grid on
    /// `[0, r_max]` discards.
    pub fn discarded_tail(&self, r_max: f64, params: &ModelParams) -> f64 {
        if let Some(support) = self.support_radius() {
            if support <= r_max {
                return 0.0;
            }
        }
        let p = params.p();
        let kappa = params.kappa();
        let offset = params.weight_kind().offset();
        let density = |r: f64| {
            let ur = self.u0_prime(r);
            let ut = self.u1(r);
            let u = self.u0(r);
            let e = 0.5 * ur * ur + 0.5 * ut * ut + u.abs().powf(p + 1.0) / (p + 1.0);
            let weight = match params.weight_kind() {
                WeightKind::PowR => r.powf(kappa),
                WeightKind::PowOnePlusR => (offset + r).powf(kappa),
            };
            4.0 * PI * weight * e * r * r
        };
        // r = r_max e^x, dr = r dx; the integrand decays exponentially in x
        // for admissible tails.
        let steps = 20_000;
        let x_end = 80.0;
        let h = x_end / steps as f64;
        (0..=steps)
            .map(|k| {
                let x = k as f64 * h;
                let r = r_max * x.exp();
                let wgt = if k == 0 || k == steps { 0.5 } else { 1.0 };
                wgt * density(r) * r * h
            })
            .sum()
    }
}

/// Samples `(w, w_t) = (r u_0, r u_1)` on the grid at `t = 0`. The last node
/// is set to zero, as the hard-zero outer boundary requires; for data not
/// supported inside the grid this is part of the truncation reported by
/// [`DataFamily::discarded_tail`].
pub fn sample_data(family: &DataFamily, grid: Arc<Grid>, params: &ModelParams) -> Result<RadialState> {
    family.validate(params)?;
    let mut w: Vec<f64> = grid.nodes().iter().map(|&r| family.w0(r)).collect();
    let mut v: Vec<f64> = grid.nodes().iter().map(|&r| family.v0(r)).collect();
    let n = w.len();
    w[n - 1] = 0.0;
    v[n - 1] = 0.0;
    RadialState::new(grid, w, v, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kappa: f64) -> ModelParams {
        ModelParams::new(4.0, kappa, WeightKind::PowR).unwrap()
    }

    #[test]
    fn gaussian_samples() {
        let g = Arc::new(Grid::new(40.0, 4001).unwrap());
        let fam = DataFamily::GaussianBump {
            amplitude: 1.0,
            scale: 1.0,
        };
        let s = sample_data(&fam, Arc::clone(&g), &params(0.5)).unwrap();
        assert_eq!(s.t, 0.0);
        assert_eq!(s.w[0], 0.0);
        for (j, &r) in g.nodes().iter().enumerate() {
            assert_eq!(s.w[j], r * (-r * r).exp());
            assert_eq!(s.v[j], 0.0);
        }
        let u = s.u();
        for j in 1..g.len() {
            assert!((u[j] - (-g.nodes()[j].powi(2)).exp()).abs() <= 1e-15);
        }
    }

    #[test]
    fn compact_support() {
        let g = Arc::new(Grid::new(40.0, 4001).unwrap());
        let fam = DataFamily::CompactBump {
            amplitude: 1.0,
            radius: 2.0,
        };
        let s = sample_data(&fam, Arc::clone(&g), &params(0.5)).unwrap();
        for (j, &r) in g.nodes().iter().enumerate() {
            if r >= 2.0 {
                assert_eq!(s.w[j], 0.0);
            }
        }
        assert!(s.w[100] > 0.0);
    }

    #[test]
    fn outgoing_profile() {
        let g = Arc::new(Grid::new(10.0, 1001).unwrap());
        let fam = DataFamily::OutgoingWave {
            amplitude: 1.0,
            center: 2.5,
            half_width: 0.5,
        };
        let s = sample_data(&fam, Arc::clone(&g), &params(0.5)).unwrap();
        for (j, &r) in g.nodes().iter().enumerate() {
            if !(2.0..=3.0).contains(&r) {
                assert_eq!(s.w[j], 0.0);
                assert_eq!(s.v[j], 0.0);
            }
        }
        // v = -φ'.
        let h = 1e-6;
        for r in [2.1, 2.4, 2.77] {
            let fd = (fam.w0(r + h) - fam.w0(r - h)) / (2.0 * h);
            assert!((fam.v0(r) + fd).abs() < 1e-6);
        }
        let bad = DataFamily::OutgoingWave {
            amplitude: 1.0,
            center: 0.4,
            half_width: 0.5,
        };
        assert!(bad.validate(&params(0.5)).is_err());
    }

    #[test]
    fn power_tail_admissibility() {
        let tail = |gamma| DataFamily::PowerTail {
            amplitude: 1.0,
            scale: 1.0,
            tail_exponent: gamma,
        };
        assert!(tail(2.5).validate(&params(0.8)).is_ok());
        let err = tail(0.85).validate(&params(0.8)).unwrap_err();
        assert!(err.to_string().contains("2*gamma > kappa + 1"), "{err}");
        // gradient fine but potential diverges: (p+1)γ = 5γ <= κ + 3
        let err = tail(0.61).validate(&params(0.2)).unwrap_err();
        assert!(err.to_string().contains("(p+1)*gamma > kappa + 3"), "{err}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fams = [
            DataFamily::GaussianBump {
                amplitude: 1.3,
                scale: 0.7,
            },
            DataFamily::CompactBump {
                amplitude: 0.5,
                radius: 2.0,
            },
            DataFamily::PowerTail {
                amplitude: 1.0,
                scale: 1.5,
                tail_exponent: 2.5,
            },
            DataFamily::OutgoingWave {
                amplitude: 1.0,
                center: 2.5,
                half_width: 0.5,
            },
        ];
        let h = 1e-6;
        for fam in fams {
            for &r in &[0.3, 1.1, 2.3, 2.7] {
                let fd = (fam.u0(r + h) - fam.u0(r - h)) / (2.0 * h);
                assert!((fd - fam.u0_prime(r)).abs() < 1e-6, "{fam:?} at {r}");
            }
        }
    }

    #[test]
    fn discarded_tail_matches_power_law() {
        // u_0 = (1 + r^2)^{-γ/2} with γ = 3, κ = 0: the tail integrand is
        // dominated by the gradient, ~ 4π·½γ^2 r^{-2γ-2}·r^2 = 2πγ^2 r^{-6},
        // whose integral from R is 2πγ^2 R^{-5}/5.
        let fam = DataFamily::PowerTail {
            amplitude: 1.0,
            scale: 1.0,
            tail_exponent: 3.0,
        };
        let r_max = 200.0;
        let tail = fam.discarded_tail(r_max, &params(0.0));
        let approx = 2.0 * PI * 9.0 * r_max.powi(-5) / 5.0;
        assert!((tail / approx - 1.0).abs() < 1e-3, "{tail} vs {approx}");
        let compact = DataFamily::CompactBump {
            amplitude: 1.0,
            radius: 2.0,
        };
        assert_eq!(compact.discarded_tail(40.0, &params(0.5)), 0.0);
    }
}
