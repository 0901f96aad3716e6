use num_rational::Ratio;

use crate::error::{CoreError, Result};

/// Which spatial weight the escaping-energy functional uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WeightKind {
    /// `(|x| - |t|)^κ` on `|x| > |t|`; at `t = 0` this is `|x|^κ`.
    #[default]
    PowR,
    /// `(1 + |x| - |t|)^κ` on `|x| > |t|`; at `t = 0` this is `(1 + |x|)^κ`.
    PowOnePlusR,
}

impl WeightKind {
    /// Additive offset inside the power.
    pub fn offset(self) -> f64 {
        match self {
            WeightKind::PowR => 0.0,
            WeightKind::PowOnePlusR => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightKind::PowR => "pow_r",
            WeightKind::PowOnePlusR => "pow_one_plus_r",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pow_r" | "PowR" => Some(WeightKind::PowR),
            "pow_one_plus_r" | "PowOnePlusR" => Some(WeightKind::PowOnePlusR),
            _ => None,
        }
    }
}

/// `x ↦ |x|^e`, using repeated multiplication when `e` is a small integer
/// (as it is for the integer exponents `p = 4`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct AbsPow {
    e: f64,
    int: Option<i32>,
}

impl AbsPow {
    pub(crate) fn new(e: f64) -> Self {
        let int = (e.fract() == 0.0 && e.abs() <= 64.0).then_some(e as i32);
        Self { e, int }
    }

    #[inline]
    pub(crate) fn of(&self, x: f64) -> f64 {
        match self.int {
            Some(k) => x.abs().powi(k),
            None => x.abs().powf(self.e),
        }
    }
}

/// Nonlinearity exponent `p`, weight exponent `κ` and weight kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    kappa: f64,
    weight_kind: WeightKind,
}

impl ModelParams {
    pub fn new(p: f64, kappa: f64, weight_kind: WeightKind) -> Result<Self> {
        if !(p > 3.0 && p < 5.0) {
            return Err(CoreError::InvalidParams(format!(
                "p must lie in the open interval (3, 5), got {p}"
            )));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(CoreError::InvalidParams(format!(
                "kappa must be finite and non-negative, got {kappa}"
            )));
        }
        Ok(Self {
            p,
            kappa,
            weight_kind,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn weight_kind(&self) -> WeightKind {
        self.weight_kind
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.p, kappa, self.weight_kind)
    }

    /// Threshold decay rate `κ(p) = 3(5 - p)/(p + 3)`.
    pub fn kappa_critical(&self) -> f64 {
        3.0 * (5.0 - self.p) / (self.p + 3.0)
    }

    /// Set when the weight exponent exceeds `κ(p)`, i.e. the data weight is
    /// strong enough for the scattering theorem to apply.
    pub fn above_threshold(&self) -> bool {
        self.kappa > self.kappa_critical()
    }

    /// Scaling-critical regularity `s_p = 3/2 - 2/(p - 1)`.
    pub fn critical_regularity(&self) -> f64 {
        1.5 - 2.0 / (self.p - 1.0)
    }

    /// `p` as a small-denominator rational, when it is one.
    pub fn p_rational(&self) -> Option<Ratio<i64>> {
        rational_of(self.p)
    }

    pub fn kappa_critical_rational(&self) -> Option<Ratio<i64>> {
        self.p_rational().map(kappa_critical_exact)
    }

    pub fn critical_regularity_rational(&self) -> Option<Ratio<i64>> {
        self.p_rational().map(critical_regularity_exact)
    }
}

/// `3(5 - p)/(p + 3)` in exact arithmetic.
pub fn kappa_critical_exact(p: Ratio<i64>) -> Ratio<i64> {
    let three = Ratio::from_integer(3);
    let five = Ratio::from_integer(5);
    three * (five - p) / (p + three)
}

/// `3/2 - 2/(p - 1)` in exact arithmetic.
pub fn critical_regularity_exact(p: Ratio<i64>) -> Ratio<i64> {
    Ratio::new(3, 2) - Ratio::from_integer(2) / (p - Ratio::from_integer(1))
}

/// Recovers a rational with denominator at most 10^6 that reproduces `x`
/// exactly in double precision.
pub fn rational_of(x: f64) -> Option<Ratio<i64>> {
    if !x.is_finite() {
        return None;
    }
    // Continued-fraction convergents.
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = x;
    for _ in 0..40 {
        let a = rest.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > 1_000_000 {
            return None;
        }
        if h2 as f64 / k2 as f64 == x {
            return Some(Ratio::new(h2, k2));
        }
        let frac = rest - a as f64;
        if frac == 0.0 {
            return None;
        }
        rest = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_pow_paths_agree() {
        for e in [5.0, 6.0, 4.5, 3.2] {
            let f = AbsPow::new(e);
            for x in [-1.3, 0.0, 0.25, 2.0] {
                let want = f64::abs(x).powf(e);
                assert!((f.of(x) - want).abs() <= 1e-14 * want.max(1.0), "{e} {x}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(3.0, 0.5, WeightKind::PowR).is_err());
        assert!(ModelParams::new(5.0, 0.5, WeightKind::PowR).is_err());
        assert!(ModelParams::new(f64::NAN, 0.5, WeightKind::PowR).is_err());
        assert!(ModelParams::new(4.0, -0.1, WeightKind::PowR).is_err());
        assert!(ModelParams::new(4.0, 0.0, WeightKind::PowR).is_ok());
    }

    #[test]
    fn threshold_values() {
        let m = ModelParams::new(4.0, 0.5, WeightKind::PowR).unwrap();
        assert!((m.kappa_critical() - 3.0 / 7.0).abs() < 1e-15);
        assert!((m.critical_regularity() - 5.0 / 6.0).abs() < 1e-15);
        assert!(m.above_threshold());
        assert!(!m.with_kappa(0.4).unwrap().above_threshold());
        assert_eq!(m.kappa_critical_rational(), Some(Ratio::new(3, 7)));
        assert_eq!(m.critical_regularity_rational(), Some(Ratio::new(5, 6)));
    }

    #[test]
    fn rational_threshold_sweep() {
        let expected = [(3.2, Ratio::new(27, 31)), (4.0, Ratio::new(3, 7)), (4.8, Ratio::new(1, 13))];
        for (p, k) in expected {
            let m = ModelParams::new(p, 0.5, WeightKind::PowR).unwrap();
            assert_eq!(m.kappa_critical_rational(), Some(k));
            assert!((m.kappa_critical() - *k.numer() as f64 / *k.denom() as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn rational_recovery() {
        assert_eq!(rational_of(3.2), Some(Ratio::new(16, 5)));
        assert_eq!(rational_of(4.0), Some(Ratio::from_integer(4)));
        assert_eq!(rational_of(3.0 / 7.0), Some(Ratio::new(3, 7)));
        assert_eq!(rational_of(std::f64::consts::PI), None);
    }
}
