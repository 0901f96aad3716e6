//! Uniform radial mesh on `[0, r_max]` and the quadratures built on it.
//!
//! Every integral over R^3 of a radial quantity is reduced to
//! `4π ∫_0^{r_max} f(r) r^2 dr`; the grid itself only knows about the 1D
//! integral and leaves the `4π` and the measure to the caller.

use std::f64::consts::PI;

use crate::error::{CoreError, Result};

/// Smallest node count accepted by [`Grid::new`].
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    r_max: f64,
    dr: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Uniform grid with `n` nodes `r_j = j·dr`, `dr = r_max/(n-1)`, and
    /// composite-trapezoid weights.
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(CoreError::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(CoreError::InvalidGrid(format!(
                "r_max must be finite and positive, got {r_max}"
            )));
        }
        let dr = r_max / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|j| j as f64 * dr).collect();
        nodes[n - 1] = r_max;
        let mut weights = vec![dr; n];
        weights[0] = 0.5 * dr;
        weights[n - 1] = 0.5 * dr;
        Ok(Self {
            r_max,
            dr,
            nodes,
            weights,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same extent, `factor` times finer spacing.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.r_max, (self.len() - 1) * factor + 1)
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(CoreError::LengthMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(())
    }

    /// Trapezoid approximation of `∫_0^{r_max} values(r) dr`.
    ///
    /// Panics on a length mismatch; the checked entry point is [`quad`].
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len(), "values must live on this grid");
        values
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| f * w)
            .sum()
    }

    /// Trapezoid approximation of `∫_0^{r_max} values(r) g(r) dr`.
    pub fn integrate_weighted(&self, values: &[f64], weight: impl Fn(f64) -> f64) -> f64 {
        assert_eq!(values.len(), self.len(), "values must live on this grid");
        values
            .iter()
            .zip(&self.weights)
            .zip(&self.nodes)
            .map(|((f, w), &r)| f * weight(r) * w)
            .sum()
    }

    /// Cell index `j` with `r_j <= r < r_{j+1}`, clamped to the last cell.
    fn cell_of(&self, r: f64) -> usize {
        let j = (r / self.dr).floor();
        if j <= 0.0 {
            0
        } else {
            (j as usize).min(self.len() - 2)
        }
    }

    /// Piecewise-linear interpolant of nodal `values` evaluated at `r`.
    /// Zero outside `[0, r_max]`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        if !(0.0..=self.r_max).contains(&r) {
            return 0.0;
        }
        let x = r / self.dr;
        let nearest = x.round();
        if (x - nearest).abs() < 1e-9 {
            return values[nearest as usize];
        }
        let j = self.cell_of(r);
        let theta = (r - self.nodes[j]) / self.dr;
        values[j] + theta * (values[j + 1] - values[j])
    }

    /// Exact integral of the piecewise-linear interpolant over `[a, b]`,
    /// with both ends clamped to `[0, r_max]`.
    pub fn integrate_between(&self, values: &[f64], a: f64, b: f64) -> f64 {
        assert_eq!(values.len(), self.len(), "values must live on this grid");
        let a = a.clamp(0.0, self.r_max);
        let b = b.clamp(0.0, self.r_max);
        if b <= a {
            return 0.0;
        }
        let ja = self.cell_of(a);
        let jb = self.cell_of(b);
        if ja == jb {
            let fa = self.interpolate(values, a);
            let fb = self.interpolate(values, b);
            return 0.5 * (fa + fb) * (b - a);
        }
        let fa = self.interpolate(values, a);
        let mut total = 0.5 * (fa + values[ja + 1]) * (self.nodes[ja + 1] - a);
        for j in ja + 1..jb {
            total += 0.5 * (values[j] + values[j + 1]) * self.dr;
        }
        let fb = self.interpolate(values, b);
        total += 0.5 * (values[jb] + fb) * (b - self.nodes[jb]);
        total
    }

    /// `∫_cut^{r_max} L(r) dr` for the piecewise-linear interpolant `L`.
    pub fn integrate_from(&self, values: &[f64], cut: f64) -> f64 {
        self.integrate_between(values, cut, self.r_max)
    }

    /// `∫_cut^{r_max} L(r) (r - cut + offset)^kappa dr` with the power weight
    /// integrated exactly against the piecewise-linear interpolant `L`.
    ///
    /// The result is a smooth function of `cut` even when `kappa < 1`, which
    /// node-sampled weights are not.
    pub fn integrate_shifted_power(&self, values: &[f64], cut: f64, offset: f64, kappa: f64) -> f64 {
        if kappa == 0.0 {
            return self.integrate_from(values, cut);
        }
        assert_eq!(values.len(), self.len(), "values must live on this grid");
        let cut = cut.clamp(0.0, self.r_max);
        if cut >= self.r_max {
            return 0.0;
        }
        let k1 = kappa + 1.0;
        let k2 = kappa + 2.0;
        let shift = offset - cut;
        // Moments of (r + shift)^kappa over each sub-interval on which L is
        // linear; the endpoint powers are shared by neighbouring cells.
        let point = |r: f64| {
            let s = r + shift;
            let p1 = s.powf(k1);
            (s, p1, p1 * s)
        };
        let j0 = self.cell_of(cut);
        let mut prev = (cut, self.interpolate(values, cut), point(cut));
        let mut total = 0.0;
        for j in j0 + 1..self.len() {
            let (b, fb) = (self.nodes[j], values[j]);
            let (a, fa, pa) = prev;
            if b <= a {
                continue;
            }
            let pb = point(b);
            let m0 = (pb.1 - pa.1) / k1;
            let m1 = (pb.2 - pa.2) / k2;
            let slope = (fb - fa) / (b - a);
            total += fa * m0 + slope * (m1 - pa.0 * m0);
            prev = (b, fb, pb);
        }
        total
    }

    /// Nodal derivative: central differences in the interior, one-sided
    /// second-order stencils at both ends.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.len(), "values must live on this grid");
        let n = self.len();
        let h2 = 2.0 * self.dr;
        let mut d = vec![0.0; n];
        d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / h2;
        for j in 1..n - 1 {
            d[j] = (values[j + 1] - values[j - 1]) / h2;
        }
        d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / h2;
        d
    }
}

/// `4π ∫_0^{r_max} values(r) · radial_weight(r) dr` by composite trapezoid.
pub fn quad(values: &[f64], grid: &Grid, radial_weight: impl Fn(f64) -> f64) -> Result<f64> {
    grid.check_len(values)?;
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite {
            what: "quadrature input",
            index,
        });
    }
    Ok(4.0 * PI * grid.integrate_weighted(values, radial_weight))
}

/// Observed order of convergence from errors at successive refinements by
/// `ratio`: `log_ratio(e_k / e_{k+1})`.
pub fn observed_orders(errors: &[f64], ratio: f64) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).ln() / ratio.ln())
        .collect()
}

/// Orders from a sequence of approximations with unknown limit, using
/// consecutive differences (needs three values per order).
pub fn self_convergence_orders(values: &[f64], ratio: f64) -> Vec<f64> {
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    observed_orders(&diffs, ratio)
}
