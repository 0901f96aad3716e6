use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::Grid;

/// The pair `(w, w_t)` with `w = r·u`, sampled on a grid at time `t`.
///
/// Node 0 sits at `r = 0` and always carries `w = w_t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    grid: Arc<Grid>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl RadialState {
    pub fn new(grid: Arc<Grid>, w: Vec<f64>, v: Vec<f64>, t: f64) -> Result<Self> {
        for arr in [&w, &v] {
            if arr.len() != grid.len() {
                return Err(CoreError::LengthMismatch {
                    expected: grid.len(),
                    got: arr.len(),
                });
            }
        }
        if let Some(index) = w.iter().position(|x| !x.is_finite()) {
            return Err(CoreError::NonFinite { what: "w", index });
        }
        if let Some(index) = v.iter().position(|x| !x.is_finite()) {
            return Err(CoreError::NonFinite { what: "w_t", index });
        }
        if !t.is_finite() {
            return Err(CoreError::InvalidArgument(format!("time stamp {t} is not finite")));
        }
        let mut state = Self { grid, w, v, t };
        state.w[0] = 0.0;
        state.v[0] = 0.0;
        Ok(state)
    }

    pub fn zeros(grid: Arc<Grid>, t: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            w: vec![0.0; n],
            v: vec![0.0; n],
            t,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `u_j = w_j / r_j` for `j >= 1`; at the origin the limit is taken as
    /// `w_1 / dr`.
    pub fn u(&self) -> Vec<f64> {
        unreduce(&self.w, &self.grid)
    }

    /// `u_t`, recovered from `v = w_t` the same way as [`RadialState::u`].
    pub fn u_t(&self) -> Vec<f64> {
        unreduce(&self.v, &self.grid)
    }

    /// `u_r = (w' r - w)/r^2` for `j >= 1` and `0` at the origin.
    pub fn u_r(&self) -> Vec<f64> {
        let dw = self.grid.derivative(&self.w);
        let mut ur: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .zip(dw.iter().zip(&self.w))
            .map(|(&r, (&d, &w))| if r > 0.0 { (d * r - w) / (r * r) } else { 0.0 })
            .collect();
        ur[0] = 0.0;
        ur
    }

    /// Largest node radius where `|w|` or `|w_t|` exceeds `rel_tol` times
    /// the largest magnitude in the state. Zero for the zero state.
    pub fn support_radius(&self, rel_tol: f64) -> f64 {
        let scale = self
            .w
            .iter()
            .chain(&self.v)
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let thresh = rel_tol * scale;
        (0..self.len())
            .rev()
            .find(|&j| self.w[j].abs() > thresh || self.v[j].abs() > thresh)
            .map(|j| self.grid.nodes()[j])
            .unwrap_or(0.0)
    }

    /// Component-wise `self - other` at `self`'s time stamp.
    pub fn difference(&self, other: &RadialState) -> Result<RadialState> {
        if self.len() != other.len() {
            return Err(CoreError::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let w = self.w.iter().zip(&other.w).map(|(a, b)| a - b).collect();
        let v = self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect();
        Ok(RadialState {
            grid: Arc::clone(&self.grid),
            w,
            v,
            t: self.t,
        })
    }

    pub fn max_abs_w(&self) -> f64 {
        self.w.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn unreduce(w: &[f64], grid: &Grid) -> Vec<f64> {
    let mut u: Vec<f64> = w
        .iter()
        .zip(grid.nodes())
        .map(|(&w, &r)| if r > 0.0 { w / r } else { 0.0 })
        .collect();
    u[0] = w[1] / grid.dr();
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_pins_origin_and_checks_lengths() {
        let g = Arc::new(Grid::new(1.0, 16).unwrap());
        let s = RadialState::new(Arc::clone(&g), vec![1.0; 16], vec![2.0; 16], 0.0).unwrap();
        assert_eq!(s.w[0], 0.0);
        assert_eq!(s.v[0], 0.0);
        assert!(RadialState::new(Arc::clone(&g), vec![1.0; 15], vec![2.0; 16], 0.0).is_err());
        let mut bad = vec![0.0; 16];
        bad[3] = f64::INFINITY;
        assert_eq!(
            RadialState::new(g, bad, vec![0.0; 16], 0.0),
            Err(CoreError::NonFinite { what: "w", index: 3 })
        );
    }

    #[test]
    fn origin_value_is_one_sided_limit() {
        let g = Arc::new(Grid::new(1.0, 101).unwrap());
        let w: Vec<f64> = g.nodes().iter().map(|r| 3.0 * r + r * r * r).collect();
        let s = RadialState::new(Arc::clone(&g), w, vec![0.0; 101], 0.0).unwrap();
        let u = s.u();
        assert!((u[0] - (3.0 + g.dr() * g.dr())).abs() < 1e-12);
        assert!((u[50] - (3.0 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn support_radius_of_compact_state() {
        let g = Arc::new(Grid::new(10.0, 101).unwrap());
        let w: Vec<f64> = g.nodes().iter().map(|&r| if r < 2.05 { r } else { 0.0 }).collect();
        let s = RadialState::new(g, w, vec![0.0; 101], 0.0).unwrap();
        assert!((s.support_radius(0.0) - 2.0).abs() < 1e-12);
    }
}
