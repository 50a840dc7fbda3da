use std::sync::Arc;

use super::grid::RadialGrid;
use crate::error::{config, Error, Result};

/// Real samples of a radial profile `u(r_i)`.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return config(format!("{} samples for a grid of {} nodes", values.len(), grid.n()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return config(format!("non-finite sample at node {i}"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.n()] }
    }

    /// The linear ground mode `e^{-r²/2}`.
    pub fn gaussian(grid: &Arc<RadialGrid>) -> Self {
        Self::from_fn(grid, |r| (-0.5 * r * r).exp())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same grid, new samples. Crate-internal: skips the finiteness scan.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.n());
        Self { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// `Σ w_i f(r_i)`, the discrete `∫ f 2πr dr`.
    pub fn integrate(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Weighted inner product `∫ u v 2πr dr`.
    pub fn dot(&self, other: &RadialField) -> Result<f64> {
        self.check_grid(other)?;
        Ok(weighted_dot(self.grid.weights(), &self.values, &other.values))
    }

    pub fn l2_norm(&self) -> f64 {
        weighted_dot(self.grid.weights(), &self.values, &self.values).sqrt()
    }

    /// `u'(r_i)`.
    pub fn derivative(&self) -> RadialField {
        self.with_values(self.grid.d1.apply(&self.values))
    }

    /// `|u'(r_i)|²`.
    pub fn gradient_sq(&self) -> RadialField {
        self.derivative().map(|d| d * d)
    }

    /// `u'' + u'/r`.
    pub fn laplacian(&self) -> RadialField {
        self.with_values(self.grid.lap.apply(&self.values))
    }

    /// Cubic (four-point Lagrange) interpolation at radius `r`, using the even
    /// reflection at the origin and zero past `r_max`.
    pub fn interpolate(&self, r: f64) -> f64 {
        let g = &self.grid;
        let r = r.abs();
        if r >= g.r_max() {
            return 0.0;
        }
        let n = g.n() as i64;
        let t = r / g.spacing() - 0.5;
        let i = t.floor();
        let s = t - i;
        let i = i as i64;
        let at = |k: i64| -> f64 {
            let k = if k < 0 { -1 - k } else { k };
            if k >= n {
                0.0
            } else {
                self.values[k as usize]
            }
        };
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        w[0] * at(i - 1) + w[1] * at(i) + w[2] * at(i + 1) + w[3] * at(i + 2)
    }

    /// `u_σ(r) = u(r/σ)` resampled on the same grid.
    pub fn dilate(&self, sigma: f64) -> Result<RadialField> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::OutOfDomain(format!("dilation factor must be positive, got {sigma}")));
        }
        if sigma == 1.0 {
            return Ok(self.clone());
        }
        let vals = self.grid.nodes().iter().map(|&r| self.interpolate(r / sigma)).collect();
        Ok(self.with_values(vals))
    }

    /// Radially non-increasing rearrangement of `|u|`.
    ///
    /// Each sample is treated as constant on its cell, of measure `w_i`. The
    /// cells are stacked by decreasing value in order of increasing measure
    /// from the origin, and each grid cell receives the root-mean-square of
    /// what lands on it. The mass `Q` is preserved to roundoff; other `L^p`
    /// powers are preserved exactly on monotone inputs and up to the
    /// within-cell mixing otherwise.
    pub fn decreasing_rearrangement(&self) -> RadialField {
        let w = self.grid.weights();
        let n = w.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.values[b].abs().total_cmp(&self.values[a].abs()));

        let mut out = vec![0.0; n];
        let mut k = 0;
        let mut left = w[order[0]];
        for (j, o) in out.iter_mut().enumerate() {
            let mut need = w[j];
            let mut acc = 0.0;
            while need > 0.0 && k < n {
                let v = self.values[order[k]];
                let take = need.min(left);
                acc += take * v * v;
                need -= take;
                left -= take;
                if left <= 0.0 {
                    k += 1;
                    if k < n {
                        left = w[order[k]];
                    }
                }
            }
            *o = (acc / w[j]).sqrt();
        }
        // Guard against rounding leaving the sequence a hair non-monotone.
        for j in 1..n {
            if out[j] > out[j - 1] {
                out[j] = out[j - 1];
            }
        }
        self.with_values(out)
    }

    pub(crate) fn check_grid(&self, other: &RadialField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

pub(crate) fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, r: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(n, r).unwrap())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn integrates_gaussian_moments() {
        let g = grid(256, 12.0);
        let f = RadialField::from_fn(&g, |r| (-r * r).exp());
        assert!(rel(f.integrate(), PI) < 1e-10);
        let f = RadialField::from_fn(&g, |r| r * r * (-r * r).exp());
        assert!(rel(f.integrate(), PI) < 1e-8);
        assert_eq!(RadialField::zeros(&g).integrate(), 0.0);

        let g = grid(512, 12.0);
        let mut fact = 1.0;
        for k in 0..3 {
            if k > 0 {
                fact *= k as f64;
            }
            let f = RadialField::from_fn(&g, |r| r.powi(2 * k) * (-r * r).exp());
            assert!(rel(f.integrate(), PI * fact) < 1e-8, "k = {k}");
        }
    }

    #[test]
    fn constant_integral() {
        let g = grid(256, 12.0);
        let one = RadialField::from_fn(&g, |_| 1.0);
        assert!(rel(one.integrate(), PI * 144.0) < 1e-12);
    }

    #[test]
    fn gradient_of_gaussian() {
        let g = grid(512, 12.0);
        let u = RadialField::gaussian(&g);
        let d = u.gradient_sq();
        let err = d
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, r)| (v - r * r * (-r * r).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "sup error {err}");
    }

    #[test]
    fn gradient_of_constant_and_ramp() {
        let g = grid(128, 4.0);
        let c = RadialField::from_fn(&g, |_| 3.0);
        assert!(c.gradient_sq().values().iter().all(|v| v.abs() < 1e-20));
        let ramp = RadialField::from_fn(&g, |r| r);
        let d = ramp.gradient_sq();
        // The even reflection turns r into |r|, so only nodes clear of the
        // origin see a true ramp.
        for &v in &d.values()[3..] {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dilation_of_gaussian() {
        let g = grid(512, 12.0);
        let u = RadialField::gaussian(&g);
        assert_eq!(u.dilate(1.0).unwrap().values(), u.values());
        let d = u.dilate(2.0).unwrap();
        let err = d
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, r)| (v - (-r * r / 8.0).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "sup error {err}");
        assert!(u.dilate(0.0).is_err());
        assert!(u.dilate(-1.0).is_err());
    }

    #[test]
    fn rearrangement_fixed_point_and_swap() {
        let g = grid(256, 12.0);
        let u = RadialField::gaussian(&g).scaled(-1.0);
        let v = u.decreasing_rearrangement();
        for (a, b) in v.values().iter().zip(u.values()) {
            assert!((a - b.abs()).abs() < 1e-14);
        }

        let mut vals = RadialField::gaussian(&g).into_values();
        vals.swap(10, 11);
        let s = RadialField::new(g.clone(), vals).unwrap();
        let r = s.decreasing_rearrangement();
        assert!(r.values().windows(2).all(|w| w[0] >= w[1]));
        let q = |f: &RadialField| f.map(|v| v * v).integrate();
        assert!(rel(q(&r), q(&s)) < 1e-10);
    }

    #[test]
    fn interpolation_vanishes_outside() {
        let g = grid(64, 8.0);
        let u = RadialField::from_fn(&g, |_| 1.0);
        assert_eq!(u.interpolate(8.0), 0.0);
        assert_eq!(u.interpolate(20.0), 0.0);
        assert!((u.interpolate(2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = grid(64, 8.0);
        assert!(RadialField::new(g.clone(), vec![0.0; 3]).is_err());
        let mut v = vec![0.0; 64];
        v[5] = f64::NAN;
        assert!(RadialField::new(g, v).is_err());
    }
}
