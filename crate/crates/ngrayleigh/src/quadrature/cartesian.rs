use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::field::RadialField;
use crate::error::{config, Result};

/// Periodic square box `[-half_width, half_width)²` with `m` points per axis.
#[derive(Debug, Clone)]
pub struct CartesianGrid {
    m: usize,
    half_width: f64,
    spacing: f64,
    coords: Vec<f64>,
    wavenumbers: Vec<f64>,
}

impl CartesianGrid {
    pub fn new(m: usize, half_width: f64) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() {
            return config(format!("points per axis must be a power of two >= 4, got {m}"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return config(format!("box half-width must be positive, got {half_width}"));
        }
        let spacing = 2.0 * half_width / m as f64;
        let coords = (0..m).map(|j| -half_width + j as f64 * spacing).collect();
        let dk = PI / half_width;
        let wavenumbers = (0..m)
            .map(|j| {
                let j = j as i64;
                let j = if j < (m / 2) as i64 { j } else { j - m as i64 };
                j as f64 * dk
            })
            .collect();
        Ok(Self { m, half_width, spacing, coords, wavenumbers })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Per-axis sample positions.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Per-axis angular wavenumbers in transform order `0, 1, …, m/2-1, -m/2, …, -1`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Area element `spacing²`.
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn same_as(&self, other: &CartesianGrid) -> bool {
        self.m == other.m && self.half_width.to_bits() == other.half_width.to_bits()
    }
}

/// Complex samples `ψ(x_i, y_j)`, row-major with `x` fastest.
#[derive(Debug, Clone)]
pub struct ComplexField2D {
    grid: Arc<CartesianGrid>,
    values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn new(grid: Arc<CartesianGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return config(format!("{} samples for a {}² grid", values.len(), grid.m()));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return config("non-finite sample in complex field");
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Arc<CartesianGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: &Arc<CartesianGrid>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let c = grid.coords();
        let mut values = Vec::with_capacity(grid.len());
        for &y in c {
            for &x in c {
                values.push(f(x, y));
            }
        }
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<CartesianGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
}

impl RadialField {
    /// `ψ(x, y) = u(√(x²+y²))`, real-valued, by cubic interpolation.
    pub fn to_cartesian(&self, grid: &Arc<CartesianGrid>) -> Result<ComplexField2D> {
        if grid.half_width() > self.grid().r_max() {
            return config(format!(
                "box half-width {} exceeds the radial domain r_max = {}",
                grid.half_width(),
                self.grid().r_max()
            ));
        }
        Ok(ComplexField2D::from_fn(grid, |x, y| {
            Complex64::new(self.interpolate((x * x + y * y).sqrt()), 0.0)
        }))
    }
}
