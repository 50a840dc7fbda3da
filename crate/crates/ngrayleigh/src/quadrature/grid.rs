use std::f64::consts::PI;

use super::stencil::{centred, fold, fornberg, push, RowOperator, HALF};
use crate::error::{config, Result};
use crate::linalg::{solve_dense, BandedMatrix};

/// Smallest node count accepted by [`RadialGrid::new`].
pub const MIN_NODES: usize = 64;

// Bernoulli numbers B_0..B_10.
const BERNOULLI: [f64; 11] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
];

/// B_k(1/2) = (2^{1-k} - 1) B_k.
fn bernoulli_half(k: usize) -> f64 {
    (2f64.powi(1 - k as i32) - 1.0) * BERNOULLI[k]
}

/// Correction factors `c_j` for the midpoint rule near an end point.
///
/// With `j` counted from the end, they satisfy
/// `Σ_j c_j (j+½)^k = B_{k+1}(½)/(k+1)` for the exponents `k` in `powers`,
/// which removes the matching Euler-Maclaurin end terms.
fn end_correction(powers: &[usize]) -> Vec<f64> {
    let k = powers.len();
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for (m, &pw) in powers.iter().enumerate() {
        for j in 0..k {
            a[m * k + j] = (j as f64 + 0.5).powi(pw as i32);
        }
        b[m] = bernoulli_half(pw + 1) / (pw + 1) as f64;
    }
    solve_dense(&mut a, &mut b).expect("correction system is nonsingular");
    b
}

/// Cell-centred radial grid on `[0, r_max]` with quadrature weights for
/// `∫ f(r) 2πr dr`.
///
/// The weights are the midpoint weights `2π r_i h` with end corrections:
/// five nodes at the origin (the integrand `2πr f(r)` of an even `f` is odd,
/// so only its odd Taylor terms enter) and two at `r_max` (constants and
/// linear integrands). Gaussian-decay integrands are then integrated to
/// roundoff instead of the `O(h²)` of the bare midpoint rule.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    n: usize,
    r_max: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub(crate) d1: RowOperator,
    pub(crate) lap: RowOperator,
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64) -> Result<Self> {
        if n < MIN_NODES {
            return config(format!("radial grid needs at least {MIN_NODES} nodes, got {n}"));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return config(format!("radial domain must have r_max > 0, got {r_max}"));
        }
        let h = r_max / n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();

        let origin = end_correction(&[1, 3, 5, 7, 9]);
        let outer = end_correction(&[0, 1]);
        let mut factor = vec![1.0; n];
        for (j, c) in origin.iter().enumerate() {
            factor[j] += c;
        }
        for (j, c) in outer.iter().enumerate() {
            factor[n - 1 - j] += c;
        }
        let weights = nodes.iter().zip(&factor).map(|(r, f)| 2.0 * PI * r * h * f).collect();

        let d1 = gradient_operator(n, h);
        let lap = laplacian_operator(&nodes, h);
        Ok(Self { n, r_max, h, nodes, weights, d1, lap })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Node spacing `r_max / n`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Two grids are interchangeable when they have the same nodes.
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n == other.n && self.r_max.to_bits() == other.r_max.to_bits()
    }

    /// `-Δ_r + r² + shift` as a banded matrix (half-bandwidth 3).
    pub(crate) fn schrodinger_matrix(&self, shift: &[f64]) -> BandedMatrix {
        let mut m = BandedMatrix::zeros(self.n, HALF, HALF);
        for (i, row) in self.lap.rows.iter().enumerate() {
            for &(j, c) in row {
                m.add(i, j, -c);
            }
        }
        let diag: Vec<f64> = self.nodes.iter().zip(shift).map(|(r, s)| r * r + s).collect();
        m.add_diagonal(&diag);
        m
    }
}

/// First derivative: centred in the interior, even reflection at the origin,
/// one-sided seven-point stencils for the last three nodes.
fn gradient_operator(n: usize, h: f64) -> RowOperator {
    let (c1, _) = centred();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(2 * HALF + 1);
        if i + HALF < n {
            for (k, &c) in c1.iter().enumerate() {
                let j = fold(i as i64 + k as i64 - HALF as i64) as usize;
                push(&mut row, j, c / h);
            }
        } else {
            let first = n - (2 * HALF + 1);
            let xs: Vec<f64> = (first..n).map(|j| j as f64).collect();
            let w = fornberg(i as f64, &xs, 1);
            for (k, &c) in w[1].iter().enumerate() {
                push(&mut row, first + k, c / h);
            }
        }
        rows.push(row);
    }
    RowOperator { rows }
}

/// `u'' + u'/r` with even reflection at the origin and zero ghost values
/// past `r_max` (profiles are negligible there).
fn laplacian_operator(nodes: &[f64], h: f64) -> RowOperator {
    let n = nodes.len();
    let (c1, c2) = centred();
    let mut rows = Vec::with_capacity(n);
    for (i, &r) in nodes.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * HALF + 1);
        for k in 0..=2 * HALF {
            let j = fold(i as i64 + k as i64 - HALF as i64) as usize;
            if j >= n {
                continue;
            }
            push(&mut row, j, c2[k] / (h * h) + c1[k] / (h * r));
        }
        rows.push(row);
    }
    RowOperator { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_layout() {
        let g = RadialGrid::new(64, 8.0).unwrap();
        assert_eq!(g.n(), 64);
        assert_eq!(g.nodes()[0], 0.0625);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(*g.nodes().last().unwrap() < 8.0);
    }

    #[test]
    fn rejects_small_or_empty_domains() {
        assert!(RadialGrid::new(32, 8.0).is_err());
        assert!(RadialGrid::new(64, 0.0).is_err());
        assert!(RadialGrid::new(64, -1.0).is_err());
    }

    #[test]
    fn weights_positive_and_exact_for_constants() {
        for (n, r) in [(64, 8.0), (256, 12.0), (512, 12.0), (2048, 12.0)] {
            let g = RadialGrid::new(n, r).unwrap();
            assert!(g.weights().iter().all(|&w| w > 0.0));
            let total: f64 = g.weights().iter().sum();
            assert!((total / (PI * r * r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_correction_values() {
        let d = end_correction(&[1, 3, 5, 7, 9]);
        let expect = [-0.115488231, 0.0139897313, -0.00235905038, 0.00031016668, -0.0000211345034];
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let e = end_correction(&[0, 1]);
        assert!((e[0] - 1.0 / 24.0).abs() < 1e-15 && (e[1] + 1.0 / 24.0).abs() < 1e-15);
    }
}
