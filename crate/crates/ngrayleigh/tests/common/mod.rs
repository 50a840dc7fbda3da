#![allow(dead_code)]

use std::sync::Arc;

use ngrayleigh::quadrature::{RadialField, RadialGrid};
use rand::Rng;

/// `u(r) = Σ c (1 + k r²) e^{-a r²}`: smooth, rapidly decaying, and dilatable
/// exactly by evaluating at `σr`.
#[derive(Debug, Clone)]
pub struct Family {
    pub terms: Vec<(f64, f64, f64)>,
}

impl Family {
    pub fn random(rng: &mut impl Rng, positive: bool) -> Self {
        let count = rng.gen_range(2..=4);
        let terms = (0..count)
            .map(|_| {
                let c = if positive { rng.gen_range(0.2..2.0) } else { rng.gen_range(-1.5..2.0) };
                let a = rng.gen_range(0.35..1.4);
                let k = rng.gen_range(0.0..0.8);
                (c, a, k)
            })
            .collect();
        Family { terms }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|&(c, a, k)| c * (1.0 + k * r * r) * (-a * r * r).exp()).sum()
    }

    /// Samples of `u(σ·)` on `grid`.
    pub fn field(&self, grid: &Arc<RadialGrid>, sigma: f64) -> RadialField {
        RadialField::from_fn(grid, |r| self.eval(sigma * r))
    }
}

pub fn grid(n: usize, r_max: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(n, r_max).unwrap())
}

/// Maximiser of a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

pub fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
