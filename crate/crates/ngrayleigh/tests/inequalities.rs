//! Functional inequalities on random smooth radial fields.

mod common;

use std::f64::consts::PI;

use common::{grid, Family};
use ngrayleigh::functionals::{FunctionalValues, Parameters};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PAIRS: [(f64, f64); 2] = [(3.0, 5.0), (4.0, 6.0)];
const FIELDS: usize = 100;


fn with_powers(seed: u64, p: f64, q: f64) -> Vec<FunctionalValues> {
    let g = grid(512, 12.0);
    let params = Parameters::new(p, q, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..FIELDS).map(|i| FunctionalValues::evaluate(&Family::random(&mut rng, i % 2 == 0).field(&g, 1.0), &params)).collect()
}

#[test]
fn uncertainty_principle_is_strict() {
    for fv in with_powers(1, 4.0, 6.0) {
        let l2 = 2.0 * fv.mass;
        assert!(l2 < (fv.moment * fv.kinetic).sqrt(), "{l2} vs {}", (fv.moment * fv.kinetic).sqrt());
    }
}

#[test]
fn lebesgue_interpolation() {
    for (p, q) in PAIRS {
        let theta = q * (p - 2.0) / (p * (q - 2.0));
        for fv in with_powers(2, p, q) {
            let lp = fv.focusing.powf(1.0 / p);
            let bound = (2.0 * fv.mass).sqrt().powf(1.0 - theta) * fv.defocusing.powf(theta / q);
            assert!(lp <= bound * (1.0 + 1e-12), "(p, q) = ({p}, {q}): {lp} > {bound}");
        }
    }
}

/// Splitting `∫u²` at radius `R`, Hölder inside and `|x|² ≥ R²` outside give
/// `‖u‖₂² ≤ π^{1-2/p} R^{γ} ‖u‖_p² + R^{-2} ‖xu‖₂²` with `γ = 2 - 4/p`;
/// minimising over `R` yields the constant below.
fn compactness_constant(p: f64) -> f64 {
    let gamma = 2.0 - 4.0 / p;
    let k = PI.powf(1.0 - 2.0 / p);
    ((1.0 + 0.5 * gamma) * k * (2.0 / (gamma * k)).powf(gamma / (gamma + 2.0))).sqrt()
}

#[test]
fn two_dimensional_compactness_inequality() {
    for (p, q) in PAIRS {
        let theta = 0.5 * p / (p - 1.0);
        let c = compactness_constant(p);
        let mut worst = 0.0f64;
        for fv in with_powers(3, p, q) {
            let ratio = (2.0 * fv.mass).sqrt() / (fv.focusing.powf(theta / p) * fv.moment.sqrt().powf(1.0 - theta));
            assert!(ratio.is_finite() && ratio <= c, "p = {p}: ratio {ratio} above {c}");
            worst = worst.max(ratio);
        }
        assert!(worst > 0.0);
    }
}
