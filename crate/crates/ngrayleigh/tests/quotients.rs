mod common;

use common::{golden_max, golden_min, grid, rel, Family};
use ngrayleigh::functionals::{el_residual, FunctionalValues, Parameters};
use ngrayleigh::rayleigh::{big_lambda, big_m, mu_quotient, sigma_s, small_lambda, t_m_stationary};
use ngrayleigh::solver::renormalize;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn small_lambda_is_the_dilation_maximum(seed in any::<u64>(), s in -2.0f64..0.0, mu in 5.0f64..15.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = Family::random(&mut rng, true);
        let g = grid(1024, 16.0);
        let params = Parameters::new(4.0, 6.0, mu).unwrap();
        let lam = small_lambda(&FunctionalValues::evaluate(&fam.field(&g, 1.0), &params), s, &params).unwrap();
        let scan = |ls: f64| {
            let fv = FunctionalValues::evaluate(&fam.field(&g, ls.exp()), &params);
            big_lambda(&fv, s, &params).unwrap()
        };
        let (_, best) = golden_max(scan, 0.25f64.ln(), 4f64.ln(), 1e-7);
        prop_assert!((best - lam).abs() <= 1e-6 * lam.abs().max(1.0), "{best} vs {lam}");
    }

    #[test]
    fn mu_quotient_is_the_dilation_minimum_of_m(seed in any::<u64>(), s in -2.0f64..0.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = Family::random(&mut rng, true);
        let g = grid(1024, 16.0);
        let params = Parameters::new(4.0, 6.0, 1.0).unwrap();
        let m = mu_quotient(&FunctionalValues::evaluate(&fam.field(&g, 1.0), &params), s, &params).unwrap();
        let scan = |ls: f64| big_m(&FunctionalValues::evaluate(&fam.field(&g, ls.exp()), &params), s, &params).unwrap();
        let (_, best) = golden_min(scan, 0.25f64.ln(), 4f64.ln(), 1e-7);
        prop_assert!(rel(best, m) <= 1e-6, "{best} vs {m}");
    }

    #[test]
    fn quotients_are_dilation_invariant(seed in any::<u64>(), s in -2.0f64..0.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = Family::random(&mut rng, true);
        let g = grid(1024, 16.0);
        let params = Parameters::new(4.0, 6.0, 10.0).unwrap();
        let at = |sigma: f64| FunctionalValues::evaluate(&fam.field(&g, sigma), &params);
        let (l0, m0) = (small_lambda(&at(1.0), s, &params).unwrap(), mu_quotient(&at(1.0), s, &params).unwrap());
        for sigma in [0.5, 1.5, 2.0] {
            let fv = at(sigma);
            prop_assert!((small_lambda(&fv, s, &params).unwrap() - l0).abs() <= 1e-5 * l0.abs().max(1.0));
            prop_assert!(rel(mu_quotient(&fv, s, &params).unwrap(), m0) <= 1e-5);
        }
    }

    #[test]
    fn defining_equivalences(seed in any::<u64>(), lambda in -5.0f64..5.0, s1 in -3.0f64..0.0, ds in 0.01f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = Family::random(&mut rng, false);
        let g = grid(512, 12.0);
        let params = Parameters::new(4.0, 6.0, 7.0).unwrap();
        let fv = FunctionalValues::evaluate(&fam.field(&g, 1.0), &params);
        let s = fv.action(lambda, &params);
        prop_assert!((big_lambda(&fv, s, &params).unwrap() - lambda).abs() <= 1e-12 * (1.0 + s.abs() / fv.mass));
        // Monotone in the level.
        let s2 = (s1 + ds).min(0.0);
        prop_assert!(small_lambda(&fv, s1, &params).unwrap() <= small_lambda(&fv, s2, &params).unwrap());
        // μ^S is the zero crossing of μ ↦ λ^S_μ.
        if fv.focusing > 0.0 {
            let m = mu_quotient(&fv, s1, &params).unwrap();
            let at = |mu: f64| small_lambda(&fv, s1, &params.with_mu(mu).unwrap()).unwrap();
            prop_assert!(at(m).abs() <= 1e-10 * (m * fv.focusing / fv.mass).max(1.0));
            prop_assert!(at(m * 1.01) > 0.0 && at(m * 0.99) < 0.0);
        }
    }

    #[test]
    fn t_m_minimises_amplitude_scan(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Family::random(&mut rng, true).field(&grid(512, 12.0), 1.0);
        let params = Parameters::new(4.0, 6.0, 1.0).unwrap();
        let tm = t_m_stationary(&FunctionalValues::evaluate(&u, &params), &params).unwrap();
        let scan = |t: f64| mu_quotient(&FunctionalValues::evaluate(&u.scaled(t), &params), 0.0, &params).unwrap();
        let (t_best, _) = golden_min(scan, 0.05 * tm, 20.0 * tm, 1e-9 * tm);
        prop_assert!(rel(t_best, tm) <= 1e-6, "{t_best} vs {tm}");
        let h = 1e-6 * tm;
        let slope = (scan(tm + h) - scan(tm - h)) / (2.0 * h);
        prop_assert!(slope.abs() * tm / scan(tm) <= 1e-8);
        let t2 = t_m_stationary(&FunctionalValues::evaluate(&u.scaled(2.0), &params), &params).unwrap();
        prop_assert!(rel(t2, tm / 2.0) <= 1e-8);
    }
}

/// Centred difference of `f` at `u` along `h`.
fn directional(f: impl Fn(&[f64]) -> f64, u: &[f64], h: &[f64], eps: f64) -> f64 {
    let shift = |sign: f64| u.iter().zip(h).map(|(a, b)| a + sign * eps * b).collect::<Vec<_>>();
    (f(&shift(1.0)) - f(&shift(-1.0))) / (2.0 * eps)
}

#[test]
fn gradients_match_finite_differences() {
    let g = grid(512, 12.0);
    let params = Parameters::new(4.0, 6.0, 10.0).unwrap();
    let s = -1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        // Discrete dilation is only second-order accurate, so renormalise until σ_S is 1.
        let mut u = Family::random(&mut rng, true).field(&g, 1.0);
        for _ in 0..6 {
            u = renormalize(&u, s, &params).unwrap();
        }
        let h = Family::random(&mut rng, false).field(&g, 1.0);
        let fv = FunctionalValues::evaluate(&u, &params);
        assert!((sigma_s(&fv, s).unwrap() - 1.0).abs() < 1e-10);
        let eval = |v: &[f64], f: &dyn Fn(&FunctionalValues) -> f64| {
            f(&FunctionalValues::evaluate(&ngrayleigh::quadrature::RadialField::new(g.clone(), v.to_vec()).unwrap(), &params))
        };
        let eps = 1e-4 * u.l2_norm() / h.l2_norm();

        let lam = small_lambda(&fv, s, &params).unwrap();
        let fd = directional(|v| eval(v, &|f| small_lambda(f, s, &params).unwrap()), u.values(), h.values(), eps);
        let exact = -el_residual(&u, lam, &params).dot(&h).unwrap() / fv.mass;
        assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-3), "lambda: {fd} vs {exact}");

        let mu = mu_quotient(&fv, s, &params).unwrap();
        let fd = directional(|v| eval(v, &|f| mu_quotient(f, s, &params).unwrap()), u.values(), h.values(), eps);
        let exact = params.p() / fv.focusing * el_residual(&u, 0.0, &params.with_mu(mu).unwrap()).dot(&h).unwrap();
        assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-3), "mu: {fd} vs {exact}");
    }
}
