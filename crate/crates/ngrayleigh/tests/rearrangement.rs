mod common;

use common::{grid, Family};
use ngrayleigh::functionals::{FunctionalValues, Parameters};
use ngrayleigh::rayleigh::small_lambda;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Symmetric decreasing rearrangement keeps the mass, does not raise the
    /// kinetic or moment terms and so does not lower the quotient.
    #[test]
    fn rearrangement_improves_the_quotient(seed in any::<u64>(), s in -2.0f64..0.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = Family::random(&mut rng, false);
        // Shifted bump: not monotone, so the rearrangement does real work.
        let g = grid(1024, 12.0);
        let u = ngrayleigh::quadrature::RadialField::from_fn(&g, |r| fam.eval(r) + 0.8 * (-(r - 2.5).powi(2)).exp());
        let params = Parameters::new(4.0, 6.0, 10.0).unwrap();
        let star = u.decreasing_rearrangement();
        let (a, b) = (FunctionalValues::evaluate(&u, &params), FunctionalValues::evaluate(&star, &params));
        prop_assert!((a.mass - b.mass).abs() <= 1e-12 * a.mass);
        prop_assert!(b.kinetic <= a.kinetic * (1.0 + 1e-9));
        prop_assert!(b.moment <= a.moment * (1.0 + 1e-12));
        prop_assert!(star.values().windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(star.values().iter().all(|&v| v >= 0.0));
        let (la, lb) = (small_lambda(&a, s, &params).unwrap(), small_lambda(&b, s, &params).unwrap());
        prop_assert!(lb >= la - 1e-9 * la.abs().max(1.0), "{lb} < {la}");
    }
}
