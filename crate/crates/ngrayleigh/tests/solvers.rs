use std::f64::consts::PI;
use std::sync::Arc;

use ngrayleigh::functionals::{FunctionalValues, Parameters};
use ngrayleigh::quadrature::{RadialField, RadialGrid};
use ngrayleigh::solver::{
    petviashvili, renormalize, solve_constrained_appendix, solve_ffs, solve_mu_hat, verify_solution, AppendixVariant,
    SolverConfig,
};
use ngrayleigh::Error;

fn params(mu: f64) -> Parameters {
    Parameters::new(4.0, 6.0, mu).unwrap()
}

fn rel_l2(a: &RadialField, b: &RadialField) -> f64 {
    let d = RadialField::new(a.grid().clone(), a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect()).unwrap();
    d.l2_norm() / a.l2_norm()
}

#[test]
fn ffs_agrees_with_fixed_frequency_oracle() {
    let cfg = SolverConfig::default();
    let p = params(10.0);
    let rep = solve_ffs(&p, -1.0, &cfg).unwrap();
    assert!(rep.converged && rep.value > 0.0);
    assert!(rep.residual_rel <= 1e-8 && rep.pohozaev_rel <= 1e-6 && rep.dilation_defect <= 1e-6);
    let v = verify_solution(&rep.profile, rep.value, -1.0, &p);
    assert!(v.passes(cfg.grad_tol), "{v:?}");
    let pet = petviashvili(&p, rep.value, &cfg).unwrap();
    assert!(pet.converged);
    assert!(rel_l2(&rep.profile, &pet.profile) <= 1e-5);
    // Both are the same solution, so the actions agree as well.
    assert!((pet.fv.action(rep.value, &p) + 1.0).abs() <= 1e-5);
}

#[test]
fn ffs_at_the_extremal_coefficient_has_zero_frequency() {
    let cfg = SolverConfig::default();
    for s in [0.0, -0.5] {
        let m = solve_mu_hat(&params(1.0), s, &cfg).unwrap().require_converged().unwrap();
        let rep = solve_ffs(&params(m.value), s, &cfg).unwrap();
        assert!(rep.value.abs() <= 1e-4, "S = {s}: lambda_hat = {}", rep.value);
    }
}

#[test]
fn low_coefficient_is_flagged() {
    let rep = solve_ffs(&params(1.0), 0.0, &SolverConfig::default()).unwrap();
    assert!(rep.frequency_nonpositive && rep.value < 0.0);
}

#[test]
fn positive_level_needs_opt_in() {
    let err = solve_ffs(&params(10.0), 0.5, &SolverConfig::default()).unwrap_err();
    assert!(err.to_string().contains("allow_positive_action"), "{err}");
    let cfg = SolverConfig { allow_positive_action: true, ..Default::default() };
    assert!(!solve_ffs(&params(10.0), 0.5, &cfg).unwrap_err_or_report().contains("allow_positive_action"));
}

trait Outcome {
    fn unwrap_err_or_report(self) -> String;
}

impl<T> Outcome for Result<T, Error> {
    fn unwrap_err_or_report(self) -> String {
        self.err().map(|e| e.to_string()).unwrap_or_default()
    }
}

#[test]
fn renormalisation_of_the_gaussian() {
    let g = Arc::new(RadialGrid::new(512, 12.0).unwrap());
    let u = RadialField::gaussian(&g);
    let p = params(10.0);
    let same = renormalize(&u, 0.0, &p).unwrap();
    assert!(rel_l2(&u, &same) < 1e-10);
    let d = renormalize(&u, -PI / 2.0, &p).unwrap();
    let fv = FunctionalValues::evaluate(&d, &p);
    assert!((fv.kinetic + PI - fv.moment).abs() <= 1e-5 * fv.moment);
    let expected = RadialField::from_fn(&g, |r| (-0.5 * r * r / 2f64.sqrt()).exp());
    assert!(rel_l2(&expected, &d) < 1e-6);
    assert!(matches!(renormalize(&u, PI, &p), Err(Error::InfeasibleDilation { .. })));
}

#[test]
fn constrained_minimisers() {
    let cfg = SolverConfig::default();
    let def = solve_constrained_appendix(4.0, 0.0, AppendixVariant::Defocusing, &cfg).unwrap();
    assert!(def.converged && def.residual_rel <= 1e-8 && def.value > 0.0 && def.multiplier.unwrap() > 0.0);
    let foc = solve_constrained_appendix(4.0, -3.0, AppendixVariant::Focusing, &cfg).unwrap();
    assert!(foc.converged && foc.residual_rel <= 1e-8 && foc.value < 0.0 && foc.multiplier.unwrap() < 0.0);
    let comb = solve_constrained_appendix(4.0, 0.0, AppendixVariant::Combined { q: 6.0 }, &cfg).unwrap();
    assert!(comb.converged && comb.residual_rel <= 1e-8 && comb.mu > 0.0);
    // Wrong sides of the linear eigenvalue -2.
    assert!(solve_constrained_appendix(4.0, -3.0, AppendixVariant::Defocusing, &cfg).is_err());
    assert!(solve_constrained_appendix(4.0, 0.0, AppendixVariant::Focusing, &cfg).is_err());
}

#[test]
fn fixed_frequency_guards() {
    let cfg = SolverConfig::default();
    assert!(petviashvili(&params(10.0), -2.5, &cfg).is_err());
    let linear = Parameters::validation(4.0, 6.0, 0.0, 0.0).unwrap();
    assert!(petviashvili(&linear, 1.0, &cfg).is_err());
}
