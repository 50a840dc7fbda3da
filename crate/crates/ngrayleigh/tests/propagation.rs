use std::sync::Arc;

use ngrayleigh::functionals::Parameters;
use ngrayleigh::propagator::{
    orbital_distance, perturbation_field, propagate, sigma_norm_sq_2d, stability_experiment, PropagatorConfig,
    Reference, SplitStep,
};
use ngrayleigh::quadrature::{CartesianGrid, ComplexField2D};
use ngrayleigh::solver::{solve_ffs, SolverConfig};
use ngrayleigh::Error;
use num_complex::Complex64;

fn box128() -> Arc<CartesianGrid> {
    Arc::new(CartesianGrid::new(128, 10.0).unwrap())
}

#[test]
fn linear_mode_rotates() {
    let g = box128();
    let linear = Parameters::validation(4.0, 6.0, 0.0, 0.0).unwrap();
    let psi0 = ComplexField2D::from_fn(&g, |x, y| Complex64::new((-0.5 * (x * x + y * y)).exp(), 0.0));
    let mut psi = psi0.clone();
    SplitStep::new(&g, &linear, 1e-3).unwrap().advance(&mut psi, 200).unwrap();
    let rot = Complex64::from_polar(1.0, -0.4);
    let err = psi.values().iter().zip(psi0.values()).map(|(a, b)| (a - rot * b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn orbit_distance_ignores_phase() {
    let g = box128();
    let w = perturbation_field(&g, 3);
    assert!((sigma_norm_sq_2d(&w) - 1.0).abs() < 1e-12);
    let turned = ComplexField2D::new(g.clone(), w.values().iter().map(|z| z * Complex64::from_polar(1.0, 1.1)).collect()).unwrap();
    assert!(orbital_distance(&turned, &w).unwrap() < 1e-10);
    let doubled = ComplexField2D::new(g.clone(), w.values().iter().map(|z| 2.0 * z).collect()).unwrap();
    assert!((orbital_distance(&doubled, &w).unwrap() - 1.0).abs() < 1e-10);
    let other = perturbation_field(&Arc::new(CartesianGrid::new(64, 10.0).unwrap()), 3);
    assert!(matches!(orbital_distance(&other, &w), Err(Error::GridMismatch)));
}

#[test]
fn short_run_conserves() {
    let g = box128();
    let par = Parameters::new(4.0, 6.0, 10.0).unwrap();
    let psi = perturbation_field(&g, 8);
    let cfg = PropagatorConfig { dt: 1e-3, t_final: 0.5, monitor_stride: 50, m: 128, ..Default::default() };
    let tr = propagate(&psi, &cfg, &par, Some(&Reference { profile: psi.clone(), lambda: 1.0 })).unwrap();
    assert_eq!(tr.len(), 11);
    assert!(tr.all_finite());
    assert!(tr.mass_drift_rel() < 1e-12);
    assert!(tr.orbital_dist[0] < 1e-12);
    assert!(tr.lambda_drift_rel() < 1e-3);
}

#[test]
fn stability_guards() {
    let par = Parameters::new(4.0, 6.0, 10.0).unwrap();
    let rep = solve_ffs(&par, -1.0, &SolverConfig { n: 1024, ..Default::default() }).unwrap();
    let cfg = PropagatorConfig { dt: 2e-4, t_final: 0.05, monitor_stride: 50, ..Default::default() };
    let tr = stability_experiment(&rep, 0.0, &cfg, &par).unwrap();
    // The standing wave is only stationary up to the splitting error.
    assert!(tr.sup_orbital_dist() < 1e-3, "{}", tr.sup_orbital_dist());
    let tr = stability_experiment(&rep, 1e-2, &cfg, &par).unwrap();
    assert!((tr.perturbation_norm.unwrap() - 1e-2 * tr.reference_norm).abs() < 1e-12 * tr.reference_norm);
    assert!(stability_experiment(&rep, 0.5, &cfg, &par).is_err());
    let mut stale = rep.clone();
    stale.converged = false;
    assert!(matches!(stability_experiment(&stale, 1e-3, &cfg, &par), Err(Error::NotConverged(_))));
    let narrow = PropagatorConfig { half_width: 6.0, ..cfg.clone() };
    assert!(stability_experiment(&rep, 1e-3, &narrow, &par).is_err());
}
