use serde::Serialize;

use crate::functionals::{el_residual, FunctionalValues, Parameters};
use crate::quadrature::RadialField;

/// Diagnostics of a candidate solution. Never fails; every check is a number
/// or a flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub residual_rel: f64,
    pub pohozaev_rel: f64,
    pub dilation_defect: f64,
    /// `|S_{λ,μ}(u) - S|` over the sum of magnitudes of the action terms.
    pub action_defect_rel: f64,
    /// Samples non-increasing in `r` up to `1e-10`.
    pub monotone: bool,
    /// Largest upward jump between neighbouring samples.
    pub max_increase: f64,
    pub nonnegative: bool,
    /// `T > 2S`.
    pub kinetic_exceeds_level: bool,
}

/// Tolerance for the non-increasing profile check.
pub const MONOTONE_TOL: f64 = 1e-10;

impl Verification {
    /// All checks at the solver tolerances: residual `≤ grad_tol`, identities
    /// `≤ 1e-6`.
    pub fn passes(&self, grad_tol: f64) -> bool {
        self.residual_rel <= grad_tol
            && self.pohozaev_rel <= 1e-6
            && self.dilation_defect <= 1e-6
            && self.action_defect_rel <= 1e-6
            && self.monotone
            && self.nonnegative
            && self.kinetic_exceeds_level
    }
}

pub fn verify_solution(u: &RadialField, lambda: f64, s: f64, params: &Parameters) -> Verification {
    let fv = FunctionalValues::evaluate(u, params);
    let norm = u.l2_norm();
    let residual_rel = if norm > 0.0 { el_residual(u, lambda, params).l2_norm() / norm } else { f64::INFINITY };
    let scale = fv.pohozaev_scale(lambda, params);
    let pohozaev_rel = if scale > 0.0 { fv.pohozaev_defect(lambda, params).abs() / scale } else { f64::INFINITY };
    let dilation_defect =
        if fv.moment > 0.0 { (fv.kinetic - 2.0 * s - fv.moment).abs() / fv.moment } else { f64::INFINITY };
    let action_scale = 0.5 * fv.kinetic
        + 0.5 * fv.moment
        + lambda.abs() * fv.mass
        + params.mu() / params.p() * fv.focusing
        + params.nu() / params.q() * fv.defocusing;
    let action_defect_rel = (fv.action(lambda, params) - s).abs() / action_scale.max(s.abs()).max(f64::MIN_POSITIVE);
    let max_increase = u.values().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Verification {
        residual_rel,
        pohozaev_rel,
        dilation_defect,
        action_defect_rel,
        monotone: max_increase <= MONOTONE_TOL,
        max_increase,
        nonnegative: u.values().iter().all(|&v| v >= 0.0),
        kinetic_exceeds_level: fv.kinetic > 2.0 * s,
    }
}
