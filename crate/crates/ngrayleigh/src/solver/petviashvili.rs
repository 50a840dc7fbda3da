//! Fixed-frequency fixed-point oracle.
//!
//! Iterates `u ← γ^κ M⁻¹ (N(u) + c u)` with `M = -Δ_r + r² + λ + c` and the
//! stabilising factor `γ = ⟨M u, u⟩ / ⟨N(u) + c u, u⟩`, which is one exactly
//! at a solution. The shift `c` and the exponent `κ` decide which solution
//! the iteration is attracted to:
//!
//! * `κ > 1` (the classical `(p-1)/(p-2)` for a pure power) damps the
//!   amplitude mode of narrow, focusing-type solutions and converges to them;
//! * `κ < 1` together with a shift large enough to make the linearised map
//!   contracting on a flat top selects the wide, defocusing-dominated
//!   solutions that the quotient ascent produces at negative action.
//!
//! The often quoted `κ = p/(p-2)` puts the amplitude multiplier of a pure
//! power nonlinearity exactly at `-1`, so it is marginal rather than
//! stabilising and is not offered as a default.

use serde::{Deserialize, Serialize};

use super::ascent::finish;
use super::{IterationRecord, SolveKind, SolveReport, SolverConfig, Stage};
use crate::error::{config, Error, Result};
use crate::functionals::{el_residual, pow, FunctionalValues, Parameters, DIMENSION};
use crate::quadrature::{weighted_dot, RadialField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PetviashviliExponent {
    /// `κ = (p-1)/(p-2)`.
    Classic,
    Fixed(f64),
}

impl PetviashviliExponent {
    fn value(&self, params: &Parameters) -> f64 {
        match *self {
            Self::Classic => (params.p() - 1.0) / (params.p() - 2.0),
            Self::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PetviashviliOptions {
    pub exponent: PetviashviliExponent,
    /// `c`; `None` derives it from the plateau height of the nonlinearity.
    pub shift: Option<f64>,
    /// Start from the Thomas-Fermi profile instead of the Gaussian.
    pub thomas_fermi_start: bool,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        Self { exponent: PetviashviliExponent::Fixed(0.5), shift: None, thomas_fermi_start: true }
    }
}

impl PetviashviliOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if let PetviashviliExponent::Fixed(k) = self.exponent {
            if !(k.is_finite() && k >= 0.0) {
                return config("Petviashvili exponent must be finite and nonnegative");
            }
        }
        if let Some(c) = self.shift {
            if !(c >= 0.0 && c.is_finite()) {
                return config("Petviashvili shift must be finite and nonnegative");
            }
        }
        Ok(())
    }
}

/// Amplitude where `N(v)/v` changes sign, `(μ/ν)^{1/(q-p)}`.
fn plateau(params: &Parameters) -> Option<f64> {
    (params.nu() > 0.0 && params.mu() > 0.0).then(|| (params.mu() / params.nu()).powf(1.0 / (params.q() - params.p())))
}

fn auto_shift(params: &Parameters, lambda: f64) -> f64 {
    match plateau(params) {
        Some(v) => (0.5 * (-params.nonlinearity_derivative(v) - lambda)).max(0.0),
        None => 0.0,
    }
}

/// Thomas-Fermi profile: at each `r`, the largest root `v` of
/// `μ v^{p-2} - ν v^{q-2} = λ + r²`, and zero where there is none.
pub fn thomas_fermi(grid: &std::sync::Arc<crate::quadrature::RadialGrid>, params: &Parameters, lambda: f64) -> RadialField {
    let (p, q, mu, nu) = (params.p(), params.q(), params.mu(), params.nu());
    let Some(vmax) = plateau(params) else { return RadialField::zeros(grid) };
    let vstar = (mu * (p - 2.0) / (nu * (q - 2.0))).powf(1.0 / (q - p));
    let phi = |v: f64| mu * pow(v, p - 2.0) - nu * pow(v, q - 2.0);
    RadialField::from_fn(grid, |r| {
        let target = lambda + r * r;
        if phi(vstar) <= target {
            return 0.0;
        }
        let (mut lo, mut hi) = (vstar, vmax);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    })
}

/// Solves the stationary equation at fixed `λ > -2`.
pub fn petviashvili(params: &Parameters, lambda: f64, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mut u0 = RadialField::gaussian(&grid);
    if cfg.petviashvili.thomas_fermi_start {
        let tf = thomas_fermi(&grid, params, lambda);
        if tf.l2_norm() > 0.0 {
            u0 = tf;
        }
    }
    petviashvili_from(params, lambda, cfg, &u0)
}

pub fn petviashvili_from(params: &Parameters, lambda: f64, cfg: &SolverConfig, initial: &RadialField) -> Result<SolveReport> {
    cfg.validate()?;
    if params.mu() == 0.0 && params.nu() == 0.0 {
        return config("fixed-frequency iteration needs a nonlinearity: mu = nu = 0");
    }
    if !(lambda > -DIMENSION) {
        return Err(Error::OutOfDomain(format!(
            "lambda = {lambda} is not above -2, the bottom of the trap spectrum"
        )));
    }
    let opts = cfg.petviashvili;
    let kappa = opts.exponent.value(params);
    let c = opts.shift.unwrap_or_else(|| auto_shift(params, lambda));

    let grid = initial.grid().clone();
    let n = grid.n();
    let w = grid.weights().to_vec();
    let m = grid.schrodinger_matrix(&vec![lambda + c; n]);
    let lu = m.clone().factor().ok_or(Error::Degenerate("singular fixed-point operator"))?;

    let start_norm = initial.l2_norm();
    if start_norm == 0.0 {
        return Err(Error::Degenerate("zero initial profile"));
    }
    let mut u = initial.values().to_vec();
    let mut mu_buf = vec![0.0; n];
    let mut history = Vec::new();
    let mut note = None;
    let mut iterations = cfg.max_iters;

    for it in 0..cfg.max_iters {
        let rhs: Vec<f64> = u.iter().map(|&v| params.nonlinearity(v) + c * v).collect();
        m.matvec(&u, &mut mu_buf);
        let gamma = weighted_dot(&w, &mu_buf, &u) / weighted_dot(&w, &rhs, &u);
        if !(gamma > 0.0 && gamma.is_finite()) {
            note = Some(format!("stabilising factor became {gamma}"));
            iterations = it;
            break;
        }
        let mut next = rhs;
        lu.solve_in_place(&mut next);
        let scale = gamma.powf(kappa);
        next.iter_mut().for_each(|v| *v *= scale);
        u = next;

        let field = initial.with_values(u.clone());
        let norm = field.l2_norm();
        if !norm.is_finite() || norm < 1e-12 * start_norm {
            note = Some("iterates diverged or collapsed to zero".into());
            iterations = it + 1;
            break;
        }
        let rr = el_residual(&field, lambda, params).l2_norm() / norm;
        history.push(IterationRecord { iteration: it, stage: Stage::Gradient, value: gamma, residual_rel: rr, step: scale });
        if rr <= cfg.grad_tol {
            iterations = it + 1;
            break;
        }
    }

    let u = initial.with_values(u);
    let s = FunctionalValues::evaluate(&u, params).action(lambda, params);
    let mut rep = finish(SolveKind::FixedFrequency, u, lambda, lambda, params, s, cfg, iterations, 0, history);
    if rep.note.is_none() {
        rep.note = note.or_else(|| (!rep.converged).then(|| "iteration budget exhausted".into()));
    }
    Ok(rep)
}
