//! Variational solvers for the stationary equation
//! `-Δu + r²u + λu - μ|u|^{p-2}u + ν|u|^{q-2}u = 0`.
//!
//! * [`solve_ffs`]: fundamental frequency solutions, maximising the reduced
//!   quotient `λ^S_μ` at a fixed action level.
//! * [`solve_mu_hat`]: the extremal coefficient `μ̂^S`, minimising `μ^S`.
//! * [`petviashvili`]: fixed-frequency oracle, independent of the quotients.
//! * [`solve_constrained_appendix`]: constrained minimisers over
//!   `(1/p)‖u‖_p^p = 1`.
//!
//! The quotient solvers run a preconditioned gradient iteration with dilation
//! renormalisation every step, then hand over to a Newton polish once the
//! line search can no longer resolve changes in the quotient (about `1e-6` in
//! the relative residual, where the quotient moves by less than roundoff).

mod ascent;
mod appendix;
mod newton;
mod petviashvili;
mod verify;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::functionals::FunctionalValues;
use crate::quadrature::{RadialField, RadialGrid};
use crate::rayleigh::sigma_s;

pub use appendix::{solve_constrained_appendix, AppendixVariant};
pub use ascent::{solve_ffs, solve_ffs_from, solve_mu_hat, solve_mu_hat_from};
pub use petviashvili::{petviashvili, petviashvili_from, thomas_fermi, PetviashviliExponent, PetviashviliOptions};
pub use verify::{verify_solution, Verification};

/// Iteration controls shared by every solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop when `‖g‖/‖u‖` falls to this.
    pub grad_tol: f64,
    /// First trial step of the line search.
    pub step: f64,
    /// Line-search shrink factor.
    pub backtrack: f64,
    /// `c` in the preconditioner `-Δ_r + r² + c`.
    pub precond_shift: f64,
    /// Radial nodes for solves that start from scratch.
    pub n: usize,
    pub r_max: f64,
    /// Finish with Newton on the discrete equations.
    pub polish: bool,
    /// Residual at which the gradient stage hands over to Newton.
    pub polish_below: f64,
    /// Permit `S > 0`, where ground states are not expected to exist.
    pub allow_positive_action: bool,
    pub petviashvili: PetviashviliOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-8,
            step: 0.5,
            backtrack: 0.5,
            precond_shift: 1.0,
            n: 512,
            r_max: 12.0,
            polish: true,
            polish_below: 1e-5,
            allow_positive_action: false,
            petviashvili: PetviashviliOptions::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return config("max_iters must be positive");
        }
        if !(self.grad_tol > 0.0 && self.grad_tol < 1e-4) {
            return config(format!("grad_tol must lie in (0, 1e-4), got {}", self.grad_tol));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return config("line-search step must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return config("backtrack factor must lie in (0, 1)");
        }
        if !(self.precond_shift > 0.0 && self.precond_shift.is_finite()) {
            return config("precond_shift must be positive");
        }
        if !(self.polish_below > 0.0) {
            return config("polish_below must be positive");
        }
        self.petviashvili.validate()?;
        RadialGrid::new(self.n, self.r_max).map(|_| ())
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(self.n, self.r_max)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveKind {
    /// Maximiser of `λ^S_μ`; `value` is `λ̂^S_μ`.
    Ffs,
    /// Minimiser of `μ^S`; `value` is `μ̂^S`.
    MuHat,
    /// Petviashvili at fixed `λ`; `value` is that `λ`.
    FixedFrequency,
    /// Constrained minimiser; `value` is the constrained minimum.
    Appendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Gradient,
    Newton,
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub stage: Stage,
    /// Quotient (gradient stage) or unknown scalar (Newton stage).
    pub value: f64,
    pub residual_rel: f64,
    /// Accepted line-search step; 1 for Newton.
    pub step: f64,
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub kind: SolveKind,
    pub profile: RadialField,
    pub value: f64,
    /// `λ` of the stationary equation the profile solves.
    pub frequency: f64,
    /// `μ` of that equation.
    pub mu: f64,
    /// Action level `S` of the profile at (`frequency`, `mu`).
    pub level: f64,
    pub fv: FunctionalValues,
    pub residual_rel: f64,
    pub pohozaev_rel: f64,
    /// `|T - 2S - L| / L`.
    pub dilation_defect: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub converged: bool,
    /// `λ̂ ≤ 0`: the prescribed `μ` is not above `μ̂^S`.
    pub frequency_nonpositive: bool,
    /// Lagrange multiplier (constrained minimisers only).
    pub multiplier: Option<f64>,
    pub history: Vec<IterationRecord>,
    pub note: Option<String>,
}

impl SolveReport {
    /// `Err(NotConverged)` unless the run converged.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(crate::Error::NotConverged(format!(
                "{:?} stopped at residual {:.3e} after {} iterations{}",
                self.kind,
                self.residual_rel,
                self.iterations,
                self.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
            )))
        }
    }
}

/// Dilates `u` onto the action level `S`, so that `T - 2S = L` afterwards.
pub fn renormalize(u: &RadialField, s: f64, params: &crate::functionals::Parameters) -> Result<RadialField> {
    let fv = FunctionalValues::evaluate(u, params);
    let sigma = sigma_s(&fv, s)?;
    u.dilate(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Parameters;
    use std::f64::consts::PI;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
        let bad = SolverConfig { grad_tol: 1e-3, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { backtrack: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn renormalize_gaussian() {
        let g = Arc::new(RadialGrid::new(512, 12.0).unwrap());
        let u = RadialField::gaussian(&g);
        let par = Parameters::new(4.0, 6.0, 10.0).unwrap();
        let same = renormalize(&u, 0.0, &par).unwrap();
        for (a, b) in same.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        let s = -PI / 2.0;
        let v = renormalize(&u, s, &par).unwrap();
        let fv = FunctionalValues::evaluate(&v, &par);
        assert!(((fv.kinetic - 2.0 * s) / fv.moment - 1.0).abs() < 1e-5);
        assert!(renormalize(&u, PI, &par).is_err());
    }
}
