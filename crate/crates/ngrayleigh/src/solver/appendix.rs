//! Constrained minimisers on `B_p = {(1/p)‖u‖_p^p = 1}`:
//!
//! * `F(u) = ½⟨Hu,u⟩ + (λ/2)‖u‖²` for `λ > -2` gives, after rescaling,
//!   a solution of `(H+λ)u = |u|^{p-2}u`;
//! * the same `F` for `λ < -2` gives `(H+λ)u = -|u|^{p-2}u`;
//! * `G(u) = F(u) + (1/q)‖u‖_q^q` for `λ > -2` gives the full stationary
//!   equation with a positive multiplier `μ` (no rescaling is available).
//!
//! `H = -Δ + |x|²`. `G` carries `+λ/2`, the sign consistent with the
//! stationary equation.

use serde::{Deserialize, Serialize};

use super::newton::{polish, Border, Linearization};
use super::{IterationRecord, SolveKind, SolveReport, SolverConfig, Stage};
use crate::error::{config, Error, Result};
use crate::functionals::{el_residual, pow, FunctionalValues, Parameters, DIMENSION};
use crate::quadrature::{weighted_dot, RadialField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AppendixVariant {
    /// `λ > -2`, homogeneous, positive multiplier.
    Defocusing,
    /// `λ < -2`, homogeneous, negative multiplier.
    Focusing,
    /// `λ > -2`, with the defocusing `q`-power added.
    Combined { q: f64 },
}

struct Problem {
    p: f64,
    q: Option<f64>,
    lambda: f64,
}

impl Problem {
    /// `⟨(H+λ)u, u⟩` with the discrete operator of the residual.
    fn quadratic(&self, u: &RadialField) -> f64 {
        let g = u.grid();
        let lap = u.laplacian();
        let hu: Vec<f64> = g
            .nodes()
            .iter()
            .zip(u.values())
            .zip(lap.values())
            .map(|((r, v), l)| -l + (r * r + self.lambda) * v)
            .collect();
        weighted_dot(g.weights(), &hu, u.values())
    }

    fn power(&self, u: &RadialField, e: f64) -> f64 {
        u.grid().weights().iter().zip(u.values()).map(|(w, v)| w * pow(v.abs(), e)).sum()
    }

    /// Objective value `F` or `G`.
    fn objective(&self, u: &RadialField) -> f64 {
        let extra = self.q.map_or(0.0, |q| self.power(u, q) / q);
        0.5 * self.quadratic(u) + extra
    }

    /// Lagrange multiplier for the constraint `(1/p)‖u‖_p^p = 1`.
    fn multiplier(&self, u: &RadialField) -> f64 {
        let extra = self.q.map_or(0.0, |q| self.power(u, q));
        (self.quadratic(u) + extra) / self.power(u, self.p)
    }

    /// Constrained gradient `(H+λ)u [+ |u|^{q-2}u] - m |u|^{p-2}u`.
    fn residual(&self, u: &RadialField, m: f64) -> RadialField {
        let lap = u.laplacian();
        let vals = u
            .grid()
            .nodes()
            .iter()
            .zip(u.values())
            .zip(lap.values())
            .map(|((r, &v), l)| {
                let a = v.abs();
                let extra = self.q.map_or(0.0, |q| pow(a, q - 2.0) * v);
                -l + (r * r + self.lambda) * v + extra - m * pow(a, self.p - 2.0) * v
            })
            .collect();
        u.with_values(vals)
    }

    fn project(&self, u: &RadialField) -> Option<RadialField> {
        let u = u.abs();
        let c = self.power(&u, self.p) / self.p;
        (c > 0.0 && c.is_finite()).then(|| u.scaled(c.powf(-1.0 / self.p)))
    }
}

/// Minimises the appendix functional over `B_p` and returns the solution of
/// the associated equation. `value` is the constrained minimum `δ`,
/// `multiplier` the Lagrange multiplier (`μ` in the combined case).
pub fn solve_constrained_appendix(p: f64, lambda: f64, variant: AppendixVariant, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if !(p > 2.0 && p.is_finite()) {
        return config(format!("exponent must satisfy p > 2, got {p}"));
    }
    let q = match variant {
        AppendixVariant::Defocusing | AppendixVariant::Focusing => None,
        AppendixVariant::Combined { q } => {
            if !(q > p && q.is_finite()) {
                return config(format!("exponent ordering violated: need 2 < p < q, got p = {p}, q = {q}"));
            }
            Some(q)
        }
    };
    let below = matches!(variant, AppendixVariant::Focusing);
    if below != (lambda < -DIMENSION) || lambda == -DIMENSION {
        return Err(Error::OutOfDomain(format!(
            "{variant:?} requires lambda {} -2, got {lambda}",
            if below { "<" } else { ">" }
        )));
    }
    let prob = Problem { p, q, lambda };

    let grid = cfg.grid()?;
    let n = grid.n();
    let pre = grid
        .schrodinger_matrix(&vec![cfg.precond_shift; n])
        .factor()
        .ok_or(Error::Degenerate("singular preconditioner"))?;
    let mut u = prob.project(&RadialField::gaussian(&grid)).expect("Gaussian is nonzero");
    let mut obj = prob.objective(&u);
    let mut tau = cfg.step;
    let mut history = Vec::new();
    let mut stalled_at = None;
    let mut rr = f64::INFINITY;
    let mut its = 0;

    for it in 0..cfg.max_iters {
        its = it + 1;
        let m = prob.multiplier(&u);
        let g = prob.residual(&u, m);
        rr = g.l2_norm() / u.l2_norm();
        history.push(IterationRecord { iteration: it, stage: Stage::Gradient, value: obj, residual_rel: rr, step: tau });
        if rr <= cfg.grad_tol || (cfg.polish && rr <= cfg.polish_below) {
            break;
        }
        let mut d = g.into_values();
        pre.solve_in_place(&mut d);
        let mut t = (tau / cfg.backtrack).min(8.0 * cfg.step);
        let mut accepted = None;
        while t > 1e-12 {
            let trial = u.with_values(u.values().iter().zip(&d).map(|(a, b)| a - t * b).collect());
            if let Some(c) = prob.project(&trial) {
                let oc = prob.objective(&c);
                if oc < obj {
                    accepted = Some((c, oc));
                    break;
                }
            }
            t *= cfg.backtrack;
        }
        match accepted {
            Some((c, oc)) => {
                u = c;
                obj = oc;
                tau = t;
            }
            None => {
                stalled_at = Some(it);
                break;
            }
        }
    }

    let delta = obj;
    let multiplier = prob.multiplier(&u);
    let mut newton_its = 0;
    let sign = if below { -1.0 } else { 1.0 };

    let (profile, mu_equation) = match q {
        None => {
            // (H+λ)ũ = m|ũ|^{p-2}ũ  ⇒  u = |m|^{1/(p-2)} ũ solves (H+λ)u = sign(m)|u|^{p-2}u.
            let mut v = u.scaled(multiplier.abs().powf(1.0 / (p - 2.0)));
            if cfg.polish && rr > cfg.grad_tol && rr <= 1e-3 {
                let res = polish(v, 0.0, 30, 1e-2 * cfg.grad_tol, |u, _| Linearization {
                    residual: prob.residual(u, sign).into_values(),
                    jac_shift: u.values().iter().map(|&x| lambda - sign * (p - 1.0) * pow(x.abs(), p - 2.0)).collect(),
                    border: None,
                });
                newton_its = res.iterations;
                push(&mut history, its, &res.trace);
                v = res.u.abs();
            }
            (v, sign)
        }
        Some(q) => {
            let par = Parameters::validation(p, q, multiplier.max(0.0), 1.0)?;
            let mut v = u.clone();
            let mut m = multiplier;
            if cfg.polish && rr > cfg.grad_tol && rr <= 1e-3 {
                let res = polish(v, m, 30, 1e-2 * cfg.grad_tol, |u, mu| {
                    let pm = par.set_mu(mu);
                    let vals = u.values();
                    let w = u.grid().weights();
                    Linearization {
                        residual: el_residual(u, lambda, &pm).into_values(),
                        jac_shift: vals.iter().map(|&x| lambda - pm.nonlinearity_derivative(x)).collect(),
                        border: Some(Border {
                            col: vals.iter().map(|&x| -pow(x.abs(), p - 2.0) * x).collect(),
                            row: vals.iter().zip(w).map(|(&x, w)| w * pow(x.abs(), p - 2.0) * x).collect(),
                            corner: 0.0,
                            residual: prob.power(u, p) / p - 1.0,
                        }),
                    }
                });
                newton_its = res.iterations;
                push(&mut history, its, &res.trace);
                v = res.u.abs();
                m = res.theta;
            }
            (v, m)
        }
    };

    // Diagnostics of the equation the profile is meant to solve.
    let (fv_par, q_used) = match q {
        Some(q) => (Parameters::validation(p, q, mu_equation.max(0.0), 1.0)?, q),
        None => (Parameters::validation(p, 2.0 * p, 1.0, 0.0)?, 2.0 * p),
    };
    let fv = FunctionalValues::evaluate(&profile, &fv_par);
    let (residual_rel, poh, poh_scale, level) = match q {
        Some(_) => {
            let r = el_residual(&profile, lambda, &fv_par).l2_norm() / profile.l2_norm();
            (r, fv.pohozaev_defect(lambda, &fv_par), fv.pohozaev_scale(lambda, &fv_par), fv.action(lambda, &fv_par))
        }
        None => {
            let r = prob.residual(&profile, sign).l2_norm() / profile.l2_norm();
            let a = fv.focusing / p;
            (
                r,
                fv.moment + lambda * fv.mass - sign * a,
                fv.moment + lambda.abs() * fv.mass + a,
                0.5 * fv.kinetic + 0.5 * fv.moment + lambda * fv.mass - sign * a,
            )
        }
    };
    let _ = q_used;
    let dilation_defect = (fv.kinetic - 2.0 * level - fv.moment).abs() / fv.moment;
    let converged = residual_rel <= cfg.grad_tol;
    let note = match (converged, stalled_at) {
        (true, _) => None,
        (false, Some(it)) => Some(format!("projected descent stalled at iteration {it}")),
        (false, None) => Some("iteration budget exhausted".into()),
    };
    Ok(SolveReport {
        kind: SolveKind::Appendix,
        profile,
        value: delta,
        frequency: lambda,
        mu: if q.is_some() { mu_equation } else { sign },
        level,
        fv,
        residual_rel,
        pohozaev_rel: poh.abs() / poh_scale,
        dilation_defect,
        iterations: its + newton_its,
        newton_iterations: newton_its,
        converged,
        frequency_nonpositive: false,
        multiplier: Some(if q.is_some() { mu_equation } else { multiplier }),
        history,
        note,
    })
}

fn push(history: &mut Vec<IterationRecord>, start: usize, trace: &[(f64, f64)]) {
    for (k, &(theta, rr)) in trace.iter().enumerate() {
        history.push(IterationRecord { iteration: start + k, stage: Stage::Newton, value: theta, residual_rel: rr, step: 1.0 });
    }
}
