use super::newton::{polish, Border, Linearization};
use super::{IterationRecord, SolveKind, SolveReport, SolverConfig, Stage};
use crate::error::{config, Error, Result};
use crate::functionals::{action_gradient, el_residual, pow, FunctionalValues, Parameters};
use crate::quadrature::RadialField;
use crate::rayleigh::{big_lambda, mu_quotient, sigma_s, small_lambda};

/// How the gradient stage ended.
enum Exit {
    Converged,
    Handover,
    Stalled,
    MaxIters,
    Infeasible(String),
}

struct GradientRun {
    u: RadialField,
    value: f64,
    residual_rel: f64,
    iterations: usize,
    history: Vec<IterationRecord>,
    exit: Exit,
}

/// Preconditioned gradient iteration on a reduced quotient with dilation
/// renormalisation onto the level `s` at every step.
///
/// `quotient` evaluates the objective from the integrals, `residual` returns
/// the field `g` whose preconditioned negative `-P⁻¹g` is the improving
/// direction. With `maximize` the line search demands a strict increase,
/// otherwise a strict decrease.
fn gradient_stage(
    u0: &RadialField,
    s: f64,
    params: &Parameters,
    cfg: &SolverConfig,
    maximize: bool,
    quotient: impl Fn(&FunctionalValues) -> Result<f64>,
    residual: impl Fn(&RadialField, f64) -> RadialField,
) -> Result<GradientRun> {
    let grid = u0.grid().clone();
    let n = grid.n();
    let pre = grid
        .schrodinger_matrix(&vec![cfg.precond_shift; n])
        .factor()
        .ok_or(Error::Degenerate("singular preconditioner"))?;
    let improves = |new: f64, old: f64| if maximize { new > old } else { new < old };

    let mut u = u0.abs();
    let mut tau = cfg.step;
    let mut history = Vec::new();
    let mut last = (f64::NAN, f64::INFINITY);

    for it in 0..cfg.max_iters {
        let fv = FunctionalValues::evaluate(&u, params);
        let sigma = match sigma_s(&fv, s) {
            Ok(v) => v,
            Err(e) => {
                return Ok(GradientRun {
                    u,
                    value: last.0,
                    residual_rel: last.1,
                    iterations: it,
                    history,
                    exit: Exit::Infeasible(e.to_string()),
                })
            }
        };
        u = u.dilate(sigma)?;
        let fv = FunctionalValues::evaluate(&u, params);
        let value = quotient(&fv)?;
        let g = residual(&u, value);
        let rr = g.l2_norm() / u.l2_norm();
        last = (value, rr);
        history.push(IterationRecord { iteration: it, stage: Stage::Gradient, value, residual_rel: rr, step: tau });

        let done = |exit| GradientRun { u: u.clone(), value, residual_rel: rr, iterations: it + 1, history: history.clone(), exit };
        if rr <= cfg.grad_tol {
            return Ok(done(Exit::Converged));
        }
        if cfg.polish && rr <= cfg.polish_below {
            return Ok(done(Exit::Handover));
        }

        let mut d = g.into_values();
        pre.solve_in_place(&mut d);
        let mut t = (tau / cfg.backtrack).min(8.0 * cfg.step);
        let mut accepted = None;
        while t > 1e-12 {
            let cand = u.with_values(u.values().iter().zip(&d).map(|(a, b)| a - t * b).collect());
            let fc = FunctionalValues::evaluate(&cand, params);
            if fc.kinetic - 2.0 * s > 0.0 {
                if let Ok(vc) = quotient(&fc) {
                    if vc.is_finite() && improves(vc, value) {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            t *= cfg.backtrack;
        }
        match accepted {
            Some(c) => {
                u = c;
                tau = t;
            }
            None => return Ok(done(Exit::Stalled)),
        }
    }
    let it = cfg.max_iters;
    Ok(GradientRun { u, value: last.0, residual_rel: last.1, iterations: it, history, exit: Exit::MaxIters })
}

fn guard_level(s: f64, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if !s.is_finite() {
        return config("action level must be finite");
    }
    if s > 0.0 && !cfg.allow_positive_action {
        return config(format!(
            "S = {s} > 0 needs the explicit opt-in (allow_positive_action): \
             ground states with positive action are not expected to exist"
        ));
    }
    Ok(())
}

/// Largest residual at which a stalled gradient stage is still handed to Newton.
const NEWTON_BASIN: f64 = 1e-3;

/// Fundamental frequency solution at action level `S`: maximises `λ^S_μ`
/// from the Gaussian `e^{-r²/2}` on the grid in `cfg`.
pub fn solve_ffs(params: &Parameters, s: f64, cfg: &SolverConfig) -> Result<SolveReport> {
    guard_level(s, cfg)?;
    let u0 = RadialField::gaussian(&cfg.grid()?);
    solve_ffs_from(params, s, cfg, &u0)
}

/// As [`solve_ffs`], starting from `initial` (and on its grid).
pub fn solve_ffs_from(params: &Parameters, s: f64, cfg: &SolverConfig, initial: &RadialField) -> Result<SolveReport> {
    guard_level(s, cfg)?;
    let run = gradient_stage(
        initial,
        s,
        params,
        cfg,
        true,
        |fv| small_lambda(fv, s, params),
        |u, lam| el_residual(u, lam, params),
    )?;
    let mut history = run.history;
    let (u, lam, newton_its, note) = match run.exit {
        Exit::Converged => (run.u, run.value, 0, None),
        Exit::Infeasible(msg) => (run.u, run.value, 0, Some(msg)),
        Exit::MaxIters if !cfg.polish => (run.u, run.value, 0, Some("iteration budget exhausted".into())),
        _ if cfg.polish && run.residual_rel <= NEWTON_BASIN => {
            let p = polish(run.u, run.value, 30, 1e-2 * cfg.grad_tol, |u, lam| {
                let vals = u.values();
                let fv = FunctionalValues::evaluate(u, params);
                Linearization {
                    residual: el_residual(u, lam, params).into_values(),
                    jac_shift: vals.iter().map(|&v| lam - params.nonlinearity_derivative(v)).collect(),
                    border: Some(Border {
                        col: vals.to_vec(),
                        row: action_gradient(u, lam, params),
                        corner: fv.mass,
                        residual: fv.action(lam, params) - s,
                    }),
                }
            });
            push_newton(&mut history, run.iterations, &p.trace);
            (p.u.abs(), p.theta, p.iterations, None)
        }
        _ => (run.u, run.value, 0, Some("gradient stage stalled outside the Newton basin".into())),
    };

    let fv = FunctionalValues::evaluate(&u, params);
    let value = big_lambda(&fv, s, params).unwrap_or(lam);
    let mut rep = finish(SolveKind::Ffs, u, value, value, params, s, cfg, run.iterations, newton_its, history);
    rep.frequency_nonpositive = rep.value <= 0.0;
    rep.note = note;
    Ok(rep)
}

/// Extremal coefficient `μ̂^S`: minimises `μ^S` from the Gaussian.
pub fn solve_mu_hat(params: &Parameters, s: f64, cfg: &SolverConfig) -> Result<SolveReport> {
    guard_level(s, cfg)?;
    let u0 = RadialField::gaussian(&cfg.grid()?);
    solve_mu_hat_from(params, s, cfg, &u0)
}

/// As [`solve_mu_hat`], starting from `initial`. The `μ` in `params` is
/// ignored; the result solves the stationary equation with `λ = 0`,
/// `μ = μ̂^S`.
pub fn solve_mu_hat_from(params: &Parameters, s: f64, cfg: &SolverConfig, initial: &RadialField) -> Result<SolveReport> {
    guard_level(s, cfg)?;
    let run = gradient_stage(
        initial,
        s,
        params,
        cfg,
        false,
        |fv| mu_quotient(fv, s, params),
        |u, mu| el_residual(u, 0.0, &params.set_mu(mu)),
    )?;
    let mut history = run.history;
    let (u, mu, newton_its, note) = match run.exit {
        Exit::Converged => (run.u, run.value, 0, None),
        Exit::Infeasible(msg) => (run.u, run.value, 0, Some(msg)),
        Exit::MaxIters if !cfg.polish => (run.u, run.value, 0, Some("iteration budget exhausted".into())),
        _ if cfg.polish && run.residual_rel <= NEWTON_BASIN => {
            let p = polish(run.u, run.value, 30, 1e-2 * cfg.grad_tol, |u, mu| {
                let pm = params.set_mu(mu);
                let vals = u.values();
                let fv = FunctionalValues::evaluate(u, &pm);
                Linearization {
                    residual: el_residual(u, 0.0, &pm).into_values(),
                    jac_shift: vals.iter().map(|&v| -pm.nonlinearity_derivative(v)).collect(),
                    border: Some(Border {
                        col: vals.iter().map(|&v| -pow(v.abs(), pm.p() - 2.0) * v).collect(),
                        row: action_gradient(u, 0.0, &pm),
                        corner: -fv.focusing / pm.p(),
                        residual: fv.action(0.0, &pm) - s,
                    }),
                }
            });
            push_newton(&mut history, run.iterations, &p.trace);
            (p.u.abs(), p.theta, p.iterations, None)
        }
        _ => (run.u, run.value, 0, Some("gradient stage stalled outside the Newton basin".into())),
    };

    let fv = FunctionalValues::evaluate(&u, params);
    let value = mu_quotient(&fv, s, params).unwrap_or(mu);
    let pm = params.set_mu(value);
    let mut rep = finish(SolveKind::MuHat, u, value, 0.0, &pm, s, cfg, run.iterations, newton_its, history);
    rep.note = note;
    Ok(rep)
}

fn push_newton(history: &mut Vec<IterationRecord>, start: usize, trace: &[(f64, f64)]) {
    for (k, &(theta, rr)) in trace.iter().enumerate() {
        history.push(IterationRecord { iteration: start + k, stage: Stage::Newton, value: theta, residual_rel: rr, step: 1.0 });
    }
}

/// Assembles a report for a profile solving the equation at
/// (`frequency`, `params.mu`) on level `s`.
#[allow(clippy::too_many_arguments)]
pub(super) fn finish(
    kind: SolveKind,
    u: RadialField,
    value: f64,
    frequency: f64,
    params: &Parameters,
    s: f64,
    cfg: &SolverConfig,
    iterations: usize,
    newton_iterations: usize,
    history: Vec<IterationRecord>,
) -> SolveReport {
    let fv = FunctionalValues::evaluate(&u, params);
    let residual_rel = el_residual(&u, frequency, params).l2_norm() / u.l2_norm();
    let pohozaev_rel = fv.pohozaev_defect(frequency, params).abs() / fv.pohozaev_scale(frequency, params);
    let dilation_defect = (fv.kinetic - 2.0 * s - fv.moment).abs() / fv.moment;
    let converged = residual_rel <= cfg.grad_tol && dilation_defect <= 1e-6;
    SolveReport {
        kind,
        profile: u,
        value,
        frequency,
        mu: params.mu(),
        level: s,
        fv,
        residual_rel,
        pohozaev_rel,
        dilation_defect,
        iterations: iterations + newton_iterations,
        newton_iterations,
        converged,
        frequency_nonpositive: false,
        multiplier: None,
        history,
        note: None,
    }
}
