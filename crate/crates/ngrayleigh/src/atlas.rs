//! Parameter-space maps: `μ̂⁰`, the extremal curve `S ↦ μ̂^S` and its inverse
//! `S(μ)`, the endpoint frequency `λ̂*_μ`, and branches `S ↦ λ̂^S_μ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::functionals::{FunctionalValues, Parameters};
use crate::quadrature::RadialField;
use crate::rayleigh::mu_quotient;
use crate::solver::{solve_ffs, solve_ffs_from, solve_mu_hat, solve_mu_hat_from, SolveReport, SolverConfig};

/// `μ̂⁰ = inf μ⁰`. Fails unless the minimiser converged, is positive and
/// does not exceed the Gaussian certificate `μ⁰(e^{-r²/2})`.
pub fn mu_hat_zero(params: &Parameters, cfg: &SolverConfig) -> Result<f64> {
    let rep = solve_mu_hat(params, 0.0, cfg)?.require_converged()?;
    let bound = gaussian_bound(params, 0.0, cfg)?;
    if !(rep.value > 0.0) {
        return Err(Error::NotConverged(format!("mu_hat^0 = {} is not positive", rep.value)));
    }
    if rep.value > bound * (1.0 + 1e-12) {
        return Err(Error::NotConverged(format!("mu_hat^0 = {} exceeds the Gaussian bound {bound}", rep.value)));
    }
    Ok(rep.value)
}

/// `μ^S` of the Gaussian: an upper bound for `μ̂^S`.
pub fn gaussian_bound(params: &Parameters, s: f64, cfg: &SolverConfig) -> Result<f64> {
    let g = RadialField::gaussian(&cfg.grid()?);
    mu_quotient(&FunctionalValues::evaluate(&g, params), s, params)
}

/// `μ̂^S` from `count` randomly widened and scaled Gaussians.
pub fn mu_hat_multistart(params: &Parameters, s: f64, cfg: &SolverConfig, count: usize, seed: u64) -> Result<Vec<f64>> {
    let grid = cfg.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let amp: f64 = rng.gen_range(0.5..2.0);
            let width: f64 = rng.gen_range(0.7..1.5);
            let wobble: f64 = rng.gen_range(-0.3..0.3);
            let u0 = RadialField::from_fn(&grid, |r| {
                amp * (-0.5 * r * r / (width * width)).exp() * (1.0 + wobble * (-r * r).exp())
            });
            Ok(solve_mu_hat_from(params, s, cfg, &u0)?.require_converged()?.value)
        })
        .collect()
}

/// Samples of the extremal curve `S ↦ μ̂^S`, warm-started in the given order.
pub fn extremal_curve(params: &Parameters, levels: &[f64], cfg: &SolverConfig) -> Result<Vec<(f64, f64)>> {
    let mut start = RadialField::gaussian(&cfg.grid()?);
    let mut out = Vec::with_capacity(levels.len());
    for &s in levels {
        let rep = solve_mu_hat_from(params, s, cfg, &start)?.require_converged()?;
        out.push((s, rep.value));
        start = rep.profile;
    }
    Ok(out)
}

/// Result of inverting the extremal curve.
#[derive(Debug, Clone)]
pub struct ActionThreshold {
    /// Midpoint of the final bracket.
    pub s: f64,
    /// `(lo, hi)` with `μ̂^{lo} > μ ≥ μ̂^{hi}`.
    pub bracket: (f64, f64),
    pub evaluations: usize,
    /// Minimiser at the upper end of the bracket; solves the stationary equation
    /// with `λ = 0` and `μ` within the bracket error.
    pub profile: RadialField,
}

/// Relative bracket width used by [`s_of_mu`].
pub const S_OF_MU_TOL: f64 = 1e-7;

/// `S(μ)`: the level where `μ̂^{S(μ)} = μ`, by bracket doubling from `S = -1`
/// and bisection (the extremal curve decreases). Bracket width
/// `≤ S_OF_MU_TOL · max(1, |S|)`.
pub fn s_of_mu(params: &Parameters, cfg: &SolverConfig) -> Result<ActionThreshold> {
    s_of_mu_with_tol(params, cfg, S_OF_MU_TOL)
}

pub fn s_of_mu_with_tol(params: &Parameters, cfg: &SolverConfig, tol: f64) -> Result<ActionThreshold> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return config(format!("bisection tolerance must lie in (0, 1e-4], got {tol}"));
    }
    let mu = params.mu();
    let zero = solve_mu_hat(params, 0.0, cfg)?.require_converged()?;
    if mu <= zero.value {
        return Err(Error::OutOfDomain(format!(
            "mu = {mu} does not exceed mu_hat^0 = {}: no level S <= 0 has mu_hat^S = mu",
            zero.value
        )));
    }
    let mut evaluations = 1;
    let mut hi = (0.0, zero.profile);
    let mut lo_s = -1.0;
    let lo_prof = loop {
        let rep = solve_mu_hat_from(params, lo_s, cfg, &hi.1)?.require_converged()?;
        evaluations += 1;
        if rep.value > mu {
            break rep.profile;
        }
        hi = (lo_s, rep.profile);
        lo_s *= 2.0;
        if lo_s < -1e12 {
            return Err(Error::NotConverged("bracket doubling did not reach mu_hat^S > mu".into()));
        }
    };
    let mut lo = (lo_s, lo_prof);
    while hi.0 - lo.0 > tol * hi.0.abs().max(1.0) {
        let mid = 0.5 * (lo.0 + hi.0);
        let start = if mid - lo.0 < hi.0 - mid { &lo.1 } else { &hi.1 };
        let rep = solve_mu_hat_from(params, mid, cfg, start)?.require_converged()?;
        evaluations += 1;
        if rep.value > mu {
            lo = (mid, rep.profile);
        } else {
            hi = (mid, rep.profile);
        }
    }
    Ok(ActionThreshold { s: 0.5 * (lo.0 + hi.0), bracket: (lo.0, hi.0), evaluations, profile: hi.1 })
}

fn check_above_threshold(params: &Parameters, cfg: &SolverConfig) -> Result<f64> {
    let m0 = mu_hat_zero(params, cfg)?;
    if params.mu() < m0 * (1.0 - 1e-9) {
        return Err(Error::OutOfDomain(format!(
            "mu = {} is below mu_hat^0 = {m0}: positive frequencies are unattainable",
            params.mu()
        )));
    }
    Ok(m0)
}

/// `λ̂*_μ`, the fundamental frequency at `S = 0`.
pub fn lambda_star(params: &Parameters, cfg: &SolverConfig) -> Result<f64> {
    Ok(lambda_star_report(params, cfg)?.value)
}

pub fn lambda_star_report(params: &Parameters, cfg: &SolverConfig) -> Result<SolveReport> {
    check_above_threshold(params, cfg)?;
    solve_ffs(params, 0.0, cfg)?.require_converged()
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub s: f64,
    pub lambda_hat: f64,
    pub mass: f64,
    pub energy: f64,
    /// `|S_{λ̂,μ}(û) - S|` relative to the action terms.
    pub action_check: f64,
    pub residual_rel: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub params: Parameters,
    pub points: Vec<BranchPoint>,
    pub s_of_mu: Option<f64>,
    pub lambda_star: Option<f64>,
}

impl Branch {
    pub fn lambda_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].lambda_hat > w[0].lambda_hat)
    }

    pub fn mass_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].mass < w[0].mass)
    }
}

/// Solves each level of `levels` (strictly increasing, inside `(S(μ), 0]`)
/// with a warm start from the previous maximiser.
pub fn sweep_branch(params: &Parameters, levels: &[f64], cfg: &SolverConfig) -> Result<Branch> {
    if levels.is_empty() {
        return config("empty action grid");
    }
    check_above_threshold(params, cfg)?;
    let threshold = s_of_mu(params, cfg)?;
    sweep_branch_from(params, levels, cfg, &threshold)
}

/// As [`sweep_branch`] with a precomputed threshold.
pub fn sweep_branch_from(params: &Parameters, levels: &[f64], cfg: &SolverConfig, threshold: &ActionThreshold) -> Result<Branch> {
    if levels.is_empty() {
        return config("empty action grid");
    }
    if levels.windows(2).any(|w| !(w[1] > w[0])) {
        return config("action grid must be strictly increasing");
    }
    if let Some(&bad) = levels.iter().find(|&&s| s > 0.0 || s <= threshold.s) {
        return Err(Error::OutOfDomain(format!(
            "action level {bad} outside (S(mu), 0] = ({}, 0]",
            threshold.s
        )));
    }
    let mut start = threshold.profile.clone();
    let mut points = Vec::with_capacity(levels.len());
    for &s in levels {
        let rep = solve_ffs_from(params, s, cfg, &start)?;
        if !rep.converged {
            return Err(Error::NotConverged(format!(
                "branch point S = {s}: residual {:.3e}{}",
                rep.residual_rel,
                rep.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
            )));
        }
        let v = crate::solver::verify_solution(&rep.profile, rep.value, s, params);
        start = rep.profile.clone();
        points.push(BranchPoint {
            s,
            lambda_hat: rep.value,
            mass: rep.fv.mass,
            energy: rep.fv.energy(params),
            action_check: v.action_defect_rel,
            residual_rel: rep.residual_rel,
            report: rep,
        });
    }
    let lambda_star = match points.last() {
        Some(p) if p.s == 0.0 => Some(p.lambda_hat),
        _ => None,
    };
    Ok(Branch { params: *params, points, s_of_mu: Some(threshold.s), lambda_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeravPair {
    pub s1: f64,
    pub s2: f64,
    /// `(S₂-S₁)/Q(û^{S₁})`.
    pub lower: f64,
    /// `λ̂^{S₂} - λ̂^{S₁}`.
    pub increment: f64,
    /// `(S₂-S₁)/Q(û^{S₂})`.
    pub upper: f64,
    /// Amount by which the sandwich fails, zero if it holds.
    pub violation: f64,
    /// `violation ≤ 1e-4 (S₂-S₁)`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeravReport {
    pub pairs: Vec<NeravPair>,
    pub max_violation: f64,
    pub all_hold: bool,
}

/// Checks `(S₂-S₁)/Q₁ ≤ λ̂₂ - λ̂₁ ≤ (S₂-S₁)/Q₂` on adjacent branch points,
/// to `1e-4 (S₂-S₁)`. Pairs with equal levels are skipped.
pub fn check_nerav(branch: &Branch) -> NeravReport {
    let mut pairs = Vec::new();
    for w in branch.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let ds = b.s - a.s;
        if ds == 0.0 {
            continue;
        }
        let lower = ds / a.mass;
        let upper = ds / b.mass;
        let increment = b.lambda_hat - a.lambda_hat;
        let violation = (lower - increment).max(increment - upper).max(0.0);
        pairs.push(NeravPair { s1: a.s, s2: b.s, lower, increment, upper, violation, holds: violation <= 1e-4 * ds.abs() });
    }
    let max_violation = pairs.iter().map(|p| p.violation).fold(0.0, f64::max);
    let all_hold = pairs.iter().all(|p| p.holds);
    NeravReport { pairs, max_violation, all_hold }
}
