use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use ngrayleigh::atlas::{check_nerav, extremal_curve, gaussian_bound, mu_hat_zero, s_of_mu, sweep_branch_from};
use ngrayleigh::functionals::Parameters;
use ngrayleigh::propagator::stability_experiment;
use ngrayleigh::quadrature::{RadialField, RadialGrid};
use ngrayleigh::solver::{
    petviashvili, solve_constrained_appendix, solve_ffs, solve_ffs_from, solve_mu_hat, verify_solution, AppendixVariant,
    SolveReport, Stage,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Mode, RunConfig, VariantName};
use crate::output::{read_columns, OutputDir};

/// Tolerance on profile nodes when reloading a grid.
const NODE_TOL: f64 = 1e-12;

fn need_params(cfg: &RunConfig) -> Result<Parameters> {
    cfg.explicit_params()?.ok_or_else(|| anyhow!("problem.mu is required for this command"))
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing key {what}"))
}

#[derive(Serialize)]
struct ReportJson<'a> {
    mode: Mode,
    kind: ngrayleigh::solver::SolveKind,
    p: f64,
    q: f64,
    mu: f64,
    nu: f64,
    value: f64,
    frequency: f64,
    level: f64,
    kinetic: f64,
    moment: f64,
    mass: f64,
    focusing: f64,
    defocusing: f64,
    residual_rel: f64,
    pohozaev_rel: f64,
    dilation_defect: f64,
    iterations: usize,
    newton_iterations: usize,
    converged: bool,
    frequency_nonpositive: bool,
    multiplier: Option<f64>,
    note: Option<&'a str>,
    n: usize,
    r_max: f64,
    wall_time_s: f64,
    version: &'static str,
    config: &'a RunConfig,
}

fn write_profile(out: &mut OutputDir, rep: &SolveReport) -> Result<()> {
    let g = rep.profile.grid();
    let rows = g.nodes().iter().zip(rep.profile.values()).map(|(&r, &u)| vec![r, u]);
    out.csv("profile.csv", &["r", "u"], rows)?;
    let hist = rep.history.iter().map(|h| {
        vec![h.iteration as f64, if h.stage == Stage::Gradient { 0.0 } else { 1.0 }, h.value, h.residual_rel, h.step]
    });
    out.csv("history.csv", &["iteration", "newton", "value", "residual_rel", "step"], hist)
}

pub fn solve(cfg: &RunConfig, out: &mut OutputDir) -> Result<String> {
    let block = cfg.solve.as_ref().context("missing [solve] block")?;
    let started = Instant::now();
    let pb = &cfg.problem;
    let (rep, nu) = match block.mode {
        Mode::Ffs => (solve_ffs(&need_params(cfg)?, need(block.level, "solve.level")?, &cfg.solver)?, 1.0),
        Mode::Muhat => {
            // μ^S does not involve μ; any admissible value will do.
            let params = Parameters::new(pb.p, pb.q, pb.mu.unwrap_or(1.0))?;
            (solve_mu_hat(&params, need(block.level, "solve.level")?, &cfg.solver)?, 1.0)
        }
        Mode::FixedLambda => (petviashvili(&need_params(cfg)?, need(block.lambda, "solve.lambda")?, &cfg.solver)?, 1.0),
        Mode::Appendix => {
            let variant = match need(block.variant, "solve.variant")? {
                VariantName::Defocusing => AppendixVariant::Defocusing,
                VariantName::Focusing => AppendixVariant::Focusing,
                VariantName::Combined => AppendixVariant::Combined { q: pb.q },
            };
            let nu = if matches!(variant, AppendixVariant::Combined { .. }) { 1.0 } else { 0.0 };
            (solve_constrained_appendix(pb.p, need(block.lambda, "solve.lambda")?, variant, &cfg.solver)?, nu)
        }
    };
    write_profile(out, &rep)?;
    let g = rep.profile.grid();
    out.json(
        "report.json",
        &ReportJson {
            mode: block.mode,
            kind: rep.kind,
            p: pb.p,
            q: pb.q,
            mu: rep.mu,
            nu,
            value: rep.value,
            frequency: rep.frequency,
            level: rep.level,
            kinetic: rep.fv.kinetic,
            moment: rep.fv.moment,
            mass: rep.fv.mass,
            focusing: rep.fv.focusing,
            defocusing: rep.fv.defocusing,
            residual_rel: rep.residual_rel,
            pohozaev_rel: rep.pohozaev_rel,
            dilation_defect: rep.dilation_defect,
            iterations: rep.iterations,
            newton_iterations: rep.newton_iterations,
            converged: rep.converged,
            frequency_nonpositive: rep.frequency_nonpositive,
            multiplier: rep.multiplier,
            note: rep.note.as_deref(),
            n: g.n(),
            r_max: g.r_max(),
            wall_time_s: started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
        },
    )?;
    let line = format!(
        "{:?}: value {:.12} (lambda {:.12}, mu {:.12}, S {:.6}), residual {:.2e}, pohozaev {:.2e}, {} iterations{}",
        rep.kind,
        rep.value,
        rep.frequency,
        rep.mu,
        rep.level,
        rep.residual_rel,
        rep.pohozaev_rel,
        rep.iterations,
        if rep.frequency_nonpositive { ", frequency not positive" } else { "" }
    );
    rep.require_converged().map(|_| line).map_err(Into::into)
}

pub fn atlas(cfg: &RunConfig, out: &mut OutputDir) -> Result<String> {
    let block = cfg.atlas.clone().context("missing [atlas] block")?;
    let pb = &cfg.problem;
    let probe = Parameters::new(pb.p, pb.q, pb.mu.unwrap_or(1.0))?;
    let m0 = mu_hat_zero(&probe, &cfg.solver)?;
    let mu = match (pb.mu, pb.mu_over_mu_hat_zero) {
        (Some(mu), _) => mu,
        (None, Some(f)) => f * m0,
        (None, None) => bail!("atlas needs problem.mu or problem.mu_over_mu_hat_zero"),
    };
    if mu <= m0 {
        bail!("mu = {mu} does not exceed mu_hat^0 = {m0}: the branch needs mu above the extremal value at S = 0");
    }
    let params = Parameters::new(pb.p, pb.q, mu)?;
    let threshold = s_of_mu(&params, &cfg.solver)?;
    let levels = match &block.levels {
        Some(l) if l.is_empty() => bail!("atlas.levels is empty"),
        Some(l) => l.clone(),
        None => {
            if block.points < 2 {
                bail!("atlas.points must be at least 2, got {}", block.points);
            }
            let s0 = threshold.s + block.offset;
            let k = (block.points - 1) as f64;
            // The last level is exactly 0, not -0.
            (0..block.points).map(|i| if i + 1 == block.points { 0.0 } else { s0 * (1.0 - i as f64 / k) }).collect()
        }
    };
    let branch = sweep_branch_from(&params, &levels, &cfg.solver, &threshold)?;
    let nerav = check_nerav(&branch);
    let extremal = extremal_curve(&params, &block.extremal_levels, &cfg.solver)?;
    let lambda_star = match branch.lambda_star {
        Some(l) => l,
        None => ngrayleigh::atlas::lambda_star(&params, &cfg.solver)?,
    };

    out.csv(
        "branch.csv",
        &["S", "lambda_hat", "Q", "H", "action_check", "residual_rel"],
        branch.points.iter().map(|p| vec![p.s, p.lambda_hat, p.mass, p.energy, p.action_check, p.residual_rel]),
    )?;
    out.csv("extremal.csv", &["S", "mu_hat_S"], extremal.iter().map(|&(s, m)| vec![s, m]))?;
    out.csv(
        "nerav.csv",
        &["S1", "S2", "lower", "increment", "upper", "violation"],
        nerav.pairs.iter().map(|p| vec![p.s1, p.s2, p.lower, p.increment, p.upper, p.violation]),
    )?;
    out.json(
        "report.json",
        &json!({
            "mu": mu,
            "mu_hat_zero": m0,
            "gaussian_bound": gaussian_bound(&params, 0.0, &cfg.solver)?,
            "s_of_mu": threshold.s,
            "s_of_mu_bracket": [threshold.bracket.0, threshold.bracket.1],
            "lambda_star": lambda_star,
            "lambda_increasing": branch.lambda_increasing(),
            "mass_decreasing": branch.mass_decreasing(),
            "nerav_all_hold": nerav.all_hold,
            "nerav_max_violation": nerav.max_violation,
            "points": branch.points.len(),
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
        }),
    )?;
    let line = format!(
        "mu_hat^0 = {m0:.12}, S(mu) = {:.9}, lambda_hat* = {lambda_star:.12}; branch of {} points {}, sandwich {}",
        threshold.s,
        branch.points.len(),
        if branch.lambda_increasing() { "increasing" } else { "NOT increasing" },
        if nerav.all_hold { "holds" } else { "violated" }
    );
    if !branch.lambda_increasing() || !nerav.all_hold {
        bail!("{line}");
    }
    Ok(line)
}

/// Reads `profile.csv` back onto the grid it was written from.
pub fn load_profile(path: &Path) -> Result<RadialField> {
    if !path.is_file() {
        bail!("profile {} does not exist", path.display());
    }
    let cols = read_columns(path, &["r", "u"])?;
    let (r, u) = (&cols[0], &cols[1]);
    if r.is_empty() {
        bail!("profile {} has no rows", path.display());
    }
    let r_max = r[0] + r[r.len() - 1];
    let grid = Arc::new(RadialGrid::new(r.len(), r_max)?);
    if grid.nodes().iter().zip(r).any(|(a, b)| (a - b).abs() > NODE_TOL * r_max) {
        bail!("profile {} is not on a cell-centred grid", path.display());
    }
    Ok(RadialField::new(grid, u.clone())?)
}

fn sibling_report(profile: &Path) -> Result<Value> {
    let path = profile.with_file_name("report.json");
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn field(v: &Value, key: &str) -> Result<f64> {
    v.get(key).and_then(Value::as_f64).with_context(|| format!("report.json has no numeric {key}"))
}

pub fn stability(cfg: &RunConfig, out: &mut OutputDir) -> Result<String> {
    let block = cfg.stability.as_ref().context("missing [stability] block")?;
    let params = need_params(cfg)?;
    let rep = match (&block.profile, &cfg.solve) {
        (Some(path), _) => {
            let u = load_profile(path)?;
            let level = field(&sibling_report(path)?, "level")?;
            solve_ffs_from(&params, level, &cfg.solver, &u)?
        }
        (None, Some(s)) if s.mode == Mode::Ffs => solve_ffs(&params, need(s.level, "solve.level")?, &cfg.solver)?,
        _ => bail!("stability needs stability.profile or a [solve] block with mode = \"ffs\""),
    }
    .require_converged()?;
    let mut summary = Vec::new();
    for (i, &delta) in block.deltas.iter().enumerate() {
        let tr = stability_experiment(&rep, delta, &cfg.propagator, &params)?;
        let name = if block.deltas.len() == 1 { "trace.csv".to_string() } else { format!("trace_{i}.csv") };
        let rows = (0..tr.len()).map(|k| {
            vec![tr.times[k], tr.mass[k], tr.energy[k], tr.lambda_conserved[k], tr.sigma_norm_sq[k], tr.orbital_dist[k]]
        });
        out.csv(&name, &["t", "mass", "energy", "lambda_conserved", "sigma_norm_sq", "orbital_dist"], rows)?;
        summary.push(json!({
            "file": name,
            "delta": delta,
            "sup_orbital_dist": tr.sup_orbital_dist(),
            "bound": 10.0 * delta * tr.reference_norm,
            "reference_norm": tr.reference_norm,
            "mass_drift_rel": tr.mass_drift_rel(),
            "energy_drift": tr.energy_drift(),
            "lambda_drift_rel": tr.lambda_drift_rel(),
            "sigma_growth": tr.sigma_growth(),
            "steps": tr.steps,
        }));
    }
    out.json(
        "report.json",
        &json!({
            "lambda": rep.frequency,
            "level": rep.level,
            "runs": summary,
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
        }),
    )?;
    let parts: Vec<String> = summary
        .iter()
        .map(|s| format!("delta {}: sup dist {:.3e}", s["delta"], s["sup_orbital_dist"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    Ok(format!("lambda_hat = {:.12}; {}", rep.frequency, parts.join(", ")))
}

pub fn verify(cfg: &RunConfig, out: &mut OutputDir) -> Result<String> {
    let block = cfg.verify.as_ref().context("missing [verify] block")?;
    let u = load_profile(&block.profile)?;
    let report = sibling_report(&block.profile).ok();
    let from_report = |key: &str| report.as_ref().map(|r| field(r, key)).transpose();
    let lambda = match block.lambda {
        Some(l) => l,
        None => from_report("frequency")?.context("no lambda given and no report.json beside the profile")?,
    };
    let level = match block.level {
        Some(s) => s,
        None => from_report("level")?.context("no level given and no report.json beside the profile")?,
    };
    let mu = match block.mu.or(cfg.problem.mu) {
        Some(m) => m,
        None => from_report("mu")?.context("no mu given")?,
    };
    let nu = from_report("nu")?.unwrap_or(1.0);
    let params = Parameters::validation(cfg.problem.p, cfg.problem.q, mu, nu)?;
    let v = verify_solution(&u, lambda, level, &params);
    let passes = v.passes(cfg.solver.grad_tol);
    let mut agreement = json!(null);
    if let Some(r) = &report {
        let keys = ["residual_rel", "pohozaev_rel", "dilation_defect"];
        let ours = [v.residual_rel, v.pohozaev_rel, v.dilation_defect];
        agreement = keys
            .iter()
            .zip(ours)
            .map(|(k, x)| (k.to_string(), json!({ "reported": r.get(*k), "recomputed": x })))
            .collect::<serde_json::Map<_, _>>()
            .into();
    }
    out.json("verify.json", &json!({ "verification": v, "passes": passes, "lambda": lambda, "level": level, "mu": mu, "reported": agreement }))?;
    let line = format!(
        "residual {:.2e}, pohozaev {:.2e}, dilation {:.2e}, action {:.2e}, monotone {}, nonnegative {}",
        v.residual_rel, v.pohozaev_rel, v.dilation_defect, v.action_defect_rel, v.monotone, v.nonnegative
    );
    if passes {
        Ok(line)
    } else {
        bail!("verification failed: {line}")
    }
}
