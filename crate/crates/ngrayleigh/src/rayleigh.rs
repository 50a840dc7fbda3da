//! Rayleigh-type quotients at a prescribed action level `S`.
//!
//! All of them are closed-form algebra on [`FunctionalValues`]: the grid is
//! integrated once and every identity between the quotients then holds to
//! roundoff.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{FunctionalValues, Parameters};

fn need_mass(fv: &FunctionalValues) -> Result<()> {
    if fv.mass > 0.0 {
        Ok(())
    } else {
        Err(Error::Degenerate("zero field: the mass Q vanishes"))
    }
}

fn need_focusing(fv: &FunctionalValues) -> Result<()> {
    if fv.focusing > 0.0 {
        Ok(())
    } else {
        Err(Error::Degenerate("zero field: the focusing integral A vanishes"))
    }
}

/// `√((T - 2S) L)`, the dilation-optimised value of `½T σ⁰ + ½L σ⁴`-type terms.
fn kinetic_moment(fv: &FunctionalValues, s: f64) -> Result<f64> {
    let excess = fv.kinetic - 2.0 * s;
    if excess < 0.0 {
        return Err(Error::InfeasibleDilation { kinetic: fv.kinetic, level: s });
    }
    Ok((excess * fv.moment).sqrt())
}

/// `Λ^S_μ(u) = (S - ½T - ½L + (μ/p)A - (ν/q)B) / Q`, the frequency for which
/// `S_{λ,μ}(u) = S`.
pub fn big_lambda(fv: &FunctionalValues, s: f64, params: &Parameters) -> Result<f64> {
    need_mass(fv)?;
    Ok((s - fv.energy(params)) / fv.mass)
}

/// The dilation `σ_S(u) = ((T - 2S)/L)^{1/4}` maximising `σ ↦ Λ^S_μ(u_σ)`.
pub fn sigma_s(fv: &FunctionalValues, s: f64) -> Result<f64> {
    let excess = fv.kinetic - 2.0 * s;
    if excess <= 0.0 {
        return Err(Error::InfeasibleDilation { kinetic: fv.kinetic, level: s });
    }
    if !(fv.moment > 0.0) {
        return Err(Error::Degenerate("L(u) = 0: no dilation is defined"));
    }
    Ok((excess / fv.moment).powf(0.25))
}

/// `λ^S_μ(u) = -(√((T-2S)L) - (μ/p)A + (ν/q)B) / Q = max_σ Λ^S_μ(u_σ)`.
pub fn small_lambda(fv: &FunctionalValues, s: f64, params: &Parameters) -> Result<f64> {
    need_mass(fv)?;
    let km = kinetic_moment(fv, s)?;
    Ok(-(km - params.mu() / params.p() * fv.focusing + params.nu() / params.q() * fv.defocusing) / fv.mass)
}

/// `μ^S(u) = (√((T-2S)L) + (ν/q)B) / (A/p)`: the `μ` at which `λ^S_μ(u) = 0`.
pub fn mu_quotient(fv: &FunctionalValues, s: f64, params: &Parameters) -> Result<f64> {
    need_focusing(fv)?;
    let km = kinetic_moment(fv, s)?;
    Ok((km + params.nu() / params.q() * fv.defocusing) / (fv.focusing / params.p()))
}

/// `M^S(u) = (-S + ½T + ½L + (ν/q)B) / (A/p)`, whose minimum over dilations
/// is `μ^S(u)`.
pub fn big_m(fv: &FunctionalValues, s: f64, params: &Parameters) -> Result<f64> {
    need_focusing(fv)?;
    Ok((-s + 0.5 * fv.kinetic + 0.5 * fv.moment + params.nu() / params.q() * fv.defocusing)
        / (fv.focusing / params.p()))
}

/// Amplitude `t_m` minimising `t ↦ μ⁰(t u)`:
/// `t^{q-2} = (p-2) q √(TL) / ((q-p) B)`.
pub fn t_m_stationary(fv: &FunctionalValues, params: &Parameters) -> Result<f64> {
    if !(fv.defocusing > 0.0) {
        return Err(Error::Degenerate("B(u) = 0: the amplitude minimiser is undefined"));
    }
    let (p, q) = (params.p(), params.q());
    let rhs = (p - 2.0) * q * (fv.kinetic * fv.moment).sqrt() / ((q - p) * fv.defocusing);
    Ok(rhs.powf(1.0 / (q - 2.0)))
}

/// Constants of the amplitude-optimised lower bound
/// `μ⁰(t_m u) = C (TL)^{(q-p)/(2(q-2))} B^{(p-2)/(q-2)} / A`.
///
/// `derived_*` follow from minimising `t ↦ μ⁰(tu)` directly and are what the
/// crate uses. `printed_*` are a commonly quoted variant kept for
/// comparison: they carry `q-2` where the minimisation produces `q-p`, and
/// for the Gaussian at `(4, 6)` they give `t⁴ = 9` instead of the correct `18`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub derived_c: f64,
    pub derived_cap: f64,
    pub printed_c: f64,
    pub printed_cap: f64,
}

pub fn bound_constants(params: &Parameters) -> BoundConstants {
    let (p, q) = (params.p(), params.q());
    let e = (p - 2.0) / (q - 2.0);
    BoundConstants {
        derived_c: ((p - 2.0) * q / (q - p)).powf(1.0 / (q - 2.0)),
        derived_cap: p * (q - 2.0) / (q - p) * ((q - p) / ((p - 2.0) * q)).powf(e),
        printed_c: ((p - 2.0) * q / (q - 2.0)).powf(1.0 / (q - 2.0)),
        printed_cap: p * (p + q - 4.0) * ((q - 2.0) / ((p - 2.0) * q)).powf(e),
    }
}

/// `C (TL)^{(q-p)/(2(q-2))} B^{(p-2)/(q-2)} / A` with the derived constant:
/// equals `μ⁰(t_m u)` and bounds `μ⁰(u)` from below. Needs `ν = 1`.
pub fn amplitude_bound(fv: &FunctionalValues, params: &Parameters) -> Result<f64> {
    need_focusing(fv)?;
    let (p, q) = (params.p(), params.q());
    let c = bound_constants(params).derived_cap;
    Ok(c * (fv.kinetic * fv.moment).powf((q - p) / (2.0 * (q - 2.0))) * fv.defocusing.powf((p - 2.0) / (q - 2.0))
        / fv.focusing)
}

/// Values of the five integrals at `t u`, from their homogeneity.
pub fn amplitude_scaled(fv: &FunctionalValues, t: f64, params: &Parameters) -> FunctionalValues {
    let t2 = t * t;
    FunctionalValues {
        kinetic: t2 * fv.kinetic,
        moment: t2 * fv.moment,
        mass: t2 * fv.mass,
        focusing: t.abs().powf(params.p()) * fv.focusing,
        defocusing: t.abs().powf(params.q()) * fv.defocusing,
    }
}

/// Values at the dilation `u_σ(r) = u(r/σ)`, from the dilation laws in two
/// dimensions: `T` is invariant, `L` scales as `σ⁴`, the rest as `σ²`.
pub fn dilation_scaled(fv: &FunctionalValues, sigma: f64) -> FunctionalValues {
    let s2 = sigma * sigma;
    FunctionalValues {
        kinetic: fv.kinetic,
        moment: s2 * s2 * fv.moment,
        mass: s2 * fv.mass,
        focusing: s2 * fv.focusing,
        defocusing: s2 * fv.defocusing,
    }
}
