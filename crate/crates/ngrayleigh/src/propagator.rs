//! Split-step Fourier integration of `iψ_t = -Δψ + |x|²ψ - μ|ψ|^{p-2}ψ + ν|ψ|^{q-2}ψ`
//! on a periodic box, with conservation monitors and the Σ-distance to a
//! gauge orbit.
//!
//! The pointwise subflow `iψ_t = V(|ψ|)ψ` leaves `|ψ|` unchanged, so its exact
//! solution is a phase rotation and Strang splitting needs no inner solve.
//! Consecutive half phases between two monitor samples are fused.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::functionals::{pow, FunctionalValues, Parameters};
use crate::quadrature::{CartesianGrid, ComplexField2D};
use crate::rayleigh::big_lambda;
use crate::solver::SolveReport;

/// Largest admissible time step.
pub const MAX_DT: f64 = 1e-2;
/// Smallest box half-width `propagate` accepts.
pub const MIN_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between monitor samples.
    pub monitor_stride: usize,
    /// Points per axis.
    pub m: usize,
    pub half_width: f64,
    /// Seed of the perturbation field in [`stability_experiment`].
    pub seed: u64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_final: 10.0, monitor_stride: 10, m: 256, half_width: 10.0, seed: 20240917 }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return config(format!("time step must be positive, got dt = {}", self.dt));
        }
        if self.dt > MAX_DT {
            return config(format!("time step dt = {} exceeds the limit {MAX_DT}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return config(format!("horizon must be positive, got t_final = {}", self.t_final));
        }
        if self.monitor_stride == 0 {
            return config("monitor_stride must be at least 1");
        }
        Ok(())
    }

    /// Smallest step count reaching `t_final`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) * (1.0 - 1e-12)).ceil() as usize
    }

    pub fn grid(&self) -> Result<Arc<CartesianGrid>> {
        Ok(Arc::new(CartesianGrid::new(self.m, self.half_width)?))
    }
}

/// Plans and scratch for transforms on one grid.
struct Spectral {
    grid: Arc<CartesianGrid>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    /// Transposition target.
    work: Vec<Complex64>,
    /// `|k|²` per mode; symmetric under transposition so either layout works.
    k2: Vec<f64>,
    /// `1 + |x|²` per node.
    weight: Vec<f64>,
}

impl Spectral {
    fn new(grid: &Arc<CartesianGrid>) -> Self {
        let m = grid.m();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let k = grid.wavenumbers();
        let c = grid.coords();
        let mut k2 = Vec::with_capacity(grid.len());
        let mut weight = Vec::with_capacity(grid.len());
        for j in 0..m {
            for i in 0..m {
                k2.push(k[i] * k[i] + k[j] * k[j]);
                weight.push(1.0 + c[i] * c[i] + c[j] * c[j]);
            }
        }
        let zero = Complex64::new(0.0, 0.0);
        Self { grid: grid.clone(), fwd, inv, scratch: vec![zero; len], work: vec![zero; grid.len()], k2, weight }
    }

    /// Unnormalised 2D transform of `v` into `self.work`, in transposed layout.
    fn forward_to_work(&mut self, v: &mut [Complex64]) {
        let m = self.grid.m();
        self.fwd.process_with_scratch(v, &mut self.scratch);
        transpose::transpose(v, &mut self.work, m, m);
        self.fwd.process_with_scratch(&mut self.work, &mut self.scratch);
    }

    /// Inverse of [`Spectral::forward_to_work`] up to the factor `m²`.
    fn inverse_from_work(&mut self, v: &mut [Complex64]) {
        let m = self.grid.m();
        self.inv.process_with_scratch(&mut self.work, &mut self.scratch);
        transpose::transpose(&self.work, v, m, m);
        self.inv.process_with_scratch(v, &mut self.scratch);
    }

    fn forward(&mut self, v: &mut [Complex64]) {
        self.forward_to_work(v);
        v.copy_from_slice(&self.work);
    }

    #[cfg(test)]
    fn inverse(&mut self, v: &mut [Complex64]) {
        self.work.copy_from_slice(v);
        self.inverse_from_work(v);
    }

    fn spectral_factor(&self) -> f64 {
        let m = self.grid.m() as f64;
        self.grid.cell_area() / (m * m)
    }

    fn functionals(&mut self, psi: &[Complex64], params: &Parameters) -> FunctionalValues {
        let da = self.grid.cell_area();
        let (hp, hq) = (0.5 * params.p(), 0.5 * params.q());
        let (mut l, mut q, mut a, mut b) = (0.0, 0.0, 0.0, 0.0);
        for (z, w) in psi.iter().zip(&self.weight) {
            let n2 = z.norm_sqr();
            q += n2;
            l += (w - 1.0) * n2;
            a += pow(n2, hp);
            b += pow(n2, hq);
        }
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        let t: f64 = hat.iter().zip(&self.k2).map(|(z, k)| k * z.norm_sqr()).sum();
        FunctionalValues {
            kinetic: t * self.spectral_factor(),
            moment: l * da,
            mass: 0.5 * q * da,
            focusing: a * da,
            defocusing: b * da,
        }
    }

    fn sigma_norm_sq(&mut self, psi: &[Complex64]) -> f64 {
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        self.sigma_norm_sq_with(psi, &hat)
    }

    fn sigma_norm_sq_with(&self, psi: &[Complex64], hat: &[Complex64]) -> f64 {
        let x: f64 = psi.iter().zip(&self.weight).map(|(z, w)| w * z.norm_sqr()).sum();
        let k: f64 = hat.iter().zip(&self.k2).map(|(z, k)| k * z.norm_sqr()).sum();
        x * self.grid.cell_area() + k * self.spectral_factor()
    }

    /// `min_θ ‖ψ - e^{iθ}φ‖_Σ` given `φ` and its transform.
    fn orbital_distance(&mut self, psi: &[Complex64], phi: &[Complex64], phi_hat: &[Complex64]) -> f64 {
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        let x: Complex64 = psi.iter().zip(phi).zip(&self.weight).map(|((a, b), w)| a * b.conj() * w).sum();
        let k: Complex64 = hat.iter().zip(phi_hat).zip(&self.k2).map(|((a, b), w)| a * b.conj() * w).sum();
        let inner = x * self.grid.cell_area() + k * self.spectral_factor();
        let rot = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
        let diff: Vec<Complex64> = psi.iter().zip(phi).map(|(a, b)| a - rot * b).collect();
        let diff_hat: Vec<Complex64> = hat.iter().zip(phi_hat).map(|(a, b)| a - rot * b).collect();
        self.sigma_norm_sq_with(&diff, &diff_hat).max(0.0).sqrt()
    }
}

/// Strang integrator for a fixed grid, step and nonlinearity.
pub struct SplitStep {
    spectral: Spectral,
    params: Parameters,
    dt: f64,
    /// `e^{-i dt |k|²} / m²`.
    kinetic_phase: Vec<Complex64>,
    /// `e^{-i τ |x|²}` for `τ = dt/2` and `τ = dt`.
    trap_half: Vec<Complex64>,
    trap_full: Vec<Complex64>,
    /// `|ψ|^{p-2}` and `|ψ|^{q-2}` as powers of `|ψ|²`.
    powers: (Power, Power),
    /// Nonlinear phase angles of the current substep.
    angles: Vec<f64>,
}

/// `s ↦ s^e` on `s = |ψ|²`, with multiplications when `2e` is a small integer.
#[derive(Debug, Clone, Copy)]
enum Power {
    Halves(u32),
    Real(f64),
}

impl Power {
    fn new(e: f64) -> Self {
        let twice = 2.0 * e;
        if twice == twice.round() && (0.0..=16.0).contains(&twice) {
            Power::Halves(twice as u32)
        } else {
            Power::Real(e)
        }
    }

    #[inline]
    fn of(self, s: f64) -> f64 {
        match self {
            Power::Halves(k) => {
                let mut r = if k % 2 == 1 { s.sqrt() } else { 1.0 };
                for _ in 0..k / 2 {
                    r *= s;
                }
                r
            }
            Power::Real(e) => s.powf(e),
        }
    }
}

const COS: [f64; 6] = [1.0, -1.0 / 2.0, 1.0 / 24.0, -1.0 / 720.0, 1.0 / 40320.0, -1.0 / 3628800.0];
const SIN: [f64; 6] = [1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0, 1.0 / 362880.0, -1.0 / 39916800.0];
/// Below this the Taylor polynomials above are exact in double precision.
const SERIES_RANGE: f64 = 0.1;

/// `e^{-ix}` by truncated series, valid for `|x| ≤ SERIES_RANGE`.
#[inline(always)]
fn expi_neg_series(x: f64) -> Complex64 {
    let y = x * x;
    let c = ((((COS[5] * y + COS[4]) * y + COS[3]) * y + COS[2]) * y + COS[1]) * y + COS[0];
    let s = x * (((((SIN[5] * y + SIN[4]) * y + SIN[3]) * y + SIN[2]) * y + SIN[1]) * y + SIN[0]);
    Complex64::new(c, -s)
}

fn expi_neg(x: f64) -> Complex64 {
    if x.abs() <= SERIES_RANGE {
        expi_neg_series(x)
    } else {
        let (s, c) = x.sin_cos();
        Complex64::new(c, -s)
    }
}

impl SplitStep {
    pub fn new(grid: &Arc<CartesianGrid>, params: &Parameters, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= MAX_DT) {
            return config(format!("time step must lie in (0, {MAX_DT}], got {dt}"));
        }
        let spectral = Spectral::new(grid);
        let norm = 1.0 / grid.len() as f64;
        let kinetic_phase = spectral.k2.iter().map(|k| Complex64::from_polar(norm, -dt * k)).collect();
        let trap = |tau: f64| spectral.weight.iter().map(|w| Complex64::from_polar(1.0, -tau * (w - 1.0))).collect();
        let (trap_half, trap_full) = (trap(0.5 * dt), trap(dt));
        let powers = (Power::new(0.5 * (params.p() - 2.0)), Power::new(0.5 * (params.q() - 2.0)));
        let angles = vec![0.0; grid.len()];
        Ok(Self { spectral, params: *params, dt, kinetic_phase, trap_half, trap_full, powers, angles })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `ψ ← ψ·exp(-iτ(|x|² - μ|ψ|^{p-2} + ν|ψ|^{q-2}))`.
    fn phase(&mut self, psi: &mut [Complex64], full: bool) {
        let (mu, nu) = (self.params.mu(), self.params.nu());
        let (ea, eb) = self.powers;
        let (tau, trap) = if full { (self.dt, &self.trap_full) } else { (0.5 * self.dt, &self.trap_half) };
        // Angles first so the rotation loop below stays branch-free.
        let mut largest = 0.0f64;
        for (z, a) in psi.iter().zip(self.angles.iter_mut()) {
            let n2 = z.norm_sqr();
            *a = tau * (nu * eb.of(n2) - mu * ea.of(n2));
            largest = largest.max(a.abs());
        }
        if largest <= SERIES_RANGE {
            for ((z, t), &a) in psi.iter_mut().zip(trap).zip(&self.angles) {
                *z *= t * expi_neg_series(a);
            }
        } else {
            for ((z, t), &a) in psi.iter_mut().zip(trap).zip(&self.angles) {
                *z *= t * expi_neg(a);
            }
        }
    }

    fn kinetic(&mut self, psi: &mut [Complex64]) {
        self.spectral.forward_to_work(psi);
        for (z, f) in self.spectral.work.iter_mut().zip(&self.kinetic_phase) {
            *z *= f;
        }
        self.spectral.inverse_from_work(psi);
    }

    fn check(&self, psi: &ComplexField2D) -> Result<()> {
        if psi.grid().same_as(&self.spectral.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// One Strang step.
    pub fn step(&mut self, psi: &mut ComplexField2D) -> Result<()> {
        self.advance(psi, 1)
    }

    /// `steps` Strang steps with interior half phases fused.
    pub fn advance(&mut self, psi: &mut ComplexField2D, steps: usize) -> Result<()> {
        self.check(psi)?;
        if steps == 0 {
            return Ok(());
        }
        let v = psi.values_mut();
        self.phase(v, false);
        for s in 0..steps {
            self.kinetic(v);
            self.phase(v, s + 1 < steps);
        }
        Ok(())
    }

    pub fn functionals(&mut self, psi: &ComplexField2D) -> Result<FunctionalValues> {
        self.check(psi)?;
        Ok(self.spectral.functionals(psi.values(), &self.params))
    }
}

/// One Strang step of size `dt`.
pub fn strang_step(psi: &ComplexField2D, dt: f64, params: &Parameters) -> Result<ComplexField2D> {
    let mut out = psi.clone();
    SplitStep::new(psi.grid(), params, dt)?.step(&mut out)?;
    Ok(out)
}

/// `(T, L, Q, A, B)` of a Cartesian state, with `T` from the spectral gradient.
pub fn functional_values_2d(psi: &ComplexField2D, params: &Parameters) -> FunctionalValues {
    Spectral::new(psi.grid()).functionals(psi.values(), params)
}

/// `‖ψ‖_Σ² = ∫(1+|x|²)|ψ|² + |∇ψ|²`.
pub fn sigma_norm_sq_2d(psi: &ComplexField2D) -> f64 {
    Spectral::new(psi.grid()).sigma_norm_sq(psi.values())
}

/// `min_θ ‖ψ - e^{iθ}φ‖_Σ`, attained at `θ = arg⟨ψ, φ⟩_Σ`.
pub fn orbital_distance(psi: &ComplexField2D, phi: &ComplexField2D) -> Result<f64> {
    if !psi.grid().same_as(phi.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut sp = Spectral::new(psi.grid());
    let mut phi_hat = phi.values().to_vec();
    sp.forward(&mut phi_hat);
    Ok(sp.orbital_distance(psi.values(), phi.values(), &phi_hat))
}

/// A standing wave `e^{iλt}φ` to measure against.
#[derive(Debug, Clone)]
pub struct Reference {
    pub profile: ComplexField2D,
    pub lambda: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StabilityTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub lambda_conserved: Vec<f64>,
    pub sigma_norm_sq: Vec<f64>,
    pub orbital_dist: Vec<f64>,
    /// Level `S` used in `Λ^S_μ`.
    pub level: f64,
    pub dt: f64,
    pub steps: usize,
    /// `‖φ‖_Σ` of the reference orbit.
    pub reference_norm: f64,
    /// `δ‖φ‖_Σ` for perturbation experiments.
    pub perturbation_norm: Option<f64>,
}

fn max_abs_dev(v: &[f64]) -> f64 {
    v.first().map_or(0.0, |&v0| v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max))
}

impl StabilityTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sup_orbital_dist(&self) -> f64 {
        self.orbital_dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn mass_drift_rel(&self) -> f64 {
        max_abs_dev(&self.mass) / self.mass[0].abs()
    }

    /// `max_t |H(t) - H(0)|`.
    pub fn energy_drift(&self) -> f64 {
        max_abs_dev(&self.energy)
    }

    pub fn lambda_drift_rel(&self) -> f64 {
        max_abs_dev(&self.lambda_conserved) / self.lambda_conserved[0].abs()
    }

    /// `max_t ‖ψ(t)‖_Σ² / ‖ψ(0)‖_Σ²`.
    pub fn sigma_growth(&self) -> f64 {
        self.sigma_norm_sq.iter().copied().fold(0.0, f64::max) / self.sigma_norm_sq[0]
    }

    pub fn all_finite(&self) -> bool {
        [&self.times, &self.mass, &self.energy, &self.lambda_conserved, &self.sigma_norm_sq, &self.orbital_dist]
            .iter()
            .all(|s| s.len() == self.times.len() && s.iter().all(|x| x.is_finite()))
    }
}

/// Integrates `ψ0` to `cfg.t_final`, sampling monitors every `monitor_stride`
/// steps. Without a reference the orbit of `ψ0` itself is used with `λ = 0`.
pub fn propagate(
    psi0: &ComplexField2D,
    cfg: &PropagatorConfig,
    params: &Parameters,
    reference: Option<&Reference>,
) -> Result<StabilityTrace> {
    cfg.validate()?;
    if psi0.grid().half_width() < MIN_HALF_WIDTH {
        return config(format!(
            "box half-width {} is below {MIN_HALF_WIDTH}: decay containment not assured",
            psi0.grid().half_width()
        ));
    }
    let own;
    let reference = match reference {
        Some(r) => {
            if !r.profile.grid().same_as(psi0.grid()) {
                return Err(Error::GridMismatch);
            }
            r
        }
        None => {
            own = Reference { profile: psi0.clone(), lambda: 0.0 };
            &own
        }
    };
    let mut stepper = SplitStep::new(psi0.grid(), params, cfg.dt)?;
    let phi = reference.profile.values();
    let mut phi_hat = phi.to_vec();
    stepper.spectral.forward(&mut phi_hat);
    let reference_norm = stepper.spectral.sigma_norm_sq_with(phi, &phi_hat).sqrt();

    let fv0 = stepper.functionals(psi0)?;
    let level = fv0.action(reference.lambda, params);
    let steps = cfg.steps();
    let mut trace = StabilityTrace { level, dt: cfg.dt, steps, reference_norm, ..Default::default() };
    let mut psi = psi0.clone();
    let mut done = 0;
    let mut sigma0 = f64::NAN;
    loop {
        let t = done as f64 * cfg.dt;
        let fv = stepper.functionals(&psi)?;
        let sigma = fv.sigma_norm_sq();
        if done == 0 {
            sigma0 = sigma;
        }
        if !(sigma.is_finite() && fv.focusing.is_finite() && fv.defocusing.is_finite()) || sigma > 1e8 * sigma0 {
            return Err(Error::BlowUp { time: t });
        }
        trace.times.push(t);
        trace.mass.push(fv.mass);
        trace.energy.push(fv.energy(params));
        trace.lambda_conserved.push(big_lambda(&fv, level, params)?);
        trace.sigma_norm_sq.push(sigma);
        trace.orbital_dist.push(stepper.spectral.orbital_distance(psi.values(), phi, &phi_hat));
        if done == steps {
            break;
        }
        let chunk = cfg.monitor_stride.min(steps - done);
        stepper.advance(&mut psi, chunk)?;
        done += chunk;
    }
    Ok(trace)
}

/// Smooth unit-Σ-norm sum of complex Gaussian bumps, fixed by `seed`.
pub fn perturbation_field(grid: &Arc<CartesianGrid>, seed: u64) -> ComplexField2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, Complex64)> = (0..6)
        .map(|_| {
            let cx = rng.gen_range(-2.0..2.0);
            let cy = rng.gen_range(-2.0..2.0);
            let w: f64 = rng.gen_range(0.6..1.4);
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (cx, cy, 0.5 / (w * w), a)
        })
        .collect();
    let mut f = ComplexField2D::from_fn(grid, |x, y| {
        bumps.iter().map(|&(cx, cy, s, a)| a * (-s * ((x - cx).powi(2) + (y - cy).powi(2))).exp()).sum()
    });
    let n = sigma_norm_sq_2d(&f).sqrt();
    for z in f.values_mut() {
        *z /= n;
    }
    f
}

/// Propagates `φ + δ‖φ‖_Σ w` against the orbit of the maximiser `φ` of
/// `report`; `w` comes from [`perturbation_field`] with `cfg.seed`.
pub fn stability_experiment(
    report: &SolveReport,
    delta: f64,
    cfg: &PropagatorConfig,
    params: &Parameters,
) -> Result<StabilityTrace> {
    if !report.converged {
        return Err(Error::NotConverged("stability experiment needs a converged profile".into()));
    }
    if !(report.frequency >= 0.0) {
        return Err(Error::OutOfDomain(format!("frequency {} is negative", report.frequency)));
    }
    if !(0.0..=0.1).contains(&delta) {
        return config(format!("perturbation size must lie in [0, 0.1], got {delta}"));
    }
    cfg.validate()?;
    let grid = cfg.grid()?;
    let phi = report.profile.to_cartesian(&grid)?;
    let norm = sigma_norm_sq_2d(&phi).sqrt();
    let w = perturbation_field(&grid, cfg.seed);
    let amp = delta * norm;
    let values = phi.values().iter().zip(w.values()).map(|(a, b)| a + amp * b).collect();
    let psi0 = ComplexField2D::new(grid, values)?;
    let mut trace = propagate(&psi0, cfg, params, Some(&Reference { profile: phi, lambda: report.frequency }))?;
    trace.perturbation_norm = Some(amp);
    Ok(trace)
}
