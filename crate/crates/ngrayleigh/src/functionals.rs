//! The five base integrals and the scalar quantities built from them.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::quadrature::RadialField;

/// Spatial dimension. Enters only through the dilation laws and the linear
/// ground eigenvalue.
pub const DIMENSION: f64 = 2.0;

/// Exponents and coefficients of the nonlinearity `-μ|u|^{p-2}u + ν|u|^{q-2}u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    p: f64,
    q: f64,
    mu: f64,
    nu: f64,
}

impl Parameters {
    /// Production parameters: `2 < p < q`, `μ > 0`, `ν = 1`.
    pub fn new(p: f64, q: f64, mu: f64) -> Result<Self> {
        let par = Self::validation(p, q, mu, 1.0)?;
        if !(mu > 0.0) {
            return config(format!("focusing coefficient must be positive, got mu = {mu}"));
        }
        Ok(par)
    }

    /// Validation runs may switch either nonlinearity off: `μ ≥ 0`, `ν ∈ {0, 1}`.
    pub fn validation(p: f64, q: f64, mu: f64, nu: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p > 2.0 && q > p) {
            return config(format!("exponent ordering violated: need 2 < p < q, got p = {p}, q = {q}"));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return config(format!("focusing coefficient must be finite and nonnegative, got mu = {mu}"));
        }
        if nu != 0.0 && nu != 1.0 {
            return config(format!("defocusing coefficient must be 0 or 1, got nu = {nu}"));
        }
        Ok(Self { p, q, mu, nu })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Same exponents and `ν`, different `μ`.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::validation(self.p, self.q, mu, self.nu)
    }

    /// `μ` changed without re-validation, for solvers that treat it as an unknown.
    pub(crate) fn set_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    /// `N(v) = μ|v|^{p-2}v - ν|v|^{q-2}v`.
    #[inline]
    pub fn nonlinearity(&self, v: f64) -> f64 {
        let a = v.abs();
        (self.mu * pow(a, self.p - 2.0) - self.nu * pow(a, self.q - 2.0)) * v
    }

    /// `N'(v) = μ(p-1)|v|^{p-2} - ν(q-1)|v|^{q-2}`.
    #[inline]
    pub fn nonlinearity_derivative(&self, v: f64) -> f64 {
        let a = v.abs();
        self.mu * (self.p - 1.0) * pow(a, self.p - 2.0) - self.nu * (self.q - 1.0) * pow(a, self.q - 2.0)
    }
}

/// `a^e` for `a ≥ 0`, taking the integer-power path when it applies.
#[inline]
pub(crate) fn pow(a: f64, e: f64) -> f64 {
    if e == e.trunc() && e.abs() < 64.0 {
        a.powi(e as i32)
    } else {
        a.powf(e)
    }
}

/// `(T, L, Q, A, B)`: every quotient in the crate is algebra on these five.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValues {
    /// `T = ∫|∇u|²`.
    pub kinetic: f64,
    /// `L = ∫|x|²|u|²`.
    pub moment: f64,
    /// `Q = ½∫|u|²`.
    pub mass: f64,
    /// `A = ∫|u|^p`.
    pub focusing: f64,
    /// `B = ∫|u|^q`.
    pub defocusing: f64,
}

impl FunctionalValues {
    pub fn evaluate(u: &RadialField, params: &Parameters) -> Self {
        let g = u.grid();
        let du = u.derivative();
        let (mut t, mut l, mut q, mut a, mut b) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (((&w, &r), &v), &d) in g.weights().iter().zip(g.nodes()).zip(u.values()).zip(du.values()) {
            let av = v.abs();
            t += w * d * d;
            l += w * r * r * v * v;
            q += w * v * v;
            a += w * pow(av, params.p);
            b += w * pow(av, params.q);
        }
        Self { kinetic: t, moment: l, mass: 0.5 * q, focusing: a, defocusing: b }
    }

    /// `S_{λ,μ} = ½T + ½L + λQ - (μ/p)A + (ν/q)B`.
    pub fn action(&self, lambda: f64, params: &Parameters) -> f64 {
        self.energy(params) + lambda * self.mass
    }

    /// `H_μ = ½T + ½L - (μ/p)A + (ν/q)B`.
    pub fn energy(&self, params: &Parameters) -> f64 {
        0.5 * self.kinetic + 0.5 * self.moment - params.mu / params.p * self.focusing
            + params.nu / params.q * self.defocusing
    }

    /// Pohozaev functional divided by the dimension:
    /// `L + λQ - (μ/p)A + (ν/q)B`, zero at every solution.
    pub fn pohozaev_defect(&self, lambda: f64, params: &Parameters) -> f64 {
        self.moment + lambda * self.mass - params.mu / params.p * self.focusing
            + params.nu / params.q * self.defocusing
    }

    /// Sum of the magnitudes of the Pohozaev terms, for relative defects.
    pub fn pohozaev_scale(&self, lambda: f64, params: &Parameters) -> f64 {
        self.moment + lambda.abs() * self.mass + params.mu / params.p * self.focusing
            + params.nu / params.q * self.defocusing
    }

    /// `‖u‖_Σ² = 2Q + L + T`.
    pub fn sigma_norm_sq(&self) -> f64 {
        2.0 * self.mass + self.moment + self.kinetic
    }
}

/// `S_{λ,μ}(u)`, evaluated from scratch.
pub fn action(u: &RadialField, lambda: f64, params: &Parameters) -> f64 {
    FunctionalValues::evaluate(u, params).action(lambda, params)
}

/// `‖u‖_Σ²`.
pub fn sigma_norm_sq(u: &RadialField) -> f64 {
    let g = u.grid();
    let du = u.derivative();
    g.weights()
        .iter()
        .zip(g.nodes())
        .zip(u.values())
        .zip(du.values())
        .map(|(((w, r), v), d)| w * ((1.0 + r * r) * v * v + d * d))
        .sum()
}

/// `g = (-Δ_r + r² + λ)u - μ|u|^{p-2}u + ν|u|^{q-2}u`, the pointwise residual
/// of the stationary equation (the `L²` gradient of the action).
pub fn el_residual(u: &RadialField, lambda: f64, params: &Parameters) -> RadialField {
    let lap = u.laplacian();
    let g = u.grid();
    let vals = g
        .nodes()
        .iter()
        .zip(u.values())
        .zip(lap.values())
        .map(|((r, &v), l)| -l + (r * r + lambda) * v - params.nonlinearity(v))
        .collect();
    u.with_values(vals)
}

/// `‖g‖ / ‖u‖` in the weighted `L²` norm.
pub fn relative_residual(u: &RadialField, lambda: f64, params: &Parameters) -> f64 {
    el_residual(u, lambda, params).l2_norm() / u.l2_norm()
}

/// Exact gradient of the discrete action `Σ w (½(Du)² + ½r²u² + ½λu² - F(u))`
/// with respect to the nodal values. Differs from `W g` only through the
/// discretisation of the kinetic term.
pub(crate) fn action_gradient(u: &RadialField, lambda: f64, params: &Parameters) -> Vec<f64> {
    let g = u.grid();
    let w = g.weights();
    let du = u.derivative();
    let wdu: Vec<f64> = w.iter().zip(du.values()).map(|(w, d)| w * d).collect();
    let mut out = g.d1.apply_transpose(&wdu);
    for ((o, (&wi, &r)), &v) in out.iter_mut().zip(w.iter().zip(g.nodes())).zip(u.values()) {
        *o += wi * ((r * r + lambda) * v - params.nonlinearity(v));
    }
    out
}
