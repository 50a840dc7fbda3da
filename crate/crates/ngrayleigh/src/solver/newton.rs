//! Newton polish for the discrete stationary equations, optionally bordered
//! by one scalar unknown and one scalar constraint.

use crate::quadrature::{weighted_dot, RadialField};

/// Linearisation at the current iterate.
pub(crate) struct Linearization {
    /// Pointwise residual `g`.
    pub residual: Vec<f64>,
    /// The Jacobian is `-Δ_r + r² + diag(jac_shift)`.
    pub jac_shift: Vec<f64>,
    pub border: Option<Border>,
}

/// Extra unknown `θ` and constraint `c(u, θ) = 0`.
pub(crate) struct Border {
    /// `∂g/∂θ`.
    pub col: Vec<f64>,
    /// `∂c/∂u`.
    pub row: Vec<f64>,
    /// `∂c/∂θ`.
    pub corner: f64,
    /// `c(u, θ)`.
    pub residual: f64,
}

pub(crate) struct Polished {
    pub u: RadialField,
    pub theta: f64,
    pub residual_rel: f64,
    pub iterations: usize,
    /// `(θ, residual)` after each accepted step.
    pub trace: Vec<(f64, f64)>,
}

fn relative(u: &RadialField, g: &[f64]) -> f64 {
    let w = u.grid().weights();
    (weighted_dot(w, g, g) / weighted_dot(w, u.values(), u.values())).sqrt()
}

/// Runs Newton from `(u, θ)` and returns the iterate with the smallest
/// relative residual. Stops after `max_steps`, once the residual is below
/// `target`, or when a step fails to reduce it.
pub(crate) fn polish(
    mut u: RadialField,
    mut theta: f64,
    max_steps: usize,
    target: f64,
    linearize: impl Fn(&RadialField, f64) -> Linearization,
) -> Polished {
    let grid = u.grid().clone();
    let mut lin = linearize(&u, theta);
    let mut rr = relative(&u, &lin.residual);
    let mut best = Polished { u: u.clone(), theta, residual_rel: rr, iterations: 0, trace: vec![] };
    let mut trace = Vec::new();

    for k in 1..=max_steps {
        if rr <= target {
            break;
        }
        let Some(lu) = grid.schrodinger_matrix(&lin.jac_shift).factor() else { break };
        let neg: Vec<f64> = lin.residual.iter().map(|v| -v).collect();
        let (du, dtheta) = match &lin.border {
            None => (lu.solve(&neg), 0.0),
            Some(b) => match lu.solve_bordered(&b.col, &b.row, b.corner, &neg, -b.residual) {
                Some(x) => x,
                None => break,
            },
        };
        let vals: Vec<f64> = u.values().iter().zip(&du).map(|(a, d)| a + d).collect();
        if vals.iter().any(|v| !v.is_finite()) || !dtheta.is_finite() {
            break;
        }
        u = u.with_values(vals);
        theta += dtheta;
        lin = linearize(&u, theta);
        let next = relative(&u, &lin.residual);
        trace.push((theta, next));
        let stalled = next > 0.5 * rr && next <= 10.0 * target;
        rr = next;
        if rr < best.residual_rel {
            best = Polished { u: u.clone(), theta, residual_rel: rr, iterations: k, trace: vec![] };
        } else if rr > 1e3 * best.residual_rel {
            break;
        }
        if stalled {
            break;
        }
    }
    best.trace = trace;
    best.iterations = best.trace.len();
    best
}
