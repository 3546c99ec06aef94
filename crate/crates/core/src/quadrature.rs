//! Numerical integration helpers.
//!
//! Two rules live here: an adaptive Gauss-Legendre rule for smooth scalar
//! integrands (used where no antiderivative is available), and uniform
//! trapezoid weights used by the delay integrals, whose integrands are only
//! piecewise smooth.

use crate::error::{Error, Result};

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

const MAX_DEPTH: u32 = 40;
const MAX_PANELS: usize = 20_000;

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Integrates `f` over `[a, b]` by Gauss-Legendre panels, halving any panel
/// whose two halves disagree with it by more than the relative tolerance.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss_legendre(&f, a, b);
    let scale = if whole.is_finite() { whole.abs() } else { 0.0 };
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut state = Refinement {
        worst: 0.0,
        panels: 0,
    };
    let value = refine(&f, a, b, whole, tol, 0, &mut state);
    let worst = state.worst;
    if worst > tol || worst.is_nan() {
        return Err(Error::Quadrature { residual: worst });
    }
    if !value.is_finite() {
        return Err(Error::Quadrature { residual: f64::INFINITY });
    }
    Ok(value)
}

struct Refinement {
    worst: f64,
    panels: usize,
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    state: &mut Refinement,
) -> f64 {
    state.panels += 1;
    let mid = 0.5 * (a + b);
    let left = gauss_legendre(f, a, mid);
    let right = gauss_legendre(f, mid, b);
    let refined = left + right;
    let residual = (refined - whole).abs();
    if residual <= tol {
        return refined;
    }
    if !residual.is_finite() || depth >= MAX_DEPTH || state.panels >= MAX_PANELS {
        state.worst = if residual.is_finite() {
            state.worst.max(residual)
        } else {
            f64::INFINITY
        };
        return refined;
    }
    refine(f, a, mid, left, 0.5 * tol, depth + 1, state)
        + refine(f, mid, b, right, 0.5 * tol, depth + 1, state)
}

/// Composite trapezoid weights for `nodes` equally spaced points spanning an
/// interval of the given length.
pub fn trapezoid_weights(nodes: usize, length: f64) -> Vec<f64> {
    assert!(nodes >= 2, "trapezoid rule needs at least two nodes");
    let h = length / (nodes - 1) as f64;
    let mut w = vec![h; nodes];
    w[0] = 0.5 * h;
    w[nodes - 1] = 0.5 * h;
    w
}
