//! Simultaneous root finding (Aberth–Ehrlich iteration).

use alloc::vec;
use alloc::vec::Vec;

use crate::domain::C64;
use crate::math::{cis, ln, exp, modulus, TAU};
use crate::poly::Poly1;

/// Relative backward-error target `|p(z)| ≤ tol · Σ |a_k| |z|^k`.
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 500;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("root finder did not converge after {iterations} iterations on polynomial {coeffs:?}")]
    NoConvergence { iterations: usize, coeffs: Vec<C64> },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
}

fn eval_with_derivative(p: &[C64], z: C64) -> (C64, C64) {
    let mut v = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

fn backward_scale(p: &[C64], z: C64) -> f64 {
    let r = modulus(z);
    let mut acc = 0.0;
    for c in p.iter().rev() {
        acc = acc * r + modulus(*c);
    }
    acc
}

/// All complex roots of `coeffs[0] + coeffs[1] t + …`, with multiplicity.
///
/// High-order coefficients below `1e-14 · max|a_k|` are dropped first; exact zero
/// roots are deflated before iterating.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>, RootError> {
    let p = Poly1 { coeffs: coeffs.to_vec() }.trimmed(1e-14);
    if p.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
        return Err(RootError::ZeroPolynomial);
    }
    let zeros = p.coeffs.iter().take_while(|c| c.re == 0.0 && c.im == 0.0).count();
    let q = &p.coeffs[zeros..];
    let mut roots = vec![C64::new(0.0, 0.0); zeros];
    let n = q.len() - 1;
    match n {
        0 => return Ok(roots),
        1 => {
            roots.push(-q[0] / q[1]);
            return Ok(roots);
        }
        _ => {}
    }

    // Initial guesses on a circle whose radius is the geometric mean of the root moduli.
    let radius = exp((ln(modulus(q[0])) - ln(modulus(q[n]))) / n as f64);
    let mut z: Vec<C64> =
        (0..n).map(|k| cis(TAU * k as f64 / n as f64 + 0.4) * radius).collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, d) = eval_with_derivative(q, z[k]);
            if modulus(v) <= RESIDUAL_TOL * backward_scale(q, z[k]) {
                done[k] = true;
                continue;
            }
            all_done = false;
            let ratio = v / d;
            let mut repulsion = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff.re != 0.0 || diff.im != 0.0 {
                        repulsion += C64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * repulsion;
            let step = if d.re == 0.0 && d.im == 0.0 {
                // stationary point: nudge off it
                C64::new(1e-8 * (1.0 + modulus(z[k])), 0.0)
            } else if denom.re == 0.0 && denom.im == 0.0 {
                ratio
            } else {
                ratio / denom
            };
            z[k] -= step;
        }
        if all_done {
            roots.extend(z);
            return Ok(roots);
        }
    }
    // Final check: the last sweep may have converged every root.
    if z.iter().all(|r| {
        let (v, _) = eval_with_derivative(q, *r);
        modulus(v) <= RESIDUAL_TOL * backward_scale(q, *r)
    }) {
        roots.extend(z);
        return Ok(roots);
    }
    Err(RootError::NoConvergence { iterations: MAX_ITERATIONS, coeffs: coeffs.to_vec() })
}
