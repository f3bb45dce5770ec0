//! Descent on Rayleigh-type quotients `N(u)/D(u)` with both terms
//! homogeneous of the same degree.
//!
//! Each step preconditions the quotient gradient with a model of the
//! numerator Hessian, mixes in the previous direction (Polak–Ribière),
//! and minimizes the quotient along the resulting line.

use crate::linalg::dot;

pub(crate) trait QuotientModel {
    fn dim(&self) -> usize;
    /// Common homogeneity degree of numerator and denominator.
    fn degree(&self) -> f64;
    fn numerator(&mut self, u: &[f64]) -> f64;
    fn numerator_grad(&mut self, u: &[f64], g: &mut [f64]);
    fn denominator(&mut self, u: &[f64]) -> f64;
    fn denominator_grad(&mut self, u: &[f64], g: &mut [f64]);
    /// `z ≈ H(u)⁻¹ r` for a positive definite model `H` of the numerator
    /// Hessian.
    fn precondition(&mut self, u: &[f64], r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone)]
pub(crate) struct QuotientOutcome {
    pub u: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn quotient<M: QuotientModel>(m: &mut M, u: &[f64]) -> f64 {
    let d = m.denominator(u);
    if !(d > 0.0) {
        return f64::INFINITY;
    }
    m.numerator(u) / d
}

fn normalize<M: QuotientModel>(m: &mut M, u: &mut [f64]) {
    let d = m.denominator(u);
    if d > 0.0 {
        let s = d.powf(-1.0 / m.degree());
        u.iter_mut().for_each(|x| *x *= s);
    }
}

// Minimizes φ(t) = R(u + t·s) for t > 0; returns (t, φ(t)) or None when no
// decrease was found.
fn line_search<M: QuotientModel>(m: &mut M, u: &[f64], s: &[f64], r0: f64) -> Option<(f64, f64)> {
    let mut trial = vec![0.0; u.len()];
    let mut phi = |m: &mut M, t: f64| {
        for ((x, a), b) in trial.iter_mut().zip(u).zip(s) {
            *x = a + t * b;
        }
        quotient(m, &trial)
    };
    let (mut a, mut b) = (0.0, 1.0);
    let mut fb = phi(m, b);
    if fb >= r0 {
        let mut found = false;
        for _ in 0..40 {
            b *= 0.5;
            fb = phi(m, b);
            if fb < r0 {
                found = true;
                break;
            }
        }
        if !found {
            return None;
        }
    }
    // Expand while still decreasing.
    let mut c = 2.0 * b;
    let mut fc = phi(m, c);
    let mut expansions = 0;
    while fc < fb && expansions < 40 {
        a = b;
        b = c;
        fb = fc;
        c *= 2.0;
        fc = phi(m, c);
        expansions += 1;
    }
    if fc < fb {
        return Some((c, fc));
    }
    // Golden-section refinement on [a, c] around b.
    let g = 0.381_966_011_250_105_1;
    let (mut lo, mut hi) = (a, c);
    let (mut x, mut fx) = (b, fb);
    for _ in 0..30 {
        let left = x - lo > hi - x;
        let y = if left {
            x - g * (x - lo)
        } else {
            x + g * (hi - x)
        };
        let fy = phi(m, y);
        if fy < fx {
            if left {
                hi = x;
            } else {
                lo = x;
            }
            x = y;
            fx = fy;
        } else if left {
            lo = y;
        } else {
            hi = y;
        }
        if hi - lo <= 1e-6 * x.abs().max(1e-300) {
            break;
        }
    }
    Some((x, fx))
}

pub(crate) fn minimize_quotient<M: QuotientModel>(
    m: &mut M,
    u0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> QuotientOutcome {
    let n = m.dim();
    let mut u = u0;
    normalize(m, &mut u);
    let mut r = quotient(m, &u);
    let mut gn = vec![0.0; n];
    let mut gd = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut prev_grad: Vec<f64> = Vec::new();
    let mut prev_z: Vec<f64> = Vec::new();
    let mut dir = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        m.numerator_grad(&u, &mut gn);
        m.denominator_grad(&u, &mut gd);
        for i in 0..n {
            grad[i] = gn[i] - r * gd[i];
        }
        m.precondition(&u, &grad, &mut z);
        let mut beta = 0.0;
        if !prev_grad.is_empty() {
            let num: f64 = grad
                .iter()
                .zip(&z)
                .zip(&prev_z)
                .map(|((g, a), b)| g * (a - b))
                .sum();
            let den = dot(&prev_grad, &prev_z);
            if den > 0.0 {
                beta = (num / den).max(0.0);
            }
        }
        for i in 0..n {
            dir[i] = -z[i] + beta * dir[i];
        }
        if dot(&dir, &grad) >= 0.0 {
            for i in 0..n {
                dir[i] = -z[i];
            }
        }
        prev_grad.clone_from(&grad);
        prev_z.clone_from(&z);
        let step = line_search(m, &u, &dir, r).or_else(|| {
            // Retry along the plain preconditioned gradient.
            for i in 0..n {
                dir[i] = -z[i];
            }
            line_search(m, &u, &dir, r)
        });
        let Some((t, r_new)) = step else {
            return QuotientOutcome {
                u,
                value: r,
                iterations: it,
                residual: 0.0,
                converged: true,
            };
        };
        for i in 0..n {
            u[i] += t * dir[i];
        }
        // Keep the direction in the scale of the normalized iterate.
        let d = m.denominator(&u);
        let s = d.powf(-1.0 / m.degree());
        u.iter_mut().for_each(|x| *x *= s);
        dir.iter_mut().for_each(|x| *x *= s);
        residual = (r - r_new).abs() / r_new.abs();
        r = r_new;
        if residual < tol {
            return QuotientOutcome {
                u,
                value: r,
                iterations: it,
                residual,
                converged: true,
            };
        }
    }
    QuotientOutcome {
        u,
        value: r,
        iterations: max_iter,
        residual,
        converged: false,
    }
}
