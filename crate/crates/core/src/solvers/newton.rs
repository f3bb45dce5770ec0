//! Damped Newton iteration for the convex energies `Σ h^N|g|^p − ⟨b, u⟩`
//! with some node values held fixed.

use crate::linalg::{pcg, Amg};

use super::stencil::Stencil;

pub(crate) struct ConvexProblem<'a> {
    pub stencil: &'a Stencil,
    pub p: f64,
    pub map: &'a [u32],
    pub list: &'a [u32],
    /// Full-lattice vector carrying the fixed values.
    pub base: Vec<f64>,
    /// Linear term on the unknowns.
    pub linear: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct ConvexOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative Newton decrement at exit.
    pub residual: f64,
    pub converged: bool,
}

impl ConvexProblem<'_> {
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut full = self.base.clone();
        for (i, &k) in self.list.iter().enumerate() {
            full[k as usize] = x[i];
        }
        full
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let full = self.scatter(x);
        self.stencil.energy(&full, self.p) - crate::linalg::dot(&self.linear, x)
    }

    fn regularization(&self, full: &[f64]) -> f64 {
        let cells = self.stencil.cells().0.len().max(1) as f64;
        let mean = self.stencil.energy(full, 2.0) / (self.stencil.weight() * cells);
        let scale = if mean > 0.0 { mean } else { 1.0 };
        if self.p > 2.0 {
            1e-4 * scale
        } else {
            1e-10 * scale
        }
    }

    pub fn minimize(&self, x0: Vec<f64>, tol: f64, max_iter: usize) -> ConvexOutcome {
        let n = self.list.len();
        let mut x = x0;
        let mut j = self.objective(&x);
        let mut gfull = vec![0.0; self.base.len()];
        let mut residual = f64::INFINITY;
        for it in 1..=max_iter {
            let full = self.scatter(&x);
            self.stencil.energy_gradient(&full, self.p, &mut gfull);
            let g: Vec<f64> = self
                .list
                .iter()
                .zip(&self.linear)
                .map(|(&k, b)| gfull[k as usize] - b)
                .collect();
            let h = self
                .stencil
                .hessian(&full, self.p, self.regularization(&full), self.map, n);
            let amg = Amg::new(&h);
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let mut d = vec![0.0; n];
            let lin_tol = if self.p == 2.0 { 1e-11 } else { 1e-6 };
            pcg(&h, &amg, &rhs, &mut d, lin_tol, 500);
            let slope = crate::linalg::dot(&g, &d);
            if slope >= 0.0 {
                return ConvexOutcome {
                    x,
                    iterations: it,
                    residual: 0.0,
                    converged: true,
                };
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..50 {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                let jt = self.objective(&trial);
                if jt <= j + 1e-4 * t * slope {
                    accepted = Some((trial, jt));
                    break;
                }
                t *= 0.5;
            }
            let Some((xn, jn)) = accepted else {
                return ConvexOutcome {
                    x,
                    iterations: it,
                    residual,
                    converged: true,
                };
            };
            residual = -slope / j.abs().max(f64::MIN_POSITIVE);
            let change = (j - jn).abs() / jn.abs().max(f64::MIN_POSITIVE);
            x = xn;
            j = jn;
            if self.p == 2.0 || residual < tol || change < 1e-3 * tol {
                return ConvexOutcome {
                    x,
                    iterations: it,
                    residual,
                    converged: true,
                };
            }
        }
        ConvexOutcome {
            x,
            iterations: max_iter,
            residual,
            converged: false,
        }
    }
}
