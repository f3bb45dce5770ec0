use crate::bounds::Exponents;
use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::linalg::{lobpcg, pcg, Amg, Csr, LobpcgOptions};

use super::quotient::{minimize_quotient, QuotientModel};
use super::stencil::{unknown_map, Stencil};
use super::{BoundaryKind, Field, Quantity, SolveOptions, SolveReport};

/// Minimizer of `t ↦ Σ |u_i − t|^q` (equal node weights).
pub(crate) fn best_constant(u: &[f64], q: f64) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    if q == 2.0 {
        return u.iter().sum::<f64>() / u.len() as f64;
    }
    if q == 1.0 {
        let mut s = u.to_vec();
        s.sort_by(f64::total_cmp);
        return s[(s.len() - 1) / 2];
    }
    // φ(t) = Σ sign(t − u)|t − u|^{q−1} is increasing.
    let phi = |t: f64| {
        u.iter()
            .map(|&x| (t - x).signum() * (t - x).abs().powf(q - 1.0))
            .sum::<f64>()
    };
    let (mut lo, mut hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct NeumannModel<'a> {
    stencil: &'a Stencil,
    map: Vec<u32>,
    list: Vec<u32>,
    p: f64,
    q: f64,
    shift: f64,
    full: Vec<f64>,
    gfull: Vec<f64>,
    precond: Option<(Csr, Amg)>,
    calls: usize,
}

impl NeumannModel<'_> {
    fn scatter(&mut self, u: &[f64]) {
        for (i, &k) in self.list.iter().enumerate() {
            self.full[k as usize] = u[i];
        }
    }

    fn spread(&self, u: &[f64]) -> (f64, f64) {
        let t = best_constant(u, self.q);
        let s = self.stencil.weight() * u.iter().map(|x| (x - t).abs().powf(self.q)).sum::<f64>();
        (t, s)
    }
}

impl QuotientModel for NeumannModel<'_> {
    fn dim(&self) -> usize {
        self.list.len()
    }

    fn degree(&self) -> f64 {
        self.p
    }

    fn numerator(&mut self, u: &[f64]) -> f64 {
        self.scatter(u);
        self.stencil.energy(&self.full, self.p)
    }

    fn numerator_grad(&mut self, u: &[f64], g: &mut [f64]) {
        self.scatter(u);
        self.stencil
            .energy_gradient(&self.full, self.p, &mut self.gfull);
        for (i, &k) in self.list.iter().enumerate() {
            g[i] = self.gfull[k as usize];
        }
    }

    fn denominator(&mut self, u: &[f64]) -> f64 {
        self.spread(u).1.powf(self.p / self.q)
    }

    // The optimal constant is stationary in t, so its variation drops out.
    fn denominator_grad(&mut self, u: &[f64], g: &mut [f64]) {
        let (t, s) = self.spread(u);
        let c = self.p * s.powf(self.p / self.q - 1.0) * self.stencil.weight();
        for (gi, &x) in g.iter_mut().zip(u) {
            let d = x - t;
            *gi = if d == 0.0 {
                0.0
            } else {
                c * d.abs().powf(self.q - 2.0) * d
            };
        }
    }

    fn precondition(&mut self, u: &[f64], r: &[f64], z: &mut [f64]) {
        let stale = self.precond.is_none() || (self.p != 2.0 && self.calls % 5 == 0);
        self.calls += 1;
        if stale {
            self.scatter(u);
            let cells = self.stencil.cells().0.len().max(1) as f64;
            let mean = self.stencil.energy(&self.full, 2.0) / (self.stencil.weight() * cells);
            let reg = if self.p > 2.0 {
                1e-3 * mean
            } else {
                1e-8 * mean
            };
            let h = self.stencil.hessian(
                &self.full,
                self.p,
                reg.max(f64::MIN_POSITIVE),
                &self.map,
                self.list.len(),
            );
            let diag = h.diagonal();
            let mean_diag = diag.iter().sum::<f64>() / diag.len() as f64;
            let h = h.shifted(self.shift * mean_diag);
            let amg = Amg::new(&h);
            self.precond = Some((h, amg));
        }
        let (h, amg) = self.precond.as_ref().unwrap();
        z.iter_mut().for_each(|v| *v = 0.0);
        pcg(h, amg, r, z, 1e-4, 200);
    }
}

/// Discrete Poincaré–Wirtinger constant
/// `μ_{p,q}(Ω) = min ‖∇u‖_p^p / ‖u − t_u‖_q^p` over non-constant fields, with
/// free-boundary differences (only edges with both ends inside count) and
/// `t_u` the best constant approximation of `u` in `L^q`.
///
/// `(2,2)` is the first non-zero Neumann eigenvalue (LOBPCG deflated against
/// constants); other pairs use preconditioned descent started from that
/// eigenfunction.
pub fn neumann_constant(
    domain: &GridDomain,
    e: &Exponents,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if e.n() != domain.dim() {
        return Err(Error::invalid(
            "exponent dimension does not match the domain",
        ));
    }
    let (p, q) = (e.p(), e.q());
    if e.q_is_infinite() || q < p {
        return Err(Error::Exponents(format!(
            "μ_(p,q) needs p ≤ q < ∞, got {e}"
        )));
    }
    if p == 1.0 {
        return Err(Error::Exponents(
            "μ_(1,q) is not supported; the quotient is not smooth".into(),
        ));
    }
    if domain.inside_count() < 2 {
        return Err(Error::invalid("domain needs at least two nodes"));
    }
    let grid = *domain.grid();
    let stencil = Stencil::new(domain, BoundaryKind::Free);
    let (map, list) = unknown_map(grid.len(), |k| domain.is_inside(k));
    let n = list.len();
    let w = stencil.weight();
    let diam = domain.diameter().max(grid.h);
    // Relative shift that makes the singular Hessian definite; of the order
    // of the first non-zero eigenvalue.
    let shift = 2.5 * (grid.h / diam).powi(2);

    let l = stencil.quadratic_form(&map, n);
    let mean_diag = l.diagonal().iter().sum::<f64>() / n as f64;
    let shifted = l.shifted(shift * mean_diag);
    let amg = Amg::new(&shifted);
    let c = vec![1.0 / (w * n as f64).sqrt(); n];
    let x0: Vec<f64> = list
        .iter()
        .map(|&k| {
            let x = grid.position(k as usize);
            x[0] + 0.3 * x[1]
        })
        .collect();
    let mass = vec![w; n];
    let lopts = LobpcgOptions {
        block: 3.min(n - 1),
        tol: 1e-7,
        value_tol: 1e-14,
        max_iter: 2000,
    };
    let eig = lobpcg(&l, &mass, &amg, vec![x0], &[c], lopts);
    let scatter = |u: &[f64]| {
        let mut full = vec![0.0; grid.len()];
        for (i, &k) in list.iter().enumerate() {
            full[k as usize] = u[i];
        }
        full
    };
    if p == 2.0 && q == 2.0 {
        return Ok(SolveReport {
            quantity: Quantity::Mu,
            value: eig.values[0],
            field: Some(Field::from_parts(
                grid,
                scatter(&eig.vectors[0]),
                BoundaryKind::Free,
            )),
            iterations: eig.iterations,
            residual: eig.value_change.min(eig.residual),
            h: grid.h,
            extrapolated: None,
            converged: eig.converged,
        });
    }
    let mut model = NeumannModel {
        stencil: &stencil,
        map: map.clone(),
        list: list.clone(),
        p,
        q,
        shift,
        full: vec![0.0; grid.len()],
        gfull: vec![0.0; grid.len()],
        precond: None,
        calls: 0,
    };
    let out = minimize_quotient(&mut model, eig.vectors[0].clone(), opts.tol, opts.max_iter);
    Ok(SolveReport {
        quantity: Quantity::Mu,
        value: out.value,
        field: Some(Field::from_parts(grid, scatter(&out.u), BoundaryKind::Free)),
        iterations: out.iterations,
        residual: out.residual,
        h: grid.h,
        extrapolated: None,
        converged: out.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec};

    #[test]
    fn best_constants() {
        let u = [0.0, 1.0, 5.0];
        assert_eq!(best_constant(&u, 2.0), 2.0);
        assert_eq!(best_constant(&u, 1.0), 1.0);
        let t = best_constant(&u, 3.0);
        let f = |t: f64| u.iter().map(|x| (x - t).abs().powi(3)).sum::<f64>();
        assert!(f(t) <= f(t + 1e-6) && f(t) <= f(t - 1e-6));
    }

    #[test]
    fn interval_neumann_eigenvalue() {
        // Free differences on n nodes: the path Laplacian, λ = (4/h²) sin²(π/2n).
        let h = 1.0 / 64.0;
        let d = GridDomain::from_intervals(&[(0.0, 1.0)], h).unwrap();
        let n = d.inside_count() as f64;
        let r = neumann_constant(
            &d,
            &Exponents::new(1, 2.0, 2.0).unwrap(),
            &SolveOptions::default(),
        )
        .unwrap();
        let exact = 4.0 / (h * h) * (std::f64::consts::PI / (2.0 * n)).sin().powi(2);
        assert!(
            (r.value / exact - 1.0).abs() < 1e-7,
            "{} {}",
            r.value,
            exact
        );
    }

    #[test]
    fn disk_neumann_eigenvalue() {
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 1.0 / 32.0)).unwrap();
        let r = neumann_constant(
            &d,
            &Exponents::new(2, 2.0, 2.0).unwrap(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(
            (r.value / 1.84118f64.powi(2) - 1.0).abs() < 0.03,
            "{}",
            r.value
        );
    }

    #[test]
    fn general_path_reproduces_the_eigenvalue() {
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 1.0 / 16.0)).unwrap();
        let opts = SolveOptions::default();
        let eig = neumann_constant(&d, &Exponents::new(2, 2.0, 2.0).unwrap(), &opts).unwrap();
        let q3 = neumann_constant(&d, &Exponents::new(2, 2.0, 3.0).unwrap(), &opts).unwrap();
        assert!(q3.value > 0.0 && q3.value.is_finite());
        let p3 = neumann_constant(&d, &Exponents::new(2, 3.0, 3.0).unwrap(), &opts).unwrap();
        assert!(p3.value > 0.0 && p3.value.is_finite());
        assert!(eig.value > 0.0);
    }
}
