//! Forward-difference discretization of `∫|∇u|^p`.
//!
//! Every lattice node `i` anchors one cell whose gradient is
//! `g = ((u[i+e₁]−u[i])/h, (u[i+e₂]−u[i])/h)`; the energy is
//! `Σ h^N |g|^p`. With zero extension every edge of a cell touching the
//! domain counts; in free mode an edge counts only if both of its nodes are
//! inside.

use crate::geometry::GridDomain;
use crate::linalg::{Csr, TripletBuilder};

use super::BoundaryKind;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    anchors: Vec<u32>,
    comps: Vec<u8>,
    stride: [usize; 2],
    axes: usize,
    w: f64,
    inv_h: f64,
}

impl Stencil {
    pub fn new(domain: &GridDomain, boundary: BoundaryKind) -> Self {
        let grid = *domain.grid();
        let axes = grid.dim;
        let stride = [1, grid.nx()];
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut anchors = Vec::new();
        let mut comps = Vec::new();
        let jmax = if axes == 1 { 1 } else { ny - 1 };
        for j in 0..jmax {
            for i in 0..nx - 1 {
                let k = grid.index(i, j);
                let mut bits = 0u8;
                for (a, &s) in stride.iter().enumerate().take(axes) {
                    let (x, y) = (domain.is_inside(k), domain.is_inside(k + s));
                    let on = match boundary {
                        BoundaryKind::ZeroExtension => x || y,
                        BoundaryKind::Free => x && y,
                    };
                    if on {
                        bits |= 1 << a;
                    }
                }
                if bits != 0 {
                    if boundary == BoundaryKind::ZeroExtension {
                        bits = (1 << axes) - 1;
                    }
                    anchors.push(k as u32);
                    comps.push(bits);
                }
            }
        }
        Stencil {
            anchors,
            comps,
            stride,
            axes,
            w: grid.cell_volume(),
            inv_h: 1.0 / grid.h,
        }
    }

    /// Volume weight `h^N` of a node or cell.
    pub fn weight(&self) -> f64 {
        self.w
    }

    #[inline]
    fn gradient(&self, c: usize, u: &[f64]) -> [f64; 2] {
        let k = self.anchors[c] as usize;
        let bits = self.comps[c];
        let mut g = [0.0; 2];
        for (a, ga) in g.iter_mut().enumerate().take(self.axes) {
            if bits & (1 << a) != 0 {
                *ga = (u[k + self.stride[a]] - u[k]) * self.inv_h;
            }
        }
        g
    }

    /// `Σ h^N |g|^p` over full-lattice values.
    pub fn energy(&self, u: &[f64], p: f64) -> f64 {
        let mut e = 0.0;
        for c in 0..self.anchors.len() {
            let g = self.gradient(c, u);
            let s = g[0] * g[0] + g[1] * g[1];
            e += if p == 2.0 { s } else { s.powf(0.5 * p) };
        }
        e * self.w
    }

    /// Gradient of [`Stencil::energy`] with respect to every node value.
    pub fn energy_gradient(&self, u: &[f64], p: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..self.anchors.len() {
            let g = self.gradient(c, u);
            let s = g[0] * g[0] + g[1] * g[1];
            if s == 0.0 {
                continue;
            }
            let coef = self.w * p * if p == 2.0 { 1.0 } else { s.powf(0.5 * p - 1.0) } * self.inv_h;
            let k = self.anchors[c] as usize;
            let bits = self.comps[c];
            for (a, ga) in g.iter().enumerate().take(self.axes) {
                if bits & (1 << a) != 0 {
                    out[k + self.stride[a]] += coef * ga;
                    out[k] -= coef * ga;
                }
            }
        }
    }

    /// Hessian model `Σ h^N Gᵀ T G` restricted to unknowns, with
    /// `T = p(|g|²+δ²)^{(p−2)/2}(I + (p−2)ggᵀ/(|g|²+δ²))`. For `p = 2` this
    /// is twice the quadratic form of the energy.
    pub fn hessian(&self, u: &[f64], p: f64, delta2: f64, map: &[u32], n: usize) -> Csr {
        let mut b = TripletBuilder::with_capacity(n, 9 * self.anchors.len());
        for c in 0..self.anchors.len() {
            let g = if p == 2.0 {
                [0.0; 2]
            } else {
                self.gradient(c, u)
            };
            let r2 = g[0] * g[0] + g[1] * g[1] + delta2;
            let (c0, c1) = if p == 2.0 {
                (2.0, 0.0)
            } else {
                (p * r2.powf(0.5 * p - 1.0), (p - 2.0) / r2)
            };
            let k = self.anchors[c] as usize;
            let bits = self.comps[c];
            // Local nodes: anchor, +e₁, +e₂; gradient rows per present axis.
            let nodes = [
                k,
                k + self.stride[0],
                if self.axes > 1 { k + self.stride[1] } else { k },
            ];
            let mut gm = [[0.0f64; 3]; 2];
            for a in 0..self.axes {
                if bits & (1 << a) != 0 {
                    gm[a][0] = -self.inv_h;
                    gm[a][a + 1] = self.inv_h;
                }
            }
            let t = [
                [c0 * (1.0 + c1 * g[0] * g[0]), c0 * c1 * g[0] * g[1]],
                [c0 * c1 * g[0] * g[1], c0 * (1.0 + c1 * g[1] * g[1])],
            ];
            let nloc = 1 + self.axes;
            for x in 0..nloc {
                let ix = map[nodes[x]];
                if ix == NONE {
                    continue;
                }
                for y in 0..nloc {
                    let iy = map[nodes[y]];
                    if iy == NONE {
                        continue;
                    }
                    let mut v = 0.0;
                    for a in 0..self.axes {
                        for bb in 0..self.axes {
                            v += gm[a][x] * t[a][bb] * gm[bb][y];
                        }
                    }
                    if v != 0.0 {
                        b.push(ix as usize, iy as usize, self.w * v);
                    }
                }
            }
        }
        b.build()
    }

    /// Matrix `L` with `energy(u, 2) = uᵀ L u` on the unknowns (others 0).
    pub fn quadratic_form(&self, map: &[u32], n: usize) -> Csr {
        let two = self.hessian(&[], 2.0, 0.0, map, n);
        let (ptr, idx, val) = two.raw();
        Csr::from_raw(
            n,
            ptr.to_vec(),
            idx.to_vec(),
            val.iter().map(|v| 0.5 * v).collect(),
        )
    }

    /// Anchors and present-axis bits of every cell.
    pub fn cells(&self) -> (&[u32], &[u8]) {
        (&self.anchors, &self.comps)
    }
}

/// Maps lattice nodes selected by `keep` to consecutive unknown indices.
pub(crate) fn unknown_map(len: usize, keep: impl Fn(usize) -> bool) -> (Vec<u32>, Vec<u32>) {
    let mut map = vec![NONE; len];
    let mut list = Vec::new();
    for (k, m) in map.iter_mut().enumerate() {
        if keep(k) {
            *m = list.len() as u32;
            list.push(k as u32);
        }
    }
    (map, list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec};

    fn disk() -> GridDomain {
        build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 0.125)).unwrap()
    }

    fn sample(d: &GridDomain) -> Vec<f64> {
        (0..d.grid().len())
            .map(|k| {
                if d.is_inside(k) {
                    let x = d.grid().position(k);
                    (1.3 * x[0] + 0.2).sin() + x[1] * x[1] + 0.5
                } else {
                    0.0
                }
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = disk();
        for bc in [BoundaryKind::ZeroExtension, BoundaryKind::Free] {
            let s = Stencil::new(&d, bc);
            let u = sample(&d);
            for p in [1.5, 2.0, 3.0] {
                let mut g = vec![0.0; u.len()];
                s.energy_gradient(&u, p, &mut g);
                for k in d.inside_nodes().step_by(7) {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[k] += 1e-6;
                    dn[k] -= 1e-6;
                    let fd = (s.energy(&up, p) - s.energy(&dn, p)) / 2e-6;
                    assert!(
                        (fd - g[k]).abs() < 1e-6 * (1.0 + g[k].abs()),
                        "{p} {k}: {fd} {}",
                        g[k]
                    );
                }
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let d = disk();
        let s = Stencil::new(&d, BoundaryKind::ZeroExtension);
        let u = sample(&d);
        let (map, list) = unknown_map(u.len(), |k| d.is_inside(k));
        let p = 3.0;
        let h = s.hessian(&u, p, 0.0, &map, list.len());
        assert!(h.is_symmetric(1e-10));
        let dir: Vec<f64> = (0..list.len())
            .map(|i| ((i * 13) % 7) as f64 - 3.0)
            .collect();
        let mut hv = vec![0.0; list.len()];
        h.mul_vec(&dir, &mut hv);
        let eps = 1e-6;
        let shift = |sign: f64| {
            let mut v = u.clone();
            for (i, &k) in list.iter().enumerate() {
                v[k as usize] += sign * eps * dir[i];
            }
            let mut g = vec![0.0; u.len()];
            s.energy_gradient(&v, p, &mut g);
            g
        };
        let (gp, gm) = (shift(1.0), shift(-1.0));
        for (i, &k) in list.iter().enumerate().step_by(5) {
            let fd = (gp[k as usize] - gm[k as usize]) / (2.0 * eps);
            assert!((fd - hv[i]).abs() < 1e-4 * (1.0 + hv[i].abs()));
        }
    }

    #[test]
    fn quadratic_form_reproduces_energy() {
        let d = disk();
        let s = Stencil::new(&d, BoundaryKind::ZeroExtension);
        let u = sample(&d);
        let (map, list) = unknown_map(u.len(), |k| d.is_inside(k));
        let l = s.quadratic_form(&map, list.len());
        let x: Vec<f64> = list.iter().map(|&k| u[k as usize]).collect();
        let mut lx = vec![0.0; x.len()];
        l.mul_vec(&x, &mut lx);
        let q: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
        assert!((q - s.energy(&u, 2.0)).abs() < 1e-10 * q);
    }
}
