//! `λ_{1,1}` as the minimum of total variation over `L¹` norm.
//!
//! Nonlinear inverse power iteration: each outer step solves
//! `min_{‖f‖₂ ≤ 1} TV(f) − λ⟨s, f⟩` with `s ∈ ∂‖f_k‖₁` through its dual
//! (a box-constrained least squares problem, by FISTA), then rounds the
//! iterate to its best superlevel set.

use crate::error::{Error, Result};
use crate::geometry::{distance_transform, GridDomain};

use super::{geo_cut_weights, BoundaryKind, Field, Quantity, SolveOptions, SolveReport};

struct Tv {
    /// Edges `(v, v + offset[d])` with at least one inside end.
    edges: Vec<(u32, u8)>,
    offsets: [isize; 4],
    weights: [f64; 4],
    h: f64,
    mask: Vec<bool>,
}

impl Tv {
    fn new(domain: &GridDomain) -> Self {
        let g = domain.grid();
        let nx = g.nx();
        let w = geo_cut_weights(g.h);
        // +x, +y, (1,1), (1,−1); one representative per undirected edge.
        let steps: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];
        let weights = [w[0], w[2], w[4], w[6]];
        let mut offsets = [0isize; 4];
        let mut edges = Vec::new();
        for k in 0..g.len() {
            let (i, j) = g.coords(k);
            for (d, &(di, dj)) in steps.iter().enumerate() {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a >= nx as i64 || b >= g.ny() as i64 {
                    continue;
                }
                let m = g.index(a as usize, b as usize);
                offsets[d] = m as isize - k as isize;
                if domain.is_inside(k) || domain.is_inside(m) {
                    edges.push((k as u32, d as u8));
                }
            }
        }
        Tv {
            edges,
            offsets,
            weights,
            h: g.h,
            mask: domain.mask().to_vec(),
        }
    }

    #[inline]
    fn at(&self, k: usize, d: usize) -> usize {
        (k as isize + self.offsets[d]) as usize
    }

    /// `(Kf)_e = w_e (f[v'] − f[v])` on edge `e = (v, v')`.
    fn apply(&self, f: &[f64], out: &mut [f64]) {
        for (o, &(k, d)) in out.iter_mut().zip(&self.edges) {
            let (k, d) = (k as usize, d as usize);
            *o = self.weights[d] * (f[self.at(k, d)] - f[k]);
        }
    }

    /// `Kᵀα`, restricted to inside nodes.
    fn adjoint(&self, a: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (v, &(k, d)) in a.iter().zip(&self.edges) {
            let (k, d) = (k as usize, d as usize);
            let x = self.weights[d] * v;
            out[self.at(k, d)] += x;
            out[k] -= x;
        }
        for (x, &m) in out.iter_mut().zip(&self.mask) {
            if !m {
                *x = 0.0;
            }
        }
    }

    fn total_variation(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(k, d)| {
                let (k, d) = (k as usize, d as usize);
                self.weights[d] * (f[self.at(k, d)] - f[k]).abs()
            })
            .sum()
    }

    fn l1(&self, f: &[f64]) -> f64 {
        self.h * self.h * f.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Best perimeter/area ratio over the superlevel sets `{f ≥ t}`, t > 0.
    fn round(&self, f: &[f64]) -> Option<(f64, Vec<bool>)> {
        let mut order: Vec<usize> = (0..f.len())
            .filter(|&k| self.mask[k] && f[k] > 0.0)
            .collect();
        if order.is_empty() {
            return None;
        }
        order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
        let mut member = vec![false; f.len()];
        let mut per = 0.0;
        let mut best = (f64::INFINITY, 0usize);
        for (n, &k) in order.iter().enumerate() {
            for d in 0..4 {
                let w = self.weights[d];
                let up = self.at(k, d);
                let down = (k as isize - self.offsets[d]) as usize;
                per += if member[up] { -w } else { w };
                per += if member[down] { -w } else { w };
            }
            member[k] = true;
            let boundary = n + 1 == order.len() || f[order[n + 1]] < f[k];
            if boundary {
                let r = per / ((n + 1) as f64 * self.h * self.h);
                if r < best.0 {
                    best = (r, n + 1);
                }
            }
        }
        let mut set = vec![false; f.len()];
        for &k in &order[..best.1] {
            set[k] = true;
        }
        Some((best.0, set))
    }

    /// Dual solve of `min_{‖f‖₂≤1} TV(f) − ⟨b, f⟩`; returns the minimizer.
    fn inner(&self, b: &[f64], alpha: &mut Vec<f64>, max_iter: usize) -> Vec<f64> {
        let n = b.len();
        let lip = 8.0 * self.weights.iter().map(|w| w * w).sum::<f64>();
        let step = 1.0 / lip;
        let mut y = alpha.clone();
        let mut prev = alpha.clone();
        let mut t = 1.0f64;
        let mut r = vec![0.0; n];
        let mut grad = vec![0.0; alpha.len()];
        let mut last = f64::INFINITY;
        for it in 0..max_iter {
            self.adjoint(&y, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= bi;
            }
            self.apply(&r, &mut grad);
            for ((a, yv), gv) in alpha.iter_mut().zip(&y).zip(&grad) {
                *a = (yv - step * gv).clamp(-1.0, 1.0);
            }
            let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / tn;
            for ((yv, a), p) in y.iter_mut().zip(alpha.iter()).zip(&prev) {
                *yv = a + beta * (a - p);
            }
            prev.clone_from(alpha);
            t = tn;
            if it % 50 == 49 {
                self.adjoint(alpha, &mut r);
                let obj: f64 = r.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum();
                if (last - obj).abs() <= 1e-10 * obj.max(f64::MIN_POSITIVE) {
                    break;
                }
                last = obj;
            }
        }
        self.adjoint(alpha, &mut r);
        let mut f: Vec<f64> = b.iter().zip(&r).map(|(bi, ri)| bi - ri).collect();
        let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            f.iter_mut().for_each(|x| *x /= norm);
        }
        f
    }
}

/// `λ_{1,1}(Ω) = min TV(u)/‖u‖₁` over non-negative fields vanishing outside
/// a planar domain. Total variation is `Σ w_e |u(x) − u(y)|` over the
/// 8-neighbour edges with the geo-cut weights, so the perimeter of a level
/// set is the one [`cheeger_maxflow`](super::cheeger_maxflow) minimizes.
///
/// Starts from the distance to the complement, or from `init` when given;
/// the ratio of the initializer is always among the candidates, so
/// re-feeding the returned indicator never increases the value.
pub fn lambda11_tv(
    domain: &GridDomain,
    init: Option<&Field>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if domain.dim() != 2 {
        return Err(Error::invalid("lambda11_tv needs a planar domain"));
    }
    if domain.inside_count() == 0 {
        return Err(Error::invalid("empty domain"));
    }
    let tv = Tv::new(domain);
    let mut f: Vec<f64> = match init {
        Some(u) => {
            if u.grid() != domain.grid() {
                return Err(Error::invalid("initializer lives on a different grid"));
            }
            u.values()
                .iter()
                .zip(domain.mask())
                .map(|(&v, &m)| if m { v.abs() } else { 0.0 })
                .collect()
        }
        None => distance_transform(domain),
    };
    let start = tv
        .round(&f)
        .ok_or_else(|| Error::invalid("initializer vanishes on the domain"))?;
    let mut best = start;
    let as_field =
        |set: &[bool]| -> Vec<f64> { set.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect() };
    if tv.total_variation(&f) / tv.l1(&f) > best.0 {
        f = as_field(&best.1);
    }
    let mut lambda = tv.total_variation(&f) / tv.l1(&f);
    let mut alpha = vec![0.0; tv.edges.len()];
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    let outer_cap = opts.max_iter.clamp(1, 100);
    while iterations < outer_cap {
        iterations += 1;
        let w = tv.h * tv.h;
        let b: Vec<f64> = f
            .iter()
            .map(|&x| if x > 0.0 { lambda * w } else { 0.0 })
            .collect();
        let g = tv.inner(&b, &mut alpha, 5000);
        let g: Vec<f64> = g.into_iter().map(|x| x.max(0.0)).collect();
        let mut next = if tv.l1(&g) > 0.0 {
            tv.total_variation(&g) / tv.l1(&g)
        } else {
            f64::INFINITY
        };
        let mut candidate = g;
        if let Some((r, set)) = tv.round(&candidate) {
            if r < best.0 {
                best = (r, set);
            }
            if r < next {
                next = r;
                candidate = as_field(&best.1);
            }
        }
        change = (lambda - next) / lambda;
        if !(next < lambda) {
            break;
        }
        lambda = next;
        f = candidate;
        if change < opts.tol.max(1e-9) {
            break;
        }
    }
    Ok(SolveReport {
        quantity: Quantity::Lambda11,
        value: best.0,
        field: Some(Field::from_parts(
            *domain.grid(),
            as_field(&best.1),
            BoundaryKind::ZeroExtension,
        )),
        iterations,
        residual: change.max(0.0),
        h: domain.h(),
        extrapolated: None,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec};

    #[test]
    fn adjoint_is_the_transpose() {
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 0.25)).unwrap();
        let tv = Tv::new(&d);
        let f: Vec<f64> = (0..d.grid().len())
            .map(|k| {
                if d.is_inside(k) {
                    (k as f64 * 0.37).sin()
                } else {
                    0.0
                }
            })
            .collect();
        let a: Vec<f64> = (0..tv.edges.len())
            .map(|c| (c as f64 * 1.3).sin())
            .collect();
        let mut kf = vec![0.0; a.len()];
        tv.apply(&f, &mut kf);
        let mut kta = vec![0.0; f.len()];
        tv.adjoint(&a, &mut kta);
        let lhs: f64 = kf.iter().zip(&a).map(|(x, y)| x * y).sum();
        let rhs: f64 = f.iter().zip(&kta).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn disk_value_and_refeed() {
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 1.0 / 32.0)).unwrap();
        let r = lambda11_tv(&d, None, &SolveOptions::default()).unwrap();
        assert!((r.value / 2.0 - 1.0).abs() < 0.05, "{}", r.value);
        let again = lambda11_tv(&d, r.field.as_ref(), &SolveOptions::default()).unwrap();
        assert!(again.value <= r.value);
    }
}
