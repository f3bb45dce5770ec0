use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Grid, GridDomain};

use super::stencil::Stencil;
use super::{BoundaryKind, Field};

/// Relative slack granted to the discrete norms for interpolation error.
const SLACK: f64 = 0.05;

/// Extension of a field from `B_r(x₀)` to `B_R(x₀)` by reflection through
/// the sphere, with the norms on both balls.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    #[serde(skip)]
    pub domain: GridDomain,
    #[serde(skip)]
    pub field: Field,
    pub lp_inner: f64,
    pub lp_outer: f64,
    /// `‖ext‖_{L^p(B_R)} / ‖u‖_{L^p(B_r)}`.
    pub lp_ratio: f64,
    /// `2^{1/p}(R/r)^{2N/p}`.
    pub lp_bound: f64,
    pub grad_inner: f64,
    pub grad_outer: f64,
    pub grad_ratio: f64,
    /// `4^{1/p}(R/r)^{4N/p}`.
    pub grad_bound: f64,
    /// Either ratio exceeds its bound by more than 5%.
    pub violated: bool,
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

// Interpolates from the nodes of `domain` that lie in the closed ball; the
// weights of the surrounding lattice nodes are renormalized over those.
fn sample(
    domain: &GridDomain,
    u: &[f64],
    admissible: &dyn Fn(usize) -> bool,
    y: [f64; 2],
) -> Option<f64> {
    let g = domain.grid();
    let fx = (y[0] - g.origin[0]) / g.h;
    let fy = if g.dim == 1 {
        0.0
    } else {
        (y[1] - g.origin[1]) / g.h
    };
    let (i0, j0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - i0, fy - j0);
    let mut acc = 0.0;
    let mut wsum = 0.0;
    let js: &[f64] = if g.dim == 1 { &[0.0] } else { &[0.0, 1.0] };
    for &dj in js {
        for di in [0.0, 1.0] {
            let (i, j) = (i0 + di, j0 + dj);
            if i < 0.0 || j < 0.0 || i >= g.nx() as f64 || j >= g.ny() as f64 {
                continue;
            }
            let k = g.index(i as usize, j as usize);
            if !admissible(k) {
                continue;
            }
            let w = (if di == 0.0 { 1.0 - tx } else { tx })
                * if g.dim == 1 {
                    1.0
                } else if dj == 0.0 {
                    1.0 - ty
                } else {
                    ty
                };
            acc += w * u[k];
            wsum += w;
        }
    }
    (wsum > 1e-12).then(|| acc / wsum)
}

/// Extends `u`, given on the disk domain `domain ⊆ B_r(x₀)`, to `B_R(x₀)`:
/// `ext = u` inside `B_r` and `ext(x) = u(𝒦(x))` outside, with
/// `𝒦(x) = x₀ + r²(x − x₀)/|x − x₀|²`, sampled by (bi)linear interpolation.
/// Reports `L^p` norms of the field and of its gradient (free differences)
/// on both balls against the factors `2^{1/p}(R/r)^{2N/p}` and
/// `4^{1/p}(R/r)^{4N/p}`.
pub fn extend_inversion(
    domain: &GridDomain,
    u: &Field,
    x0: [f64; 2],
    r: f64,
    big_r: f64,
    p: f64,
) -> Result<ExtensionReport> {
    if !(r > 0.0) || !(big_r > r) || !big_r.is_finite() {
        return Err(Error::invalid(format!(
            "need 0 < r < R, got r = {r}, R = {big_r}"
        )));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Exponents(format!("need 1 ≤ p < ∞, got {p}")));
    }
    if u.grid() != domain.grid() {
        return Err(Error::invalid("field and domain live on different grids"));
    }
    let g = *domain.grid();
    let x0 = if g.dim == 1 { [x0[0], 0.0] } else { x0 };
    let h = g.h;
    let tol = 1e-9 * h;
    if let Some(k) = domain
        .inside_nodes()
        .find(|&k| distance(g.position(k), x0) > r + tol)
    {
        return Err(Error::invalid(format!(
            "inside node at {:?} lies outside B_r(x₀)",
            g.position(k)
        )));
    }
    // Output lattice: same spacing and phase, covering B_R with a margin.
    let snap = |x: f64, o: f64| o + h * ((x - o) / h).floor();
    let ox = snap(x0[0] - big_r, g.origin[0]) - 2.0 * h;
    let nx = ((x0[0] + big_r - ox) / h).ceil() as usize + 3;
    let (oy, ny) = if g.dim == 1 {
        (0.0, 1)
    } else {
        let oy = snap(x0[1] - big_r, g.origin[1]) - 2.0 * h;
        (oy, ((x0[1] + big_r - oy) / h).ceil() as usize + 3)
    };
    let out_grid = Grid::new(g.dim, [nx, ny], h, [ox, oy])?;
    let mask: Vec<bool> = (0..out_grid.len())
        .map(|k| distance(out_grid.position(k), x0) < big_r - tol)
        .collect();
    let out = GridDomain::new(out_grid, mask)?;
    let values_in = u.values();
    let admissible = |k: usize| domain.is_inside(k);
    let nearest = |y: [f64; 2]| -> f64 {
        let k = domain
            .inside_nodes()
            .min_by(|&a, &b| distance(g.position(a), y).total_cmp(&distance(g.position(b), y)))
            .expect("domain is non-empty");
        values_in[k]
    };
    let mut ext = vec![0.0; out_grid.len()];
    for k in out.inside_nodes() {
        let x = out_grid.position(k);
        let d = distance(x, x0);
        let y = if d < r - tol {
            x
        } else {
            let s = r * r / (d * d);
            [x0[0] + s * (x[0] - x0[0]), x0[1] + s * (x[1] - x0[1])]
        };
        ext[k] = sample(domain, values_in, &admissible, y).unwrap_or_else(|| nearest(y));
    }
    let lp = |dom: &GridDomain, v: &[f64]| -> f64 {
        let w = dom.grid().cell_volume();
        (w * dom.inside_nodes().map(|k| v[k].abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    };
    let grad = |dom: &GridDomain, v: &[f64]| -> f64 {
        Stencil::new(dom, BoundaryKind::Free)
            .energy(v, p)
            .powf(1.0 / p)
    };
    let lp_inner = lp(domain, values_in);
    let lp_outer = lp(&out, &ext);
    let grad_inner = grad(domain, values_in);
    let grad_outer = grad(&out, &ext);
    let ratio = |outer: f64, inner: f64| {
        if inner > 0.0 {
            outer / inner
        } else if outer <= 1e-12 * lp_outer.max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let n = g.dim as f64;
    let q = big_r / r;
    let lp_bound = 2f64.powf(1.0 / p) * q.powf(2.0 * n / p);
    let grad_bound = 4f64.powf(1.0 / p) * q.powf(4.0 * n / p);
    let lp_ratio = ratio(lp_outer, lp_inner);
    let grad_ratio = ratio(grad_outer, grad_inner);
    let violated = lp_ratio > lp_bound * (1.0 + SLACK) || grad_ratio > grad_bound * (1.0 + SLACK);
    let field = Field::from_parts(out_grid, ext, BoundaryKind::Free);
    Ok(ExtensionReport {
        domain: out,
        field,
        lp_inner,
        lp_outer,
        lp_ratio,
        lp_bound,
        grad_inner,
        grad_outer,
        grad_ratio,
        grad_bound,
        violated,
    })
}
