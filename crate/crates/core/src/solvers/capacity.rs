use crate::error::{Error, Result};
use crate::geometry::{GridDomain, ObstacleSet};

use super::maxflow::{GridCut, DIRS};
use super::newton::ConvexProblem;
use super::stencil::{unknown_map, Stencil};
use super::{geo_cut_weights, BoundaryKind, Field, Quantity, SolveOptions, SolveReport};

/// Discrete `cap_p(K; E)`: the least `Σ h^N|∇u|^p` over fields equal to 1
/// on the obstacle and 0 outside the container.
///
/// `p = 2` is a single linear solve, `p > 1` a damped Newton iteration
/// started from the `p = 2` potential, and `p = 1` a minimum cut with the
/// geo-cut edge weights. The minimizer is clamped to `[0, 1]` and the
/// reported value is the energy of the clamped field.
pub fn capacity(
    container: &GridDomain,
    obstacle: &ObstacleSet,
    p: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Exponents(format!(
            "capacity needs 1 ≤ p < ∞, got {p}"
        )));
    }
    if obstacle.grid() != container.grid() {
        return Err(Error::invalid(
            "obstacle and container live on different grids",
        ));
    }
    if let Some(&k) = obstacle.nodes().iter().find(|&&k| !container.is_inside(k)) {
        let x = container.grid().position(k);
        return Err(Error::invalid(format!(
            "obstacle node at {x:?} lies outside the container"
        )));
    }
    if p == 1.0 {
        return cut_capacity(container, obstacle);
    }
    let stencil = Stencil::new(container, BoundaryKind::ZeroExtension);
    point_capacity(container, &stencil, obstacle, p, None, opts)
}

pub(crate) fn point_capacity(
    container: &GridDomain,
    stencil: &Stencil,
    obstacle: &ObstacleSet,
    p: f64,
    init: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let grid = *container.grid();
    let len = grid.len();
    let (map, list) = unknown_map(len, |k| container.is_inside(k) && !obstacle.contains(k));
    let mut base = vec![0.0; len];
    for &k in obstacle.nodes() {
        base[k] = 1.0;
    }
    let mut prob = ConvexProblem {
        stencil,
        p: 2.0,
        map: &map,
        list: &list,
        base,
        linear: vec![0.0; list.len()],
    };
    let mut out = match init {
        Some(u) if p != 2.0 => {
            prob.p = p;
            let x0 = list.iter().map(|&k| u[k as usize]).collect();
            prob.minimize(x0, opts.tol, opts.max_iter)
        }
        _ => prob.minimize(vec![0.0; list.len()], opts.tol, opts.max_iter),
    };
    if prob.p != p {
        prob.p = p;
        let init = out.x.clone();
        out = prob.minimize(init, opts.tol, opts.max_iter);
    }
    let clamped: Vec<f64> = out.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let full = prob.scatter(&clamped);
    let value = stencil.energy(&full, p);
    Ok(SolveReport {
        quantity: Quantity::Capacity,
        value,
        field: Some(Field::from_parts(grid, full, BoundaryKind::ZeroExtension)),
        iterations: out.iterations,
        residual: out.residual,
        h: grid.h,
        extrapolated: None,
        converged: out.converged,
    })
}

fn cut_weights(container: &GridDomain) -> [f64; 8] {
    if container.dim() == 2 {
        geo_cut_weights(container.h())
    } else {
        [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    }
}

fn cut_capacity(container: &GridDomain, obstacle: &ObstacleSet) -> Result<SolveReport> {
    let grid = *container.grid();
    let w = cut_weights(container);
    let nx = grid.nx() as isize;
    let mask = container.mask().to_vec();
    let nb =
        |v: usize, d: usize| (v as isize + DIRS[d].0 as isize + nx * DIRS[d].1 as isize) as usize;
    let perimeter = |set: &[bool]| -> f64 {
        (0..set.len())
            .filter(|&v| set[v])
            .map(|v| {
                (0..8)
                    .filter(|&d| w[d] > 0.0 && !set[nb(v, d)])
                    .map(|d| w[d])
                    .sum::<f64>()
            })
            .sum()
    };
    let sink: Vec<f64> = (0..grid.len())
        .map(|v| {
            if mask[v] {
                (0..8)
                    .filter(|&d| w[d] > 0.0 && !mask[nb(v, d)])
                    .map(|d| w[d])
                    .sum()
            } else {
                0.0
            }
        })
        .collect();
    let big = 2.0 * sink.iter().sum::<f64>() + 1.0;
    let mut source = vec![0.0; grid.len()];
    for &k in obstacle.nodes() {
        source[k] = big;
    }
    let side = GridCut::new(&grid, mask, w, &source, &sink).solve();
    let value = perimeter(&side);
    let values = side.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Ok(SolveReport {
        quantity: Quantity::Capacity,
        value,
        field: Some(Field::from_parts(grid, values, BoundaryKind::ZeroExtension)),
        iterations: 1,
        residual: 0.0,
        h: grid.h,
        extrapolated: None,
        converged: true,
    })
}
