use std::collections::BTreeSet;

use serde::Serialize;

use super::{inradius, topology_order, GridDomain, ObstacleSet};
use crate::error::{Error, Result};

/// Discrete length of the orthogonal projection along `e_axis` onto its
/// complement: `axis = 1` collapses x and counts occupied rows, `axis = 2`
/// collapses y and counts occupied columns.
pub fn projection_length(obstacle: &ObstacleSet, axis: usize) -> Result<f64> {
    let g = obstacle.grid();
    if g.dim != 2 {
        return Err(Error::Precondition(
            "projections are defined for planar obstacles".into(),
        ));
    }
    let kept: BTreeSet<usize> = obstacle
        .nodes()
        .iter()
        .map(|&k| {
            let (i, j) = g.coords(k);
            match axis {
                1 => Ok(j),
                2 => Ok(i),
                _ => Err(Error::invalid(format!("axis must be 1 or 2, got {axis}"))),
            }
        })
        .collect::<Result<_>>()?;
    Ok(kept.len() as f64 * g.h)
}

/// Side length `10(⌊√k⌋ + 1)·r` of the square used by the fatness check.
pub fn taylor_square_side(k: usize, r: f64) -> f64 {
    10.0 * (super::builders::isqrt(k) + 1) as f64 * r
}

#[derive(Debug, Clone, Serialize)]
pub struct FatnessWitness {
    pub order: usize,
    pub inradius: f64,
    pub square_center: [f64; 2],
    pub square_side: f64,
    /// Number of nodes of `Σ = closed square ∖ Ω`.
    pub sigma_nodes: usize,
    pub projection_e1: f64,
    pub projection_e2: f64,
    /// `(√k / 4)·r`.
    pub required: f64,
    /// `max projection − (required − 2h)`.
    pub margin: f64,
    pub pass: bool,
}

/// Builds the compact complement piece inside an axis-parallel square and
/// checks that one of its projections is at least `(√k/4)·r_Ω` (up to a
/// `2h` discretization slack).
pub fn taylor_fatness_check(
    domain: &GridDomain,
    square_center: [f64; 2],
    square_side: f64,
) -> Result<FatnessWitness> {
    let k = topology_order(domain)?;
    let r = inradius(domain);
    let g = *domain.grid();
    let expected = taylor_square_side(k, r);
    if (square_side - expected).abs() > g.h {
        return Err(Error::Precondition(format!(
            "square side {square_side} differs from 10(floor(sqrt k)+1) r = {expected}"
        )));
    }
    let half = 0.5 * square_side;
    let lo = [square_center[0] - half, square_center[1] - half];
    let hi = [square_center[0] + half, square_center[1] + half];
    let win_lo = g.origin;
    let win_hi = [
        g.origin[0] + g.h * (g.nx() - 1) as f64,
        g.origin[1] + g.h * (g.ny() - 1) as f64,
    ];
    if lo[0] < win_lo[0] || lo[1] < win_lo[1] || hi[0] > win_hi[0] || hi[1] > win_hi[1] {
        return Err(Error::Precondition(format!(
            "square [{:?}, {:?}] leaves the grid window [{:?}, {:?}]",
            lo, hi, win_lo, win_hi
        )));
    }
    let slack = 1e-9 * g.h;
    let nodes: Vec<usize> = (0..g.len())
        .filter(|&n| {
            let x = g.position(n);
            !domain.is_inside(n)
                && x[0] >= lo[0] - slack
                && x[0] <= hi[0] + slack
                && x[1] >= lo[1] - slack
                && x[1] <= hi[1] + slack
        })
        .collect();
    let sigma_nodes = nodes.len();
    let (p1, p2) = if nodes.is_empty() {
        (0.0, 0.0)
    } else {
        let sigma = ObstacleSet::new(g, nodes)?;
        (projection_length(&sigma, 1)?, projection_length(&sigma, 2)?)
    };
    let required = (k as f64).sqrt() / 4.0 * r;
    let margin = p1.max(p2) - (required - 2.0 * g.h);
    Ok(FatnessWitness {
        order: k,
        inradius: r,
        square_center,
        square_side,
        sigma_nodes,
        projection_e1: p1,
        projection_e2: p2,
        required,
        margin,
        pass: margin >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec, Grid};

    fn grid() -> Grid {
        Grid::new(2, [20, 20], 0.1, [0.0, 0.0]).unwrap()
    }

    #[test]
    fn segment_projections() {
        let g = grid();
        let seg = ObstacleSet::new(g, (3..13).map(|i| g.index(i, 5)).collect()).unwrap();
        assert!((projection_length(&seg, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((projection_length(&seg, 1).unwrap() - 0.1).abs() < 1e-12);
        let diag = ObstacleSet::new(g, (3..13).map(|i| g.index(i, i)).collect()).unwrap();
        for axis in [1, 2] {
            assert!((projection_length(&diag, axis).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(projection_length(&diag, 3).is_err());
    }

    #[test]
    fn single_node_projects_to_one_cell() {
        let g = grid();
        let p = ObstacleSet::new(g, vec![g.index(4, 4)]).unwrap();
        assert!((projection_length(&p, 1).unwrap() - g.h).abs() < 1e-15);
    }

    #[test]
    fn disk_passes_with_padded_window() {
        let h = 1.0 / 16.0;
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, h)).unwrap();
        let r = inradius(&d);
        let side = taylor_square_side(1, r);
        let d = d.padded((side / h).ceil() as usize);
        let w = taylor_fatness_check(&d, [0.3, -0.2], side).unwrap();
        assert!(w.pass);
        assert!(w.projection_e1.max(w.projection_e2) >= 0.25 - 2.0 * h);
    }

    #[test]
    fn square_leaving_window_is_rejected() {
        let h = 1.0 / 16.0;
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, h)).unwrap();
        let side = taylor_square_side(1, inradius(&d));
        assert!(matches!(
            taylor_fatness_check(&d, [0.0, 0.0], side),
            Err(Error::Precondition(_))
        ));
        assert!(taylor_fatness_check(&d.padded(400), [0.0, 0.0], 1.0).is_err());
    }
}
