use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::{Grid, GridDomain};

use super::maxflow::{GridCut, DIRS};
use super::{BoundaryKind, Field, Quantity, SolveReport};

// The plain 8-neighbour Cauchy–Crofton weights measure a straight cut at
// 0.948 (axis, diagonal) to 1.026 (22.5°) times its length; this centres
// the band on 1.
const CALIBRATION: f64 = 2.0 / (0.948 + 1.0262);

/// Cut weights of the 8-neighbour edges at spacing `h`, in `DIRS` order.
pub fn geo_cut_weights(h: f64) -> [f64; 8] {
    let axis = CALIBRATION * PI * h / 8.0;
    let diag = axis / SQRT_2;
    [axis, axis, axis, axis, diag, diag, diag, diag]
}

/// Weighted boundary length of a node set: the sum of the geo-cut weights of
/// all edges leaving it.
pub fn geo_cut_perimeter(grid: &Grid, set: &[bool]) -> f64 {
    let w = geo_cut_weights(grid.h);
    let nx = grid.nx() as i64;
    let len = grid.len() as i64;
    let mut per = 0.0;
    for v in 0..set.len() {
        if !set[v] {
            continue;
        }
        let (i, j) = grid.coords(v);
        for (d, &(dx, dy)) in DIRS.iter().enumerate() {
            let (a, b) = (i as i64 + dx, j as i64 + dy);
            let u = a + nx * b;
            let inside = a >= 0 && a < nx && b >= 0 && u < len && set[u as usize];
            if !inside {
                per += w[d];
            }
        }
    }
    per
}

/// Discrete Cheeger constant `min Per(S)/|S|` over node subsets of a planar
/// domain, by Dinkelbach iteration on parametric minimum cuts.
pub fn cheeger_maxflow(domain: &GridDomain) -> Result<SolveReport> {
    if domain.dim() != 2 {
        return Err(Error::invalid("cheeger_maxflow needs a planar domain"));
    }
    if domain.inside_count() == 0 {
        return Err(Error::invalid("empty domain"));
    }
    let grid = *domain.grid();
    let area_of = |s: &[bool]| s.iter().filter(|&&b| b).count() as f64 * grid.cell_volume();
    let ratio = |s: &[bool]| geo_cut_perimeter(&grid, s) / area_of(s);
    let w = geo_cut_weights(grid.h);
    let nx = grid.nx() as isize;
    let mask = domain.mask().to_vec();
    let sink: Vec<f64> = (0..grid.len())
        .map(|v| {
            if !mask[v] {
                return 0.0;
            }
            DIRS.iter()
                .enumerate()
                .filter(|(_, &(dx, dy))| {
                    !mask[(v as isize + dx as isize + nx * dy as isize) as usize]
                })
                .map(|(d, _)| w[d])
                .sum()
        })
        .collect();
    let mut best = mask.clone();
    let mut lambda = ratio(&best);
    let mut iterations = 0;
    let mut gap = 0.0;
    for _ in 0..100 {
        iterations += 1;
        let source: Vec<f64> = mask
            .iter()
            .map(|&b| if b { lambda * grid.cell_volume() } else { 0.0 })
            .collect();
        let side = GridCut::new(&grid, mask.clone(), w, &source, &sink).solve();
        if !side.iter().any(|&b| b) {
            break;
        }
        let r = ratio(&side);
        gap = (lambda - r) / lambda;
        if r >= lambda * (1.0 - 1e-12) {
            break;
        }
        lambda = r;
        best = side;
    }
    let values = best.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Ok(SolveReport {
        quantity: Quantity::Cheeger,
        value: lambda,
        field: Some(Field::from_parts(grid, values, BoundaryKind::ZeroExtension)),
        iterations,
        residual: gap.max(0.0),
        h: grid.h,
        extrapolated: None,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec};

    #[test]
    fn perimeter_of_a_large_disk_is_close_to_euclidean() {
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 1.0 / 64.0)).unwrap();
        let per = geo_cut_perimeter(d.grid(), d.mask());
        assert!((per / (2.0 * PI) - 1.0).abs() < 0.04, "{per}");
    }

    #[test]
    fn perimeter_of_an_axis_square() {
        let d = build_domain(&DomainSpec::new(
            DomainKind::Square { side: 1.0 },
            1.0 / 64.0,
        ))
        .unwrap();
        // 63 × 63 nodes; axis-aligned cuts sit at the low end of the band.
        let per = geo_cut_perimeter(d.grid(), d.mask());
        let side = 63.0 / 64.0;
        assert!((per / (4.0 * side) - 0.9604).abs() < 0.01, "{per}");
    }

    #[test]
    fn disk_cheeger_constant() {
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 1.0 / 32.0)).unwrap();
        let r = cheeger_maxflow(&d).unwrap();
        assert!((r.value / 2.0 - 1.0).abs() < 0.04, "{}", r.value);
    }

    #[test]
    fn square_cheeger_constant() {
        let d = build_domain(&DomainSpec::new(
            DomainKind::Square { side: 1.0 },
            1.0 / 32.0,
        ))
        .unwrap();
        let r = cheeger_maxflow(&d).unwrap();
        let exact = 2.0 + PI.sqrt();
        assert!((r.value / exact - 1.0).abs() < 0.04, "{}", r.value);
    }

    #[test]
    fn long_strip_tends_to_two_over_width() {
        // Rectangle a×b: h = (4 − π)/(a + b − √((a − b)² + πab)), → 2/b as a → ∞.
        let (a, b) = (8.0, 1.0);
        let d = build_domain(&DomainSpec::new(
            DomainKind::Strip {
                height: b,
                length: a,
            },
            1.0 / 16.0,
        ))
        .unwrap();
        let r = cheeger_maxflow(&d).unwrap();
        let exact = (4.0 - PI) / (a + b - ((a - b) * (a - b) + PI * a * b).sqrt());
        assert!(
            (r.value / exact - 1.0).abs() < 0.04,
            "{} vs {exact}",
            r.value
        );
        assert!(r.value > 2.0 / b * 0.96);
    }
}
