//! Digital topology: inside is 8-connected, the complement 4-connected.

use std::collections::VecDeque;

use super::{neighbors, Grid, GridDomain};
use crate::error::{Error, Result};

/// Labels connected components of the nodes selected by `member`.
fn label_components(
    grid: &Grid,
    member: impl Fn(usize) -> bool,
    diagonal: bool,
) -> (Vec<u32>, usize) {
    const UNSET: u32 = u32::MAX;
    let mut label = vec![UNSET; grid.len()];
    let mut count = 0usize;
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if label[start] != UNSET || !member(start) {
            continue;
        }
        label[start] = count as u32;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            for nb in neighbors(grid, k, diagonal) {
                if label[nb] == UNSET && member(nb) {
                    label[nb] = count as u32;
                    queue.push_back(nb);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Number of 8-connected components of the inside mask.
pub fn inside_components(domain: &GridDomain) -> usize {
    label_components(domain.grid(), |k| domain.is_inside(k), domain.dim() == 2).1
}

/// Order of multiple connectedness: the number of components of the
/// complement in the one-point compactification of the plane.
///
/// Complement components touching the window edge all contain the (outside)
/// window ring and therefore merge into the single unbounded component.
pub fn topology_order(domain: &GridDomain) -> Result<usize> {
    if domain.dim() != 2 {
        return Err(Error::Precondition(
            "topology order is defined for planar domains".into(),
        ));
    }
    let parts = inside_components(domain);
    if parts != 1 {
        return Err(Error::Disconnected(parts));
    }
    let grid = domain.grid();
    let (label, count) = label_components(grid, |k| !domain.is_inside(k), false);
    let mut touches_edge = vec![false; count];
    for k in 0..grid.len() {
        if !domain.is_inside(k) && grid.on_window_edge(k) {
            touches_edge[label[k] as usize] = true;
        }
    }
    let bounded = touches_edge.iter().filter(|&&t| !t).count();
    Ok(bounded + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec};

    fn order(kind: DomainKind, h: f64) -> usize {
        topology_order(&build_domain(&DomainSpec::new(kind, h)).unwrap()).unwrap()
    }

    #[test]
    fn simple_families() {
        assert_eq!(order(DomainKind::Disk { r: 1.0 }, 1.0 / 32.0), 1);
        assert_eq!(
            order(
                DomainKind::Annulus {
                    r_in: 0.3,
                    r_out: 1.0
                },
                1.0 / 32.0
            ),
            2
        );
        assert_eq!(
            order(DomainKind::Perforated { k: 7, beta: 0.6 }, 1.0 / 32.0),
            8
        );
    }

    #[test]
    fn disconnected_domain_is_rejected() {
        let grid = Grid::new(2, [7, 5], 1.0, [0.0, 0.0]).unwrap();
        let mut inside = vec![false; grid.len()];
        inside[grid.index(1, 2)] = true;
        inside[grid.index(4, 2)] = true;
        let d = GridDomain::new(grid, inside).unwrap();
        match topology_order(&d) {
            Err(Error::Disconnected(2)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagonal_contact_keeps_domain_connected_and_hole_closed() {
        // A ring of inside nodes joined only through corners still encloses
        // its centre under the 8/4 pairing.
        let grid = Grid::new(2, [5, 5], 1.0, [0.0, 0.0]).unwrap();
        let mut inside = vec![false; grid.len()];
        for (i, j) in [(2, 1), (1, 2), (3, 2), (2, 3)] {
            inside[grid.index(i, j)] = true;
        }
        let d = GridDomain::new(grid, inside).unwrap();
        assert_eq!(topology_order(&d).unwrap(), 2);
    }
}
