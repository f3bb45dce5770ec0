//! Grid domains, domain builders, and the geometric measurements the bounds
//! are stated in: inradius, topological order, projections.
//!
//! A domain is a boolean mask over a uniform lattice. Node `(i, j)` sits at
//! `origin + h·(i, j)`; the outermost ring of the lattice is always outside,
//! so every inside node has an outside neighbour within the window.

mod builders;
mod edt;
mod fatness;
pub mod io;
mod topology;

pub use builders::{
    build_domain, build_domain_with_budget, perforation_radius, DomainKind, DomainSpec,
    DEFAULT_NODE_BUDGET,
};
pub use edt::{distance_transform, inradius, inradius_center};
pub use fatness::{projection_length, taylor_fatness_check, taylor_square_side, FatnessWitness};
pub use topology::{inside_components, topology_order};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice geometry shared by a domain, its obstacles and fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    /// Node counts per axis; `shape[1] == 1` in one dimension.
    pub shape: [usize; 2],
    pub h: f64,
    pub origin: [f64; 2],
}

impl Grid {
    pub fn new(dim: usize, shape: [usize; 2], h: f64, origin: [f64; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        let ny_ok = if dim == 1 {
            shape[1] == 1
        } else {
            shape[1] >= 2
        };
        if shape[0] < 2 || !ny_ok {
            return Err(Error::invalid(format!(
                "bad grid shape {shape:?} for dimension {dim}"
            )));
        }
        Ok(Grid {
            dim,
            shape,
            h,
            origin,
        })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.shape[0]
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.shape[1]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.shape[0] * j
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.shape[0], idx / self.shape[0])
    }

    /// Physical position of a node.
    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        [
            self.origin[0] + self.h * i as f64,
            self.origin[1] + self.h * j as f64,
        ]
    }

    /// Volume element `h^dim` attached to every node.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Nearest node to a physical point, if it lies in the window.
    pub fn nearest_node(&self, x: [f64; 2]) -> Option<usize> {
        let fi = ((x[0] - self.origin[0]) / self.h).round();
        let fj = if self.dim == 1 {
            0.0
        } else {
            ((x[1] - self.origin[1]) / self.h).round()
        };
        if fi < 0.0 || fj < 0.0 || fi >= self.nx() as f64 || fj >= self.ny() as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    /// True when the node lies on the outermost ring of the window.
    #[inline]
    pub fn on_window_edge(&self, idx: usize) -> bool {
        let (i, j) = self.coords(idx);
        let x_edge = i == 0 || i + 1 == self.nx();
        if self.dim == 1 {
            x_edge
        } else {
            x_edge || j == 0 || j + 1 == self.ny()
        }
    }
}

/// A binary occupancy mask on a uniform grid representing an open set.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    grid: Grid,
    inside: Vec<bool>,
}

impl GridDomain {
    /// Validates the mask: at least one inside node and none on the window
    /// edge.
    pub fn new(grid: Grid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::invalid(format!(
                "mask has {} entries, grid has {} nodes",
                inside.len(),
                grid.len()
            )));
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::Precondition("domain has no inside node".into()));
        }
        if let Some(idx) = (0..grid.len()).find(|&k| inside[k] && grid.on_window_edge(k)) {
            return Err(Error::invalid(format!(
                "inside node {:?} touches the window edge",
                grid.coords(idx)
            )));
        }
        Ok(GridDomain { grid, inside })
    }

    /// One-dimensional domain from a union of open intervals, rasterized with
    /// the node-centre rule.
    pub fn from_intervals(intervals: &[(f64, f64)], h: f64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::invalid("no intervals given"));
        }
        if let Some(&(a, b)) = intervals.iter().find(|(a, b)| !(a < b)) {
            return Err(Error::invalid(format!("empty interval ({a}, {b})")));
        }
        let lo = intervals
            .iter()
            .map(|iv| iv.0)
            .fold(f64::INFINITY, f64::min);
        let hi = intervals
            .iter()
            .map(|iv| iv.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let i0 = (lo / h).floor() as i64 - 1;
        let i1 = (hi / h).ceil() as i64 + 1;
        let n = (i1 - i0 + 1) as usize;
        let grid = Grid::new(1, [n, 1], h, [i0 as f64 * h, 0.0])?;
        let inside = (0..n)
            .map(|i| {
                let x = (i0 + i as i64) as f64 * h;
                intervals.iter().any(|&(a, b)| x > a && x < b)
            })
            .collect();
        GridDomain::new(grid, inside)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.grid.h
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.inside
    }

    #[inline]
    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn inside_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.inside
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
    }

    /// Node-counted measure `|inside|·h^dim`.
    pub fn volume(&self) -> f64 {
        self.inside_count() as f64 * self.grid.cell_volume()
    }

    /// Largest distance between two inside nodes.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<[f64; 2]> = self.inside_nodes().map(|k| self.grid.position(k)).collect();
        // Diameter is attained on the convex hull; the hull of a lattice set
        // is small, so filter to extreme points per row first.
        let mut extremes: Vec<[f64; 2]> = Vec::new();
        if self.dim() == 1 {
            extremes = pts;
        } else {
            let mut rows: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
            for p in &pts {
                let key = (p[1] / self.h()).round() as i64;
                let e = rows.entry(key).or_insert((p[0], p[0]));
                e.0 = e.0.min(p[0]);
                e.1 = e.1.max(p[0]);
            }
            for (key, (a, b)) in rows {
                let y = key as f64 * self.h();
                extremes.push([a, y]);
                extremes.push([b, y]);
            }
        }
        let mut best = 0.0_f64;
        for (n, p) in extremes.iter().enumerate() {
            for q in &extremes[n + 1..] {
                best = best.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        best
    }

    /// Same mask on a physically dilated lattice (`h → t·h`, `origin → t·origin`).
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::invalid("scale factor must be positive"));
        }
        let g = self.grid;
        let grid = Grid::new(g.dim, g.shape, g.h * t, [g.origin[0] * t, g.origin[1] * t])?;
        GridDomain::new(grid, self.inside.clone())
    }

    /// Embeds the mask into a larger window with `margin` extra outside nodes
    /// on every side.
    pub fn padded(&self, margin: usize) -> Self {
        let g = self.grid;
        let ny_margin = if g.dim == 1 { 0 } else { margin };
        let shape = [g.nx() + 2 * margin, g.ny() + 2 * ny_margin];
        let origin = [
            g.origin[0] - margin as f64 * g.h,
            g.origin[1] - ny_margin as f64 * g.h,
        ];
        let grid = Grid { shape, origin, ..g };
        let mut inside = vec![false; grid.len()];
        for k in self.inside_nodes() {
            let (i, j) = g.coords(k);
            inside[grid.index(i + margin, j + ny_margin)] = true;
        }
        GridDomain { grid, inside }
    }

    /// Subdomain of the same lattice selected by a predicate on inside nodes.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let inside = self
            .inside
            .iter()
            .enumerate()
            .map(|(k, &b)| b && keep(k))
            .collect();
        GridDomain::new(self.grid, inside)
    }

    /// Neighbours along the axes (4-neighbourhood in 2D), skipping the window
    /// edge.
    pub fn axis_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        neighbors(&self.grid, idx, false)
    }
}

pub(crate) fn neighbors(grid: &Grid, idx: usize, diagonal: bool) -> impl Iterator<Item = usize> {
    let (i, j) = grid.coords(idx);
    let (nx, ny) = (grid.nx() as i64, grid.ny() as i64);
    const AXIS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    const DIAG: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
    let n = if diagonal { 8 } else { 4 };
    let grid = *grid;
    AXIS.iter()
        .chain(DIAG.iter())
        .take(n)
        .filter_map(move |&(di, dj)| {
            let (a, b) = (i as i64 + di, j as i64 + dj);
            (a >= 0 && b >= 0 && a < nx && b < ny).then(|| grid.index(a as usize, b as usize))
        })
}

/// A non-empty set of marked nodes on a domain's lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSet {
    grid: Grid,
    nodes: Vec<usize>,
}

impl ObstacleSet {
    pub fn new(grid: Grid, mut nodes: Vec<usize>) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::invalid("obstacle set is empty"));
        }
        if let Some(&k) = nodes.iter().find(|&&k| k >= grid.len()) {
            return Err(Error::invalid(format!(
                "obstacle node {k} outside the grid window"
            )));
        }
        Ok(ObstacleSet { grid, nodes })
    }

    /// Nodes whose physical position satisfies a predicate.
    pub fn from_predicate(grid: Grid, pred: impl Fn([f64; 2]) -> bool) -> Result<Self> {
        let nodes = (0..grid.len())
            .filter(|&k| pred(grid.position(k)))
            .collect();
        ObstacleSet::new(grid, nodes)
    }

    /// The single node nearest to a point.
    pub fn point(grid: Grid, x: [f64; 2]) -> Result<Self> {
        let k = grid
            .nearest_node(x)
            .ok_or_else(|| Error::invalid(format!("point {x:?} outside the grid window")))?;
        ObstacleSet::new(grid, vec![k])
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.nodes.binary_search(&idx).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GridDomain {
        let grid = Grid::new(2, [5, 4], 0.5, [0.0, 0.0]).unwrap();
        let mut inside = vec![false; 20];
        inside[grid.index(1, 1)] = true;
        inside[grid.index(2, 2)] = true;
        GridDomain::new(grid, inside).unwrap()
    }

    #[test]
    fn rejects_mask_touching_window_edge() {
        let grid = Grid::new(2, [4, 4], 1.0, [0.0, 0.0]).unwrap();
        let mut inside = vec![false; 16];
        inside[grid.index(0, 2)] = true;
        assert!(GridDomain::new(grid, inside).is_err());
    }

    #[test]
    fn rejects_empty_mask() {
        let grid = Grid::new(2, [4, 4], 1.0, [0.0, 0.0]).unwrap();
        assert!(matches!(
            GridDomain::new(grid, vec![false; 16]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn padding_keeps_positions() {
        let d = small();
        let p = d.padded(3);
        assert_eq!(p.inside_count(), 2);
        let a: Vec<_> = d.inside_nodes().map(|k| d.grid().position(k)).collect();
        let b: Vec<_> = p.inside_nodes().map(|k| p.grid().position(k)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn diameter_of_two_points() {
        let d = small();
        assert!((d.diameter() - 0.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn intervals_rasterize_with_open_endpoints() {
        let d = GridDomain::from_intervals(&[(0.0, 1.0)], 0.25).unwrap();
        assert_eq!(d.inside_count(), 3);
        assert_eq!(d.dim(), 1);
    }

    #[test]
    fn obstacle_validation() {
        let grid = Grid::new(2, [4, 4], 1.0, [0.0, 0.0]).unwrap();
        assert!(ObstacleSet::new(grid, vec![]).is_err());
        assert!(ObstacleSet::new(grid, vec![16]).is_err());
        let o = ObstacleSet::new(grid, vec![3, 3, 1]).unwrap();
        assert_eq!(o.nodes(), &[1, 3]);
    }
}
