use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Grid, GridDomain};

/// How a field continues outside its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Zero on every outside node (Dirichlet problems).
    ZeroExtension,
    /// Only inside nodes carry meaning; differences across the boundary are
    /// ignored (Neumann problems).
    Free,
}

/// One real value per lattice node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    boundary: BoundaryKind,
}

impl Field {
    /// Validates finiteness, and zeros outside `domain` for zero-extension
    /// fields.
    pub fn new(domain: &GridDomain, values: Vec<f64>, boundary: BoundaryKind) -> Result<Self> {
        let grid = *domain.grid();
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite field value at node {k}"
            )));
        }
        if boundary == BoundaryKind::ZeroExtension {
            if let Some(k) = (0..grid.len()).find(|&k| !domain.is_inside(k) && values[k] != 0.0) {
                return Err(Error::invalid(format!(
                    "zero-extension field is non-zero at outside node {k}"
                )));
            }
        }
        Ok(Field {
            grid,
            values,
            boundary,
        })
    }

    /// Samples `f` at inside nodes; outside nodes get 0.
    pub fn from_fn(
        domain: &GridDomain,
        boundary: BoundaryKind,
        f: impl Fn([f64; 2]) -> f64,
    ) -> Result<Self> {
        let grid = domain.grid();
        let values = (0..grid.len())
            .map(|k| {
                if domain.is_inside(k) {
                    f(grid.position(k))
                } else {
                    0.0
                }
            })
            .collect();
        Field::new(domain, values, boundary)
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>, boundary: BoundaryKind) -> Self {
        Field {
            grid,
            values,
            boundary,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec};

    #[test]
    fn zero_extension_is_enforced() {
        let d = build_domain(&DomainSpec::new(DomainKind::Square { side: 1.0 }, 0.25)).unwrap();
        let f = Field::from_fn(&d, BoundaryKind::ZeroExtension, |x| x[0] + 1.0).unwrap();
        assert_eq!(f.values().iter().filter(|v| **v != 0.0).count(), 9);
        let ones = vec![1.0; d.grid().len()];
        assert!(Field::new(&d, ones.clone(), BoundaryKind::ZeroExtension).is_err());
        assert!(Field::new(&d, ones, BoundaryKind::Free).is_ok());
        let mut bad = vec![0.0; d.grid().len()];
        bad[12] = f64::NAN;
        assert!(Field::new(&d, bad, BoundaryKind::Free).is_err());
    }
}
