use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::GridDomain;

use super::stencil::Stencil;
use super::{BoundaryKind, Field};

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizeReport {
    #[serde(skip)]
    pub field: Field,
    pub energy_before: f64,
    pub energy_after: f64,
    pub lp_before: f64,
    pub lp_after: f64,
}

struct Block {
    lo: [usize; 2],
    hi: [usize; 2],
    nx: usize,
}

impl Block {
    fn of(domain: &GridDomain) -> Result<Self> {
        let g = domain.grid();
        let (mut lo, mut hi) = ([usize::MAX; 2], [0usize; 2]);
        for k in domain.inside_nodes() {
            let (i, j) = g.coords(k);
            lo = [lo[0].min(i), lo[1].min(j)];
            hi = [hi[0].max(i), hi[1].max(j)];
        }
        let count = (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1);
        if count != domain.inside_count() {
            return Err(Error::invalid(
                "symmetrization needs a domain that fills a rectangular block of nodes",
            ));
        }
        if g.dim == 2 && hi[0] - lo[0] != hi[1] - lo[1] {
            return Err(Error::invalid("symmetrization needs a cube-shaped domain"));
        }
        Ok(Block { lo, hi, nx: g.nx() })
    }

    /// Node mirrored across the block's centre along `axis`.
    fn reflect(&self, k: usize, axis: usize) -> usize {
        let (i, j) = (k % self.nx, k / self.nx);
        if axis == 0 {
            (self.lo[0] + self.hi[0] - i) + self.nx * j
        } else {
            i + self.nx * (self.lo[1] + self.hi[1] - j)
        }
    }
}

fn lp_norm(domain: &GridDomain, v: &[f64], p: f64) -> f64 {
    let w = domain.grid().cell_volume();
    (w * domain
        .inside_nodes()
        .map(|k| v[k].abs().powf(p))
        .sum::<f64>())
    .powf(1.0 / p)
}

/// Mean of the forward- and backward-difference `p`-energies over the block
/// (free differences), which is invariant under reflections of the block.
pub fn symmetric_energy(domain: &GridDomain, u: &Field, p: f64) -> Result<f64> {
    let block = Block::of(domain)?;
    if u.grid() != domain.grid() {
        return Err(Error::invalid("field and domain live on different grids"));
    }
    let stencil = Stencil::new(domain, BoundaryKind::Free);
    let v = u.values();
    let mut mirrored = vec![0.0; v.len()];
    for k in domain.inside_nodes() {
        let mut m = k;
        for a in 0..domain.dim() {
            m = block.reflect(m, a);
        }
        mirrored[k] = v[m];
    }
    Ok(0.5 * (stencil.energy(v, p) + stencil.energy(&mirrored, p)))
}

/// Reflection symmetrization: starting from `|u|`, for each axis
/// `σ ← (½σ^p + ½(σ∘R)^p)^{1/p}` with `R` the reflection of the block along
/// that axis. The `L^p` norm is preserved node by node.
pub fn symmetrize(domain: &GridDomain, u: &Field, p: f64) -> Result<SymmetrizeReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Exponents(format!("need 1 ≤ p < ∞, got {p}")));
    }
    let block = Block::of(domain)?;
    if u.grid() != domain.grid() {
        return Err(Error::invalid("field and domain live on different grids"));
    }
    let mut sigma: Vec<f64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| if domain.is_inside(k) { v.abs() } else { 0.0 })
        .collect();
    for a in 0..domain.dim() {
        let prev = sigma.clone();
        for k in domain.inside_nodes() {
            let m = block.reflect(k, a);
            sigma[k] = (0.5 * prev[k].powf(p) + 0.5 * prev[m].powf(p)).powf(1.0 / p);
        }
    }
    let field = Field::from_parts(*domain.grid(), sigma, u.boundary());
    Ok(SymmetrizeReport {
        energy_before: symmetric_energy(domain, u, p)?,
        energy_after: symmetric_energy(domain, &field, p)?,
        lp_before: lp_norm(domain, u.values(), p),
        lp_after: lp_norm(domain, field.values(), p),
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec};

    fn cube() -> GridDomain {
        build_domain(&DomainSpec::new(
            DomainKind::Square { side: 2.0 },
            1.0 / 16.0,
        ))
        .unwrap()
    }

    #[test]
    fn symmetric_input_is_a_fixed_point() {
        let d = cube();
        let u = Field::from_fn(&d, BoundaryKind::Free, |x| {
            -((x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2))
        })
        .unwrap();
        let r = symmetrize(&d, &u, 2.0).unwrap();
        for k in d.inside_nodes() {
            assert!((r.field.values()[k] - u.values()[k].abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_preserved_and_energy_decreases() {
        let d = cube();
        let u = Field::from_fn(&d, BoundaryKind::Free, |x| x[0] + 2.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let r = symmetrize(&d, &u, p).unwrap();
            assert!((r.lp_after / r.lp_before - 1.0).abs() < 1e-13);
            assert!(
                r.energy_after <= r.energy_before * 1.02,
                "{} {}",
                r.energy_after,
                r.energy_before
            );
            for k in d.inside_nodes() {
                let m = Block::of(&d).unwrap().reflect(k, 0);
                assert!((r.field.values()[k] - r.field.values()[m]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_cubes() {
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, 0.25)).unwrap();
        let u = Field::from_fn(&d, BoundaryKind::Free, |_| 1.0).unwrap();
        assert!(symmetrize(&d, &u, 2.0).is_err());
    }
}
