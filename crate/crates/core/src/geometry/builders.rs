use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Grid, GridDomain};
use crate::error::{Error, Result};

/// Default cap on the number of lattice nodes a builder may allocate.
pub const DEFAULT_NODE_BUDGET: usize = 16_000_000;

/// Set families the toolkit knows how to rasterize.
///
/// Placement conventions: disks and annuli are centred at the origin; the
/// square is `(0, side)²`; the strip is `(0, length) × (0, height)`; the
/// perforated set occupies `(0, n)²` with `n = ⌊√k⌋` plus a row of cells
/// below it; the pepper window is `(−m−½, m+½)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Disk {
        r: f64,
    },
    Square {
        side: f64,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    Strip {
        height: f64,
        length: f64,
    },
    /// `k` holes of radius `k^{-beta}` centred in unit cells.
    Perforated {
        k: usize,
        beta: f64,
    },
    /// Window minus the lattice points thickened to closed disks of radius `eps`.
    PepperWindow {
        m: usize,
        eps: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    /// Target grid spacing.
    pub resolution: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, resolution: f64) -> Self {
        DomainSpec { kind, resolution }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.resolution;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!(
                "resolution must be positive, got {h}"
            )));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        match self.kind {
            DomainKind::Disk { r } => positive("r", r),
            DomainKind::Square { side } => positive("side", side),
            DomainKind::Annulus { r_in, r_out } => {
                positive("r_in", r_in)?;
                positive("r_out", r_out)?;
                if r_in >= r_out {
                    return Err(Error::invalid("annulus needs r_in < r_out"));
                }
                Ok(())
            }
            DomainKind::Strip { height, length } => {
                positive("height", height)?;
                positive("length", length)
            }
            DomainKind::Perforated { k, beta } => {
                if k < 2 {
                    return Err(Error::invalid(format!(
                        "perforated set needs k >= 2, got {k}"
                    )));
                }
                if !(beta > 0.5) {
                    return Err(Error::invalid(format!(
                        "perforated set needs beta > 1/2, got {beta}"
                    )));
                }
                let eps = perforation_radius(k, beta);
                if eps >= 0.5 {
                    return Err(Error::invalid(format!(
                        "hole radius {eps:.4} does not fit in a unit cell (k = {k})"
                    )));
                }
                if eps < 2.0 * h {
                    return Err(Error::Resolution(format!(
                        "hole radius {eps:.5} is below 2h = {:.5}",
                        2.0 * h
                    )));
                }
                Ok(())
            }
            DomainKind::PepperWindow { m, eps } => {
                if m < 1 {
                    return Err(Error::invalid("pepper window needs m >= 1"));
                }
                positive("eps", eps)?;
                if eps >= 0.5 {
                    return Err(Error::invalid("pepper radius must stay below 1/2"));
                }
                if eps < h * (1.0 - 1e-9) {
                    return Err(Error::Resolution(format!(
                        "pepper radius {eps} is below the grid spacing {h}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Radius `k^{-β}` of the holes in the perforated construction.
pub fn perforation_radius(k: usize, beta: f64) -> f64 {
    (k as f64).powf(-beta)
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainKind::Disk { r } => write!(f, "disk:r={r}"),
            DomainKind::Square { side } => write!(f, "square:side={side}"),
            DomainKind::Annulus { r_in, r_out } => write!(f, "annulus:r_in={r_in},r_out={r_out}"),
            DomainKind::Strip { height, length } => {
                write!(f, "strip:height={height},length={length}")
            }
            DomainKind::Perforated { k, beta } => write!(f, "perforated:k={k},beta={beta}"),
            DomainKind::PepperWindow { m, eps } => write!(f, "pepper:m={m},eps={eps}"),
        }
    }
}

/// Parses `name:key=value,...`, e.g. `disk:r=1` or `perforated:k=16,beta=0.6`.
impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("malformed parameter '{kv}' in '{s}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("parameter '{k}' is not a number in '{s}'")))?;
            params.insert(k.trim().to_string(), v);
        }
        let take = |params: &mut std::collections::BTreeMap<String, f64>, key: &str| {
            params
                .remove(key)
                .ok_or_else(|| Error::invalid(format!("'{name}' needs parameter '{key}'")))
        };
        let as_count = |v: f64, key: &str| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!(
                    "'{key}' must be a non-negative integer"
                )))
            }
        };
        let kind = match name {
            "disk" => DomainKind::Disk {
                r: take(&mut params, "r")?,
            },
            "square" => DomainKind::Square {
                side: take(&mut params, "side")?,
            },
            "annulus" => DomainKind::Annulus {
                r_in: take(&mut params, "r_in")?,
                r_out: take(&mut params, "r_out")?,
            },
            "strip" => DomainKind::Strip {
                height: take(&mut params, "height")?,
                length: take(&mut params, "length")?,
            },
            "perforated" => DomainKind::Perforated {
                k: as_count(take(&mut params, "k")?, "k")?,
                beta: take(&mut params, "beta")?,
            },
            "pepper" | "pepper_window" => DomainKind::PepperWindow {
                m: as_count(take(&mut params, "m")?, "m")?,
                eps: take(&mut params, "eps")?,
            },
            other => return Err(Error::invalid(format!("unknown domain family '{other}'"))),
        };
        if let Some(extra) = params.keys().next() {
            return Err(Error::invalid(format!(
                "unknown parameter '{extra}' for '{name}'"
            )));
        }
        Ok(kind)
    }
}

pub fn build_domain(spec: &DomainSpec) -> Result<GridDomain> {
    build_domain_with_budget(spec, DEFAULT_NODE_BUDGET)
}

/// Rasterizes a set family: a node is inside iff its position lies in the
/// open set.
pub fn build_domain_with_budget(spec: &DomainSpec, budget: usize) -> Result<GridDomain> {
    spec.validate()?;
    let h = spec.resolution;
    let (lo, hi) = bounding_box(&spec.kind);
    // Two outside nodes of margin beyond the bounding box; lattice aligned
    // with integer multiples of h.
    let i0 = (lo[0] / h).floor() as i64 - 2;
    let j0 = (lo[1] / h).floor() as i64 - 2;
    let i1 = (hi[0] / h).ceil() as i64 + 2;
    let j1 = (hi[1] / h).ceil() as i64 + 2;
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    let nodes = nx.saturating_mul(ny);
    if nodes > budget {
        return Err(Error::Budget { nodes, budget });
    }
    let grid = Grid::new(2, [nx, ny], h, [i0 as f64 * h, j0 as f64 * h])?;
    let member = membership(spec.kind);
    let inside = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            let x = (i0 + i as i64) as f64 * h;
            let y = (j0 + j as i64) as f64 * h;
            member(x, y)
        })
        .collect();
    GridDomain::new(grid, inside)
}

fn bounding_box(kind: &DomainKind) -> ([f64; 2], [f64; 2]) {
    match *kind {
        DomainKind::Disk { r } => ([-r, -r], [r, r]),
        DomainKind::Annulus { r_out, .. } => ([-r_out, -r_out], [r_out, r_out]),
        DomainKind::Square { side } => ([0.0, 0.0], [side, side]),
        DomainKind::Strip { height, length } => ([0.0, 0.0], [length, height]),
        DomainKind::Perforated { k, .. } => {
            let n = isqrt(k);
            let extra = k - n * n;
            let ylo = if extra > 0 { -1.0 } else { 0.0 };
            ([0.0, ylo], [n.max(extra) as f64, n as f64])
        }
        DomainKind::PepperWindow { m, .. } => {
            let a = m as f64 + 0.5;
            ([-a, -a], [a, a])
        }
    }
}

pub(crate) fn isqrt(k: usize) -> usize {
    let mut n = (k as f64).sqrt() as usize;
    while n * n > k {
        n -= 1;
    }
    while (n + 1) * (n + 1) <= k {
        n += 1;
    }
    n
}

fn membership(kind: DomainKind) -> Box<dyn Fn(f64, f64) -> bool> {
    match kind {
        DomainKind::Disk { r } => Box::new(move |x, y| x * x + y * y < r * r),
        DomainKind::Annulus { r_in, r_out } => Box::new(move |x, y| {
            let s = x * x + y * y;
            s > r_in * r_in && s < r_out * r_out
        }),
        DomainKind::Square { side } => {
            Box::new(move |x, y| x > 0.0 && x < side && y > 0.0 && y < side)
        }
        DomainKind::Strip { height, length } => {
            Box::new(move |x, y| x > 0.0 && x < length && y > 0.0 && y < height)
        }
        DomainKind::Perforated { k, beta } => {
            let n = isqrt(k) as i64;
            let extra = (k as i64) - n * n;
            let eps = perforation_radius(k, beta);
            let cell = move |ci: i64, cj: i64| {
                (0..n).contains(&ci) && (0..n).contains(&cj)
                    || (cj == -1 && (0..extra).contains(&ci))
            };
            // Interior of a union of closed cells: every nearby point must be
            // covered.
            let covered = move |x: f64, y: f64| {
                const D: f64 = 1e-9;
                [(-D, -D), (-D, D), (D, -D), (D, D)]
                    .iter()
                    .all(|&(dx, dy)| cell((x + dx).floor() as i64, (y + dy).floor() as i64))
            };
            Box::new(move |x, y| {
                if !covered(x, y) {
                    return false;
                }
                let (ci, cj) = (x.floor(), y.floor());
                // Nearest hole centres: the cell's own and its neighbours'.
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let cx = ci + di as f64 + 0.5;
                        let cy = cj + dj as f64 + 0.5;
                        if cell(cx.floor() as i64, cy.floor() as i64)
                            && (x - cx).powi(2) + (y - cy).powi(2) <= eps * eps
                        {
                            return false;
                        }
                    }
                }
                true
            })
        }
        DomainKind::PepperWindow { m, eps } => {
            let a = m as f64 + 0.5;
            Box::new(move |x, y| {
                if !(x > -a && x < a && y > -a && y < a) {
                    return false;
                }
                let (px, py) = (x.round(), y.round());
                (x - px).powi(2) + (y - py).powi(2) > eps * eps
            })
        }
    }
}
