//! Exact Euclidean distance transform by the separable lower-envelope
//! algorithm (one pass per axis over squared distances).

use super::GridDomain;

/// Lower envelope of the parabolas `(x − q)² + f(q)` sampled at integer `x`.
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    // Skip leading infinite samples: they never form part of the envelope.
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(q) => q,
        None => {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        // z[0] = -inf, so the envelope never pops below its first parabola.
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (x, o) in out.iter_mut().enumerate() {
        while z[k + 1] < x as f64 {
            k += 1;
        }
        let p = v[k];
        let d = x as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Per-node Euclidean distance (physical units) to the nearest outside node.
/// Outside nodes carry distance 0.
pub fn distance_transform(domain: &GridDomain) -> Vec<f64> {
    let g = domain.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut sq: Vec<f64> = domain
        .mask()
        .iter()
        .map(|&inside| if inside { f64::INFINITY } else { 0.0 })
        .collect();
    let nmax = nx.max(ny);
    let mut buf = vec![0.0; nmax];
    let mut out = vec![0.0; nmax];
    let mut v = vec![0usize; nmax];
    let mut z = vec![0.0; nmax + 1];
    for j in 0..ny {
        let row = &mut sq[j * nx..(j + 1) * nx];
        buf[..nx].copy_from_slice(row);
        envelope_1d(&buf[..nx], &mut out[..nx], &mut v, &mut z);
        row.copy_from_slice(&out[..nx]);
    }
    if domain.dim() == 2 {
        for i in 0..nx {
            for j in 0..ny {
                buf[j] = sq[i + nx * j];
            }
            envelope_1d(&buf[..ny], &mut out[..ny], &mut v, &mut z);
            for j in 0..ny {
                sq[i + nx * j] = out[j];
            }
        }
    }
    sq.iter().map(|&s| s.sqrt() * g.h).collect()
}

/// Inside node farthest from the complement, with its distance.
pub fn inradius_center(domain: &GridDomain) -> (usize, f64) {
    let dt = distance_transform(domain);
    dt.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &d)| {
            if d > best.1 {
                (k, d)
            } else {
                best
            }
        })
}

/// Inradius of the rasterized set: the largest distance from an inside node
/// to the nearest outside node centre.
pub fn inradius(domain: &GridDomain) -> f64 {
    inradius_center(domain).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind, DomainSpec, Grid};

    fn brute_force(domain: &GridDomain) -> Vec<f64> {
        let g = domain.grid();
        let outside: Vec<[f64; 2]> = (0..g.len())
            .filter(|&k| !domain.is_inside(k))
            .map(|k| g.position(k))
            .collect();
        (0..g.len())
            .map(|k| {
                if !domain.is_inside(k) {
                    return 0.0;
                }
                let p = g.position(k);
                outside
                    .iter()
                    .map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_on_annulus() {
        let d = build_domain(&DomainSpec::new(
            DomainKind::Annulus {
                r_in: 0.3,
                r_out: 1.0,
            },
            1.0 / 16.0,
        ))
        .unwrap();
        let fast = distance_transform(&d);
        let slow = brute_force(&d);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let grid = Grid::new(2, [13, 9], 0.1, [0.0, 0.0]).unwrap();
            let mut inside: Vec<bool> = (0..grid.len())
                .map(|k| !grid.on_window_edge(k) && rng.gen_bool(0.7))
                .collect();
            inside[grid.index(5, 4)] = true;
            let d = GridDomain::new(grid, inside).unwrap();
            let fast = distance_transform(&d);
            let slow = brute_force(&d);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn disk_and_strip_inradius() {
        let h = 1.0 / 64.0;
        let tol = h * 2f64.sqrt();
        let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, h)).unwrap();
        assert!((inradius(&d) - 1.0).abs() <= tol);
        let s = build_domain(&DomainSpec::new(
            DomainKind::Strip {
                height: 2.0,
                length: 20.0,
            },
            h,
        ))
        .unwrap();
        assert!((inradius(&s) - 1.0).abs() <= tol);
    }

    #[test]
    fn one_dimensional_transform() {
        let d = GridDomain::from_intervals(&[(0.0, 1.0)], 0.125).unwrap();
        assert!((inradius(&d) - 0.5).abs() < 1e-12);
    }
}
