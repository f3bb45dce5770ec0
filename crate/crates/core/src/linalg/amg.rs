use nalgebra::{DMatrix, DVector};

use super::csr::Csr;
use super::pcg::Preconditioner;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmgOptions {
    /// Strength threshold: `|a_ij| ≥ θ·√(a_ii·a_jj)`.
    pub theta: f64,
    /// Stop coarsening at this many unknowns.
    pub coarse_size: usize,
    pub max_levels: usize,
}

impl Default for AmgOptions {
    fn default() -> Self {
        AmgOptions {
            theta: 0.08,
            coarse_size: 400,
            max_levels: 25,
        }
    }
}

// Rectangular CSR used for prolongators.
#[derive(Debug, Clone)]
struct Rect {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl Rect {
    fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    fn transpose(&self) -> Rect {
        let mut count = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            count[c as usize + 1] += 1;
        }
        for i in 0..self.cols {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut indices = vec![0u32; self.indices.len()];
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.rows() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                let k = next[j as usize];
                indices[k] = i as u32;
                values[k] = x;
                next[j as usize] += 1;
            }
        }
        Rect {
            cols: self.rows(),
            indptr: count,
            indices,
            values,
        }
    }
}

struct Level {
    a: Csr,
    inv_diag: Vec<f64>,
    p: Rect,
    pt: Rect,
}

enum Coarse {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Smooth(Csr, Vec<f64>),
}

/// Smoothed-aggregation algebraic multigrid, applied as one symmetric
/// V-cycle (forward Gauss–Seidel down, backward Gauss–Seidel up).
pub struct Amg {
    levels: Vec<Level>,
    coarse: Coarse,
    coarse_n: usize,
}

fn inverse_diagonal(a: &Csr) -> Vec<f64> {
    a.diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect()
}

fn aggregate(a: &Csr, theta: f64) -> (Vec<u32>, usize) {
    let n = a.n();
    let diag_owned = a.diagonal();
    let diag = &diag_owned;
    let strong = |i: usize| {
        let (c, v) = a.row(i);
        let di = diag[i].abs();
        c.iter()
            .zip(v)
            .filter(move |(&j, &x)| {
                j as usize != i
                    && x != 0.0
                    && x.abs() >= theta * (di * diag[j as usize].abs()).sqrt()
            })
            .map(|(&j, _)| j as usize)
    };
    const NONE: u32 = u32::MAX;
    let mut agg = vec![NONE; n];
    let mut count = 0u32;
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        if strong(i).all(|j| agg[j] == NONE) {
            agg[i] = count;
            for j in strong(i) {
                agg[j] = count;
            }
            count += 1;
        }
    }
    let pass1 = agg.clone();
    for i in 0..n {
        if agg[i] == NONE {
            if let Some(j) = strong(i).find(|&j| pass1[j] != NONE) {
                agg[i] = pass1[j];
            }
        }
    }
    for i in 0..n {
        if agg[i] == NONE {
            agg[i] = count;
            for j in strong(i) {
                if agg[j] == NONE {
                    agg[j] = count;
                }
            }
            count += 1;
        }
    }
    (agg, count as usize)
}

fn spectral_radius_dinv_a(a: &Csr, inv_diag: &[f64]) -> f64 {
    let n = a.n();
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0)
        .collect();
    let mut y = vec![0.0; n];
    let mut rho = 1.0;
    for _ in 0..15 {
        a.mul_vec(&x, &mut y);
        for (yi, d) in y.iter_mut().zip(inv_diag) {
            *yi *= d;
        }
        let nx = super::norm(&x);
        let ny = super::norm(&y);
        if nx == 0.0 || ny == 0.0 {
            return 1.0;
        }
        rho = ny / nx;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    rho * 1.05
}

fn smoothed_prolongator(a: &Csr, inv_diag: &[f64], agg: &[u32], nc: usize) -> Rect {
    let omega = (4.0 / 3.0) / spectral_radius_dinv_a(a, inv_diag);
    let n = a.n();
    let mut acc = vec![0.0; nc];
    let mut touched: Vec<u32> = Vec::new();
    let mut mark = vec![false; nc];
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for i in 0..n {
        let own = agg[i] as usize;
        acc[own] += 1.0;
        mark[own] = true;
        touched.push(own as u32);
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            let cj = agg[j as usize] as usize;
            if !mark[cj] {
                mark[cj] = true;
                touched.push(cj as u32);
            }
            acc[cj] -= omega * inv_diag[i] * x;
        }
        touched.sort_unstable();
        for &t in &touched {
            let val = acc[t as usize];
            if val != 0.0 {
                indices.push(t);
                values.push(val);
            }
            acc[t as usize] = 0.0;
            mark[t as usize] = false;
        }
        touched.clear();
        indptr.push(indices.len());
    }
    Rect {
        cols: nc,
        indptr,
        indices,
        values,
    }
}

// Galerkin product Pᵀ A P, row by row through Pᵀ.
fn galerkin(a: &Csr, p: &Rect, pt: &Rect) -> Csr {
    let nc = p.cols;
    let n = a.n();
    // AP row-wise.
    let mut acc = vec![0.0; nc];
    let mut mark = vec![false; nc];
    let mut touched: Vec<u32> = Vec::new();
    let mut ap_ptr = Vec::with_capacity(n + 1);
    let mut ap_idx = Vec::new();
    let mut ap_val = Vec::new();
    ap_ptr.push(0);
    for i in 0..n {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            let (pc, pv) = p.row(j as usize);
            for (&k, &y) in pc.iter().zip(pv) {
                if !mark[k as usize] {
                    mark[k as usize] = true;
                    touched.push(k);
                }
                acc[k as usize] += x * y;
            }
        }
        for &t in &touched {
            ap_idx.push(t);
            ap_val.push(acc[t as usize]);
            acc[t as usize] = 0.0;
            mark[t as usize] = false;
        }
        touched.clear();
        ap_ptr.push(ap_idx.len());
    }
    let ap = Rect {
        cols: nc,
        indptr: ap_ptr,
        indices: ap_idx,
        values: ap_val,
    };
    let mut indptr = Vec::with_capacity(nc + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for r in 0..nc {
        let (fi, fv) = pt.row(r);
        for (&i, &x) in fi.iter().zip(fv) {
            let (c, v) = ap.row(i as usize);
            for (&k, &y) in c.iter().zip(v) {
                if !mark[k as usize] {
                    mark[k as usize] = true;
                    touched.push(k);
                }
                acc[k as usize] += x * y;
            }
        }
        touched.sort_unstable();
        for &t in &touched {
            indices.push(t);
            values.push(acc[t as usize]);
            acc[t as usize] = 0.0;
            mark[t as usize] = false;
        }
        touched.clear();
        indptr.push(indices.len());
    }
    // Symmetrize against round-off so the V-cycle stays symmetric.
    let c = Csr::from_raw(nc, indptr, indices, values);
    symmetrize(&c)
}

fn symmetrize(a: &Csr) -> Csr {
    let (ptr, idx, val) = a.raw();
    let mut vals = val.to_vec();
    for i in 0..a.n() {
        for k in ptr[i]..ptr[i + 1] {
            let j = idx[k] as usize;
            if j > i {
                let (cj, _) = a.row(j);
                if let Ok(pos) = cj.binary_search(&(i as u32)) {
                    let kk = ptr[j] + pos;
                    let m = 0.5 * (val[k] + val[kk]);
                    vals[k] = m;
                    vals[kk] = m;
                }
            }
        }
    }
    Csr::from_raw(a.n(), ptr.to_vec(), idx.to_vec(), vals)
}

fn gauss_seidel(a: &Csr, inv_diag: &[f64], b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.n();
    let mut step = |i: usize| {
        let (c, v) = a.row(i);
        let mut s = b[i];
        let mut d = 0.0;
        for (&j, &aij) in c.iter().zip(v) {
            if j as usize == i {
                d = aij;
            } else {
                s -= aij * x[j as usize];
            }
        }
        if d > 0.0 {
            x[i] = s / d;
        } else {
            x[i] += inv_diag[i] * s;
        }
    };
    if forward {
        (0..n).for_each(&mut step);
    } else {
        (0..n).rev().for_each(&mut step);
    }
}

impl Amg {
    pub fn new(a: &Csr) -> Self {
        Amg::with_options(a, AmgOptions::default())
    }

    pub fn with_options(a: &Csr, opts: AmgOptions) -> Self {
        let mut levels = Vec::new();
        let mut current = a.clone();
        while current.n() > opts.coarse_size && levels.len() + 1 < opts.max_levels {
            let inv_diag = inverse_diagonal(&current);
            let (agg, nc) = aggregate(&current, opts.theta);
            if nc == 0 || nc as f64 > 0.9 * current.n() as f64 {
                break;
            }
            let p = smoothed_prolongator(&current, &inv_diag, &agg, nc);
            let pt = p.transpose();
            let coarse = galerkin(&current, &p, &pt);
            levels.push(Level {
                a: current,
                inv_diag,
                p,
                pt,
            });
            current = coarse;
        }
        let coarse_n = current.n();
        let coarse = dense_factor(&current).unwrap_or_else(|| {
            let d = inverse_diagonal(&current);
            Coarse::Smooth(current, d)
        });
        Amg {
            levels,
            coarse,
            coarse_n,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels.len() + 1
    }

    fn cycle(&self, lvl: usize, b: &[f64], x: &mut [f64]) {
        if lvl == self.levels.len() {
            match &self.coarse {
                Coarse::Cholesky(ch) => {
                    let sol = ch.solve(&DVector::from_column_slice(b));
                    x.copy_from_slice(sol.as_slice());
                }
                Coarse::Smooth(a, d) => {
                    x.iter_mut().for_each(|v| *v = 0.0);
                    for _ in 0..20 {
                        gauss_seidel(a, d, b, x, true);
                        gauss_seidel(a, d, b, x, false);
                    }
                }
            }
            return;
        }
        let level = &self.levels[lvl];
        let n = level.a.n();
        x.iter_mut().for_each(|v| *v = 0.0);
        gauss_seidel(&level.a, &level.inv_diag, b, x, true);
        let mut r = vec![0.0; n];
        level.a.mul_vec(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let nc = level.p.cols;
        let mut rc = vec![0.0; nc];
        for (c, rcv) in rc.iter_mut().enumerate() {
            let (fi, fv) = level.pt.row(c);
            *rcv = fi.iter().zip(fv).map(|(&i, &w)| w * r[i as usize]).sum();
        }
        let mut xc = vec![0.0; nc];
        self.cycle(lvl + 1, &rc, &mut xc);
        for (i, xi) in x.iter_mut().enumerate() {
            let (c, v) = level.p.row(i);
            *xi += c
                .iter()
                .zip(v)
                .map(|(&k, &w)| w * xc[k as usize])
                .sum::<f64>();
        }
        gauss_seidel(&level.a, &level.inv_diag, b, x, false);
    }
}

fn dense_factor(a: &Csr) -> Option<Coarse> {
    let n = a.n();
    if n > 3000 {
        return None;
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            m[(i, j as usize)] = x;
        }
    }
    m.cholesky().map(Coarse::Cholesky)
}

impl Preconditioner for Amg {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        debug_assert!(self.levels.first().map_or(self.coarse_n, |l| l.a.n()) == r.len());
        self.cycle(0, r, z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pcg, TripletBuilder};

    fn laplacian_2d(m: usize) -> Csr {
        let n = m * m;
        let mut b = TripletBuilder::new(n);
        for j in 0..m {
            for i in 0..m {
                let k = i + m * j;
                b.push(k, k, 4.0);
                if i > 0 {
                    b.push(k, k - 1, -1.0);
                }
                if i + 1 < m {
                    b.push(k, k + 1, -1.0);
                }
                if j > 0 {
                    b.push(k, k - m, -1.0);
                }
                if j + 1 < m {
                    b.push(k, k + m, -1.0);
                }
            }
        }
        b.build()
    }

    #[test]
    fn multigrid_pcg_is_mesh_independent() {
        let mut iters = Vec::new();
        for m in [32, 128] {
            let a = laplacian_2d(m);
            let amg = Amg::new(&a);
            assert!(amg.levels() >= 2);
            let b: Vec<f64> = (0..m * m).map(|k| ((k * 37) % 11) as f64 - 5.0).collect();
            let mut x = vec![0.0; m * m];
            let info = pcg(&a, &amg, &b, &mut x, 1e-10, 200);
            assert!(info.converged, "{info:?}");
            iters.push(info.iterations);
        }
        assert!(iters[1] < 40, "{iters:?}");
    }

    #[test]
    fn coarse_operator_is_symmetric() {
        let a = laplacian_2d(40);
        let inv = inverse_diagonal(&a);
        let (agg, nc) = aggregate(&a, 0.08);
        let p = smoothed_prolongator(&a, &inv, &agg, nc);
        let c = galerkin(&a, &p, &p.transpose());
        assert!(c.is_symmetric(1e-12));
        assert!(nc < a.n() / 4);
    }
}
