use nalgebra::{DMatrix, SymmetricEigen};

use super::pcg::{Operator, Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobpcgOptions {
    /// Block size; only the first pair is required to converge.
    pub block: usize,
    /// Relative residual target `‖Ax − λBx‖ / (λ‖Bx‖)` for the first pair.
    pub tol: f64,
    /// Stop as well once the first Ritz value changes by less than this
    /// (relative) between iterations.
    pub value_tol: f64,
    pub max_iter: usize,
}

impl Default for LobpcgOptions {
    fn default() -> Self {
        LobpcgOptions {
            block: 3,
            tol: 1e-7,
            value_tol: 1e-12,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LobpcgResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Relative residual of the first pair.
    pub residual: f64,
    /// Relative change of the first Ritz value in the last iteration.
    pub value_change: f64,
    pub converged: bool,
}

fn bdot(b: &[f64], u: &[f64], v: &[f64]) -> f64 {
    b.iter().zip(u).zip(v).map(|((w, x), y)| w * x * y).sum()
}

// Modified Gram–Schmidt in the B inner product against `fixed` (assumed
// B-orthonormal) and within `vs`; drops vectors that collapse.
fn b_orthonormalize(b: &[f64], fixed: &[Vec<f64>], vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        let start = bdot(b, &v, &v).sqrt();
        if !(start > 0.0) || !start.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for f in fixed.iter().chain(out.iter()) {
                let c = bdot(b, f, &v);
                for (vi, fi) in v.iter_mut().zip(f) {
                    *vi -= c * fi;
                }
            }
        }
        let nrm = bdot(b, &v, &v).sqrt();
        if nrm > 1e-10 * start {
            v.iter_mut().for_each(|x| *x /= nrm);
            out.push(v);
        }
    }
    out
}

fn seed_vector(n: usize, k: usize) -> Vec<f64> {
    let mut s = 0x9E37_79B9_7F4A_7C15u64 ^ (k as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// Lowest eigenpairs of `A x = λ B x` with `B = diag(mass)`, locally optimal
/// block preconditioned conjugate gradients. Iterates are kept B-orthogonal
/// to `constraints` (which must be B-orthonormal).
pub fn lobpcg<A, T>(
    a: &A,
    mass: &[f64],
    precond: &T,
    initial: Vec<Vec<f64>>,
    constraints: &[Vec<f64>],
    opts: LobpcgOptions,
) -> LobpcgResult
where
    A: Operator + ?Sized,
    T: Preconditioner + ?Sized,
{
    let n = a.dim();
    let m = opts
        .block
        .max(1)
        .min(n.saturating_sub(constraints.len()).max(1));
    let mut x0 = initial;
    x0.truncate(m);
    let mut k = 0;
    while x0.len() < m {
        x0.push(seed_vector(n, k));
        k += 1;
    }
    let mut x = b_orthonormalize(mass, constraints, x0);
    while x.len() < m {
        let extra = b_orthonormalize(mass, constraints, {
            let mut v = x.clone();
            v.push(seed_vector(n, k));
            v
        });
        k += 1;
        x = extra;
    }
    let apply = |v: &[f64]| {
        let mut y = vec![0.0; n];
        a.apply(v, &mut y);
        y
    };
    // Initial Rayleigh–Ritz on X.
    let (mut x, mut ax, mut values) = {
        let ax: Vec<Vec<f64>> = x.iter().map(|v| apply(v)).collect();
        rayleigh_ritz(&x, &ax, m)
    };
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut last = values[0];
    let mut residual = f64::INFINITY;
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut w = Vec::with_capacity(m);
        for i in 0..m {
            let r: Vec<f64> = (0..n)
                .map(|j| ax[i][j] - values[i] * mass[j] * x[i][j])
                .collect();
            if i == 0 {
                let bx: f64 = x[0]
                    .iter()
                    .zip(mass)
                    .map(|(v, b)| (v * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                residual = super::norm(&r) / (values[0].abs().max(f64::MIN_POSITIVE) * bx);
            }
            let mut z = vec![0.0; n];
            precond.apply(&r, &mut z);
            w.push(z);
        }
        if residual <= opts.tol || (it > 1 && change <= opts.value_tol) {
            return LobpcgResult {
                values,
                vectors: x,
                iterations: it - 1,
                residual,
                value_change: change,
                converged: true,
            };
        }
        let mut basis = x.clone();
        let fixed: Vec<Vec<f64>> = constraints
            .iter()
            .cloned()
            .chain(x.iter().cloned())
            .collect();
        let mut rest = w;
        rest.append(&mut p);
        let rest = b_orthonormalize(mass, &fixed, rest);
        let n_rest = rest.len();
        basis.extend(rest);
        let abasis: Vec<Vec<f64>> = x
            .iter()
            .zip(ax.iter())
            .map(|(_, av)| av.clone())
            .chain(basis[m..].iter().map(|v| apply(v)))
            .collect();
        let dim = basis.len();
        let mut g = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = super::dot(&basis[i], &abasis[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let (vals, vecs) = sorted_eigen(g);
        let mut xn = vec![vec![0.0; n]; m];
        let mut axn = vec![vec![0.0; n]; m];
        let mut pn = vec![vec![0.0; n]; m];
        for c in 0..m {
            for r in 0..dim {
                let coef = vecs[(r, c)];
                if coef == 0.0 {
                    continue;
                }
                super::axpy(coef, &basis[r], &mut xn[c]);
                super::axpy(coef, &abasis[r], &mut axn[c]);
                if r >= m {
                    super::axpy(coef, &basis[r], &mut pn[c]);
                }
            }
        }
        x = xn;
        ax = axn;
        values = vals[..m].to_vec();
        p = if n_rest > 0 { pn } else { Vec::new() };
        change = ((values[0] - last) / values[0]).abs();
        last = values[0];
    }
    LobpcgResult {
        values,
        vectors: x,
        iterations: opts.max_iter,
        residual,
        value_change: change,
        converged: false,
    }
}

fn sorted_eigen(g: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let dim = g.nrows();
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn rayleigh_ritz(
    x: &[Vec<f64>],
    ax: &[Vec<f64>],
    m: usize,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let dim = x.len();
    let n = x[0].len();
    let g = DMatrix::from_fn(dim, dim, |i, j| {
        0.5 * (super::dot(&x[i], &ax[j]) + super::dot(&x[j], &ax[i]))
    });
    let (vals, vecs) = sorted_eigen(g);
    let mut xn = vec![vec![0.0; n]; m];
    let mut axn = vec![vec![0.0; n]; m];
    for c in 0..m {
        for r in 0..dim {
            super::axpy(vecs[(r, c)], &x[r], &mut xn[c]);
            super::axpy(vecs[(r, c)], &ax[r], &mut axn[c]);
        }
    }
    (xn, axn, vals[..m].to_vec())
}
