//! Sparse linear algebra used by the solvers: CSR matrices, preconditioned
//! conjugate gradients, a smoothed-aggregation multigrid preconditioner and a
//! block LOBPCG eigensolver for the lowest eigenpairs of SPD pencils.

mod amg;
mod csr;
mod lobpcg;
mod pcg;

pub use amg::{Amg, AmgOptions};
pub use csr::{Csr, TripletBuilder};
pub use lobpcg::{lobpcg, LobpcgOptions, LobpcgResult};
pub use pcg::{pcg, CgInfo, IdentityPrecond, Jacobi, Operator, Preconditioner};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha·x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
