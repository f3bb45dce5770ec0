//! Variational solvers for the constants the bounds are stated about:
//! `λ_{p,q}`, `λ_{p,∞}`, `cap_p`, the punctured constants `Λ_p`, `Λ_{p,∞}`,
//! the Poincaré–Wirtinger constant `μ_{p,q}` and the Cheeger constant `h`,
//! plus the inversion extension and the reflection symmetrization.
//!
//! Gradients are forward differences with node-centred masses (see
//! [`Stencil`](stencil)), so every discrete problem is exactly monotone under
//! inclusion of domains and obstacles.

mod capacity;
mod cheeger;
mod extension;
mod field;
mod frequency;
mod maxflow;
mod neumann;
mod newton;
mod quotient;
mod radial;
mod stencil;
mod symmetrize;
mod tv;

pub use capacity::capacity;
pub use cheeger::{cheeger_maxflow, geo_cut_perimeter, geo_cut_weights};
pub use extension::{extend_inversion, ExtensionReport};
pub use field::{BoundaryKind, Field};
pub use frequency::{
    linf_frequency, principal_frequency, principal_frequency_refined, punctured_frequency,
    punctured_linf_frequency, rayleigh_gradient, rayleigh_quotient, richardson,
};
pub use neumann::neumann_constant;
pub use radial::{punctured_radial, RadialMode, RadialReport};
pub use symmetrize::{symmetric_energy, symmetrize, SymmetrizeReport};
pub use tv::lambda11_tv;

use serde::{Deserialize, Serialize};

/// The variational constant a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Lambda,
    LambdaInf,
    Capacity,
    Cheeger,
    Lambda11,
    Mu,
    PuncturedLp,
    PuncturedLinf,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Quantity::Lambda => "lambda",
            Quantity::LambdaInf => "lambda-inf",
            Quantity::Capacity => "capacity",
            Quantity::Cheeger => "cheeger",
            Quantity::Lambda11 => "lambda11",
            Quantity::Mu => "mu",
            Quantity::PuncturedLp => "punctured-lp",
            Quantity::PuncturedLinf => "punctured-linf",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative change of the quotient at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

/// Value of a variational constant with its minimizer and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub quantity: Quantity,
    pub value: f64,
    /// Minimizer, when the method produces one.
    #[serde(skip)]
    pub field: Option<Field>,
    pub iterations: usize,
    /// Final relative change of the quotient (or Newton decrement).
    pub residual: f64,
    pub h: f64,
    /// Two-grid Richardson value `2λ(h/2) − λ(h)`.
    pub extrapolated: Option<f64>,
    pub converged: bool,
}
