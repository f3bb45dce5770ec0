//! Closed-form constants and inequality bounds.
//!
//! Everything here is a pure function of the exponents and a few scalar
//! descriptors of a domain (inradius, order, volume, diameter). The
//! Poincaré–Wirtinger constant of the unit ball that enters the Maz'ya
//! constant is always replaced by its explicit lower bound, so every value
//! is reproducible to the last bit.

mod constants;
mod exponents;

pub use constants::*;
pub use exponents::Exponents;

use serde::{Deserialize, Serialize};

/// Direction of a verified inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// `target ≥ bound`.
    Lower,
    /// `target ≤ bound`.
    Upper,
}

/// Scalar descriptors of the domain a row was computed on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RowInputs {
    pub inradius: f64,
    pub order: usize,
    pub volume: f64,
    pub diameter: f64,
}

/// One verification record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub label: String,
    pub inputs: RowInputs,
    pub sense: Sense,
    pub bound: f64,
    pub target: f64,
    /// `target − bound` for lower bounds, `bound − target` for upper bounds.
    pub margin: f64,
    pub pass: bool,
    /// Set when the numeric target comes from a solve that did not converge
    /// or failed; such rows never count as clean violations.
    pub solver_failed: bool,
}

impl BoundRow {
    /// Builds a row; `pass ⇔ margin ≥ −tolerance`.
    pub fn new(
        label: impl Into<String>,
        inputs: RowInputs,
        sense: Sense,
        bound: f64,
        target: f64,
        tolerance: f64,
    ) -> Self {
        let margin = match sense {
            Sense::Lower => target - bound,
            Sense::Upper => bound - target,
        };
        BoundRow {
            label: label.into(),
            inputs,
            sense,
            bound,
            target,
            margin,
            pass: margin >= -tolerance && margin.is_finite(),
            solver_failed: false,
        }
    }

    /// Row standing in for a failed solve.
    pub fn failed(label: impl Into<String>, inputs: RowInputs, sense: Sense, bound: f64) -> Self {
        BoundRow {
            label: label.into(),
            inputs,
            sense,
            bound,
            target: f64::NAN,
            margin: f64::NAN,
            pass: false,
            solver_failed: true,
        }
    }

    /// A violation that cannot be blamed on the solver.
    pub fn clean_violation(&self) -> bool {
        !self.pass && !self.solver_failed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_margins() {
        let r = BoundRow::new("x", RowInputs::default(), Sense::Lower, 1.0, 3.0, 0.0);
        assert_eq!(r.margin, 2.0);
        assert!(r.pass);
        let r = BoundRow::new("x", RowInputs::default(), Sense::Upper, 1.0, 1.05, 0.1);
        assert!(r.pass);
        assert!((r.margin + 0.05).abs() < 1e-12);
        let r = BoundRow::new("x", RowInputs::default(), Sense::Upper, 1.0, 1.2, 0.1);
        assert!(r.clean_violation());
        let f = BoundRow::failed("x", RowInputs::default(), Sense::Lower, 1.0);
        assert!(!f.clean_violation());
    }
}
