use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Admissible exponent triple `(N, p, q)`; `q = f64::INFINITY` encodes `q = ∞`.
///
/// Admissibility: `q ≤ p*` when `p < N`, `q < ∞` when `p = N`, anything when
/// `p > N`, with `p* = Np/(N − p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    n: usize,
    p: f64,
    q: f64,
}

impl Exponents {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Exponents(format!(
                "dimension must be at least 1, got {n}"
            )));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Exponents(format!(
                "p must be a finite real >= 1, got {p}"
            )));
        }
        if !(q >= 1.0) {
            return Err(Error::Exponents(format!("q must be >= 1, got {q}")));
        }
        let nf = n as f64;
        if p < nf {
            let crit = nf * p / (nf - p);
            if q > crit * (1.0 + 1e-12) {
                return Err(Error::Exponents(format!(
                    "q = {q} exceeds the critical exponent p* = {crit} for p = {p} < N = {n}"
                )));
            }
        } else if p == nf && q.is_infinite() {
            return Err(Error::Exponents(format!(
                "q must be finite when p = N = {n}"
            )));
        }
        Ok(Exponents { n, p, q })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `1/q`, reading 0 at `q = ∞`.
    #[inline]
    pub fn inv_q(&self) -> f64 {
        if self.q.is_infinite() {
            0.0
        } else {
            1.0 / self.q
        }
    }

    /// Critical Sobolev exponent `Np/(N − p)`, infinite when `p ≥ N`.
    pub fn critical(&self) -> f64 {
        let nf = self.n as f64;
        if self.p < nf {
            nf * self.p / (nf - self.p)
        } else {
            f64::INFINITY
        }
    }

    pub fn q_is_infinite(&self) -> bool {
        self.q.is_infinite()
    }

    /// Extra requirements of the planar multiply-connected lower bound:
    /// `N = 2`, `p ≤ q`, and `q < p*` strictly when `p < 2`.
    pub fn check_planar_theta(&self) -> Result<()> {
        if self.n != 2 {
            return Err(Error::Exponents(format!(
                "the inradius-topology bound is planar, got N = {}",
                self.n
            )));
        }
        if self.q < self.p {
            return Err(Error::Exponents(format!(
                "q = {} < p = {}: the bound fails already for convex sets (the infinite strip has \
                 finite inradius and vanishing frequency when q < p)",
                self.q, self.p
            )));
        }
        if self.p < 2.0 && self.q >= self.critical() {
            return Err(Error::Exponents(format!(
                "q must stay strictly below p* = {} when p < 2",
                self.critical()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_infinite() {
            write!(f, "(N={}, p={}, q=inf)", self.n, self.p)
        } else {
            write!(f, "(N={}, p={}, q={})", self.n, self.p, self.q)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_table() {
        assert!(Exponents::new(2, 1.0, 2.0).is_ok());
        assert!(Exponents::new(2, 1.0, 2.5).is_err());
        assert!(Exponents::new(2, 1.5, 6.0).is_ok());
        assert!(Exponents::new(2, 2.0, f64::INFINITY).is_err());
        assert!(Exponents::new(2, 2.0, 1e6).is_ok());
        assert!(Exponents::new(2, 4.0, f64::INFINITY).is_ok());
        assert!(Exponents::new(1, 2.0, f64::INFINITY).is_ok());
        assert!(Exponents::new(2, 0.5, 1.0).is_err());
        assert!(Exponents::new(0, 2.0, 2.0).is_err());
    }

    #[test]
    fn planar_theta_requirements() {
        assert!(Exponents::new(2, 2.0, 1.0)
            .unwrap()
            .check_planar_theta()
            .is_err());
        assert!(Exponents::new(2, 1.5, 6.0)
            .unwrap()
            .check_planar_theta()
            .is_err());
        assert!(Exponents::new(2, 1.5, 5.9)
            .unwrap()
            .check_planar_theta()
            .is_ok());
        assert!(Exponents::new(1, 2.0, 2.0)
            .unwrap()
            .check_planar_theta()
            .is_err());
        let msg = Exponents::new(2, 2.0, 1.0)
            .unwrap()
            .check_planar_theta()
            .unwrap_err()
            .to_string();
        assert!(msg.contains("strip"));
    }
}
