use std::f64::consts::PI;

use serde::Serialize;

use super::Exponents;
use crate::error::{Error, Result};

/// First positive zero of the Bessel function `J_0`, to nine digits.
pub const J01: f64 = 2.404825558;

/// Volume of the unit ball in `R^N`.
pub fn omega(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * omega(n - 2),
    }
}

/// Homogeneity degree `p − N + Np/q` of `λ_{p,q}` under dilations.
pub fn scaling_exponent(e: &Exponents) -> f64 {
    e.p() - e.n() as f64 + e.n() as f64 * e.p() * e.inv_q()
}

/// Explicit lower bound for the Poincaré–Wirtinger constant `μ_{p,q}` of a
/// bounded convex set with the given volume and diameter.
pub fn mu_lower_bound(e: &Exponents, volume: f64, diameter: f64) -> Result<f64> {
    if e.q() < e.p() {
        return Err(Error::Exponents(format!("needs q >= p, got {e}")));
    }
    if !(volume > 0.0 && diameter > 0.0) {
        return Err(Error::invalid("volume and diameter must be positive"));
    }
    let n = e.n() as f64;
    let p = e.p();
    let iq = e.inv_q();
    let lead = (n * omega(e.n()).powf(1.0 / n)).powf(p);
    let shape = (volume / diameter.powf(n)).powf(p);
    let ratio = ((1.0 / n - 1.0 / p + iq) / (1.0 - 1.0 / p + iq)).max(0.0);
    let expo = p - 1.0 + p * iq;
    Ok(lead * shape * ratio.powf(expo) * volume.powf(1.0 - p / n - p * iq))
}

/// Lower bound of `μ_{p,q}(B_1)` (volume `ω_N`, diameter 2).
pub fn mu_ball_lower_bound(e: &Exponents) -> Result<f64> {
    mu_lower_bound(e, omega(e.n()), 2.0)
}

/// Constants of the extension operator for a convex set with eccentricity
/// `D_K(x₀)/d_K(x₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionConstants {
    /// Gradient constant `𝒜`.
    pub gradient: f64,
    /// `L^p` constant `ℬ`.
    pub lp: f64,
    /// `α_{N,p}`: `𝒜` evaluated for a cube, eccentricity `√N`.
    pub alpha: f64,
}

pub fn extension_constants(e: &Exponents, eccentricity: f64) -> Result<ExtensionConstants> {
    if !(eccentricity >= 1.0) {
        return Err(Error::invalid(format!(
            "eccentricity must be >= 1, got {eccentricity}"
        )));
    }
    let n = e.n() as f64;
    let p = e.p();
    Ok(ExtensionConstants {
        gradient: gradient_constant(n, p, eccentricity),
        lp: ((2f64.ln() + n * 6f64.ln()) / p).exp() * eccentricity.powf(2.0 * n / p),
        alpha: gradient_constant(n, p, n.sqrt()),
    })
}

// (4·6^{3N+p})^{1/p}·ecc^{6N/p+2}, in logs so that large p does not overflow.
fn gradient_constant(n: f64, p: f64, ecc: f64) -> f64 {
    ((4f64.ln() + (3.0 * n + p) * 6f64.ln()) / p).exp() * ecc.powf(6.0 * n / p + 2.0)
}

/// `α_{N,p}`.
pub fn alpha(e: &Exponents) -> f64 {
    let n = e.n() as f64;
    gradient_constant(n, e.p(), n.sqrt())
}

/// Maz'ya–Poincaré constant `𝒞` for the ratio `d/D` of the cube half-side to
/// the ball radius, with `μ_{p,q}(B_1)` replaced by its explicit lower bound.
pub fn mazya_constant(e: &Exponents, ratio: f64) -> Result<f64> {
    let mu = mu_ball_lower_bound(e)?;
    mazya_constant_with_mu(e, ratio, mu)
}

/// Same as [`mazya_constant`] with a caller-supplied value (or lower bound)
/// for `μ_{p,q}(B_1)`.
pub fn mazya_constant_with_mu(e: &Exponents, ratio: f64, mu_ball: f64) -> Result<f64> {
    let n = e.n() as f64;
    if !(ratio > 0.0 && ratio < 1.0 / n.sqrt()) {
        return Err(Error::invalid(format!(
            "d/D = {ratio} must lie in (0, 1/sqrt(N)) = (0, {})",
            1.0 / n.sqrt()
        )));
    }
    if e.q() < e.p() {
        return Err(Error::Exponents(format!("needs q >= p, got {e}")));
    }
    if !(mu_ball >= 0.0) {
        return Err(Error::invalid("mu(B_1) must be non-negative"));
    }
    let p = e.p();
    let iq = e.inv_q();
    let w = omega(e.n());
    let bracket =
        w.powf(iq) + 4.0 * w.powf(1.0 / p) / (1.0 - n.sqrt() * ratio) * mu_ball.powf(-1.0 / p);
    Ok(ratio.powf(4.0 * n / p + n * iq) / (alpha(e) * bracket))
}

/// `Θ_{p,q} = 𝒞^p / (2^p·10^{p−1+2p/q})` with `𝒞` taken at `d/D = 1/2`.
pub fn theta(e: &Exponents) -> Result<f64> {
    e.check_planar_theta()?;
    let c = mazya_constant(e, 0.5)?;
    Ok(theta_from_mazya(e, c))
}

/// `Θ_{p,q}` built from an arbitrary Maz'ya constant.
pub fn theta_from_mazya(e: &Exponents, c: f64) -> f64 {
    let p = e.p();
    c.powf(p) / (2f64.powf(p) * 10f64.powf(p - 1.0 + 2.0 * p * e.inv_q()))
}

/// Lower bound `Θ_{p,q}·(√k·r)^{−(p−2+2p/q)}` on `λ_{p,q}` for planar sets of
/// order `k` and inradius `r`.
pub fn theta_lower_bound(e: &Exponents, k: usize, r: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("order k must be at least 1"));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("inradius must be positive"));
    }
    let t = theta(e)?;
    Ok(t * ((k as f64).sqrt() * r).powf(-scaling_exponent(e)))
}

/// Exact point capacity in an interval together with its Jensen lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalPointCapacity {
    pub exact: f64,
    pub lower_bound: f64,
}

pub fn interval_point_capacity(p: f64, a: f64, b: f64, x0: f64) -> Result<IntervalPointCapacity> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    if !(a < x0 && x0 < b) {
        return Err(Error::invalid(format!(
            "need a < x0 < b, got ({a}, {x0}, {b})"
        )));
    }
    let exact = if p == 1.0 {
        2.0
    } else {
        (x0 - a).powf(1.0 - p) + (b - x0).powf(1.0 - p)
    };
    Ok(IntervalPointCapacity {
        exact,
        lower_bound: 2f64.powf(p) / (b - a).powf(p - 1.0),
    })
}

/// `cap_2(B_ε; B_1) = 2π / log(1/ε)` in the plane.
pub fn disk_relative_capacity(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("need 0 < eps < 1, got {eps}")));
    }
    Ok(2.0 * PI / (1.0 / eps).ln())
}

/// `N ω_N ((p−N)/(p−1))^{p−1}`: the point capacity `cap_p({0}; B_1)` for `p > N`.
pub fn punctured_ball_value(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    if !(p > nf) {
        return Err(Error::invalid(format!("needs p > N, got p = {p}, N = {n}")));
    }
    Ok(nf * omega(n) * ((p - nf) / (p - 1.0)).powf(p - 1.0))
}

/// Closed-form capacities addressable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCapacity {
    IntervalPoint { p: f64, a: f64, b: f64, x0: f64 },
    DiskRelative { eps: f64 },
    PuncturedBall { n: usize, p: f64 },
}

/// Evaluates a closed form, returning `(value, optional lower bound)`.
pub fn closed_form_capacity(kind: ClosedFormCapacity) -> Result<(f64, Option<f64>)> {
    match kind {
        ClosedFormCapacity::IntervalPoint { p, a, b, x0 } => {
            let c = interval_point_capacity(p, a, b, x0)?;
            Ok((c.exact, Some(c.lower_bound)))
        }
        ClosedFormCapacity::DiskRelative { eps } => Ok((disk_relative_capacity(eps)?, None)),
        ClosedFormCapacity::PuncturedBall { n, p } => Ok((punctured_ball_value(n, p)?, None)),
    }
}

/// Lower bounds for `p > N` in terms of the inradius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointBounds {
    /// `β_{N,p}`.
    pub beta: f64,
    /// Tiling component `Λ_p(B_1∖{0})/(√N+1)^p`.
    pub tiling: f64,
    /// Hardy component `((p−N)/p)^p`.
    pub hardy: f64,
    /// `β/r^p`, lower bound for `λ_p`.
    pub lambda_p: f64,
    /// `Λ_{p,∞}(B_1∖{0})/r^{p−N}`, lower bound for `λ_{p,∞}`.
    pub lambda_inf: f64,
    /// `β^{p/q}·Λ_∞^{1−p/q}·r^{−(p−N+Np/q)}`, lower bound for `λ_{p,q}`, `q ≥ p`.
    pub interpolated: f64,
}

pub fn endpoint_bounds(
    e: &Exponents,
    r: f64,
    lambda_p_ball: f64,
    lambda_inf_ball: f64,
) -> Result<EndpointBounds> {
    let n = e.n() as f64;
    let p = e.p();
    if !(p > n) {
        return Err(Error::Exponents(format!(
            "endpoint bounds need p > N, got {e}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("inradius must be positive"));
    }
    if e.q() < p {
        return Err(Error::Exponents(format!(
            "interpolation needs q >= p, got {e}"
        )));
    }
    let tiling = lambda_p_ball / (n.sqrt() + 1.0).powf(p);
    let hardy = ((p - n) / p).powf(p);
    let beta = tiling.max(hardy);
    let theta = p * e.inv_q();
    Ok(EndpointBounds {
        beta,
        tiling,
        hardy,
        lambda_p: beta / r.powf(p),
        lambda_inf: lambda_inf_ball / r.powf(p - n),
        interpolated: beta.powf(theta)
            * lambda_inf_ball.powf(1.0 - theta)
            * r.powf(-scaling_exponent(e)),
    })
}

/// Cheeger and Buser bounds for a planar set of order `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuserBounds {
    /// `Θ_{1,1}/(√k·r)`, lower bound for `h`.
    pub cheeger_lower: f64,
    /// `(j_{0,1}/Θ_{1,1})²·k·h²`, upper bound for `λ`.
    pub buser_upper: f64,
    /// `(h/2)²`, lower bound for `λ`.
    pub lambda_lower: f64,
    pub theta_11: f64,
}

pub fn buser_bounds(k: usize, h: f64, r: f64) -> Result<BuserBounds> {
    if k < 1 || !(h > 0.0) || !(r > 0.0) {
        return Err(Error::invalid("buser bounds need k >= 1, h > 0, r > 0"));
    }
    let t = theta(&Exponents::new(2, 1.0, 1.0)?)?;
    let kf = k as f64;
    Ok(BuserBounds {
        cheeger_lower: t / (kf.sqrt() * r),
        buser_upper: (J01 / t).powi(2) * kf * h * h,
        lambda_lower: 0.25 * h * h,
        theta_11: t,
    })
}
