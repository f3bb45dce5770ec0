use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::output::{format_opt, format_sig, CsvTable};
use crate::bounds::{endpoint_bounds, omega, punctured_ball_value, theta, Exponents};
use crate::error::{Error, Result};
use crate::geometry::{build_domain, perforation_radius, DomainKind, DomainSpec, ObstacleSet};
use crate::solvers::{
    cheeger_maxflow, principal_frequency, punctured_frequency, punctured_radial, RadialMode,
    SolveOptions,
};

const RADIAL_NODES: usize = 4000;

/// Least-squares slope of `y` against `x`.
fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Grid spacing for the perforated set with hole radius `eps`: at least four
/// cells per radius and never coarser than 1/64.
pub fn buser_resolution(eps: f64) -> f64 {
    1.0 / (4.0 / eps).max(64.0).ceil()
}

#[derive(Debug, Clone, Serialize)]
pub struct BuserRow {
    pub k: usize,
    pub eps: f64,
    pub h: f64,
    pub nodes: usize,
    pub lambda: Option<f64>,
    pub cheeger: Option<f64>,
    /// `λ / h(Ω)²`.
    pub ratio: Option<f64>,
    /// `k / log k`.
    pub envelope: f64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuserSweep {
    pub beta: f64,
    pub fit_from: usize,
    pub rows: Vec<BuserRow>,
    /// Ratios strictly increasing in `k` over the solved rows.
    pub monotone: bool,
    /// Slope of `log ratio` against `log k` for `k ≥ fit_from`.
    pub exponent: Option<f64>,
    /// Same slope for `ratio·log k`; a `k/log k` law gives 1.
    pub corrected_exponent: Option<f64>,
    /// Least-squares `C` in `ratio ≈ C·k/log k` over all solved rows.
    pub envelope_c: Option<f64>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    /// Smallest `C` with `(1/C)·k/log k ≤ ratio ≤ C·k/log k` on the sweep.
    pub sandwich_c: Option<f64>,
}

impl BuserSweep {
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "k",
            "eps",
            "h",
            "nodes",
            "lambda",
            "cheeger",
            "ratio",
            "envelope",
            "converged",
            "error",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.k.to_string(),
                format_sig(r.eps),
                format_sig(r.h),
                r.nodes.to_string(),
                format_opt(r.lambda),
                format_opt(r.cheeger),
                format_opt(r.ratio),
                format_sig(r.envelope),
                r.converged.to_string(),
                r.error.clone().unwrap_or_default(),
            ]);
        }
        t
    }
}

fn buser_row(k: usize, beta: f64, opts: &SolveOptions) -> BuserRow {
    let eps = perforation_radius(k, beta);
    let h = buser_resolution(eps.min(0.5));
    let envelope = k as f64 / (k as f64).ln();
    let mut row = BuserRow {
        k,
        eps,
        h,
        nodes: 0,
        lambda: None,
        cheeger: None,
        ratio: None,
        envelope,
        converged: false,
        error: None,
    };
    let spec = DomainSpec::new(DomainKind::Perforated { k, beta }, h);
    let result = build_domain(&spec).and_then(|d| {
        row.nodes = d.inside_count();
        let lam = principal_frequency(&d, &Exponents::new(2, 2.0, 2.0)?, opts)?;
        let ch = cheeger_maxflow(&d)?;
        Ok((lam, ch))
    });
    match result {
        Ok((lam, ch)) => {
            row.lambda = Some(lam.value);
            row.cheeger = Some(ch.value);
            row.ratio = Some(lam.value / (ch.value * ch.value));
            row.converged = lam.converged && ch.converged;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// `λ/h²` on the perforated squares `Ω_k` with holes of radius `k^{−β}`.
///
/// Rows are computed in order of `k`; construction failures become rows
/// carrying the error.
pub fn buser_sweep(
    ks: &[usize],
    beta: f64,
    fit_from: usize,
    opts: &SolveOptions,
) -> Result<BuserSweep> {
    if !(beta > 0.5) {
        return Err(Error::invalid(format!("beta must exceed 1/2, got {beta}")));
    }
    if ks.is_empty() {
        return Err(Error::invalid("empty k list"));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let rows: Vec<BuserRow> = ks.iter().map(|&k| buser_row(k, beta, opts)).collect();
    let solved: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| r.ratio.map(|x| (r.k as f64, x, r.envelope)))
        .collect();
    let ratios: Vec<f64> = solved.iter().map(|s| s.1).collect();
    let fit: Vec<&(f64, f64, f64)> = solved.iter().filter(|s| s.0 >= fit_from as f64).collect();
    let lk: Vec<f64> = fit.iter().map(|s| s.0.ln()).collect();
    let exponent = ls_slope(&lk, &fit.iter().map(|s| s.1.ln()).collect::<Vec<_>>());
    let corrected_exponent = ls_slope(
        &lk,
        &fit.iter()
            .map(|s| s.1.ln() + s.0.ln().ln())
            .collect::<Vec<_>>(),
    );
    let (envelope_c, rho_min, rho_max, sandwich_c) = if solved.is_empty() {
        (None, None, None, None)
    } else {
        let c = solved.iter().map(|s| s.1 * s.2).sum::<f64>()
            / solved.iter().map(|s| s.2 * s.2).sum::<f64>();
        let rho: Vec<f64> = solved.iter().map(|s| s.1 / s.2).collect();
        let lo = rho.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rho.iter().copied().fold(0.0, f64::max);
        (Some(c), Some(lo), Some(hi), Some(hi.max(1.0 / lo)))
    };
    Ok(BuserSweep {
        beta,
        fit_from,
        monotone: ratios.len() >= 2 && strictly_increasing(&ratios),
        rows,
        exponent,
        corrected_exponent,
        envelope_c,
        rho_min,
        rho_max,
        sandwich_c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticQuantity {
    /// `β_{N,p}` over a grid of `p > N`.
    Beta,
    /// `Λ_{p,∞}(B₁∖{0})` over a grid of `p > N`.
    LambdaInfBall,
    /// `Θ_{2,q}` over a grid of `q`.
    ThetaQLimit,
}

impl fmt::Display for AsymptoticQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AsymptoticQuantity::Beta => "beta",
            AsymptoticQuantity::LambdaInfBall => "lambda_inf_ball",
            AsymptoticQuantity::ThetaQLimit => "theta_q_limit",
        })
    }
}

impl FromStr for AsymptoticQuantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(AsymptoticQuantity::Beta),
            "lambda_inf_ball" => Ok(AsymptoticQuantity::LambdaInfBall),
            "theta_q_limit" => Ok(AsymptoticQuantity::ThetaQLimit),
            _ => Err(Error::invalid(format!(
                "unknown quantity '{s}', expected beta, lambda_inf_ball or theta_q_limit"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticRow {
    /// `p` (or `q` for `theta_q_limit`).
    pub param: f64,
    pub value: Option<f64>,
    /// `value^{1/p}`.
    pub root: Option<f64>,
    /// `value/(p−N)^{p−1}`, or `q·value` for `theta_q_limit`.
    pub normalized: Option<f64>,
    /// Closed form, where one is known.
    pub reference: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticSweep {
    pub n: usize,
    pub quantity: AsymptoticQuantity,
    pub rows: Vec<AsymptoticRow>,
    /// `value^{1/p}` strictly increasing and below 1 (`beta` only).
    pub root_monotone: Option<bool>,
    /// Admissible range for the normalized values.
    pub bracket: Option<[f64; 2]>,
    pub bracket_ok: Option<bool>,
    /// `max/min` of the normalized values (`theta_q_limit` only).
    pub spread: Option<f64>,
    pub pass: bool,
}

impl AsymptoticSweep {
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["param", "value", "root", "normalized", "reference", "error"]);
        for r in &self.rows {
            t.push(vec![
                format_sig(r.param),
                format_opt(r.value),
                format_opt(r.root),
                format_opt(r.normalized),
                format_opt(r.reference),
                r.error.clone().unwrap_or_default(),
            ]);
        }
        t
    }
}

fn asymptotic_row(
    n: usize,
    x: f64,
    quantity: AsymptoticQuantity,
    opts: &SolveOptions,
) -> Result<AsymptoticRow> {
    let nf = n as f64;
    let mut row = AsymptoticRow {
        param: x,
        value: None,
        root: None,
        normalized: None,
        reference: None,
        error: None,
    };
    match quantity {
        AsymptoticQuantity::Beta => {
            let e = Exponents::new(n, x, x)?;
            let lp = punctured_radial(n, x, RadialMode::Lp, RADIAL_NODES, opts)?
                .report
                .value;
            let b = endpoint_bounds(&e, 1.0, lp, punctured_ball_value(n, x)?)?.beta;
            row.value = Some(b);
            row.root = Some(b.powf(1.0 / x));
            row.normalized = Some(b / (x - nf).powf(x - 1.0));
        }
        AsymptoticQuantity::LambdaInfBall => {
            let r = punctured_radial(n, x, RadialMode::Linf, RADIAL_NODES, opts)?;
            let v = r.report.value;
            row.value = Some(v);
            row.root = Some(v.powf(1.0 / x));
            row.normalized = Some(v / (x - nf).powf(x - 1.0));
            row.reference = r.closed_form;
        }
        AsymptoticQuantity::ThetaQLimit => {
            let e = Exponents::new(n, 2.0, x)?;
            let t = theta(&e)?;
            row.value = Some(t);
            row.root = Some(t.sqrt());
            row.normalized = Some(x * t);
        }
    }
    Ok(row)
}

/// Tracks a constant along a grid of exponents. Inadmissible grid points
/// become rows carrying the error.
pub fn asymptotic_sweep(
    n: usize,
    grid: &[f64],
    quantity: AsymptoticQuantity,
    opts: &SolveOptions,
) -> Result<AsymptoticSweep> {
    if quantity == AsymptoticQuantity::ThetaQLimit && n != 2 {
        return Err(Error::Exponents(
            "the q-limit of the inradius constant is planar".into(),
        ));
    }
    if grid.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let rows: Vec<AsymptoticRow> = grid
        .iter()
        .map(|&x| {
            asymptotic_row(n, x, quantity, opts).unwrap_or_else(|e| AsymptoticRow {
                param: x,
                value: None,
                root: None,
                normalized: None,
                reference: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let roots: Vec<f64> = rows.iter().filter_map(|r| r.root).collect();
    let normalized: Vec<f64> = rows.iter().filter_map(|r| r.normalized).collect();
    let any = !normalized.is_empty();
    let surface = n as f64 * omega(n);
    let mut sweep = AsymptoticSweep {
        n,
        quantity,
        rows,
        root_monotone: None,
        bracket: None,
        bracket_ok: None,
        spread: None,
        pass: any,
    };
    match quantity {
        AsymptoticQuantity::Beta => {
            let ok = strictly_increasing(&roots) && roots.iter().all(|&r| r < 1.0);
            sweep.root_monotone = Some(ok);
            sweep.pass &= ok;
        }
        AsymptoticQuantity::LambdaInfBall => {
            let b = [surface / 4.0, 2.0 * surface];
            let ok = normalized.iter().all(|&v| v >= b[0] && v <= b[1]);
            sweep.bracket = Some(b);
            sweep.bracket_ok = Some(ok);
            sweep.pass &= ok;
        }
        AsymptoticQuantity::ThetaQLimit => {
            let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = normalized.iter().copied().fold(0.0, f64::max);
            let spread = hi / lo;
            sweep.spread = Some(spread);
            sweep.bracket_ok = Some(spread <= 4.0);
            sweep.pass &= spread <= 4.0;
        }
    }
    Ok(sweep)
}

/// Limit experiments along a parameter family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TrendMode {
    /// `q·λ_{2,q}` on a fixed domain over growing `q`.
    MoserTrudinger { domain: DomainSpec, q: Vec<f64> },
    /// `λ_p` of pepper windows over window sizes `m` and radii `eps`,
    /// against the punctured unit cell.
    Pepper {
        p: f64,
        m: Vec<usize>,
        eps: Vec<f64>,
        resolution: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    /// Window half-size for pepper rows.
    pub m: Option<usize>,
    /// `q` or `eps`.
    pub x: f64,
    pub value: Option<f64>,
    /// `q·λ_{2,q}`, or `λ_p / reference` for pepper rows.
    pub scaled: Option<f64>,
    pub reference: f64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendSweep {
    pub mode: String,
    pub rows: Vec<TrendRow>,
    /// `q·λ_{2,q}` increasing in `q`, or `λ_p` decreasing as `eps` shrinks.
    pub monotone: bool,
    /// Last `q·λ_{2,q}` below `8πe` (Moser–Trudinger only).
    pub below_limit: Option<bool>,
    /// Per radius, `(max − min)/min` of the window values over `m`.
    pub spread: Vec<(f64, f64)>,
    pub max_spread: Option<f64>,
}

impl TrendSweep {
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "m",
            "x",
            "value",
            "scaled",
            "reference",
            "converged",
            "error",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.m.map(|m| m.to_string()).unwrap_or_default(),
                format_sig(r.x),
                format_opt(r.value),
                format_opt(r.scaled),
                format_sig(r.reference),
                r.converged.to_string(),
                r.error.clone().unwrap_or_default(),
            ]);
        }
        t
    }
}

pub fn limit_trends(mode: &TrendMode, opts: &SolveOptions) -> Result<TrendSweep> {
    match mode {
        TrendMode::MoserTrudinger { domain, q } => moser_trudinger(domain, q, opts),
        TrendMode::Pepper {
            p,
            m,
            eps,
            resolution,
        } => pepper(*p, m, eps, *resolution, opts),
    }
}

fn moser_trudinger(spec: &DomainSpec, qs: &[f64], opts: &SolveOptions) -> Result<TrendSweep> {
    if qs.is_empty() {
        return Err(Error::invalid("empty q grid"));
    }
    let domain = build_domain(spec)?;
    let limit = 8.0 * PI * E;
    let mut qs = qs.to_vec();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let rows: Vec<TrendRow> = qs
        .iter()
        .map(|&q| {
            let r = Exponents::new(2, 2.0, q).and_then(|e| principal_frequency(&domain, &e, opts));
            match r {
                Ok(rep) => TrendRow {
                    m: None,
                    x: q,
                    value: Some(rep.value),
                    scaled: Some(q * rep.value),
                    reference: limit,
                    converged: rep.converged,
                    error: None,
                },
                Err(e) => TrendRow {
                    m: None,
                    x: q,
                    value: None,
                    scaled: None,
                    reference: limit,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let scaled: Vec<f64> = rows.iter().filter_map(|r| r.scaled).collect();
    Ok(TrendSweep {
        mode: "moser_trudinger".into(),
        monotone: scaled.len() == rows.len() && strictly_increasing(&scaled),
        below_limit: scaled.last().map(|&v| v < limit),
        rows,
        spread: Vec::new(),
        max_spread: None,
    })
}

/// `Λ_p` of the unit cell with the closed disk of radius `eps` about its
/// centre pinned to zero and free boundary elsewhere.
fn punctured_cell(p: f64, eps: f64, resolution: f64, opts: &SolveOptions) -> Result<f64> {
    let cell = build_domain(&DomainSpec::new(
        DomainKind::Square { side: 1.0 },
        resolution,
    ))?;
    let g = *cell.grid();
    let pinned: Vec<usize> = cell
        .inside_nodes()
        .filter(|&k| {
            let x = g.position(k);
            (x[0] - 0.5).hypot(x[1] - 0.5) <= eps + 1e-9 * resolution
        })
        .collect();
    let pinned = ObstacleSet::new(g, pinned)?;
    Ok(punctured_frequency(&cell, &pinned, &Exponents::new(2, p, p)?, opts)?.value)
}

fn pepper(
    p: f64,
    ms: &[usize],
    eps: &[f64],
    resolution: f64,
    opts: &SolveOptions,
) -> Result<TrendSweep> {
    if !(p > 2.0) {
        return Err(Error::Exponents(format!(
            "pepper sets need p > N = 2 (points are removable otherwise), got p = {p}"
        )));
    }
    if ms.is_empty() || eps.is_empty() {
        return Err(Error::invalid("empty m or eps grid"));
    }
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let e = Exponents::new(2, p, p)?;
    let mut rows = Vec::new();
    for &r in &eps {
        let reference = punctured_cell(p, r, resolution, opts)?;
        for &m in &ms {
            let spec = DomainSpec::new(DomainKind::PepperWindow { m, eps: r }, resolution);
            let row = match build_domain(&spec).and_then(|d| principal_frequency(&d, &e, opts)) {
                Ok(rep) => TrendRow {
                    m: Some(m),
                    x: r,
                    value: Some(rep.value),
                    scaled: Some(rep.value / reference),
                    reference,
                    converged: rep.converged,
                    error: None,
                },
                Err(err) => TrendRow {
                    m: Some(m),
                    x: r,
                    value: None,
                    scaled: None,
                    reference,
                    converged: false,
                    error: Some(err.to_string()),
                },
            };
            rows.push(row);
        }
    }
    let value = |m: usize, r: f64| {
        rows.iter()
            .find(|row| row.m == Some(m) && row.x == r)
            .and_then(|row| row.value)
    };
    let spread: Vec<(f64, f64)> = eps
        .iter()
        .filter_map(|&r| {
            let v: Vec<f64> = ms.iter().filter_map(|&m| value(m, r)).collect();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(0.0, f64::max);
            (v.len() == ms.len()).then(|| (r, (hi - lo) / lo))
        })
        .collect();
    // eps is sorted decreasing, so values must decrease along it.
    let monotone = ms.iter().all(|&m| {
        let v: Vec<Option<f64>> = eps.iter().map(|&r| value(m, r)).collect();
        v.iter().all(Option::is_some) && v.windows(2).all(|w| w[1] < w[0])
    });
    Ok(TrendSweep {
        mode: "pepper".into(),
        monotone,
        below_limit: None,
        max_spread: spread.iter().map(|s| s.1).reduce(f64::max),
        spread,
        rows,
    })
}
