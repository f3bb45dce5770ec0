use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::output::{format_opt, format_sig, round_sig, write_csv, CsvTable};
use super::{run_pool, Campaign, ExponentPair};
use crate::bounds::{
    buser_bounds, endpoint_bounds, theta_lower_bound, BoundRow, Exponents, RowInputs, Sense,
};
use crate::error::{Error, Result};
use crate::geometry::io::atomic_write;
use crate::geometry::{
    build_domain, inradius_center, projection_length, taylor_fatness_check, taylor_square_side,
    topology_order, DomainKind, DomainSpec, GridDomain, ObstacleSet,
};
use crate::solvers::{
    capacity, cheeger_maxflow, extend_inversion, linf_frequency, principal_frequency,
    punctured_linf_frequency, punctured_radial, symmetrize, BoundaryKind, Field, RadialMode,
    SolveOptions, SolveReport,
};

/// Radial elements used for the punctured-ball constants.
const RADIAL_NODES: usize = 4000;

/// Grid spacing of the planar unit-disk reference solve.
const BALL_SPACING: f64 = 1.0 / 64.0;

/// The lower bound in terms of inradius and order is only
/// accepted with this much room, since its constant is far from sharp.
const INRADIUS_FACTOR: f64 = 10.0;

/// A [`BoundRow`] tagged with the domain and exponents it belongs to.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub domain_id: usize,
    pub domain: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    #[serde(flatten)]
    pub row: BoundRow,
}

impl VerifyRow {
    fn key_cmp(&self, other: &Self) -> Ordering {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        self.domain_id
            .cmp(&other.domain_id)
            .then_with(|| self.row.label.cmp(&other.row.label))
            .then_with(|| opt(self.p, other.p))
            .then_with(|| opt(self.q, other.q))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub pass_count: usize,
    pub fail_count: usize,
    pub clean_violations: usize,
    pub solver_failures: usize,
    /// Smallest `margin / |bound|` over rows with a finite margin.
    pub worst_margin: Option<f64>,
    pub worst_label: Option<String>,
    #[serde(skip)]
    pub rows: Vec<VerifyRow>,
}

impl VerifySummary {
    pub fn from_rows(rows: Vec<VerifyRow>) -> Self {
        let pass_count = rows.iter().filter(|r| r.row.pass).count();
        let mut worst: Option<(f64, String)> = None;
        for r in &rows {
            if !r.row.margin.is_finite() {
                continue;
            }
            let rel = r.row.margin / r.row.bound.abs().max(f64::MIN_POSITIVE);
            if worst.as_ref().is_none_or(|w| rel < w.0) {
                worst = Some((rel, format!("{}#{}", r.row.label, r.domain_id)));
            }
        }
        VerifySummary {
            pass_count,
            fail_count: rows.len() - pass_count,
            clean_violations: rows.iter().filter(|r| r.row.clean_violation()).count(),
            solver_failures: rows.iter().filter(|r| r.row.solver_failed).count(),
            worst_margin: worst.as_ref().map(|w| round_sig(w.0)),
            worst_label: worst.map(|w| w.1),
            rows,
        }
    }

    pub fn has_clean_violation(&self) -> bool {
        self.clean_violations > 0
    }

    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "domain_id",
            "domain",
            "label",
            "p",
            "q",
            "sense",
            "inradius",
            "order",
            "volume",
            "diameter",
            "bound",
            "target",
            "margin",
            "pass",
            "solver_failed",
        ]);
        for r in &self.rows {
            let b = &r.row;
            t.push(vec![
                r.domain_id.to_string(),
                r.domain.clone(),
                b.label.clone(),
                format_opt(r.p),
                format_opt(r.q),
                match b.sense {
                    Sense::Lower => "lower".into(),
                    Sense::Upper => "upper".into(),
                },
                format_sig(b.inputs.inradius),
                b.inputs.order.to_string(),
                format_sig(b.inputs.volume),
                format_sig(b.inputs.diameter),
                format_sig(b.bound),
                format_sig(b.target),
                format_sig(b.margin),
                b.pass.to_string(),
                b.solver_failed.to_string(),
            ]);
        }
        t
    }

    /// Writes `rows.csv` and `summary.json` (with the resolved campaign).
    pub fn write(&self, campaign: &Campaign) -> Result<()> {
        let out = &campaign.output;
        std::fs::create_dir_all(&out.dir).map_err(|e| Error::io(&out.dir, e))?;
        write_csv(&self.table(), &out.rows_path())?;
        let json = serde_json::json!({
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "clean_violations": self.clean_violations,
            "solver_failures": self.solver_failures,
            "worst_margin": self.worst_margin,
            "worst_label": self.worst_label,
            "rows": self.rows.len(),
            "config": campaign,
        });
        let text = serde_json::to_string_pretty(&json).map_err(|e| Error::Parse(e.to_string()))?;
        atomic_write(&out.summary_path(), text.as_bytes())
    }
}

fn describe(spec: &DomainSpec) -> String {
    format!("{}@h={}", spec.kind, spec.resolution)
}

/// `count` pseudo-random domains; domain `i` draws from stream `i` of a
/// ChaCha8 generator keyed by `seed`, so each is independent of the count.
pub fn seeded_domains(seed: u64, count: usize) -> Vec<DomainSpec> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            match rng.gen_range(0..5u32) {
                0 => {
                    let r = rng.gen_range(0.5..1.5);
                    DomainSpec::new(DomainKind::Disk { r }, r / 20.0)
                }
                1 => {
                    let side = rng.gen_range(1.0..2.0);
                    DomainSpec::new(DomainKind::Square { side }, side / 40.0)
                }
                2 => {
                    let r_out = rng.gen_range(0.8..1.5);
                    let r_in = r_out * rng.gen_range(0.2..0.5);
                    DomainSpec::new(DomainKind::Annulus { r_in, r_out }, r_out / 32.0)
                }
                3 => {
                    let height = rng.gen_range(0.5..1.0);
                    let length = rng.gen_range(2.0..4.0);
                    DomainSpec::new(DomainKind::Strip { height, length }, height / 16.0)
                }
                _ => {
                    let k = rng.gen_range(3..=9usize);
                    let beta = rng.gen_range(0.8..1.2);
                    DomainSpec::new(DomainKind::Perforated { k, beta }, 1.0 / 32.0)
                }
            }
        })
        .collect()
}

/// Reference values on the punctured unit ball, shared by all domains.
#[derive(Debug, Default)]
struct BallConstants {
    /// `p → Λ_p(B₁∖{0})` from the radial solve, `Err` text on failure.
    lambda_p: BTreeMap<u64, std::result::Result<f64, String>>,
    /// `p → Λ_{p,∞}(B₁∖{0})` from the planar solve.
    lambda_inf: BTreeMap<u64, std::result::Result<f64, String>>,
}

/// `Λ_{p,∞}(B₁∖{0})` for `p > N`. In one dimension the extremal rises
/// linearly from the centre to an endpoint and the value is 1. In the plane
/// it is solved on the unit disk at spacing [`BALL_SPACING`]; the extremal
/// is not radial (it peaks at a single boundary point), so the value sits
/// far below `cap_p({0}; B₁)`.
pub fn punctured_ball_linf(n: usize, p: f64, opts: &SolveOptions) -> Result<f64> {
    if !(p > n as f64) {
        return Err(Error::Exponents(format!(
            "needs p > N, got p = {p}, N = {n}"
        )));
    }
    match n {
        1 => Ok(1.0),
        2 => {
            let d = build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, BALL_SPACING))?;
            let pin = ObstacleSet::point(*d.grid(), [0.0, 0.0])?;
            Ok(punctured_linf_frequency(&d, &pin, p, opts)?.value)
        }
        _ => Err(Error::invalid(format!("no planar reference for N = {n}"))),
    }
}

impl BallConstants {
    fn new(pairs: &[ExponentPair], opts: &SolveOptions) -> Self {
        let mut c = BallConstants::default();
        for pair in pairs.iter().filter(|e| e.p > 2.0) {
            let key = pair.p.to_bits();
            c.lambda_p.entry(key).or_insert_with(|| {
                punctured_radial(2, pair.p, RadialMode::Lp, RADIAL_NODES, opts)
                    .map(|r| r.report.value)
                    .map_err(|e| e.to_string())
            });
            c.lambda_inf
                .entry(key)
                .or_insert_with(|| punctured_ball_linf(2, pair.p, opts).map_err(|e| e.to_string()));
        }
        c
    }
}

/// Runs every applicable inequality on every domain of the campaign.
///
/// Failures of a builder or a solver become flagged rows; the campaign
/// itself only errors on configuration problems.
pub fn verify_inequalities(campaign: &Campaign) -> Result<VerifySummary> {
    campaign.validate()?;
    let mut specs = campaign.domains.clone();
    specs.extend(seeded_domains(campaign.seed, campaign.seeded_domains));
    let opts = campaign.solve_options();
    let consts = BallConstants::new(&campaign.exponents, &opts);
    let jobs: Vec<(usize, DomainSpec)> = specs.into_iter().enumerate().collect();
    let per_domain = run_pool(jobs, |(id, spec)| {
        let mut ctx = DomainRows::new(id, &spec, campaign, &consts);
        ctx.run();
        ctx.rows
    })?;
    let mut rows: Vec<VerifyRow> = per_domain.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.key_cmp(b));
    Ok(VerifySummary::from_rows(rows))
}

struct DomainRows<'a> {
    id: usize,
    spec: &'a DomainSpec,
    campaign: &'a Campaign,
    consts: &'a BallConstants,
    opts: SolveOptions,
    inputs: RowInputs,
    rows: Vec<VerifyRow>,
    rng: ChaCha8Rng,
}

/// Inside nodes of `domain` within distance `< r` of `center`.
fn inscribed_disk(domain: &GridDomain, center: [f64; 2], r: f64) -> Result<GridDomain> {
    let g = *domain.grid();
    domain.restrict(|k| {
        let x = g.position(k);
        (x[0] - center[0]).hypot(x[1] - center[1]) < r
    })
}

fn solve_pair(domain: &GridDomain, e: &Exponents, opts: &SolveOptions) -> Result<SolveReport> {
    if e.q_is_infinite() {
        linf_frequency(domain, e.p(), opts)
    } else {
        principal_frequency(domain, e, opts)
    }
}

impl<'a> DomainRows<'a> {
    fn new(
        id: usize,
        spec: &'a DomainSpec,
        campaign: &'a Campaign,
        consts: &'a BallConstants,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(campaign.seed ^ 0x5eed_0b57);
        rng.set_stream(id as u64);
        DomainRows {
            id,
            spec,
            campaign,
            consts,
            opts: campaign.solve_options(),
            inputs: RowInputs::default(),
            rows: Vec::new(),
            rng,
        }
    }

    fn push(&mut self, p: Option<f64>, q: Option<f64>, row: BoundRow) {
        self.rows.push(VerifyRow {
            domain_id: self.id,
            domain: describe(self.spec),
            p,
            q,
            row,
        });
    }

    fn fail(&mut self, label: &str, p: Option<f64>, q: Option<f64>, sense: Sense, bound: f64) {
        self.push(p, q, BoundRow::failed(label, self.inputs, sense, bound));
    }

    /// Row with a relative tolerance; a non-converged solve flags it.
    fn check(
        &mut self,
        label: &str,
        pq: (Option<f64>, Option<f64>),
        sense: Sense,
        bound: f64,
        target: &SolveReport,
        rel: f64,
    ) {
        let mut row = BoundRow::new(
            label,
            self.inputs,
            sense,
            bound,
            target.value,
            rel * bound.abs(),
        );
        row.solver_failed = !target.converged;
        self.push(pq.0, pq.1, row);
    }

    fn run(&mut self) {
        let domain = match build_domain(self.spec) {
            Ok(d) => d,
            Err(_) => return self.fail("build", None, None, Sense::Lower, f64::NAN),
        };
        let order = match topology_order(&domain) {
            Ok(k) => k,
            Err(_) => return self.fail("topology", None, None, Sense::Lower, f64::NAN),
        };
        let (center_idx, r) = inradius_center(&domain);
        let center = domain.grid().position(center_idx);
        self.inputs = RowInputs {
            inradius: r,
            order,
            volume: domain.volume(),
            diameter: domain.diameter(),
        };
        let ball = inscribed_disk(&domain, center, r).ok();

        let pairs = self.campaign.exponents.clone();
        let mut values: BTreeMap<(u64, u64), SolveReport> = BTreeMap::new();
        for pair in &pairs {
            let Ok(e) = pair.exponents(2) else { continue };
            let pq = (Some(pair.p), Some(pair.q));
            let report = match solve_pair(&domain, &e, &self.opts) {
                Ok(rep) => rep,
                Err(_) => {
                    self.fail("solve", pq.0, pq.1, Sense::Lower, f64::NAN);
                    continue;
                }
            };
            self.pair_rows(&domain, &e, &report, ball.as_ref(), order, r);
            values.insert((pair.p.to_bits(), pair.q.to_bits()), report);
        }
        self.holder_rows(&domain, &values);
        let mut ps: Vec<f64> = pairs.iter().map(|e| e.p).collect();
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        if let Some(ball) = &ball {
            for &p in &ps {
                self.capacity_row(ball, center, r, p);
                self.extension_rows(ball, center, r, p);
                self.symmetrization_row(&domain, center_idx, r, p);
            }
        }
        self.fatness_row(&domain, center, order, r);
    }

    fn pair_rows(
        &mut self,
        domain: &GridDomain,
        e: &Exponents,
        lam: &SolveReport,
        ball: Option<&GridDomain>,
        order: usize,
        r: f64,
    ) {
        let pq = (Some(e.p()), Some(e.q()));
        let tol = self.campaign.tolerances;
        if let Ok(bound) = theta_lower_bound(e, order, r) {
            let mut row = BoundRow::new(
                "inradius_lower",
                self.inputs,
                Sense::Lower,
                bound,
                lam.value,
                0.0,
            );
            row.pass = lam.value >= INRADIUS_FACTOR * bound;
            row.solver_failed = !lam.converged;
            self.push(pq.0, pq.1, row);
        }
        match ball.map(|b| solve_pair(b, e, &self.opts)) {
            Some(Ok(b)) => {
                let mut row = BoundRow::new(
                    "inscribed_ball_upper",
                    self.inputs,
                    Sense::Upper,
                    b.value,
                    lam.value,
                    tol.exact * b.value,
                );
                row.solver_failed = !(lam.converged && b.converged);
                self.push(pq.0, pq.1, row);
            }
            _ => self.fail("inscribed_ball_upper", pq.0, pq.1, Sense::Upper, f64::NAN),
        }
        if e.p() > 2.0 && e.q() >= e.p() {
            let lp = self.consts.lambda_p.get(&e.p().to_bits()).cloned();
            let linf = self.consts.lambda_inf.get(&e.p().to_bits()).cloned();
            match (lp, linf) {
                (Some(Ok(lambda_p_ball)), Some(Ok(lambda_inf_ball))) => {
                    if let Ok(eb) = endpoint_bounds(e, r, lambda_p_ball, lambda_inf_ball) {
                        if e.q_is_infinite() {
                            self.check(
                                "endpoint_linf_lower",
                                pq,
                                Sense::Lower,
                                eb.lambda_inf,
                                lam,
                                tol.discretization,
                            );
                        } else if e.q() == e.p() {
                            self.check(
                                "endpoint_lp_lower",
                                pq,
                                Sense::Lower,
                                eb.lambda_p,
                                lam,
                                tol.discretization,
                            );
                        } else {
                            self.check(
                                "endpoint_interpolated_lower",
                                pq,
                                Sense::Lower,
                                eb.interpolated,
                                lam,
                                tol.discretization,
                            );
                        }
                    }
                }
                _ => self.fail("endpoint_lower", pq.0, pq.1, Sense::Lower, f64::NAN),
            }
        }
        if e.p() == 2.0 && e.q() == 2.0 {
            match cheeger_maxflow(domain) {
                Ok(h) => {
                    self.check(
                        "cheeger_inequality",
                        pq,
                        Sense::Lower,
                        0.25 * h.value * h.value,
                        lam,
                        tol.discretization,
                    );
                    if let Ok(b) = buser_bounds(order, h.value, r) {
                        self.check(
                            "buser_upper",
                            pq,
                            Sense::Upper,
                            b.buser_upper,
                            lam,
                            tol.exact,
                        );
                    }
                }
                Err(_) => self.fail("cheeger_inequality", pq.0, pq.1, Sense::Lower, f64::NAN),
            }
        }
        if e.p() == 1.0 && e.q() == 1.0 {
            if let Ok(b) = buser_bounds(order, 1.0, r) {
                self.check(
                    "cheeger_inradius_lower",
                    pq,
                    Sense::Lower,
                    b.cheeger_lower,
                    lam,
                    0.0,
                );
            }
        }
    }

    /// `λ_{p,2p} ≥ (λ_{p,∞}·λ_p)^{1/2}` whenever both endpoints were solved.
    fn holder_rows(&mut self, domain: &GridDomain, values: &BTreeMap<(u64, u64), SolveReport>) {
        let tol = self.campaign.tolerances.exact;
        let ps: Vec<f64> = values
            .keys()
            .map(|&(p, _)| f64::from_bits(p))
            .filter(|&p| p > 2.0)
            .collect();
        for p in ps {
            let lp = values.get(&(p.to_bits(), p.to_bits()));
            let linf = values.get(&(p.to_bits(), f64::INFINITY.to_bits()));
            let (Some(lp), Some(linf)) = (lp, linf) else {
                continue;
            };
            if self
                .rows
                .iter()
                .any(|r| r.row.label == "holder_interpolation" && r.p == Some(p))
            {
                continue;
            }
            let pq = (Some(p), Some(2.0 * p));
            let bound = (lp.value * linf.value).sqrt();
            match Exponents::new(2, p, 2.0 * p)
                .and_then(|e| principal_frequency(domain, &e, &self.opts))
            {
                Ok(mid) => {
                    let mut row = BoundRow::new(
                        "holder_interpolation",
                        self.inputs,
                        Sense::Lower,
                        bound,
                        mid.value,
                        tol * bound,
                    );
                    row.solver_failed = !(mid.converged && lp.converged && linf.converged);
                    self.push(pq.0, pq.1, row);
                }
                Err(_) => self.fail("holder_interpolation", pq.0, pq.1, Sense::Lower, bound),
            }
        }
    }

    /// Capacity of a random segment in `B_{r/2}` relative to the inscribed
    /// disk against twice its longest axis projection over `r^{p−1}`.
    fn capacity_row(&mut self, ball: &GridDomain, center: [f64; 2], r: f64, p: f64) {
        let g = *ball.grid();
        let angle = self.rng.gen_range(0.0..PI);
        let half = r * self.rng.gen_range(0.125..0.25);
        let off = [
            r * self.rng.gen_range(-0.1..0.1),
            r * self.rng.gen_range(-0.1..0.1),
        ];
        let steps = (8.0 * half / g.h).ceil() as usize + 1;
        let nodes: Vec<usize> = (0..=steps)
            .filter_map(|s| {
                let t = -half + 2.0 * half * s as f64 / steps as f64;
                g.nearest_node([
                    center[0] + off[0] + t * angle.cos(),
                    center[1] + off[1] + t * angle.sin(),
                ])
            })
            .collect();
        let label = "capacity_projection";
        let obstacle = match ObstacleSet::new(g, nodes) {
            Ok(o) => o,
            Err(_) => return self.fail(label, Some(p), None, Sense::Lower, f64::NAN),
        };
        let proj = match (
            projection_length(&obstacle, 1),
            projection_length(&obstacle, 2),
        ) {
            (Ok(a), Ok(b)) => a.max(b),
            _ => return self.fail(label, Some(p), None, Sense::Lower, f64::NAN),
        };
        let bound = 2.0 / r.powf(p - 1.0) * proj;
        match capacity(ball, &obstacle, p, &self.opts) {
            Ok(c) => {
                let tol = self.campaign.tolerances.discretization;
                self.check(label, (Some(p), None), Sense::Lower, bound, &c, tol)
            }
            Err(_) => self.fail(label, Some(p), None, Sense::Lower, bound),
        }
    }

    /// A smooth random field on the inscribed disk, extended by inversion to
    /// the concentric disk of twice the radius.
    fn extension_rows(&mut self, ball: &GridDomain, center: [f64; 2], r: f64, p: f64) {
        let a: [f64; 6] = std::array::from_fn(|_| self.rng.gen_range(-1.0..1.0));
        let f = move |x: [f64; 2]| {
            let (u, v) = ((x[0] - center[0]) / r, (x[1] - center[1]) / r);
            2.0 + a[0] * (PI * u + a[1]).sin()
                + a[2] * (PI * v + a[3]).cos()
                + a[4] * u * v
                + 0.5 * a[5] * u * u
        };
        let tol = self.campaign.tolerances.discretization;
        let report = Field::from_fn(ball, BoundaryKind::Free, f)
            .and_then(|u| extend_inversion(ball, &u, center, r, 2.0 * r, p));
        match report {
            Ok(rep) => {
                let lp = BoundRow::new(
                    "extension_lp",
                    self.inputs,
                    Sense::Upper,
                    rep.lp_bound,
                    rep.lp_ratio,
                    tol * rep.lp_bound,
                );
                let gr = BoundRow::new(
                    "extension_gradient",
                    self.inputs,
                    Sense::Upper,
                    rep.grad_bound,
                    rep.grad_ratio,
                    tol * rep.grad_bound,
                );
                self.push(Some(p), None, lp);
                self.push(Some(p), None, gr);
            }
            Err(_) => {
                self.fail("extension_lp", Some(p), None, Sense::Upper, f64::NAN);
                self.fail("extension_gradient", Some(p), None, Sense::Upper, f64::NAN);
            }
        }
    }

    /// Reflection symmetrization of a random field on the largest node
    /// square inscribed in the inradius disk.
    fn symmetrization_row(&mut self, domain: &GridDomain, center_idx: usize, r: f64, p: f64) {
        let g = *domain.grid();
        let label = "symmetrization_energy";
        let m = ((r / std::f64::consts::SQRT_2) / g.h - 1e-9).floor() as i64;
        if m < 1 {
            return self.fail(label, Some(p), None, Sense::Upper, f64::NAN);
        }
        let (ci, cj) = g.coords(center_idx);
        let block = domain.restrict(|k| {
            let (i, j) = g.coords(k);
            (i as i64 - ci as i64).abs() <= m && (j as i64 - cj as i64).abs() <= m
        });
        let a: [f64; 4] = std::array::from_fn(|_| self.rng.gen_range(0.2..1.0));
        let center = g.position(center_idx);
        let side = 2.0 * m as f64 * g.h;
        let f = move |x: [f64; 2]| {
            let (u, v) = (
                (x[0] - center[0]) / side + 0.5,
                (x[1] - center[1]) / side + 0.5,
            );
            1.0 + a[0] * u + a[1] * v * v + a[2] * (3.0 * u * v).sin() + a[3] * u * u * v
        };
        let report = block.and_then(|b| {
            Field::from_fn(&b, BoundaryKind::Free, f).and_then(|u| symmetrize(&b, &u, p))
        });
        match report {
            Ok(rep) => {
                let tol = self.campaign.tolerances.symmetrization;
                let row = BoundRow::new(
                    label,
                    self.inputs,
                    Sense::Upper,
                    rep.energy_before,
                    rep.energy_after,
                    tol * rep.energy_before,
                );
                self.push(Some(p), None, row);
            }
            Err(_) => self.fail(label, Some(p), None, Sense::Upper, f64::NAN),
        }
    }

    /// The fatness witness in the square of side `10(⌊√k⌋+1)·r` centred at
    /// the inradius centre, on a window padded to contain it.
    fn fatness_row(&mut self, domain: &GridDomain, center: [f64; 2], order: usize, r: f64) {
        let h = domain.h();
        let side = taylor_square_side(order, r);
        let margin = (0.5 * side / h).ceil() as usize + 2;
        let padded = domain.padded(margin);
        match taylor_fatness_check(&padded, center, side) {
            Ok(w) => {
                let row = BoundRow::new(
                    "fatness_projection",
                    self.inputs,
                    Sense::Lower,
                    w.required - 2.0 * h,
                    w.projection_e1.max(w.projection_e2),
                    0.0,
                );
                self.push(None, None, row);
            }
            Err(_) => self.fail("fatness_projection", None, None, Sense::Lower, f64::NAN),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::default_exponent_grid;

    #[test]
    fn seeded_domains_are_stable_and_valid() {
        let a = seeded_domains(42, 20);
        let b = seeded_domains(42, 20);
        assert_eq!(a, b);
        assert_eq!(seeded_domains(42, 5)[..], a[..5]);
        for s in &a {
            s.validate().unwrap();
        }
        assert_ne!(seeded_domains(43, 3), a[..3]);
    }

    #[test]
    fn disk_campaign_passes_and_is_deterministic() {
        let mut c = Campaign::new("disk");
        c.domains
            .push(DomainSpec::new(DomainKind::Disk { r: 1.0 }, 1.0 / 12.0));
        c.exponents = default_exponent_grid();
        let s = verify_inequalities(&c).unwrap();
        for r in &s.rows {
            assert!(r.row.pass, "{r:?}");
        }
        for label in [
            "inradius_lower",
            "inscribed_ball_upper",
            "cheeger_inequality",
            "holder_interpolation",
            "fatness_projection",
        ] {
            assert!(
                s.rows.iter().any(|r| r.row.label == label),
                "{label} missing"
            );
        }
        let again = verify_inequalities(&c).unwrap();
        assert_eq!(s.table().render(), again.table().render());
    }

    #[test]
    fn unbuildable_domain_becomes_flagged_row() {
        let mut c = Campaign::new("bad");
        c.domains.push(DomainSpec::new(
            DomainKind::Perforated { k: 4, beta: 0.6 },
            0.25,
        ));
        let s = verify_inequalities(&c).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.rows[0].row.solver_failed);
        assert!(!s.has_clean_violation());
    }
}
