//! Batch front end: `domain`, `solve`, `bounds`, `verify` and `sweep`.
//!
//! Exit codes: 0 on success, 2 on any validation or I/O error (one line on
//! stderr), 3 when a verification campaign has a clean-solve violation.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    alpha, buser_bounds, endpoint_bounds, extension_constants, mazya_constant, mu_ball_lower_bound,
    scaling_exponent, theta, theta_lower_bound, Exponents,
};
use crate::error::{Error, Result};
use crate::experiments::{format_sig, round_sig};
use crate::experiments::{
    parse_q, punctured_ball_linf, write_csv, AsymptoticQuantity, Campaign, CsvTable, SweepOutcome,
    SweepSpec, VerifySummary,
};
use crate::geometry::io::{
    atomic_write, load_domain, save_intervals, save_mask, sidecar_path, Interval, IntervalFile,
    Sidecar,
};
use crate::geometry::{
    build_domain_with_budget, inradius, topology_order, DomainKind, DomainSpec, GridDomain,
    ObstacleSet, DEFAULT_NODE_BUDGET,
};
use crate::solvers::{
    capacity, cheeger_maxflow, lambda11_tv, linf_frequency, neumann_constant, principal_frequency,
    punctured_frequency, punctured_linf_frequency, punctured_radial, richardson, RadialMode,
    SolveOptions, SolveReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pfreq",
    version,
    about = "Principal frequencies, capacities and Cheeger constants on grid domains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rasterize a domain to a PGM mask with a JSON sidecar (or a 1D interval file)
    Domain(DomainArgs),
    /// Compute a variational constant on a saved domain
    Solve(SolveArgs),
    /// Evaluate the explicit constants and bounds for given exponents
    Bounds(BoundsArgs),
    /// Run an inequality verification campaign
    Verify(CampaignArgs),
    /// Run parameter sweeps from a campaign file or from flags
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Family and parameters, e.g. disk:r=1, annulus:r_in=0.3,r_out=1, perforated:k=16,beta=0.6
    #[arg(long, conflicts_with = "intervals")]
    pub spec: Option<String>,
    /// One-dimensional domain as a list of intervals, e.g. 0:1,2:3
    #[arg(long)]
    pub intervals: Option<String>,
    /// Grid spacing
    #[arg(long)]
    pub h: f64,
    /// Largest number of lattice nodes the builder may allocate
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: usize,
    /// Output mask (.pgm, sidecar written next to it) or interval file (.json)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityArg {
    Lambda,
    LambdaInf,
    Capacity,
    Cheeger,
    Lambda11,
    Mu,
    PuncturedLp,
    PuncturedLinf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Domain file written by `domain`
    #[arg(long)]
    pub domain: PathBuf,
    /// TOML or JSON file with defaults for the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Gradient exponent (default 2)
    #[arg(long)]
    pub p: Option<f64>,
    /// Target exponent; `inf` for the L-infinity problem
    #[arg(long)]
    pub q: Option<String>,
    /// Constant to compute (default lambda)
    #[arg(long, value_enum)]
    pub quantity: Option<QuantityArg>,
    /// Obstacle (capacity) or pinned set (punctured constants), JSON
    #[arg(long)]
    pub obstacle: Option<PathBuf>,
    /// Relative stopping tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// 2 re-solves at half the spacing (needs a builder spec in the sidecar) and reports the extrapolated value
    #[arg(long)]
    pub refine: Option<u32>,
    /// Report path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Dimension
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    /// One or more comma-separated values of p
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    /// One or more comma-separated values of q (`inf` allowed)
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<String>,
    /// Topological order
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Inradius
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Emit one CSV row per exponent tuple instead of JSON
    #[arg(long)]
    pub csv: bool,
    /// Output path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// Campaign file (TOML, or JSON by extension)
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the campaign's output directory
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Overrides the campaign seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the number of seeded domains
    #[arg(long)]
    pub seeded_domains: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Buser,
    Asymptotic,
    MoserTrudinger,
    Pepper,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Campaign file whose `sweeps` are run; flags below describe a single sweep instead
    #[arg(long, conflicts_with = "kind")]
    pub config: Option<PathBuf>,
    /// Sweep to run when no config is given
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// Hole counts (buser)
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Hole radius exponent (buser)
    #[arg(long, default_value_t = 0.6)]
    pub beta: f64,
    /// Smallest k in the growth fit (buser)
    #[arg(long, default_value_t = 16)]
    pub fit_from: usize,
    /// Dimension (asymptotic)
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    /// Parameter grid (asymptotic)
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    /// beta, lambda_inf_ball or theta_q_limit (asymptotic)
    #[arg(long)]
    pub quantity: Option<String>,
    /// Domain spec (moser-trudinger)
    #[arg(long)]
    pub spec: Option<String>,
    /// Grid spacing (moser-trudinger, pepper)
    #[arg(long)]
    pub h: Option<f64>,
    /// Target exponents (moser-trudinger)
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    /// Integrability exponent (pepper)
    #[arg(long)]
    pub p: Option<f64>,
    /// Window half-sizes (pepper)
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Lattice point radii (pepper)
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Solver tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory for series and summary files
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{line}");
            return EXIT_INVALID;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            EXIT_INVALID
        }
    }
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Domain(a) => domain_cmd(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => atomic_write(p, text.as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json(v: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))
}

fn domain_cmd(a: DomainArgs) -> Result<i32> {
    match (&a.spec, &a.intervals) {
        (Some(spec), None) => {
            let kind: DomainKind = spec.parse()?;
            let spec = DomainSpec::new(kind, a.h);
            let d = build_domain_with_budget(&spec, a.budget)?;
            save_mask(&d, Some(&spec), &a.out)?;
        }
        (None, Some(iv)) => {
            let intervals = iv
                .split(',')
                .map(|t| {
                    let (s, e) = t.split_once(':').ok_or_else(|| {
                        Error::invalid(format!("interval '{t}' is not start:end"))
                    })?;
                    let num = |v: &str| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::invalid(format!("'{v}' is not a number")))
                    };
                    Ok(Interval {
                        start: num(s)?,
                        end: num(e)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let file = IntervalFile { h: a.h, intervals };
            // Validate before writing.
            let iv: Vec<(f64, f64)> = file.intervals.iter().map(|i| (i.start, i.end)).collect();
            GridDomain::from_intervals(&iv, a.h)?;
            save_intervals(&file, &a.out)?;
        }
        _ => return Err(Error::invalid("give exactly one of --spec or --intervals")),
    }
    Ok(EXIT_OK)
}

/// Settings of `solve`; a config file supplies defaults, flags override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub p: Option<f64>,
    pub q: Option<String>,
    pub quantity: Option<QuantityArg>,
    pub obstacle: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub refine: Option<u32>,
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Obstacle file: points (nearest nodes) and closed disks.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleFile {
    pub points: Vec<[f64; 2]>,
    pub disks: Vec<DiskObstacle>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskObstacle {
    pub center: [f64; 2],
    pub r: f64,
}

impl ObstacleFile {
    pub fn nodes(&self, domain: &GridDomain) -> Result<ObstacleSet> {
        let g = *domain.grid();
        let mut nodes = Vec::new();
        for &x in &self.points {
            nodes.push(g.nearest_node(x).ok_or_else(|| {
                Error::invalid(format!("obstacle point {x:?} outside the window"))
            })?);
        }
        for d in &self.disks {
            let tol = 1e-9 * g.h;
            nodes.extend((0..g.len()).filter(|&k| {
                let x = g.position(k);
                (x[0] - d.center[0]).hypot(x[1] - d.center[1]) <= d.r + tol
            }));
        }
        ObstacleSet::new(g, nodes)
    }
}

fn solve_on(
    domain: &GridDomain,
    cfg: &SolveConfig,
    p: f64,
    q: f64,
    obstacle: Option<&ObstacleFile>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let quantity = cfg.quantity.unwrap_or(QuantityArg::Lambda);
    let n = domain.dim();
    let obs = || {
        obstacle
            .ok_or_else(|| Error::invalid(format!("quantity {quantity:?} needs --obstacle")))
            .and_then(|o| o.nodes(domain))
    };
    match quantity {
        QuantityArg::Lambda if q.is_infinite() => linf_frequency(domain, p, opts),
        QuantityArg::Lambda => principal_frequency(domain, &Exponents::new(n, p, q)?, opts),
        QuantityArg::LambdaInf => linf_frequency(domain, p, opts),
        QuantityArg::Capacity => capacity(domain, &obs()?, p, opts),
        QuantityArg::Cheeger => cheeger_maxflow(domain),
        QuantityArg::Lambda11 => lambda11_tv(domain, None, opts),
        QuantityArg::Mu => neumann_constant(domain, &Exponents::new(n, p, q)?, opts),
        QuantityArg::PuncturedLp => {
            punctured_frequency(domain, &obs()?, &Exponents::new(n, p, q)?, opts)
        }
        QuantityArg::PuncturedLinf => punctured_linf_frequency(domain, &obs()?, p, opts),
    }
}

fn solve_cmd(a: SolveArgs) -> Result<i32> {
    let base: SolveConfig = match &a.config {
        Some(path) => read_config(path)?,
        None => SolveConfig::default(),
    };
    let cfg = SolveConfig {
        p: a.p.or(base.p),
        q: a.q.clone().or(base.q),
        quantity: a.quantity.or(base.quantity),
        obstacle: a.obstacle.clone().or(base.obstacle),
        tol: a.tol.or(base.tol),
        max_iter: a.max_iter.or(base.max_iter),
        refine: a.refine.or(base.refine),
    };
    let p = cfg.p.unwrap_or(2.0);
    let q = match &cfg.q {
        Some(s) => parse_q(s)?,
        None => p,
    };
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        tol: cfg.tol.unwrap_or(defaults.tol),
        max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
    };
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::invalid("tol must be positive and max-iter non-zero"));
    }
    let domain = load_domain(&a.domain)?;
    let obstacle: Option<ObstacleFile> = cfg.obstacle.as_deref().map(read_config).transpose()?;
    let mut report = solve_on(&domain, &cfg, p, q, obstacle.as_ref(), &opts)?;
    match cfg.refine.unwrap_or(1) {
        1 => {}
        2 => {
            let side = sidecar_path(&a.domain);
            let meta: Sidecar = read_config(&side)
                .map_err(|_| Error::invalid("--refine 2 needs a PGM domain with a sidecar"))?;
            let spec = meta.spec.ok_or_else(|| {
                Error::invalid("--refine 2 needs the builder spec in the sidecar")
            })?;
            let fine = build_domain_with_budget(
                &DomainSpec::new(spec.kind, spec.resolution / 2.0),
                DEFAULT_NODE_BUDGET,
            )?;
            let f = solve_on(&fine, &cfg, p, q, obstacle.as_ref(), &opts)?;
            report.extrapolated = Some(richardson(report.value, f.value));
            report.converged &= f.converged;
        }
        r => return Err(Error::invalid(format!("--refine must be 1 or 2, got {r}"))),
    }
    let inputs = json!({
        "domain": a.domain,
        "p": p,
        "q": if q.is_infinite() { json!("inf") } else { json!(q) },
        "dim": domain.dim(),
        "nodes": domain.inside_count(),
        "inradius": round_sig(inradius(&domain)),
        "order": topology_order(&domain).ok(),
        "volume": round_sig(domain.volume()),
    });
    let out = json!({
        "quantity": report.quantity,
        "value": round_sig(report.value),
        "extrapolated": report.extrapolated.map(round_sig),
        "h": report.h,
        "iterations": report.iterations,
        "residual": round_sig(report.residual),
        "converged": report.converged,
        "inputs": inputs,
        "config": cfg,
    });
    emit(&to_json(&out)?, a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn opt_value(r: Result<f64>) -> Value {
    match r {
        Ok(v) => json!(round_sig(v)),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn bounds_record(n: usize, p: f64, q: f64, k: usize, r: f64) -> Result<Value> {
    let e = Exponents::new(n, p, q)?;
    let opts = SolveOptions::default();
    let mut rec = json!({
        "N": n,
        "p": p,
        "q": if q.is_infinite() { json!("inf") } else { json!(q) },
        "k": k,
        "r": r,
        "scaling_exponent": round_sig(scaling_exponent(&e)),
        "alpha": round_sig(alpha(&e)),
        "mu_ball_lower": opt_value(mu_ball_lower_bound(&e)),
        "mazya_constant": opt_value(mazya_constant(&e, 0.5)),
        "theta": opt_value(theta(&e)),
        "inradius_lower_bound": opt_value(theta_lower_bound(&e, k, r)),
    });
    if let Ok(ext) = extension_constants(&e, (n as f64).sqrt()) {
        rec["extension_gradient"] = json!(round_sig(ext.gradient));
        rec["extension_lp"] = json!(round_sig(ext.lp));
    }
    if n == 2 && p == 1.0 && q == 1.0 {
        rec["cheeger_lower"] = opt_value(buser_bounds(k, 1.0, r).map(|b| b.cheeger_lower));
    }
    if p > n as f64 && q >= p {
        let lp = punctured_radial(n, p, RadialMode::Lp, 4000, &opts).map(|x| x.report.value);
        let linf = punctured_ball_linf(n, p, &opts);
        let eb = lp.and_then(|lp| linf.and_then(|li| endpoint_bounds(&e, r, lp, li)));
        rec["endpoint"] = match eb {
            Ok(b) => serde_json::to_value(b).map_err(|e| Error::Parse(e.to_string()))?,
            Err(err) => json!({ "unavailable": err.to_string() }),
        };
    }
    Ok(rec)
}

fn bounds_cmd(a: BoundsArgs) -> Result<i32> {
    if !(a.r > 0.0) || a.k == 0 {
        return Err(Error::invalid("need k >= 1 and r > 0"));
    }
    let qs =
        a.q.iter()
            .map(|s| parse_q(s))
            .collect::<Result<Vec<f64>>>()?;
    let mut records = Vec::new();
    for &p in &a.p {
        for &q in &qs {
            records.push(bounds_record(a.n, p, q, a.k, a.r)?);
        }
    }
    let text = if a.csv {
        let cols = [
            "N",
            "p",
            "q",
            "k",
            "r",
            "scaling_exponent",
            "alpha",
            "mu_ball_lower",
            "mazya_constant",
            "theta",
            "inradius_lower_bound",
        ];
        let mut t = CsvTable::new(&cols);
        for rec in &records {
            t.push(
                cols.iter()
                    .map(|c| match &rec[*c] {
                        Value::Number(x) => x
                            .as_f64()
                            .map(|v| {
                                if v.fract() == 0.0 && v.abs() < 1e15 {
                                    format!("{v}")
                                } else {
                                    format_sig(v)
                                }
                            })
                            .unwrap_or_default(),
                        Value::String(s) => s.clone(),
                        _ => String::new(),
                    })
                    .collect(),
            );
        }
        t.render()
    } else {
        let body = if records.len() == 1 {
            records.pop().expect("one record")
        } else {
            Value::Array(records)
        };
        to_json(&body)?
    };
    emit(text.trim_end(), a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn load_campaign(a: &CampaignArgs) -> Result<Campaign> {
    let mut c = Campaign::load(&a.config)?;
    if let Some(d) = &a.out_dir {
        c.output.dir = d.clone();
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(n) = a.seeded_domains {
        c.seeded_domains = n;
    }
    c.validate()?;
    Ok(c)
}

fn verify_cmd(a: CampaignArgs) -> Result<i32> {
    let campaign = load_campaign(&a)?;
    let summary = crate::experiments::verify_inequalities(&campaign)?;
    summary.write(&campaign)?;
    eprintln!(
        "{} rows: {} pass, {} fail ({} clean violations, {} solver failures)",
        summary.rows.len(),
        summary.pass_count,
        summary.fail_count,
        summary.clean_violations,
        summary.solver_failures
    );
    Ok(verdict(&summary))
}

/// Exit code of a finished campaign.
pub fn verdict(summary: &VerifySummary) -> i32 {
    if summary.has_clean_violation() {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn sweep_from_flags(a: &SweepArgs) -> Result<SweepSpec> {
    let kind = a
        .kind
        .ok_or_else(|| Error::invalid("give --config or --kind"))?;
    let need_h = || a.h.ok_or_else(|| Error::invalid("this sweep needs --h"));
    Ok(match kind {
        SweepKind::Buser => SweepSpec::Buser {
            k: a.k.clone(),
            beta: a.beta,
            fit_from: a.fit_from,
        },
        SweepKind::Asymptotic => SweepSpec::Asymptotic {
            n: a.n,
            grid: a.grid.clone(),
            quantity: a
                .quantity
                .as_deref()
                .ok_or_else(|| Error::invalid("asymptotic sweep needs --quantity"))?
                .parse::<AsymptoticQuantity>()?,
        },
        SweepKind::MoserTrudinger => SweepSpec::MoserTrudinger {
            domain: DomainSpec::new(
                a.spec
                    .as_deref()
                    .ok_or_else(|| Error::invalid("moser-trudinger sweep needs --spec"))?
                    .parse()?,
                need_h()?,
            ),
            q: a.q.clone(),
        },
        SweepKind::Pepper => SweepSpec::Pepper {
            p: a.p
                .ok_or_else(|| Error::invalid("pepper sweep needs --p"))?,
            m: a.m.clone(),
            eps: a.eps.clone(),
            resolution: need_h()?,
        },
    })
}

fn sweep_cmd(a: SweepArgs) -> Result<i32> {
    let mut campaign = match &a.config {
        Some(path) => Campaign::load(path)?,
        None => {
            let mut c = Campaign::new("sweep");
            c.sweeps.push(sweep_from_flags(&a)?);
            c
        }
    };
    if let Some(d) = &a.out_dir {
        campaign.output.dir = d.clone();
    }
    if let Some(t) = a.tol {
        campaign.tolerances.solver = t;
    }
    campaign.validate()?;
    if campaign.sweeps.is_empty() {
        return Err(Error::invalid("campaign has no sweeps"));
    }
    let opts = SolveOptions {
        tol: campaign.tolerances.solver,
        max_iter: campaign.tolerances.max_iter,
    };
    let out = &campaign.output;
    std::fs::create_dir_all(&out.dir).map_err(|e| Error::io(&out.dir, e))?;
    let many = campaign.sweeps.len() > 1;
    let mut results = Vec::new();
    for (i, spec) in campaign.sweeps.iter().enumerate() {
        let outcome: SweepOutcome = spec.run(&opts)?;
        let path = if many {
            let stem = Path::new(&out.series)
                .file_stem()
                .map_or("series".into(), |s| s.to_string_lossy().into_owned());
            out.dir.join(format!("{stem}_{i}_{}.csv", spec.name()))
        } else {
            out.series_path()
        };
        write_csv(&outcome.table(), &path)?;
        results.push(json!({ "kind": spec.name(), "series": path, "result": outcome }));
    }
    let summary = json!({ "sweeps": results, "config": campaign });
    atomic_write(&out.summary_path(), to_json(&summary)?.as_bytes())?;
    Ok(EXIT_OK)
}
