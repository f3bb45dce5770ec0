//! Reproducible campaigns: inequality verification over seeded domains and
//! the asymptotic sweeps.
//!
//! Every row is computed independently (possibly on a thread pool) and the
//! table is sorted by its input key before it is written, so output bytes
//! depend only on the configuration and the seed.

mod output;
mod sweeps;
mod verify;

pub use output::{format_sig, round_sig, write_csv, CsvTable};
pub use sweeps::{
    asymptotic_sweep, buser_resolution, buser_sweep, limit_trends, AsymptoticQuantity,
    AsymptoticRow, AsymptoticSweep, BuserRow, BuserSweep, TrendMode, TrendRow, TrendSweep,
};
pub use verify::{
    punctured_ball_linf, seeded_domains, verify_inequalities, VerifyRow, VerifySummary,
};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::Exponents;
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// One `(p, q)` pair of a campaign grid; `q` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    pub fn exponents(&self, n: usize) -> Result<Exponents> {
        Exponents::new(n, self.p, self.q)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum QValue {
    Number(f64),
    Text(String),
}

pub(crate) fn parse_q(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "Inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t
            .parse()
            .map_err(|_| Error::Parse(format!("'{t}' is not an exponent"))),
    }
}

impl Serialize for ExponentPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let q = if self.q.is_infinite() {
            QValue::Text("inf".into())
        } else {
            QValue::Number(self.q)
        };
        (self.p, q).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExponentPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (p, q): (f64, QValue) = Deserialize::deserialize(d)?;
        let q = match q {
            QValue::Number(q) => q,
            QValue::Text(t) => parse_q(&t).map_err(serde::de::Error::custom)?,
        };
        Ok(ExponentPair { p, q })
    }
}

/// The exponent grid of the property suite.
pub fn default_exponent_grid() -> Vec<ExponentPair> {
    [
        (1.0, 1.0),
        (1.5, 2.0),
        (2.0, 2.0),
        (2.0, 4.0),
        (4.0, 4.0),
        (4.0, f64::INFINITY),
    ]
    .into_iter()
    .map(|(p, q)| ExponentPair { p, q })
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative quotient change at which solvers stop.
    pub solver: f64,
    pub max_iter: usize,
    /// Relative slack for inequalities that hold exactly at grid level up to
    /// solver accuracy (monotonicity, Hölder interpolation).
    pub exact: f64,
    /// Relative slack for inequalities that hold only up to discretization
    /// error (Cheeger, capacity–projection, extension).
    pub discretization: f64,
    /// Relative slack for the symmetrization energy.
    pub symmetrization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: 1e-8,
            max_iter: 10_000,
            exact: 1e-3,
            discretization: 0.05,
            symmetrization: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub rows: String,
    pub summary: String,
    pub series: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            dir: PathBuf::from("."),
            rows: "rows.csv".into(),
            summary: "summary.json".into(),
            series: "series.csv".into(),
        }
    }
}

impl OutputPaths {
    pub fn rows_path(&self) -> PathBuf {
        self.dir.join(&self.rows)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.dir.join(&self.summary)
    }

    pub fn series_path(&self) -> PathBuf {
        self.dir.join(&self.series)
    }
}

/// Sweep requested by a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    Buser {
        k: Vec<usize>,
        beta: f64,
        /// Smallest `k` entering the growth-exponent fit.
        #[serde(default = "default_fit_from")]
        fit_from: usize,
    },
    Asymptotic {
        n: usize,
        grid: Vec<f64>,
        quantity: AsymptoticQuantity,
    },
    MoserTrudinger {
        domain: DomainSpec,
        q: Vec<f64>,
    },
    Pepper {
        p: f64,
        m: Vec<usize>,
        /// Radii of the removed disks.
        eps: Vec<f64>,
        resolution: f64,
    },
}

/// Result of one [`SweepSpec`].
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum SweepOutcome {
    Buser(BuserSweep),
    Asymptotic(AsymptoticSweep),
    Trend(TrendSweep),
}

impl SweepOutcome {
    pub fn table(&self) -> CsvTable {
        match self {
            SweepOutcome::Buser(s) => s.table(),
            SweepOutcome::Asymptotic(s) => s.table(),
            SweepOutcome::Trend(s) => s.table(),
        }
    }
}

impl SweepSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SweepSpec::Buser { .. } => "buser",
            SweepSpec::Asymptotic { .. } => "asymptotic",
            SweepSpec::MoserTrudinger { .. } => "moser_trudinger",
            SweepSpec::Pepper { .. } => "pepper",
        }
    }

    pub fn run(&self, opts: &crate::solvers::SolveOptions) -> Result<SweepOutcome> {
        Ok(match self {
            SweepSpec::Buser { k, beta, fit_from } => {
                SweepOutcome::Buser(buser_sweep(k, *beta, *fit_from, opts)?)
            }
            SweepSpec::Asymptotic { n, grid, quantity } => {
                SweepOutcome::Asymptotic(asymptotic_sweep(*n, grid, *quantity, opts)?)
            }
            SweepSpec::MoserTrudinger { domain, q } => SweepOutcome::Trend(limit_trends(
                &TrendMode::MoserTrudinger {
                    domain: *domain,
                    q: q.clone(),
                },
                opts,
            )?),
            SweepSpec::Pepper {
                p,
                m,
                eps,
                resolution,
            } => SweepOutcome::Trend(limit_trends(
                &TrendMode::Pepper {
                    p: *p,
                    m: m.clone(),
                    eps: eps.clone(),
                    resolution: *resolution,
                },
                opts,
            )?),
        })
    }
}

fn default_fit_from() -> usize {
    16
}

/// A verification or sweep campaign, read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub name: String,
    #[serde(default)]
    pub domains: Vec<DomainSpec>,
    /// Number of pseudo-random domains appended to `domains`.
    #[serde(default)]
    pub seeded_domains: usize,
    #[serde(default = "default_exponent_grid")]
    pub exponents: Vec<ExponentPair>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub sweeps: Vec<SweepSpec>,
}

impl Campaign {
    pub fn new(name: impl Into<String>) -> Self {
        Campaign {
            name: name.into(),
            domains: Vec::new(),
            seeded_domains: 0,
            exponents: default_exponent_grid(),
            tolerances: Tolerances::default(),
            seed: 0,
            output: OutputPaths::default(),
            sweeps: Vec::new(),
        }
    }

    /// Parses a campaign; `.json` files as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let c: Campaign = if is_json {
            serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::invalid("campaign needs a name"));
        }
        for pair in &self.exponents {
            if !(pair.p >= 1.0) || !(pair.q >= 1.0) {
                return Err(Error::Exponents(format!(
                    "bad grid point ({}, {})",
                    pair.p, pair.q
                )));
            }
        }
        let t = &self.tolerances;
        if !(t.solver > 0.0)
            || t.max_iter == 0
            || t.exact < 0.0
            || t.discretization < 0.0
            || t.symmetrization < 0.0
        {
            return Err(Error::invalid(
                "tolerances must be non-negative and the solver tolerance positive",
            ));
        }
        Ok(())
    }

    pub(crate) fn solve_options(&self) -> crate::solvers::SolveOptions {
        crate::solvers::SolveOptions {
            tol: self.tolerances.solver,
            max_iter: self.tolerances.max_iter,
        }
    }
}

/// Worker count: `NUMERIC_THREADS` if set to a positive integer, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("NUMERIC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on a pool of [`worker_count`] threads, keeping the
/// input order.
pub(crate) fn run_pool<T, R, F>(items: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.into_par_iter().map(f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn campaign_round_trips_through_toml_and_json() {
        let text = r#"
            name = "smoke"
            seed = 7
            seeded_domains = 2
            exponents = [[2.0, 2.0], [4.0, "inf"]]

            [[domains]]
            kind = "disk"
            r = 1.0
            resolution = 0.125

            [tolerances]
            exact = 1e-3

            [[sweeps]]
            kind = "buser"
            k = [4, 16]
            beta = 0.6
        "#;
        let c: Campaign = toml::from_str(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.exponents[1].q, f64::INFINITY);
        assert_eq!(c.tolerances.discretization, 0.05);
        let json = serde_json::to_string(&c).unwrap();
        let back: Campaign = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(toml::from_str::<Campaign>("name = \"x\"\nbogus = 1\n").is_err());
    }
}
