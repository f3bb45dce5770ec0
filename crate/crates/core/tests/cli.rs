use std::path::Path;
use std::process::{Command, Output};

use pfreq::geometry::io::load_domain;
use pfreq::geometry::{build_domain, DomainKind, DomainSpec};
use serde_json::Value;

fn pfreq(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfreq"))
        .args(args)
        .current_dir(cwd)
        .env("NUMERIC_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn assert_invalid(out: &Output) {
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "diagnostic: {err}");
}

#[test]
fn help_matches_golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let tmp = tempfile::tempdir().unwrap();
    for (args, file) in [
        (vec!["--help"], "help.txt"),
        (vec!["domain", "--help"], "help_domain.txt"),
        (vec!["solve", "--help"], "help_solve.txt"),
        (vec!["bounds", "--help"], "help_bounds.txt"),
        (vec!["verify", "--help"], "help_verify.txt"),
        (vec!["sweep", "--help"], "help_sweep.txt"),
    ] {
        let out = pfreq(&args, tmp.path());
        assert_eq!(out.status.code(), Some(0));
        let want = std::fs::read_to_string(dir.join(file)).unwrap();
        assert_eq!(String::from_utf8_lossy(&out.stdout), want, "{file}");
        // Every flag line carries a description.
        for line in want.lines().filter(|l| l.trim_start().starts_with("--")) {
            assert!(
                line.trim().split("  ").filter(|s| !s.is_empty()).count() >= 2,
                "undocumented: {line}"
            );
        }
    }
}

#[test]
fn domain_round_trips_through_pgm() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pfreq(
        &[
            "domain",
            "--spec",
            "annulus:r_in=0.3,r_out=1",
            "--h",
            "0.0625",
            "--out",
            "a.pgm",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let loaded = load_domain(&tmp.path().join("a.pgm")).unwrap();
    let built = build_domain(&DomainSpec::new(
        DomainKind::Annulus {
            r_in: 0.3,
            r_out: 1.0,
        },
        0.0625,
    ))
    .unwrap();
    assert_eq!(loaded.mask(), built.mask());
    assert_eq!(loaded.grid(), built.grid());
    assert!(tmp.path().join("a.json").exists());

    let out = pfreq(
        &[
            "domain",
            "--intervals",
            "0:1,1.5:2",
            "--h",
            "0.01",
            "--out",
            "iv.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(load_domain(&tmp.path().join("iv.json")).unwrap().dim(), 1);
}

#[test]
fn solve_reports_the_disk_eigenvalue_with_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pfreq(
        &[
            "domain",
            "--spec",
            "disk:r=1",
            "--h",
            "0.0078125",
            "--out",
            "disk.pgm",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&pfreq(
        &["solve", "--domain", "disk.pgm", "--p", "2", "--q", "2"],
        tmp.path(),
    ));
    let value = v["value"].as_f64().unwrap();
    assert!((value / 5.783186 - 1.0).abs() < 0.02, "{value}");
    assert_eq!(v["converged"], Value::Bool(true));
    assert_eq!(v["config"]["p"].as_f64(), Some(2.0));
    assert_eq!(v["inputs"]["order"].as_u64(), Some(1));

    // Flags override the config file.
    std::fs::write(
        tmp.path().join("s.toml"),
        "p = 3.0\nq = \"2\"\ntol = 1e-7\n",
    )
    .unwrap();
    let out = pfreq(
        &[
            "solve", "--domain", "disk.pgm", "--config", "s.toml", "--p", "2", "--out", "r.json",
        ],
        tmp.path(),
    );
    assert!(out.status.success() && out.stdout.is_empty());
    let r: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["config"]["p"].as_f64(), Some(2.0));
    assert_eq!(r["config"]["tol"].as_f64(), Some(1e-7));
}

#[test]
fn bounds_example_halves_theta() {
    let tmp = tempfile::tempdir().unwrap();
    let v = stdout_json(&pfreq(
        &[
            "bounds", "--N", "2", "--p", "1", "--q", "1", "--k", "4", "--r", "1",
        ],
        tmp.path(),
    ));
    let theta = v["theta"].as_f64().unwrap();
    let lower = v["cheeger_lower"].as_f64().unwrap();
    assert!(theta > 0.0);
    assert!((lower - theta / 2.0).abs() <= 1e-11 * theta);

    let out = pfreq(
        &["bounds", "--p", "3,4", "--q", "8,inf", "--csv"],
        tmp.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("N,p,q,k,r,"));
    // p = N with q = inf is inadmissible.
    assert_invalid(&pfreq(
        &["bounds", "--p", "2,3", "--q", "inf", "--csv"],
        tmp.path(),
    ));
}

#[test]
fn validation_errors_exit_two_with_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    assert_invalid(&pfreq(
        &["bounds", "--p", "2", "--q", "2", "--frobnicate"],
        tmp.path(),
    ));
    assert_invalid(&pfreq(
        &[
            "domain",
            "--spec",
            "disk:r=-1",
            "--h",
            "0.1",
            "--out",
            "x.pgm",
        ],
        tmp.path(),
    ));
    assert_invalid(&pfreq(
        &[
            "domain",
            "--spec",
            "disk:r=1",
            "--h",
            "0.1",
            "--out",
            "missing/dir/x.pgm",
        ],
        tmp.path(),
    ));
    assert_invalid(&pfreq(&["solve", "--domain", "nowhere.pgm"], tmp.path()));
    assert_invalid(&pfreq(
        &[
            "sweep", "--kind", "pepper", "--p", "2", "--m", "1", "--eps", "0.1", "--h", "0.05",
        ],
        tmp.path(),
    ));
    assert!(!tmp.path().join("x.pgm").exists());
}

#[test]
fn verify_writes_rows_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("c.toml"),
        "name = \"disk\"\nexponents = [[2, 2], [1, 1]]\n\n[[domains]]\nkind = \"disk\"\nr = 1.0\nresolution = 0.125\n\n[output]\ndir = \"out\"\n",
    )
    .unwrap();
    let out = pfreq(&["verify", "--config", "c.toml"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = std::fs::read_to_string(tmp.path().join("out/rows.csv")).unwrap();
    assert!(rows.starts_with("domain_id,domain,label,p,q,sense,"));
    let summary: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["fail_count"].as_u64(), Some(0));
    assert_eq!(summary["config"]["name"], Value::String("disk".into()));
}
