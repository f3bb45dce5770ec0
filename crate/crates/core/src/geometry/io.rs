//! Mask files: binary PGM (`P5`, 0 = outside, 255 = inside) with a JSON
//! sidecar carrying the lattice geometry, and JSON interval lists for
//! one-dimensional domains.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DomainSpec, Grid, GridDomain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub dim: usize,
    pub h: f64,
    pub origin: [f64; 2],
    pub shape: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DomainSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalFile {
    pub h: f64,
    pub intervals: Vec<Interval>,
}

/// Writes bytes to a sibling temp file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Sidecar path for a mask: `disk.pgm` → `disk.json`.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("json")
}

pub fn encode_pgm(domain: &GridDomain) -> Vec<u8> {
    let g = domain.grid();
    let mut out = format!("P5\n{} {}\n255\n", g.nx(), g.ny()).into_bytes();
    out.extend(domain.mask().iter().map(|&b| if b { 255u8 } else { 0u8 }));
    out
}

/// Parses a binary PGM into (width, height, pixels).
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::Parse("not a binary PGM (P5) file".into()));
    }
    let num = |t: String| {
        t.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad PGM header field '{t}'")))
    };
    let w = num(token()?)?;
    let hgt = num(token()?)?;
    let maxval = num(token()?)?;
    if maxval != 255 {
        return Err(Error::Parse(format!("unsupported PGM maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let start = pos + 1;
    let data = bytes
        .get(start..start + w * hgt)
        .ok_or_else(|| Error::Parse("PGM raster is truncated".into()))?;
    Ok((w, hgt, data.to_vec()))
}

/// Writes `path` (PGM) and its JSON sidecar.
pub fn save_mask(domain: &GridDomain, spec: Option<&DomainSpec>, path: &Path) -> Result<()> {
    if domain.dim() != 2 {
        return Err(Error::invalid(
            "PGM masks hold planar domains; use the interval format in 1D",
        ));
    }
    let g = domain.grid();
    let sidecar = Sidecar {
        dim: g.dim,
        h: g.h,
        origin: g.origin,
        shape: g.shape,
        spec: spec.copied(),
    };
    atomic_write(path, &encode_pgm(domain))?;
    let json = serde_json::to_vec_pretty(&sidecar).map_err(|e| Error::Parse(e.to_string()))?;
    atomic_write(&sidecar_path(path), &json)
}

pub fn save_intervals(file: &IntervalFile, path: &Path) -> Result<()> {
    let json = serde_json::to_vec_pretty(file).map_err(|e| Error::Parse(e.to_string()))?;
    atomic_write(path, &json)
}

/// Loads a domain from a PGM mask (with sidecar) or a JSON interval file.
pub fn load_domain(path: &Path) -> Result<GridDomain> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        let (w, hgt, data) = decode_pgm(&bytes)?;
        let side = sidecar_path(path);
        let meta: Sidecar = {
            let s = fs::read(&side).map_err(|e| Error::io(&side, e))?;
            serde_json::from_slice(&s)
                .map_err(|e| Error::Parse(format!("{}: {e}", side.display())))?
        };
        if meta.shape != [w, hgt] {
            return Err(Error::Parse(format!(
                "sidecar shape {:?} disagrees with PGM size {w}x{hgt}",
                meta.shape
            )));
        }
        let grid = Grid::new(meta.dim, meta.shape, meta.h, meta.origin)?;
        let inside = data.iter().map(|&v| v >= 128).collect();
        GridDomain::new(grid, inside)
    } else {
        let file: IntervalFile = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let iv: Vec<(f64, f64)> = file.intervals.iter().map(|i| (i.start, i.end)).collect();
        GridDomain::from_intervals(&iv, file.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainKind};

    #[test]
    fn pgm_round_trip_preserves_mask() {
        let spec = DomainSpec::new(
            DomainKind::Annulus {
                r_in: 0.3,
                r_out: 1.0,
            },
            1.0 / 32.0,
        );
        let d = build_domain(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.pgm");
        save_mask(&d, Some(&spec), &path).unwrap();
        let back = load_domain(&path).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn interval_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("iv.json");
        let file = IntervalFile {
            h: 0.01,
            intervals: vec![Interval {
                start: 0.0,
                end: 1.0,
            }],
        };
        save_intervals(&file, &path).unwrap();
        let d = load_domain(&path).unwrap();
        assert_eq!(d.dim(), 1);
        assert_eq!(d.inside_count(), 99);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n4 4\n255\n\0\0").is_err());
    }
}
