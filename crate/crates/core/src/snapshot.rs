//! Binary state snapshots.
//!
//! Layout: the line `twofluid-snapshot 1`, one line of JSON ([`SnapshotHeader`]),
//! then every Fourier coefficient of every field component in flat index
//! order as little-endian `(re, im)` f64 pairs, fields in header order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{build_grid, ScalarField, VectorField};
use crate::systems::{Params, SystemKind, SystemState};

const MAGIC: &str = "twofluid-snapshot 1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub dim: usize,
    pub n: usize,
    pub system: SystemKind,
    pub t: f64,
    pub params: Params,
    pub fields: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub state: SystemState,
}

fn field_names(kind: SystemKind) -> Vec<String> {
    let names: &[&str] = match kind {
        SystemKind::Eqnsm => &["u", "j", "e", "b"],
        SystemKind::Nsmo => &["u", "e", "b"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

pub fn write_snapshot<W: Write>(mut out: W, state: &SystemState, params: &Params) -> Result<()> {
    let grid = state.grid();
    let header = SnapshotHeader {
        dim: grid.dim(),
        n: grid.n(),
        system: state.kind(),
        t: state.t(),
        params: *params,
        fields: field_names(state.kind()),
    };
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    let mut buf = Vec::with_capacity(16 * grid.len());
    for f in state.fields() {
        for c in f.comps() {
            buf.clear();
            for z in c.coeffs() {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            out.write_all(&buf)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut input: R) -> Result<Snapshot> {
    let bad = |reason: String| Error::Snapshot {
        path: PathBuf::new(),
        reason,
    };
    let mut line = String::new();
    input.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(bad(format!("bad magic line {:?}", line.trim_end())));
    }
    line.clear();
    input.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())?;
    if header.fields != field_names(header.system) {
        return Err(bad(format!("unexpected field list {:?}", header.fields)));
    }
    let grid = build_grid(header.dim, header.n)?;
    let mut bytes = vec![0u8; 16 * grid.len()];
    let mut fields = Vec::with_capacity(header.fields.len());
    for _ in &header.fields {
        let mut comps = Vec::with_capacity(3);
        for _ in 0..3 {
            input
                .read_exact(&mut bytes)
                .map_err(|e| bad(format!("truncated coefficient data: {e}")))?;
            let coeffs = bytes
                .chunks_exact(16)
                .map(|b| {
                    let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect();
            comps.push(ScalarField::from_coeffs(&grid, coeffs)?);
        }
        let comps: [ScalarField; 3] = comps.try_into().expect("three components");
        fields.push(VectorField::from_components(comps)?);
    }
    if input.read(&mut [0u8; 1])? != 0 {
        return Err(bad("trailing bytes after coefficient data".into()));
    }
    let state = SystemState::from_fields(header.system, fields, header.t)?;
    Ok(Snapshot { header, state })
}

pub fn save_snapshot(path: &Path, state: &SystemState, params: &Params) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), state, params).map_err(|e| with_path(e, path))
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    read_snapshot(BufReader::new(File::open(path)?)).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Snapshot { reason, .. } => Error::Snapshot {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    }
}
