//! Field snapshot format: one UTF-8 JSON header line terminated by `\n`,
//! followed by the raw payload of little-endian IEEE-754 f64 values in
//! `[z][y][x]` row-major order. Round trips are bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::state::ModelParams;

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

/// Variables a snapshot can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Theta,
    Eta,
    W,
    Omega,
    U,
    V,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HeaderGrid {
    l: f64,
    nx: usize,
    ny: usize,
    nz: usize,
}

/// Self-describing header; fully determines how to read the payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub schema: u32,
    grid: HeaderGrid,
    pub model: ModelParams,
    pub time: f64,
    pub variable: Variable,
    pub byte_order: String,
    pub element_type: String,
}

impl SnapshotHeader {
    pub fn new(grid: &GridSpec, model: ModelParams, time: f64, variable: Variable) -> Self {
        SnapshotHeader {
            schema: SNAPSHOT_SCHEMA_VERSION,
            grid: HeaderGrid { l: grid.l, nx: grid.nx, ny: grid.ny, nz: grid.nz },
            model,
            time,
            variable,
            byte_order: "little".into(),
            element_type: "f64".into(),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.l, self.grid.nx, self.grid.ny, self.grid.nz)
    }
}

pub fn write_snapshot(f: &ScalarField, header: &SnapshotHeader, path: &Path) -> Result<()> {
    let g = header.grid_spec()?;
    if &g != f.grid() {
        return Err(Error::Snapshot("header grid does not match field grid".into()));
    }
    let mut out = Vec::with_capacity(f.values().len() * 8 + 256);
    serde_json::to_writer(&mut out, header)
        .map_err(|e| Error::Snapshot(format!("header encode failed: {e}")))?;
    out.push(b'\n');
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ScalarField, SnapshotHeader)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Snapshot("missing header line".into()))?;
    let header: SnapshotHeader = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| Error::Snapshot(format!("header parse failed: {e}")))?;
    if header.schema != SNAPSHOT_SCHEMA_VERSION {
        return Err(Error::Snapshot(format!(
            "schema version mismatch: file has {}, reader supports {}",
            header.schema, SNAPSHOT_SCHEMA_VERSION
        )));
    }
    if header.byte_order != "little" {
        return Err(Error::Snapshot(format!(
            "unsupported byte order {:?}; this reader handles \"little\" only",
            header.byte_order
        )));
    }
    if header.element_type != "f64" {
        return Err(Error::Snapshot(format!(
            "unsupported element type {:?}",
            header.element_type
        )));
    }
    let grid = header.grid_spec()?;
    let payload = &bytes[nl + 1..];
    let expected = grid.len() * 8;
    if payload.len() != expected {
        return Err(Error::Snapshot(format!(
            "payload size mismatch: file has {} bytes, header implies {}",
            payload.len(),
            expected
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((ScalarField::from_values(grid, values)?, header))
}
