//! On-disk container for matrix-product states.
//!
//! Layout: the 8 magic bytes `PLMPS001`, a little-endian `u64` header
//! length, a UTF-8 JSON header, then every block's entries as little-endian
//! `f64` in column-major order, in the order the header lists the blocks.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::site::{Charge, RungSpace};
use super::state::{Blocks, Bond, MpsState};
use crate::error::{Error, Result};
use crate::model::ModelParams;

const MAGIC: &[u8; 8] = b"PLMPS001";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub site: usize,
    pub state: usize,
    pub left_charge: Charge,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub sites: usize,
    pub particles: usize,
    pub space: RungSpace,
    /// Total dimension of each internal bond.
    pub chi: Vec<usize>,
    pub bonds: Vec<Bond>,
    pub center: usize,
    /// SHA-256 of the JSON-encoded model parameters, hex.
    pub params_hash: String,
    pub blocks: Vec<BlockEntry>,
}

pub fn params_hash(params: &ModelParams) -> Result<String> {
    let json = serde_json::to_vec(params)?;
    let digest = Sha256::digest(&json);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn write_checkpoint<W: Write>(out: &mut W, state: &MpsState, params: &ModelParams) -> Result<()> {
    let mut blocks = Vec::new();
    let mut data: Vec<u8> = Vec::new();
    for (site, t) in state.tensors.iter().enumerate() {
        for (&(s, ql), m) in t {
            blocks.push(BlockEntry {
                site,
                state: s,
                left_charge: ql,
                rows: m.nrows(),
                cols: m.ncols(),
            });
            for v in m.as_slice() {
                data.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let header = CheckpointHeader {
        sites: state.sites(),
        particles: state.particles,
        space: state.space.clone(),
        chi: state.bond_dims(),
        bonds: state.bonds.clone(),
        center: state.center,
        params_hash: params_hash(params)?,
        blocks,
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    out.write_all(&data)?;
    Ok(())
}

/// Reads a checkpoint. With `params`, the stored hash must match.
pub fn read_checkpoint<R: Read>(input: &mut R, params: Option<&ModelParams>) -> Result<(CheckpointHeader, MpsState)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not an MPS checkpoint".into()));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;
    if let Some(p) = params {
        let h = params_hash(p)?;
        if h != header.params_hash {
            return Err(Error::Mismatch(format!(
                "checkpoint was written for parameters {}, expected {h}",
                header.params_hash
            )));
        }
    }
    if header.bonds.len() != header.sites + 1 || header.center >= header.sites.max(1) {
        return Err(Error::Format("inconsistent bond list or center".into()));
    }
    let mut tensors: Vec<Blocks> = vec![BTreeMap::new(); header.sites];
    let mut buf = [0u8; 8];
    for b in &header.blocks {
        if b.site >= header.sites || b.state >= header.space.dim() {
            return Err(Error::Format(format!("block {b:?} outside the chain")));
        }
        let qr = b.left_charge + header.space.charge(b.state);
        if header.bonds[b.site].dim_of(b.left_charge) != b.rows || header.bonds[b.site + 1].dim_of(qr) != b.cols {
            return Err(Error::Format(format!("block {b:?} disagrees with the bond sectors")));
        }
        let mut vals = Vec::with_capacity(b.rows * b.cols);
        for _ in 0..b.rows * b.cols {
            input.read_exact(&mut buf)?;
            vals.push(f64::from_le_bytes(buf));
        }
        tensors[b.site].insert((b.state, b.left_charge), DMatrix::from_vec(b.rows, b.cols, vals));
    }
    let state = MpsState {
        space: header.space.clone(),
        particles: header.particles,
        bonds: header.bonds.clone(),
        tensors,
        center: header.center,
    };
    Ok((header, state))
}

pub fn save_checkpoint(path: &Path, state: &MpsState, params: &ModelParams) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(&mut f, state, params)?;
    f.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path, params: Option<&ModelParams>) -> Result<MpsState> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(read_checkpoint(&mut f, params)?.1)
}
