use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gas::GasModel;

use super::state::{FieldState, Grid1D};

pub const MAGIC: &[u8; 4] = b"VDL1";
pub const FORMAT_VERSION: u8 = 1;

/// Rows `t,x,rho,m`, one per cell.
pub fn write_csv<W: Write>(state: &FieldState, mut out: W) -> Result<()> {
    writeln!(out, "t,x,rho,m")?;
    for i in 0..state.grid.n_cells() {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e}",
            state.t,
            state.grid.center(i),
            state.rho[i],
            state.m[i]
        )?;
    }
    Ok(())
}

/// Columnar dump: magic, version byte, then little-endian `u64` cell count and
/// `f64` values `x_min, x_max, t, clip_mass, rho[..], m[..]`.
pub fn write_binary<W: Write>(state: &FieldState, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&[FORMAT_VERSION])?;
    out.write_all(&(state.grid.n_cells() as u64).to_le_bytes())?;
    for v in [
        state.grid.x_min(),
        state.grid.x_max(),
        state.t,
        state.clip_mass,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in state.rho.iter().chain(&state.m) {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut input: R) -> Result<FieldState> {
    let mut head = [0u8; 5];
    input.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    if head[4] != FORMAT_VERSION {
        return Err(Error::Snapshot(format!("unknown version {}", head[4])));
    }
    let mut nb = [0u8; 8];
    input.read_exact(&mut nb)?;
    let n = usize::try_from(u64::from_le_bytes(nb))
        .map_err(|_| Error::Snapshot("cell count overflows".into()))?;
    let (x_min, x_max, t, clip) = (
        read_f64(&mut input)?,
        read_f64(&mut input)?,
        read_f64(&mut input)?,
        read_f64(&mut input)?,
    );
    let grid = Grid1D::new(x_min, x_max, n)?;
    let mut col = || -> Result<Vec<f64>> { (0..n).map(|_| read_f64(&mut input)).collect() };
    let rho = col()?;
    let m = col()?;
    let mut state = FieldState::new(grid, rho, m, t)?;
    state.clip_mass = clip;
    Ok(state)
}

/// `sha256("blob <len>\0" + bytes)` in hex, as git hashes objects.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Description of a run written next to its snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub gamma: f64,
    pub grid: Grid1D,
    pub config: serde_json::Value,
    /// [`content_hash`] of the compact JSON of `config`.
    pub config_hash: String,
    pub steps: Option<u64>,
    pub clip_mass: Option<f64>,
    pub version: String,
}

impl RunMetadata {
    pub fn new<C: Serialize>(gas: &GasModel, grid: Grid1D, config: &C) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let config_hash = content_hash(serde_json::to_string(&config)?.as_bytes());
        Ok(Self {
            gamma: gas.gamma(),
            grid,
            config,
            config_hash,
            steps: None,
            clip_mass: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
