//! `SGF1` field snapshots.
//!
//! Layout, all little-endian: the magic `SGF1`; `u32` version, `M1`, `M2`,
//! `M3`, ncomp, ntimes; `f64` `L1`, `L2`, `L3`, rho, t_final; then
//! `ntimes * ncomp * M1 * M2 * M3` `f64` values ordered by time, component,
//! `x1`, `x2`, `x3` with `x3` fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use stokes_green_core::{GridField, SpaceTimeField, VectorField};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"SGF1";
pub const VERSION: u32 = 1;
const HEADER_BYTES: usize = 4 + 6 * 4 + 5 * 8;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSnapshot {
    pub dims: [u32; 3],
    pub ncomp: u32,
    pub ntimes: u32,
    pub lengths: [f64; 3],
    pub rho: f64,
    pub t_final: f64,
    pub data: Vec<f64>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Snapshot(msg.into())
}

impl FieldSnapshot {
    pub fn payload_len(dims: [u32; 3], ncomp: u32, ntimes: u32) -> Option<usize> {
        [dims[0], dims[1], dims[2], ncomp, ntimes]
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(*d as usize))
    }

    pub fn new(
        dims: [u32; 3],
        ncomp: u32,
        ntimes: u32,
        lengths: [f64; 3],
        rho: f64,
        t_final: f64,
        data: Vec<f64>,
    ) -> Result<Self> {
        let expected =
            Self::payload_len(dims, ncomp, ntimes).ok_or_else(|| bad("dimensions overflow"))?;
        if data.len() != expected {
            return Err(bad(format!(
                "payload has {} values, header implies {expected}",
                data.len()
            )));
        }
        Ok(Self {
            dims,
            ncomp,
            ntimes,
            lengths,
            rho,
            t_final,
            data,
        })
    }

    /// Scalar space-time field, one component.
    pub fn from_scalar(field: &SpaceTimeField<GridField>) -> Result<Self> {
        Self::from_components(field, |f| vec![f])
    }

    pub fn from_vector(field: &SpaceTimeField<VectorField>) -> Result<Self> {
        Self::from_components(field, |f| f.iter().collect())
    }

    fn from_components<F>(
        field: &SpaceTimeField<F>,
        parts: impl Fn(&F) -> Vec<&GridField>,
    ) -> Result<Self> {
        let first = field
            .slices()
            .first()
            .ok_or_else(|| bad("empty time grid"))?;
        let comps = parts(first);
        let grid = comps[0].grid();
        let d = grid.domain();
        let m = grid.m() as u32;
        let mut data = Vec::new();
        for s in field.slices() {
            for c in parts(s) {
                data.extend_from_slice(c.values());
            }
        }
        Self::new(
            [m; 3],
            comps.len() as u32,
            field.slices().len() as u32,
            d.lengths(),
            d.rho(),
            field.time().t_final(),
            data,
        )
    }

    /// Values at `(time, component)` in `x1, x2, x3` order.
    pub fn slice(&self, time: usize, component: usize) -> &[f64] {
        let block = self.dims.iter().map(|d| *d as usize).product::<usize>();
        let start = (time * self.ncomp as usize + component) * block;
        &self.data[start..start + block]
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [
            VERSION,
            self.dims[0],
            self.dims[1],
            self.dims[2],
            self.ncomp,
            self.ntimes,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in [
            self.lengths[0],
            self.lengths[1],
            self.lengths[2],
            self.rho,
            self.t_final,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + 8 * self.data.len());
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; HEADER_BYTES];
        r.read_exact(&mut header)
            .map_err(|_| bad("truncated header"))?;
        if &header[..4] != MAGIC {
            return Err(bad("bad magic, expected SGF1"));
        }
        let u = |i: usize| u32::from_le_bytes(header[4 + 4 * i..8 + 4 * i].try_into().unwrap());
        let f = |i: usize| f64::from_le_bytes(header[28 + 8 * i..36 + 8 * i].try_into().unwrap());
        if u(0) != VERSION {
            return Err(bad(format!("unsupported version {}", u(0))));
        }
        let dims = [u(1), u(2), u(3)];
        let (ncomp, ntimes) = (u(4), u(5));
        let len =
            Self::payload_len(dims, ncomp, ntimes).ok_or_else(|| bad("dimensions overflow"))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * len {
            return Err(bad(format!(
                "payload has {} bytes, header implies {}",
                bytes.len(),
                8 * len
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(dims, ncomp, ntimes, [f(0), f(1), f(2)], f(3), f(4), data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
