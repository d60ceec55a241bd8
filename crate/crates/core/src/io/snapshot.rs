//! Binary snapshot format.
//!
//! Little-endian layout: magic `SQGLC001`, `u32` version, `u32 n`, `f64 a`,
//! `f64 alpha`, `f64 t`, `u64 step`, `u32` field count, then per field a
//! 16-byte NUL-padded name, `u32` component count and `components · n²`
//! physical-space `f64` values (component-major, `x₁` fastest).  A `u32`
//! length and UTF-8 provenance text follow, and the file ends with the
//! SHA-256 digest of everything before it.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::IoError;
use crate::dynamics::{ModelParams, SimState};
use crate::fields::DirectorField;
use crate::scalar::{cast, to_f64, Real};
use crate::spectral::{SpectralField, SpectralGrid};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SQGLC001";
pub const SNAPSHOT_VERSION: u32 = 1;
const NAME_LEN: usize = 16;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotField {
    pub name: String,
    pub components: u32,
    pub values: Vec<f64>,
}

/// In-memory snapshot; `values` are exactly the stored `f64`s.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: u32,
    pub a: f64,
    pub alpha: f64,
    pub t: f64,
    pub step: u64,
    pub fields: Vec<SnapshotField>,
    pub provenance: String,
}

impl Snapshot {
    /// Physical samples of `θ` and `d`.
    pub fn from_state<T: Real>(state: &SimState<T>, params: &ModelParams<T>, provenance: &str) -> Self {
        let flatten = |f: &SpectralField<T>| -> Vec<f64> {
            f.to_physical().into_iter().flatten().map(to_f64).collect()
        };
        Self {
            n: state.grid().n() as u32,
            a: to_f64(params.a),
            alpha: to_f64(params.alpha),
            t: to_f64(state.t),
            step: state.step,
            fields: vec![
                SnapshotField {
                    name: "theta".into(),
                    components: 1,
                    values: flatten(&state.theta),
                },
                SnapshotField {
                    name: "d".into(),
                    components: 3,
                    values: flatten(state.d.field()),
                },
            ],
            provenance: provenance.to_string(),
        }
    }

    pub fn field(&self, name: &str) -> Option<&SnapshotField> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Rebuilds the state on `grid`; the grid size must match exactly.
    pub fn to_state<T: Real>(&self, grid: &SpectralGrid<T>) -> Result<SimState<T>, IoError> {
        let n = self.n as usize;
        if grid.n() != n {
            return Err(IoError::SizeMismatch {
                expected: grid.n(),
                found: n,
            });
        }
        let load = |name: &str, comps: u32| -> Result<SpectralField<T>, IoError> {
            let f = self
                .field(name)
                .ok_or_else(|| IoError::Format(format!("missing field `{name}`")))?;
            if f.components != comps {
                return Err(IoError::Format(format!(
                    "field `{name}` has {} components, expected {comps}",
                    f.components
                )));
            }
            let comps: Vec<Vec<T>> = f.values.chunks(n * n).map(|c| c.iter().map(|&v| cast(v)).collect()).collect();
            Ok(SpectralField::from_physical(grid, &comps))
        };
        let theta = load("theta", 1)?;
        let d = DirectorField::from_field(load("d", 3)?).map_err(|e| IoError::Format(e.to_string()))?;
        let mut state = SimState::new(theta, d);
        state.t = cast(self.t);
        state.step = self.step;
        Ok(state)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        for v in [self.a, self.alpha, self.t] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.step.to_le_bytes());
        out.extend_from_slice(&(self.fields.len() as u32).to_le_bytes());
        for f in &self.fields {
            let mut name = [0u8; NAME_LEN];
            let bytes = f.name.as_bytes();
            let len = bytes.len().min(NAME_LEN);
            name[..len].copy_from_slice(&bytes[..len]);
            out.extend_from_slice(&name);
            out.extend_from_slice(&f.components.to_le_bytes());
            for v in &f.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.provenance.len() as u32).to_le_bytes());
        out.extend_from_slice(self.provenance.as_bytes());
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IoError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != SNAPSHOT_MAGIC {
            return Err(IoError::BadMagic);
        }
        let version = r.u32()?;
        if version != SNAPSHOT_VERSION {
            return Err(IoError::VersionMismatch {
                found: version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let n = r.u32()?;
        let a = r.f64()?;
        let alpha = r.f64()?;
        let t = r.f64()?;
        let step = r.u64()?;
        let count = r.u32()?;
        let plane = (n as usize)
            .checked_mul(n as usize)
            .ok_or_else(|| IoError::Format(format!("grid size {n} overflows")))?;
        let mut fields = Vec::new();
        for _ in 0..count {
            let raw = r.take(NAME_LEN)?;
            let end = raw.iter().position(|&b| b == 0).unwrap_or(NAME_LEN);
            let name = std::str::from_utf8(&raw[..end])
                .map_err(|_| IoError::Format("field name is not UTF-8".into()))?
                .to_string();
            let components = r.u32()?;
            let len = plane
                .checked_mul(components as usize)
                .ok_or_else(|| IoError::Format("field size overflows".into()))?;
            r.need(len.saturating_mul(8))?;
            let values = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
            fields.push(SnapshotField { name, components, values });
        }
        let plen = r.u32()? as usize;
        let provenance = std::str::from_utf8(r.take(plen)?)
            .map_err(|_| IoError::Format("provenance is not UTF-8".into()))?
            .to_string();
        let body = r.pos;
        let digest = r.take(DIGEST_LEN)?;
        if r.pos != bytes.len() {
            return Err(IoError::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        if Sha256::digest(&bytes[..body]).as_slice() != digest {
            return Err(IoError::ChecksumMismatch);
        }
        Ok(Self {
            n,
            a,
            alpha,
            t,
            step,
            fields,
            provenance,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn need(&self, k: usize) -> Result<(), IoError> {
        if self.bytes.len() - self.pos < k {
            return Err(IoError::TruncatedPayload {
                needed: self.pos.saturating_add(k),
                available: self.bytes.len(),
            });
        }
        Ok(())
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8], IoError> {
        self.need(k)?;
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, IoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IoError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, IoError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn write_snapshot<T: Real>(
    state: &SimState<T>,
    params: &ModelParams<T>,
    path: &Path,
    provenance: &str,
) -> Result<Snapshot, IoError> {
    let snap = Snapshot::from_state(state, params, provenance);
    std::fs::write(path, snap.to_bytes()).map_err(|e| IoError::io(path, e))?;
    Ok(snap)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    Snapshot::from_bytes(&bytes)
}

/// Reads a snapshot and rebuilds the state on `grid`.
pub fn load_state<T: Real>(path: &Path, grid: &SpectralGrid<T>) -> Result<SimState<T>, IoError> {
    read_snapshot(path)?.to_state(grid)
}
