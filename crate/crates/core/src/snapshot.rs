//! Binary field snapshots.
//!
//! Layout, all fields little-endian, no padding:
//!
//! | offset | size | content                                         |
//! |--------|------|-------------------------------------------------|
//! | 0      | 8    | `n`, u64                                        |
//! | 8      | 8    | `L` (half-width), f64                           |
//! | 16     | 8    | `t`, f64                                        |
//! | 24     | 8    | kind code, u64 (see [`SnapshotKind`])           |
//! | 32     | 8·c·n² | `c` component planes of `n²` f64, row-major, x fastest |
//!
//! `c` is 1 for scalar kinds and 2 for [`SnapshotKind::Velocity`] (x-plane
//! first).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    /// Perturbation vorticity `ζ`.
    PerturbationVorticity = 0,
    /// Total vorticity `ω = α ω^χ + ζ`.
    TotalVorticity = 1,
    /// Perturbation velocity `v` (two planes).
    Velocity = 2,
}

impl SnapshotKind {
    pub fn code(self) -> u64 {
        self as u64
    }

    pub fn from_code(code: u64) -> Result<Self> {
        match code {
            0 => Ok(Self::PerturbationVorticity),
            1 => Ok(Self::TotalVorticity),
            2 => Ok(Self::Velocity),
            other => Err(Error::Snapshot(format!("unknown kind code {other}"))),
        }
    }

    pub fn components(self) -> usize {
        if self == Self::Velocity {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub t: f64,
    pub kind: SnapshotKind,
    /// One plane per component.
    pub planes: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn scalar(kind: SnapshotKind, t: f64, field: &ScalarField) -> Self {
        assert_ne!(kind, SnapshotKind::Velocity);
        Self {
            grid: *field.grid(),
            t,
            kind,
            planes: vec![field.values().to_vec()],
        }
    }

    pub fn velocity(t: f64, field: &VectorField) -> Self {
        Self {
            grid: *field.grid(),
            t,
            kind: SnapshotKind::Velocity,
            planes: vec![field.x().to_vec(), field.y().to_vec()],
        }
    }

    pub fn to_scalar(&self) -> Result<ScalarField> {
        if self.kind == SnapshotKind::Velocity {
            return Err(Error::Snapshot("velocity snapshot is not a scalar field".into()));
        }
        ScalarField::from_values(self.grid, self.planes[0].clone())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        w.write_all(&self.kind.code().to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.grid.len());
        for plane in &self.planes {
            buf.clear();
            for v in plane {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> Result<[u8; 8]> {
            r.read_exact(&mut word)
                .map_err(|e| Error::Snapshot(format!("truncated header: {e}")))?;
            Ok(word)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let half_width = f64::from_le_bytes(next(&mut r)?);
        let t = f64::from_le_bytes(next(&mut r)?);
        let kind = SnapshotKind::from_code(u64::from_le_bytes(next(&mut r)?))?;
        let grid = Grid::new(n, half_width)?;
        let mut raw = vec![0u8; 8 * grid.len()];
        let mut planes = Vec::with_capacity(kind.components());
        for _ in 0..kind.components() {
            r.read_exact(&mut raw)
                .map_err(|e| Error::Snapshot(format!("truncated payload: {e}")))?;
            planes.push(
                raw.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                    .collect(),
            );
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Snapshot("trailing bytes after payload".into()));
        }
        Ok(Self {
            grid,
            t,
            kind,
            planes,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(16, 2.5).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0]);
        let mut bytes = Vec::new();
        Snapshot::scalar(SnapshotKind::TotalVorticity, 1.5, &f)
            .write_to(&mut bytes)
            .unwrap();
        assert_eq!(bytes.len(), 32 + 8 * 256);
        assert_eq!(&bytes[0..8], &16u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &2.5f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &1.5f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &1u64.to_le_bytes());
        assert_eq!(&bytes[32..40], &(-2.5f64).to_le_bytes());
    }

    #[test]
    fn rejects_truncated_and_trailing() {
        let g = Grid::new(16, 1.0).unwrap();
        let mut bytes = Vec::new();
        Snapshot::velocity(0.0, &VectorField::zeros(g))
            .write_to(&mut bytes)
            .unwrap();
        assert!(Snapshot::read_from(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(Snapshot::read_from(&bytes[..]).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(seed in any::<u64>(), t in 0.0f64..1e3, log_l in -2.0f64..3.0) {
            let g = Grid::new(16, 10f64.powf(log_l)).unwrap();
            let f = ScalarField::from_fn(g, |x| ((x[0] * 7.1 + x[1]) * (seed as f64 + 1.0)).sin());
            let snap = Snapshot::scalar(SnapshotKind::PerturbationVorticity, t, &f);
            let mut bytes = Vec::new();
            snap.write_to(&mut bytes).unwrap();
            prop_assert_eq!(Snapshot::read_from(&bytes[..]).unwrap(), snap);
        }
    }
}
