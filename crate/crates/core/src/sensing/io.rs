//! Binary export/import of a sensing matrix for cross-implementation golden
//! tests.
//!
//! Container layout: magic bytes `DDSM`, little-endian u32 dims `M` and `LB`,
//! then the entries row-major as interleaved little-endian f64 re/im pairs.
//! A JSON sidecar carries the grid and pilot configs plus an FNV-1a checksum
//! of the container bytes.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DdError, Result};
use crate::grid::GridConfig;
use crate::numerics::CMat;
use crate::sensing::{from_parts, PilotConfig, SensingMatrix};

const MAGIC: &[u8; 4] = b"DDSM";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    grid: GridConfig,
    pilot: PilotConfig,
    /// FNV-1a over the full binary container.
    checksum_fnv1a: u64,
}

pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Serializes the container bytes (without writing them anywhere).
pub fn encode_matrix(mp: &SensingMatrix) -> Vec<u8> {
    let m = mp.nrows();
    let lb = mp.ncols();
    let mut out = Vec::with_capacity(4 + 8 + m * lb * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(lb as u32).to_le_bytes());
    for i in 0..m {
        for j in 0..lb {
            let v = mp.matrix().get(i, j);
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

/// Writes the binary container and its JSON sidecar.
pub fn export_matrix(mp: &SensingMatrix, bin_path: &Path, sidecar_path: &Path) -> Result<()> {
    let bytes = encode_matrix(mp);
    let sidecar = Sidecar {
        grid: *mp.cfg(),
        pilot: mp.pilot().clone(),
        checksum_fnv1a: fnv1a_64(&bytes),
    };
    fs::write(bin_path, &bytes)?;
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| DdError::Format(format!("sidecar serialization: {e}")))?;
    fs::write(sidecar_path, json)?;
    Ok(())
}

/// Reads a container plus sidecar back into a sensing matrix, verifying the
/// checksum, magic, and dimension consistency.
pub fn import_matrix(bin_path: &Path, sidecar_path: &Path) -> Result<SensingMatrix> {
    let bytes = fs::read(bin_path)?;
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path)?)
        .map_err(|e| DdError::Format(format!("sidecar parse: {e}")))?;
    let actual = fnv1a_64(&bytes);
    if actual != sidecar.checksum_fnv1a {
        return Err(DdError::Format(format!(
            "checksum mismatch: container {actual:#018x}, sidecar {:#018x}",
            sidecar.checksum_fnv1a
        )));
    }
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(DdError::Format("bad magic bytes".into()));
    }
    let m = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let lb = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected_len = 12 + m * lb * 16;
    if bytes.len() != expected_len {
        return Err(DdError::Format(format!(
            "container is {} bytes, dims {m}×{lb} imply {expected_len}",
            bytes.len()
        )));
    }
    let mut entries = CMat::zeros(m, lb);
    let mut off = 12;
    for i in 0..m {
        for j in 0..lb {
            let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
            entries.set(i, j, Complex64::new(re, im));
            off += 16;
        }
    }
    sidecar.grid.validate()?;
    from_parts(sidecar.grid, sidecar.pilot, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::SensingMatrix;

    fn small_matrix() -> SensingMatrix {
        let cfg = GridConfig::afdm(256, 4, 2, 2, 1.0 / (20.0 * 256.0), 0.2, 0.2).unwrap();
        SensingMatrix::build(&cfg, 2).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let mp = small_matrix();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("m.ddsm");
        let side = dir.path().join("m.json");
        export_matrix(&mp, &bin, &side).unwrap();
        let back = import_matrix(&bin, &side).unwrap();
        assert_eq!(back.cfg(), mp.cfg());
        assert_eq!(back.pilot(), mp.pilot());
        assert_eq!(back.matrix(), mp.matrix());
        assert_eq!(back.nonzero_rows(3), mp.nonzero_rows(3));
    }

    #[test]
    fn corrupted_container_is_detected() {
        let mp = small_matrix();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("m.ddsm");
        let side = dir.path().join("m.json");
        export_matrix(&mp, &bin, &side).unwrap();
        let mut bytes = fs::read(&bin).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        fs::write(&bin, &bytes).unwrap();
        assert!(matches!(
            import_matrix(&bin, &side),
            Err(DdError::Format(msg)) if msg.contains("checksum")
        ));
    }

    #[test]
    fn truncated_container_is_detected() {
        let mp = small_matrix();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("m.ddsm");
        let side = dir.path().join("m.json");
        export_matrix(&mp, &bin, &side).unwrap();
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 16]).unwrap();
        assert!(import_matrix(&bin, &side).is_err());
    }
}
