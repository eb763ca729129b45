//! The `.flow` file format: magic `FLOW`, version (u32 LE), height and
//! width (u32 LE each, both 64), then the horizontal grid followed by the
//! vertical grid as little-endian f32.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{GRID, GRID_LEN};

pub const MAGIC: &[u8; 4] = b"FLOW";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_flow_file(path: &Path, horizontal: &[f64], vertical: &[f64]) -> Result<()> {
    if horizontal.len() != GRID_LEN || vertical.len() != GRID_LEN {
        return Err(Error::Validation(format!(
            "flow grids must have {GRID_LEN} elements"
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(GRID as u32).to_le_bytes())?;
    w.write_all(&(GRID as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(2 * GRID_LEN * 4);
    for v in horizontal.iter().chain(vertical) {
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_flow_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = BufReader::new(
        File::open(path).map_err(|e| Error::ingest(path, format!("cannot open: {e}")))?,
    );
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| Error::ingest(path, format!("truncated header: {e}")))?;
    if &magic != MAGIC {
        return Err(Error::ingest(path, format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r, path)?;
    if version != FORMAT_VERSION {
        return Err(Error::ingest(path, format!("unsupported version {version}")));
    }
    let h = read_u32(&mut r, path)?;
    let w = read_u32(&mut r, path)?;
    if h as usize != GRID || w as usize != GRID {
        return Err(Error::ingest(
            path,
            format!("grid is {h}x{w}, expected {GRID}x{GRID}"),
        ));
    }
    let mut buf = vec![0u8; 2 * GRID_LEN * 4];
    r.read_exact(&mut buf)
        .map_err(|e| Error::ingest(path, format!("truncated payload: {e}")))?;
    let mut values = buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    let horizontal: Vec<f64> = values.by_ref().take(GRID_LEN).collect();
    let vertical: Vec<f64> = values.collect();
    Ok((horizontal, vertical))
}

fn read_u32<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|e| Error::ingest(path, format!("truncated header: {e}")))?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("0.flow");
        let h: Vec<f64> = (0..GRID_LEN).map(|i| (i as f64 * 0.013).sin()).collect();
        let v: Vec<f64> = (0..GRID_LEN).map(|i| (i as f64 * 0.007).cos()).collect();
        write_flow_file(&path, &h, &v).unwrap();
        let (h2, v2) = read_flow_file(&path).unwrap();
        for (a, b) in h.iter().zip(&h2) {
            assert_eq!((*a as f32).to_bits(), (*b as f32).to_bits());
        }
        for (a, b) in v.iter().zip(&v2) {
            assert_eq!((*a as f32).to_bits(), (*b as f32).to_bits());
        }
    }

    #[test]
    fn wrong_grid_size_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.flow");
        // Hand-build a 32x32 header.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        bytes.extend_from_slice(&32u32.to_le_bytes());
        bytes.extend_from_slice(&32u32.to_le_bytes());
        bytes.extend_from_slice(&vec![0u8; 2 * 32 * 32 * 4]);
        std::fs::write(&path, bytes).unwrap();
        let err = read_flow_file(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.flow"), "{msg}");
        assert!(msg.contains("32x32"), "{msg}");
    }

    #[test]
    fn truncated_file_is_an_ingest_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.flow");
        let h = vec![0.0; GRID_LEN];
        write_flow_file(&path, &h, &h).unwrap();
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() / 2]).unwrap();
        assert!(read_flow_file(&path).is_err());
    }
}
