//! File formats: the SRT1 binary tensor container and binary PGM frame
//! export.
//!
//! SRT1 layout, all little-endian: magic bytes `SRT1`, three `u32` dims
//! `(I1, I2, I3)`, then `I1 * I2 * I3` `f64` payload values in the crate's
//! first-index-fastest order. Observation and foreground masks are stored in
//! the same container with 0/1 values. Round trips are bit-exact.

use crate::data::ObservationMask;
use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SRT1";
const HEADER_LEN: usize = 16;

/// Writes a tensor to an SRT1 file.
pub fn write_tensor(path: &Path, tensor: &Tensor3) -> Result<()> {
    let (i1, i2, i3) = tensor.dims();
    for (name, d) in [("I1", i1), ("I2", i2), ("I3", i3)] {
        if d > u32::MAX as usize {
            return Err(Error::Format(format!("dim {name} = {d} exceeds the u32 container limit")));
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + tensor.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(i1 as u32).to_le_bytes());
    out.extend_from_slice(&(i2 as u32).to_le_bytes());
    out.extend_from_slice(&(i3 as u32).to_le_bytes());
    for v in tensor.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Reads an SRT1 file, validating magic, dims, payload length, and
/// finiteness.
pub fn read_tensor(path: &Path) -> Result<Tensor3> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{}: file shorter than the 16-byte header",
            path.display()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format(format!("{}: bad magic bytes", path.display())));
    }
    let dim_at = |offset: usize| -> usize {
        u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes")) as usize
    };
    let dims = (dim_at(4), dim_at(8), dim_at(12));
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return Err(Error::Format(format!("{}: zero dimension {dims:?}", path.display())));
    }
    let count = dims
        .0
        .checked_mul(dims.1)
        .and_then(|p| p.checked_mul(dims.2))
        .and_then(|p| p.checked_mul(8))
        .ok_or_else(|| Error::Format(format!("{}: dims {dims:?} overflow", path.display())))?;
    if bytes.len() != HEADER_LEN + count {
        return Err(Error::Format(format!(
            "{}: payload is {} bytes, expected {} for dims {dims:?}",
            path.display(),
            bytes.len() - HEADER_LEN,
            count
        )));
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{}: payload value {bad}", path.display())));
    }
    Tensor3::new(dims, data)
}

/// Writes an observation mask as a 0/1 SRT1 tensor.
pub fn write_mask(path: &Path, mask: &ObservationMask) -> Result<()> {
    write_tensor(path, &mask.to_tensor())
}

/// Reads an observation mask from a 0/1 SRT1 tensor.
pub fn read_mask(path: &Path) -> Result<ObservationMask> {
    ObservationMask::from_tensor(&read_tensor(path)?)
}

/// Exports each frame as a binary PGM (`P5`, maxval 255) named
/// `frame_%04d.pgm`; values are rounded and clamped to [0, 255]. Returns the
/// number of files written.
pub fn export_frames(x: &Tensor3, dir: &Path) -> Result<usize> {
    fs::create_dir_all(dir)?;
    let (rows, cols, frames) = x.dims();
    for t in 0..frames {
        let mut out = Vec::with_capacity(rows * cols + 32);
        out.extend_from_slice(format!("P5\n{cols} {rows}\n255\n").as_bytes());
        for r in 0..rows {
            for c in 0..cols {
                out.push(x.get(r, c, t).round().clamp(0.0, 255.0) as u8);
            }
        }
        let mut file = fs::File::create(dir.join(format!("frame_{t:04}.pgm")))?;
        file.write_all(&out)?;
    }
    Ok(frames)
}
