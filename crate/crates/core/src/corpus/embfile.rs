//! The `DVE1` embedding file format.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! magic   4 bytes  "DVE1"
//! version u32      1
//! dtype   u32      0 = 32-bit float, little-endian
//! dim     u32
//! rows    u64
//! payload rows * dim * 4 bytes of f32
//! ```
//!
//! A companion ids file at `<path>.ids` holds one id per line, row-aligned
//! with the payload. Round-trips are exact at the bit level.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::types::EmbeddingMatrix;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"DVE1";
const VERSION: u32 = 1;
const DTYPE_F32_LE: u32 = 0;

/// Path of the companion ids file for an embedding file.
pub fn ids_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".ids");
    PathBuf::from(s)
}

/// Writes a matrix to `path` plus the row-aligned ids file at `<path>.ids`.
pub fn write_embeddings(path: &Path, matrix: &EmbeddingMatrix) -> Result<()> {
    let mut buf = Vec::with_capacity(24 + matrix.data().len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&DTYPE_F32_LE.to_le_bytes());
    let dim = u32::try_from(matrix.dim())
        .map_err(|_| Error::InvalidMatrix(format!("dim {} exceeds u32", matrix.dim())))?;
    buf.extend_from_slice(&dim.to_le_bytes());
    buf.extend_from_slice(&(matrix.rows() as u64).to_le_bytes());
    for v in matrix.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, &buf).map_err(|e| Error::io(path, e))?;

    let mut ids = String::new();
    for id in matrix.ids() {
        if id.contains('\n') || id.contains('\r') {
            return Err(Error::InvalidMatrix(format!(
                "id {id:?} contains a line break"
            )));
        }
        ids.push_str(id);
        ids.push('\n');
    }
    let idsp = ids_path(path);
    fs::write(&idsp, ids.as_bytes()).map_err(|e| Error::io(&idsp, e))?;
    Ok(())
}

/// Reads a matrix and its companion ids file.
pub fn read_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = [0u8; 24];
    file.read_exact(&mut header)
        .map_err(|_| Error::bad_format(path, "file shorter than the 24-byte header"))?;
    if &header[0..4] != MAGIC {
        return Err(Error::bad_format(
            path,
            format!("bad magic {:?}, expected \"DVE1\"", &header[0..4]),
        ));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::bad_format(
            path,
            format!("unsupported version {version}, expected {VERSION}"),
        ));
    }
    let dtype = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if dtype != DTYPE_F32_LE {
        return Err(Error::bad_format(
            path,
            format!("unsupported dtype {dtype}, expected {DTYPE_F32_LE} (f32 LE)"),
        ));
    }
    let dim = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let rows = u64::from_le_bytes(header[16..24].try_into().unwrap());
    let rows = usize::try_from(rows)
        .map_err(|_| Error::bad_format(path, format!("row count {rows} exceeds usize")))?;

    let mut payload = Vec::new();
    file.read_to_end(&mut payload)
        .map_err(|e| Error::io(path, e))?;
    let expected = rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::bad_format(path, "rows * dim overflows"))?;
    if payload.len() != expected {
        return Err(Error::bad_format(
            path,
            format!(
                "payload length mismatch: header says {rows} rows x dim {dim} = {expected} bytes, found {}",
                payload.len()
            ),
        ));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();

    let idsp = ids_path(path);
    let ids_text = fs::read_to_string(&idsp).map_err(|e| Error::io(&idsp, e))?;
    let ids: Vec<String> = ids_text.lines().map(str::to_string).collect();
    if ids.len() != rows {
        return Err(Error::bad_format(
            &idsp,
            format!("{} ids for {rows} rows", ids.len()),
        ));
    }

    EmbeddingMatrix::new(dim, ids, data)
}

/// Convenience for matrices whose ids are just row numbers ("0", "1", ...).
pub fn row_number_ids(rows: usize) -> Vec<String> {
    (0..rows).map(|r| r.to_string()).collect()
}
