//! Dense matrix (de)serialization.
//!
//! Two formats, both row-major and both bit-exact for finite doubles:
//!
//! - text: one CSV record per row, values printed with `{:e}` (shortest
//!   round-tripping exponent form);
//! - binary: the 8-byte magic [`BINARY_MAGIC`], then `rows` and `cols` as
//!   little-endian `u64`, then `rows * cols` little-endian `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const BINARY_MAGIC: [u8; 8] = *b"RGMAT\x00\x00\x01";

pub fn write_text<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.nrows() {
        out.write_record(m.row(i).iter().map(|v| format!("{v:e}")))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_text<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(Error::DimensionMismatch { expected: c, found: rec.len() })
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Parse(format!("bad number {field:?}")))?;
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn write_binary<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    w.write_all(&BINARY_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for v in m.row(i).iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<DMatrix<f64>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != BINARY_MAGIC {
        return Err(Error::Parse("not a binary matrix file".into()));
    }
    let rows = usize::try_from(read_u64(&mut r)?).map_err(|_| Error::Parse("row count too large".into()))?;
    let cols = usize::try_from(read_u64(&mut r)?).map_err(|_| Error::Parse("column count too large".into()))?;
    let len = rows.checked_mul(cols).ok_or_else(|| Error::Parse("matrix too large".into()))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    let mut buf = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn is_binary_path(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("bin" | "rgm"))
}

/// Loads a matrix, choosing the binary format for `.bin`/`.rgm` files and text otherwise.
pub fn load(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let f = BufReader::new(File::open(path)?);
    if is_binary_path(path) {
        read_binary(f)
    } else {
        read_text(f)
    }
}

pub fn save(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let f = BufWriter::new(File::create(path)?);
    if is_binary_path(path) {
        write_binary(f, m)
    } else {
        write_text(f, m)
    }
}
