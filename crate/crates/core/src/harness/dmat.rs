//! DMAT: a minimal little-endian container for named f64 matrices.
//!
//! ```text
//! "DMAT"            4 bytes
//! version   u16     = 1
//! sections  u16
//! per section:
//!   name_len u16, name (UTF-8), rows u64, cols u64,
//!   rows * cols f64 in row-major order
//! ```

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DMAT";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub data: Array2<f64>,
}

impl Section {
    pub fn new(name: impl Into<String>, data: Array2<f64>) -> Self {
        Section { name: name.into(), data }
    }
}

pub fn encode_dmat(sections: &[Section]) -> Result<Vec<u8>> {
    let count = u16::try_from(sections.len()).map_err(|_| Error::invalid("too many DMAT sections"))?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    for s in sections {
        let name = s.name.as_bytes();
        let len = u16::try_from(name.len()).map_err(|_| Error::invalid("DMAT section name too long"))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(name);
        out.extend_from_slice(&(s.data.nrows() as u64).to_le_bytes());
        out.extend_from_slice(&(s.data.ncols() as u64).to_le_bytes());
        for v in s.data.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.pos as u64,
                msg: format!("truncated while reading {what}"),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_dmat(bytes: &[u8]) -> Result<Vec<Section>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: "bad magic, expected \"DMAT\"".into(),
        });
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            msg: format!("unsupported version {version}"),
        });
    }
    let count = r.u16("section count")?;
    let mut sections = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let name_at = r.pos;
        let len = r.u16("section name length")? as usize;
        let name = std::str::from_utf8(r.take(len, "section name")?)
            .map_err(|_| Error::Format {
                offset: name_at as u64 + 2,
                msg: "section name is not UTF-8".into(),
            })?
            .to_string();
        let rows = r.u64("row count")?;
        let cols = r.u64("column count")?;
        let n = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .filter(|&n| n <= (bytes.len() - r.pos) as u64)
            .ok_or_else(|| Error::Format {
                offset: r.pos as u64,
                msg: format!("truncated data for section {name:?} ({rows} x {cols})"),
            })?;
        let raw = r.take(n as usize, "matrix data")?;
        let values: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let data = Array2::from_shape_vec((rows as usize, cols as usize), values).expect("size checked");
        sections.push(Section { name, data });
    }
    if r.pos != bytes.len() {
        return Err(Error::Format {
            offset: r.pos as u64,
            msg: "trailing bytes after last section".into(),
        });
    }
    Ok(sections)
}

pub fn save_dmat(path: impl AsRef<Path>, sections: &[Section]) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_dmat(sections)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_dmat(path: impl AsRef<Path>) -> Result<Vec<Section>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dmat(&bytes)
}

/// Looks up a section by name.
pub fn find_section<'a>(sections: &'a [Section], name: &str) -> Result<&'a Array2<f64>> {
    sections
        .iter()
        .find(|s| s.name == name)
        .map(|s| &s.data)
        .ok_or_else(|| Error::invalid(format!("DMAT file has no section named {name:?}")))
}
