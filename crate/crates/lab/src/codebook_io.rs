//! Binary codebook dump for cross-implementation regression.
//!
//! Layout, all little-endian: the magic bytes `MNAC`, a `u32` version, then
//! `u64` fields `n`, `n0`, `ell`, `M`, `seed`. Each user follows in order as
//! its `n0` signature entries and then its `M` bodies of `n − n0` entries,
//! every entry an `f64`.

use std::io::{Read, Write};

use mnac_core::channel::Codebook;

use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 4] = b"MNAC";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub n: u64,
    pub n0: u64,
    pub ell: u64,
    pub m: u64,
    pub seed: u64,
}

pub fn write_codebooks<W: Write>(mut w: W, seed: u64, books: &[Codebook]) -> std::io::Result<()> {
    let first = books.first();
    let header = Header {
        n: first.map_or(0, |b| b.n() as u64),
        n0: first.map_or(0, |b| b.n0() as u64),
        ell: books.len() as u64,
        m: first.map_or(0, |b| b.m() as u64),
        seed,
    };
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for field in [header.n, header.n0, header.ell, header.m, header.seed] {
        w.write_all(&field.to_le_bytes())?;
    }
    for book in books {
        for x in book.signature() {
            w.write_all(&x.to_le_bytes())?;
        }
        for msg in 1..=book.m() {
            for x in book.body(msg) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.flush()
}

fn read_exact<R: Read, const N: usize>(r: &mut R, what: &str) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| LabError::Format(format!("reading {what}: {e}")))?;
    Ok(buf)
}

fn read_floats<R: Read>(r: &mut R, len: usize, what: &str) -> Result<Vec<f64>> {
    (0..len).map(|_| read_exact::<R, 8>(r, what).map(f64::from_le_bytes)).collect()
}

pub fn read_codebooks<R: Read>(mut r: R) -> Result<(Header, Vec<Codebook>)> {
    if &read_exact::<R, 4>(&mut r, "magic")? != MAGIC {
        return Err(LabError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_exact(&mut r, "version")?);
    if version != VERSION {
        return Err(LabError::Format(format!("unsupported version {version}")));
    }
    let mut fields = [0u64; 5];
    for f in &mut fields {
        *f = u64::from_le_bytes(read_exact(&mut r, "header")?);
    }
    let [n, n0, ell, m, seed] = fields;
    let header = Header { n, n0, ell, m, seed };
    if n0 > n || (ell > 0 && m == 0) {
        return Err(LabError::Format(format!("inconsistent header {header:?}")));
    }
    let body_len = (n - n0) as usize;
    let mut books = Vec::new();
    for user in 0..ell as usize {
        let signature = read_floats(&mut r, n0 as usize, "signature")?;
        let bodies = read_floats(&mut r, body_len * m as usize, "bodies")?;
        books.push(Codebook::from_parts(user, signature, bodies, m as usize)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| LabError::Format(e.to_string()))? != 0 {
        return Err(LabError::Format("trailing bytes".into()));
    }
    Ok((header, books))
}
