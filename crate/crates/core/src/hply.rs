//! `HPLY` polynomial files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! b"HPLY" | version: u32 = 1 | n: u64 | q: u64 | n x coefficient: u64
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub const MAGIC: &[u8; 4] = b"HPLY";
pub const VERSION: u32 = 1;

pub fn write_polynomial<W: Write>(mut out: W, poly: &Polynomial) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(poly.len() as u64).to_le_bytes())?;
    out.write_all(&poly.q().to_le_bytes())?;
    let mut body = Vec::with_capacity(poly.len() * 8);
    for c in poly.coeffs() {
        body.extend_from_slice(&c.to_le_bytes());
    }
    out.write_all(&body)?;
    Ok(())
}

pub fn read_polynomial<R: Read>(mut input: R) -> Result<Polynomial> {
    let mut header = [0u8; 24];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let q = u64::from_le_bytes(header[16..24].try_into().unwrap());
    let n = usize::try_from(n)
        .ok()
        .filter(|&n| n <= 1 << 26)
        .ok_or_else(|| Error::Format(format!("implausible length {n}")))?;
    let mut body = vec![0u8; n * 8];
    input
        .read_exact(&mut body)
        .map_err(|_| Error::Format(format!("expected {n} coefficients")))?;
    let mut extra = [0u8; 1];
    if input.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after coefficients".into()));
    }
    let coeffs = body
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Polynomial::from_parts(q, coeffs)
}
