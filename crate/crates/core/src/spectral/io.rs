//! Field dumps.
//!
//! JSON: `{"M": 16, "real": true, "records": [[n1, n2, re, im], ...]}` with one
//! record per non-zero coefficient.
//!
//! Binary (all little-endian): magic `b"SKSF"`, `u32` version (1), `u32` M,
//! `u8` real flag, `u64` record count, then per record `i32 n1, i32 n2,
//! f64 re, f64 im`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::lattice::FrequencyLattice;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SKSF";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    #[serde(rename = "M")]
    m: usize,
    real: bool,
    records: Vec<(i64, i64, f64, f64)>,
}

fn records(field: &SpectralField) -> Vec<(i64, i64, f64, f64)> {
    let lat = field.lattice();
    field
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Complex64::default())
        .map(|(i, c)| {
            let (n1, n2) = lat.mode(i);
            (n1, n2, c.re, c.im)
        })
        .collect()
}

fn rebuild(m: usize, real: bool, recs: &[(i64, i64, f64, f64)]) -> Result<SpectralField> {
    let lattice = FrequencyLattice::new(m)?;
    let mut coeffs = vec![Complex64::default(); lattice.len()];
    for &(n1, n2, re, im) in recs {
        let i = lattice
            .index(n1, n2)
            .ok_or(Error::ModeOutsideLattice(n1, n2))?;
        coeffs[i] = Complex64::new(re, im);
    }
    // Coefficients are restored verbatim; symmetry was enforced on write.
    let mut f = SpectralField::zeros(lattice, real);
    f.coeffs_mut().copy_from_slice(&coeffs);
    Ok(f)
}

pub fn to_json(field: &SpectralField) -> Result<String> {
    let doc = FieldDoc {
        m: field.lattice().size(),
        real: field.is_real(),
        records: records(field),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn from_json(text: &str) -> Result<SpectralField> {
    let doc: FieldDoc = serde_json::from_str(text)?;
    rebuild(doc.m, doc.real, &doc.records)
}

pub fn write_binary<W: Write>(field: &SpectralField, mut w: W) -> Result<()> {
    let recs = records(field);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.lattice().size() as u32).to_le_bytes())?;
    w.write_all(&[field.is_real() as u8])?;
    w.write_all(&(recs.len() as u64).to_le_bytes())?;
    for (n1, n2, re, im) in recs {
        w.write_all(&(n1 as i32).to_le_bytes())?;
        w.write_all(&(n2 as i32).to_le_bytes())?;
        w.write_all(&re.to_le_bytes())?;
        w.write_all(&im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidArgument("not a field dump".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported dump version {version}"
        )));
    }
    let m = read_u32(&mut r)? as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let mut recs = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let n1 = read_u32(&mut r)? as i32 as i64;
        let n2 = read_u32(&mut r)? as i32 as i64;
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        recs.push((n1, n2, re, im));
    }
    rebuild(m, flag[0] != 0, &recs)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
