//! Binary field format.
//!
//! Every record is a 48-byte header followed by the coefficient data, all
//! little-endian:
//!
//! | offset | type      | content                                  |
//! |--------|-----------|------------------------------------------|
//! | 0      | `[u8; 8]` | magic `ESFIELD1`                         |
//! | 8      | `u32`     | endianness tag `0x0A0B0C0D`              |
//! | 12     | `u32`     | kind: 0 = real-valued data, 1 = complex  |
//! | 16     | `u32`     | dimension `d`                            |
//! | 20     | `u32`     | points per axis `N`                      |
//! | 24     | `u32`     | component count                          |
//! | 28     | `u32`     | reserved, 0                              |
//! | 32     | `f64`     | half length `L`                          |
//! | 40     | `f64`     | time                                     |
//!
//! Data: for each component, `N^d` Fourier coefficients in the grid's flat
//! (row-major) order, each as `re: f64, im: f64`. Several records may be
//! concatenated in one file.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"ESFIELD1";
pub const ENDIAN_TAG: u32 = 0x0A0B_0C0D;

pub fn write_field<W: Write>(out: &mut W, field: &SpectralField, time: f64) -> Result<()> {
    let g = field.grid();
    out.write_all(MAGIC)?;
    for v in [
        ENDIAN_TAG,
        u32::from(!field.is_real()),
        g.dim() as u32,
        g.points() as u32,
        field.components() as u32,
        0,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&g.half_length().to_le_bytes())?;
    out.write_all(&time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(g.len() * 16);
    for c in field.all_coeffs() {
        buf.clear();
        for z in c {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_field<R: Read>(input: &mut R) -> Result<(SpectralField, f64)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut words = [0u32; 6];
    for w in &mut words {
        *w = read_u32(input)?;
    }
    let [tag, kind, dim, points, comps, _] = words;
    if tag != ENDIAN_TAG {
        return Err(Error::Format(format!("unexpected endianness tag {tag:#x}")));
    }
    if kind > 1 {
        return Err(Error::Format(format!("unknown kind {kind}")));
    }
    let half_length = read_f64(input)?;
    let time = read_f64(input)?;
    let grid = Grid::new(dim as usize, points as usize, half_length)
        .map_err(|e| Error::Format(format!("invalid grid header: {e}")))?;
    let mut data = Vec::with_capacity(comps as usize);
    let mut raw = vec![0u8; grid.len() * 16];
    for _ in 0..comps {
        input.read_exact(&mut raw)?;
        let c: Vec<Complex64> = raw
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(
                    f64::from_le_bytes(b[..8].try_into().unwrap()),
                    f64::from_le_bytes(b[8..].try_into().unwrap()),
                )
            })
            .collect();
        data.push(c);
    }
    let field = SpectralField::from_coeffs(&grid, data, kind == 0)?;
    Ok((field, time))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
