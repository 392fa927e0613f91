//! `PGF1` binary field files.
//!
//! Layout (little-endian): magic `PGF1`, `u32` version, `u8` dtype,
//! `u32` dims\[3\], `f64` spacing\[3\], `f64` origin\[3\], then the payload
//! x-fastest. dtype 0 is `f64` scalar, 1 is `u8` mask, 2 is an `f64`
//! 3-vector and 3 is an `f64` row-major 4×4 matrix.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Field, Grid3, MaskField, MatField, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::linalg::Mat4;

const MAGIC: &[u8; 4] = b"PGF1";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Scalar(ScalarField),
    Mask(MaskField),
    Vector(VectorField),
    Mat(MatField),
}

impl AnyField {
    pub fn grid(&self) -> &Grid3 {
        match self {
            AnyField::Scalar(f) => &f.grid,
            AnyField::Mask(f) => &f.grid,
            AnyField::Vector(f) => &f.grid,
            AnyField::Mat(f) => &f.grid,
        }
    }

    fn dtype(&self) -> u8 {
        match self {
            AnyField::Scalar(_) => 0,
            AnyField::Mask(_) => 1,
            AnyField::Vector(_) => 2,
            AnyField::Mat(_) => 3,
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            AnyField::Scalar(f) => Ok(f),
            _ => Err(Error::MalformedField("expected a scalar field".into())),
        }
    }

    pub fn into_mask(self) -> Result<MaskField> {
        match self {
            AnyField::Mask(f) => Ok(f),
            _ => Err(Error::MalformedField("expected a mask field".into())),
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            AnyField::Vector(f) => Ok(f),
            _ => Err(Error::MalformedField("expected a vector field".into())),
        }
    }

    pub fn into_mat(self) -> Result<MatField> {
        match self {
            AnyField::Mat(f) => Ok(f),
            _ => Err(Error::MalformedField("expected a matrix field".into())),
        }
    }
}

impl From<ScalarField> for AnyField {
    fn from(f: ScalarField) -> Self {
        AnyField::Scalar(f)
    }
}

impl From<MaskField> for AnyField {
    fn from(f: MaskField) -> Self {
        AnyField::Mask(f)
    }
}

impl From<VectorField> for AnyField {
    fn from(f: VectorField) -> Self {
        AnyField::Vector(f)
    }
}

impl From<MatField> for AnyField {
    fn from(f: MatField) -> Self {
        AnyField::Mat(f)
    }
}

pub fn encode(field: &AnyField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(81 + grid.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(field.dtype());
    for d in grid.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in grid.spacing.iter().chain(&grid.origin) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut put = |v: f64| out.extend_from_slice(&v.to_le_bytes());
    match field {
        AnyField::Scalar(f) => f.data.iter().for_each(|&v| put(v)),
        AnyField::Vector(f) => f.data.iter().flatten().for_each(|&v| put(v)),
        AnyField::Mat(f) => f.data.iter().flat_map(|m| m.0.into_iter().flatten()).for_each(put),
        AnyField::Mask(f) => out.extend(f.data.iter().map(|&b| b as u8)),
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::MalformedField("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(buf: &[u8]) -> Result<AnyField> {
    let mut cur = Cursor { buf, pos: 0 };
    if cur.take(4).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dtype = cur.take(1)?[0];
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        *d = cur.u32()? as usize;
    }
    let mut spacing = [0.0; 3];
    let mut origin = [0.0; 3];
    for v in spacing.iter_mut().chain(origin.iter_mut()) {
        *v = cur.f64()?;
    }
    let grid = Grid3::new(dims, spacing, origin).map_err(|e| Error::MalformedField(e.to_string()))?;
    let n = grid.len();
    let per_voxel = match dtype {
        0 => 8,
        1 => 1,
        2 => 24,
        3 => 128,
        other => return Err(Error::MalformedField(format!("unknown dtype {other}"))),
    };
    let expected = n.checked_mul(per_voxel).ok_or_else(|| Error::MalformedField("grid too large".into()))?;
    if buf.len() - cur.pos != expected {
        return Err(Error::MalformedField(format!("payload is {} bytes, expected {expected}", buf.len() - cur.pos)));
    }
    let field = match dtype {
        0 => AnyField::Scalar(Field { grid, data: (0..n).map(|_| cur.f64()).collect::<Result<_>>()? }),
        1 => {
            let bytes = cur.take(n)?;
            if bytes.iter().any(|&b| b > 1) {
                return Err(Error::MalformedField("mask values must be 0 or 1".into()));
            }
            AnyField::Mask(Field { grid, data: bytes.iter().map(|&b| b == 1).collect() })
        }
        2 => {
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                data.push([cur.f64()?, cur.f64()?, cur.f64()?]);
            }
            AnyField::Vector(Field { grid, data })
        }
        _ => {
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                let mut m = Mat4::zeros();
                for v in m.0.iter_mut().flatten() {
                    *v = cur.f64()?;
                }
                data.push(m);
            }
            AnyField::Mat(Field { grid, data })
        }
    };
    Ok(field)
}

pub fn write_field(field: &AnyField, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(field))?;
    w.flush()?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<AnyField> {
    let mut buf = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
    decode(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_dtypes() {
        let g = Grid3::new([3, 2, 2], [0.5, 1.0, 2.5], [-1.0, 0.0, 3.0]).unwrap();
        let fields: Vec<AnyField> = vec![
            Field::from_fn(g, |i| i as f64 * 0.1 - 0.3).into(),
            Field::from_fn(g, |i| i % 3 == 0).into(),
            Field::from_fn(g, |i| [i as f64, -(i as f64), 0.5]).into(),
            Field::from_fn(g, |i| Mat4::identity().scale(i as f64)).into(),
        ];
        for f in fields {
            let bytes = encode(&f);
            assert_eq!(decode(&bytes).unwrap(), f);
            assert_eq!(encode(&decode(&bytes).unwrap()), bytes);
        }
    }

    #[test]
    fn header_errors() {
        let f: AnyField = Field::filled(Grid3::cube(2), 1.0).into();
        let mut bytes = encode(&f);
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::BadMagic)));
        let mut bytes = encode(&f);
        bytes[4] = 2;
        assert!(matches!(decode(&bytes), Err(Error::UnsupportedVersion(2))));
        let bytes = encode(&f);
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::MalformedField(_))));
        assert!(matches!(decode(b"PG"), Err(Error::BadMagic)));
    }
}
