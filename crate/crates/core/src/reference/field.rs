use std::path::Path;

use crate::checkpoint::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

pub const FIELD_MAGIC: &[u8; 8] = b"SDNNFELD";
pub const FIELD_VERSION: u32 = 1;

/// Values on a tensor grid, stored time-major (`values[it * nx + ix]`).
#[derive(Clone, Debug, PartialEq)]
pub enum FieldValues {
    Real(Vec<f64>),
    /// `(ψ, φ)` pairs.
    Complex(Vec<[f64; 2]>),
}

impl FieldValues {
    pub fn len(&self) -> usize {
        match self {
            FieldValues::Real(v) => v.len(),
            FieldValues::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldMeta {
    pub method: String,
    /// Quadrature order or number of Fourier modes.
    pub resolution: usize,
    /// Time step of the solver; 0 for closed-form fields.
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceField {
    t: Vec<f64>,
    x: Vec<f64>,
    values: FieldValues,
    pub meta: FieldMeta,
}

impl ReferenceField {
    pub fn new(t: Vec<f64>, x: Vec<f64>, values: FieldValues, meta: FieldMeta) -> Result<Self> {
        if values.len() != t.len() * x.len() {
            return Err(Error::LengthMismatch {
                expected: t.len() * x.len(),
                actual: values.len(),
            });
        }
        Ok(ReferenceField { t, x, values, meta })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &FieldValues {
        &self.values
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.values, FieldValues::Complex(_))
    }

    /// Real value, or the modulus `√(ψ²+φ²)` of a complex field.
    pub fn scalar(&self, it: usize, ix: usize) -> f64 {
        let i = it * self.x.len() + ix;
        match &self.values {
            FieldValues::Real(v) => v[i],
            FieldValues::Complex(v) => v[i][0].hypot(v[i][1]),
        }
    }

    /// Scalar values in storage order.
    pub fn scalars(&self) -> Vec<f64> {
        (0..self.t.len())
            .flat_map(|it| (0..self.x.len()).map(move |ix| (it, ix)))
            .map(|(it, ix)| self.scalar(it, ix))
            .collect()
    }

    /// Grid points `(t, x)` in storage order, point-major.
    pub fn points(&self) -> Vec<f64> {
        self.t
            .iter()
            .flat_map(|&t| self.x.iter().flat_map(move |&x| [t, x]))
            .collect()
    }

    /// Columns `t, x, value`, plus `psi, phi` for complex fields, where
    /// `value` is the modulus.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        if self.is_complex() {
            w.write_record(["t", "x", "value", "psi", "phi"])?;
        } else {
            w.write_record(["t", "x", "value"])?;
        }
        for (it, &t) in self.t.iter().enumerate() {
            for (ix, &x) in self.x.iter().enumerate() {
                let i = it * self.x.len() + ix;
                let mut row = vec![
                    t.to_string(),
                    x.to_string(),
                    self.scalar(it, ix).to_string(),
                ];
                if let FieldValues::Complex(v) = &self.values {
                    row.push(v[i][0].to_string());
                    row.push(v[i][1].to_string());
                }
                w.write_record(&row)?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::new(FIELD_MAGIC, FIELD_VERSION);
        let method = self.meta.method.as_bytes();
        w.u64(method.len() as u64);
        for &b in method {
            w.u8(b);
        }
        w.u64(self.meta.resolution as u64);
        w.f64(self.meta.dt);
        w.u64(self.t.len() as u64);
        w.f64s(&self.t);
        w.u64(self.x.len() as u64);
        w.f64s(&self.x);
        match &self.values {
            FieldValues::Real(v) => {
                w.u8(1);
                w.f64s(v);
            }
            FieldValues::Complex(v) => {
                w.u8(2);
                for p in v {
                    w.f64s(p);
                }
            }
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::open(bytes, FIELD_MAGIC, FIELD_VERSION)?;
        let n = r.u64()? as usize;
        if n > bytes.len() {
            return Err(Error::CorruptChecksum("implausible method length".into()));
        }
        let method = (0..n).map(|_| r.u8()).collect::<Result<Vec<_>>>()?;
        let method = String::from_utf8(method)
            .map_err(|_| Error::CorruptChecksum("method name is not utf-8".into()))?;
        let resolution = r.u64()? as usize;
        let dt = r.f64()?;
        let nt = r.u64()? as usize;
        let t = r.f64s(nt)?;
        let nx = r.u64()? as usize;
        let x = r.f64s(nx)?;
        let count = nt
            .checked_mul(nx)
            .ok_or_else(|| Error::CorruptChecksum("implausible grid size".into()))?;
        let values = match r.u8()? {
            1 => FieldValues::Real(r.f64s(count)?),
            2 => {
                let flat = r.f64s(
                    count
                        .checked_mul(2)
                        .ok_or_else(|| Error::CorruptChecksum("implausible grid size".into()))?,
                )?;
                FieldValues::Complex(flat.chunks(2).map(|c| [c[0], c[1]]).collect())
            }
            _ => return Err(Error::CorruptChecksum("unknown value kind".into())),
        };
        r.expect_end()?;
        ReferenceField::new(
            t,
            x,
            values,
            FieldMeta {
                method,
                resolution,
                dt,
            },
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        ReferenceField::decode(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex_field() -> ReferenceField {
        ReferenceField::new(
            vec![0.0, 0.5],
            vec![-1.0, 0.0, 1.0],
            FieldValues::Complex(vec![
                [3.0, 4.0],
                [0.0, 0.0],
                [1.0, 0.0],
                [0.0, -2.0],
                [0.5, 0.5],
                [1e-300, 7.0],
            ]),
            FieldMeta {
                method: "fourier-rk4".into(),
                resolution: 256,
                dt: 1.5e-4,
            },
        )
        .unwrap()
    }

    #[test]
    fn shape_is_checked() {
        let meta = FieldMeta {
            method: "x".into(),
            resolution: 1,
            dt: 0.0,
        };
        assert!(matches!(
            ReferenceField::new(
                vec![0.0],
                vec![1.0, 2.0],
                FieldValues::Real(vec![1.0]),
                meta
            ),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn modulus_and_points() {
        let f = complex_field();
        assert_eq!(f.scalar(0, 0), 5.0);
        assert_eq!(f.scalar(1, 0), 2.0);
        assert_eq!(f.points()[..4], [0.0, -1.0, 0.0, 0.0]);
        assert_eq!(f.scalars().len(), 6);
    }

    #[test]
    fn binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        let f = complex_field();
        f.save(&path).unwrap();
        assert_eq!(ReferenceField::load(&path).unwrap(), f);

        let mut bytes = f.encode();
        let n = bytes.len();
        bytes[n - 10] ^= 1;
        assert!(matches!(
            ReferenceField::decode(&bytes),
            Err(Error::CorruptChecksum(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        complex_field().write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,value,psi,phi");
        assert_eq!(lines.next().unwrap(), "0,-1,5,3,4");
        assert_eq!(text.lines().count(), 7);
    }
}
