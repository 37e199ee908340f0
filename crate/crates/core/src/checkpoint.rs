//! Little-endian binary checkpoints: magic, format version, payload, CRC-32.
//!
//! ```text
//! "SDNNCKPT" | u32 version
//! u32 n_widths | u32 widths[n_widths]
//! u8 activation tag per layer
//! u64 seed | u64 step
//! u64 n_params | f64 params[n_params]
//! u8 has_moments [ u64 adam_k | f64 m[n_params] | f64 v[n_params] ]
//! u32 crc32(all preceding bytes)
//! ```

use std::path::Path;

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::model::{check_widths, Mlp, ParamGrad};
use crate::optim::{AdamConfig, AdamState};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SDNNCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Flattened Adam moments, same ordering as [`Mlp::flat_params`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdamMoments {
    pub k: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamMoments {
    pub fn from_state(state: &AdamState) -> Self {
        AdamMoments {
            k: state.k,
            m: state.m.flatten(),
            v: state.v.flatten(),
        }
    }

    pub fn to_state(&self, net: &Mlp, config: AdamConfig) -> Result<AdamState> {
        let mut state = AdamState::new(net, config);
        state.m = ParamGrad::from_flat_like(net, &self.m)?;
        state.v = ParamGrad::from_flat_like(net, &self.v)?;
        state.k = self.k;
        Ok(state)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub net: Mlp,
    pub moments: Option<AdamMoments>,
    pub seed: u64,
    pub step: u64,
}

impl Checkpoint {
    pub fn new(net: Mlp, seed: u64) -> Self {
        Checkpoint {
            net,
            moments: None,
            seed,
            step: 0,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::new(CHECKPOINT_MAGIC, CHECKPOINT_VERSION);
        let widths = self.net.widths();
        w.u32(widths.len() as u32);
        for &d in &widths {
            w.u32(d as u32);
        }
        for l in self.net.layers() {
            w.u8(l.activation.tag());
        }
        w.u64(self.seed);
        w.u64(self.step);
        let params = self.net.flat_params();
        w.u64(params.len() as u64);
        w.f64s(&params);
        match &self.moments {
            None => w.u8(0),
            Some(mo) => {
                w.u8(1);
                w.u64(mo.k);
                w.f64s(&mo.m);
                w.f64s(&mo.v);
            }
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::open(bytes, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)?;
        let n_widths = r.u32()? as usize;
        if n_widths > 4096 {
            return Err(corrupt("implausible layer count"));
        }
        let widths = (0..n_widths)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        check_widths(&widths).map_err(|_| corrupt("declared widths are invalid"))?;
        let depth = n_widths - 1;
        let acts = (0..depth)
            .map(|_| {
                r.u8().and_then(|t| {
                    Activation::from_tag(t).ok_or_else(|| corrupt("unknown activation tag"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let seed = r.u64()?;
        let step = r.u64()?;
        let n_params = r.u64()? as usize;

        let mut net = Mlp::zeros(&widths, acts[0])?;
        if n_params != net.param_count() {
            return Err(corrupt(&format!(
                "declared widths {widths:?} need {} parameters, file holds {n_params}",
                net.param_count()
            )));
        }
        for (layer, act) in net.layers_mut().iter_mut().zip(&acts) {
            layer.activation = *act;
        }
        net.set_flat_params(&r.f64s(n_params)?)?;
        let moments = match r.u8()? {
            0 => None,
            1 => Some(AdamMoments {
                k: r.u64()?,
                m: r.f64s(n_params)?,
                v: r.f64s(n_params)?,
            }),
            _ => return Err(corrupt("bad optimizer-state flag")),
        };
        r.expect_end()?;
        Ok(Checkpoint {
            net,
            moments,
            seed,
            step,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::decode(&bytes)
    }
}

/// Writes a bare network (no optimizer state).
pub fn save(net: &Mlp, path: &Path) -> Result<()> {
    Checkpoint::new(net.clone(), 0).save(path)
}

pub fn load(path: &Path) -> Result<Mlp> {
    Checkpoint::load(path).map(|c| c.net)
}

fn corrupt(msg: &str) -> Error {
    Error::CorruptChecksum(msg.to_string())
}

pub(crate) struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new(magic: &[u8; 8], version: u32) -> Self {
        let mut w = ByteWriter { buf: Vec::new() };
        w.buf.extend_from_slice(magic);
        w.u32(version);
        w
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.u32(crc);
        self.buf
    }
}

pub(crate) struct ByteReader<'a> {
    body: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    /// Validates magic, version and trailing checksum, then positions the
    /// reader after the header.
    pub fn open(bytes: &'a [u8], magic: &[u8; 8], version: u32) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(corrupt("file too short"));
        }
        if &bytes[..8] != magic {
            return Err(corrupt("bad magic header"));
        }
        let found = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if found != version {
            return Err(Error::VersionMismatch {
                expected: version,
                found,
            });
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        if crc32fast::hash(body) != stored {
            return Err(corrupt("checksum mismatch"));
        }
        Ok(ByteReader { body, pos: 12 })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.body.len() - self.pos < n {
            return Err(corrupt("unexpected end of payload"));
        }
        let s = &self.body[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        if n > (self.body.len() - self.pos) / 8 {
            return Err(corrupt("unexpected end of payload"));
        }
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.pos != self.body.len() {
            return Err(corrupt("trailing bytes after payload"));
        }
        Ok(())
    }
}
