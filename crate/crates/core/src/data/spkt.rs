//! Binary container for [`SpikeTensor`]s.
//!
//! Layout, all integers little-endian:
//!
//! | field | size |
//! |---|---|
//! | magic `SPKT` | 4 |
//! | version (`u32`, currently 1) | 4 |
//! | dtype (`u8`: 0 = u8, 1 = f32) | 1 |
//! | ndim (`u8`) | 1 |
//! | dims (`u64` each) | 8·ndim |
//! | payload, row-major | dims product × dtype size |
//! | label count (`u64`) then labels (`u32` each) | 8 + 4·count |
//! | metadata length (`u64`) then UTF-8 JSON | 8 + length |

use std::path::Path;

use ndarray::Array3;

use super::tensor::{Dtype, SpikeMeta, SpikeTensor};
use crate::error::{Error, Result};

pub const SPKT_MAGIC: &[u8; 4] = b"SPKT";
pub const SPKT_VERSION: u32 = 1;

pub fn encode_spkt(t: &SpikeTensor) -> Vec<u8> {
    let (b, tt, c) = t.data().dim();
    let mut out = Vec::with_capacity(32 + b * tt * c * 4);
    out.extend_from_slice(SPKT_MAGIC);
    out.extend_from_slice(&SPKT_VERSION.to_le_bytes());
    out.push(t.dtype().code());
    out.push(3);
    for d in [b, tt, c] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    match t.dtype() {
        Dtype::U8 => out.extend(t.data().iter().map(|&v| v as u8)),
        Dtype::F32 => {
            for &v in t.data().iter() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    out.extend_from_slice(&(t.labels.len() as u64).to_le_bytes());
    for &l in &t.labels {
        out.extend_from_slice(&l.to_le_bytes());
    }
    let meta = serde_json::to_vec(&t.meta).expect("metadata serialises");
    out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
    out.extend_from_slice(&meta);
    out
}

pub fn save_spkt(path: impl AsRef<Path>, t: &SpikeTensor) -> Result<()> {
    std::fs::write(path, encode_spkt(t))?;
    Ok(())
}

pub fn load_spkt(path: impl AsRef<Path>) -> Result<SpikeTensor> {
    decode_spkt(&std::fs::read(path)?)
}

/// Byte reader that reports the offset of the first failure.
pub(crate) struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub(crate) fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Format {
            offset: self.pos as u64,
            msg: msg.into(),
        })
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        match self.pos.checked_add(n) {
            Some(end) if end <= self.buf.len() => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            _ => self.fail(format!(
                "truncated {what}: need {n} bytes, {} left",
                self.buf.len() - self.pos
            )),
        }
    }

    pub(crate) fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    /// Element count of `dims`, refusing products that overflow or exceed
    /// what the remaining bytes could hold.
    pub(crate) fn element_count(&self, dims: &[u64], elem: usize) -> Result<usize> {
        let mut n: u64 = 1;
        for &d in dims {
            n = match n.checked_mul(d) {
                Some(v) => v,
                None => return self.fail("dimension product overflows"),
            };
        }
        match n.checked_mul(elem as u64) {
            Some(bytes) if bytes <= self.remaining() as u64 => Ok(n as usize),
            _ => self.fail(format!("payload of {n} elements exceeds the {} bytes left", self.remaining())),
        }
    }
}

pub fn decode_spkt(buf: &[u8]) -> Result<SpikeTensor> {
    let mut c = Cursor::new(buf);
    let magic = c.take(4, "magic")?;
    if magic != SPKT_MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: format!("bad magic {magic:?}"),
        });
    }
    let at = c.offset();
    let version = c.u32("version")?;
    if version != SPKT_VERSION {
        return Err(Error::Format {
            offset: at,
            msg: format!("unsupported version {version}"),
        });
    }
    let at = c.offset();
    let dtype = Dtype::from_code(c.u8("dtype")?).ok_or(Error::Format {
        offset: at,
        msg: "unknown dtype code".into(),
    })?;
    let at = c.offset();
    let ndim = c.u8("ndim")?;
    if ndim != 3 {
        return Err(Error::Format {
            offset: at,
            msg: format!("expected 3 dimensions, found {ndim}"),
        });
    }
    let dims = [c.u64("dims")?, c.u64("dims")?, c.u64("dims")?];
    let elem = if dtype == Dtype::U8 { 1 } else { 4 };
    let n = c.element_count(&dims, elem)?;
    let payload = c.take(n * elem, "payload")?;
    let values: Vec<f64> = match dtype {
        Dtype::U8 => {
            if let Some(p) = payload.iter().position(|&v| v > 1) {
                return Err(Error::Format {
                    offset: c.offset() - (n - p) as u64,
                    msg: format!("spike value {} is not binary", payload[p]),
                });
            }
            payload.iter().map(|&v| v as f64).collect()
        }
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|ch| f32::from_le_bytes(ch.try_into().expect("4 bytes")) as f64)
            .collect(),
    };
    let at = c.offset();
    let count = c.u64("label count")?;
    if count != dims[0] {
        return Err(Error::Format {
            offset: at,
            msg: format!("{count} labels for {} samples", dims[0]),
        });
    }
    let mut labels = Vec::with_capacity(count as usize);
    for _ in 0..count {
        labels.push(c.u32("labels")?);
    }
    let meta_len = c.u64("metadata length")?;
    let at = c.offset();
    let meta_bytes = c.take(usize::try_from(meta_len).unwrap_or(usize::MAX), "metadata")?;
    let meta: SpikeMeta = serde_json::from_slice(meta_bytes).map_err(|e| Error::Format {
        offset: at,
        msg: format!("metadata: {e}"),
    })?;
    if c.remaining() != 0 {
        return c.fail(format!("{} trailing bytes", c.remaining()));
    }
    let data = Array3::from_shape_vec((dims[0] as usize, dims[1] as usize, dims[2] as usize), values)
        .expect("element count checked");
    SpikeTensor::with_dtype(data, dtype, labels, meta).map_err(|e| Error::Format { offset: at, msg: e.to_string() })
}
