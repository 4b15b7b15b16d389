//! `SLCK` checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   b"SLCK"
//! version u32
//! count   u64                      number of tensors
//! repeated `count` times:
//!   name_len u32, name (UTF-8)
//!   dtype    u8                    0 = u8, 2 = f64, 3 = u64
//!   ndim     u8, dims u64 × ndim
//!   data     raw little-endian elements, row-major
//! ```
//!
//! Decoding either returns every tensor or a format error; nothing partial
//! escapes.

use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use crate::data::Cursor;
use crate::error::{Error, Result};
use crate::network::{Network, Projection};

pub const SLCK_MAGIC: &[u8; 4] = b"SLCK";
pub const SLCK_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    U8(Vec<u8>),
    F64(Vec<f64>),
    U64(Vec<u64>),
}

impl TensorData {
    fn code(&self) -> u8 {
        match self {
            TensorData::U8(_) => 0,
            TensorData::F64(_) => 2,
            TensorData::U64(_) => 3,
        }
    }

    fn len(&self) -> usize {
        match self {
            TensorData::U8(v) => v.len(),
            TensorData::F64(v) => v.len(),
            TensorData::U64(v) => v.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub dims: Vec<u64>,
    pub data: TensorData,
}

impl NamedTensor {
    pub fn f64(name: impl Into<String>, a: &ArrayD<f64>) -> Self {
        Self {
            name: name.into(),
            dims: a.shape().iter().map(|&d| d as u64).collect(),
            data: TensorData::F64(a.iter().copied().collect()),
        }
    }

    pub fn f64_vec(name: impl Into<String>, v: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            dims: vec![v.len() as u64],
            data: TensorData::F64(v),
        }
    }

    pub fn u64_vec(name: impl Into<String>, v: Vec<u64>) -> Self {
        Self {
            name: name.into(),
            dims: vec![v.len() as u64],
            data: TensorData::U64(v),
        }
    }

    pub fn bytes(name: impl Into<String>, v: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            dims: vec![v.len() as u64],
            data: TensorData::U8(v),
        }
    }
}

/// Ordered collection of named tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub tensors: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn push(&mut self, t: NamedTensor) {
        self.tensors.push(t);
    }

    pub fn get(&self, name: &str) -> Result<&NamedTensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Data(format!("checkpoint has no tensor `{name}`")))
    }

    pub fn f64s(&self, name: &str) -> Result<&[f64]> {
        match &self.get(name)?.data {
            TensorData::F64(v) => Ok(v),
            _ => Err(Error::Data(format!("checkpoint tensor `{name}` is not f64"))),
        }
    }

    pub fn u64s(&self, name: &str) -> Result<&[u64]> {
        match &self.get(name)?.data {
            TensorData::U64(v) => Ok(v),
            _ => Err(Error::Data(format!("checkpoint tensor `{name}` is not u64"))),
        }
    }

    pub fn bytes(&self, name: &str) -> Result<&[u8]> {
        match &self.get(name)?.data {
            TensorData::U8(v) => Ok(v),
            _ => Err(Error::Data(format!("checkpoint tensor `{name}` is not u8"))),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(SLCK_MAGIC);
        out.extend_from_slice(&SLCK_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.tensors.len() as u64).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.push(t.data.code());
            out.push(t.dims.len() as u8);
            for d in &t.dims {
                out.extend_from_slice(&d.to_le_bytes());
            }
            match &t.data {
                TensorData::U8(v) => out.extend_from_slice(v),
                TensorData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
                TensorData::U64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            }
        }
        out
    }

    pub fn decode(buf: &[u8]) -> Result<Self> {
        let mut c = Cursor::new(buf);
        if c.take(4, "magic")? != SLCK_MAGIC {
            return Err(Error::Format {
                offset: 0,
                msg: "bad magic, expected SLCK".into(),
            });
        }
        let at = c.offset();
        let version = c.u32("version")?;
        if version != SLCK_VERSION {
            return Err(Error::Format {
                offset: at,
                msg: format!("unsupported version {version}"),
            });
        }
        let count = c.u64("tensor count")?;
        // every tensor needs at least 6 header bytes
        if count > c.remaining() as u64 / 6 {
            return c.fail(format!("tensor count {count} exceeds the remaining bytes"));
        }
        let mut tensors = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let len = c.u32("name length")? as usize;
            let at = c.offset();
            let name = std::str::from_utf8(c.take(len, "name")?)
                .map_err(|_| Error::Format {
                    offset: at,
                    msg: "tensor name is not UTF-8".into(),
                })?
                .to_string();
            let at = c.offset();
            let code = c.u8("dtype")?;
            let elem = match code {
                0 => 1,
                2 | 3 => 8,
                _ => {
                    return Err(Error::Format {
                        offset: at,
                        msg: format!("unknown dtype code {code}"),
                    })
                }
            };
            let ndim = c.u8("ndim")? as usize;
            let dims = (0..ndim).map(|_| c.u64("dimension")).collect::<Result<Vec<_>>>()?;
            let n = c.element_count(&dims, elem)?;
            let raw = c.take(n * elem, "tensor data")?;
            let data = match code {
                0 => TensorData::U8(raw.to_vec()),
                2 => TensorData::F64(
                    raw.chunks_exact(8)
                        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                        .collect(),
                ),
                _ => TensorData::U64(
                    raw.chunks_exact(8)
                        .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
                        .collect(),
                ),
            };
            tensors.push(NamedTensor { name, dims, data });
        }
        if c.remaining() != 0 {
            return c.fail(format!("{} trailing bytes", c.remaining()));
        }
        Ok(Self { tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}

fn bn_name(bn: &crate::network::BatchNorm) -> String {
    bn.gamma.name.trim_end_matches(".gamma").to_string()
}

fn dcls_name(d: &crate::network::DclsLayer) -> String {
    d.weight.name.trim_end_matches(".weight").to_string()
}

/// Every parameter plus the BN running statistics and kernel widths of `net`.
pub fn network_tensors(net: &Network) -> Vec<NamedTensor> {
    let mut out: Vec<NamedTensor> = net.params().iter().map(|p| NamedTensor::f64(&p.name, &p.value)).collect();
    for l in &net.layers {
        if let Some(bn) = &l.bn {
            let n = bn_name(bn);
            out.push(NamedTensor::f64_vec(format!("{n}.running_mean"), bn.running_mean.to_vec()));
            out.push(NamedTensor::f64_vec(format!("{n}.running_var"), bn.running_var.to_vec()));
        }
        if let Projection::Dcls(d) = &l.proj {
            out.push(NamedTensor::f64_vec(format!("{}.sigma", dcls_name(d)), vec![d.sigma]));
        }
    }
    out
}

fn copy_into(dst: &mut [f64], src: &[f64], name: &str) -> Result<()> {
    if dst.len() != src.len() {
        return Err(Error::Shape(format!(
            "checkpoint tensor `{name}` has {} elements, network expects {}",
            src.len(),
            dst.len()
        )));
    }
    dst.copy_from_slice(src);
    Ok(())
}

/// Overwrites the parameters, BN statistics and kernel widths of `net` from `ckpt`.
pub fn restore_network(net: &mut Network, ckpt: &Checkpoint) -> Result<()> {
    for p in net.params_mut() {
        let t = ckpt.get(&p.name)?;
        let dims: Vec<u64> = p.value.shape().iter().map(|&d| d as u64).collect();
        if t.dims != dims {
            return Err(Error::Shape(format!("checkpoint tensor `{}` has shape {:?}, expected {dims:?}", p.name, t.dims)));
        }
        let name = p.name.clone();
        copy_into(p.slice_mut(), ckpt.f64s(&name)?, &name)?;
    }
    for l in &mut net.layers {
        if let Some(bn) = &mut l.bn {
            let n = bn_name(bn);
            let key = format!("{n}.running_mean");
            copy_into(bn.running_mean.as_slice_mut().expect("contiguous"), ckpt.f64s(&key)?, &key)?;
            let key = format!("{n}.running_var");
            copy_into(bn.running_var.as_slice_mut().expect("contiguous"), ckpt.f64s(&key)?, &key)?;
        }
        if let Projection::Dcls(d) = &mut l.proj {
            let key = format!("{}.sigma", dcls_name(d));
            copy_into(std::slice::from_mut(&mut d.sigma), ckpt.f64s(&key)?, &key)?;
        }
    }
    Ok(())
}

/// Rebuilds an `f64` array from a stored tensor.
pub fn to_array(t: &NamedTensor) -> Result<ArrayD<f64>> {
    match &t.data {
        TensorData::F64(v) => {
            let shape: Vec<usize> = t.dims.iter().map(|&d| d as usize).collect();
            ArrayD::from_shape_vec(IxDyn(&shape), v.clone())
                .map_err(|e| Error::Shape(format!("tensor `{}`: {e}", t.name)))
        }
        _ => Err(Error::Data(format!("tensor `{}` is not f64 ({} elements)", t.name, t.data.len()))),
    }
}
