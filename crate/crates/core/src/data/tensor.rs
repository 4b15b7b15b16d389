use ndarray::{s, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Storage type of the activity values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dtype {
    /// Binary spikes stored one byte per entry.
    U8,
    /// Real-valued features stored as f32.
    F32,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::U8 => 0,
            Dtype::F32 => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Dtype::U8),
            1 => Some(Dtype::F32),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpikeMeta {
    pub bin_ms: f64,
    pub channels: usize,
    pub class_names: Vec<String>,
    /// Unpadded length of every sample, in bins.
    pub lengths: Vec<usize>,
}

/// `batch × time × channel` activity with per-sample labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeTensor {
    data: Array3<f64>,
    dtype: Dtype,
    pub labels: Vec<u32>,
    pub meta: SpikeMeta,
}

impl SpikeTensor {
    /// Binary data is stored as [`Dtype::U8`]; anything else is rounded to
    /// f32 so that the stored file reproduces it exactly.
    pub fn new(data: Array3<f64>, labels: Vec<u32>, meta: SpikeMeta) -> Result<Self> {
        let binary = data.iter().all(|&v| v == 0.0 || v == 1.0);
        let dtype = if binary { Dtype::U8 } else { Dtype::F32 };
        Self::with_dtype(data, dtype, labels, meta)
    }

    /// As [`SpikeTensor::new`] with an explicit storage type.
    pub fn with_dtype(data: Array3<f64>, dtype: Dtype, labels: Vec<u32>, mut meta: SpikeMeta) -> Result<Self> {
        let (b, t, c) = data.dim();
        if labels.len() != b {
            return Err(Error::Data(format!("{} labels for {b} samples", labels.len())));
        }
        if meta.lengths.is_empty() {
            meta.lengths = vec![t; b];
        }
        if meta.lengths.len() != b || meta.lengths.iter().any(|&l| l > t) {
            return Err(Error::Data("sample lengths do not match the tensor".into()));
        }
        meta.channels = c;
        let data = match dtype {
            Dtype::U8 => {
                if data.iter().any(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::Data("spike tensor holds non-binary values".into()));
                }
                data.as_standard_layout().into_owned()
            }
            Dtype::F32 => {
                if data.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Data("non-finite feature values".into()));
                }
                data.mapv(|v| v as f32 as f64)
            }
        };
        Ok(Self { data, dtype, labels, meta })
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn dtype(&self) -> Dtype {
        self.dtype
    }

    pub fn samples(&self) -> usize {
        self.data.dim().0
    }

    pub fn timesteps(&self) -> usize {
        self.data.dim().1
    }

    pub fn channels(&self) -> usize {
        self.data.dim().2
    }

    pub fn is_binary(&self) -> bool {
        self.dtype == Dtype::U8
    }

    /// Number of classes implied by the labels and class names.
    pub fn classes(&self) -> usize {
        let from_labels = self.labels.iter().max().map_or(0, |&m| m as usize + 1);
        from_labels.max(self.meta.class_names.len())
    }

    /// Gathers the given samples into a `batch × time × channel` array.
    pub fn gather(&self, idx: &[usize]) -> (Array3<f64>, Vec<u32>) {
        let data = self.data.select(Axis(0), idx);
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        (data, labels)
    }

    /// A new tensor holding the given samples.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let (data, labels) = self.gather(idx);
        Self {
            data,
            dtype: self.dtype,
            labels,
            meta: SpikeMeta {
                lengths: idx.iter().map(|&i| self.meta.lengths[i]).collect(),
                ..self.meta.clone()
            },
        }
    }

    /// Sample `i` as a `time × channel` view.
    pub fn sample(&self, i: usize) -> ndarray::ArrayView2<'_, f64> {
        self.data.slice(s![i, .., ..])
    }
}
