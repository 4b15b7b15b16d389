use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Inverted-dropout mask of shape `batch × features`, held fixed across time.
/// Kept entries carry `1/(1−p)`.
pub fn dropout_mask(rng: &mut Rng, batch: usize, features: usize, p: f64) -> Result<Array2<f64>> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::ParamRange(format!("dropout rate must be in [0, 1), got {p}")));
    }
    if p == 0.0 {
        return Ok(Array2::ones((batch, features)));
    }
    let keep = 1.0 / (1.0 - p);
    Ok(Array2::from_shape_simple_fn((batch, features), || {
        if rng.bernoulli(p) {
            0.0
        } else {
            keep
        }
    }))
}

pub fn apply_mask(x: &Array3<f64>, mask: &Array2<f64>) -> Array3<f64> {
    let (b, t, f) = x.dim();
    let xs = x.as_standard_layout();
    let xs = xs.as_slice().expect("standard layout");
    let ms = mask.as_standard_layout();
    let ms = ms.as_slice().expect("standard layout");
    let mut out = Vec::with_capacity(xs.len());
    for (bi, sample) in xs.chunks_exact(t * f).enumerate() {
        let m = &ms[bi * f..(bi + 1) * f];
        for row in sample.chunks_exact(f) {
            out.extend(row.iter().zip(m).map(|(v, k)| v * k));
        }
    }
    Array3::from_shape_vec((b, t, f), out).expect("shape")
}
