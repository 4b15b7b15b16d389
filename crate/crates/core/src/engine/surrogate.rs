use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boxcar surrogate for the spike threshold's derivative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateSpec {
    pub width: f64,
    pub scale: f64,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        Self {
            width: 0.5,
            scale: 0.5,
        }
    }
}

impl SurrogateSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite() && self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::ParamRange(format!(
                "surrogate width and scale must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// `scale` inside `|u − θ| ≤ width`, zero outside.
#[inline]
pub fn surrogate_derivative(u: f64, spec: &SurrogateSpec, theta: f64) -> f64 {
    if (u - theta).abs() <= spec.width {
        spec.scale
    } else {
        0.0
    }
}

/// Spike nonlinearity used in the forward pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpikeFn {
    /// Binary threshold forward, boxcar surrogate backward.
    #[default]
    Heaviside,
    /// The boxcar's primitive: a clamped ramp from 0 at `θ − width` to 1 at
    /// `θ + width`. Forward and backward are consistent, so finite
    /// differences can check the whole reverse pass.
    Relaxed,
}

/// Spike output and the derivative the reverse pass uses for it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikeRule {
    pub kind: SpikeFn,
    pub surrogate: SurrogateSpec,
}

impl SpikeRule {
    #[inline]
    pub fn fire(&self, v: f64, theta: f64) -> f64 {
        match self.kind {
            SpikeFn::Heaviside => {
                if v >= theta {
                    1.0
                } else {
                    0.0
                }
            }
            SpikeFn::Relaxed => {
                let w = self.surrogate.width;
                ((v - theta + w) / (2.0 * w)).clamp(0.0, 1.0)
            }
        }
    }

    #[inline]
    pub fn slope(&self, v: f64, theta: f64) -> f64 {
        match self.kind {
            SpikeFn::Heaviside => surrogate_derivative(v, &self.surrogate, theta),
            SpikeFn::Relaxed => {
                let w = self.surrogate.width;
                if (v - theta).abs() < w {
                    1.0 / (2.0 * w)
                } else {
                    0.0
                }
            }
        }
    }
}
