use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::network::{Network, NeuronLayer};
use crate::neurons::{NeuronKind, SsmMatrices};
use crate::numerics::{eig_2x2, Complex64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Complex-conjugate eigenvalues: damped oscillation.
    Resonator,
    /// Real eigenvalues.
    Integrator,
}

/// Discriminant of the characteristic polynomial of `[[α, α−1], [a, β]]`.
pub fn regime_discriminant(alpha: f64, beta: f64, a: f64) -> f64 {
    (alpha - beta).powi(2) + 4.0 * a * (alpha - 1.0)
}

pub fn classify_regime(alpha: f64, beta: f64, a: f64) -> Regime {
    if regime_discriminant(alpha, beta, a) < 0.0 {
        Regime::Resonator
    } else {
        Regime::Integrator
    }
}

/// Number of histogram bins covering magnitudes in `[0, 1)`; one extra
/// bin collects everything at or above 1.
pub const MAGNITUDE_BINS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerSpectrum {
    pub layer: usize,
    pub model: NeuronKind,
    /// Two entries per neuron for two-state models, one for complex-state
    /// models (the conjugate is implied).
    pub eigenvalues: Vec<Complex64>,
    pub real_pairs: usize,
    pub complex_pairs: usize,
    pub magnitude_histogram: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub layers: Vec<LayerSpectrum>,
}

impl SpectrumReport {
    pub fn real_pairs(&self) -> usize {
        self.layers.iter().map(|l| l.real_pairs).sum()
    }

    pub fn complex_pairs(&self) -> usize {
        self.layers.iter().map(|l| l.complex_pairs).sum()
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = &Complex64> {
        self.layers.iter().flat_map(|l| l.eigenvalues.iter())
    }
}

fn histogram(values: &[Complex64]) -> Vec<usize> {
    let mut h = vec![0; MAGNITUDE_BINS + 1];
    for v in values {
        let m = v.norm();
        let bin = if m >= 1.0 { MAGNITUDE_BINS } else { (m * MAGNITUDE_BINS as f64) as usize };
        h[bin.min(MAGNITUDE_BINS)] += 1;
    }
    h
}

/// Eigenvalues of one neuron layer. Two-state models use the coupled
/// `[[α, α−1], [a, β]]` transition (after clamping); complex-state models
/// report their scalar transition.
pub fn layer_spectrum(layer: &NeuronLayer, index: usize) -> Result<LayerSpectrum> {
    let mut eigenvalues = Vec::new();
    let (mut real_pairs, mut complex_pairs) = (0, 0);
    if let Some(coeffs) = layer.second_order()? {
        for c in coeffs {
            let m = SsmMatrices::adlif(c.alpha, c.beta, c.a).a_bar;
            let pair = eig_2x2(&m)?;
            if pair[0].im != 0.0 {
                complex_pairs += 1;
            } else {
                real_pairs += 1;
            }
            eigenvalues.extend(pair);
        }
    } else if let Some(trans) = layer.complex_transitions()? {
        for z in trans {
            if z.im != 0.0 {
                complex_pairs += 1;
            } else {
                real_pairs += 1;
            }
            eigenvalues.push(z);
        }
    }
    let magnitude_histogram = histogram(&eigenvalues);
    Ok(LayerSpectrum {
        layer: index,
        model: layer.kind(),
        eigenvalues,
        real_pairs,
        complex_pairs,
        magnitude_histogram,
    })
}

pub fn spectrum(net: &Network) -> Result<SpectrumReport> {
    let layers = net
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| layer_spectrum(&l.neuron, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport { layers })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_hand_cases() {
        assert_eq!(classify_regime(0.9, 0.2, 0.0), Regime::Integrator);
        assert!((regime_discriminant(0.9, 0.9, 1.0) + 0.4).abs() < 1e-15);
        assert_eq!(classify_regime(0.9, 0.9, 1.0), Regime::Resonator);
        assert_eq!(classify_regime(1.0, 0.3, 0.7), Regime::Integrator);
        assert_eq!(classify_regime(1.0, 0.3, -5.0), Regime::Integrator);
    }

    #[test]
    fn histogram_counts_every_value() {
        let v = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.99), Complex64::new(1.2, 0.0)];
        let h = histogram(&v);
        assert_eq!(h.iter().sum::<usize>(), 3);
        assert_eq!(h[MAGNITUDE_BINS], 1);
        assert_eq!(h[10], 1);
        assert_eq!(h[19], 1);
    }
}
