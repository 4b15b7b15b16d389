//! Eigenvalue spectra, regime classification and activity accounting.

mod report;
mod sops;
mod spectrum;
mod trace;

pub use report::{write_activity, write_eigen_pairs, write_points, write_spectrum_summary};
pub use sops::{
    count_sops, count_sops_with, eventssm_sops, format_millions, layer_sparsity, sparsity, EventSsmSops, SopOptions,
};
pub use spectrum::{
    classify_regime, layer_spectrum, regime_discriminant, spectrum, LayerSpectrum, Regime, SpectrumReport,
    MAGNITUDE_BINS,
};
pub use trace::{LayerTrace, RunTrace};
