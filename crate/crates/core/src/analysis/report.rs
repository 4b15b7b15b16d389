//! Plain-text report writers: `key=value` lines for records and
//! whitespace-separated two-column files for plotting.

use std::io::Write;

use super::spectrum::SpectrumReport;
use super::trace::RunTrace;
use super::sops::{count_sops_with, layer_sparsity, sparsity, SopOptions};
use crate::error::Result;

/// One `re im` line per eigenvalue.
pub fn write_eigen_pairs<W: Write>(out: &mut W, report: &SpectrumReport) -> Result<()> {
    for z in report.eigenvalues() {
        writeln!(out, "{:.17e} {:.17e}", z.re, z.im)?;
    }
    Ok(())
}

/// Summary lines for a spectrum: one per layer and one total.
pub fn write_spectrum_summary<W: Write>(out: &mut W, report: &SpectrumReport) -> Result<()> {
    for l in &report.layers {
        let hist: Vec<String> = l.magnitude_histogram.iter().map(|c| c.to_string()).collect();
        let max_mag = l.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        writeln!(
            out,
            "layer={} model={} eigenvalues={} real_pairs={} complex_pairs={} max_magnitude={:.6} magnitude_histogram={}",
            l.layer,
            l.model.name(),
            l.eigenvalues.len(),
            l.real_pairs,
            l.complex_pairs,
            max_mag,
            hist.join(",")
        )?;
    }
    writeln!(
        out,
        "total real_pairs={} complex_pairs={}",
        report.real_pairs(),
        report.complex_pairs()
    )?;
    Ok(())
}

/// Activity summary with per-layer sparsity.
pub fn write_activity<W: Write>(out: &mut W, trace: &RunTrace, opts: SopOptions) -> Result<()> {
    for (i, l) in trace.layers.iter().enumerate() {
        let sp = layer_sparsity(trace, i).map_or("n/a".to_string(), |v| format!("{v:.6}"));
        writeln!(
            out,
            "layer={} name={} activity_in={} fan_out={} neurons={} spikes={} sparsity={}",
            i, l.name, l.activity_in, l.fan_out, l.neurons, l.spikes, sp
        )?;
    }
    writeln!(
        out,
        "samples={} timesteps={} sops_per_sample={:.3} sparsity={:.6}",
        trace.samples,
        trace.timesteps,
        count_sops_with(trace, opts),
        sparsity(trace)
    )?;
    Ok(())
}

/// One `x y` line per point, e.g. SOPs against accuracy.
pub fn write_points<W: Write>(out: &mut W, points: &[(f64, f64)]) -> Result<()> {
    for (x, y) in points {
        writeln!(out, "{x:.17e} {y:.17e}")?;
    }
    Ok(())
}
