//! Event streams and their conversion to binned spike tensors.
//!
//! Text format: one `t_us,channel` record per line, samples separated by a
//! blank line. Labels live in a sidecar file with one class index per line,
//! in sample order. Lines starting with `#` are ignored in both files.

use ndarray::Array3;

use super::tensor::{SpikeMeta, SpikeTensor};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventStream {
    /// `(timestamp in µs, channel)`, timestamps nondecreasing.
    pub events: Vec<(u64, u32)>,
    pub label: u32,
}

impl EventStream {
    pub fn validate(&self, channels: usize) -> Result<()> {
        for w in self.events.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(Error::Data(format!("timestamps decrease: {} after {}", w[1].0, w[0].0)));
            }
        }
        if let Some(&(t, c)) = self.events.iter().find(|e| e.1 as usize >= channels) {
            return Err(Error::Data(format!("event at {t} µs on channel {c}, only {channels} channels declared")));
        }
        Ok(())
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.starts_with('#'))
}

/// Parses event records and the sidecar labels.
pub fn parse_events(events: &str, labels: &str) -> Result<Vec<EventStream>> {
    let mut samples: Vec<Vec<(u64, u32)>> = Vec::new();
    let mut current: Option<Vec<(u64, u32)>> = None;
    for (line, l) in data_lines(events) {
        if l.is_empty() {
            if let Some(s) = current.take() {
                samples.push(s);
            }
            continue;
        }
        let (t, c) = l
            .split_once(',')
            .ok_or_else(|| Error::Data(format!("line {line}: expected `t_us,channel`")))?;
        let t: u64 = t
            .trim()
            .parse()
            .map_err(|e| Error::Data(format!("line {line}: bad timestamp: {e}")))?;
        let c: u32 = c
            .trim()
            .parse()
            .map_err(|e| Error::Data(format!("line {line}: bad channel: {e}")))?;
        current.get_or_insert_with(Vec::new).push((t, c));
    }
    if let Some(s) = current.take() {
        samples.push(s);
    }
    let labels: Vec<u32> = data_lines(labels)
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| l.parse().map_err(|e| Error::Data(format!("label line {line}: {e}"))))
        .collect::<Result<_>>()?;
    // A trailing label for an empty final sample is allowed: it has no events.
    while samples.len() < labels.len() {
        samples.push(Vec::new());
    }
    if samples.len() != labels.len() {
        return Err(Error::Data(format!("{} event samples but {} labels", samples.len(), labels.len())));
    }
    Ok(samples
        .into_iter()
        .zip(labels)
        .map(|(events, label)| EventStream { events, label })
        .collect())
}

/// Number of bins needed to hold every event of `s`.
pub fn bins_needed(s: &EventStream, bin_ms: f64) -> usize {
    let bin_us = bin_ms * 1000.0;
    s.events.last().map_or(0, |&(t, _)| (t as f64 / bin_us).floor() as usize + 1)
}

/// Bins events into `bin_ms` windows and ORs blocks of `pool_factor`
/// adjacent channels together. Samples are zero-padded to the longest one;
/// true lengths go into the metadata.
pub fn bin_events(
    streams: &[EventStream],
    raw_channels: usize,
    bin_ms: f64,
    pool_factor: usize,
) -> Result<SpikeTensor> {
    if !(bin_ms > 0.0) || !bin_ms.is_finite() {
        return Err(Error::Data(format!("bin width must be positive, got {bin_ms}")));
    }
    if pool_factor == 0 || !raw_channels.is_multiple_of(pool_factor) {
        return Err(Error::Data(format!(
            "pool factor {pool_factor} does not divide {raw_channels} channels"
        )));
    }
    for s in streams {
        s.validate(raw_channels)?;
    }
    let channels = raw_channels / pool_factor;
    let lengths: Vec<usize> = streams.iter().map(|s| bins_needed(s, bin_ms)).collect();
    let t_len = lengths.iter().copied().max().unwrap_or(0).max(1);
    let bin_us = bin_ms * 1000.0;
    let mut data = Array3::zeros((streams.len(), t_len, channels));
    for (b, s) in streams.iter().enumerate() {
        for &(t, c) in &s.events {
            let bin = (t as f64 / bin_us).floor() as usize;
            data[[b, bin, c as usize / pool_factor]] = 1.0;
        }
    }
    let meta = SpikeMeta {
        bin_ms,
        channels,
        class_names: Vec::new(),
        lengths,
    };
    SpikeTensor::new(data, streams.iter().map(|s| s.label).collect(), meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_two_samples() {
        let ev = "0,1\n1500,3\n\n# comment\n10,0\n";
        let s = parse_events(ev, "2\n0\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].events, vec![(0, 1), (1500, 3)]);
        assert_eq!(s[1].label, 0);
        assert!(parse_events(ev, "1\n").is_err());
        assert!(parse_events("1;2\n", "0\n").is_err());
    }

    #[test]
    fn empty_stream_is_zero() {
        let t = bin_events(&[EventStream::default()], 10, 4.0, 1).unwrap();
        assert!(t.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pooling_700_to_140() {
        let s = EventStream {
            events: vec![(0, 0), (10, 699)],
            label: 0,
        };
        let t = bin_events(&[s], 700, 4.0, 5).unwrap();
        assert_eq!(t.channels(), 140);
        assert_eq!(t.data()[[0, 0, 139]], 1.0);
    }

    #[test]
    fn same_bin_is_or() {
        let s = EventStream {
            events: vec![(100, 2), (3900, 3), (4000, 2)],
            label: 0,
        };
        let t = bin_events(&[s], 4, 4.0, 2).unwrap();
        assert_eq!(t.timesteps(), 2);
        assert_eq!(t.data()[[0, 0, 1]], 1.0);
        assert_eq!(t.data()[[0, 1, 1]], 1.0);
        assert_eq!(t.data().sum(), 2.0);
    }

    #[test]
    fn out_of_range_channel_and_order() {
        let bad = EventStream {
            events: vec![(0, 10)],
            label: 0,
        };
        assert!(matches!(bin_events(&[bad], 10, 1.0, 1), Err(Error::Data(_))));
        let unordered = EventStream {
            events: vec![(5, 0), (1, 0)],
            label: 0,
        };
        assert!(bin_events(&[unordered], 10, 1.0, 1).is_err());
    }
}
