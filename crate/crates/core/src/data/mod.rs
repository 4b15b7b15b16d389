//! Spike tensors, their file format, event binning and a synthetic task.

mod events;
mod spkt;
mod synthetic;
mod tensor;

pub(crate) use spkt::Cursor;
pub use events::{bin_events, bins_needed, parse_events, EventStream};
pub use spkt::{decode_spkt, encode_spkt, load_spkt, save_spkt, SPKT_MAGIC, SPKT_VERSION};
pub use synthetic::{gen_synthetic, synth_templates, SynthSplits, SynthTaskSpec};
pub use tensor::{Dtype, SpikeMeta, SpikeTensor};
