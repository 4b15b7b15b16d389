//! Optimisation: loss, Adam, learning-rate schedules, checkpoints, the
//! training log and the epoch loop.

mod adam;
mod checkpoint;
mod log;
mod loss;
mod schedule;
mod trainer;

pub use adam::{Adam, GroupRates};
pub use checkpoint::{
    network_tensors, restore_network, to_array, Checkpoint, NamedTensor, TensorData, SLCK_MAGIC, SLCK_VERSION,
};
pub use log::{append_record, parse_log, LogRecord};
pub use loss::{correct, cross_entropy, predictions};
pub use schedule::{ScheduleKind, ScheduleSpec, Scheduler};
pub use trainer::{evaluate, load_model, train, EvalReport, TrainOutcome};
