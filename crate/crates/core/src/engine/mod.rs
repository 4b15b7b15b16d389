//! Reverse-mode gradients through the unrolled network.

pub mod gradcheck;
pub mod surrogate;
pub mod tape;

pub use gradcheck::{
    finite_difference_check, finite_difference_check_with, quadratic_loss, relative_error, spread_probes, GradCheckReport,
    ParamProbe, ProbeResult, REL_ERR_FLOOR,
};
pub use surrogate::{surrogate_derivative, SpikeFn, SpikeRule, SurrogateSpec};
pub use tape::{Node, Tape};
