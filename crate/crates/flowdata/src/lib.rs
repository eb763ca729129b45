//! Optical-flow dataset model: the canonical binary layout, ingestion,
//! normalization, stable-class splits, the optical-flow-weight signal,
//! and a synthetic colony simulator for desk-scale verification.

pub mod dataset;
mod error;
pub mod format;
mod frame;
pub mod manifest;
pub mod normalize;
pub mod sim;
pub mod weight;

pub use dataset::{stack_count, Dataset, RawStack, SplitView};
pub use error::{Error, Result};
pub use frame::{
    check_day_label, day_dir_name, parse_day_dir, ClassLabel, FlowFrame, FlowStack, SplitRole,
    GRID, GRID_LEN,
};
pub use manifest::{DatasetManifest, NormConstants, SplitDef, StackRef, SPLIT_COUNT};
pub use normalize::{denormalize_stack, normalize_stack};
pub use sim::{default_day_schedule, materialize, simulate_day, DaySpec, SimScenario};
pub use weight::{flow_weight, flow_weight_series, SeriesPoint};
