//! Frame and stack types for optical-flow observations.

use ndcompute::Tensor;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial resolution of every flow grid.
pub const GRID: usize = 64;
pub const GRID_LEN: usize = GRID * GRID;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Stable,
    Unstable,
}

impl ClassLabel {
    pub fn dir_name(self) -> &'static str {
        match self {
            ClassLabel::Stable => "stable",
            ClassLabel::Unstable => "unstable",
        }
    }

    /// 0 for stable, 1 for unstable; the evaluation label convention.
    pub fn as_u8(self) -> u8 {
        match self {
            ClassLabel::Stable => 0,
            ClassLabel::Unstable => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRole {
    Train,
    Test,
}

/// One optical-flow observation: paired horizontal and vertical motion
/// grids in pixels per sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowFrame {
    pub horizontal: Vec<f64>,
    pub vertical: Vec<f64>,
    /// Global sample index in (day, frame) order.
    pub timestamp: usize,
    /// Signed day relative to the removal event; never 0.
    pub day_label: i32,
}

impl FlowFrame {
    pub fn new(horizontal: Vec<f64>, vertical: Vec<f64>, timestamp: usize, day_label: i32) -> Result<Self> {
        if horizontal.len() != GRID_LEN || vertical.len() != GRID_LEN {
            return Err(Error::Validation(format!(
                "flow grids must be {GRID}x{GRID}, got {} and {} elements",
                horizontal.len(),
                vertical.len()
            )));
        }
        check_day_label(day_label)?;
        Ok(FlowFrame {
            horizontal,
            vertical,
            timestamp,
            day_label,
        })
    }
}

pub fn check_day_label(day_label: i32) -> Result<()> {
    if day_label == 0 {
        return Err(Error::Validation(
            "day label 0 is reserved for the removal instant and cannot label samples".into(),
        ));
    }
    Ok(())
}

/// m consecutive frames plus the normalized tensor view used as model
/// input, shaped `[64, 64, 2m]` with per-frame (h, v) channel pairs.
#[derive(Debug, Clone)]
pub struct FlowStack {
    pub frames: Vec<FlowFrame>,
    pub tensor: Tensor,
    pub class_label: ClassLabel,
    pub day_label: i32,
    pub split_role: SplitRole,
}

impl FlowStack {
    pub fn m(&self) -> usize {
        self.frames.len()
    }
}

/// Directory name for a day, e.g. `D-2` or `D+11`.
pub fn day_dir_name(day_label: i32) -> String {
    if day_label < 0 {
        format!("D{day_label}")
    } else {
        format!("D+{day_label}")
    }
}

pub fn parse_day_dir(name: &str) -> Option<i32> {
    let rest = name.strip_prefix('D')?;
    let value: i32 = rest.strip_prefix('+').unwrap_or(rest).parse().ok()?;
    if value == 0 {
        None
    } else {
        Some(value)
    }
}
