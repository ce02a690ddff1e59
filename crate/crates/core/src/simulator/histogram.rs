use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{ReferenceFrame, SensorFrame};
use crate::{Error, Result, GRAVITY};

/// Half-width of the friction-circle grid in units of g.
pub const FRICTION_CIRCLE_LIMIT_G: f64 = 1.1;

/// Sample counts on a square (a_x/g, a_y/g) grid spanning ±1.1 g.
#[derive(Debug, Clone, PartialEq)]
pub struct FrictionCircleHistogram {
    pub bins: usize,
    /// Row-major, indexed `[ax_bin * bins + ay_bin]`.
    pub counts: Vec<u64>,
}

impl FrictionCircleHistogram {
    pub fn count(&self, ax_bin: usize, ay_bin: usize) -> u64 {
        self.counts[ax_bin * self.bins + ay_bin]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Centre of bin `i` along either axis, in g.
    pub fn bin_center_g(&self, i: usize) -> f64 {
        let width = 2.0 * FRICTION_CIRCLE_LIMIT_G / self.bins as f64;
        -FRICTION_CIRCLE_LIMIT_G + (i as f64 + 0.5) * width
    }
}

fn grid_index(accel: f64, bins: usize) -> usize {
    let unit = (accel / GRAVITY + FRICTION_CIRCLE_LIMIT_G) / (2.0 * FRICTION_CIRCLE_LIMIT_G);
    let i = libm::floor(unit * bins as f64);
    // Samples beyond the grid are counted in the edge cells.
    if i.is_nan() || i < 0.0 {
        0
    } else {
        (i as usize).min(bins - 1)
    }
}

pub fn friction_circle_histogram(frames: &[SensorFrame], bins: usize) -> Result<FrictionCircleHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    let mut counts = vec![0u64; bins * bins];
    for f in frames {
        counts[grid_index(f.a_x, bins) * bins + grid_index(f.a_y, bins)] += 1;
    }
    Ok(FrictionCircleHistogram { bins, counts })
}

/// Side-slip counts in bins of `bin_width` centred on integer multiples of
/// the width.
#[derive(Debug, Clone, PartialEq)]
pub struct SideslipHistogram {
    pub bin_width: f64,
    /// Bin index (multiple of `bin_width`) of `counts[0]`.
    pub first_index: i64,
    pub counts: Vec<u64>,
}

impl SideslipHistogram {
    pub fn bin_center(&self, i: usize) -> f64 {
        (self.first_index + i as i64) as f64 * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn sideslip_histogram(frames: &[ReferenceFrame], bin_width: f64) -> Result<SideslipHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidParameter(format!("bin width must be positive, got {bin_width}")));
    }
    let indices: Vec<i64> = frames.iter().map(|f| libm::round(f.beta / bin_width) as i64).collect();
    let (Some(&lo), Some(&hi)) = (indices.iter().min(), indices.iter().max()) else {
        return Ok(SideslipHistogram { bin_width, first_index: 0, counts: Vec::new() });
    };
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for i in indices {
        counts[(i - lo) as usize] += 1;
    }
    Ok(SideslipHistogram { bin_width, first_index: lo, counts })
}
