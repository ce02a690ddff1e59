use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::eval::ManeuverClass;
use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Trajectory indices assigned to each side of a split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified train/test split at trajectory granularity.
///
/// Within each label, `round(ratio * count)` trajectories go to training.
/// Labels that do not occur are skipped; a label with a single trajectory
/// cannot be stratified.
pub fn split_dataset(labels: &[ManeuverClass], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut split = DatasetSplit { train: Vec::new(), test: Vec::new() };
    for class in [ManeuverClass::Normal, ManeuverClass::Dynamic] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        match members.len() {
            0 => continue,
            1 => return Err(Error::Stratification { label: class.as_str(), count: 1 }),
            _ => {}
        }
        members.shuffle(&mut rng);
        let n_train = libm::round(ratio * members.len() as f64) as usize;
        split.train.extend_from_slice(&members[..n_train]);
        split.test.extend_from_slice(&members[n_train..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}
