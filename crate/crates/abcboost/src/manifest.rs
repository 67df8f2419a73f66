//! JSON record of a training run, written when the run finishes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a training command and check its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub algorithm: String,
    pub max_leaves: usize,
    pub shrinkage: f64,
    pub iterations_requested: usize,
    pub min_leaf: usize,
    pub z_max: f64,
    pub loss_stop: f64,
    pub format: String,
    pub label_column: usize,
    pub threads: usize,
    pub train: DatasetRef,
    pub test: Option<DatasetRef>,
    pub model: DatasetRef,
    pub class_labels: Vec<i64>,
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
    pub iterations_completed: usize,
    pub initial_train_loss: f64,
    pub final_train_loss: f64,
    pub final_test_errors: Option<usize>,
    pub test_rows: Option<usize>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        write_atomic(path, json.as_bytes())
    }
}
