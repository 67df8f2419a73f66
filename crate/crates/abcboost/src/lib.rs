//! File formats, model persistence and the `abcboost` command-line tool,
//! built on [`abcboost_core`].

pub mod cli;
mod error;
pub mod io;
pub mod manifest;
pub mod persist;

pub use error::{Error, Result};
pub use io::{load_csv, load_libsvm, CsvOptions, LibsvmData};
pub use persist::{load_model, save_model};
