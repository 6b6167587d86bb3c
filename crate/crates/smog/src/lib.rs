//! Everything around [`smog_core`] that touches the outside world: the
//! interchange file formats, model persistence, ESRI ASCII grid export,
//! synthetic data generation, threaded drivers, and the `smog` command-line
//! interface.

pub mod ascii_grid;
pub mod cli;
pub mod formats;
pub mod manifest;
pub mod model_file;
pub mod parallel;
pub mod sidecar;
pub mod synth;
