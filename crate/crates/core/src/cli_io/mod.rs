//! Calibration CSV ingestion, model persistence and the command-line surface.

pub mod commands;
pub mod model_file;
pub mod table;

pub use commands::{exit_code, main_with_args, run, Cli, CliError};
pub use model_file::{load_model, model_from_json, model_to_json, save_model, ModelFile, ParametricSpec};
pub use table::{binary_labels, ScoreTable};
