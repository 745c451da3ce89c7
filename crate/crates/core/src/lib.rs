//! Predict the silent-data-corruption count of every executable-assertion
//! configuration of a workload from one fault-injection campaign.
//!
//! The campaign runs the workload with all assertions compiled in and
//! injects single-bit flips over the whole time × memory fault space.
//! Assertions record that they fired but do not stop the run, so each
//! experiment also yields the outcome the run would have had without them.
//! [`predict`] turns that into counts for any subset of assertions;
//! [`oracle`] measures the same counts the expensive way for validation.

pub mod campaign;
pub mod config;
pub mod error;
pub mod faultspace;
pub mod interp;
pub mod lang;
pub mod oracle;
pub mod predict;
pub mod render;
pub mod search;

pub use campaign::{run_discovery, CampaignOptions, CampaignResult, FaultRecord};
pub use config::Configuration;
pub use error::{Error, Result};
pub use interp::{golden_run, run_experiment, GoldenTrace, Mode, Outcome};
pub use lang::{parse, Program};
pub use oracle::{ground_truth, strip};
pub use predict::{predict, predict_all, Counts, PredictedCounts, TrueCounts};
