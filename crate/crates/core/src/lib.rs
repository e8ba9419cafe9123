//! Population trapping in a four-level system with a vacuum-coupled doublet.
//!
//! Levels: `|0⟩` ground, `|1⟩` and `|2⟩` the excited doublet that decays to
//! `|0⟩` through a shared channel, `|3⟩` a metastable level. Two delayed
//! Gaussian pulses couple `|0⟩` to the doublet and to `|3⟩`, optionally with
//! tanh frequency chirps. The crate integrates the rotating-frame master
//! equation and reads off how much population stays trapped in the doublet.
//!
//! ```no_run
//! use trapsim::{experiments, integrator};
//!
//! let traj = integrator::integrate(&experiments::chirped()).unwrap();
//! let steady = traj.steady.unwrap();
//! println!("trapped: {:.3}", steady.doublet_population);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod drive;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod liouvillian;
pub mod model;
pub mod observables;
pub mod output;
pub mod selfcheck;

pub use config::{parse_config, serialize_config, Config, OutputFormat, OutputSettings};
pub use error::{Error, Result};
pub use experiments::{preset, sweep, Job, Preset, SweepSpec, SweepTable};
pub use integrator::{detect_steady_state, integrate, integrate_fixed_step, Trajectory};
pub use model::{DensityMatrix, DriveConfig, Scenario, SystemParams};
