//! Distributed single-winner voting.
//!
//! Agents are split into districts; each district elects a representative
//! with an in-district rule, and an over-districts rule picks the winner
//! among the representatives. This crate evaluates such mechanisms against
//! the utilitarian optimum (distortion), builds the adversarial instances
//! that lower-bound them, and runs batch experiments on synthetic and
//! ratings data.
//!
//! ```
//! use distvote::adversarial::gen_sqrt_lb;
//! use distvote::analysis::distortion_exact;
//! use distvote::mechanism::MechanismSpec;
//!
//! let instance = gen_sqrt_lb(4, 1, 6).unwrap();
//! let spec: MechanismSpec = "uniform-of-range".parse().unwrap();
//! let report = distortion_exact(&instance, &spec).unwrap();
//! assert!((report.ratio - 2.0).abs() < 1e-9);
//! ```

pub mod adversarial;
pub mod analysis;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod io;
pub mod lottery;
pub mod manipulation;
pub mod mechanism;
pub mod ratings;
pub mod rules;

pub use error::{Error, Result};
pub use instance::{Districts, Instance, OrdinalProfile, TieOrder};
pub use lottery::Lottery;
pub use mechanism::{MechanismSpec, OverRule};
pub use rules::InRule;
