//! Cost modeling for 2.5D-integrated systems-in-package.
//!
//! `sipcost` prices a multi-chiplet package end to end: wafer-built dies
//! with negative-binomial defect yield, silicon or organic interposers,
//! per-die bonding with compounding assembly yield, and a substrate cost
//! plane fitted to sampled package quotes. On top of the point model sit
//! a design-space explorer (parameter sweeps, chiplet-vs-monolithic
//! switching points) and two ready-made studies: attaching HBM to organic
//! interposers and splitting large SoCs into chiplets that keep I/O on a
//! cheaper node.
//!
//! Run the examples to see each capability:
//!
//! ```text
//! cargo run --example cost_report        # one system, full cost breakdown
//! cargo run --example yield_and_dicing   # yield curves and dies-per-wafer
//! cargo run --example package_regression # substrate cost plane from samples
//! cargo run --example hbm_overhead       # organic HBM integration study
//! cargo run --example hybrid_partition   # chiplet partitioning study
//! cargo run --example switching_points   # when chiplets beat monolithic
//! cargo run --example parameter_sweep    # sweep any dataset field
//! cargo run --example custom_dataset     # bring your own technology data
//! ```
//!
//! The same functionality is exposed as a CLI (`sipcost`), suitable for
//! scripting; see the README for subcommands and file formats.

pub mod assembly;
pub mod cli;
pub mod diecost;
pub mod error;
pub mod explorer;
pub mod interposer;
pub mod package;
pub mod sysmodel;
pub mod techdb;
pub mod yieldcore;

pub use error::Error;
pub use techdb::TechDatabase;

/// Shorthand result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
