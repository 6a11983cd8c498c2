//! Full-duplex multi-antenna relaying for cooperative NOMA with randomly
//! placed users.
//!
//! A base station serves a near user in a disc of radius R₁ directly and a
//! far user in the ring R₂ < r < R₃ through one of K full-duplex relays on
//! the circle of radius R₁. The relay receives with MRC and transmits with
//! zero-forcing against its own loop interference.
//!
//! - [`mc`] estimates outage probabilities by Monte Carlo.
//! - [`analytic`] evaluates the corresponding outage formulas.

pub mod analytic;
pub mod beamform;
pub mod channel;
mod error;
pub mod geometry;
pub mod link;
pub mod mc;
pub mod model;

pub use error::{Error, Result};
pub use geometry::{Point2D, Strategy, Topology};
pub use mc::{Metric, OutageEstimate, RunOptions};
pub use model::{DerivedScalars, FarDistanceModel, SystemParams};
