//! Uplink outage simulator for centralized and distributed massive MIMO
//! serving machine-type devices in a square indoor factory hall.
//!
//! The pipeline is: [`geometry`] places the antennas, [`traffic`] draws the
//! active devices, [`channel`] turns positions into a channel matrix,
//! [`receiver`] combines and decodes, and [`montecarlo`] repeats all of it
//! to estimate the outage probability. [`cli`] wraps the engine in a
//! config-file driven command line tool.

pub mod channel;
pub mod cli;
pub mod geometry;
pub mod montecarlo;
pub mod receiver;
pub mod stream;
pub mod traffic;

pub use channel::{ChannelMatrix, LargeScaleMap, RadioConfig};
pub use geometry::{DeploymentKind, DeploymentSpec, Position, SiteConfig};
pub use montecarlo::{run_point, run_sweep, OutageResult, SimConfig, SweepAxis, SweepPlan, TrafficKind};
pub use receiver::{Combiner, CombinerKind, SinrReport};
pub use stream::{derive_stream, RandomStream};
pub use traffic::{AlarmEvent, TrafficMode, TrafficModel};
