//! Layered tissue-equivalent-circuit model of a galvanic-coupled intra-body
//! channel.
//!
//! The forearm is represented as stacked tissue slabs (skin, fat, muscle,
//! cortical bone), each reduced to a lumped network of direct, longitudinal,
//! cross and transverse impedances. Complex nodal analysis of that network
//! gives the voltage transfer between a transmitter and a receiver electrode
//! pair placed on the skin or in the muscle.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod impedance;
pub mod linalg;
pub mod network;
pub mod output;
pub mod safety;
pub mod sweeps;
pub mod tissue;

pub use error::{Error, Result};
pub use impedance::{ChannelGeometry, ElectrodeConfig};
pub use network::{channel_gain, ChannelPath, GainPoint, TecNetwork};
pub use sweeps::{Scenario, SweepParam, SweepResult, SweepSpec};
pub use tissue::{DispersionParams, TissueLayer, TissueName, TissueTable};
