//! Exact stochastic-map machinery for finite distributed systems: glued
//! mechanisms, qualia, effective information, and entanglement.

pub mod automaton;
pub mod cli;
pub mod document;
pub mod entangle;
pub mod error;
pub mod lattice;
pub mod measure;
pub mod oracle;
pub mod rational;
pub mod space;
pub mod stoch;
pub mod system;
pub mod table;

pub use entangle::{entanglement, EntanglementReport, Partition};
pub use error::{Error, Result};
pub use lattice::{build_quale, glue_mechanism, Quale, Section, Subsystem};
pub use measure::{effective_information, measure, Context, MeasurementResult};
pub use rational::Rational;
pub use space::{Alphabet, Factor, ProductSpace};
pub use stoch::{compose, dual, kl_divergence, projection, tensor, Distribution, Divergence, StochasticMatrix};
pub use system::SystemSpec;
pub use table::{lift_function, FunctionTable};
