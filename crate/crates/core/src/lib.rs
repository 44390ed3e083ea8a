//! Entanglement percolation in planar quantum networks of pure two-qubit
//! states.
//!
//! Links carry Schmidt values ([`schmidt::SchmidtValue`]) that combine under
//! entanglement swapping and distillation. On top of that algebra the crate
//! provides threshold solving for strategy compositions ([`strategy`]),
//! lattice networks with provenance tracking ([`network`]), disordered
//! initial values ([`disorder`]), the routing heuristic ([`engine`]), the
//! integrity/connectivity metrics ([`metrics`]) and sweep drivers
//! ([`experiment`]).

pub mod disorder;
pub mod engine;
pub mod experiment;
pub mod majorization;
pub mod metrics;
pub mod network;
pub mod schmidt;
pub mod strategy;
pub mod tolerance;
