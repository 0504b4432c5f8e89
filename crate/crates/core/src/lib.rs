//! Deployment planning for streetside parking sensor networks.
//!
//! Given a street-parking graph, pick the intersections that get a
//! full-function device (router or gateway), split every parking segment's
//! sensors between the devices at its ends, and build the multi-hop backbone
//! that carries their traffic to the gateways.

pub mod backbone;
pub mod cli;
pub mod coverage;
pub mod family;
pub mod ilp;
pub mod pareto;
pub mod plan;
pub mod streetgraph;
