pub mod channel;
pub mod cli;
pub mod clustering;
pub mod config;
pub mod deployment;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod precoding;
pub mod rng;
pub mod sensing;
pub mod stats;
