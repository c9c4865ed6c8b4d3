//! Simulation and control-policy library for a cognitive virtual network
//! operator (C-MVNO) that acquires spectrum per time slot through opportunistic
//! sensing and exclusive leasing, prices packet transmissions dynamically, and
//! allocates downlink power by waterfilling.
//!
//! The controller is a drift-plus-penalty policy: each slot it solves a revenue
//! maximization (price and admission) and a cost minimization (sensing
//! technology, channel selection, power allocation) against the current packet
//! backlog and per-channel collision counters. The tradeoff parameter `V`
//! steers profit optimality against queueing delay.
//!
//! Modules:
//! - [`env`] — exogenous processes of one slot: primary-user occupancy,
//!   channel gains, leasing price, market state, imperfect sensing, arrivals.
//! - [`demand`] — expected-demand families and the per-slot pricing problem.
//! - [`power`] — waterfilling power allocation and multi-queue channel
//!   assignment.
//! - [`selection`] — virtual costs/gains and threshold channel selection with
//!   sensing-technology search.
//! - [`controller`] — one-slot orchestration for the single-queue and
//!   multi-queue policies, queue updates, profit accounting, bound monitors.
//! - [`oracle`] — independent brute-force references used by tests.
//! - [`config`] — experiment configuration, presets, validation.
//! - [`harness`] — replicated experiment runner with CSV reports.

pub mod config;
pub mod controller;
pub mod demand;
pub mod env;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod power;
pub mod rng;
pub mod selection;
pub mod stats;

pub use error::{Result, SimError};
