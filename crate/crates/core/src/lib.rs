// SPDX-License-Identifier: Apache-2.0

//! Switch-level CMOS simulation and dual-edge-triggered flip-flop
//! characterization.
//!
//! The crate is organized bottom-up:
//!
//! - [`netlist`]: the transistor netlist model and its card format.
//! - [`engine`]: event-driven switch-level simulation, stimulus and config
//!   files, traces and VCD output.
//! - [`cells`]: built-in transistor cells, including the dual-edge static
//!   D flip-flop, and behavioral golden models.
//! - [`metrics`]: power, clk-to-Q delay, power-delay product and comparison
//!   tables.
//! - [`harness`]: built-in testbenches, oracle verification and the
//!   characterization pipeline.

pub mod cells;
pub mod engine;
pub mod harness;
pub mod metrics;
pub mod netlist;
pub mod units;
