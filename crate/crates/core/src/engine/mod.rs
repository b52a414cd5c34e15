// SPDX-License-Identifier: Apache-2.0

//! Event-driven switch-level simulation.
//!
//! A flat netlist is split into channel-connected components. Each component
//! is re-solved whenever one of its gate or boundary nets changes, and every
//! member net whose resolved state differs from its current state gets an
//! update scheduled after its RC delay. A later re-solve that disagrees with
//! a pending update cancels it (inertial delay).

mod config;
mod partition;
mod sim;
mod signal;
mod solve;
mod stimulus;
mod trace;
mod vcd;

pub use config::{parse_config, SimConfig};
pub use partition::{is_boundary, partition_components, Component, Partition};
pub use signal::{LogicValue, SignalState, Strength};
pub use sim::{delay_ps, run, run_with_stats, RunStats};
pub use solve::{conduction, solve_component, Conduction, Solution};
pub use stimulus::{parse_stimulus, ClockSpec, StimEvent, Stimulus};
pub use trace::{Trace, Transition};
pub use vcd::{vcd_excerpt, vcd_string, write_vcd};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("component with {nets} nets did not settle within {sweeps} sweeps")]
    NoConvergence { nets: usize, sweeps: usize },
    #[error("input `{net}` has no stimulus")]
    UncoveredInput { net: String },
    #[error("component {component} ({first_net}) evaluated {evaluations} times without new stimulus at {time_ps} ps")]
    OscillationDetected {
        component: usize,
        first_net: String,
        evaluations: usize,
        time_ps: u64,
    },
    #[error("unknown net `{net}`")]
    UnknownNet { net: String },
    #[error("net `{net}` is not a primary input")]
    NotAnInput { net: String },
    #[error("net `{net}` has both a clock and explicit events")]
    ConflictingStimulus { net: String },
    #[error("events for `{net}` go back in time at {time_ps} ps")]
    NonMonotonicStimulus { net: String, time_ps: u64 },
    #[error("stimulus at {time_ps} ps is past the {duration_ps} ps duration")]
    StimulusAfterDuration { time_ps: u64, duration_ps: u64 },
    #[error("bad clock on `{net}`: {reason}")]
    InvalidClock { net: String, reason: String },
    #[error("stimulus line {line}: {message}")]
    StimulusSyntax { line: usize, message: String },
    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },
    #[error("invalid config `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },
    #[error("netlist must be flattened before simulation")]
    NotFlat,
}
