// SPDX-License-Identifier: Apache-2.0

use super::EngineError;
use crate::netlist::DEFAULT_CNODE_FF;
use crate::units::{parse_quantity, parse_time_ps, Quantity};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub vdd: f64,
    pub duration_ps: u64,
    /// Delays are rounded to whole multiples of this.
    pub resolution_ps: u64,
    /// On resistance at W = L; scaled by L/W per device.
    pub r_on_nmos: f64,
    pub r_on_pmos: f64,
    pub cnode_default_ff: f64,
    /// Recorded, not used by the engine.
    pub temperature_c: f64,
    /// Evaluations of one component allowed between two stimulus batches.
    pub oscillation_bound: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            vdd: 1.8,
            duration_ps: 120_000,
            resolution_ps: 1,
            r_on_nmos: 10_000.0,
            r_on_pmos: 20_000.0,
            cnode_default_ff: DEFAULT_CNODE_FF,
            temperature_c: 27.0,
            oscillation_bound: 1000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |key: &str, reason: &str| {
            Err(EngineError::InvalidConfig {
                key: key.to_string(),
                reason: reason.to_string(),
            })
        };
        if !(self.vdd > 0.0 && self.vdd.is_finite()) {
            return bad("vdd", "must be positive");
        }
        if self.duration_ps == 0 {
            return bad("duration", "must be positive");
        }
        if self.resolution_ps == 0 {
            return bad("resolution", "must be positive");
        }
        if !(self.r_on_nmos > 0.0 && self.r_on_nmos.is_finite()) {
            return bad("r_on_nmos", "must be positive");
        }
        if !(self.r_on_pmos > 0.0 && self.r_on_pmos.is_finite()) {
            return bad("r_on_pmos", "must be positive");
        }
        if !(self.cnode_default_ff >= 0.0 && self.cnode_default_ff.is_finite()) {
            return bad("cnode_default_fF", "must be non-negative");
        }
        if !self.temperature_c.is_finite() {
            return bad("temperature", "must be finite");
        }
        if self.oscillation_bound == 0 {
            return bad("oscillation_bound", "must be positive");
        }
        Ok(())
    }
}

/// Parse `key = value` lines over the defaults. `#` starts a comment.
/// Recognized keys: `vdd`, `duration`, `resolution`, `r_on_nmos`,
/// `r_on_pmos`, `cnode_default_fF`, `temperature`, `oscillation_bound`.
pub fn parse_config(text: &str) -> Result<SimConfig, EngineError> {
    let mut cfg = SimConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| EngineError::ConfigSyntax {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax("expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(syntax(format!("missing value for `{key}`")));
        }
        let quantity = |kind| parse_quantity(value, kind).map_err(|e| syntax(e.to_string()));
        match key.to_ascii_lowercase().as_str() {
            "vdd" => cfg.vdd = quantity(Quantity::Voltage)?,
            "duration" => cfg.duration_ps = parse_time_ps(value).map_err(|e| syntax(e.to_string()))?,
            "resolution" => cfg.resolution_ps = parse_time_ps(value).map_err(|e| syntax(e.to_string()))?,
            "r_on_nmos" => cfg.r_on_nmos = quantity(Quantity::Resistance)?,
            "r_on_pmos" => cfg.r_on_pmos = quantity(Quantity::Resistance)?,
            "cnode_default_ff" => {
                cfg.cnode_default_ff = match value.parse::<f64>() {
                    Ok(v) => v,
                    Err(_) => quantity(Quantity::Capacitance)?,
                }
            }
            "temperature" => cfg.temperature_c = quantity(Quantity::Plain)?,
            "oscillation_bound" => {
                cfg.oscillation_bound = value
                    .parse()
                    .map_err(|_| syntax(format!("`{value}` is not a count")))?
            }
            other => return Err(syntax(format!("unknown key `{other}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
