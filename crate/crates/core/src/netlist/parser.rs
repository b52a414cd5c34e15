// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use super::{
    canonical_net_name, flatten, sizing_ok, DeviceKind, Drive, Instance, NetId, NetKind, Netlist,
    NetlistError, Subcircuit, Transistor, DEFAULT_CNODE_FF,
};
use crate::units::{parse_quantity, Quantity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseOptions {
    /// Enforce W in [600, 1200] nm and L = 180 nm on every device.
    pub check_sizing: bool,
    pub cnode_default_ff: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            check_sizing: false,
            cnode_default_ff: DEFAULT_CNODE_FF,
        }
    }
}

/// Parse with default options (no sizing validation).
pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    parse_netlist_with(text, ParseOptions::default())
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

struct OpenSubckt {
    name: String,
    line: usize,
    ports: Vec<NetId>,
    body: Netlist,
    scope: Scope,
}

/// Per-scope bookkeeping that only the parser needs.
#[derive(Default)]
struct Scope {
    device_names: BTreeSet<String>,
    instance_lines: Vec<usize>,
    /// Nets referenced by any card in this scope.
    used: BTreeSet<NetId>,
}

struct Parser {
    opts: ParseOptions,
    top: Netlist,
    top_scope: Scope,
    open: Option<OpenSubckt>,
    subckt_lines: BTreeMap<String, usize>,
    /// Instance lines of finished subcircuit bodies, by subcircuit name.
    body_instance_lines: BTreeMap<String, Vec<usize>>,
    port_decls: Vec<(usize, NetId)>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

impl Parser {
    fn current(&mut self) -> (&mut Netlist, &mut Scope) {
        match self.open.as_mut() {
            Some(open) => (&mut open.body, &mut open.scope),
            None => (&mut self.top, &mut self.top_scope),
        }
    }

    fn card(&mut self, line: usize, toks: &[Token<'_>]) -> Result<(), NetlistError> {
        let head = toks[0].text;
        let lower = head.to_lowercase();
        if let Some(directive) = lower.strip_prefix('.') {
            return self.directive(line, directive, toks);
        }
        match lower.chars().next() {
            Some('m') => self.device(line, toks),
            Some('c') => self.capacitor(line, toks),
            Some('x') => self.instance(line, toks),
            _ => Err(NetlistError::UnknownCard {
                line,
                card: head.to_string(),
            }),
        }
    }

    fn claim_name(&mut self, line: usize, name: &str) -> Result<(), NetlistError> {
        let (_, scope) = self.current();
        if !scope.device_names.insert(name.to_lowercase()) {
            return Err(NetlistError::DuplicateName {
                line,
                name: name.to_string(),
            });
        }
        Ok(())
    }

    fn device(&mut self, line: usize, toks: &[Token<'_>]) -> Result<(), NetlistError> {
        if toks.len() < 6 {
            let col = toks.last().map(|t| t.column + t.text.len()).unwrap_or(1);
            return Err(syntax(
                line,
                col,
                "device card needs <drain> <gate> <source> <body> <NMOS|PMOS>",
            ));
        }
        let kind = match toks[5].text.to_uppercase().as_str() {
            "NMOS" => DeviceKind::Nmos,
            "PMOS" => DeviceKind::Pmos,
            other => {
                return Err(syntax(
                    line,
                    toks[5].column,
                    format!("expected NMOS or PMOS, found `{other}`"),
                ))
            }
        };
        let mut width = None;
        let mut length = None;
        let mut drive = Drive::Strong;
        for tok in &toks[6..] {
            let upper = tok.text.to_uppercase();
            if upper == "WEAK" {
                drive = Drive::Weak;
                continue;
            }
            let Some((key, value)) = tok.text.split_once('=') else {
                return Err(syntax(line, tok.column, format!("unexpected token `{}`", tok.text)));
            };
            let parsed = parse_quantity(value, Quantity::Length)
                .map_err(|e| syntax(line, tok.column + key.len() + 1, e.to_string()))?;
            if parsed <= 0.0 {
                return Err(syntax(line, tok.column, "device dimensions must be positive"));
            }
            let slot = match key.to_uppercase().as_str() {
                "W" => &mut width,
                "L" => &mut length,
                _ => return Err(syntax(line, tok.column, format!("unknown parameter `{key}`"))),
            };
            if slot.replace(parsed).is_some() {
                return Err(syntax(line, tok.column, format!("parameter `{key}` given twice")));
            }
        }
        let end_col = toks.last().map(|t| t.column).unwrap_or(1);
        let width_nm = width.ok_or_else(|| syntax(line, end_col, "missing W="))?;
        let length_nm = length.ok_or_else(|| syntax(line, end_col, "missing L="))?;
        let name = toks[0].text.to_string();
        if self.opts.check_sizing && !sizing_ok(width_nm, length_nm) {
            return Err(NetlistError::BadSizing {
                line,
                device: name,
                width_nm,
                length_nm,
            });
        }
        self.claim_name(line, &name)?;
        let (n, scope) = self.current();
        let [drain, gate, source, body] = [1, 2, 3, 4].map(|i| n.net(toks[i].text));
        scope.used.extend([drain, gate, source, body]);
        n.add_transistor(Transistor {
            name,
            kind,
            drain,
            gate,
            source,
            body,
            width_nm,
            length_nm,
            drive,
        });
        Ok(())
    }

    fn capacitor(&mut self, line: usize, toks: &[Token<'_>]) -> Result<(), NetlistError> {
        if toks.len() != 4 {
            let col = toks.get(4).map(|t| t.column).unwrap_or(1);
            return Err(syntax(line, col, "capacitor card is `C<name> <net_a> <net_b> <value>`"));
        }
        let value = parse_quantity(toks[3].text, Quantity::Capacitance)
            .map_err(|e| syntax(line, toks[3].column, e.to_string()))?;
        if value < 0.0 {
            return Err(syntax(line, toks[3].column, "capacitance must be non-negative"));
        }
        self.claim_name(line, toks[0].text)?;
        let (n, scope) = self.current();
        let a = n.net(toks[1].text);
        let b = n.net(toks[2].text);
        scope.used.extend([a, b]);
        n.add_capacitor(toks[0].text, a, b, value);
        Ok(())
    }

    fn instance(&mut self, line: usize, toks: &[Token<'_>]) -> Result<(), NetlistError> {
        if toks.len() < 2 {
            return Err(syntax(line, toks[0].column, "instance card needs a subcircuit name"));
        }
        self.claim_name(line, toks[0].text)?;
        let (n, scope) = self.current();
        let connections: Vec<NetId> = toks[1..toks.len() - 1].iter().map(|t| n.net(t.text)).collect();
        scope.used.extend(connections.iter().copied());
        scope.instance_lines.push(line);
        n.instances.push(Instance {
            name: toks[0].text.to_string(),
            subckt: canonical_net_name(toks[toks.len() - 1].text),
            connections,
        });
        Ok(())
    }

    fn directive(&mut self, line: usize, directive: &str, toks: &[Token<'_>]) -> Result<(), NetlistError> {
        match directive {
            "subckt" => {
                if self.open.is_some() {
                    return Err(syntax(line, toks[0].column, "nested .subckt definitions are not supported"));
                }
                let name_tok = toks
                    .get(1)
                    .ok_or_else(|| syntax(line, toks[0].column, ".subckt needs a name"))?;
                let name = canonical_net_name(name_tok.text);
                if self.subckt_lines.contains_key(&name) {
                    return Err(NetlistError::DuplicateName {
                        line,
                        name: name_tok.text.to_string(),
                    });
                }
                let mut body = Netlist::new();
                let mut ports = Vec::new();
                for tok in &toks[2..] {
                    let id = body.net(tok.text);
                    if body.kind(id).is_rail() || ports.contains(&id) {
                        return Err(syntax(line, tok.column, format!("invalid port `{}`", tok.text)));
                    }
                    ports.push(id);
                }
                self.subckt_lines.insert(name.clone(), line);
                self.open = Some(OpenSubckt {
                    name,
                    line,
                    ports,
                    body,
                    scope: Scope::default(),
                });
                Ok(())
            }
            "ends" => {
                let Some(mut open) = self.open.take() else {
                    return Err(syntax(line, toks[0].column, ".ends without .subckt"));
                };
                if let Some(tok) = toks.get(1) {
                    if canonical_net_name(tok.text) != open.name {
                        return Err(syntax(
                            line,
                            tok.column,
                            format!(".ends `{}` closes `{}`", tok.text, open.name),
                        ));
                    }
                }
                for port in &open.ports {
                    if !open.scope.used.contains(port) {
                        return Err(NetlistError::DanglingNet {
                            line: open.line,
                            net: open.body.net_name(*port).to_string(),
                            context: format!("port of subcircuit `{}` is never connected", open.name),
                        });
                    }
                }
                open.body.recompute_capacitance(self.opts.cnode_default_ff);
                self.body_instance_lines
                    .insert(open.name.clone(), open.scope.instance_lines);
                self.top.subcircuits.push(Subcircuit {
                    name: open.name,
                    ports: open.ports,
                    body: open.body,
                });
                Ok(())
            }
            "input" | "output" => {
                if self.open.is_some() {
                    return Err(syntax(line, toks[0].column, "port declarations are only legal at top level"));
                }
                let kind = if directive == "input" {
                    NetKind::Input
                } else {
                    NetKind::Output
                };
                for tok in &toks[1..] {
                    let id = self.top.net(tok.text);
                    if self.top.kind(id).is_rail() {
                        return Err(syntax(line, tok.column, "supply rails cannot be declared as ports"));
                    }
                    self.top.declare(id, kind);
                    self.port_decls.push((line, id));
                }
                Ok(())
            }
            "end" => Ok(()),
            _ => Err(NetlistError::UnknownCard {
                line,
                card: toks[0].text.to_string(),
            }),
        }
    }

    fn finish(mut self, last_line: usize) -> Result<Netlist, NetlistError> {
        if let Some(open) = &self.open {
            return Err(syntax(open.line, 1, format!("missing .ends for `{}` (file ends at line {last_line})", open.name)));
        }
        for (line, id) in &self.port_decls {
            if !self.top_scope.used.contains(id) {
                return Err(NetlistError::DanglingNet {
                    line: *line,
                    net: self.top.net_name(*id).to_string(),
                    context: "declared port is not connected to any device".into(),
                });
            }
        }
        let arity: BTreeMap<String, usize> = self
            .top
            .subcircuits
            .iter()
            .map(|s| (s.name.clone(), s.ports.len()))
            .collect();
        let check = |scope: &Netlist, lines: &[usize]| -> Result<(), NetlistError> {
            for (inst, line) in scope.instances.iter().zip(lines) {
                let Some(expected) = arity.get(&inst.subckt) else {
                    return Err(NetlistError::UnknownSubcircuit {
                        line: *line,
                        name: inst.subckt.clone(),
                    });
                };
                if *expected != inst.connections.len() {
                    return Err(NetlistError::ArityMismatch {
                        line: *line,
                        instance: inst.name.clone(),
                        expected: *expected,
                        found: inst.connections.len(),
                    });
                }
            }
            Ok(())
        };
        check(&self.top, &self.top_scope.instance_lines)?;
        for sub in &self.top.subcircuits {
            check(&sub.body, &self.body_instance_lines[&sub.name])?;
        }
        if let Err(name) = flatten::check_recursion(&self.top) {
            return Err(NetlistError::RecursiveSubcircuit {
                line: self.subckt_lines.get(&name).copied().unwrap_or(0),
                name,
            });
        }
        self.top.classify(self.opts.cnode_default_ff);
        Ok(self.top)
    }
}

/// Parse the card format into a validated netlist.
pub fn parse_netlist_with(text: &str, opts: ParseOptions) -> Result<Netlist, NetlistError> {
    let mut parser = Parser {
        opts,
        top: Netlist::new(),
        top_scope: Scope::default(),
        open: None,
        subckt_lines: BTreeMap::new(),
        body_instance_lines: BTreeMap::new(),
        port_decls: Vec::new(),
    };
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last = line;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let toks = tokenize(raw);
        parser.card(line, &toks)?;
    }
    parser.finish(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INVERTER: &str = "M1 q d vdd vdd PMOS W=600n L=180n\nM2 q d gnd gnd NMOS W=600n L=180n";

    #[test]
    fn empty_input_has_only_rails() {
        let n = parse_netlist("").unwrap();
        assert!(n.transistors.is_empty());
        assert!(n.capacitors.is_empty());
        let names: Vec<_> = n.nets.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["vdd", "gnd"]);
    }

    #[test]
    fn two_card_inverter() {
        let n = parse_netlist(INVERTER).unwrap();
        assert_eq!(n.transistors.len(), 2);
        let mut names: Vec<_> = n.nets.iter().map(|n| n.name.clone()).collect();
        names.sort();
        assert_eq!(names, ["d", "gnd", "q", "vdd"]);
        let p = &n.transistors[0];
        assert_eq!(p.kind, DeviceKind::Pmos);
        assert_eq!(n.net_name(p.drain), "q");
        assert_eq!(n.net_name(p.gate), "d");
        assert_eq!(n.net_name(p.source), "vdd");
        assert_eq!(p.width_nm, 600.0);
        assert_eq!(p.length_nm, 180.0);
    }

    #[test]
    fn sizing_validation_rejects_narrow_device() {
        let opts = ParseOptions {
            check_sizing: true,
            ..Default::default()
        };
        let err = parse_netlist_with("M1 q d vdd vdd PMOS W=300n L=180n", opts).unwrap_err();
        assert!(matches!(err, NetlistError::BadSizing { line: 1, width_nm, .. } if width_nm == 300.0));
        // Without validation the same card is legal.
        assert!(parse_netlist("M1 q d vdd vdd PMOS W=300n L=180n").is_ok());
    }

    #[test]
    fn sizing_interval_is_closed() {
        let opts = ParseOptions {
            check_sizing: true,
            ..Default::default()
        };
        for (w, ok) in [("599n", false), ("600n", true), ("1.2u", true), ("1201n", false)] {
            let text = format!("M1 q d vdd vdd PMOS W={w} L=180n");
            assert_eq!(parse_netlist_with(&text, opts).is_ok(), ok, "W={w}");
        }
        let text = "M1 q d vdd vdd PMOS W=600n L=200n";
        assert!(parse_netlist_with(text, opts).is_err());
    }

    #[test]
    fn case_insensitive_nets_and_comments() {
        let text = "* inverter\n\nM1 Q D VDD VDD pmos W=600N L=180N\n  * indented comment\nM2 q d GND gnd nmos w=600n l=180n\n";
        let n = parse_netlist(text).unwrap();
        assert_eq!(n.nets.len(), 4);
        assert_eq!(n.transistors[0].source, n.supply());
    }

    #[test]
    fn unknown_card_reports_line() {
        let err = parse_netlist("M1 q d vdd vdd PMOS W=600n L=180n\nR1 a b 1k").unwrap_err();
        assert_eq!(err, NetlistError::UnknownCard { line: 2, card: "R1".into() });
        let err = parse_netlist(".model foo nmos").unwrap_err();
        assert!(matches!(err, NetlistError::UnknownCard { line: 1, .. }));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_netlist("\nM1 q d vdd vdd XMOS W=600n L=180n").unwrap_err();
        assert!(matches!(err, NetlistError::Syntax { line: 2, column: 16, .. }), "{err:?}");
        let err = parse_netlist("M1 q d vdd vdd NMOS W=6zz L=180n").unwrap_err();
        assert!(matches!(err, NetlistError::Syntax { line: 1, column: 23, .. }), "{err:?}");
        let err = parse_netlist("M1 q d vdd vdd NMOS W=600n").unwrap_err();
        assert!(matches!(err, NetlistError::Syntax { line: 1, .. }));
        let err = parse_netlist("C1 a b").unwrap_err();
        assert!(matches!(err, NetlistError::Syntax { line: 1, .. }));
    }

    #[test]
    fn capacitor_values() {
        let n = parse_netlist("C1 q gnd 21f\nC2 a gnd 0.5p").unwrap();
        assert_eq!(n.capacitors[0].value_ff, 21.0);
        assert_eq!(n.capacitors[1].value_ff, 500.0);
    }

    #[test]
    fn weak_flag_round_trips_into_drive() {
        let n = parse_netlist("M1 q d vdd vdd PMOS W=600n L=180n WEAK").unwrap();
        assert_eq!(n.transistors[0].drive, Drive::Weak);
    }

    #[test]
    fn subcircuit_errors() {
        let rec = ".subckt a x\nXa x a\n.ends\nX1 n a\n";
        assert!(matches!(
            parse_netlist(rec).unwrap_err(),
            NetlistError::RecursiveSubcircuit { line: 1, .. }
        ));
        let mutual = ".subckt a x\nXb x b\n.ends\n.subckt b y\nXa y a\n.ends\n";
        assert!(matches!(
            parse_netlist(mutual).unwrap_err(),
            NetlistError::RecursiveSubcircuit { .. }
        ));
        let arity = ".subckt inv a y\nM1 y a vdd vdd PMOS W=600n L=180n\nM2 y a gnd gnd NMOS W=600n L=180n\n.ends\nX1 p inv\n";
        assert!(matches!(
            parse_netlist(arity).unwrap_err(),
            NetlistError::ArityMismatch { line: 5, expected: 2, found: 1, .. }
        ));
        assert!(matches!(
            parse_netlist("X1 a b nothere").unwrap_err(),
            NetlistError::UnknownSubcircuit { line: 1, .. }
        ));
        assert!(matches!(
            parse_netlist(".subckt inv a y\n").unwrap_err(),
            NetlistError::Syntax { line: 1, .. }
        ));
        assert!(matches!(parse_netlist(".ends").unwrap_err(), NetlistError::Syntax { .. }));
    }

    #[test]
    fn dangling_ports_are_rejected() {
        let text = ".subckt inv a y unused\nM1 y a vdd vdd PMOS W=600n L=180n\n.ends\n";
        assert!(matches!(
            parse_netlist(text).unwrap_err(),
            NetlistError::DanglingNet { line: 1, .. }
        ));
        assert!(matches!(
            parse_netlist(".input foo\n").unwrap_err(),
            NetlistError::DanglingNet { line: 1, .. }
        ));
    }

    #[test]
    fn duplicate_device_names() {
        let text = "M1 q d vdd vdd PMOS W=600n L=180n\nm1 q d gnd gnd NMOS W=600n L=180n";
        assert!(matches!(
            parse_netlist(text).unwrap_err(),
            NetlistError::DuplicateName { line: 2, .. }
        ));
    }

    #[test]
    fn declared_inputs_override_inference() {
        let text = ".input d\n.output q\nM1 q d vdd vdd PMOS W=600n L=180n\nM2 q d x gnd NMOS W=600n L=180n\nM3 x d gnd gnd NMOS W=600n L=180n\n";
        let n = parse_netlist(text).unwrap();
        assert_eq!(n.kind(n.find_net("d").unwrap()), NetKind::Input);
        assert_eq!(n.kind(n.find_net("q").unwrap()), NetKind::Output);
        assert_eq!(n.kind(n.find_net("x").unwrap()), NetKind::Internal);
    }
}
