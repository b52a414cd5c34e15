// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::io::{self, Write};

use super::signal::LogicValue;
use super::trace::Trace;

const VERSION: &str = concat!("detffsim ", env!("CARGO_PKG_VERSION"));

/// Short printable identifier code for variable `i`, base 94 from `!`.
fn ident(mut i: usize) -> String {
    let mut s = String::new();
    loop {
        s.push((b'!' + (i % 94) as u8) as char);
        i /= 94;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s
}

fn timescale(trace: &Trace) -> (u64, String) {
    let r = trace.resolution_ps;
    let mut p = r;
    let mut exp = 0;
    while p > 1 && p.is_multiple_of(10) {
        p /= 10;
        exp += 1;
    }
    let aligned = trace.waveforms.iter().flatten().all(|e| e.0 % r == 0);
    if p != 1 || !aligned {
        return (1, "1ps".into());
    }
    let unit = ["ps", "ns", "us", "ms", "s"][(exp / 3).min(4)];
    let mag = 10u64.pow((exp % 3) as u32);
    (r, format!("{mag}{unit}"))
}

fn write_filtered(
    trace: &Trace,
    nets: &[usize],
    start: u64,
    end: u64,
    out: &mut dyn Write,
) -> io::Result<()> {
    let (tick, scale) = timescale(trace);
    writeln!(out, "$date\n  (none)\n$end")?;
    writeln!(out, "$version\n  {VERSION}\n$end")?;
    writeln!(out, "$timescale {scale} $end")?;
    writeln!(out, "$scope module top $end")?;
    for (slot, &n) in nets.iter().enumerate() {
        writeln!(out, "$var wire 1 {} {} $end", ident(slot), trace.names[n])?;
    }
    writeln!(out, "$upscope $end")?;
    writeln!(out, "$enddefinitions $end")?;
    writeln!(out, "#{}", start / tick)?;
    writeln!(out, "$dumpvars")?;
    let mut last: Vec<LogicValue> = Vec::with_capacity(nets.len());
    for (slot, &n) in nets.iter().enumerate() {
        let v = trace.value_at(n, start);
        last.push(v);
        writeln!(out, "{}{}", v.as_char(), ident(slot))?;
    }
    writeln!(out, "$end")?;
    let mut changes: BTreeMap<u64, Vec<(usize, LogicValue)>> = BTreeMap::new();
    for (slot, &n) in nets.iter().enumerate() {
        let mut prev = last[slot];
        for &(t, s) in &trace.waveforms[n] {
            if t <= start || t > end {
                continue;
            }
            if s.value != prev {
                changes.entry(t).or_default().push((slot, s.value));
                prev = s.value;
            }
        }
    }
    for (t, list) in changes {
        writeln!(out, "#{}", t / tick)?;
        for (slot, v) in list {
            writeln!(out, "{}{}", v.as_char(), ident(slot))?;
        }
    }
    Ok(())
}

/// Write the whole trace as a VCD document. Output depends only on the
/// trace, so identical runs give identical bytes.
pub fn write_vcd(trace: &Trace, out: &mut dyn Write) -> io::Result<()> {
    let nets: Vec<usize> = (0..trace.names.len()).collect();
    write_filtered(trace, &nets, 0, u64::MAX, out)
}

pub fn vcd_string(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_vcd(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("VCD is ASCII")
}

/// VCD restricted to the named nets over `[start, end]`. Unknown names are
/// skipped.
pub fn vcd_excerpt(trace: &Trace, nets: &[&str], start: u64, end: u64) -> String {
    let idx: Vec<usize> = nets.iter().filter_map(|n| trace.net_index(n)).collect();
    let mut buf = Vec::new();
    write_filtered(trace, &idx, start, end, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("VCD is ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SignalState;

    #[test]
    fn identifiers_are_unique_and_printable() {
        let ids: Vec<String> = (0..10_000).map(ident).collect();
        let set: std::collections::BTreeSet<_> = ids.iter().collect();
        assert_eq!(set.len(), ids.len());
        assert!(ids.iter().all(|s| s.bytes().all(|b| (b'!'..=b'~').contains(&b))));
        assert_eq!(ident(0), "!");
        assert_eq!(ident(93), "~");
        assert_eq!(ident(94), "!!");
    }

    #[test]
    fn empty_trace_has_header_and_dumpvars() {
        let t = Trace::from_waveforms(1, 0, vec![], vec![]);
        let text = vcd_string(&t);
        assert!(text.contains("$enddefinitions $end\n#0\n$dumpvars\n$end\n"));
        assert!(text.ends_with("$dumpvars\n$end\n"));
        assert!(text.contains("$timescale 1ps $end"));
    }

    #[test]
    fn single_toggle_at_20ps() {
        use LogicValue::*;
        let w = vec![(0, SignalState::strong(One)), (20, SignalState::strong(Zero))];
        let t = Trace::from_waveforms(1, 40, vec!["q".into()], vec![w]);
        let text = vcd_string(&t);
        assert!(text.contains("$var wire 1 ! q $end"));
        assert!(text.ends_with("$dumpvars\n1!\n$end\n#20\n0!\n"));
    }

    #[test]
    fn coarse_timescale_when_aligned() {
        use LogicValue::*;
        let w = vec![(0, SignalState::strong(X)), (2000, SignalState::strong(One))];
        let t = Trace::from_waveforms(1000, 4000, vec!["a".into()], vec![w.clone()]);
        let text = vcd_string(&t);
        assert!(text.contains("$timescale 1ns $end"));
        assert!(text.ends_with("#2\n1!\n"));
        let t = Trace::from_waveforms(7, 4000, vec!["a".into()], vec![w]);
        assert!(vcd_string(&t).contains("$timescale 1ps $end"));
    }

    #[test]
    fn excerpt_starts_at_window() {
        use LogicValue::*;
        let w = vec![(0, SignalState::strong(Zero)), (10, SignalState::strong(One)), (30, SignalState::strong(Zero))];
        let t = Trace::from_waveforms(1, 40, vec!["a".into(), "b".into()], vec![w.clone(), w]);
        let text = vcd_excerpt(&t, &["b"], 15, 40);
        assert!(text.contains("$var wire 1 ! b $end"));
        assert!(!text.contains(" a $end"));
        assert!(text.ends_with("#15\n$dumpvars\n1!\n$end\n#30\n0!\n"));
    }
}
