// SPDX-License-Identifier: Apache-2.0

//! `detffsim`: simulate, characterize, verify and compare flip-flop cells.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use detffsim::cells::{cell_by_name, clocked_manifest, Cell, CellPorts, CELL_NAMES};
use detffsim::engine::{parse_config, parse_stimulus, run, write_vcd, SimConfig, Stimulus};
use detffsim::harness::{
    builtin_testbench, characterize_with, period_from_freq, prepare, verify_exhaustive, verify_random, Oracle, Testbench,
    TESTBENCH_NAMES,
};
use detffsim::metrics::{build_comparison, parse_rows, published_rows, render_csv, render_rows_csv, render_text};
use detffsim::netlist::{parse_netlist_with, serialize_netlist, NetKind, ParseOptions};
use detffsim::units::{parse_quantity, parse_time_ps, Quantity};

#[derive(Parser)]
#[command(name = "detffsim", version, about = "Switch-level simulator for dual-edge flip-flop cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a cell or netlist and write a VCD trace.
    Simulate(SimulateArgs),
    /// Measure power, clk-to-Q delay and PDP of a sequential cell.
    Characterize(CharacterizeArgs),
    /// Compare a cell against a behavioral flip-flop model.
    Verify(VerifyArgs),
    /// Print a comparison table with percentage improvements.
    Compare(CompareArgs),
    /// Print the netlist of a built-in cell.
    DumpCell(DumpCellArgs),
}

#[derive(Args)]
struct Source {
    /// Built-in cell name.
    #[arg(long, conflicts_with = "netlist")]
    cell: Option<String>,
    /// Netlist file; sequential use needs nets named d, clk and q.
    #[arg(long)]
    netlist: Option<PathBuf>,
    /// Reject devices outside W in [600, 1200] nm, L = 180 nm.
    #[arg(long)]
    check_sizing: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Stimulus file.
    #[arg(long, conflicts_with = "testbench")]
    stimulus: Option<PathBuf>,
    /// Built-in testbench (paper-sec3, const-d).
    #[arg(long)]
    testbench: Option<String>,
    /// Simulation config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the run length, e.g. `120ns`.
    #[arg(long)]
    duration: Option<String>,
    /// Override the time resolution, e.g. `1ps`.
    #[arg(long)]
    resolution: Option<String>,
    /// Override the supply voltage, e.g. `1.8V`.
    #[arg(long)]
    vdd: Option<String>,
    /// Testbench clock frequency, e.g. `125MHz`.
    #[arg(long)]
    freq: Option<String>,
    /// VCD output path.
    #[arg(long, default_value = "trace.vcd")]
    out: PathBuf,
}

#[derive(Args)]
struct CharacterizeArgs {
    #[command(flatten)]
    source: Source,
    /// Built-in testbench.
    #[arg(long, default_value = "paper-sec3")]
    testbench: String,
    /// Clock frequency, e.g. `62.5MHz`.
    #[arg(long)]
    freq: Option<String>,
    /// Load on Q, e.g. `21fF`.
    #[arg(long)]
    load: Option<String>,
    /// Supply voltage, e.g. `1.8V`.
    #[arg(long)]
    vdd: Option<String>,
    /// Short-circuit current, e.g. `2uA`.
    #[arg(long, default_value = "0")]
    isc: String,
    /// Leakage current, e.g. `10nA`.
    #[arg(long, default_value = "0")]
    ileak: String,
    /// Transitions per clock cycle for a net, replacing its recorded
    /// toggles, e.g. `q=0.5`. Repeatable.
    #[arg(long, value_name = "NET=P", value_parser = parse_activity)]
    activity: Vec<(String, f64)>,
    /// Print the row in rows-file CSV form.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Behavioral model: detff or setff.
    #[arg(long, default_value = "detff")]
    oracle: String,
    /// Random edges to check.
    #[arg(long, default_value_t = 10_000)]
    cycles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check every D sequence over this many edges instead.
    #[arg(long, value_name = "EDGES", value_parser = clap::value_parser!(u32).range(1..=20))]
    exhaustive: Option<u32>,
}

#[derive(Args)]
struct CompareArgs {
    /// Built-in table of published figures: `published` (alias `paper`).
    #[arg(long, conflicts_with = "rows", required_unless_present = "rows")]
    table: Option<String>,
    /// Rows file; the last row is compared against every other row.
    #[arg(long)]
    rows: Option<PathBuf>,
    /// Print improvements as CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct DumpCellArgs {
    /// Built-in cell name.
    cell: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Characterize(a) => cmd_characterize(a),
        Command::Verify(a) => verify(a),
        Command::Compare(a) => compare(a),
        Command::DumpCell(a) => dump_cell(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_cell(src: &Source) -> Result<Cell> {
    match (&src.cell, &src.netlist) {
        (Some(name), None) => {
            let cell = cell_by_name(name).with_context(|| format!("known cells: {}", CELL_NAMES.join(", ")))?;
            if src.check_sizing {
                cell.netlist.validate(true)?;
            }
            Ok(cell)
        }
        (None, Some(path)) => {
            let opts = ParseOptions {
                check_sizing: src.check_sizing,
                ..ParseOptions::default()
            };
            let parsed = parse_netlist_with(&read(path)?, opts).with_context(|| path.display().to_string())?;
            let netlist = parsed.flatten().with_context(|| path.display().to_string())?;
            let port = |name: &str, kind: NetKind| netlist.find_net(name).filter(|id| netlist.kind(*id) == kind);
            let ports = match (port("d", NetKind::Input), port("clk", NetKind::Input), netlist.find_net("q")) {
                (Some(data_in), Some(clock), Some(out)) => Some(CellPorts {
                    data_in,
                    clock,
                    out,
                    supply: netlist.supply(),
                    ground: netlist.ground(),
                }),
                _ => None,
            };
            let clocked = ports.map(|p| clocked_manifest(&netlist, &p)).unwrap_or_default();
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(Cell {
                name,
                netlist,
                ports,
                clocked,
            })
        }
        _ => bail!("give exactly one of --cell or --netlist"),
    }
}

fn testbench(name: &str, freq: Option<&str>) -> Result<Testbench> {
    let period = freq.map(period_from_freq).transpose()?;
    builtin_testbench(name, period).with_context(|| format!("known testbenches: {}", TESTBENCH_NAMES.join(", ")))
}

fn quantity(text: &str, kind: Quantity) -> Result<f64> {
    Ok(parse_quantity(text, kind)?)
}

/// Current in amperes; a trailing `A` is optional.
fn current(text: &str) -> Result<f64> {
    let t = text.trim();
    let t = t.strip_suffix(['A', 'a']).unwrap_or(t);
    let v = quantity(t, Quantity::Plain).with_context(|| format!("current `{text}`"))?;
    if !(v >= 0.0 && v.is_finite()) {
        bail!("current `{text}` must be non-negative");
    }
    Ok(v)
}

fn simulate(a: SimulateArgs) -> Result<bool> {
    let cell = load_cell(&a.source)?;
    let (netlist, stim, mut cfg): (_, Stimulus, SimConfig) = match (&a.stimulus, &a.testbench) {
        (Some(path), None) => {
            let stim = parse_stimulus(&read(path)?).with_context(|| path.display().to_string())?;
            (cell.netlist.clone(), stim, SimConfig::default())
        }
        (None, Some(name)) => {
            let mut tb = testbench(name, a.freq.as_deref())?;
            if let Some(v) = &a.vdd {
                tb.vdd = quantity(v, Quantity::Voltage)?;
            }
            let prep = prepare(&cell, tb.load_ff)?;
            let stim = tb.stimulus(&prep.d, &prep.clk);
            (prep.netlist, stim, tb.config())
        }
        _ => bail!("give exactly one of --stimulus or --testbench"),
    };
    if let Some(path) = &a.config {
        let file_cfg = parse_config(&read(path)?).with_context(|| path.display().to_string())?;
        cfg = file_cfg;
    }
    if let Some(d) = &a.duration {
        cfg.duration_ps = parse_time_ps(d)?;
    }
    if let Some(r) = &a.resolution {
        cfg.resolution_ps = parse_time_ps(r)?;
    }
    if let Some(v) = &a.vdd {
        cfg.vdd = quantity(v, Quantity::Voltage)?;
    }
    let trace = run(&netlist, &stim, &cfg)?;
    let mut file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_vcd(&trace, &mut file).with_context(|| format!("writing {}", a.out.display()))?;

    println!("{} nets, {} ps, wrote {}", trace.names.len(), trace.end_ps, a.out.display());
    let width = trace.names.iter().map(String::len).max().unwrap_or(3).max(3);
    println!("{:<width$}  {:>7}  final", "net", "toggles");
    for (i, name) in trace.names.iter().enumerate() {
        if netlist.nets[i].kind.is_rail() {
            continue;
        }
        println!("{name:<width$}  {:>7}  {}", trace.toggle_counts[i], trace.final_states[i]);
    }
    Ok(true)
}

fn cmd_characterize(a: CharacterizeArgs) -> Result<bool> {
    let cell = load_cell(&a.source)?;
    let mut tb = testbench(&a.testbench, a.freq.as_deref())?;
    if let Some(l) = &a.load {
        tb.load_ff = quantity(l, Quantity::Capacitance)?;
    }
    if let Some(v) = &a.vdd {
        tb.vdd = quantity(v, Quantity::Voltage)?;
    }
    let activity = a.activity.into_iter().collect();
    let ch = characterize_with(&cell, &tb, current(&a.isc)?, current(&a.ileak)?, activity)?;
    let p = &ch.power;
    if a.csv {
        let m = ch.metrics()?;
        print!("{}", render_rows_csv(&[(cell.name.clone(), m)]));
        return Ok(true);
    }
    println!("cell            {}", ch.cell);
    println!("testbench       {} ({} ps period, {} fF load, {} V)", ch.testbench, tb.clock_period_ps, tb.load_ff, tb.vdd);
    println!("window          [{}, {}) ps", ch.window.start_ps, ch.window.end_ps);
    println!("transistors     {} ({} clocked)", ch.transistor_count, ch.clocked_transistor_count);
    println!("clock power     {:.4} uW", p.clock_network_w * 1e6);
    println!("data power      {:.4} uW ({} toggles)", p.data_path_w * 1e6, ch.data_path_toggles);
    println!("constant power  {:.4} uW", p.constant_w * 1e6);
    println!("avg power       {:.4} uW", p.total_w * 1e6);
    let m = ch.metrics()?;
    let d = ch.clk_to_q.as_ref().map_err(|e| anyhow!("{e}"))?;
    println!("clk-to-Q        {} ps min, {} ps max over {} edges", d.min_ps, d.max_ps, d.per_edge.len());
    println!("PDP             {:.4} fJ", m.pdp_fj);
    println!("note: switch-level RC estimates; not comparable in absolute terms with post-layout figures");
    Ok(true)
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let cell = load_cell(&a.source)?;
    let oracle = Oracle::from_name(&a.oracle).ok_or_else(|| anyhow!("unknown oracle `{}` (setff, detff)", a.oracle))?;
    let report = match a.exhaustive {
        Some(edges) => verify_exhaustive(&cell, oracle, edges)?,
        None => verify_random(&cell, oracle, a.cycles, a.seed)?,
    };
    match &report.mismatch {
        None => {
            println!(
                "PASS {} vs {}: {} sequences, {} edges checked",
                cell.name, a.oracle, report.sequences, report.edges_checked
            );
            Ok(true)
        }
        Some(m) => {
            println!(
                "FAIL {} vs {}: edge {} ({:?} at {} ps) expected {} got {}",
                cell.name, a.oracle, m.edge_index, m.edge, m.edge_time_ps, m.expected, m.got
            );
            print!("{}", m.vcd_excerpt);
            Ok(false)
        }
    }
}

fn parse_activity(text: &str) -> Result<(String, f64), String> {
    let (net, p) = text.split_once('=').ok_or("expected NET=P")?;
    let p: f64 = p.trim().parse().map_err(|_| format!("bad activity `{p}`"))?;
    if net.trim().is_empty() || !(p >= 0.0 && p.is_finite()) {
        return Err("expected NET=P with P >= 0".into());
    }
    Ok((net.trim().to_string(), p))
}

fn compare(a: CompareArgs) -> Result<bool> {
    let rows = match (&a.table, &a.rows) {
        (Some(t), None) if t == "paper" || t == "published" => published_rows(),
        (Some(t), None) => bail!("unknown table `{t}` (published)"),
        (None, Some(path)) => parse_rows(&read(path)?).with_context(|| path.display().to_string())?,
        _ => bail!("give exactly one of --table or --rows"),
    };
    let baselines: Vec<String> = rows.iter().take(rows.len().saturating_sub(1)).map(|r| r.0.clone()).collect();
    let refs: Vec<&str> = baselines.iter().map(String::as_str).collect();
    let c = build_comparison(rows, &refs);
    if a.csv {
        print!("{}", render_csv(&c));
    } else {
        print!("{}", render_text(&c));
    }
    Ok(true)
}

fn dump_cell(a: DumpCellArgs) -> Result<bool> {
    let cell = cell_by_name(&a.cell).with_context(|| format!("known cells: {}", CELL_NAMES.join(", ")))?;
    print!("{}", serialize_netlist(&cell.netlist));
    if !cell.clocked.is_empty() {
        println!("* clocked: {}", cell.clocked.join(" "));
    }
    Ok(true)
}
