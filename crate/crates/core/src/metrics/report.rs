// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use serde::Deserialize;

use super::{improvement_pct, pdp_fj, CellMetrics, MetricsError};

/// Published figures for three reference dual-edge designs and the
/// proposed flip-flop, in the order they are compared.
pub fn published_rows() -> Vec<(String, CellMetrics)> {
    let row = |name: &str, area: f64, transistors: usize, delay: f64, power: f64, pdp: f64| {
        (
            name.to_string(),
            CellMetrics {
                avg_power_uw: power,
                min_clk_to_q_ps: delay,
                pdp_fj: pdp,
                transistor_count: transistors,
                clocked_transistor_count: None,
                layout_area_um2: Some(area),
            },
        )
    };
    vec![
        row("SCDFF", 682.2, 29, 234.5, 41.97, 9.80),
        row("DEPFF", 578.3, 29, 230.2, 37.05, 8.53),
        row("SEDNIFF", 497.7, 29, 217.7, 34.44, 7.49),
        row("Proposed DETFF", 183.06, 24, 259.6, 21.75, 5.64),
    ]
}

/// Change of the candidate against one baseline, in percent. Positive is
/// better for power, PDP, area and transistor count; the delay entry is the
/// signed increase.
#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub baseline: String,
    pub power_pct: f64,
    pub pdp_pct: f64,
    pub delay_increase_pct: f64,
    pub transistor_pct: f64,
    pub area_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<(String, CellMetrics)>,
    /// Improvements of the last row against each baseline, in order.
    pub improvements: Vec<Improvement>,
}

/// Tabulate `rows` and compare the last row against each named baseline.
/// Baselines that are missing or have a zero metric are skipped.
pub fn build_comparison(rows: Vec<(String, CellMetrics)>, baselines: &[&str]) -> Comparison {
    let mut improvements = Vec::new();
    if let Some((cand_name, cand)) = rows.last() {
        for base_name in baselines {
            let Some((_, base)) = rows.iter().find(|r| r.0 == *base_name && r.0 != *cand_name) else {
                continue;
            };
            let compute = || -> Result<Improvement, MetricsError> {
                let area_pct = match (base.layout_area_um2, cand.layout_area_um2) {
                    (Some(b), Some(c)) => Some(improvement_pct(b, c, true)?),
                    _ => None,
                };
                Ok(Improvement {
                    baseline: base_name.to_string(),
                    power_pct: improvement_pct(base.avg_power_uw, cand.avg_power_uw, true)?,
                    pdp_pct: improvement_pct(base.pdp_fj, cand.pdp_fj, true)?,
                    delay_increase_pct: improvement_pct(base.min_clk_to_q_ps, cand.min_clk_to_q_ps, false)?,
                    transistor_pct: improvement_pct(base.transistor_count as f64, cand.transistor_count as f64, true)?,
                    area_pct,
                })
            };
            if let Ok(imp) = compute() {
                improvements.push(imp);
            }
        }
    }
    Comparison { rows, improvements }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

/// Aligned plain-text table with an improvement summary and footer.
pub fn render_text(c: &Comparison) -> String {
    let header = [
        "Design",
        "Area (um^2)",
        "Transistors",
        "Clocked",
        "Min Clk-to-Q (ps)",
        "Avg Power (uW)",
        "PDP (fJ)",
    ];
    let cells: Vec<[String; 7]> = c
        .rows
        .iter()
        .map(|(name, m)| {
            [
                name.clone(),
                opt(m.layout_area_um2.map(|a| format!("{a:.2}"))),
                m.transistor_count.to_string(),
                opt(m.clocked_transistor_count),
                format!("{:.1}", m.min_clk_to_q_ps),
                format!("{:.2}", m.avg_power_uw),
                format!("{:.2}", m.pdp_fj),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, row: &[&str]| {
        let parts: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, w))| if i == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &cells {
        line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    if let (Some((cand, _)), false) = (c.rows.last(), c.improvements.is_empty()) {
        let _ = writeln!(out, "\n{cand} relative to each baseline:");
        for imp in &c.improvements {
            let _ = write!(
                out,
                "  vs {}: power {:.2}% lower, PDP {:.2}% lower, delay {:+.2}%, transistors {:.2}% fewer",
                imp.baseline, imp.power_pct, imp.pdp_pct, imp.delay_increase_pct, imp.transistor_pct
            );
            if let Some(a) = imp.area_pct {
                let _ = write!(out, ", area {a:.2}% smaller");
            }
            out.push('\n');
        }
    }
    out.push_str(
        "\nNotes:\n  Average power = switching power + Isc*Vdd + Ileak*Vdd; switching power counts\n  \
         C*Vdd^2/2 per full-swing toggle (the voltage swing is taken as Vdd).\n  \
         PDP = average power x minimum clk-to-Q delay.\n  \
         Area and reference-design rows are published figures passed through unchanged.\n",
    );
    out
}

/// Long-form improvements: `candidate,baseline,metric,improvement_pct`.
pub fn render_csv(c: &Comparison) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cand = c.rows.last().map(|r| r.0.clone()).unwrap_or_default();
    w.write_record(["candidate", "baseline", "metric", "improvement_pct"])
        .expect("in-memory write");
    for imp in &c.improvements {
        let mut metrics = vec![
            ("avg_power", imp.power_pct),
            ("pdp", imp.pdp_pct),
            ("clk_to_q_increase", imp.delay_increase_pct),
            ("transistors", imp.transistor_pct),
        ];
        if let Some(a) = imp.area_pct {
            metrics.push(("area", a));
        }
        for (metric, v) in metrics {
            w.write_record([cand.as_str(), imp.baseline.as_str(), metric, &format!("{v:.4}")])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub const ROWS_HEADER: &str = "design,area_um2,transistors,clocked_transistors,clk_to_q_ps,avg_power_uw,pdp_fj";

/// One line of a rows file.
#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
pub struct RowRecord {
    pub design: String,
    pub area_um2: Option<f64>,
    pub transistors: usize,
    pub clocked_transistors: Option<usize>,
    pub clk_to_q_ps: f64,
    pub avg_power_uw: f64,
    pub pdp_fj: Option<f64>,
}

/// Parse a rows file (CSV with [`ROWS_HEADER`] columns). Empty optional
/// fields are allowed; a missing PDP is computed from power and delay.
pub fn parse_rows(text: &str) -> Result<Vec<(String, CellMetrics)>, MetricsError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.deserialize::<RowRecord>() {
        let rec = rec.map_err(|e| MetricsError::Rows {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let bad = |message: &str| MetricsError::Rows {
            line: 0,
            message: format!("{}: {message}", rec.design),
        };
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(rec.clk_to_q_ps) || !nonneg(rec.avg_power_uw) {
            return Err(bad("power and delay must be non-negative"));
        }
        if rec.area_um2.is_some_and(|a| !nonneg(a)) || rec.pdp_fj.is_some_and(|p| !nonneg(p)) {
            return Err(bad("area and PDP must be non-negative"));
        }
        out.push((
            rec.design.clone(),
            CellMetrics {
                avg_power_uw: rec.avg_power_uw,
                min_clk_to_q_ps: rec.clk_to_q_ps,
                pdp_fj: rec.pdp_fj.unwrap_or_else(|| pdp_fj(rec.avg_power_uw, rec.clk_to_q_ps)),
                transistor_count: rec.transistors,
                clocked_transistor_count: rec.clocked_transistors,
                layout_area_um2: rec.area_um2,
            },
        ));
    }
    if out.is_empty() {
        return Err(MetricsError::Rows {
            line: 1,
            message: "no rows".into(),
        });
    }
    Ok(out)
}

/// Rows in the rows-file format, so measured results can be fed back in.
pub fn render_rows_csv(rows: &[(String, CellMetrics)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (name, m) in rows {
        w.serialize(RowRecord {
            design: name.clone(),
            area_um2: m.layout_area_um2,
            transistors: m.transistor_count,
            clocked_transistors: m.clocked_transistor_count,
            clk_to_q_ps: m.min_clk_to_q_ps,
            avg_power_uw: m.avg_power_uw,
            pdp_fj: Some(m.pdp_fj),
        })
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASELINES: [&str; 3] = ["SCDFF", "DEPFF", "SEDNIFF"];

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn published_pdp_is_self_consistent() {
        for (name, m) in published_rows() {
            let derived = pdp_fj(m.avg_power_uw, m.min_clk_to_q_ps);
            assert!((derived - m.pdp_fj).abs() / m.pdp_fj < 0.01, "{name}: {derived}");
        }
    }

    #[test]
    fn percentages_reproduce_summary_figures() {
        let c = build_comparison(published_rows(), &BASELINES);
        assert_eq!(c.improvements.len(), 3);
        let power = [48.17, 41.29, 36.84];
        let pdp = [42.44, 33.88, 24.69];
        let area = [73.16, 68.34, 63.21];
        let delay = [10.7, 12.77, 19.24];
        for (i, imp) in c.improvements.iter().enumerate() {
            assert!(close(imp.power_pct, power[i], 0.1), "{imp:?}");
            assert!(close(imp.pdp_pct, pdp[i], 0.1), "{imp:?}");
            assert!(close(imp.area_pct.unwrap(), area[i], 0.1), "{imp:?}");
            assert!(close(imp.delay_increase_pct, delay[i], 0.1), "{imp:?}");
        }
    }

    #[test]
    fn single_row_has_no_improvements() {
        let rows = vec![published_rows().remove(3)];
        let c = build_comparison(rows, &BASELINES);
        assert!(c.improvements.is_empty());
        let text = render_text(&c);
        assert!(!text.contains("relative to"));
        assert!(text.starts_with("Design"));
    }

    #[test]
    fn text_report_lists_rows_and_notes() {
        let c = build_comparison(published_rows(), &BASELINES);
        let text = render_text(&c);
        for name in ["SCDFF", "DEPFF", "SEDNIFF", "Proposed DETFF"] {
            assert!(text.contains(name));
        }
        assert!(text.contains("Vdd^2/2"));
        assert!(text.contains("vs SCDFF: power 48.18% lower"));
    }

    #[test]
    fn csv_export_is_long_form() {
        let c = build_comparison(published_rows(), &BASELINES);
        let text = render_csv(&c);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "candidate,baseline,metric,improvement_pct");
        assert_eq!(lines.len(), 1 + 3 * 5);
        assert!(lines[1].starts_with("Proposed DETFF,SCDFF,avg_power,48.1"));
    }

    #[test]
    fn rows_file_round_trip() {
        let text = render_rows_csv(&published_rows());
        assert!(text.starts_with(ROWS_HEADER));
        let back = parse_rows(&text).unwrap();
        assert_eq!(back, published_rows());
    }

    #[test]
    fn rows_file_optional_fields() {
        let text = format!("{ROWS_HEADER}\nmine,,18,8,135,10,\n");
        let rows = parse_rows(&text).unwrap();
        assert_eq!(rows[0].1.layout_area_um2, None);
        assert!(close(rows[0].1.pdp_fj, 1.35, 1e-12));
        assert!(parse_rows(&format!("{ROWS_HEADER}\nbad,,x,8,135,10,\n")).is_err());
        assert!(parse_rows(&format!("{ROWS_HEADER}\nneg,,18,8,-1,10,\n")).is_err());
        assert!(parse_rows(ROWS_HEADER).is_err());
    }
}
